import numpy as np
import pytest

from src.core.consts import CATEGORY_COLORS, N_CATEGORIES, Action
from src.core.envsim import AgentState, DomainFactor, GridScene, SceneObject, geodesic_distance, render, step
from src.core.errors import ContractViolationError
from src.core.expert_data import (
    Trajectory,
    align_trajectories,
    collect_and_align,
    expert_policy,
    f1_score,
    load_dataset,
    load_scenes,
    presence_vector,
    replay_states,
    replay_trajectory,
    save_dataset,
)


def make_trajectory(factor_id, goal, presence):
    presences = np.asarray([presence], dtype=np.uint8)
    return Trajectory(
        factor_id=factor_id,
        goal=goal,
        scene_index=0,
        start=AgentState(0.5, 0.5),
        actions=np.asarray([int(Action.End)]),
        rewards=np.zeros(1),
        dones=np.ones(1, dtype=bool),
        frames=np.zeros((1, 3, 8, 8), dtype=np.uint8),
        presences=presences,
    )


def brute_f1(m1, m2):
    tp = sum(a and b for a, b in zip(m1, m2))
    if tp == 0:
        return 0.0
    precision, recall = tp / sum(m2), tp / sum(m1)
    return 2 * precision * recall / (precision + recall)


def test_f1_matches_precision_recall_definition(rng):
    for _ in range(200):
        m1, m2 = rng.integers(0, 2, size=(2, N_CATEGORIES))
        assert f1_score(m1, m2) == pytest.approx(brute_f1(m1, m2))


def test_f1_edge_cases():
    zeros, ones = np.zeros(N_CATEGORIES), np.ones(N_CATEGORIES)
    assert f1_score(zeros, ones) == 0.0
    assert f1_score(ones, ones) == 1.0
    with pytest.raises(ValueError):
        f1_score(np.ones(3), np.ones(4))


def test_alignment_matches_brute_force(rng):
    trajectories = {
        factor_id: [
            make_trajectory(factor_id, int(rng.integers(0, 2)), rng.integers(0, 2, N_CATEGORIES))
            for _ in range(6)
        ]
        for factor_id in range(3)
    }
    kappa = 0.4
    expected = []
    for base_index, base in enumerate(trajectories[0]):
        for factor_id in (1, 2):
            scored = [
                (f1_score(base.presence, other.presence), -i)
                for i, other in enumerate(trajectories[factor_id])
                if other.goal == base.goal
            ]
            if not scored:
                continue
            best_f1, neg_index = max(scored)
            if best_f1 >= kappa:
                expected.append((base_index, factor_id, -neg_index))

    pairs = align_trajectories(trajectories, kappa)
    assert [(p.base_index, p.factor_id, p.other_index) for p in pairs] == expected
    assert all(p.f1 >= kappa for p in pairs)


def test_collected_trajectories_succeed(manifest):
    assert set(manifest.trajectories) == {0, 1}
    for trajectory in manifest.all_trajectories():
        assert trajectory.actions[-1] == int(Action.End)
        assert trajectory.dones[-1] and not trajectory.dones[:-1].any()
        assert trajectory.rewards[-1] > 5.0
        assert trajectory.frames.shape == (trajectory.length, 3, 16, 16)


def test_replay_reproduces_rewards(manifest):
    for trajectory in manifest.all_trajectories():
        factor = manifest.factors[trajectory.factor_id]
        rewards, dones = replay_trajectory(trajectory, manifest.scenes, factor)
        np.testing.assert_array_equal(rewards, trajectory.rewards)
        np.testing.assert_array_equal(dones, trajectory.dones)


def test_replay_states_rerender_frames(manifest):
    trajectory = manifest.trajectories[1][0]
    factor = manifest.factors[1]
    states = replay_states(trajectory, manifest.scenes, factor)
    assert len(states) == trajectory.length
    scene = manifest.scenes[trajectory.scene_index]
    for state, frame in zip(states, trajectory.frames):
        np.testing.assert_array_equal(render(scene, state, factor, 16).rgb, frame)


def test_collection_is_deterministic(scenes):
    kwargs = dict(n_per_factor=2, kappa=0.5, seed=5, image_size=16, max_steps=200, show_progress=False)
    a = collect_and_align(scenes, [DomainFactor()], **kwargs)
    b = collect_and_align(scenes, [DomainFactor()], **kwargs)
    for left, right in zip(a.all_trajectories(), b.all_trajectories()):
        np.testing.assert_array_equal(left.actions, right.actions)
        np.testing.assert_array_equal(left.frames, right.frames)


def test_collection_rejects_bad_kappa(scenes):
    with pytest.raises(ContractViolationError):
        collect_and_align(scenes, [DomainFactor()], 1, kappa=0.0, seed=0)


def test_dataset_round_trip(manifest, tmp_path):
    save_dataset(manifest, tmp_path / "dataset", config_digest="abc")
    loaded = load_dataset(tmp_path / "dataset")
    assert loaded.counts == manifest.counts
    assert loaded.factors == manifest.factors
    assert loaded.pairs == manifest.pairs
    for left, right in zip(loaded.all_trajectories(), manifest.all_trajectories()):
        np.testing.assert_array_equal(left.frames, right.frames)
        np.testing.assert_array_equal(left.presences, right.presences)
        assert left.start == right.start
    assert len(load_scenes(tmp_path / "dataset")) == len(manifest.scenes)


def test_frame_table_covers_every_frame(manifest):
    table = manifest.frame_table()
    assert len(table) == manifest.counts["samples"]
    assert set(np.unique(table.factor_ids)) == {0, 1}
    subset = table.subset(np.arange(3))
    assert len(subset) == 3


def bordered_room(size, wall_cells, goal_cell):
    walls = np.zeros((size, size), dtype=bool)
    walls[0, :] = walls[-1, :] = walls[:, 0] = walls[:, -1] = True
    for cell in wall_cells:
        walls[cell] = True
    return GridScene(size, size, walls, [SceneObject(0, goal_cell, CATEGORY_COLORS[0])])


def run_expert(scene, agent, factor, horizon=40):
    d_prev = geodesic_distance(scene, (agent.x, agent.y), 0)
    actions = []
    for t in range(horizon):
        action = expert_policy(scene, agent, 0, factor)
        outcome = step(scene, agent, action, factor, 0, d_prev, t)
        actions.append(action)
        agent, d_prev = outcome.next_agent, outcome.geodesic
        if outcome.done:
            return actions, outcome
    return actions, outcome


@pytest.mark.parametrize(
    "col, heading, expected",
    [(11, 0.0, Action.End), (1, 0.0, Action.MoveAhead), (1, 270.0, Action.RotateLeft)],
)
def test_expert_policy_decisions(corridor, col, heading, expected):
    agent = AgentState(*corridor.cell_center(1, col), heading=heading)
    assert expert_policy(corridor, agent, 0, DomainFactor(rotation_step=30)) == expected


@pytest.mark.parametrize("stride", [0.25, 0.5])
def test_expert_turns_early_corners_at_any_stride(stride):
    # The shortest cell path leaves (1, 5) east along the border, one cell short of the wall.
    scene = bordered_room(8, [(2, 5), (3, 5), (4, 5), (5, 5)], (6, 6))
    factor = DomainFactor(rotation_step=90, translation_step=stride)
    actions, outcome = run_expert(scene, AgentState(*scene.cell_center(1, 5), heading=0.0), factor)
    assert outcome.success
    assert actions[-1] == Action.End and len(actions) < 40


def test_expert_ends_when_no_stride_route_exists():
    walls = np.ones((12, 7), dtype=bool)
    walls[1, 1:6] = False
    walls[1:11, 5] = False
    scene = GridScene(7, 12, walls, [SceneObject(0, (10, 5), CATEGORY_COLORS[0])])
    agent = AgentState(*scene.cell_center(1, 4), heading=0.0)
    factor = DomainFactor(rotation_step=90, translation_step=0.5)
    assert expert_policy(scene, agent, 0, factor) == Action.End
    actions, outcome = run_expert(scene, agent, factor)
    assert actions == [Action.End] and not outcome.success


def test_presence_of_empty_scene_is_all_zero(corridor):
    empty = GridScene(corridor.width, corridor.height, corridor.walls, [])
    assert not presence_vector(empty, AgentState(*empty.cell_center(1, 1)), DomainFactor(), 16).any()


@pytest.mark.parametrize("occluded, expected", [(False, 1), (True, 0)])
def test_presence_respects_occlusion(corridor, occluded, expected):
    walls = corridor.walls.copy()
    walls[1, 8] = occluded
    scene = GridScene(corridor.width, corridor.height, walls, corridor.objects)
    presence = presence_vector(scene, AgentState(*scene.cell_center(1, 1), heading=0.0), DomainFactor(), 16)
    assert presence[0] == expected
    assert presence[1:].sum() == 0


def test_single_factor_collects_no_pairs(scenes):
    manifest = collect_and_align(
        scenes, [DomainFactor()], 2, kappa=0.5, seed=1, image_size=16, max_steps=200, show_progress=False
    )
    assert manifest.trajectories[0]
    assert manifest.pairs == []


def test_shared_starts_align_with_full_f1(scenes):
    factors = [DomainFactor(), DomainFactor(brightness=1.3, hue_shift=-0.05)]
    manifest = collect_and_align(
        scenes, factors, 3, kappa=0.7, seed=0, shared_starts=True, image_size=16, max_steps=200,
        show_progress=False,
    )
    seeing = [t for t in manifest.trajectories[0] if t.presence.any()]
    assert seeing
    assert len(manifest.pairs) == len(seeing)
    assert all(pair.f1 == 1.0 for pair in manifest.pairs)
