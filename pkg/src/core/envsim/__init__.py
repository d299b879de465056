from .dynamics import step
from .geodesic import distance_field, geodesic_distance
from .nav_env import NavigationEnv
from .photometric import apply_photometric
from .render import export_ppm, render
from .scenes import generate_scene, load_scene, sample_domain_factor, save_scene
from .sim_typings import (
    AgentState,
    DomainFactor,
    FovGroup,
    GridScene,
    Observation,
    SceneObject,
    StepOutcome,
)

__all__ = [
    "AgentState",
    "DomainFactor",
    "FovGroup",
    "GridScene",
    "NavigationEnv",
    "Observation",
    "SceneObject",
    "StepOutcome",
    "apply_photometric",
    "distance_field",
    "export_ppm",
    "generate_scene",
    "geodesic_distance",
    "load_scene",
    "render",
    "sample_domain_factor",
    "save_scene",
    "step",
]
