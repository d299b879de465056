from enum import IntEnum
from pathlib import Path

ROOT_DIR = Path(__file__).parent.parent.parent
DATA_DIR = ROOT_DIR / "data"
CONFIGS_DIR = ROOT_DIR / "configs"

CELL_SIZE = 0.25
IMAGE_SIZE = 48
T_MAX = 500
SUCCESS_DISTANCE = 1.0
STEP_PENALTY = -0.01
SUCCESS_REWARD = 10.0
MAX_PITCH = 60.0

CATEGORIES: tuple[str, ...] = (
    "AlarmClock",
    "Apple",
    "BaseballBat",
    "BasketBall",
    "Bowl",
    "GarbageCan",
    "HousePlant",
    "Laptop",
    "Mug",
    "SprayBottle",
    "Television",
    "Vase",
)
N_CATEGORIES = len(CATEGORIES)

# One colour per category, far enough apart to stay distinct under hue shifts of ±0.1.
CATEGORY_COLORS: tuple[tuple[int, int, int], ...] = (
    (230, 25, 75),
    (60, 180, 75),
    (255, 225, 25),
    (0, 130, 200),
    (245, 130, 48),
    (145, 30, 180),
    (70, 240, 240),
    (240, 50, 230),
    (210, 245, 60),
    (250, 190, 212),
    (0, 128, 128),
    (170, 110, 40),
)
WALL_COLOR = (150, 150, 150)
BACKGROUND_COLOR = (40, 44, 52)


class Action(IntEnum):
    """
    Discrete navigation actions.
    Variants:
    - MoveAhead - advance by the translation step along the heading
    - RotateLeft - heading += rotation step
    - RotateRight - heading -= rotation step
    - LookUp - pitch += look step
    - LookDown - pitch -= look step
    - End - declare the episode finished
    """

    MoveAhead = 0
    RotateLeft = 1
    RotateRight = 2
    LookUp = 3
    LookDown = 4
    End = 5


N_ACTIONS = len(Action)
