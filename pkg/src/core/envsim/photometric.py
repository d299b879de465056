import numpy as np
from matplotlib.colors import hsv_to_rgb, rgb_to_hsv

from src.core.envsim.sim_typings import Observation

GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114])


def gray(pixels: np.ndarray) -> np.ndarray:
    """Luma of a (..., 3) float array."""
    return pixels @ GRAY_WEIGHTS


def apply_photometric(
    img: Observation,
    brightness: float = 1.0,
    contrast: float = 1.0,
    saturation: float = 1.0,
    hue_shift: float = 0.0,
) -> Observation:
    """
    Apply hue -> saturation -> contrast -> brightness on [0, 1] floats and re-quantize.
    Identity stages are skipped, so the identity tuple returns the input bit-exact.
    """
    if (brightness, contrast, saturation, hue_shift) == (1.0, 1.0, 1.0, 0.0):
        return img

    pixels = np.moveaxis(img.rgb, 0, -1).astype(np.float64) / 255.0

    if hue_shift != 0.0:
        hsv = rgb_to_hsv(pixels)
        hsv[..., 0] = np.mod(hsv[..., 0] + hue_shift, 1.0)
        pixels = hsv_to_rgb(hsv)

    if saturation != 1.0:
        luma = gray(pixels)[..., None]
        pixels = saturation * pixels + (1.0 - saturation) * luma

    if contrast != 1.0:
        pivot = gray(pixels).mean()
        pixels = contrast * pixels + (1.0 - contrast) * pivot

    if brightness != 1.0:
        pixels = brightness * pixels

    pixels = np.clip(pixels, 0.0, 1.0)
    rgb = np.round(pixels * 255.0).astype(np.uint8)
    return Observation(np.ascontiguousarray(np.moveaxis(rgb, -1, 0)))
