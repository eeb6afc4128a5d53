"""Inpainting backends and image loading.

All built-in backends are classical OpenCV inpainting routines: they
ship with the library, need no weight downloads, and are deterministic.
A backend receives the RGB image, the binary mask and the bridge
config; it must leave unmasked pixels untouched.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

import cv2

INPAINT_RADIUS = 3


def load_rgb(path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def load_mask(path) -> np.ndarray:
    """Read a mask image; any pixel above 127 counts as masked."""
    with Image.open(path) as img:
        gray = np.asarray(img.convert("L"))
    return ((gray > 127) * np.uint8(255)).astype(np.uint8)


def _telea(image: np.ndarray, mask: np.ndarray, config) -> np.ndarray:
    return cv2.inpaint(np.ascontiguousarray(image), mask, INPAINT_RADIUS, cv2.INPAINT_TELEA)


def _navier_stokes(image: np.ndarray, mask: np.ndarray, config) -> np.ndarray:
    return cv2.inpaint(np.ascontiguousarray(image), mask, INPAINT_RADIUS, cv2.INPAINT_NS)


def _identity(image: np.ndarray, mask: np.ndarray, config) -> np.ndarray:
    return image.copy()


# name -> (backend, supported devices)
MODELS = {
    "telea": (_telea, ("cpu",)),
    "ns": (_navier_stokes, ("cpu",)),
    "identity": (_identity, ("cpu",)),
}


def supported_devices(model: str) -> tuple:
    return MODELS[model][1]


def inpaint_pair(image: np.ndarray, mask: np.ndarray, config) -> np.ndarray:
    """Fill the masked region of ``image`` from its surroundings.

    An all-zero mask short-circuits: the output is the input, untouched.
    """
    if image.shape[:2] != mask.shape:
        raise ValueError(
            f"mask shape {mask.shape} does not match image shape {image.shape[:2]}"
        )
    if not mask.any():
        return image.copy()
    backend = MODELS[config.model][0]
    return backend(image, mask, config)
