"""Bridge configuration and ground-truth lookup."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

FID_MODES = ("set-level", "per-image-averaged")

# Image extensions tried, in order, when resolving an id in the
# ground-truth directory.
_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")

CACHE_ENV = "MASKBRIDGE_CACHE_DIR"


def default_cache_dir() -> Path:
    """Where downloadable model weights would live.

    Controlled by the ``MASKBRIDGE_CACHE_DIR`` environment variable.
    The built-in inpainting models ship with OpenCV and never touch it,
    but backends that do download weights must store them here.
    """
    return Path(os.environ.get(CACHE_ENV, "~/.cache/maskbridge")).expanduser()


@dataclass
class BridgeConfig:
    """Everything one serving process needs.

    ``model`` picks an inpainting backend, ``fid_mode`` picks whether
    the score is one distance between the full inpainted and
    ground-truth sets or the mean of per-image distances.
    """

    ground_truth_dir: Path
    model: str = "telea"
    device: str = "cpu"
    fid_mode: str = "set-level"
    cache_dir: Path = field(default_factory=default_cache_dir)

    def __post_init__(self):
        from .inpaint import MODELS, supported_devices

        self.ground_truth_dir = Path(self.ground_truth_dir)
        self.cache_dir = Path(self.cache_dir)
        if not self.ground_truth_dir.is_dir():
            raise ValueError(f"ground-truth directory not found: {self.ground_truth_dir}")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {sorted(MODELS)}, got {self.model!r}")
        devices = supported_devices(self.model)
        if self.device not in devices:
            raise ValueError(
                f"model {self.model!r} supports devices {devices}, got {self.device!r}"
            )
        if self.fid_mode not in FID_MODES:
            raise ValueError(f"fid_mode must be one of {FID_MODES}, got {self.fid_mode!r}")

    def ground_truth_path(self, item_id: str) -> Path:
        """Resolve one item id to its ground-truth image file."""
        for ext in _EXTENSIONS:
            candidate = self.ground_truth_dir / f"{item_id}{ext}"
            if candidate.exists():
                return candidate
        raise KeyError(item_id)

    def missing_ids(self, item_ids) -> list:
        """Ids from the request that the ground-truth directory lacks."""
        missing = []
        for item_id in item_ids:
            try:
                self.ground_truth_path(item_id)
            except KeyError:
                missing.append(item_id)
        return missing
