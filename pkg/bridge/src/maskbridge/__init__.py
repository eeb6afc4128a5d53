"""Reference evaluator for mask-tuning studies.

Speaks the line-delimited JSON evaluator protocol: for each request it
inpaints every (original, mask) pair with a classical OpenCV backend
and replies with the Fréchet distance between patch-feature
distributions of the inpainted set and the ground-truth set.
"""

from .config import CACHE_ENV, FID_MODES, BridgeConfig, default_cache_dir
from .fid import frechet_distance, gaussian_stats, patch_features, score_sets
from .inpaint import MODELS, inpaint_pair, load_mask, load_rgb
from .server import PROTOCOL_VERSION, BridgeError, score_request, serve

__version__ = "0.1.0"

__all__ = [
    "BridgeConfig",
    "BridgeError",
    "CACHE_ENV",
    "FID_MODES",
    "MODELS",
    "PROTOCOL_VERSION",
    "default_cache_dir",
    "frechet_distance",
    "gaussian_stats",
    "inpaint_pair",
    "load_mask",
    "load_rgb",
    "patch_features",
    "score_request",
    "score_sets",
    "serve",
]
