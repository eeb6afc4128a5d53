"""Fréchet distance between image sets over handcrafted patch features.

The score has the same form as FID: fit a Gaussian to the feature
distribution of each image set and take the Fréchet distance between
the two Gaussians.  Instead of a pretrained embedding network the
features are deterministic per-patch statistics (brightness, contrast,
opponent colors, gradient energy), so the bridge needs no weight
downloads and scores identically on every run.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

import cv2

# Images are analyzed at a fixed working size on a fixed patch grid so
# sets of mixed resolutions are comparable.
FEATURE_SIZE = 256
PATCH_GRID = 8

_EPS = 1e-6


def patch_features(image: np.ndarray) -> np.ndarray:
    """Per-patch statistics of one RGB image, shape (PATCH_GRID**2, 8)."""
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected an RGB image, got shape {image.shape}")
    resized = cv2.resize(
        np.ascontiguousarray(image), (FEATURE_SIZE, FEATURE_SIZE), interpolation=cv2.INTER_AREA
    )
    rgb = resized.astype(np.float64) / 255.0
    gray = rgb.mean(axis=2)
    dy, dx = np.gradient(gray)
    grad = np.hypot(dx, dy)

    step = FEATURE_SIZE // PATCH_GRID
    rows = []
    for py in range(PATCH_GRID):
        for px in range(PATCH_GRID):
            sl = np.s_[py * step : (py + 1) * step, px * step : (px + 1) * step]
            g = gray[sl]
            c = rgb[sl]
            e = grad[sl]
            rows.append(
                [
                    g.mean(),
                    g.std(),
                    (c[..., 0] - c[..., 1]).mean(),
                    (c[..., 1] - c[..., 2]).mean(),
                    np.abs(dx[sl]).mean(),
                    np.abs(dy[sl]).mean(),
                    e.std(),
                    float((e > 0.05).mean()),
                ]
            )
    return np.asarray(rows)


def gaussian_stats(features: np.ndarray):
    """Mean and covariance of a feature matrix (rows are samples)."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    mu = features.mean(axis=0)
    cov = np.cov(features, rowvar=False)
    cov = np.atleast_2d(cov) + _EPS * np.eye(features.shape[1])
    return mu, cov


def frechet_distance(mu1, cov1, mu2, cov2) -> float:
    """Squared Fréchet distance between two Gaussians.

    d^2 = |mu1 - mu2|^2 + tr(C1 + C2 - 2 (C1 C2)^(1/2)), clamped to be
    nonnegative against sqrtm round-off.
    """
    mu1 = np.asarray(mu1, dtype=float)
    mu2 = np.asarray(mu2, dtype=float)
    cov1 = np.atleast_2d(np.asarray(cov1, dtype=float))
    cov2 = np.atleast_2d(np.asarray(cov2, dtype=float))

    diff = mu1 - mu2
    covmean, _ = scipy.linalg.sqrtm(cov1 @ cov2, disp=False)
    if not np.isfinite(covmean).all():
        jitter = _EPS * np.eye(cov1.shape[0])
        covmean, _ = scipy.linalg.sqrtm((cov1 + jitter) @ (cov2 + jitter), disp=False)
    if np.iscomplexobj(covmean):
        covmean = covmean.real
    value = diff @ diff + np.trace(cov1) + np.trace(cov2) - 2.0 * np.trace(covmean)
    return float(max(value, 0.0))


def score_sets(outputs, truths, fid_mode: str) -> float:
    """Distance from a list of output images to their ground truths.

    ``set-level`` pools every patch of every image into one distribution
    per set; ``per-image-averaged`` scores each (output, truth) pair
    separately and returns the mean.
    """
    if len(outputs) != len(truths):
        raise ValueError(f"got {len(outputs)} outputs for {len(truths)} ground truths")
    if not outputs:
        raise ValueError("cannot score an empty image set")
    if fid_mode == "set-level":
        out_feats = np.vstack([patch_features(img) for img in outputs])
        true_feats = np.vstack([patch_features(img) for img in truths])
        return frechet_distance(*gaussian_stats(out_feats), *gaussian_stats(true_feats))
    if fid_mode == "per-image-averaged":
        scores = [
            frechet_distance(
                *gaussian_stats(patch_features(out)), *gaussian_stats(patch_features(truth))
            )
            for out, truth in zip(outputs, truths)
        ]
        return float(np.mean(scores))
    raise ValueError(f"unknown fid_mode {fid_mode!r}")
