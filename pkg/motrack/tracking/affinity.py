"""Tracklet-to-detection affinities: appearance, motion, shape."""
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .constants import W1_MOTION, W2_SHAPE, W3_QUALITY
from .exceptions import ConfigError, ContractViolation
from .mot_data import AppearanceFeature, Detection


@dataclass(frozen=True)
class AffinityParams:
    w1: float = W1_MOTION
    w2: float = W2_SHAPE
    w3: float = W3_QUALITY

    def __post_init__(self):
        errors = [
            f'{name} must be strictly positive, got {value}'
            for name, value in (('w1', self.w1), ('w2', self.w2),
                                ('w3', self.w3))
            if not value > 0
        ]
        if errors:
            raise ConfigError(errors)


@dataclass(frozen=True, eq=False)
class TrackletSnapshot:
    center: Tuple[float, float]
    size: Tuple[float, float]
    feature: AppearanceFeature

    def __post_init__(self):
        if not (self.size[0] > 0 and self.size[1] > 0):
            raise ContractViolation(f'snapshot size {self.size} not positive')


def appearance_affinity(a: AppearanceFeature, b: AppearanceFeature) -> float:
    """Cosine similarity, left unclamped in [-1, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ContractViolation(
            f'feature dimensions differ: {a.shape} vs {b.shape}'
        )
    norm = np.linalg.norm(a) * np.linalg.norm(b)
    if norm <= 0:
        raise ContractViolation('cosine similarity of a zero vector')
    return float(np.clip(np.dot(a, b) / norm, -1.0, 1.0))


def motion_affinity(
    t: TrackletSnapshot, d: Detection, p: AffinityParams
) -> float:
    cx, cy = d.bbox.center()
    dx = (t.center[0] - cx) / d.bbox.w
    dy = (t.center[1] - cy) / d.bbox.h
    return math.exp(-p.w1 * (dx * dx + dy * dy))


def shape_affinity(
    t: TrackletSnapshot, d: Detection, p: AffinityParams
) -> float:
    w_t, h_t = t.size
    w_d, h_d = d.bbox.w, d.bbox.h
    return math.exp(-p.w2 * (
        abs(h_t - h_d) / (h_t + h_d) + abs(w_t - w_d) / (w_t + w_d)
    ))


def combined_affinity(
    t: TrackletSnapshot, d: Detection, p: AffinityParams
) -> float:
    if d.feature is None:
        raise ContractViolation(
            f'detection at frame {d.frame} carries no appearance feature'
        )
    return (
        appearance_affinity(t.feature, d.feature)
        * motion_affinity(t, d, p)
        * shape_affinity(t, d, p)
    )


def affinity_matrix(
    tracklets: Sequence[TrackletSnapshot],
    detections: Sequence[Detection],
    p: AffinityParams,
) -> np.ndarray:
    """Vectorized :func:`combined_affinity` for every (tracklet, detection)."""
    if any(det.feature is None for det in detections):
        raise ContractViolation('every detection needs an appearance feature')
    if not tracklets or not detections:
        return np.zeros((len(tracklets), len(detections)), dtype=np.float64)

    track_features = np.vstack([t.feature for t in tracklets])
    det_features = np.vstack([det.feature for det in detections])
    if track_features.shape[1] != det_features.shape[1]:
        raise ContractViolation(
            f'feature dimensions differ: {track_features.shape[1]} vs '
            f'{det_features.shape[1]}'
        )
    cosine = (track_features @ det_features.T) / np.outer(
        np.linalg.norm(track_features, axis=1),
        np.linalg.norm(det_features, axis=1),
    )
    appearance = np.clip(cosine, -1.0, 1.0)

    centers = np.array([t.center for t in tracklets], dtype=np.float64)
    sizes = np.array([t.size for t in tracklets], dtype=np.float64)
    boxes = np.array(
        [[*det.bbox.center(), det.bbox.w, det.bbox.h] for det in detections],
        dtype=np.float64,
    )
    dx = (centers[:, None, 0] - boxes[None, :, 0]) / boxes[None, :, 2]
    dy = (centers[:, None, 1] - boxes[None, :, 1]) / boxes[None, :, 3]
    motion = np.exp(-p.w1 * (dx * dx + dy * dy))

    w_t, h_t = sizes[:, None, 0], sizes[:, None, 1]
    w_d, h_d = boxes[None, :, 2], boxes[None, :, 3]
    shape = np.exp(-p.w2 * (
        np.abs(h_t - h_d) / (h_t + h_d) + np.abs(w_t - w_d) / (w_t + w_d)
    ))
    return appearance * motion * shape
