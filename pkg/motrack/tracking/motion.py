"""Constant-velocity Kalman filter over (cx, cy, w, h).

The state is ``(cx, cy, w, h, vcx, vcy, vw, vh)`` with one frame per step.
Every operation returns a new :class:`MotionState`.
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .affinity import TrackletSnapshot
from .constants import (INITIAL_POSITION_VAR, INITIAL_VELOCITY_VAR,
                        MEASUREMENT_VAR, MIN_BOX_SIDE, PROCESS_POSITION_VAR,
                        PROCESS_VELOCITY_VAR)
from .exceptions import ConfigError
from .mot_data import AppearanceFeature, Detection

NDIM = 4

_motion_mat = np.eye(2 * NDIM)
for _i in range(NDIM):
    _motion_mat[_i, NDIM + _i] = 1.0
_update_mat = np.eye(NDIM, 2 * NDIM)


@dataclass(frozen=True)
class MotionNoiseConfig:
    process_position_var: float = PROCESS_POSITION_VAR
    process_velocity_var: float = PROCESS_VELOCITY_VAR
    measurement_var: float = MEASUREMENT_VAR
    initial_position_var: float = INITIAL_POSITION_VAR
    initial_velocity_var: float = INITIAL_VELOCITY_VAR

    def __post_init__(self):
        errors = [
            f'{name} must be >= 0, got {value}'
            for name, value in vars(self).items()
            if not value >= 0
        ]
        if errors:
            raise ConfigError(errors)

    @property
    def process_cov(self) -> np.ndarray:
        return np.diag(
            [self.process_position_var] * NDIM
            + [self.process_velocity_var] * NDIM
        )

    @property
    def measurement_cov(self) -> np.ndarray:
        return np.diag([self.measurement_var] * NDIM)


@dataclass(frozen=True, eq=False)
class MotionState:
    mean: np.ndarray
    covariance: np.ndarray
    noise: MotionNoiseConfig

    @property
    def center(self):
        return float(self.mean[0]), float(self.mean[1])

    @property
    def size(self):
        return float(self.mean[2]), float(self.mean[3])


def _measurement(d: Detection) -> np.ndarray:
    cx, cy = d.bbox.center()
    return np.array([cx, cy, d.bbox.w, d.bbox.h], dtype=np.float64)


def _symmetrize(covariance: np.ndarray) -> np.ndarray:
    return (covariance + covariance.T) / 2


def init_motion(d: Detection, cfg: MotionNoiseConfig) -> MotionState:
    mean = np.r_[_measurement(d), np.zeros(NDIM)]
    covariance = np.diag(
        [cfg.initial_position_var] * NDIM
        + [cfg.initial_velocity_var] * NDIM
    )
    return MotionState(mean, covariance, cfg)


def predict(s: MotionState) -> MotionState:
    mean = _motion_mat @ s.mean
    mean[2:4] = np.maximum(mean[2:4], MIN_BOX_SIDE)
    covariance = np.linalg.multi_dot(
        (_motion_mat, s.covariance, _motion_mat.T)
    ) + s.noise.process_cov
    return MotionState(mean, _symmetrize(covariance), s.noise)


def _gain(covariance: np.ndarray, projected_cov: np.ndarray) -> np.ndarray:
    cross = covariance @ _update_mat.T
    try:
        factor = linalg.cho_factor(projected_cov, lower=True,
                                   check_finite=False)
        return linalg.cho_solve(factor, cross.T, check_finite=False).T
    except linalg.LinAlgError:
        return cross @ np.linalg.pinv(projected_cov)


def update(s: MotionState, d: Detection) -> MotionState:
    measurement_cov = s.noise.measurement_cov
    projected_mean = _update_mat @ s.mean
    projected_cov = np.linalg.multi_dot(
        (_update_mat, s.covariance, _update_mat.T)
    ) + measurement_cov
    gain = _gain(s.covariance, projected_cov)
    mean = s.mean + gain @ (_measurement(d) - projected_mean)

    # Joseph form keeps the posterior symmetric PSD.
    residual = np.eye(2 * NDIM) - gain @ _update_mat
    covariance = (
        np.linalg.multi_dot((residual, s.covariance, residual.T))
        + np.linalg.multi_dot((gain, measurement_cov, gain.T))
    )
    return MotionState(mean, _symmetrize(covariance), s.noise)


def snapshot(s: MotionState, f: AppearanceFeature) -> TrackletSnapshot:
    return TrackletSnapshot(center=s.center, size=s.size, feature=f)
