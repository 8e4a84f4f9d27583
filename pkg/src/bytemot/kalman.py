"""Constant-velocity Kalman filter over (cx, cy, aspect, height) box states.

The 8-dimensional state is (cx, cy, a, h, vcx, vcy, va, vh): box center,
aspect ratio w/h, height, and their per-frame velocities with dt fixed at one
frame. Process and measurement noise are diagonal with standard deviations
proportional to the box height (position-like components) except for the
dimensionless aspect ratio, which uses small constant stds. All operations
are pure: they take a state value and return a new one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["MotionState", "KalmanFilter"]

NDIM = 4


@dataclass(frozen=True)
class MotionState:
    """Immutable Gaussian belief over one track's box state.

    mean is an 8-vector, cov an 8x8 symmetric positive-definite matrix. The
    arrays are copied and marked read-only on construction.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        cov = np.array(self.cov, dtype=float)
        if mean.shape != (2 * NDIM,) or cov.shape != (2 * NDIM, 2 * NDIM):
            raise ValueError(
                f"expected mean (8,) and cov (8, 8), got {mean.shape} and {cov.shape}"
            )
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


def _wrap_owned(mean: np.ndarray, cov: np.ndarray) -> MotionState:
    # fast path for freshly computed arrays whose ownership is handed over;
    # skips the defensive copy of the public constructor
    state = object.__new__(MotionState)
    mean.setflags(write=False)
    cov.setflags(write=False)
    object.__setattr__(state, "mean", mean)
    object.__setattr__(state, "cov", cov)
    return state


class KalmanFilter:
    """Constant-velocity filter with height-scaled noise.

    pos_weight scales position-like stds, vel_weight velocity-like stds, both
    relative to the current box height. Initiation inflates position stds by
    2x and velocity stds by 10x. Aspect-ratio components use the constant
    stds aspect_pos_std / aspect_vel_std instead of height scaling.
    """

    def __init__(
        self,
        pos_weight: float = 1.0 / 20.0,
        vel_weight: float = 1.0 / 160.0,
        aspect_pos_std: float = 1e-2,
        aspect_vel_std: float = 1e-5,
    ):
        self.pos_weight = float(pos_weight)
        self.vel_weight = float(vel_weight)
        self.aspect_pos_std = float(aspect_pos_std)
        self.aspect_vel_std = float(aspect_vel_std)

        self._motion = np.eye(2 * NDIM)
        self._motion[:NDIM, NDIM:] = np.eye(NDIM)

    def _pos_stds(self, h: float, scale: float = 1.0) -> np.ndarray:
        s = self.pos_weight * h * scale
        return np.array([s, s, self.aspect_pos_std, s])

    def _vel_stds(self, h: float, scale: float = 1.0) -> np.ndarray:
        s = self.vel_weight * h * scale
        return np.array([s, s, self.aspect_vel_std, s])

    @staticmethod
    def _noise_height(h: float) -> float:
        # noise scales must stay positive even for degraded predicted states
        return max(float(h), 1e-3)

    def initiate(self, measurement) -> MotionState:
        """Create a track state from an unassociated (cx, cy, a, h) measurement.

        Velocities start at exactly zero with inflated uncertainty.
        """
        m = np.asarray(measurement, dtype=float)
        if m.shape != (NDIM,):
            raise ValueError(f"expected a 4-vector measurement, got shape {m.shape}")
        if m[3] <= 0.0:
            raise ValueError(f"measurement height must be positive, got {m[3]}")
        mean = np.concatenate([m, np.zeros(NDIM)])
        std = np.concatenate([self._pos_stds(m[3], 2.0), self._vel_stds(m[3], 10.0)])
        return MotionState(mean, np.diag(std * std))

    def predict(self, state: MotionState) -> MotionState:
        """Advance the belief one frame under the constant-velocity model."""
        h = self._noise_height(state.mean[3])
        std = np.concatenate([self._pos_stds(h), self._vel_stds(h)])
        mean = self._motion @ state.mean
        cov = self._motion @ state.cov @ self._motion.T + np.diag(std * std)
        return MotionState(mean, (cov + cov.T) / 2.0)

    def predict_many(self, states: list[MotionState]) -> list[MotionState]:
        """Batched :meth:`predict`, numerically identical to the per-state form."""
        if not states:
            return []
        means = np.stack([s.mean for s in states])
        covs = np.stack([s.cov for s in states])
        hs = np.maximum(means[:, 3], 1e-3)
        pos = self.pos_weight * hs
        vel = self.vel_weight * hs
        std = np.empty((len(states), 2 * NDIM))
        std[:, 0] = std[:, 1] = std[:, 3] = pos
        std[:, 4] = std[:, 5] = std[:, 7] = vel
        std[:, 2] = self.aspect_pos_std
        std[:, 6] = self.aspect_vel_std

        new_means = means @ self._motion.T
        new_covs = self._motion @ covs @ self._motion.T
        idx = np.arange(2 * NDIM)
        new_covs[:, idx, idx] += std * std
        new_covs = (new_covs + new_covs.transpose(0, 2, 1)) / 2.0
        return [_wrap_owned(new_means[i], new_covs[i]) for i in range(len(states))]

    def project(self, state: MotionState) -> tuple[np.ndarray, np.ndarray]:
        """Return the belief in measurement space: (4-vector mean, 4x4 cov)."""
        h = self._noise_height(state.mean[3])
        std = self._pos_stds(h)
        mean = state.mean[:NDIM].copy()
        cov = state.cov[:NDIM, :NDIM] + np.diag(std * std)
        return mean, cov

    def update(self, state: MotionState, measurement) -> MotionState:
        """Correct the belief with an associated (cx, cy, a, h) measurement.

        Raises numpy.linalg.LinAlgError if the innovation covariance is
        singular, which cannot happen with the positive-definite default noise.
        """
        z = np.asarray(measurement, dtype=float)
        if z.shape != (NDIM,):
            raise ValueError(f"expected a 4-vector measurement, got shape {z.shape}")
        proj_mean, proj_cov = self.project(state)
        # gain K = cov H' S^-1, with H selecting the position block
        b = state.cov[:, :NDIM]
        gain = np.linalg.solve(proj_cov, b.T).T
        mean = state.mean + gain @ (z - proj_mean)
        cov = state.cov - gain @ proj_cov @ gain.T
        return MotionState(mean, (cov + cov.T) / 2.0)

    def update_many(self, states: list[MotionState], measurements) -> list[MotionState]:
        """Batched :meth:`update`, numerically identical to the per-state form."""
        if not states:
            return []
        zs = np.asarray(measurements, dtype=float).reshape(len(states), NDIM)
        means = np.stack([s.mean for s in states])
        covs = np.stack([s.cov for s in states])
        hs = np.maximum(means[:, 3], 1e-3)
        r_std = np.empty((len(states), NDIM))
        r_std[:, 0] = r_std[:, 1] = r_std[:, 3] = self.pos_weight * hs
        r_std[:, 2] = self.aspect_pos_std

        proj_cov = covs[:, :NDIM, :NDIM].copy()
        idx = np.arange(NDIM)
        proj_cov[:, idx, idx] += r_std * r_std
        b = covs[:, :, :NDIM]
        gain = np.linalg.solve(proj_cov, b.transpose(0, 2, 1)).transpose(0, 2, 1)
        new_means = means + np.einsum("nij,nj->ni", gain, zs - means[:, :NDIM])
        new_covs = covs - gain @ proj_cov @ gain.transpose(0, 2, 1)
        new_covs = (new_covs + new_covs.transpose(0, 2, 1)) / 2.0
        return [_wrap_owned(new_means[i], new_covs[i]) for i in range(len(states))]
