"""Gaussian belief state and its propagation.

The 1D task has no per-step observations, so the belief there is pure
prediction: the mean shifts with the modeled action gain and the variance
grows by the process-noise variance each step.  The 2D task runs an
extended Kalman filter: the mean is pushed through the deterministic
unicycle dynamics, the covariance through its Jacobian, and noisy (v, w)
self-motion readings are folded in with a Joseph-form update.

Covariances are conditioned after every predict/update: symmetrized and
eigenvalue-clamped at ``COV_EIG_FLOOR`` so downstream code can rely on
symmetric PSD matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ParamPoint
from .tasks import IX_PHI, IX_V, IX_W, IX_X, IX_Y, OBS_DIM_2D, STATE_DIM_2D, Act, action_direction

COV_EIG_FLOOR = 1e-12
# Variances below this floor enter the feature map as log(FEATURE_VAR_FLOOR).
FEATURE_VAR_FLOOR = 1e-12


@dataclass
class GaussianBelief:
    """Posterior over world state: mean vector and covariance matrix."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float).reshape(-1)
        self.cov = np.asarray(self.cov, dtype=float)
        n = self.mean.shape[0]
        if self.cov.shape != (n, n):
            raise ValueError(f"cov shape {self.cov.shape} does not match mean dim {n}")

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def copy(self) -> "GaussianBelief":
        return GaussianBelief(self.mean.copy(), self.cov.copy())


def condition_cov(cov: np.ndarray, floor: float = COV_EIG_FLOOR) -> np.ndarray:
    """Symmetrize and clamp eigenvalues at ``floor``; never raises."""
    sym = 0.5 * (cov + cov.T)
    vals, vecs = np.linalg.eigh(sym)
    if vals[0] >= floor:
        return sym
    vals = np.maximum(vals, floor)
    return (vecs * vals) @ vecs.T


def predict_1d(b: GaussianBelief, a: Act | int, theta: ParamPoint) -> GaussianBelief:
    """Pure-prediction belief step: mean += gain * direction, var += sigma0^2."""
    if b.dim != 1:
        raise ValueError("1D belief expected")
    g_a = theta["g_a"]
    var_growth = theta["sigma0"] ** 2
    mean = b.mean + g_a * action_direction(a)
    cov = b.cov + var_growth
    return GaussianBelief(mean, cov)


def dynamics_mean_2d(mean: np.ndarray, a: np.ndarray, g_v: float, g_w: float, dt: float) -> np.ndarray:
    """Noise-free unicycle step applied to a belief mean (heading unwrapped)."""
    v = g_v * a[0]
    w = g_w * a[1]
    c, sn = np.cos(mean[IX_PHI]), np.sin(mean[IX_PHI])
    out = np.empty(STATE_DIM_2D)
    out[IX_X] = mean[IX_X] - dt * v * c
    out[IX_Y] = mean[IX_Y] - dt * v * sn
    out[IX_PHI] = mean[IX_PHI] + dt * w
    out[IX_V] = v
    out[IX_W] = w
    return out


def dynamics_jacobian_2d(mean: np.ndarray, a: np.ndarray, g_v: float, dt: float) -> np.ndarray:
    """d(next state)/d(state) at ``mean``.

    New velocities depend only on the control, so their rows are zero; the
    position rows couple to heading through the travel direction.
    """
    v = g_v * a[0]
    c, sn = np.cos(mean[IX_PHI]), np.sin(mean[IX_PHI])
    F = np.zeros((STATE_DIM_2D, STATE_DIM_2D))
    F[IX_X, IX_X] = 1.0
    F[IX_Y, IX_Y] = 1.0
    F[IX_PHI, IX_PHI] = 1.0
    F[IX_X, IX_PHI] = dt * v * sn
    F[IX_Y, IX_PHI] = -dt * v * c
    return F


def process_noise_2d(sigma0: float) -> np.ndarray:
    Q = np.zeros((STATE_DIM_2D, STATE_DIM_2D))
    Q[IX_X, IX_X] = sigma0**2
    Q[IX_Y, IX_Y] = sigma0**2
    return Q


def ekf_predict(b: GaussianBelief, a: np.ndarray, theta: ParamPoint, dt: float) -> GaussianBelief:
    """EKF time update through the 2D dynamics."""
    if b.dim != STATE_DIM_2D:
        raise ValueError("2D belief expected")
    a = np.asarray(a, dtype=float)
    g_v, g_w, sigma0 = theta["g_v"], theta["g_w"], theta["sigma0"]
    mean = dynamics_mean_2d(b.mean, a, g_v, g_w, dt)
    F = dynamics_jacobian_2d(b.mean, a, g_v, dt)
    cov = F @ b.cov @ F.T + process_noise_2d(sigma0)
    return GaussianBelief(mean, condition_cov(cov))


OBS_MATRIX = np.zeros((OBS_DIM_2D, STATE_DIM_2D))
OBS_MATRIX[0, IX_V] = 1.0
OBS_MATRIX[1, IX_W] = 1.0


def ekf_update(b: GaussianBelief, o: np.ndarray, obs_noise_std: float) -> GaussianBelief:
    """Kalman measurement update with the (v, w) selector and R = std^2 I.

    Joseph form keeps the covariance symmetric PSD even with a clamped or
    slightly indefinite input.
    """
    o = np.asarray(o, dtype=float).reshape(-1)
    if o.shape[0] != OBS_DIM_2D:
        raise ValueError("observation must be (v, w)")
    H = OBS_MATRIX
    R = np.eye(OBS_DIM_2D) * obs_noise_std**2
    P = condition_cov(b.cov)
    S = H @ P @ H.T + R
    K = P @ H.T @ np.linalg.inv(S)
    mean = b.mean + K @ (o - H @ b.mean)
    A = np.eye(b.dim) - K @ H
    cov = A @ P @ A.T + K @ R @ K.T
    return GaussianBelief(mean, condition_cov(cov))


def map_observation(s: np.ndarray, obs_noise_std: float = 0.0) -> np.ndarray:
    """Most probable reading given the state: the noiseless (v, w).

    The observation model is Gaussian around the true self motion, so its
    density mode does not depend on the noise scale.
    """
    del obs_noise_std
    return np.asarray(s, dtype=float)[[IX_V, IX_W]].copy()


def triu_indices(dim: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(dim)


def belief_features(b: GaussianBelief) -> np.ndarray:
    """Flat encoding: mean, then upper-triangle covariance with log diagonal."""
    iu, ju = np.triu_indices(b.dim)
    tri = b.cov[iu, ju].copy()
    diag = iu == ju
    tri[diag] = np.log(np.maximum(tri[diag], FEATURE_VAR_FLOOR))
    return np.concatenate([b.mean, tri])


def feature_dim(state_dim: int) -> int:
    return state_dim + state_dim * (state_dim + 1) // 2


@dataclass
class BeliefTrajectory:
    """Belief sequence b_0..b_T aligned with a trajectory's steps."""

    means: np.ndarray  # (T+1, dim)
    covs: np.ndarray  # (T+1, dim, dim)

    def __len__(self) -> int:
        return self.means.shape[0]

    def belief(self, t: int) -> GaussianBelief:
        return GaussianBelief(self.means[t].copy(), self.covs[t].copy())
