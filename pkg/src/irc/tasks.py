"""Firefly-catching task families.

Two parameterized worlds share the same structure: a target spawns at a
random relative position, is read once (noisily) at trial start, and the
agent must steer itself within a capture radius and stop to collect the
reward.  Motion is corrupted by Gaussian process noise on position.

``firefly_1d``  -- scalar relative position, three discrete actions
                   (left / right / stop), no per-step observations.
``firefly_2d``  -- planar unicycle with heading, forward and angular
                   velocity, continuous controls in [-1, 1]^2, and noisy
                   per-step self-motion readings of (v, omega).

States are plain float (1D) or float64 arrays of length 5 (2D) indexed by
the ``IX_*`` constants.  All stochastic operations take an explicit
``numpy.random.Generator`` and are pure given its state.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .params import ParamPoint

TASK_1D = "firefly_1d"
TASK_2D = "firefly_2d"

# 2D state layout: relative target position (world frame), heading, velocities.
IX_X, IX_Y, IX_PHI, IX_V, IX_W = 0, 1, 2, 3, 4
STATE_DIM_2D = 5
OBS_DIM_2D = 2


class Act(enum.IntEnum):
    """Discrete 1D actions; ``direction`` gives the signed unit move."""

    LEFT = 0
    RIGHT = 1
    STOP = 2


ACTION_DIRECTIONS = np.array([-1.0, 1.0, 0.0])  # indexed by Act
N_ACTIONS = 3


def action_direction(a: Act | int) -> float:
    return float(ACTION_DIRECTIONS[int(a)])


def clamp_action(a: np.ndarray) -> np.ndarray:
    return np.clip(np.asarray(a, dtype=float), -1.0, 1.0)


def wrap_angle(phi: float) -> float:
    """Wrap to (-pi, pi]."""
    out = np.remainder(phi + np.pi, 2.0 * np.pi) - np.pi
    if out == -np.pi:
        out = np.pi
    return float(out)


@dataclass(frozen=True)
class RewardSpec:
    radius: float = 0.5
    hit_reward: float = 1.0
    action_cost: float = 0.05
    discount: float = 0.95

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be > 0")
        if self.hit_reward <= 0:
            raise ValueError("hit_reward must be > 0")
        if self.action_cost < 0:
            raise ValueError("action_cost must be >= 0")
        if not 0.0 < self.discount < 1.0:
            raise ValueError("discount must be in (0, 1)")


@dataclass(frozen=True)
class TaskConfig:
    """Static description of one task instance.

    ``belief_pos_var`` is both the variance of the one-shot target reading
    at trial start and the position block of the initial belief covariance,
    so the seeded belief is the exact posterior given that reading.
    """

    task: str = TASK_1D
    reward: RewardSpec = field(default_factory=RewardSpec)
    horizon: int = 40
    dist_min: float = 1.0
    dist_max: float = 5.0
    belief_pos_var: float = 0.01
    # 2D only:
    dt: float = 0.1
    stop_threshold: float = 0.05
    obs_noise_std: float = 0.1
    spawn_half_angle: float = np.pi / 4
    belief_heading_var: float = 0.01
    belief_vel_var: float = 1e-6

    def __post_init__(self):
        if self.task not in (TASK_1D, TASK_2D):
            raise ValueError(f"unknown task {self.task!r}")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not 0.0 < self.dist_min < self.dist_max:
            raise ValueError("need 0 < dist_min < dist_max")
        if self.belief_pos_var <= 0:
            raise ValueError("belief_pos_var must be > 0")
        if self.task == TASK_2D:
            if self.dt <= 0:
                raise ValueError("dt must be > 0")
            if self.stop_threshold <= 0:
                raise ValueError("stop_threshold must be > 0")
            if self.obs_noise_std < 0:
                raise ValueError("obs_noise_std must be >= 0")
            if not 0 < self.spawn_half_angle <= np.pi:
                raise ValueError("spawn_half_angle must be in (0, pi]")

    @property
    def state_dim(self) -> int:
        return 1 if self.task == TASK_1D else STATE_DIM_2D

    def initial_belief_cov(self) -> np.ndarray:
        if self.task == TASK_1D:
            return np.array([[self.belief_pos_var]])
        return np.diag(
            [
                self.belief_pos_var,
                self.belief_pos_var,
                self.belief_heading_var,
                self.belief_vel_var,
                self.belief_vel_var,
            ]
        )

    def to_config(self) -> dict:
        out = {
            "id": self.task,
            "horizon": self.horizon,
            "reward": {
                "radius": self.reward.radius,
                "hit_reward": self.reward.hit_reward,
                "action_cost": self.reward.action_cost,
                "discount": self.reward.discount,
            },
            "init": {
                "dist_min": self.dist_min,
                "dist_max": self.dist_max,
                "belief_pos_var": self.belief_pos_var,
            },
        }
        if self.task == TASK_2D:
            out["dt"] = self.dt
            out["stop_threshold"] = self.stop_threshold
            out["obs_noise_std"] = self.obs_noise_std
            out["init"]["spawn_half_angle"] = self.spawn_half_angle
            out["init"]["belief_heading_var"] = self.belief_heading_var
            out["init"]["belief_vel_var"] = self.belief_vel_var
        return out

    @staticmethod
    def from_config(cfg: dict) -> "TaskConfig":
        reward = RewardSpec(**cfg.get("reward", {}))
        init = dict(cfg.get("init", {}))
        kwargs = dict(
            task=cfg["id"],
            reward=reward,
            horizon=int(cfg.get("horizon", 40 if cfg["id"] == TASK_1D else 60)),
        )
        for key in ("dist_min", "dist_max", "belief_pos_var"):
            if key in init:
                kwargs[key] = float(init.pop(key))
        if cfg["id"] == TASK_2D:
            for key in ("dt", "stop_threshold", "obs_noise_std"):
                if key in cfg:
                    kwargs[key] = float(cfg[key])
            for key in ("spawn_half_angle", "belief_heading_var", "belief_vel_var"):
                if key in init:
                    kwargs[key] = float(init.pop(key))
        if init:
            raise ValueError(f"unknown init keys {sorted(init)}")
        return TaskConfig(**kwargs)


def default_config_1d() -> TaskConfig:
    return TaskConfig(task=TASK_1D, horizon=40, reward=RewardSpec(radius=0.5))


def default_config_2d() -> TaskConfig:
    return TaskConfig(task=TASK_2D, horizon=60, reward=RewardSpec(radius=0.6))


# ---------------------------------------------------------------------------
# World dynamics.  The *_with_noise variants take pre-drawn standard-normal
# disturbances so the compiled and pure rollout kernels consume identical
# random streams; the rng-taking wrappers draw from the generator directly.
# ---------------------------------------------------------------------------


def move_1d(x: float, direction: float, g_a: float, sigma0: float, eps: float) -> float:
    return x + g_a * direction + sigma0 * eps


def step_world_1d(
    x: float,
    a: Act | int,
    theta: ParamPoint,
    cfg: TaskConfig,
    rng: np.random.Generator,
) -> tuple[float, float, bool]:
    """One world step; returns (next state, reward, stop-event flag).

    The horizon cutoff is enforced by the rollout loop, which tracks the
    step count; this function only terminates on STOP.
    """
    if not np.isfinite(x):
        raise ValueError("non-finite state")
    a = Act(int(a))
    if a == Act.STOP:
        hit = abs(x) <= cfg.reward.radius
        return x, (cfg.reward.hit_reward if hit else 0.0), True
    eps = rng.standard_normal()
    x_next = move_1d(x, action_direction(a), theta["g_a"], theta["sigma0"], eps)
    return x_next, -cfg.reward.action_cost, False


def move_2d(
    s: np.ndarray,
    a: np.ndarray,
    g_v: float,
    g_w: float,
    sigma0: float,
    dt: float,
    eps_xy: np.ndarray,
) -> np.ndarray:
    """Deterministic unicycle step plus position noise.

    Controls act instantaneously on the velocities; the translation uses
    the pre-step heading.  Heading and velocities carry no process noise.
    """
    v = g_v * a[0]
    w = g_w * a[1]
    c, sn = np.cos(s[IX_PHI]), np.sin(s[IX_PHI])
    out = np.empty(STATE_DIM_2D)
    out[IX_X] = s[IX_X] - dt * v * c + sigma0 * eps_xy[0]
    out[IX_Y] = s[IX_Y] - dt * v * sn + sigma0 * eps_xy[1]
    out[IX_PHI] = wrap_angle(s[IX_PHI] + dt * w)
    out[IX_V] = v
    out[IX_W] = w
    return out


def step_world_2d(
    s: np.ndarray,
    a: np.ndarray,
    theta: ParamPoint,
    cfg: TaskConfig,
    rng: np.random.Generator,
) -> tuple[np.ndarray, float, bool]:
    """One world step; (next state, reward, stop-event flag).

    A sub-threshold control is the stop event: the trial ends with no
    motion, and the hit reward is paid iff the target lies within the
    capture radius.  Horizon cutoff is the rollout loop's job.
    """
    s = np.asarray(s, dtype=float)
    a = np.asarray(a, dtype=float)
    if not (np.all(np.isfinite(s)) and np.all(np.isfinite(a))):
        raise ValueError("non-finite inputs")
    if np.max(np.abs(a)) < cfg.stop_threshold:
        hit = np.hypot(s[IX_X], s[IX_Y]) <= cfg.reward.radius
        return s.copy(), (cfg.reward.hit_reward if hit else 0.0), True
    a = clamp_action(a)
    eps_xy = rng.standard_normal(2)
    s_next = move_2d(s, a, theta["g_v"], theta["g_w"], theta["sigma0"], cfg.dt, eps_xy)
    return s_next, -cfg.reward.action_cost, False


def observe(s: np.ndarray, cfg: TaskConfig, rng: np.random.Generator) -> np.ndarray:
    """Noisy self-motion reading (v, omega); 2D task only."""
    if cfg.task != TASK_2D:
        raise ValueError("the 1D task provides no observations")
    return np.asarray(s, dtype=float)[[IX_V, IX_W]] + cfg.obs_noise_std * rng.standard_normal(2)


def initial_state(cfg: TaskConfig, rng: np.random.Generator):
    """Spawn a target and produce the one-shot noisy reading of it.

    Returns ``(state, reading)`` where ``reading`` seeds the initial belief
    mean; the belief covariance is ``cfg.initial_belief_cov()``.
    """
    dist = cfg.dist_min + (cfg.dist_max - cfg.dist_min) * rng.random()
    if cfg.task == TASK_1D:
        sign = 1.0 if rng.random() < 0.5 else -1.0
        x0 = sign * dist
        reading = x0 + np.sqrt(cfg.belief_pos_var) * rng.standard_normal()
        return float(x0), float(reading)
    ang = cfg.spawn_half_angle * (2.0 * rng.random() - 1.0)
    s0 = np.zeros(STATE_DIM_2D)
    s0[IX_X] = dist * np.cos(ang)
    s0[IX_Y] = dist * np.sin(ang)
    reading = s0[[IX_X, IX_Y]] + np.sqrt(cfg.belief_pos_var) * rng.standard_normal(2)
    return s0, reading


def initial_belief_mean(cfg: TaskConfig, reading) -> np.ndarray:
    if cfg.task == TASK_1D:
        return np.array([float(reading)])
    mean = np.zeros(STATE_DIM_2D)
    mean[IX_X : IX_Y + 1] = reading
    return mean
