"""Parameter space of the agent's internal model.

A :class:`ParamSpace` is an ordered list of named, bounded scalar dimensions
(control gains, process-noise scale).  Each dimension carries a transform
that maps its natural units to the coordinates used during inference:

* ``identity`` -- inference coordinate equals the natural value,
* ``log``      -- inference coordinate is ``log(value)`` (for positive
  quantities such as gains and noise scales).

Gradient ascent, Fisher information, and confidence intervals all live in
inference coordinates; sampling and task dynamics use natural units.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TRANSFORMS = ("identity", "log")


@dataclass(frozen=True)
class Dim:
    """One bounded scalar parameter dimension (bounds in natural units)."""

    name: str
    lower: float
    upper: float
    transform: str = "identity"

    def __post_init__(self):
        if not np.isfinite(self.lower) or not np.isfinite(self.upper):
            raise ValueError(f"dim {self.name!r}: bounds must be finite")
        if not self.lower < self.upper:
            raise ValueError(f"dim {self.name!r}: lower must be < upper")
        if self.transform not in TRANSFORMS:
            raise ValueError(f"dim {self.name!r}: unknown transform {self.transform!r}")
        if self.transform == "log" and self.lower <= 0:
            raise ValueError(f"dim {self.name!r}: log transform needs positive bounds")


@dataclass(frozen=True)
class ParamSpace:
    """Ordered, bounded box of model parameters plus the inferable subset."""

    dims: tuple[Dim, ...]
    inferable: tuple[str, ...] = ()

    def __post_init__(self):
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise ValueError("duplicate dim names")
        for nm in self.inferable:
            if nm not in names:
                raise ValueError(f"inferable name {nm!r} not among dims")
        if not self.inferable:
            object.__setattr__(self, "inferable", tuple(names))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dims)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    def index(self, name: str) -> int:
        return self.names.index(name)

    # -- natural <-> inference coordinates ---------------------------------

    def to_inference(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        z = values.copy()
        for i, d in enumerate(self.dims):
            if d.transform == "log":
                z[..., i] = np.log(values[..., i])
        return z

    def from_inference(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        values = z.copy()
        for i, d in enumerate(self.dims):
            if d.transform == "log":
                values[..., i] = np.exp(z[..., i])
        return values

    def inference_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = self.to_inference(np.array([d.lower for d in self.dims]))
        hi = self.to_inference(np.array([d.upper for d in self.dims]))
        return lo, hi

    def clip_inference(self, z: np.ndarray) -> np.ndarray:
        lo, hi = self.inference_bounds()
        return np.clip(z, lo, hi)

    def contains(self, values: np.ndarray, rtol: float = 1e-9) -> bool:
        values = np.asarray(values, dtype=float)
        for i, d in enumerate(self.dims):
            pad = rtol * (d.upper - d.lower)
            if not (d.lower - pad <= values[i] <= d.upper + pad):
                return False
        return True

    # -- network input normalization ---------------------------------------

    def normalize(self, z: np.ndarray) -> np.ndarray:
        """Min-max map of inference coordinates onto [-1, 1] per dim."""
        lo, hi = self.inference_bounds()
        return 2.0 * (np.asarray(z, dtype=float) - lo) / (hi - lo) - 1.0

    def normalize_jacobian(self) -> np.ndarray:
        """Constant diagonal d(normalized)/d(inference), shape (ndim,)."""
        lo, hi = self.inference_bounds()
        return 2.0 / (hi - lo)

    def normalize_values(self, values: np.ndarray) -> np.ndarray:
        return self.normalize(self.to_inference(values))

    # -- sampling ------------------------------------------------------------

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``n`` points uniformly on the natural-unit box, shape (n, ndim)."""
        if n < 1:
            raise ValueError("n must be >= 1")
        lo = np.array([d.lower for d in self.dims])
        hi = np.array([d.upper for d in self.dims])
        return lo + (hi - lo) * rng.random((n, self.ndim))

    def point(self, values) -> "ParamPoint":
        return ParamPoint(space=self, values=np.asarray(values, dtype=float))

    def point_from_dict(self, mapping: dict) -> "ParamPoint":
        missing = [nm for nm in self.names if nm not in mapping]
        if missing:
            raise ValueError(f"missing parameter values for {missing}")
        extra = [nm for nm in mapping if nm not in self.names]
        if extra:
            raise ValueError(f"unknown parameter names {extra}")
        return self.point([float(mapping[nm]) for nm in self.names])

    def to_config(self) -> dict:
        return {
            "dims": [
                {"name": d.name, "lower": d.lower, "upper": d.upper, "transform": d.transform}
                for d in self.dims
            ],
            "inferable": list(self.inferable),
        }

    @staticmethod
    def from_config(cfg: dict) -> "ParamSpace":
        dims = tuple(
            Dim(
                name=str(d["name"]),
                lower=float(d["lower"]),
                upper=float(d["upper"]),
                transform=str(d.get("transform", "identity")),
            )
            for d in cfg["dims"]
        )
        return ParamSpace(dims=dims, inferable=tuple(cfg.get("inferable", ())))


@dataclass(frozen=True)
class ParamPoint:
    """A vector of parameter values in natural units, aligned with a space."""

    space: ParamSpace
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != (self.space.ndim,):
            raise ValueError(f"expected {self.space.ndim} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("parameter values must be finite")
        if not self.space.contains(values):
            raise ValueError(f"values {values} outside the parameter box")

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.space.index(name)])

    def as_dict(self) -> dict:
        return {nm: float(v) for nm, v in zip(self.space.names, self.values)}


def sample_params(space: ParamSpace, n: int, seed: int) -> list[ParamPoint]:
    """Uniform draws from the parameter box; deterministic given ``seed``."""
    rng = np.random.default_rng(seed)
    return [space.point(row) for row in space.sample(n, rng)]


def default_space_1d() -> ParamSpace:
    return ParamSpace(
        dims=(
            Dim("g_a", 0.5, 2.0, "log"),
            Dim("sigma0", 0.05, 0.5, "log"),
        )
    )


def default_space_2d() -> ParamSpace:
    return ParamSpace(
        dims=(
            Dim("g_v", 0.5, 2.0, "log"),
            Dim("g_w", 0.5, 2.0, "log"),
            Dim("sigma0", 0.05, 0.5, "log"),
        )
    )
