"""Spatial and temporal interaction profiles.

A collision is mediated by nu ⊗ V(x) with V supported on (-a/2, a/2); the
time-driven model uses Vtilde(t)·nu supported on (-tau/2, tau/2). Both kinds
of profile expose their mean over the support, which is the only feature that
survives in the semi-classical limit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

SPATIAL_KINDS = ("sinusoidal", "square", "sampled")
TEMPORAL_KINDS = ("triangular", "square", "sampled")


def _sampled_profile(xs, vs):
    xs = np.asarray(xs, dtype=float)
    vs = np.asarray(vs, dtype=float)
    if xs.ndim != 1 or xs.shape != vs.shape or xs.size < 2:
        raise ValueError("sampled profile needs matching 1-d xs/vs with >= 2 points")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("sample abscissae must be strictly increasing")
    return xs, vs


@dataclass(frozen=True)
class SpatialPotential:
    """Scalar profile V(x) with compact support x in (-a/2, a/2).

    kind "sinusoidal": V(x) = (pi/2)·V0·cos(pi x / a), mean exactly V0.
    kind "square":     V(x) = V0 on the support, mean V0.
    kind "sampled":    linear interpolation of user samples on [-a/2, a/2].
    """

    kind: str
    a: float
    v0: float
    mean: float = field(init=False)
    a_min: float = field(init=False)
    is_even: bool = field(init=False)
    _xs: np.ndarray | None = None
    _vs: np.ndarray | None = None

    def __init__(self, kind: str, a: float, v0: float = 0.0, xs=None, vs=None):
        if kind not in SPATIAL_KINDS:
            raise ValueError(f"unknown spatial potential kind {kind!r}")
        if not a > 0:
            raise ValueError("support length a must be positive")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "a", float(a))
        object.__setattr__(self, "v0", float(v0))
        if kind == "sampled":
            if xs is None or vs is None:
                raise ValueError("sampled potential requires xs and vs")
            xs, vs = _sampled_profile(xs, vs)
            if xs[0] < -a / 2 - 1e-12 or xs[-1] > a / 2 + 1e-12:
                raise ValueError("samples must lie within [-a/2, a/2]")
            object.__setattr__(self, "_xs", xs)
            object.__setattr__(self, "_vs", vs)
            mean = float(np.trapezoid(vs, xs) / a)
            dv = np.abs(np.gradient(vs, xs)).max()
            vmax = np.abs(vs).max()
            a_min = float(vmax / dv) if dv > 0 else float(a)
            grid = np.linspace(-a / 2, a / 2, 129)
            even = bool(np.allclose(self._eval(grid), self._eval(-grid), atol=1e-12))
        else:
            object.__setattr__(self, "_xs", None)
            object.__setattr__(self, "_vs", None)
            mean = float(v0)
            a_min = float(a)
            even = True
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "a_min", a_min)
        object.__setattr__(self, "is_even", even)

    def _eval(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) < self.a / 2
        if self.kind == "sinusoidal":
            v = (np.pi / 2) * self.v0 * np.cos(np.pi * x / self.a)
        elif self.kind == "square":
            v = np.full_like(x, self.v0)
        else:
            v = np.interp(x, self._xs, self._vs, left=0.0, right=0.0)
        return np.where(inside, v, 0.0)

    def __call__(self, x):
        out = self._eval(np.asarray(x, dtype=float))
        return float(out) if np.ndim(x) == 0 else out

    @property
    def max_abs(self) -> float:
        if self.kind == "sinusoidal":
            return abs(self.v0) * np.pi / 2
        if self.kind == "square":
            return abs(self.v0)
        return float(np.abs(self._vs).max())

    def mirrored(self) -> "SpatialPotential":
        """The profile V(-x); used for right-incident scattering."""
        if self.is_even:
            return self
        return SpatialPotential("sampled", self.a, xs=-self._xs[::-1], vs=self._vs[::-1])

    def cache_key(self) -> tuple:
        if self.kind == "sampled":
            return (self.kind, self.a, self._xs.tobytes(), self._vs.tobytes())
        return (self.kind, self.a, self.v0)


@dataclass(frozen=True)
class TemporalPotential:
    """Scalar drive Vtilde(t) with compact support t in (-tau/2, tau/2).

    kind "triangular": Vtilde(t) = (4/tau)·V0·(tau/2 - |t|), mean exactly V0.
    kind "square":     Vtilde(t) = V0, mean V0.
    kind "sampled":    linear interpolation on [-tau/2, tau/2].
    """

    kind: str
    tau: float
    v0: float
    mean: float = field(init=False)
    _ts: np.ndarray | None = None
    _vs: np.ndarray | None = None

    def __init__(self, kind: str, tau: float, v0: float = 0.0, ts=None, vs=None):
        if kind not in TEMPORAL_KINDS:
            raise ValueError(f"unknown temporal potential kind {kind!r}")
        if not tau > 0:
            raise ValueError("support tau must be positive")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "tau", float(tau))
        object.__setattr__(self, "v0", float(v0))
        if kind == "sampled":
            if ts is None or vs is None:
                raise ValueError("sampled drive requires ts and vs")
            ts, vs = _sampled_profile(ts, vs)
            if ts[0] < -tau / 2 - 1e-15 or ts[-1] > tau / 2 + 1e-15:
                raise ValueError("samples must lie within [-tau/2, tau/2]")
            object.__setattr__(self, "_ts", ts)
            object.__setattr__(self, "_vs", vs)
            mean = float(np.trapezoid(vs, ts) / tau)
        else:
            object.__setattr__(self, "_ts", None)
            object.__setattr__(self, "_vs", None)
            mean = float(v0)
        object.__setattr__(self, "mean", mean)

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        inside = np.abs(t_arr) < self.tau / 2
        if self.kind == "triangular":
            v = (4.0 / self.tau) * self.v0 * (self.tau / 2 - np.abs(t_arr))
        elif self.kind == "square":
            v = np.full_like(t_arr, self.v0)
        else:
            v = np.interp(t_arr, self._ts, self._vs, left=0.0, right=0.0)
        out = np.where(inside, v, 0.0)
        return float(out) if np.ndim(t) == 0 else out
