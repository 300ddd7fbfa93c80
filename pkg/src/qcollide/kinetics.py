"""Gaussian kinetic states of the incident particle and regime diagnostics.

The particle's motion enters the scattering map only through the two-point
momentum function rho_X(p, p'). The Gaussian family used here covers pure
wave packets (minimum uncertainty) and their phase-space-broadened mixed
generalizations; purity is hbar/(2 sigma_p sigma_x) throughout.

`classify_regime` evaluates the dimensionless ratios behind the three
validity conditions of the semi-classical (work-source) limit:

1. short collision:      tau_p0 * span / hbar         << 1
2. semi-classical flight: max|V| / E_p0 and hbar/(p0 a_min) << 1
3. fast, broad packet:    sigma_p / p0 and (m*span/p0)/(hbar/(2 sigma_x)) << 1

Ratios are always reported raw; a condition is flagged satisfied when its
ratio is below 0.1 (callers wanting a stricter reading use the ratios).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import HBAR, InternalSystem
from .potentials import SpatialPotential

HARDNESS_THRESHOLD = 0.1  # ratio below which a "<<" condition is called satisfied


@dataclass(frozen=True)
class KineticState:
    """Gaussian state of motion: rho_X(p, p') with the usual five parameters.

    sigma_x = hbar/(2 sigma_p) gives the pure packet; larger sigma_x gives a
    mixed state of purity hbar/(2 sigma_p sigma_x).
    """

    p0: float
    x0: float
    sigma_p: float
    sigma_x: float
    mass: float = 1.0

    def __post_init__(self):
        if not self.sigma_p > 0:
            raise ValueError("sigma_p must be positive")
        if not self.sigma_x > 0:
            raise ValueError("sigma_x must be positive")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if self.sigma_p * self.sigma_x < HBAR / 2 - 1e-12:
            raise ValueError(
                f"uncertainty violation: sigma_p*sigma_x = "
                f"{self.sigma_p * self.sigma_x:.6g} < hbar/2")

    @property
    def purity(self) -> float:
        return HBAR / (2 * self.sigma_p * self.sigma_x)

    @property
    def is_pure(self) -> bool:
        return abs(self.sigma_p * self.sigma_x - HBAR / 2) <= 1e-12

    def rho(self, p, p_prime):
        """Momentum-space two-point function rho_X(p, p').

        Gaussian in the midpoint (p+p')/2 with width sigma_p, Gaussian decay
        in the offset p-p' with width hbar/sigma_x, and the translation phase
        exp(-i (p-p') x0 / hbar). Diagonal p'=p is the classical momentum
        density, normalized to 1 over p.
        """
        p = np.asarray(p, dtype=float)
        pp = np.asarray(p_prime, dtype=float)
        mid = 0.5 * (p + pp) - self.p0
        off = p - pp
        amp = (
            (2 * np.pi * self.sigma_p**2) ** -0.5
            * np.exp(-(mid**2) / (2 * self.sigma_p**2))
            * np.exp(-(off**2) * self.sigma_x**2 / (2 * HBAR**2))
        )
        out = amp * np.exp(-1j * off * self.x0 / HBAR)
        return complex(out) if out.ndim == 0 else out

    def momentum_density(self, p):
        """rho_X(p, p) as a real array."""
        p = np.asarray(p, dtype=float)
        out = (2 * np.pi * self.sigma_p**2) ** -0.5 * np.exp(
            -((p - self.p0) ** 2) / (2 * self.sigma_p**2))
        return float(out) if out.ndim == 0 else out

    def wigner(self, p, x):
        """Phase-space quasi-probability W(p, x); a normalized 2-d Gaussian
        for this family, peaking at 1/(2 pi sigma_p sigma_x)."""
        p = np.asarray(p, dtype=float)
        x = np.asarray(x, dtype=float)
        out = np.exp(
            -((p - self.p0) ** 2) / (2 * self.sigma_p**2)
            - ((x - self.x0) ** 2) / (2 * self.sigma_x**2)
        ) / (2 * np.pi * self.sigma_p * self.sigma_x)
        return float(out) if out.ndim == 0 else out


def gaussian_pure(p0: float, x0: float, sigma_p: float, mass: float = 1.0) -> KineticState:
    """Minimum-uncertainty wave packet: sigma_x = hbar/(2 sigma_p), purity 1."""
    if not sigma_p > 0:
        raise ValueError("sigma_p must be positive")
    return KineticState(p0=p0, x0=x0, sigma_p=sigma_p, sigma_x=HBAR / (2 * sigma_p), mass=mass)


def gaussian_mixed(
    p0: float, x0: float, sigma_p: float, sigma_x: float, mass: float = 1.0
) -> KineticState:
    """Gaussian phase-space state with independent widths (purity <= 1)."""
    return KineticState(p0=p0, x0=x0, sigma_p=sigma_p, sigma_x=sigma_x, mass=mass)


def wigner(state: KineticState):
    """Wigner function of a kinetic state as a callable W(p, x)."""
    return state.wigner


def purity(state: KineticState) -> float:
    """Tr[rho_X^2] = hbar/(2 sigma_p sigma_x) for the Gaussian family."""
    return state.purity


@dataclass(frozen=True)
class RegimeReport:
    """Raw validity ratios plus the derived boolean flags.

    Every `condN` field is a ratio that must be << 1 for the corresponding
    condition; `broad` applies the momentum-broadness inequality literally.
    """

    tau_p0: float
    cond1: float        # tau_p0 * span / hbar
    cond2a: float       # max|V| / E_p0
    cond2b: float       # hbar / (p0 * a_min)
    cond3a: float       # sigma_p / p0
    cond3b: float       # (m*span/p0) / (hbar/(2 sigma_x))
    broad: bool         # hbar/(2 sigma_x) > m*span/p0
    phase_ok: bool      # hbar/|x0| >> m*span/p0

    @property
    def cond1_ok(self) -> bool:
        return self.cond1 < HARDNESS_THRESHOLD

    @property
    def cond2_ok(self) -> bool:
        return self.cond2a < HARDNESS_THRESHOLD and self.cond2b < HARDNESS_THRESHOLD

    @property
    def cond3_ok(self) -> bool:
        return self.cond3a < HARDNESS_THRESHOLD and self.cond3b < HARDNESS_THRESHOLD

    @property
    def all_ok(self) -> bool:
        return self.cond1_ok and self.cond2_ok and self.cond3_ok and self.phase_ok

    def to_dict(self) -> dict:
        return {
            "tau_p0": self.tau_p0,
            "cond1": self.cond1,
            "cond2a": self.cond2a,
            "cond2b": self.cond2b,
            "cond3a": self.cond3a,
            "cond3b": self.cond3b,
            "broad": self.broad,
            "phase_ok": self.phase_ok,
            "cond1_ok": self.cond1_ok,
            "cond2_ok": self.cond2_ok,
            "cond3_ok": self.cond3_ok,
            "all_ok": self.all_ok,
        }


def classify_regime(
    state: KineticState, system: InternalSystem, potential: SpatialPotential
) -> RegimeReport:
    """Evaluate the work-source validity ratios for a state/system/potential."""
    if not state.p0 > 0:
        raise ValueError("regime classification needs p0 > 0")
    m = state.mass
    p0 = state.p0
    span = system.span
    tau_p0 = m * potential.a / p0
    e_p0 = p0**2 / (2 * m)
    v_scale = m * span / p0                      # momentum offset probed by the map
    half_width = HBAR / (2 * state.sigma_x)      # momentum coherence width
    phase_scale = HBAR / abs(state.x0) if state.x0 != 0 else np.inf
    return RegimeReport(
        tau_p0=tau_p0,
        cond1=tau_p0 * span / HBAR,
        cond2a=potential.max_abs / e_p0,
        cond2b=HBAR / (p0 * potential.a_min),
        cond3a=state.sigma_p / p0,
        cond3b=v_scale / half_width,
        broad=bool(half_width > v_scale),
        phase_ok=bool(v_scale == 0.0 or phase_scale > v_scale / HARDNESS_THRESHOLD),
    )
