"""Collision thermodynamics: energy, work, entropy, and sector observables.

Energy bookkeeping rests on total-energy conservation of the scattering
transformation: the internal gain Tr[H_Y (rho' - rho)] equals minus the
particle's kinetic-energy change, so a single number serves as both. When
the evolution is unitary the entropy change vanishes and that energy change
is work.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DensityMatrix, InternalSystem, von_neumann_entropy
from .kinetics import RegimeReport

_IMAG_DISCARD = 1e-10
_IMAG_ERROR = 1e-8


def energy_change(
    system: InternalSystem, rho: DensityMatrix, rho_prime: DensityMatrix
) -> float:
    """Tr[H_Y (rho' - rho)] for eigenbasis states (= minus the kinetic change)."""
    if rho.dim != system.dim or rho_prime.dim != system.dim:
        raise ValueError("state dimension does not match the system")
    diff = np.diag(rho_prime.matrix) - np.diag(rho.matrix)
    value = complex(np.dot(system.eigvals, diff))
    if abs(value.imag) > _IMAG_ERROR:
        raise ValueError(f"energy change has imaginary residue {value.imag:.3e}")
    return float(value.real)


def entropy_change(
    rho: DensityMatrix, rho_prime: DensityMatrix, negative_tol: float = 1e-10
) -> float:
    """S(rho') - S(rho) in units of k_B."""
    return von_neumann_entropy(rho_prime, negative_tol) - von_neumann_entropy(
        rho, negative_tol)


def sector_observables(system: InternalSystem, rho_prime: DensityMatrix) -> dict:
    """Populations and pairwise coherences of a labeled eigenbasis state.

    Keys are ``pop_<label>`` and ``coh_<row>_<col>`` for <row|rho'|col> over
    all ordered label pairs; for the two-spin system this includes the
    sector observables pop_upup, coh_dndn_upup, pop_updn, coh_dnup_updn.
    """
    if system.labels is None:
        raise KeyError("sector observables require a labeled eigenbasis")
    if rho_prime.dim != system.dim:
        raise ValueError("state dimension does not match the system")
    out: dict[str, complex | float] = {}
    mat = rho_prime.matrix
    for i, li in enumerate(system.labels):
        out[f"pop_{li}"] = float(mat[i, i].real)
    for i, li in enumerate(system.labels):
        for j, lj in enumerate(system.labels):
            if i == j:
                continue
            out[f"coh_{li}_{lj}"] = complex(mat[i, j])
    return out


@dataclass(frozen=True)
class CollisionReport:
    """Consolidated before/after record for one model run."""

    model: str
    rho_before: DensityMatrix
    rho_after: DensityMatrix
    delta_e: float
    delta_s: float
    work: float | None
    populations: dict
    coherences: dict
    diagnostics: dict = field(default_factory=dict)
    regime: RegimeReport | None = None

    @property
    def delta_e_p(self) -> float:
        """Kinetic-energy change of the particle (identically -delta_e)."""
        return -self.delta_e

    def to_dict(self) -> dict:
        out = {
            "model": self.model,
            "deltaE": self.delta_e,
            "deltaEp": self.delta_e_p,
            "deltaS": self.delta_s,
            "work": self.work,
            "populations": self.populations,
            "coherences": {
                k: [v.real, v.imag] for k, v in self.coherences.items()
            },
            "diagnostics": self.diagnostics,
        }
        if self.regime is not None:
            out["regime"] = self.regime.to_dict()
        return out


def build_report(
    model: str,
    system: InternalSystem,
    rho: DensityMatrix,
    rho_prime: DensityMatrix,
    work: float | None = None,
    diagnostics: dict | None = None,
    regime: RegimeReport | None = None,
    entropy_negative_tol: float = 1e-6,
) -> CollisionReport:
    """Assemble the standard report from before/after states.

    ``entropy_negative_tol`` is relaxed relative to the entropy operation's
    strict default because quadrature-built states legitimately carry
    negative eigenvalues at the map-construction tolerance.
    """
    d_e = energy_change(system, rho, rho_prime)
    d_s = entropy_change(rho, rho_prime, negative_tol=entropy_negative_tol)
    if system.labels is not None:
        obs = sector_observables(system, rho_prime)
        populations = {k[4:]: v for k, v in obs.items() if k.startswith("pop_")}
        coherences = {k[4:]: v for k, v in obs.items() if k.startswith("coh_")}
    else:
        mat = rho_prime.matrix
        populations = {str(i): float(mat[i, i].real) for i in range(system.dim)}
        coherences = {
            f"{i}_{j}": complex(mat[i, j])
            for i in range(system.dim)
            for j in range(system.dim)
            if i != j
        }
    diag = dict(diagnostics or {})
    diag.setdefault("trace_defect", float(abs(np.trace(rho_prime.matrix).real - 1.0)))
    diag.setdefault(
        "hermiticity_defect",
        float(np.abs(rho_prime.matrix - rho_prime.matrix.conj().T).max()),
    )
    return CollisionReport(
        model=model,
        rho_before=rho,
        rho_after=rho_prime,
        delta_e=d_e,
        delta_s=d_s,
        work=work,
        populations=populations,
        coherences=coherences,
        diagnostics=diag,
        regime=regime,
    )
