"""Dynamical maps acting on the joint internal state.

Four routes from the same collision physics, in decreasing fidelity and cost:

* exact scattering-map tensor: the rank-4 array S^{jk}_{j'k'} obtained by
  tracing the particle's motion out of the full scattering transformation;
  built by momentum quadrature over products of multichannel S-matrix
  elements weighted by the kinetic two-point function.
* random-unitary reduction: momentum average of conditioned unitaries
  U(tau_p) = exp(-i tau_p <V> nu / hbar), valid for broad packets.
* single-unitary collision: the saddle-point of that average at p = p0;
  entropy-preserving, i.e. the pure work source.
* time-driven model: exact von Neumann propagation under Vtilde(t)·nu in the
  interaction picture, plus its leading Magnus approximant.

All maps operate on density matrices expressed in the eigenbasis of the
internal Hamiltonian.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import HBAR, CouplingOperator, DensityMatrix, InternalSystem
from .integrate import gauss_legendre_nodes, solve_batched
from .kinetics import KineticState, classify_regime
from .potentials import SpatialPotential, TemporalPotential
from .smatrix import ClosedChannelError, MultichannelSolver

TRACE_DEFECT_LIMIT = 1e-4
U_DEFECT_RECORD_LIMIT = 1e-8
U_DEFECT_ERROR_LIMIT = 1e-6


class QuadratureError(RuntimeError):
    """Momentum quadrature failed to converge under panel doubling."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Controls for the momentum quadrature and S-matrix evaluation mode."""

    nodes: int = 128
    n_sigma: float = 8.0
    tol: float = 1e-8
    smatrix_mode: str = "grid"  # "grid" (interpolated) or "exact" (per-energy solves)
    grid_points: int = 64
    max_doublings: int = 4

    def __post_init__(self):
        if self.smatrix_mode not in ("grid", "exact"):
            raise ValueError(f"unknown smatrix_mode {self.smatrix_mode!r}")
        if self.nodes < 2 or self.n_sigma <= 0 or self.tol <= 0:
            raise ValueError("invalid quadrature spec")


@dataclass(frozen=True)
class MapTensor:
    """S^{jk}_{j'k'} over the internal eigenbasis, indexed [j', k', j, k]."""

    tensor: np.ndarray
    system: InternalSystem
    state: KineticState
    potential: SpatialPotential
    nodes_used: int
    window: tuple[float, float]

    @property
    def dim(self) -> int:
        return self.tensor.shape[0]


@dataclass(frozen=True)
class AppliedState:
    """Result of pushing a state through a map, with recorded defects."""

    rho: DensityMatrix
    trace_defect: float
    hermiticity_defect: float


@dataclass(frozen=True)
class CPTPReport:
    trace_defect: float
    hermiticity_defect: float
    min_choi_eig: float

    def to_dict(self) -> dict:
        return {
            "trace_defect": self.trace_defect,
            "hermiticity_defect": self.hermiticity_defect,
            "min_choi_eig": self.min_choi_eig,
        }


def _momentum_window(state: KineticState, quad: QuadratureSpec) -> tuple[float, float]:
    lo = state.p0 - quad.n_sigma * state.sigma_p
    hi = state.p0 + quad.n_sigma * state.sigma_p
    if lo <= 0:
        raise ValueError(
            f"momentum window [{lo:g}, {hi:g}] reaches p <= 0; "
            "reduce n_sigma or sigma_p")
    return lo, hi


def _energy_range(system: InternalSystem, state: KineticState,
                  p_lo: float, p_hi: float) -> tuple[float, float]:
    e = system.eigvals
    m = state.mass
    shift_lo = min(float(2 * e[0] - e[-1]), float(e[0]))
    shift_hi = max(float(2 * e[-1] - e[0]), float(e[-1]))
    return p_lo**2 / (2 * m) + shift_lo, p_hi**2 / (2 * m) + shift_hi


def scattering_map_tensor(
    system: InternalSystem,
    nu: CouplingOperator,
    potential: SpatialPotential,
    state: KineticState,
    quad: QuadratureSpec = QuadratureSpec(),
    ode_tol: float = 1e-10,
    solver: MultichannelSolver | None = None,
) -> MapTensor:
    """Build the exact scattering-map tensor by momentum quadrature.

    Each element integrates, over p in [p0 - n_sigma*sigma_p, p0 + n_sigma*
    sigma_p], the kinetic two-point function evaluated on the energy-shell
    curve pi(p) = sqrt(p^2 - 2m(gap(j',j) - gap(k',k))), times the flux factor
    sqrt(p/pi(p)), times products of left-incident S-matrix elements at the
    two shifted total energies, summed over outgoing direction. Node count is
    doubled until successive estimates agree elementwise to ``quad.tol``.

    A ``solver`` may be supplied to share its energy grid across several
    tensor builds with the same potential (e.g. a purity sweep).
    """
    n = system.dim
    m = state.mass
    e = system.eigvals
    p_lo, p_hi = _momentum_window(state, quad)
    e_lo, e_hi = _energy_range(system, state, p_lo, p_hi)
    if e_lo - e[-1] < 1e-6 * max(abs(e_lo), 1.0):
        raise ClosedChannelError(
            f"quadrature window reaches E = {e_lo:g} where channels close "
            f"(e_max = {e[-1]:g})")
    if solver is None:
        solver = MultichannelSolver(system, nu, potential, ode_tol, mass=m)
    if quad.smatrix_mode == "grid":
        grid = solver.ensure_grid(e_lo, e_hi, quad.grid_points)
        lookup = _GridLookup(grid)
    else:
        lookup = _ExactLookup(solver)

    # distinct energy shifts: E1 uses e_j, E2 uses e_j - e_j' + e_k'
    shifts_e2: dict[tuple[int, int, int], float] = {}
    for jp in range(n):
        for j in range(n):
            for kp in range(n):
                shifts_e2[(j, jp, kp)] = float(e[j] - e[jp] + e[kp])

    prev: np.ndarray | None = None
    nodes = quad.nodes
    for _ in range(quad.max_doublings + 1):
        tensor = _tensor_at_nodes(system, state, lookup, p_lo, p_hi, nodes, shifts_e2)
        if prev is not None and np.abs(tensor - prev).max() < quad.tol:
            return MapTensor(
                tensor=tensor, system=system, state=state, potential=potential,
                nodes_used=nodes, window=(p_lo, p_hi))
        prev = tensor
        nodes *= 2
    raise QuadratureError(
        f"tensor quadrature did not converge to {quad.tol:g} "
        f"within {nodes // 2} nodes")


class _GridLookup:
    def __init__(self, grid):
        self._grid = grid
        self._solver = grid.solver

    def blocks(self, energies: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raw = self._grid._spline(energies)            # (nE, 4, N, N)
        kin = energies[:, None] - self._solver.system.eigvals[None, :]
        momenta = np.sqrt(2 * self._solver.mass * kin)
        flux = np.sqrt(momenta[:, :, None] / momenta[:, None, :])
        return flux * raw[:, 0], flux * raw[:, 1]


class _ExactLookup:
    def __init__(self, solver: MultichannelSolver):
        self._solver = solver

    def blocks(self, energies: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        solved = self._solver.solve_many(energies)
        t = np.stack([s.t for s in solved])
        r = np.stack([s.r for s in solved])
        return t, r


def _tensor_at_nodes(system, state, lookup, p_lo, p_hi, nodes, shifts_e2) -> np.ndarray:
    n = system.dim
    e = system.eigvals
    m = state.mass
    ps, ws = gauss_legendre_nodes(p_lo, p_hi, nodes)
    ep = ps**2 / (2 * m)
    # left-incident blocks at the ket-side energies (one array per channel j)
    t1 = {}
    r1 = {}
    for j in range(n):
        t1[j], r1[j] = lookup.blocks(ep + e[j])
    # and at the bra-side shifted energies (one per distinct shift)
    by_shift = {}
    for key, delta in shifts_e2.items():
        skey = round(delta / 1e-12)
        if skey not in by_shift:
            by_shift[skey] = lookup.blocks(ep + delta)
    tensor = np.zeros((n, n, n, n), dtype=complex)
    for jp in range(n):
        for j in range(n):
            gap1 = e[jp] - e[j]
            s1t = t1[j][:, jp, j]
            s1r = r1[j][:, jp, j]
            for kp in range(n):
                t2, r2 = by_shift[round(shifts_e2[(j, jp, kp)] / 1e-12)]
                for k in range(n):
                    gap2 = e[kp] - e[k]
                    pi_sq = ps**2 - 2 * m * (gap1 - gap2)
                    pi = np.sqrt(pi_sq)
                    weight = ws * state.rho(ps, pi) * np.sqrt(ps / pi)
                    amp = s1t * np.conj(t2[:, kp, k]) + s1r * np.conj(r2[:, kp, k])
                    tensor[jp, kp, j, k] = np.sum(weight * amp)
    return tensor


def apply_map(tensor: MapTensor, rho: DensityMatrix) -> AppliedState:
    """rho'_{j'k'} = sum_{jk} S^{jk}_{j'k'} rho_{jk}, in the eigenbasis.

    The raw output is symmetrized to restore exact Hermiticity; both the
    Hermiticity defect and the trace defect are recorded, and the trace is
    never renormalized (its defect is the primary quadrature-quality signal).
    """
    if rho.dim != tensor.dim:
        raise ValueError("state dimension does not match the tensor")
    out = np.einsum("abjk,jk->ab", tensor.tensor, rho.matrix)
    herm_defect = float(np.abs(out - out.conj().T).max())
    out = 0.5 * (out + out.conj().T)
    trace_defect = float(abs(np.trace(out).real - 1.0))
    if trace_defect > TRACE_DEFECT_LIMIT:
        raise QuadratureError(
            f"trace defect {trace_defect:.3e} exceeds {TRACE_DEFECT_LIMIT:g}; "
            "quadrature or S-matrix grid too coarse")
    return AppliedState(
        rho=DensityMatrix(out, validate=False),
        trace_defect=trace_defect,
        hermiticity_defect=herm_defect,
    )


def random_unitary_map(
    system: InternalSystem,
    nu: CouplingOperator,
    potential: SpatialPotential,
    state: KineticState,
    rho: DensityMatrix,
    quad: QuadratureSpec = QuadratureSpec(),
) -> DensityMatrix:
    """Momentum-averaged unitary conjugation (the broad-packet reduction).

    rho' = integral dp rho_X(p,p) U(tau_p) rho U(tau_p)^dagger with
    U(tau_p) = exp(-i tau_p <V> nu / hbar). Warns when the kinetic state is
    not broad, where this reduction loses the exact map's decoherence.
    """
    report = classify_regime(state, system, potential)
    if not report.broad:
        warnings.warn(
            "kinetic state is not momentum-broad; the random-unitary "
            "reduction may disagree with the exact map", stacklevel=2)
    p_lo, p_hi = _momentum_window(state, quad)
    nu_eig = system.to_eigenbasis(nu.nu)
    w, q = np.linalg.eigh(nu_eig)
    rho_in = rho.matrix
    scale = state.mass * potential.a * potential.mean / HBAR

    def estimate(nodes: int) -> np.ndarray:
        ps, wts = gauss_legendre_nodes(p_lo, p_hi, nodes)
        wts = wts * state.momentum_density(ps)
        phases = np.exp(-1j * np.outer(scale / ps, w))     # (nodes, N)
        us = np.einsum("ab,nb,cb->nac", q, phases, q.conj())
        rotated = us @ rho_in @ us.conj().transpose(0, 2, 1)
        return np.einsum("n,nab->ab", wts, rotated)

    prev = None
    nodes = quad.nodes
    for _ in range(quad.max_doublings + 1):
        out = estimate(nodes)
        if prev is not None and np.abs(out - prev).max() < quad.tol:
            return DensityMatrix(0.5 * (out + out.conj().T), validate=False)
        prev = out
        nodes *= 2
    raise QuadratureError("random-unitary quadrature did not converge")


def semiclassical_collision(
    system: InternalSystem,
    nu: CouplingOperator,
    mean_v: float,
    p0: float,
    a: float,
    rho: DensityMatrix,
    mass: float = 1.0,
) -> DensityMatrix:
    """Single-unitary collision at the mean momentum: the work-source limit.

    rho' = U rho U^dagger with U = exp(-i tau_p0 <V> nu / hbar) and
    tau_p0 = m a / p0; entropy is exactly preserved.
    """
    if not p0 > 0:
        raise ValueError("p0 must be positive")
    u = collision_unitary(system, nu, mean_v * mass * a / (p0 * HBAR))
    return rho.conjugated(u)


def collision_unitary(system: InternalSystem, nu: CouplingOperator, lam: float) -> np.ndarray:
    """exp(-i lam nu) in the internal eigenbasis."""
    nu_eig = system.to_eigenbasis(nu.nu)
    w, q = np.linalg.eigh(nu_eig)
    return (q * np.exp(-1j * lam * w)) @ q.conj().T


@dataclass(frozen=True)
class TimeDependentResult:
    rho: DensityMatrix
    propagator: np.ndarray
    unitarity_defect: float


def time_dependent_propagator(
    system: InternalSystem,
    nu: CouplingOperator,
    drive: TemporalPotential,
    ode_tol: float = 1e-10,
    t0: float | None = None,
    t1: float | None = None,
) -> tuple[np.ndarray, float]:
    """Interaction-picture propagator of the driven model, in the eigenbasis.

    Integrates dU/dt = -(i/hbar) Vtilde(t) e^{iHt} nu e^{-iHt} U from t0 to
    t1 (defaults: the drive's support). Returns the re-unitarized propagator
    and the raw unitarity defect, which must stay at recording level.
    """
    nu_eig = system.to_eigenbasis(nu.nu)
    e = system.eigvals
    n = system.dim
    lo = -drive.tau / 2 if t0 is None else float(t0)
    hi = drive.tau / 2 if t1 is None else float(t1)

    def rhs(t: float, u: np.ndarray) -> np.ndarray:
        v = drive(t)
        if v == 0.0:
            return np.zeros_like(u)
        ph = np.exp((1j * t / HBAR) * e)
        v_int = v * (nu_eig * np.outer(ph, ph.conj()))
        return (-1j / HBAR) * (v_int @ u)

    u = solve_batched(rhs, lo, hi, np.eye(n, dtype=complex), ode_tol)
    defect = float(np.abs(u.conj().T @ u - np.eye(n)).max())
    if defect > U_DEFECT_ERROR_LIMIT:
        raise RuntimeError(
            f"propagator unitarity defect {defect:.3e} exceeds "
            f"{U_DEFECT_ERROR_LIMIT:g}; reduce ode_tol")
    if defect > U_DEFECT_RECORD_LIMIT:
        warnings.warn(
            f"propagator unitarity defect {defect:.3e} above the recording "
            f"threshold {U_DEFECT_RECORD_LIMIT:g}", stacklevel=2)
    # polar projection onto the closest unitary
    uu, _, vh = np.linalg.svd(u)
    return uu @ vh, defect


def time_dependent_evolve(
    system: InternalSystem,
    nu: CouplingOperator,
    drive: TemporalPotential,
    rho: DensityMatrix,
    ode_tol: float = 1e-10,
) -> TimeDependentResult:
    """Evolve a state through the full drive: rho' = U rho U^dagger."""
    u, defect = time_dependent_propagator(system, nu, drive, ode_tol)
    return TimeDependentResult(rho=rho.conjugated(u), propagator=u, unitarity_defect=defect)


def magnus_first_order(
    system: InternalSystem, nu: CouplingOperator, drive: TemporalPotential
) -> np.ndarray:
    """Leading Magnus propagator exp(-i tau <Vtilde> nu / hbar)."""
    return collision_unitary(system, nu, drive.tau * drive.mean / HBAR)


def magnus_second_order_norm(
    system: InternalSystem,
    nu: CouplingOperator,
    drive: TemporalPotential,
    nodes: int = 48,
) -> float:
    """Spectral norm of the second Magnus term (short-collision diagnostic).

    Vanishes when the interaction picture is frozen (V_I ~ V); its growth
    with tau*span quantifies how badly the short-collision condition fails.
    """
    nu_eig = system.to_eigenbasis(nu.nu)
    e = system.eigvals

    def v_int(t: float) -> np.ndarray:
        ph = np.exp((1j * t / HBAR) * e)
        return drive(t) * (nu_eig * np.outer(ph, ph.conj()))

    outer_t, outer_w = gauss_legendre_nodes(-drive.tau / 2, drive.tau / 2, nodes)
    total = np.zeros_like(nu_eig)
    for t, wt in zip(outer_t, outer_w):
        inner_t, inner_w = gauss_legendre_nodes(-drive.tau / 2, t, nodes)
        vt = v_int(t)
        inner = np.zeros_like(nu_eig)
        for tp, wp in zip(inner_t, inner_w):
            vtp = v_int(tp)
            inner += wp * (vt @ vtp - vtp @ vt)
        total += wt * inner
    omega2 = -total / (2 * HBAR**2)
    return float(np.linalg.norm(omega2, 2))


def choi_matrix(tensor: MapTensor) -> np.ndarray:
    """Choi operator: the map applied entrywise to the matrix units.

    C[(j,a),(k,b)] = Map(|j><k|)_{ab}; positive semidefinite iff the map is
    completely positive. The identity map gives N times the maximally
    entangled projector.
    """
    n = tensor.dim
    return np.ascontiguousarray(
        tensor.tensor.transpose(2, 0, 3, 1).reshape(n * n, n * n))


def cptp_check(tensor: MapTensor) -> CPTPReport:
    """Trace preservation, Hermiticity preservation, and Choi positivity."""
    n = tensor.dim
    s = tensor.tensor
    trace_defect = float(
        np.abs(np.einsum("aajk->jk", s) - np.eye(n)).max())
    herm_defect = float(
        np.abs(s - s.transpose(1, 0, 3, 2).conj()).max())
    choi = choi_matrix(tensor)
    min_eig = float(np.linalg.eigvalsh(0.5 * (choi + choi.conj().T)).min())
    return CPTPReport(
        trace_defect=trace_defect,
        hermiticity_defect=herm_defect,
        min_choi_eig=min_eig,
    )
