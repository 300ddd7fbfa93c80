"""Acceptance suite: one test per primary criterion, at stated tolerances.

Each test prints a single PASS line (with its headline numbers) once its
assertions hold; run with ``pytest -s tests/test_acceptance.py`` to see them.
The reference two-spin collision: gaps 0.75/0.5, couplings 0.8/0.2,
sinusoidal barrier of length 3.5, hbar = m = 1. Fast protocol: collision
time 2.5e-3 (p0 = 1400); breakdown protocol: 2.5e-1 (p0 = 14).
"""
import time

import numpy as np
import pytest

from qcollide import (
    CouplingOperator,
    DensityMatrix,
    MultichannelSolver,
    SpatialPotential,
    TemporalPotential,
    apply_map,
    cptp_check,
    energy_change,
    entropy_change,
    gaussian_mixed,
    gaussian_pure,
    magnus_first_order,
    random_unitary_map,
    scattering_map_tensor,
    semiclassical_collision,
    solve_multichannel,
    time_dependent_evolve,
    time_dependent_propagator,
)
from qcollide.runner import run_sweep
from qcollide.config import parse_config
from oracles import rectangular_barrier_transmission

A_LEN = 3.5
SPAN = 2.5
TAU_FAST = 2.5e-3
TAU_SLOW = 2.5e-1
P0_FAST = A_LEN / TAU_FAST   # 1400
P0_SLOW = A_LEN / TAU_SLOW   # 14
SIGMA_P_DEFAULT = 100 * SPAN / P0_FAST


def fast_packet(sigma_p=SIGMA_P_DEFAULT, sigma_x=None):
    if sigma_x is None:
        return gaussian_pure(P0_FAST, 0.0, sigma_p)
    return gaussian_mixed(P0_FAST, 0.0, sigma_p, sigma_x)


def pot_for_lambda(lam: float, tau: float) -> SpatialPotential:
    return SpatialPotential("sinusoidal", A_LEN, lam / tau)


def _announce(name: str, start: float, detail: str) -> None:
    print(f"PASS {name} [{time.perf_counter() - start:.1f}s] {detail}")


class TestAcceptance:
    def test_smatrix_unitarity_fast_grid(self, two_spin):
        start = time.perf_counter()
        system, nu = two_spin
        solver = MultichannelSolver(system, nu, pot_for_lambda(1.0, TAU_FAST))
        momenta = np.linspace(P0_FAST - 8 * SIGMA_P_DEFAULT,
                              P0_FAST + 8 * SIGMA_P_DEFAULT, 64)
        energies = momenta**2 / 2 + system.eigvals[-1]
        solved = solver.solve_many(energies)
        worst = max(s.defect for s in solved)
        assert worst <= 1e-6
        _announce("smatrix-unitarity", start, f"64 energies, max defect {worst:.2e}")

    def test_single_channel_rectangular_oracle(self):
        start = time.perf_counter()
        from qcollide import InternalSystem
        system = InternalSystem.from_parts(np.zeros((1, 1)), np.zeros((1, 1)))
        nu = CouplingOperator([[1.0]])
        v0, width = 5.0, 2.0
        pot = SpatialPotential("square", width, v0)
        solver = MultichannelSolver(system, nu, pot)
        energies = np.linspace(1.2, 10.0, 50) * v0
        solved = solver.solve_many(energies)
        worst = max(
            abs(abs(s.t[0, 0]) ** 2 - rectangular_barrier_transmission(e, v0, width))
            for e, s in zip(energies, solved))
        assert worst <= 1e-6
        _announce("single-channel-oracle", start, f"50 energies, max |T| error {worst:.2e}")

    def test_semiclassical_equivalence_fast(self, two_spin, initial_eigen):
        start = time.perf_counter()
        system, nu = two_spin
        packet = fast_packet()
        worst_pair = worst_ds = worst_w = 0.0
        worst_chain = 0.0   # nominal couplings only: the S-matrix's
        # semiclassical residual grows linearly in lambda
        for lam in (0.5, 1.0, 2.0, 5.0, 8.0):
            pot = pot_for_lambda(lam, TAU_FAST)
            tensor = scattering_map_tensor(system, nu, pot, packet)
            rho_exact = apply_map(tensor, initial_eigen).rho
            drive = TemporalPotential("triangular", TAU_FAST, lam / TAU_FAST)
            rho_td = time_dependent_evolve(system, nu, drive, initial_eigen).rho
            rho_sc = semiclassical_collision(
                system, nu, pot.mean, P0_FAST, A_LEN, initial_eigen)
            trio = (rho_exact.matrix, rho_td.matrix, rho_sc.matrix)
            for i in range(3):
                for j in range(i + 1, 3):
                    worst_pair = max(worst_pair, float(np.abs(trio[i] - trio[j]).max()))
            worst_ds = max(worst_ds, abs(
                entropy_change(initial_eigen, rho_exact, negative_tol=1e-6)))
            w = energy_change(system, initial_eigen, rho_td)
            de = energy_change(system, initial_eigen, rho_exact)
            worst_w = max(worst_w, abs(w - de))
            rho_ru = random_unitary_map(system, nu, pot, packet, initial_eigen)
            if lam <= 2.0:
                worst_chain = max(
                    worst_chain,
                    float(np.abs(rho_exact.matrix - rho_ru.matrix).max()),
                    float(np.abs(rho_ru.matrix - rho_sc.matrix).max()))
        assert worst_pair <= 1e-2
        assert worst_ds <= 1e-2
        assert worst_w <= 1e-3 * SPAN
        assert worst_chain <= 1e-3  # exact -> random-unitary -> single-unitary chain
        _announce(
            "semiclassical-equivalence", start,
            f"max model gap {worst_pair:.2e}, |dS| {worst_ds:.2e}, "
            f"|W-dE| {worst_w:.2e}, chain {worst_chain:.2e}")

    def test_breakdown_slow_strong(self, two_spin, initial_eigen):
        start = time.perf_counter()
        system, nu = two_spin
        packet = gaussian_pure(P0_SLOW, 0.0, 1.0)
        coh_dep = ds_dep = 0.0
        i_dn = system.label_index("dndn")
        i_up = system.label_index("upup")
        lambdas = (2.0, 4.0, 6.0, 8.0, 10.0)
        # the sweep reaches the strong-coupling window E_p0 / V0 <= 10
        assert P0_SLOW**2 / 2 / pot_for_lambda(lambdas[-1], TAU_SLOW).v0 <= 10.0
        for lam in lambdas:
            pot = pot_for_lambda(lam, TAU_SLOW)
            tensor = scattering_map_tensor(system, nu, pot, packet)
            rho_exact = apply_map(tensor, initial_eigen).rho
            rho_sc = semiclassical_collision(
                system, nu, pot.mean, P0_SLOW, A_LEN, initial_eigen)
            coh_dep = max(coh_dep, abs(
                rho_exact.matrix[i_dn, i_up] - rho_sc.matrix[i_dn, i_up]))
            ds_dep = max(ds_dep, abs(
                entropy_change(initial_eigen, rho_exact, negative_tol=1e-6)))
        assert coh_dep > 5e-2
        assert ds_dep > 5e-2
        _announce("breakdown-regime", start,
                  f"coherence departure {coh_dep:.3f}, dS departure {ds_dep:.3f}")

    def test_rabi_periodicity(self, two_spin, initial_eigen):
        start = time.perf_counter()
        system, nu = two_spin
        one = [system.label_index(lbl) for lbl in ("upup", "dndn")]
        for n_cycles, lam in ((1, 5 * np.pi / 3), (2, 10 * np.pi / 3)):
            rho1 = semiclassical_collision(
                system, nu, lam * P0_FAST / A_LEN, P0_FAST, A_LEN, initial_eigen)
            for idx in one:
                assert rho1.matrix[idx, idx].real == pytest.approx(
                    initial_eigen.matrix[idx, idx].real, abs=1e-8)
        _announce("rabi-periodicity", start, "sector one restored at 5pi/3 and 10pi/3")

    def test_mixed_state_transition(self, two_spin, initial_eigen):
        start = time.perf_counter()
        system, nu = two_spin
        sigma_xs = (0.5, 50.0, 500.0, 5000.0)
        lambdas = np.arange(1.0, 10.5, 1.0)
        curves = {sx: [] for sx in sigma_xs}
        for lam in lambdas:
            pot = pot_for_lambda(lam, TAU_FAST)
            solver = MultichannelSolver(system, nu, pot)  # grid shared over sigma_x
            for sx in sigma_xs:
                packet = fast_packet(sigma_p=1.0, sigma_x=sx)
                tensor = scattering_map_tensor(
                    system, nu, pot, packet, solver=solver)
                rho1 = apply_map(tensor, initial_eigen).rho
                curves[sx].append(
                    entropy_change(initial_eigen, rho1, negative_tol=1e-6))
        peak = int(np.argmax(curves[5000.0]))
        ds_broadest = curves[5000.0][peak]
        ds_pure = curves[0.5][peak]
        ds_mid = curves[50.0][peak]
        assert ds_broadest >= 10 * abs(ds_pure)
        assert abs(ds_mid) <= 2e-2
        _announce(
            "mixed-state-transition", start,
            f"lam* = {lambdas[peak]:g}: dS(5000) = {ds_broadest:.3f}, "
            f"dS(0.5) = {ds_pure:.2e}, dS(50) = {ds_mid:.2e}")

    def test_cptp_property_suite(self, two_spin):
        start = time.perf_counter()
        system, _ = two_spin
        packet = fast_packet()
        pot = pot_for_lambda(1.0, TAU_FAST)
        worst = {"trace_defect": 0.0, "hermiticity_defect": 0.0, "min_choi_eig": 0.0}
        for seed in range(5):
            rng = np.random.default_rng(seed)
            h = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            nu = CouplingOperator(0.5 * (h + h.conj().T))
            tensor = scattering_map_tensor(system, nu, pot, packet)
            rep = cptp_check(tensor)
            assert rep.trace_defect <= 1e-6
            assert rep.hermiticity_defect <= 1e-8
            assert rep.min_choi_eig >= -1e-6
            worst["trace_defect"] = max(worst["trace_defect"], rep.trace_defect)
            worst["hermiticity_defect"] = max(
                worst["hermiticity_defect"], rep.hermiticity_defect)
            worst["min_choi_eig"] = min(worst["min_choi_eig"], rep.min_choi_eig)
        _announce(
            "cptp-suite", start,
            f"5 random couplings: trace {worst['trace_defect']:.1e}, "
            f"herm {worst['hermiticity_defect']:.1e}, "
            f"choi {worst['min_choi_eig']:.1e}")

    def test_magnus_convergence(self, two_spin):
        start = time.perf_counter()
        system, nu = two_spin
        errs = []
        for tau in (2.5e-2, 2.5e-3, 2.5e-4):
            drive = TemporalPotential("triangular", tau, 1.0 / tau)  # lambda = 1
            u_exact, _ = time_dependent_propagator(system, nu, drive)
            u1 = magnus_first_order(system, nu, drive)
            errs.append(float(np.abs(u_exact - u1).max()))
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] <= 1e-4
        _announce("magnus-convergence", start,
                  "errors " + " > ".join(f"{e:.2e}" for e in errs))

    def test_sweep_determinism(self, tmp_path):
        start = time.perf_counter()
        raw = {
            "schema_version": 1,
            "system": {"kind": "two_spin", "delta_a": 0.75, "delta_b": 0.5,
                       "jx": 0.8, "jy": 0.2},
            "initial_state": {"kind": "pure_product_qubits", "pop_up_a": 0.1,
                              "pop_up_b": 0.5, "phase_a": np.pi / 4,
                              "phase_b": np.pi / 4},
            "potential": {
                "spatial": {"kind": "sinusoidal", "a": A_LEN, "v0": 4.0},
                "temporal": {"kind": "triangular", "tau": TAU_SLOW, "v0": 4.0},
            },
            "kinetic": {"x0": 0.0, "sigma_p": 1.0, "mass": 1.0},
            "models": {"run": ["exact_sm", "random_unitary", "semiclassical",
                               "time_dependent", "magnus1"]},
            "sweep": {"variable": "lambda", "values": [0.0, 1.0, 2.0]},
        }
        def stripped(text: str) -> str:
            lines = []
            for line in text.splitlines():
                cells = line.split(",")
                del cells[10]  # runtime_ms
                lines.append(",".join(cells))
            return "\n".join(lines)

        first = run_sweep(parse_config(raw), threads=1)
        second = run_sweep(parse_config(raw), threads=1)
        multi = run_sweep(parse_config(raw), threads=3)
        assert stripped(first) == stripped(second)
        assert stripped(first) == stripped(multi)
        _announce("sweep-determinism", start,
                  "byte-identical CSV single- and multi-threaded")
