import numpy as np
import pytest

from qcollide import (
    DensityMatrix,
    build_report,
    energy_change,
    entropy_change,
    sector_observables,
    semiclassical_collision,
)
from oracles import rabi_energy_change, two_sector_rotation


class TestEnergyChange:
    def test_no_change(self, two_spin, initial_eigen):
        system, _ = two_spin
        assert energy_change(system, initial_eigen, initial_eigen) == 0.0

    def test_commuting_unitary_conserves(self, two_spin, initial_eigen):
        system, _ = two_spin
        phase = np.exp(-1j * 0.7 * system.eigvals)
        rho1 = DensityMatrix(
            (initial_eigen.matrix * np.outer(phase, phase.conj())), validate=False)
        assert abs(energy_change(system, initial_eigen, rho1)) < 1e-12

    def test_half_cycle_oracle(self, two_spin, initial_eigen, initial_product):
        # lambda = 5 pi/6: sector one swaps completely (lambda1 = pi/2),
        # sector two rotates by lambda2 = 5 pi/6
        system, nu = two_spin
        lam = 5 * np.pi / 6
        p0, a = 100.0, 3.5
        rho1 = semiclassical_collision(system, nu, lam * p0 / a, p0, a, initial_eigen)
        got = energy_change(system, initial_eigen, rho1)
        expect = rabi_energy_change(initial_product.matrix, lam, 0.8, 0.2, 0.75, 0.5)
        assert got == pytest.approx(expect, abs=1e-10)
        # the sector-one piece alone is (e_dndn - e_upup)(rho_upup - rho_dndn)
        sector_one_piece = (-1.25 - 1.25) * (0.05 - 0.45)
        assert sector_one_piece == pytest.approx(1.0)
        # sector two adds sin^2(lambda2) * (p_dnup - p_updn) * (e_updn - e_dnup)
        assert got == pytest.approx(1.05, abs=1e-10)

    def test_imaginary_residue_rejected(self, two_spin, initial_eigen):
        system, _ = two_spin
        bad = DensityMatrix(
            initial_eigen.matrix + 1e-6j * np.diag([1.0, 0, 0, 0]), validate=False)
        with pytest.raises(ValueError):
            energy_change(system, initial_eigen, bad)


class TestEntropyChange:
    def test_unitary_map_preserves(self, two_spin, initial_eigen):
        system, nu = two_spin
        rho1 = semiclassical_collision(system, nu, 40.0, 100.0, 3.5, initial_eigen)
        assert abs(entropy_change(initial_eigen, rho1)) < 1e-10

    def test_pure_state_cannot_lose_entropy(self, two_spin, initial_eigen):
        u = two_sector_rotation(0.9, 0.8, 0.2)
        mixed = 0.6 * initial_eigen.matrix + 0.4 * (
            u @ initial_eigen.matrix @ u.conj().T)
        rho1 = DensityMatrix(mixed, validate=False)
        assert entropy_change(initial_eigen, rho1) >= -1e-8


class TestSectorObservables:
    def test_initial_product_populations(self, two_spin, initial_eigen):
        system, _ = two_spin
        obs = sector_observables(system, initial_eigen)
        assert obs["pop_upup"] == pytest.approx(0.05)
        assert obs["pop_dndn"] == pytest.approx(0.45)
        assert obs["pop_updn"] == pytest.approx(0.05)
        assert obs["pop_dnup"] == pytest.approx(0.45)
        # product coherence <dndn|rho|upup> = conj(coh_a) * conj(coh_b) = -0.15 i
        assert obs["coh_dndn_upup"] == pytest.approx(-0.15j)

    def test_full_cycle_returns_sector_one(self, two_spin, initial_eigen):
        system, nu = two_spin
        lam = 5 * np.pi / 3
        rho1 = semiclassical_collision(system, nu, lam * 100.0 / 3.5, 100.0, 3.5,
                                       initial_eigen)
        obs0 = sector_observables(system, initial_eigen)
        obs1 = sector_observables(system, rho1)
        for key in ("pop_upup", "pop_dndn"):
            assert obs1[key] == pytest.approx(obs0[key], abs=1e-8)
        assert obs1["coh_dndn_upup"] == pytest.approx(obs0["coh_dndn_upup"], abs=1e-8)

    def test_maximally_mixed(self, two_spin):
        system, _ = two_spin
        obs = sector_observables(system, DensityMatrix(np.eye(4) / 4))
        for label in system.labels:
            assert obs[f"pop_{label}"] == pytest.approx(0.25)
        assert obs["coh_dndn_upup"] == 0.0

    def test_unlabeled_system_rejected(self):
        from qcollide import InternalSystem
        system = InternalSystem.from_parts(np.diag([1.0, -1.0]), np.diag([0.5, -0.5]))
        with pytest.raises(KeyError):
            sector_observables(system, DensityMatrix(np.eye(4) / 4))


class TestCollisionReport:
    def test_self_consistency(self, two_spin, initial_eigen):
        system, nu = two_spin
        rho1 = semiclassical_collision(system, nu, 40.0, 100.0, 3.5, initial_eigen)
        report = build_report("semiclassical", system, initial_eigen, rho1,
                              work=energy_change(system, initial_eigen, rho1))
        assert report.delta_e_p == -report.delta_e
        # deltaE recomputed from populations and eigenvalues
        recomputed = sum(
            system.eigvals[system.label_index(lbl)] * (
                report.populations[lbl] - initial_eigen.matrix[
                    system.label_index(lbl), system.label_index(lbl)].real)
            for lbl in system.labels)
        assert recomputed == pytest.approx(report.delta_e, abs=1e-10)
        assert sum(report.populations.values()) == pytest.approx(
            np.trace(rho1.matrix).real, abs=1e-10)
        assert report.work == pytest.approx(report.delta_e)

    def test_json_round_trip_types(self, two_spin, initial_eigen):
        import json

        system, nu = two_spin
        rho1 = semiclassical_collision(system, nu, 40.0, 100.0, 3.5, initial_eigen)
        report = build_report("semiclassical", system, initial_eigen, rho1)
        payload = json.loads(json.dumps(report.to_dict()))
        assert payload["model"] == "semiclassical"
        assert payload["deltaEp"] == -payload["deltaE"]
        assert set(payload["populations"]) == set(system.labels)
