import numpy as np
import pytest

from qcollide import (
    ClosedChannelError,
    CouplingOperator,
    InternalSystem,
    MultichannelSolver,
    SpatialPotential,
    analytic_unitary,
    semiclassical_smatrix,
    solve_multichannel,
    unitarity_defect,
)
from oracles import rectangular_barrier_transmission

SZ = np.diag([1.0, -1.0]).astype(complex)


def single_level_system():
    return InternalSystem.from_parts(np.zeros((1, 1)), np.zeros((1, 1)))


class TestExactSolver:
    def test_free_propagation(self, two_spin):
        system, _ = two_spin
        nu0 = CouplingOperator(np.zeros((4, 4)))
        pot = SpatialPotential("sinusoidal", 3.5, 4.0)
        sm = solve_multichannel(system, nu0, pot, 50.0)
        assert np.abs(sm.t - np.eye(4)).max() < 1e-10
        assert np.abs(sm.r).max() < 1e-10
        assert sm.defect < 1e-10

    def test_rectangular_barrier_oracle(self):
        system = single_level_system()
        nu = CouplingOperator([[1.0]])
        pot = SpatialPotential("square", 2.0, 5.0)
        for ratio in (1.3, 2.0, 4.0, 9.0):
            energy = ratio * 5.0
            sm = solve_multichannel(system, nu, pot, energy)
            t_sq = abs(sm.t[0, 0]) ** 2
            assert t_sq == pytest.approx(
                rectangular_barrier_transmission(energy, 5.0, 2.0), abs=1e-6)
            assert sm.defect < 1e-8

    def test_unitarity_slow_regime(self, two_spin):
        system, nu = two_spin
        pot = SpatialPotential("sinusoidal", 3.5, 40.0)  # strong barrier
        for energy in (60.0, 98.0, 150.0):
            sm = solve_multichannel(system, nu, pot, energy)
            assert sm.defect < 1e-6
            assert np.abs(sm.r).max() > 1e-3  # reflection genuinely present

    def test_closed_channel_raises(self, two_spin):
        system, nu = two_spin
        pot = SpatialPotential("sinusoidal", 3.5, 1.0)
        with pytest.raises(ClosedChannelError):
            solve_multichannel(system, nu, pot, 1.0)

    def test_identity_limit_small_v0(self, two_spin):
        system, nu = two_spin
        defects = []
        for v0 in (1e-3, 1e-2, 1e-1):
            pot = SpatialPotential("sinusoidal", 3.5, v0)
            sm = solve_multichannel(system, nu, pot, 200.0)
            defects.append(np.abs(sm.t - np.eye(4)).max())
        # deviation from free transmission shrinks linearly with V0
        assert defects[0] < defects[1] < defects[2]
        assert defects[0] < 2e-3

    def test_cache_determinism(self, two_spin):
        system, nu = two_spin
        pot = SpatialPotential("sinusoidal", 3.5, 4.0)
        solver = MultichannelSolver(system, nu, pot)
        first = solver.solve(77.0)
        second = solver.solve(77.0)
        assert first is second  # memoized
        fresh = MultichannelSolver(system, nu, pot).solve(77.0)
        assert np.array_equal(first.t, fresh.t)
        assert np.array_equal(first.r, fresh.r)

    def test_batch_matches_probe_convention(self, two_spin):
        system, nu = two_spin
        pot = SpatialPotential("sinusoidal", 3.5, 4.0)
        solver = MultichannelSolver(system, nu, pot)
        both = solver.solve_many([90.0, 120.0])
        assert both[0].energy == 90.0 and both[1].energy == 120.0
        full = both[0].full_matrix()
        assert full.shape == (8, 8)
        assert np.abs(full[:4, :4] - both[0].t).max() == 0.0


class TestSemiclassical:
    def test_zero_height_identity(self, two_spin):
        system, nu = two_spin
        pot = SpatialPotential("sinusoidal", 3.5, 0.0)
        sm = semiclassical_smatrix(system, nu, pot, 1400.0)
        assert np.abs(sm.t - np.eye(4)).max() < 1e-14
        assert unitarity_defect(sm) < 1e-12

    def test_matches_block_rotation(self, two_spin):
        system, nu = two_spin
        lam = 2.2
        p0, a = 1400.0, 3.5
        pot = SpatialPotential("sinusoidal", a, lam * p0 / a)  # tau_p*<V> = lam
        sm = semiclassical_smatrix(system, nu, pot, p0)
        u_prod = analytic_unitary(lam, 0.8, 0.2)
        u_eig = system.to_eigenbasis(u_prod)
        assert np.abs(sm.t - u_eig).max() < 1e-12

    def test_columns_normalized(self, two_spin):
        system, nu = two_spin
        pot = SpatialPotential("sinusoidal", 3.5, 500.0)
        sm = semiclassical_smatrix(system, nu, pot, 900.0)
        sums = np.sum(np.abs(sm.t) ** 2, axis=0)
        assert np.abs(sums - 1.0).max() < 1e-12
        assert unitarity_defect(sm) < 1e-12


class TestGridInterpolation:
    def test_grid_matches_exact(self, two_spin):
        system, nu = two_spin
        pot = SpatialPotential("sinusoidal", 3.5, 8.0)
        solver = MultichannelSolver(system, nu, pot)
        grid = solver.ensure_grid(40.0, 240.0)
        for energy in (55.5, 111.1, 198.7):
            it = grid.interpolate(energy)
            ex = solver.solve(energy)
            assert np.abs(it.t - ex.t).max() < 1e-6
            assert np.abs(it.r - ex.r).max() < 1e-6

    def test_out_of_range_rejected(self, two_spin):
        system, nu = two_spin
        pot = SpatialPotential("sinusoidal", 3.5, 8.0)
        solver = MultichannelSolver(system, nu, pot)
        solver.ensure_grid(40.0, 80.0)
        with pytest.raises(ValueError):
            solver.interpolate(300.0)


class TestSemiclassicalConvergence:
    def test_exact_approaches_semiclassical_with_momentum(self, two_spin):
        # fixed lambda = V0 * tau_p0, growing p0
        system, nu = two_spin
        lam, a = 1.0, 3.5
        errs = []
        for p0 in (350.0, 700.0, 1400.0):
            pot = SpatialPotential("sinusoidal", a, lam * p0 / a)
            energy = p0**2 / 2
            exact = solve_multichannel(system, nu, pot, energy)
            semi = semiclassical_smatrix(system, nu, pot, np.sqrt(2 * energy))
            errs.append(np.abs(exact.t - semi.t).max())
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 1e-3
