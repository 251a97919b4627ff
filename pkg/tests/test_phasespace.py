"""Phase-space grid and PDE solver: quadrature moments, closed-form transport
checks, and the cross-check against the moment ODE."""

import numpy as np
import pytest

from qbmarket import ModelParams, StabilityError
from qbmarket.dynamics import (
    HarmonicPotential,
    KernelSchedule,
    MomentState,
    PhaseSpaceGrid,
    evolve_moments,
    evolve_wigner_pde,
    grid_moments,
    stable_time_step,
)


def free_params() -> ModelParams:
    # vanishing damping and temperature: pure transport
    return ModelParams(M=1.0, gamma=1e-12, kT=0.0, hbar=1.0)


class TestGrid:
    def test_shape_and_normalization_validation(self):
        with pytest.raises(ValueError):
            PhaseSpaceGrid(-1, 1, 8, -1, 1, 32, np.zeros((8, 32)))  # too few cells
        with pytest.raises(ValueError):
            PhaseSpaceGrid(-1, 1, 32, -1, 1, 32, np.ones((32, 32)))  # mass != 1

    def test_gaussian_grid_moments(self):
        grid = PhaseSpaceGrid.gaussian(0.8, 1.7, 0.0, n_x=128, n_p=128)
        m = grid_moments(grid)
        assert m[(2, 0)] == pytest.approx(0.8, rel=1e-9)
        assert m[(0, 2)] == pytest.approx(1.7, rel=1e-9)
        assert m[(2, 2)] == pytest.approx(0.8 * 1.7, rel=1e-9)
        # odd moments vanish by symmetry
        for key in [(1, 0), (0, 1), (3, 0), (2, 1), (1, 2), (0, 3)]:
            assert abs(m[key]) < 1e-12

    def test_correlated_gaussian(self):
        grid = PhaseSpaceGrid.gaussian(1.0, 1.0, 0.45, n_x=128, n_p=128)
        m = grid_moments(grid)
        assert m[(1, 1)] == pytest.approx(0.45, rel=1e-9)
        assert m[(3, 1)] == pytest.approx(3 * 1.0 * 0.45, rel=1e-8)

    def test_refinement_improves_moments(self):
        # a deliberately coarse grid so quadrature error is visible
        errs = []
        for n in (16, 32):
            grid = PhaseSpaceGrid.gaussian(1.0, 1.0, 0.0, x_half_width=8.0, p_half_width=8.0, n_x=n, n_p=n)
            errs.append(abs(grid_moments(grid)[(4, 0)] - 3.0))
        assert errs[1] < errs[0] / 4.0 or errs[1] < 1e-12

    def test_negative_fraction_diagnostic(self):
        grid = PhaseSpaceGrid.gaussian(1.0, 1.0, 0.0, n_x=64, n_p=64)
        assert grid.negative_fraction() == 0.0


class TestStability:
    def test_time_step_bound_enforced(self):
        params = ModelParams(M=1.0, gamma=0.25, kT=1.0, hbar=1.0)
        sched = KernelSchedule.markov(params)
        grid = PhaseSpaceGrid.gaussian(1.0, 1.0, 0.0, x_half_width=10.0, p_half_width=7.0, n_x=64, n_p=64)
        bound = stable_time_step(grid, sched, 1.0)
        with pytest.raises(StabilityError):
            evolve_wigner_pde(grid, sched, t_end=1.0, dt=4.0 * bound)

    def test_narrow_grid_rejected(self):
        # 6 sigma: normalized within tolerance but boundary density above 1e-10
        sched = KernelSchedule.markov(free_params())
        grid = PhaseSpaceGrid.gaussian(1.0, 1.0, 0.0, x_half_width=6.0, p_half_width=6.0, n_x=64, n_p=64)
        with pytest.raises(StabilityError):
            evolve_wigner_pde(grid, sched, t_end=0.1)

    def test_boundary_overflow_aborts(self):
        # free streaming long enough that the sheared density hits the p edge
        # of a deliberately tight box in x
        sched = KernelSchedule.markov(free_params())
        grid = PhaseSpaceGrid.gaussian(1.0, 1.0, 0.0, x_half_width=7.5, p_half_width=7.5, n_x=64, n_p=64)
        with pytest.raises(StabilityError):
            evolve_wigner_pde(grid, sched, t_end=6.0, sample_times=np.linspace(0, 6.0, 25))


class TestClosedFormTransport:
    def test_free_streaming_matches_sheared_gaussian(self):
        sched = KernelSchedule.markov(free_params())
        grid = PhaseSpaceGrid.gaussian(1.0, 1.0, 0.0, x_half_width=16.0, p_half_width=8.0, n_x=256, n_p=256)
        t = 1.5
        evo = evolve_wigner_pde(grid, sched, t_end=t, sample_times=[0.0, t])
        mend = evo.moments[-1]
        assert mend[(2, 0)] == pytest.approx(1.0 + t * t, abs=5e-6)
        assert mend[(1, 1)] == pytest.approx(t, abs=5e-6)
        assert mend[(0, 2)] == pytest.approx(1.0, abs=5e-6)
        # pointwise comparison against the exact sheared density
        xs, ps = evo.final.x, evo.final.p
        xx, pp = np.meshgrid(xs, ps, indexing="ij")
        det = (1 + t * t) - t * t
        quad = (xx**2 - 2 * t * xx * pp + (1 + t * t) * pp**2) / det
        exact = np.exp(-0.5 * quad) / (2 * np.pi * np.sqrt(det))
        l2 = np.sqrt(np.sum((evo.final.w - exact) ** 2) / np.sum(exact**2))
        assert l2 < 1e-4

    def test_harmonic_moments_oscillate_at_twice_the_frequency(self):
        sched = KernelSchedule.markov(free_params())
        pot = HarmonicPotential(omega0=1.0)
        grid = PhaseSpaceGrid.gaussian(1.5, 0.7, 0.0, x_half_width=12.0, p_half_width=12.0, n_x=192, n_p=192)
        tgrid = np.linspace(0.0, np.pi, 9)
        evo = evolve_wigner_pde(grid, sched, potential=pot, t_end=float(np.pi), sample_times=tgrid)
        m20 = evo.moment(2, 0)
        expected = 1.5 * np.cos(evo.times) ** 2 + 0.7 * np.sin(evo.times) ** 2
        np.testing.assert_allclose(m20, expected, atol=5e-3)
        energy = 0.5 * evo.moment(0, 2) + 0.5 * m20
        assert np.max(np.abs(energy - energy[0])) / energy[0] < 1e-4
        assert evo.mass_drift() < 1e-6


class TestAgainstMomentOde:
    def test_markovian_gaussian_tracks_moment_ode(self):
        params = ModelParams(M=1.0, gamma=0.25, kT=1.0, hbar=1.0)
        sched = KernelSchedule.markov(params)
        grid = PhaseSpaceGrid.gaussian(1.0, 1.0, 0.0, x_half_width=12.0, p_half_width=7.0, n_x=128, n_p=128)
        tgrid = np.linspace(0.0, 1.0, 5)
        evo = evolve_wigner_pde(grid, sched, t_end=1.0, sample_times=tgrid)
        traj = evolve_moments(MomentState.gaussian(1.0, 1.0, 0.0), sched, evo.times)
        scale = np.sqrt(traj.moment(2, 0) * traj.moment(0, 2))
        # measured scheme error at this reduced resolution is ~1e-3 (the
        # acceptance suite checks 1e-3 at the 256x256 default, margin ~4000x)
        for key in [(2, 0), (1, 1), (0, 2)]:
            pde = evo.moment(*key)
            ode = traj.moment(*key)
            rel = np.abs(pde - ode) / np.maximum(np.abs(ode), 1e-3 * scale)
            assert np.max(rel) < 5e-3, key
        assert evo.mass_drift() < 1e-6
        assert evo.eps_neg < 1e-8

    def test_non_markovian_cross_term_changes_the_flow(self, nm_9904):
        # a visible cross-diffusion coefficient must steer m11 away from the
        # Markovian track (regression against silently dropping the term);
        # minute-scale rates need long horizons, so rescale eta and omega up
        from qbmarket import NonMarkovParams

        params = ModelParams(M=1.0, gamma=0.25, kT=1.0, hbar=1.0)
        nm = NonMarkovParams(xi=0.6, eta=2.0, omega=1.0)
        markov = KernelSchedule.markov(params)
        colored = KernelSchedule.non_markov(params, nm)
        grid = PhaseSpaceGrid.gaussian(1.0, 1.0, 0.0, x_half_width=12.0, p_half_width=8.0, n_x=128, n_p=128)
        tgrid = np.linspace(0.0, 0.8, 3)
        evo_m = evolve_wigner_pde(grid, markov, t_end=0.8, sample_times=tgrid)
        evo_c = evolve_wigner_pde(grid, colored, t_end=0.8, sample_times=tgrid)
        traj_c = evolve_moments(MomentState.gaussian(1.0, 1.0, 0.0), colored, tgrid)
        gap = abs(evo_c.moment(1, 1)[-1] - evo_m.moment(1, 1)[-1])
        assert gap > 1e-3
        # and the PDE with the colored kernel still matches its own moment ODE
        assert evo_c.moment(1, 1)[-1] == pytest.approx(traj_c.moment(1, 1)[-1], abs=2e-3)
        assert evo_c.moment(0, 2)[-1] == pytest.approx(traj_c.moment(0, 2)[-1], rel=2e-3)
