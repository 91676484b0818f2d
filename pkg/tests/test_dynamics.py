"""Ramp propagation, its observables, and the two-level comparison."""

import numpy as np
import pytest
import scipy.linalg

from stringbreak import ChainSpec, Exponential, assemble_operator, field_profile
from stringbreak import dynamics, observables, statics
from stringbreak.dynamics import (
    PropagatorConfig,
    RampFamily,
    RampResult,
    RampSchedule,
    krylov_expm_apply,
    propagate_ramp,
)


def ramp_l5(g=1.2, tau=5.0, x_f=0.5, samples=21, **kw):
    chain = ChainSpec(ell=5, kernel=Exponential(xi=1.0))
    family = RampFamily(chain, "h", g)
    schedule = RampSchedule(mode="h", fixed=g, x_f=x_f, tau=tau,
                            sample_count=samples)
    return propagate_ramp(family, schedule, PropagatorConfig(), **kw)


class TestSchedule:
    def test_validation(self):
        with pytest.raises(ValueError):
            RampSchedule(mode="z", fixed=1.0, x_f=0.5, tau=10.0)
        with pytest.raises(ValueError):
            RampSchedule(mode="h", fixed=1.0, x_f=0.5, tau=-1.0)
        with pytest.raises(ValueError):
            RampSchedule(mode="h", fixed=1.0, x_f=0.5, tau=10.0, sample_count=1)

    def test_endpoints(self):
        s = RampSchedule(mode="g", fixed=0.0, x_f=1.5, tau=40.0)
        assert s.t_final == pytest.approx(60.0)


class TestKrylovExponential:
    def test_matches_dense_exponential(self):
        chain = ChainSpec(ell=4, kernel=Exponential(xi=1.0))
        ham = assemble_operator(chain, field_profile(chain, h=0.2, g=0.9))
        rng = np.random.default_rng(2)
        psi = rng.standard_normal(chain.dim) + 1j * rng.standard_normal(chain.dim)
        psi /= np.linalg.norm(psi)
        got = krylov_expm_apply(ham.diag, ham.g, psi, 0.05, 20)
        want = scipy.linalg.expm(-0.05j * ham.dense()) @ psi
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_norm_preserving(self):
        chain = ChainSpec(ell=5, kernel=Exponential(xi=1.0))
        ham = assemble_operator(chain, field_profile(chain, h=0.1, g=1.2))
        rng = np.random.default_rng(4)
        psi = rng.standard_normal(chain.dim) + 1j * rng.standard_normal(chain.dim)
        psi /= np.linalg.norm(psi)
        for _ in range(50):
            psi = krylov_expm_apply(ham.diag, ham.g, psi, 0.02, 20)
        assert abs(np.linalg.norm(psi) - 1.0) < 1e-12

    def test_eigenstate_stationary(self):
        chain = ChainSpec(ell=4, kernel=Exponential(xi=1.0))
        ham = assemble_operator(chain, field_profile(chain, h=0.15, g=0.7))
        sl = statics.lowest_spectrum(ham, 1, want_vectors=True, method="dense")
        psi = sl.eigenvectors[:, 0].astype(np.complex128)
        m0, prof0 = observables.magnetization(psi)
        for _ in range(30):
            psi = krylov_expm_apply(ham.diag, ham.g, psi, 0.05, 20)
        m1, prof1 = observables.magnetization(psi)
        assert abs(m1 - m0) < 1e-8
        np.testing.assert_allclose(prof1, prof0, atol=1e-8)


class TestObservables:
    def test_magnetization_basis_states(self):
        down = observables.basis_state([0, 0, 0, 0, 0])
        m, prof = observables.magnetization(down)
        assert m == -1.0
        np.testing.assert_array_equal(prof, -np.ones(5))
        cat = (observables.basis_state([0] * 5) + observables.basis_state([1] * 5))
        cat /= np.linalg.norm(cat)
        assert observables.magnetization(cat)[0] == pytest.approx(0.0, abs=1e-14)

    def test_correlator_product_and_cat(self):
        prod = observables.basis_state([1, 0, 1, 1, 0])
        assert observables.connected_correlator(prod) == pytest.approx(0.0, abs=1e-14)
        cat = (observables.basis_state([0] * 5) + observables.basis_state([1] * 5))
        cat /= np.linalg.norm(cat)
        assert observables.connected_correlator(cat) == pytest.approx(10.0, abs=1e-12)

    def test_bubble_histogram_basis_states(self):
        hist = observables.bubble_histogram(observables.basis_state([0] * 5))
        assert hist[0] == 1.0 and hist.sum() == 1.0
        hist = observables.bubble_histogram(observables.basis_state([1] * 5))
        assert hist[5] == 1.0
        hist = observables.bubble_histogram(observables.basis_state([0, 1, 1, 0, 1]))
        assert hist[2] == 1.0  # longest run of +z spins has length 2

    def test_population_completeness(self):
        chain = ChainSpec(ell=5, kernel=Exponential(xi=1.0))
        ham = assemble_operator(chain, field_profile(chain, h=0.2, g=1.2))
        sl = statics.lowest_spectrum(ham, chain.dim, want_vectors=True)
        rng = np.random.default_rng(9)
        psi = rng.standard_normal(chain.dim) + 1j * rng.standard_normal(chain.dim)
        psi /= np.linalg.norm(psi)
        pops = observables.instantaneous_populations(psi, sl)
        assert pops.sum() == pytest.approx(1.0, abs=1e-10)


class TestPropagation:
    def test_initial_sample_is_ground_state(self):
        res = ramp_l5(tau=5.0, samples=5, k_levels=2)
        assert res.populations[0, 0] == pytest.approx(1.0, abs=1e-10)

    def test_norm_conserved(self):
        res = ramp_l5(tau=10.0, samples=11)
        assert res.norm_error.max() < 1e-10

    def test_profile_reflection_symmetric(self):
        res = ramp_l5(tau=10.0, samples=11)
        np.testing.assert_allclose(res.profile, res.profile[:, ::-1], atol=1e-8)

    def test_bubble_distribution_normalized(self):
        res = ramp_l5(tau=10.0, samples=11)
        np.testing.assert_allclose(res.bubbles.sum(axis=1), 1.0, atol=1e-10)

    def test_adiabatic_limit(self):
        res = ramp_l5(tau=400.0, samples=11, k_levels=2)
        assert res.populations[:, 0].min() > 0.95

    def test_diabatic_limit(self):
        res = ramp_l5(tau=1.0, samples=11, k_levels=2)
        assert res.populations[-1, 1] > 0.85

    def test_step_halving_convergence(self):
        kw = dict(tau=5.0, x_f=0.5, samples=11, k_levels=3)
        chain = ChainSpec(ell=5, kernel=Exponential(xi=1.0))
        family = RampFamily(chain, "h", 1.2)
        schedule = RampSchedule(mode="h", fixed=1.2, x_f=0.5, tau=5.0,
                                sample_count=11)
        coarse = propagate_ramp(family, schedule, PropagatorConfig(step_dt=0.01),
                                k_levels=3)
        fine = propagate_ramp(family, schedule, PropagatorConfig(step_dt=0.005),
                              k_levels=3)
        assert np.max(np.abs(coarse.m_z - fine.m_z)) < 1e-6
        assert np.max(np.abs(coarse.correlator - fine.correlator)) < 1e-6
        assert np.max(np.abs(coarse.populations - fine.populations)) < 1e-6

    def test_matches_dense_time_ordered_integration(self):
        chain = ChainSpec(ell=5, kernel=Exponential(xi=1.0))
        g = 1.2
        family = RampFamily(chain, "h", g)
        schedule = RampSchedule(mode="h", fixed=g, x_f=0.5, tau=3.0,
                                sample_count=6)
        res = propagate_ramp(family, schedule, PropagatorConfig(step_dt=0.01),
                             k_levels=0)
        # independent reference: fine-step midpoint rule on the explicit matrix
        sl0 = statics.lowest_spectrum(family.spec(0.0), 1, want_vectors=True)
        psi = sl0.eigenvectors[:, 0].astype(np.complex128)
        dt = 5e-4
        n_sub = int(round(schedule.t_final / dt))
        for q in range(n_sub):
            t_mid = (q + 0.5) * dt
            ham = family.spec(t_mid / schedule.tau)
            psi = scipy.linalg.expm(-1j * dt * ham.dense()) @ psi
        overlap = abs(np.vdot(psi, res.final_state))
        assert overlap > 1.0 - 1e-7

    def test_potential_recorded(self):
        res = ramp_l5(tau=5.0, samples=5, k_levels=0, want_potential=True)
        assert res.potential is not None and np.all(np.isfinite(res.potential))

    def test_g_ramp_mode(self):
        chain = ChainSpec(ell=4, kernel=Exponential(xi=1.0))
        family = RampFamily(chain, "g", 0.1)
        schedule = RampSchedule(mode="g", fixed=0.1, x_f=0.8, tau=5.0,
                                sample_count=5)
        res = propagate_ramp(family, schedule, k_levels=2)
        assert res.norm_error.max() < 1e-10


class TestTwoLevelModel:
    def test_probability_endpoints(self):
        assert dynamics.landau_zener_probability(0.4, 3.9, 0.0) == 1.0
        tau_star = dynamics.lz_timescale(0.4, 3.9)
        assert dynamics.landau_zener_probability(0.4, 3.9, tau_star) == (
            pytest.approx(np.exp(-1.0), abs=1e-12)
        )

    def test_slope_validation(self):
        with pytest.raises(ValueError):
            dynamics.landau_zener_probability(0.4, 0.0, 1.0)

    def test_explicit_two_level_integration(self):
        # single spin: diag = v t sigma^z, off-diagonal Delta/2
        v, delta, t_max, dt = 0.2, 0.3, 40.0, 0.01
        psi = np.array([0.0, 1.0], dtype=np.complex128)  # lower level at -t_max
        n_steps = int(2 * t_max / dt)
        for q in range(n_steps):
            t_mid = -t_max + (q + 0.5) * dt
            diag = np.array([-v * t_mid, v * t_mid])
            psi = krylov_expm_apply(diag, -delta / 2.0, psi, dt, 2)
        p_diabatic = abs(psi[1]) ** 2
        want = np.exp(-np.pi * delta**2 / (4.0 * v))
        assert p_diabatic == pytest.approx(want, abs=0.02 * want + 5e-3)

    def test_population_estimate(self):
        assert dynamics.magnetization_population_estimate(-0.8, -0.8) == 1.0
        assert dynamics.magnetization_population_estimate(-0.8, 0.8) == 0.0
        with pytest.raises(ValueError):
            dynamics.magnetization_population_estimate(0.0, 0.5)

    def test_estimate_tracks_population_at_small_g(self):
        chain = ChainSpec(ell=5, kernel=Exponential(xi=1.0))
        g = 0.4
        family = RampFamily(chain, "h", g)
        schedule = RampSchedule(mode="h", fixed=g, x_f=0.5, tau=20.0,
                                sample_count=21)
        res = propagate_ramp(family, schedule, k_levels=2)
        p_m = dynamics.magnetization_population_estimate(res.m_z[0], res.m_z[-1])
        assert abs(p_m - res.populations[-1, 1]) <= 0.1


class TestAnalysis:
    def _synthetic_result(self, control, m_z):
        schedule = RampSchedule(mode="h", fixed=1.0, x_f=float(control[-1]),
                                tau=1.0, sample_count=len(control))
        res = RampResult(schedule=schedule, config=PropagatorConfig(),
                         chain=ChainSpec(ell=5, kernel=Exponential(xi=1.0)))
        res.control = np.asarray(control, dtype=float)
        res.m_z = np.asarray(m_z, dtype=float)
        return res

    def test_sign_change_interpolation(self):
        control = np.linspace(0.0, 6.0, 13)
        res = self._synthetic_result(control, control - 3.0)
        first, crossings = dynamics.locate_sign_change(res)
        assert first == pytest.approx(3.0, abs=1e-12)
        assert crossings == [first]

    def test_sign_change_absent(self):
        control = np.linspace(0.0, 1.0, 5)
        first, crossings = dynamics.locate_sign_change(
            self._synthetic_result(control, -np.ones(5))
        )
        assert first is None and crossings == []

    def test_scaling_fit_exact_power_law(self):
        taus = np.array([10.0, 20.0, 40.0, 80.0, 160.0])
        pairs = [(t, 0.1 + 2.0 * t**-0.5) for t in taus]
        pref, expo = dynamics.scaling_fit(pairs, 0.1)
        assert pref == pytest.approx(2.0, abs=1e-10)
        assert expo == pytest.approx(-0.5, abs=1e-10)

    def test_scaling_fit_excludes_bad_points(self):
        taus = [10.0, 20.0, 40.0, 80.0, 160.0, 320.0]
        pairs = [(t, 0.1 + 2.0 * t**-0.5) for t in taus]
        pairs.append((640.0, 0.05))  # below h_c
        with pytest.warns(UserWarning):
            pref, expo = dynamics.scaling_fit(pairs, 0.1)
        assert expo == pytest.approx(-0.5, abs=1e-10)

    def test_scaling_fit_needs_points(self):
        with pytest.raises(ValueError):
            dynamics.scaling_fit([(10.0, 0.5), (20.0, 0.4)], 0.1)

    def test_collapse_shapes(self):
        res = ramp_l5(tau=5.0, samples=11)
        curves = dynamics.collapse_curves([res], 0.25, -0.31)
        tau, x, m = curves[0]
        assert tau == 5.0 and x.shape == m.shape == (11,)


class TestExtendedChain:
    def test_classical_limit_identical(self):
        comp = dynamics.run_extended_chain(2.0, 0.0, sample_count=5)
        assert comp.max_inner_difference < 1e-12

    def test_geometry(self):
        comp = dynamics.run_extended_chain(2.0, 1.2, sample_count=5)
        assert comp.static_result.profile.shape[1] == 5
        assert comp.dynamical_result.profile.shape[1] == 11
        assert comp.inner_slice == slice(3, 8)
