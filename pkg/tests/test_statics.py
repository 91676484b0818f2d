"""Closed forms at g=0, eigensolvers, crossing fits, and phase boundaries."""

import numpy as np
import pytest

from stringbreak import (
    ChainSpec,
    Exponential,
    PowerLaw,
    SolverError,
    assemble_operator,
    field_profile,
    statics,
    zeta_fn,
)
from stringbreak.model import diag_vector


def chain_exp(ell, xi=1.0):
    return ChainSpec(ell=ell, kernel=Exponential(xi=xi))


class TestClosedForms:
    def test_energy_gap_frozen_values(self):
        assert statics.g0_energy_gap(chain_exp(5)) == pytest.approx(
            2.6273891493523616, abs=1e-12
        )
        assert statics.g0_energy_gap(chain_exp(9)) == pytest.approx(
            2.6448860054958341, abs=1e-12
        )

    @pytest.mark.parametrize("kernel", [Exponential(xi=1.0), Exponential(xi=0.7),
                                        PowerLaw(alpha=2.4)])
    @pytest.mark.parametrize("ell", [1, 3, 6])
    def test_energy_gap_vs_diagonal(self, kernel, ell):
        # independent route: classical energies through the Hamiltonian diagonal
        chain = ChainSpec(ell=ell, kernel=kernel)
        h = 0.21
        diag = diag_vector(chain, field_profile(chain, h=h))
        e_s = diag[0]  # all bits 0: interior aligned with the charges
        e_bs = diag[chain.dim - 1]  # all bits 1
        assert statics.g0_energy_gap(chain, h) == pytest.approx(
            e_bs - e_s, abs=1e-10
        )

    def test_breaking_field_values(self):
        assert statics.g0_breaking_field(chain_exp(5)) == pytest.approx(
            0.26273891493523616, abs=1e-12
        )
        assert statics.g0_breaking_field(chain_exp(15)) == pytest.approx(
            0.08817372138231698, abs=1e-12
        )

    def test_breaking_field_long_chain_limit(self):
        limit = 1.3226062253230682  # 2(1-2/e)/(1-1/e)^2
        assert 200 * statics.g0_breaking_field(chain_exp(200)) == pytest.approx(
            limit, abs=1e-6
        )

    def test_breaking_field_requires_exponential(self):
        with pytest.raises(ValueError):
            statics.g0_breaking_field(ChainSpec(ell=5, kernel=PowerLaw(alpha=2.2)))

    def test_potentials_frozen_values(self):
        v_s, v_bs = statics.g0_potentials(chain_exp(5), 0.0)
        assert v_s == pytest.approx(10.001472717605909, abs=1e-12)
        assert v_bs == pytest.approx(12.628861866958269, abs=1e-12)

    def test_potentials_slopes(self):
        for ell in (4, 9):
            v_s1, v_bs1 = statics.g0_potentials(chain_exp(ell), 0.1)
            v_s2, v_bs2 = statics.g0_potentials(chain_exp(ell), 0.3)
            assert (v_s2 - v_s1) / 0.2 == pytest.approx(2 * (ell + 2), abs=1e-10)
            assert (v_bs2 - v_bs1) / 0.2 == pytest.approx(4.0, abs=1e-10)

    def test_potentials_cross_at_breaking_field(self):
        chain = chain_exp(7)
        h_c = statics.g0_breaking_field(chain)
        v_s, v_bs = statics.g0_potentials(chain, h_c)
        assert v_s == pytest.approx(v_bs, abs=1e-10)


class TestConfigEnergy:
    def test_extreme_configs_match_potentials(self):
        # the fully flipped interior and the bare charge pair reproduce the
        # two closed-form potentials at any h
        for ell, h in ((5, 0.0), (5, 0.4), (8, 0.17)):
            chain = chain_exp(ell)
            v_s, v_bs = statics.g0_potentials(chain, h)
            string = statics.config_energy(chain, h, list(range(ell + 2)))
            broken = statics.config_energy(chain, h, [0, ell + 1])
            assert string == pytest.approx(v_s, abs=1e-10)
            assert broken == pytest.approx(v_bs, abs=1e-10)

    def test_differences_match_hamiltonian_diagonal(self):
        # energies relative to the infinite vacuum differ from the dynamical
        # diagonal only by static-charge constants, which cancel in differences
        chain = chain_exp(6)
        h = 0.23
        diag = diag_vector(chain, field_profile(chain, h=h))
        rng = np.random.default_rng(8)
        ref_sites = [0, chain.ell + 1]
        ref_energy = statics.config_energy(chain, h, ref_sites)
        for s in rng.integers(0, chain.dim, size=12):
            bits = (int(s) >> np.arange(chain.ell)) & 1
            sites = [0] + [j + 1 for j in range(chain.ell) if bits[j] == 0] + [chain.ell + 1]
            delta = statics.config_energy(chain, h, sites) - ref_energy
            assert delta == pytest.approx(diag[s] - diag[chain.dim - 1], abs=1e-10)

    def test_alternative_convention_frozen_values(self):
        chain = chain_exp(5)
        string = statics.config_energy(chain, 0.3, [0, 1, 2, 3, 4, 5, 6],
                                       convention="appendix")
        broken = statics.config_energy(chain, 0.3, [0, 6], convention="appendix")
        assert string == pytest.approx(6.039668097122147, abs=1e-12)
        assert broken == pytest.approx(3.5229493231239735, abs=1e-12)

    def test_validation(self):
        chain = chain_exp(5)
        with pytest.raises(ValueError):
            statics.config_energy(chain, 0.0, [0, 3])  # misses ell+1
        with pytest.raises(ValueError):
            statics.config_energy(chain, 0.0, [0, 3, 2, 6])  # not ascending
        with pytest.raises(ValueError):
            statics.config_energy(chain, 0.0, [0, 7, 6],
                                  convention="appendix")

    def test_sector_minimum_is_edge_block(self):
        # raises internally if any sector minimizer is not an edge block
        for ell in (6, 12):
            chain = chain_exp(ell)
            for n_down in (1, 2, ell // 2, ell - 1):
                bits = statics.enumerate_sector_minimum(chain, 0.2, n_down)
                assert int(np.sum(bits == 0)) == n_down

    def test_bubble_crossing_consistency(self):
        for ell in (5, 9):
            chain = chain_exp(ell)
            fields = statics.bubble_crossing_fields(chain)
            assert fields[ell] == pytest.approx(
                statics.g0_breaking_field(chain), abs=1e-9
            )
            # larger bubbles become favourable at smaller fields
            values = [fields[r] for r in range(1, ell + 1)]
            assert values == sorted(values, reverse=True)


class TestEigensolvers:
    def test_dense_vs_lanczos(self):
        chain = chain_exp(11)
        ham = assemble_operator(chain, field_profile(chain, h=0.11, g=1.2))
        dense = statics.lowest_spectrum(ham, 4, method="dense")
        lanczos = statics.lowest_spectrum(ham, 4, method="lanczos")
        np.testing.assert_allclose(dense.energies, lanczos.energies, atol=1e-9)

    def test_lanczos_deterministic(self):
        chain = chain_exp(11)
        ham = assemble_operator(chain, field_profile(chain, h=0.11, g=1.2))
        a = statics.lowest_spectrum(ham, 3, want_vectors=True, method="lanczos")
        b = statics.lowest_spectrum(ham, 3, want_vectors=True, method="lanczos")
        np.testing.assert_array_equal(a.energies, b.energies)
        np.testing.assert_array_equal(a.eigenvectors, b.eigenvectors)

    def test_diagonal_limit(self):
        chain = chain_exp(6)
        ham = assemble_operator(chain, field_profile(chain, h=0.15, g=0.0))
        sl = statics.lowest_spectrum(ham, 3, want_vectors=True)
        dense = statics.lowest_spectrum(ham, 3, method="dense")
        np.testing.assert_allclose(sl.energies, dense.energies, atol=1e-12)
        # eigenvectors are basis states
        assert np.all(np.max(np.abs(sl.eigenvectors), axis=0) == 1.0)

    def test_magnetizations_bounded(self):
        chain = chain_exp(5)
        ham = assemble_operator(chain, field_profile(chain, h=0.2, g=0.8))
        sl = statics.lowest_spectrum(ham, 6, want_vectors=True)
        assert np.all(np.abs(sl.magnetizations) <= 1.0 + 1e-12)

    def test_k_validation(self):
        chain = chain_exp(4)
        ham = assemble_operator(chain, field_profile(chain, g=0.5))
        with pytest.raises(ValueError):
            statics.lowest_spectrum(ham, 0)


class TestCrossing:
    def test_reference_fit(self, crossing_l5):
        assert crossing_l5.control_c == pytest.approx(0.2521, abs=2e-3)
        assert crossing_l5.gap_c == pytest.approx(0.444, abs=5e-3)
        assert crossing_l5.residual < 1e-3 * crossing_l5.gap_c

    def test_gap_function_matches_fresh_assembly(self):
        chain = chain_exp(6)
        two = statics.gap_function(chain, 1.2, "scan_h")
        for h in (0.1, 0.27):
            ham = assemble_operator(chain, field_profile(chain, h=h, g=1.2))
            sl = statics.lowest_spectrum(ham, 2)
            e0, e1 = two(h)
            assert e0 == pytest.approx(sl.energies[0], abs=1e-9)
            assert e1 == pytest.approx(sl.energies[1], abs=1e-9)

    def test_no_interior_minimum(self):
        chain = chain_exp(5)
        with pytest.raises(SolverError):
            statics.locate_avoided_crossing(chain, 1.2, (0.5, 0.8),
                                            coarse_points=21)


class TestLongRange:
    def test_alpha_window_roots(self):
        pb = statics.lr_phase_boundaries([])
        assert zeta_fn(pb.alpha_min) == pytest.approx(2.0, abs=1e-7)
        assert 2 * zeta_fn(pb.alpha_max) == pytest.approx(
            zeta_fn(pb.alpha_max - 1.0), abs=1e-6
        )
        assert pb.alpha_min == pytest.approx(1.7286472387611864, abs=1e-6)
        assert pb.alpha_max == pytest.approx(2.478750785733960, abs=1e-6)

    def test_critical_length_table(self):
        pb = statics.lr_phase_boundaries([1.8, 2.0, 2.2, 2.6])
        assert pb.lc_table[1.8] == 1
        assert pb.lc_table[2.0] == 3
        assert pb.lc_table[2.2] == 8
        assert pb.lc_table[2.6] == np.inf

    def test_critical_length_monotone(self):
        grid = [1.75, 1.9, 2.05, 2.2, 2.35]
        pb = statics.lr_phase_boundaries(grid)
        values = [pb.lc_table[a] for a in grid]
        assert values == sorted(values)


class TestPerturbation:
    def test_matches_exact_at_small_g(self):
        chain = chain_exp(5)
        g = 0.05
        e_s, e_bs = statics.perturbative_energies(chain, g)
        ham = assemble_operator(chain, field_profile(chain, h=0.0, g=g))
        exact = statics.lowest_spectrum(ham, 1, method="dense").energies[0]
        e_s0 = statics.perturbative_energies(chain, 0.0)[0]
        assert abs(e_s - exact) < 1e-6
        assert abs(e_s - exact) < abs(e_s0 - exact)  # second order helps


class TestPotentialCurve:
    def test_g0_matches_diagonal_oracle(self):
        kernel = PowerLaw(alpha=2.2)
        curve = statics.static_potential_curve(kernel, 0.0, 0.0, [2, 4, 6])
        for ell, vg in zip(curve.ells, curve.v_ground):
            chain = ChainSpec(ell=ell, kernel=kernel)
            diag = diag_vector(chain, field_profile(chain))
            diag_vac = diag_vector(chain, field_profile(chain, vacuum=True))
            assert vg == pytest.approx(diag.min() - diag_vac.min(), abs=1e-10)

    def test_g0_slope_below_breaking(self):
        # string ground state: dV/dh = 2(ell+2)
        kernel = Exponential(xi=1.0)
        ell = 5
        v1 = statics.static_potential_curve(kernel, 0.0, 0.10, [ell]).v_ground[0]
        v2 = statics.static_potential_curve(kernel, 0.0, 0.15, [ell]).v_ground[0]
        assert (v2 - v1) / 0.05 == pytest.approx(2 * (ell + 2), abs=1e-9)

    def test_critical_length_marker(self):
        curve = statics.static_potential_curve(PowerLaw(alpha=2.2), 0.0, 0.0,
                                               list(range(2, 11)))
        assert curve.ell_c == 8  # matches the g=0 phase-boundary table
