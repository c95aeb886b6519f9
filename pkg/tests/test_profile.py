"""Profile solver tests: fixed point, derived quantities, coefficients."""

import numpy as np
import pytest

from wavestab.spectral import (
    Grid,
    MultiplierSymbol,
    apply_symbol_values,
    sobolev_norm_coeffs,
    values_to_coeffs,
)
from wavestab.profile import (
    coefficients,
    derived_quantities,
    kdv_profile,
    solve_profile,
    steady_residual,
    strain_consistency,
    zeta_values,
)
from wavestab import symbols as sym


GRID = Grid(512, 40.0)


def weighted_h2_distance(theta, reference, grid, alpha_hat=0.5):
    diff = (theta - reference) * np.exp(alpha_hat * grid.nodes)
    return sobolev_norm_coeffs(values_to_coeffs(diff, grid), grid, 2)


def reflect(v):
    n = v.shape[0]
    return v[(n - np.arange(n)) % n]


class TestKdvProfile:
    def test_peak_value(self):
        w = kdv_profile(GRID)
        assert w[GRID.n // 2] == pytest.approx(1.0, abs=1e-15)
        assert np.argmax(w) == GRID.n // 2

    def test_limit_equation(self):
        # w - w''/3 = (3/2) w^2 for w = sech^2(sqrt(3) x / 2)
        w = kdv_profile(GRID)
        wpp = apply_symbol_values(
            w, MultiplierSymbol(lambda xi: (1j * xi) ** 2, "dd"), GRID
        ).real
        assert np.max(np.abs(w - wpp / 3.0 - 1.5 * w**2)) < 1e-10

    def test_mass_integral(self):
        # closed form: integral of sech^4(sqrt(3)x/2) over the line is 8/(3 sqrt 3)
        w = kdv_profile(GRID)
        mass = GRID.length / GRID.n * np.sum(w**2)
        assert mass == pytest.approx(8.0 / (3.0 * np.sqrt(3.0)), abs=1e-12)

    def test_period_too_small(self):
        with pytest.raises(ValueError, match="period"):
            kdv_profile(Grid(64, 10.0))


class TestSolveProfile:
    def test_converges_below_tolerance(self, profile_01):
        assert profile_01.fp_residual < 1e-12
        assert profile_01.newton_steps >= 1
        hist = profile_01.residual_history
        assert hist[-1] < hist[0]

    def test_close_to_kdv_limit(self, profile_01):
        w = kdv_profile(GRID)
        d = weighted_h2_distance(profile_01.theta, w, GRID)
        assert d < 0.1**0.9

    def test_error_ratio_across_eps(self, profile_01, profile_02):
        w = kdv_profile(GRID)
        d1 = weighted_h2_distance(profile_01.theta, w, GRID)
        d2 = weighted_h2_distance(profile_02.theta, w, GRID)
        assert d2 / d1 >= 3.0

    def test_steady_equation_residual(self, profile_01):
        assert steady_residual(profile_01) < 1e-9

    def test_strain_identity(self, profile_01):
        # omega = D coth D eta_bar recovered from the stored eta_bar
        assert strain_consistency(profile_01) < 1e-10

    def test_zeta_roundtrip(self, profile_01):
        back = zeta_values(profile_01, profile_01.zeta_inv_nodes)
        assert np.max(np.abs(back - profile_01.grid.nodes)) < 1e-11

    def test_parities(self, profile_01):
        p = profile_01
        # node 0 sits at -L/2 and is its own reflection image; the linear
        # part of zeta_dev is a sawtooth there, so skip it
        assert np.max(np.abs((p.theta - reflect(p.theta))[1:])) < 1e-7
        assert np.max(np.abs((p.eta_bar - reflect(p.eta_bar))[1:])) < 1e-8
        assert np.max(np.abs((p.u1 - reflect(p.u1))[1:])) < 1e-8
        assert np.max(np.abs((p.zeta_dev + reflect(p.zeta_dev))[1:])) < 1e-8
        assert np.max(np.abs((p.v_surf + reflect(p.v_surf))[1:])) < 1e-8
        # V at the center of the even wave vanishes
        assert abs(p.v_surf[GRID.n // 2]) < 1e-10

    def test_u1_matches_omega_quartically(self, profile_01, profile_02):
        s2 = np.max(np.abs(profile_02.u1 - profile_02.omega))
        s1 = np.max(np.abs(profile_01.u1 - profile_01.omega))
        assert s2 / s1 >= 8.0

    def test_smooth_eps_dependence(self):
        # centered difference of theta in eps is resolution-stable to 4 digits
        h = 5e-3
        fd = {}
        for n in (256, 512):
            g = Grid(n, 40.0)
            tp = solve_profile(0.1 + h, 0.5, g, tol=1e-11).theta
            tm = solve_profile(0.1 - h, 0.5, g, tol=1e-11).theta
            fd[n] = (tp - tm) / (2 * h)
        coarse, fine = fd[256], fd[512][::2]
        scale = np.max(np.abs(fine))
        mask = np.abs(fine) > 1e-3 * scale
        rel = np.max(np.abs((coarse - fine)[mask])) / scale
        assert rel < 1e-4

    def test_eps_out_of_range(self):
        with pytest.raises(ValueError, match="eps"):
            solve_profile(0.0, 0.5, GRID)
        with pytest.raises(ValueError, match="eps"):
            solve_profile(0.35, 0.5, GRID)

    def test_tolerance_floor(self):
        with pytest.raises(ValueError, match="tolerance"):
            solve_profile(0.1, 0.5, GRID, tol=1e-14)

    def test_nonconvergence_reports_history(self):
        with pytest.raises(RuntimeError, match="residual history"):
            solve_profile(0.1, 0.5, Grid(256, 40.0), tol=1e-11, max_iter=1)


class TestDerivedQuantities:
    def test_flat_water(self):
        prof = derived_quantities(np.zeros(GRID.n), 0.1, GRID)
        assert np.max(np.abs(prof.omega)) == 0.0
        assert np.max(np.abs(prof.zeta_dev)) < 1e-14
        cs = coefficients(prof)
        for v in (cs.p, cs.q, cs.rho):
            assert np.max(np.abs(v - 1.0)) < 1e-13

    def test_breakdown_guard(self):
        bad = -2.0 / 0.3**2 * np.ones(GRID.n)
        with pytest.raises(ValueError, match="1 \\+ omega"):
            derived_quantities(bad, 0.3, GRID)


class TestCoefficients:
    def test_positivity_and_pointwise_bounds(self, profile_01):
        cs = coefficients(profile_01)
        assert np.min(cs.p) > 0 and np.min(cs.q) > 0 and np.min(cs.rho) > 0
        eps = profile_01.eps
        k = cs.bound_constant
        assert np.max(np.abs(cs.u_p)) <= k * eps**2 + 1e-12
        assert np.max(np.abs(cs.u_q)) <= k * eps**2 + 1e-12

    def test_bound_constant_stable_in_eps(self, profile_01, profile_02, profile_005):
        ks = [coefficients(p).bound_constant for p in (profile_02, profile_01, profile_005)]
        assert max(ks) - min(ks) < 0.5

    def test_scaled_coefficient_limits(self, profile_01, profile_02, profile_005):
        # u_p ~ -2 omega and u_q ~ -omega/2, so the scaled residues shrink
        w = kdv_profile(GRID)
        def h1(prof):
            cs = coefficients(prof)
            g = prof.grid_scaled
            tp = sobolev_norm_coeffs(values_to_coeffs(cs.u_p_scaled + 2 * w, g), g, 1)
            tq = sobolev_norm_coeffs(values_to_coeffs(cs.u_q_scaled + 0.5 * w, g), g, 1)
            return tp, tq
        tp2, tq2 = h1(profile_02)
        tp1, tq1 = h1(profile_01)
        tp0, tq0 = h1(profile_005)
        assert tp2 > tp1 > tp0
        assert tq2 > tq1 > tq0

    def test_amplitude_ratio_at_peak(self, profile_005):
        cs = coefficients(profile_005)
        i0 = np.argmin(np.abs(profile_005.grid.nodes))
        assert cs.u_q[i0] / cs.u_p[i0] == pytest.approx(0.25, abs=0.03)

    def test_tanh_smoothing_inequality(self, profile_01, profile_02, profile_005):
        # || i tanh(eps D) theta ||_H1 <= eps || theta ||_H2 on solved profiles
        for prof in (profile_02, profile_01, profile_005):
            eps = prof.eps
            tsym = MultiplierSymbol(
                lambda xi, e=eps: 1j * np.tanh(e * xi), "tanh_eps", parity="odd"
            )
            tv = apply_symbol_values(prof.theta, tsym, GRID).real
            lhs = sobolev_norm_coeffs(values_to_coeffs(tv, GRID), GRID, 1)
            rhs = eps * sobolev_norm_coeffs(values_to_coeffs(prof.theta, GRID), GRID, 2)
            assert lhs <= rhs
