"""Tests for the weighted pseudospectral core."""

import numpy as np
import pytest

from wavestab import spectral as sp


def grid(n=64, length=2 * np.pi):
    return sp.Grid(n, length)


def test_grid_validation():
    with pytest.raises(ValueError):
        sp.Grid(12, 2 * np.pi)
    with pytest.raises(ValueError):
        sp.Grid(64, -1.0)


def test_mode_layout_carries_positive_nyquist():
    g = grid(16)
    assert g.modes[g.nyquist_slot] == 8
    assert set(g.modes.tolist()) == set(range(-7, 9))


def test_transform_roundtrip():
    g = grid(128, 37.0)
    rng = np.random.default_rng(0)
    v = rng.standard_normal(g.n) + 1j * rng.standard_normal(g.n)
    w = sp.coeffs_to_values(sp.values_to_coeffs(v, g), g)
    assert np.max(np.abs(w - v)) < 1e-13 * np.max(np.abs(v))


def test_single_mode_synthesis():
    g = grid(32)
    c = np.zeros(g.n, dtype=complex)
    c[3] = 1.0  # slot 3 is mode +3
    v = sp.coeffs_to_values(c, g)
    assert np.max(np.abs(v - np.exp(3j * g.nodes))) < 1e-13


def test_derivative_of_sine():
    g = grid(64)
    v = np.sin(g.nodes)
    dv = sp.apply_symbol_values(v, lambda xi: 1j * xi, g)
    assert np.max(np.abs(dv - np.cos(g.nodes))) < 1e-13


def test_multiplier_scalar_oracle_coth():
    # sigma(xi) = xi coth(xi) acting on e^{ix} multiplies by coth(1)
    def xi_coth(xi):
        out = np.ones_like(xi)
        nz = xi != 0
        out[nz] = xi[nz] / np.tanh(xi[nz])
        return out

    g = grid(64)
    v = np.exp(1j * g.nodes)
    out = sp.apply_symbol_values(v, xi_coth, g)
    expected = (np.cosh(1.0) / np.sinh(1.0)) * v
    assert np.max(np.abs(out - expected)) < 1e-13


def test_constant_norm_convention():
    g = grid(64)
    f = sp.SpectralField.from_values(g, np.ones(g.n))
    assert abs(f.norm() - np.sqrt(2 * np.pi)) < 1e-13


def test_localized_profile_norm():
    # integral of sech^4(sqrt(3) x / 2) over R is 8 / (3 sqrt(3))
    g = sp.Grid(512, 40.0)
    f = sp.SpectralField.from_function(g, lambda x: 1.0 / np.cosh(np.sqrt(3) * x / 2) ** 2)
    assert abs(f.norm() ** 2 - 8.0 / (3.0 * np.sqrt(3.0))) < 1e-12


def test_parseval():
    g = grid(128, 11.0)
    rng = np.random.default_rng(1)
    v = sp.random_smooth_values(g, rng)
    c = sp.values_to_coeffs(v, g)
    assert abs(sp.node_norm(v, g) ** 2 - g.length * np.sum(np.abs(c) ** 2)) < 1e-12


def test_shifted_derivative_eigenvalues():
    # multiplier matrix of i xi at weight a is similar to diag(i k - a)
    g = sp.Grid(16, 2 * np.pi)
    a = 0.3
    mat = sp.multiplier_matrix(g, lambda xi: 1j * xi, a)
    got = np.linalg.eigvals(mat)
    expected = 1j * g.wavenumbers - a
    # real parts are all -a, so order by the imaginary part
    got = got[np.argsort(got.imag)]
    expected = expected[np.argsort(expected.imag)]
    assert np.max(np.abs(got - expected)) < 1e-10


def test_derivative_matrix_norm_and_skewness():
    g = sp.Grid(16, 2 * np.pi)
    mat = sp.multiplier_matrix(g, lambda xi: 1j * xi)
    # raw (untagged) evaluation keeps the +8 Nyquist mode
    assert abs(sp.operator_norm(mat) - 8.0) < 1e-12
    tagged = sp.MultiplierSymbol(lambda xi: 1j * xi, "d/dx", parity="odd")
    mat_odd = sp.multiplier_matrix(g, tagged)
    # odd tag takes the two-sided mean at the unpaired mode, zero at a = 0
    assert abs(sp.operator_norm(mat_odd) - 7.0) < 1e-12
    assert np.max(np.abs(mat_odd + mat_odd.conj().T)) < 1e-12


def test_odd_tag_nyquist_mean_with_weight():
    # for i xi the two-sided mean at k_N is -a: only the even-in-k part survives
    g = sp.Grid(16, 2 * np.pi)
    tagged = sp.MultiplierSymbol(lambda xi: 1j * xi, "d/dx", parity="odd")
    vals = sp.evaluate_symbol(tagged, g, a=0.25)
    assert abs(vals[g.nyquist_slot] - (-0.25)) < 1e-15


def test_symbol_error_reports_name():
    g = grid(16)
    bad = sp.MultiplierSymbol(lambda xi: 1.0 / (xi - xi[0]), "inverse-offset", parity=None)
    with pytest.raises(ValueError, match="inverse-offset"):
        sp.evaluate_symbol(bad, g)


def test_dealiased_product_of_cosines():
    g = grid(64)
    f = sp.SpectralField.from_values(g, np.cos(g.nodes))
    prod = f.multiply(f)
    expected = 0.5 + 0.5 * np.cos(2 * g.nodes)
    assert np.max(np.abs(prod.values() - expected)) < 1e-13


def test_dealiasing_kills_band_edge_junk():
    g = grid(32)
    # modes 15 and 14 would alias onto -3 on the coarse grid product
    f = sp.SpectralField.from_values(g, np.exp(15j * g.nodes))
    h = sp.SpectralField.from_values(g, np.exp(14j * g.nodes))
    prod = f.multiply(h)
    assert np.max(np.abs(prod.coeffs)) < 1e-14


def test_fine_product_is_exact_compression():
    g = grid(32)
    c1 = np.zeros(g.n, dtype=complex)
    c2 = np.zeros(g.n, dtype=complex)
    c1[10] = 1.0
    c2[5] = 1.0
    out = sp.fine_product_coeffs(c1, c2, g)
    expected = np.zeros(g.n, dtype=complex)
    expected[15] = 1.0  # modes 10 + 5 = 15 stays inside the band
    assert np.max(np.abs(out - expected)) < 1e-14
    c2b = np.zeros(g.n, dtype=complex)
    c2b[9] = 1.0  # 10 + 9 = 19 leaves the band: compressed away, not aliased
    out2 = sp.fine_product_coeffs(c1, c2b, g)
    assert np.max(np.abs(out2)) < 1e-14


def test_pointwise_matrix_matches_fine_product():
    g = grid(32, 11.0)
    rng = np.random.default_rng(2)
    gv = sp.random_smooth_values(g, rng, mmax=g.n // 2 - 1)
    fv = sp.random_smooth_values(g, rng, mmax=g.n // 2 - 1)
    mat = sp.pointwise_matrix(g, gv)
    direct = sp.coeffs_to_values(
        sp.fine_product_coeffs(sp.values_to_coeffs(gv, g), sp.values_to_coeffs(fv, g), g), g
    )
    assert np.max(np.abs(mat @ fv - direct)) < 1e-11


def test_pipeline_matches_materialized_matrices():
    g = grid(64, 19.0)
    rng = np.random.default_rng(3)
    gv = sp.random_smooth_values(g, rng)
    fv = sp.random_smooth_values(g, rng)
    a = 0.2
    sig1 = lambda xi: 1j * xi / (1.0 + xi**2 / 9.0)
    sig2 = lambda xi: np.cosh(1.0 / (1.0 + xi**2))
    mat = sp.multiplier_matrix(g, sig1, a) @ sp.pointwise_matrix(g, gv) @ sp.multiplier_matrix(g, sig2, a)
    step = sp.apply_symbol_values(fv, sig2, g, a)
    step = sp.coeffs_to_values(
        sp.fine_product_coeffs(sp.values_to_coeffs(gv, g), sp.values_to_coeffs(step, g), g), g
    )
    step = sp.apply_symbol_values(step, sig1, g, a)
    assert np.max(np.abs(mat @ fv - step)) < 1e-10


def test_weight_bookkeeping_in_products():
    g = sp.Grid(128, 40.0)
    f = sp.SpectralField.from_function(g, lambda x: 1.0 / np.cosh(x) ** 2, weight=0.2)
    h = sp.SpectralField.from_function(g, lambda x: np.cos(2 * np.pi * x / g.length))
    assert f.multiply(h).weight == pytest.approx(0.2)


def test_antiderivative_inverts_derivative():
    g = grid(64, 9.0)
    rng = np.random.default_rng(4)
    v = sp.random_smooth_values(g, rng)
    c = sp.values_to_coeffs(v, g)
    c[0] = 0.0  # zero-mean input
    back = sp.antiderivative_coeffs(c * (1j * g.wavenumbers), g)
    assert np.max(np.abs(back - c)) < 1e-13


def test_composition_matrix_shift():
    g = grid(64)
    shift = 0.7
    mat = sp.composition_matrix(g, g.nodes + shift)
    v = np.sin(3 * g.nodes)
    assert np.max(np.abs(mat @ v - np.sin(3 * (g.nodes + shift)))) < 1e-12


def test_composition_matrix_identity():
    g = grid(32)
    mat = sp.composition_matrix(g, g.nodes)
    assert np.max(np.abs(mat - np.eye(g.n))) < 1e-12


def test_band_projector():
    g = grid(32)
    p = sp.band_projector_matrix(g, 5)
    v = np.exp(4j * g.nodes) + np.exp(9j * g.nodes)
    out = p @ v
    assert np.max(np.abs(out - np.exp(4j * g.nodes))) < 1e-12
    assert np.max(np.abs(p @ p - p)) < 1e-12


def test_even_odd_split():
    g = grid(64, 13.0)
    v = 1.0 / np.cosh(g.nodes) ** 2 + np.sin(2 * np.pi * g.nodes / g.length)
    ev = sp.even_part_values(v, g)
    od = sp.odd_part_values(v, g)
    assert np.max(np.abs(ev + od - v)) < 1e-14
    assert np.max(np.abs(ev - ev[sp.reflection_indices(g)])) < 1e-14
    assert np.max(np.abs(od + od[sp.reflection_indices(g)])) < 1e-14


def test_weight_helper_roundtrip():
    g = sp.Grid(128, 40.0)
    v = 1.0 / np.cosh(g.nodes) ** 2
    w = sp.apply_weight_values(v, g, 0.4)
    assert np.max(np.abs(sp.apply_weight_values(w, g, -0.4) - v)) < 1e-14


def test_random_smooth_field_properties():
    g = grid(64, 17.0)
    rng = np.random.default_rng(5)
    v = sp.random_smooth_values(g, rng)
    assert np.max(np.abs(np.imag(sp.values_to_coeffs(v, g) - np.conj(sp.values_to_coeffs(v, g)[(-g.modes) % g.n])))) < 1e-15
    ve = sp.random_smooth_values(g, rng, even=True)
    assert np.max(np.abs(ve - ve[sp.reflection_indices(g)])) < 1e-13


def test_sobolev_norm_matches_direct_sum():
    g = grid(64, 23.0)
    rng = np.random.default_rng(6)
    v = sp.random_smooth_values(g, rng)
    c = sp.values_to_coeffs(v, g)
    direct = np.sqrt(g.length * np.sum((1 + g.wavenumbers**2) ** 2 * np.abs(c) ** 2))
    assert abs(sp.sobolev_norm_coeffs(c, g, 2) - direct) < 1e-13


def test_field_arithmetic_guards():
    g = grid(32)
    f = sp.SpectralField.from_values(g, np.cos(g.nodes), weight=0.1)
    h = sp.SpectralField.from_values(g, np.cos(g.nodes), weight=0.2)
    with pytest.raises(ValueError):
        _ = f + h
