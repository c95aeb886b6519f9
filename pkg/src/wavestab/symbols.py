"""Fourier symbols for the water-wave linearization and its model limits.

All symbols accept complex xi = k + i a so they evaluate directly on
weight-shifted lines.  Ratios with removable singularities (tanh xi / xi,
xi coth xi, 1/xi - coth xi, and square roots thereof) switch to truncated
Taylor series inside a small radius, keeping full relative precision where
the direct formula would cancel.

Branch policy for the dispersion square root s(xi) = sqrt(-g xi tanh xi):
principal square root off the real line (the analytic continuation picked
out by the weighted spaces), and the even purely imaginary branch
i sqrt(g k tanh k) exactly on the real line so reflection identities hold
discretely.  The ratio i xi / s(xi) inherits the same branches and fills
the removable point at xi = 0 with its limit from the upper half plane,
-1/sqrt(g).
"""

import numpy as np

from wavestab.spectral import MultiplierSymbol

__all__ = [
    "derivative",
    "hilbert",
    "tanh_ratio",
    "one_minus_tanh_ratio",
    "xi_coth",
    "riemann_tail",
    "sqrt_tanh_ratio",
    "inv_sqrt_tanh_ratio",
    "dispersion_sqrt",
    "dispersion_branch",
    "d_over_s",
    "hilbert_over_s",
    "q_profile",
    "q_profile_limit",
    "m0_resolvent",
    "m_eps_resolvent",
    "profile_q1",
    "dispersion",
    "check_sqrt_halfplane",
    "check_dispest",
    "check_cDBsym",
    "check_lowfreq_bound",
    "expand_Aplus_scaled",
    "sharp_low_pass",
    "soft_low_pass",
]

# ascending coefficients in xi^2, radii chosen so the dropped tail is < 1e-18
_TANH_RATIO = (
    1.0, -1.0 / 3.0, 2.0 / 15.0, -17.0 / 315.0, 62.0 / 2835.0,
    -1382.0 / 155925.0, 21844.0 / 6081075.0,
)
_TANH_RATIO_RADIUS = 1e-2

# 1 - tanh(xi)/xi = xi^2 * poly(xi^2); needed without cancellation
_ONE_MINUS_TANH_RATIO = (
    1.0 / 3.0, -2.0 / 15.0, 17.0 / 315.0, -62.0 / 2835.0, 1382.0 / 155925.0,
    -21844.0 / 6081075.0, 929569.0 / 638512875.0, -6404582.0 / 10854718875.0,
)
_ONE_MINUS_TANH_RATIO_RADIUS = 0.1

_XI_COTH = (
    1.0, 1.0 / 3.0, -1.0 / 45.0, 2.0 / 945.0, -1.0 / 4725.0, 2.0 / 93555.0,
)
_XI_COTH_RADIUS = 1e-2

# (1/xi - coth xi) = xi * poly(xi^2)
_RIEMANN_TAIL = (
    -1.0 / 3.0, 1.0 / 45.0, -2.0 / 945.0, 1.0 / 4725.0, -2.0 / 93555.0,
    1382.0 / 638512875.0, -4.0 / 18243225.0,
)
_RIEMANN_TAIL_RADIUS = 0.05

_SQRT_TANH_RATIO = (
    1.0, -1.0 / 6.0, 19.0 / 360.0, -55.0 / 3024.0, 11813.0 / 1814400.0,
    -2117.0 / 887040.0, 64604977.0 / 72648576000.0,
)
_INV_SQRT_TANH_RATIO = (
    1.0, 1.0 / 6.0, -1.0 / 40.0, 79.0 / 15120.0, -2339.0 / 1814400.0,
    677.0 / 1900800.0, -308963.0 / 2905943040.0,
)
_SQRT_TANH_RATIO_RADIUS = 1e-2


def _polyval2(z, coeffs):
    """Horner evaluation of poly(z^2), ascending coefficients."""
    z2 = z * z
    out = np.zeros_like(z2) + coeffs[-1]
    for c in reversed(coeffs[:-1]):
        out = out * z2 + c
    return out


def _split_eval(xi, radius, series_coeffs, direct):
    xi = np.asarray(xi, dtype=complex)
    out = np.empty_like(xi)
    small = np.abs(xi) < radius
    if np.any(small):
        out[small] = _polyval2(xi[small], series_coeffs)
    big = ~small
    if np.any(big):
        out[big] = direct(xi[big])
    return out


def tanh_ratio(xi):
    """tanh(xi)/xi, value 1 at xi = 0."""
    return _split_eval(xi, _TANH_RATIO_RADIUS, _TANH_RATIO, lambda z: np.tanh(z) / z)


def one_minus_tanh_ratio(xi):
    """1 - tanh(xi)/xi evaluated without cancellation near 0."""
    xi = np.asarray(xi, dtype=complex)
    out = np.empty_like(xi)
    small = np.abs(xi) < _ONE_MINUS_TANH_RATIO_RADIUS
    if np.any(small):
        z = xi[small]
        out[small] = z * z * _polyval2(z, _ONE_MINUS_TANH_RATIO)
    big = ~small
    if np.any(big):
        z = xi[big]
        out[big] = 1.0 - np.tanh(z) / z
    return out


def xi_coth(xi):
    """xi coth(xi), value 1 at xi = 0."""
    return _split_eval(xi, _XI_COTH_RADIUS, _XI_COTH, lambda z: z / np.tanh(z))


def _riemann_tail_fn(xi):
    xi = np.asarray(xi, dtype=complex)
    out = np.empty_like(xi)
    small = np.abs(xi) < _RIEMANN_TAIL_RADIUS
    if np.any(small):
        z = xi[small]
        out[small] = 1j * z * _polyval2(z, _RIEMANN_TAIL)
    big = ~small
    if np.any(big):
        z = xi[big]
        out[big] = 1j * (1.0 / z - 1.0 / np.tanh(z))
    return out


def sqrt_tanh_ratio(xi):
    """sqrt(tanh(xi)/xi) with principal root; series branch near 0."""
    return _split_eval(
        xi, _SQRT_TANH_RATIO_RADIUS, _SQRT_TANH_RATIO, lambda z: np.sqrt(np.tanh(z) / z)
    )


def inv_sqrt_tanh_ratio(xi):
    """1/sqrt(tanh(xi)/xi) with principal root; series branch near 0."""
    return _split_eval(
        xi, _SQRT_TANH_RATIO_RADIUS, _INV_SQRT_TANH_RATIO, lambda z: np.sqrt(z / np.tanh(z))
    )


derivative = MultiplierSymbol(lambda xi: 1j * xi, "derivative", parity="odd")

hilbert = MultiplierSymbol(lambda xi: 1j * np.tanh(xi), "hilbert", parity="odd")

riemann_tail = MultiplierSymbol(_riemann_tail_fn, "riemann_tail", parity="odd")


def _disp_sqrt_fn(gamma):
    def fn(xi):
        xi = np.asarray(xi, dtype=complex)
        out = np.sqrt(-gamma * xi * np.tanh(xi))
        on_axis = xi.imag == 0
        if np.any(on_axis):
            k = xi.real[on_axis]
            out[on_axis] = 1j * np.sqrt(gamma * k * np.tanh(k))
        return out

    return fn


def dispersion_sqrt(gamma):
    """s(xi) = sqrt(-gamma xi tanh xi): even, imaginary branch on the real line."""
    return MultiplierSymbol(_disp_sqrt_fn(gamma), f"dispersion_sqrt({gamma:g})", parity="even")


def dispersion_branch(gamma, sign):
    """Constant-coefficient dispersion branch i xi + sign * s(xi)."""
    s = _disp_sqrt_fn(gamma)

    def fn(xi):
        xi = np.asarray(xi, dtype=complex)
        return 1j * xi + sign * s(xi)

    return MultiplierSymbol(fn, f"dispersion_branch({gamma:g},{sign:+d})", parity=None)


def _d_over_s_fn(gamma):
    sfn = _disp_sqrt_fn(gamma)
    root_g = np.sqrt(gamma)

    def fn(xi):
        xi = np.asarray(xi, dtype=complex)
        out = np.empty_like(xi)
        small = np.abs(xi) < _SQRT_TANH_RATIO_RADIUS
        if np.any(small):
            z = xi[small]
            mag = _polyval2(z, _INV_SQRT_TANH_RATIO) / root_g
            sign = np.where(
                z.imag > 0, -1.0, np.where(z.imag < 0, 1.0, np.sign(z.real))
            )
            sign = np.where(z == 0, -1.0, sign)  # upper-half-plane limit at 0
            out[small] = sign * mag
        big = ~small
        if np.any(big):
            z = xi[big]
            out[big] = 1j * z / sfn(z)
        return out

    return fn


def d_over_s(gamma):
    """i xi / s(xi): bounded below, odd, equals -1/sqrt(gamma) at xi = 0."""
    return MultiplierSymbol(_d_over_s_fn(gamma), f"d_over_s({gamma:g})", parity="odd")


def hilbert_over_s(gamma):
    """i tanh(xi) / s(xi) = (i xi / s) * tanh_ratio: odd and bounded."""
    base = _d_over_s_fn(gamma)

    def fn(xi):
        xi = np.asarray(xi, dtype=complex)
        return base(xi) * tanh_ratio(xi)

    return MultiplierSymbol(fn, f"hilbert_over_s({gamma:g})", parity="odd")


def q_profile(eps, gamma):
    """Inverse linearization symbol of the traveling-wave fixed point,
    eps^2 / (eps^2 + gamma (1 - tanh(eps xi)/(eps xi))), scaled frame."""
    e2 = eps * eps

    def fn(xi):
        return e2 / (e2 + gamma * one_minus_tanh_ratio(eps * np.asarray(xi, dtype=complex)))

    return MultiplierSymbol(fn, f"q_profile({eps:g})", parity="even")


def q_profile_limit():
    """Long-wave limit 1/(1 + xi^2/3) of the profile inverse symbol."""
    return MultiplierSymbol(lambda xi: 1.0 / (1.0 + xi * xi / 3.0), "q_profile_limit", parity="even")


def m0_resolvent(lam_hat):
    """Scalar resolvent kernel i xi / (-lam + i xi/2 + i xi^3/6) of the
    long-wave limit bundle."""

    def fn(xi):
        xi = np.asarray(xi, dtype=complex)
        return 1j * xi / (-lam_hat + 0.5j * xi + 1j * xi**3 / 6.0)

    return MultiplierSymbol(fn, f"m0_resolvent({lam_hat})", parity=None)


def m_eps_resolvent(lam_hat, eps, gamma):
    """Scaled scalar resolvent kernel eps^3 i xi / (-eps^3 lam + i eps xi + s(eps xi))."""
    sfn = _disp_sqrt_fn(gamma)
    e3 = eps**3

    def fn(xi):
        z = eps * np.asarray(xi, dtype=complex)
        return e3 * 1j * np.asarray(xi, dtype=complex) / (-e3 * lam_hat + 1j * z + sfn(z))

    return MultiplierSymbol(fn, f"m_eps_resolvent({lam_hat},{eps:g})", parity=None)


def profile_q1(eps, gamma):
    """Difference between the profile inverse symbol and its long-wave
    limit, q_profile - q_profile_limit; decays like eps^2 at fixed xi."""
    qe = q_profile(eps, gamma).fn
    q0 = q_profile_limit().fn

    def fn(xi):
        xi = np.asarray(xi, dtype=complex)
        return qe(xi) - q0(xi)

    return MultiplierSymbol(fn, f"profile_q1({eps:g})", parity="even")


def _tanh_ratio_deriv(k):
    # d/dk (tanh k / k); odd, -2k/3 + 8k^3/15 + O(k^5) near 0
    k = np.asarray(k, dtype=float)
    out = np.empty_like(k)
    small = np.abs(k) < 1e-3
    if np.any(small):
        z = k[small]
        out[small] = -2.0 * z / 3.0 + 8.0 * z**3 / 15.0
    big = ~small
    if np.any(big):
        z = k[big]
        with np.errstate(over="ignore"):
            sech2 = 1.0 / np.cosh(z) ** 2
        out[big] = (z * sech2 - np.tanh(z)) / z**2
    return out


def dispersion(k, gamma_t):
    """Both real dispersion branches -k +- sqrt(gamma_t k tanh k) in the
    traveling frame, with analytic k-derivatives.

    Returns (omega, omega_prime), each of shape (2,) + shape(k); row 0 is
    the + branch.  At k = 0 the derivative of the root term is taken in
    the symmetric sense (value 0), so omega_prime(0) = (-1, -1).
    """
    k = np.asarray(k, dtype=float)
    ratio = tanh_ratio(k).real
    root_ratio = np.sqrt(gamma_t * ratio)
    root = np.abs(k) * root_ratio
    droot = np.sign(k) * root_ratio + np.abs(k) * gamma_t * _tanh_ratio_deriv(k) / (
        2.0 * root_ratio
    )
    omega = np.stack([-k + root, -k - root])
    omega_prime = np.stack([-1.0 + droot, -1.0 - droot])
    return omega, omega_prime


def check_sqrt_halfplane(z, a):
    """Half-plane test for the principal square root: returns
    Re sqrt(z) <= a, asserting it coincides with (|z| + Re z)/2 <= a^2."""
    z = np.asarray(z, dtype=complex)
    a = np.asarray(a, dtype=float)
    left = np.sqrt(z).real <= a
    right = 0.5 * (np.abs(z) + z.real) <= a**2
    if not np.array_equal(left, right):
        bad = int(np.sum(left != right))
        raise AssertionError(f"half-plane square-root criterion mismatch at {bad} points")
    return left


def check_dispest(k, a):
    """Damping estimate on the shifted line xi = k + i a, 0 < a < pi/4:
    0 < Re sqrt(-xi tanh xi) <= (a/sqrt(cos 2a)) sqrt(tanh k / k)."""
    if not 0.0 < a < np.pi / 4.0:
        raise ValueError(f"a must lie in (0, pi/4), got {a}")
    k = np.asarray(k, dtype=float)
    xi = k + 1j * a
    w = np.sqrt(-xi * np.tanh(xi)).real
    bound = a / np.sqrt(np.cos(2.0 * a)) * np.sqrt(tanh_ratio(k).real)
    return (0.0 < w) & (w <= bound)


def check_cDBsym(k, w):
    """Weighted damping of the upper dispersion branch at xi = k + i a,
    a = eps * alpha_hat: checks
      Re sqrt(-gamma xi tanh xi) <= eps alpha_hat (1 - eps^2/4) sqrt(tanh k/k),
      Re(i xi + sqrt(-gamma xi tanh xi)) <= eps alpha_hat (-1 + (1 - eps^2/4) sqrt(tanh k/k))
                                         <= -eps^3 alpha_hat / 4,
    the resolvent distance |lam - branch| >= alpha_hat eps^3 / 12 for sampled
    lam with Re lam >= -alpha_hat eps^3 / 6, and |tanh xi| <= 1.
    Requires eps <= 0.3.  Returns a single bool over all supplied k."""
    if w.eps > 0.3:
        raise ValueError(f"eps must not exceed 0.3 for this bound, got {w.eps}")
    k = np.asarray(k, dtype=float)
    eps, alpha_hat, gamma, a = w.eps, w.alpha_hat, w.gamma, w.a
    xi = k + 1j * a
    s = np.sqrt(-gamma * xi * np.tanh(xi))
    factor = (1.0 - 0.25 * eps**2) * np.sqrt(tanh_ratio(k).real)
    branch = 1j * xi + s
    ok_root = np.all(s.real <= eps * alpha_hat * factor)
    ok_branch = np.all(branch.real <= eps * alpha_hat * (-1.0 + factor))
    ok_margin = np.all(branch.real <= -0.25 * eps**3 * alpha_hat)
    scale = alpha_hat * eps**3
    lam_samples = scale * np.array(
        [-1 / 6, -1 / 6 + 2j, -1 / 6 - 2j, 0, 1 + 1j, 5j, 0.5, 10.0]
    )
    floor = scale / 12.0 * (1.0 - 1e-12)
    ok_resolvent = all(
        np.min(np.abs(lam - branch)) >= floor for lam in lam_samples
    )
    ok_tanh = np.all(np.abs(np.tanh(xi)) <= 1.0 + 1e-15)
    return bool(ok_root and ok_branch and ok_margin and ok_resolvent and ok_tanh)


def check_lowfreq_bound(kappa):
    """sqrt(tanh kappa / kappa) <= 1 - kappa^2 / 9 for real kappa.
    Verified window |kappa| <= 1; a sweep shows the bound first fails
    near |kappa| = 1.3."""
    kappa = np.asarray(kappa, dtype=float)
    lhs = np.sqrt(tanh_ratio(kappa).real)
    return lhs <= 1.0 - kappa**2 / 9.0


def expand_Aplus_scaled(lam_hat, xi, w):
    """Long-wave expansion of the scaled upper branch on the weighted line.

    Returns (exact, cubic) where
      exact = -lam_hat + eps^-3 (i eps xi + sqrt(-gamma eps xi tanh(eps xi))),
      cubic = -lam_hat + i xi gamma1 / 2 + i xi^3 gamma / 6,
    with gamma1 = 2/(1 + sqrt(1 - eps^2)) evaluated in cancellation-free
    form.  For |eps xi| <= 1 and Im xi > 0 the gap is O(|xi|^5 eps^2)."""
    xi = np.asarray(xi, dtype=complex)
    eps, gamma = w.eps, w.gamma
    z = eps * xi
    exact = -lam_hat + (1j * z + np.sqrt(-gamma * z * np.tanh(z))) / eps**3
    gamma1 = 2.0 / (1.0 + np.sqrt(1.0 - eps**2))
    cubic = -lam_hat + 0.5j * xi * gamma1 + 1j * xi**3 * gamma / 6.0
    return exact, cubic


def sharp_low_pass(kappa):
    """Indicator of |k| <= kappa on the real frequency; exact complement."""
    return MultiplierSymbol(
        lambda xi: (np.abs(np.real(xi)) <= kappa).astype(complex),
        f"sharp_low_pass({kappa:g})",
        parity="even",
    )


def soft_low_pass(kappa):
    """Piecewise-linear hat: 1 on |k| <= kappa, 0 beyond 2 kappa."""

    def fn(xi):
        s = np.abs(np.real(xi)) / kappa
        return np.clip(2.0 - s, 0.0, 1.0).astype(complex)

    return MultiplierSymbol(fn, f"soft_low_pass({kappa:g})", parity="even")
