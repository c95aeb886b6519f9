"""Periodic pseudospectral core on exponentially weighted spaces.

A field f in the weighted space L^2_a on a length-L periodic cell is stored
through the Fourier coefficients of its weight-transformed representative
e^{a x} f.  Fourier multipliers sigma(D) then act diagonally through the
shifted symbol sigma(k + i a), while pointwise multiplication by an
unweighted coefficient function acts directly on node values of the
representative.  The weight itself is never formed on the grid, except in
the documented node-wise helpers used for localized profile-derived fields.

Wavenumbers carry the +n/2 Nyquist mode (numpy's -n/2 slot is flipped).
Symbols tagged with odd parity evaluate at the unpaired Nyquist mode to the
mean of sigma(+k + i a) and sigma(-k + i a), which vanishes at a = 0; this
keeps reflection conjugation identities exact at the discrete level.

Norm convention: ||f||_{H^s_a}^2 = L * sum_m (1 + k_m^2)^s |c_m|^2 over the
coefficients of the representative, so the constant function 1 on [0, 2 pi)
has L^2 norm sqrt(2 pi).
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "Grid",
    "WeightParams",
    "MultiplierSymbol",
    "SpectralField",
    "coeffs_to_values",
    "values_to_coeffs",
    "evaluate_symbol",
    "apply_symbol_values",
    "multiply_dealiased_values",
    "fine_product_coeffs",
    "synthesis_matrix",
    "analysis_matrix",
    "multiplier_matrix",
    "pointwise_matrix",
    "composition_matrix",
    "band_projector_matrix",
    "band_limit_coeffs",
    "antiderivative_coeffs",
    "inner_product",
    "node_norm",
    "sobolev_norm_coeffs",
    "reflection_indices",
    "even_part_values",
    "odd_part_values",
    "apply_weight_values",
    "random_smooth_values",
    "operator_norm",
    "smallest_singular_value",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-L/2, L/2) with power-of-two resolution."""

    n: int
    length: float

    def __post_init__(self):
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"grid size must be a power of two >= 8, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"grid length must be positive, got {self.length}")

    @cached_property
    def nodes(self):
        return -0.5 * self.length + self.spacing * np.arange(self.n)

    @property
    def spacing(self):
        return self.length / self.n

    @cached_property
    def modes(self):
        # integer mode numbers in numpy fft slot order, Nyquist taken as +n/2
        m = np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)
        m[self.n // 2] = self.n // 2
        m.setflags(write=False)
        return m

    @cached_property
    def wavenumbers(self):
        k = 2.0 * np.pi * self.modes / self.length
        k.setflags(write=False)
        return k

    @cached_property
    def _alternating(self):
        # e^{-i k_m L/2} = (-1)^m, the phase between slot order and centered nodes
        s = np.where(self.modes % 2 == 0, 1.0, -1.0)
        s.setflags(write=False)
        return s

    @property
    def nyquist_slot(self):
        return self.n // 2

    def refined(self, factor=2):
        return Grid(self.n * factor, self.length)


@dataclass(frozen=True)
class WeightParams:
    """Exponential weight data: a = alpha_hat * eps, gamma = 1 - eps^2."""

    alpha_hat: float
    eps: float

    def __post_init__(self):
        if not 0.0 < self.alpha_hat <= 0.5:
            raise ValueError(f"alpha_hat must lie in (0, 1/2], got {self.alpha_hat}")
        if not 0.0 < self.eps < 1.0:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")

    @property
    def a(self):
        return self.alpha_hat * self.eps

    @property
    def gamma(self):
        return 1.0 - self.eps**2


@dataclass(frozen=True)
class MultiplierSymbol:
    """Fourier symbol sigma(xi) with an optional parity tag.

    fn must accept a complex array xi = k + i a and return complex values.
    parity "odd" (sigma(-xi) = -sigma(xi)) triggers the Nyquist mean rule;
    "even" and None evaluate raw everywhere.
    """

    fn: object
    name: str
    parity: str = None

    def __post_init__(self):
        if self.parity not in (None, "odd", "even"):
            raise ValueError(f"unknown parity tag {self.parity!r}")

    def __call__(self, xi):
        return self.fn(xi)


def evaluate_symbol(symbol, grid, a=0.0):
    """Symbol values sigma(k_m + i a) over the grid band, slot order.

    Odd-tagged symbols get the two-sided mean at the unpaired Nyquist mode.
    Raises ValueError (naming the symbol and argument) on non-finite output.
    """
    xi = grid.wavenumbers + 1j * a
    fn = symbol.fn if isinstance(symbol, MultiplierSymbol) else symbol
    with np.errstate(all="ignore"):
        vals = np.asarray(fn(xi), dtype=complex)
        if vals.shape != xi.shape:
            vals = np.broadcast_to(vals, xi.shape).astype(complex)
        else:
            vals = vals.copy()
        if isinstance(symbol, MultiplierSymbol) and symbol.parity == "odd":
            kn = grid.wavenumbers[grid.nyquist_slot]
            vals[grid.nyquist_slot] = 0.5 * (
                complex(np.asarray(fn(np.array([kn + 1j * a])))[0])
                + complex(np.asarray(fn(np.array([-kn + 1j * a])))[0])
            )
    if not np.all(np.isfinite(vals)):
        name = symbol.name if isinstance(symbol, MultiplierSymbol) else getattr(symbol, "__name__", repr(symbol))
        bad = xi[~np.isfinite(vals)][:3]
        raise ValueError(f"symbol {name} produced non-finite values at xi = {bad}")
    return vals


def coeffs_to_values(c, grid):
    """Node values v_j = sum_m c_m e^{i k_m x_j}."""
    return grid.n * np.fft.ifft(np.asarray(c, dtype=complex) * grid._alternating)


def values_to_coeffs(v, grid):
    """Inverse of coeffs_to_values."""
    return np.fft.fft(np.asarray(v, dtype=complex)) * (grid._alternating / grid.n)


def apply_symbol_values(v, symbol, grid, a=0.0):
    """Apply a Fourier multiplier to node values of the representative."""
    c = values_to_coeffs(v, grid)
    return coeffs_to_values(c * evaluate_symbol(symbol, grid, a), grid)


def band_limit_coeffs(c, grid, mmax):
    """Zero all coefficients with |mode| > mmax."""
    out = np.array(c, dtype=complex)
    out[np.abs(grid.modes) > mmax] = 0.0
    return out


def multiply_dealiased_values(u, v, grid):
    """Pointwise product with the 2/3 rule: modes beyond n/3 are zeroed
    in both factors and in the result, so the kept band is alias-free."""
    mmax = grid.n // 3
    cu = band_limit_coeffs(values_to_coeffs(u, grid), grid, mmax)
    cv = band_limit_coeffs(values_to_coeffs(v, grid), grid, mmax)
    prod = coeffs_to_values(cu, grid) * coeffs_to_values(cv, grid)
    return coeffs_to_values(band_limit_coeffs(values_to_coeffs(prod, grid), grid, mmax), grid)


def _embed_fine(c, grid, fine):
    big = np.zeros(fine.n, dtype=complex)
    big[grid.modes % fine.n] = c
    return big


def _extract_band(cfine, grid, fine):
    return np.asarray(cfine)[grid.modes % fine.n]


def fine_product_coeffs(cu, cv, grid):
    """Exact band compression of a pointwise product.

    Both factors are evaluated on a doubly refined grid, multiplied there
    without aliasing, and the result is truncated back to the native band.
    This equals the compressed operator P T_g P applied exactly, which is
    what operator-assembly stages need.
    """
    fine = grid.refined(2)
    uf = coeffs_to_values(_embed_fine(cu, grid, fine), fine)
    vf = coeffs_to_values(_embed_fine(cv, grid, fine), fine)
    return _extract_band(values_to_coeffs(uf * vf, fine), grid, fine)


def synthesis_matrix(grid):
    """S[j, slot] = e^{i k_m x_j}; S/sqrt(n) is unitary."""
    return np.exp(1j * np.outer(grid.nodes, grid.wavenumbers))


def analysis_matrix(grid):
    return synthesis_matrix(grid).conj().T / grid.n


def multiplier_matrix(grid, symbol, a=0.0):
    """Dense node-basis matrix of a Fourier multiplier at weight a."""
    s = synthesis_matrix(grid)
    vals = evaluate_symbol(symbol, grid, a)
    return (s * vals) @ s.conj().T / grid.n


def pointwise_matrix(grid, gvals):
    """Dense node-basis matrix of the exact band compression P T_g P.

    Independent of the weight: multiplication by an unweighted coefficient
    function commutes with the weight transform.
    """
    fine = grid.refined(2)
    cg = values_to_coeffs(gvals, grid)
    gf = coeffs_to_values(_embed_fine(cg, grid, fine), fine)
    sf = np.exp(1j * np.outer(fine.nodes, grid.wavenumbers))
    conv = sf.conj().T @ (gf[:, None] * sf) / fine.n
    s = synthesis_matrix(grid)
    return s @ conv @ s.conj().T / grid.n


def composition_matrix(grid, zvals):
    """Dense node-basis matrix of f -> f o z from node values of z.

    Band-limited interpolation: (E c)_j = sum_m c_m e^{i k_m z_j}, so the
    map handles z leaving the cell through periodicity of the exponentials.
    """
    e = np.exp(1j * np.outer(np.asarray(zvals), grid.wavenumbers))
    return e @ synthesis_matrix(grid).conj().T / grid.n


def band_projector_matrix(grid, mmax):
    """Node-basis orthogonal projector onto modes |m| <= mmax."""
    s = synthesis_matrix(grid)
    keep = (np.abs(grid.modes) <= mmax).astype(float)
    return (s * keep) @ s.conj().T / grid.n


def antiderivative_coeffs(c, grid):
    """Zero-mean periodic antiderivative; mean and Nyquist slots drop out
    (the 1/(i k) symbol is odd, so the unpaired mode takes its mean, zero)."""
    k = grid.wavenumbers
    out = np.zeros_like(np.asarray(c, dtype=complex))
    nz = np.ones(grid.n, dtype=bool)
    nz[0] = False
    nz[grid.nyquist_slot] = False
    out[nz] = np.asarray(c)[nz] / (1j * k[nz])
    return out


def inner_product(u, v, grid):
    """(L/n) sum_j u_j conj(v_j) over node values of the representatives.

    With both representatives at weight a this is the L^2_a inner product;
    with weights a and -a it is the unweighted dual pairing.
    """
    return grid.spacing * np.sum(np.asarray(u) * np.conj(np.asarray(v)))


def node_norm(v, grid):
    return float(np.sqrt(np.real(inner_product(v, v, grid))))


def sobolev_norm_coeffs(c, grid, s=0):
    """||f||_{H^s_a} = sqrt(L sum (1 + k^2)^s |c|^2) on representative coefficients."""
    w = (1.0 + grid.wavenumbers**2) ** s if s else 1.0
    return float(np.sqrt(grid.length * np.sum(w * np.abs(np.asarray(c)) ** 2)))


def reflection_indices(grid):
    """Node index permutation realizing x -> -x (node 0 is self-paired)."""
    return (grid.n - np.arange(grid.n)) % grid.n


def even_part_values(v, grid):
    return 0.5 * (v + np.asarray(v)[reflection_indices(grid)])


def odd_part_values(v, grid):
    return 0.5 * (v - np.asarray(v)[reflection_indices(grid)])


def apply_weight_values(v, grid, a):
    """Node-wise multiplication by e^{a x}.

    Only sound for localized fields that are negligible at the cell edge;
    this is the documented exception to keeping the weight off the grid.
    """
    return np.asarray(v) * np.exp(a * grid.nodes)


def random_smooth_values(grid, rng, decay=4.0, mmax=None, even=False):
    """Real random field with coefficients ~ (1 + |m|)^-decay, band-limited
    to mmax (default n//3 so products stay alias-free)."""
    if mmax is None:
        mmax = grid.n // 3
    m = grid.modes
    c = np.zeros(grid.n, dtype=complex)
    amp = (1.0 + np.abs(m, dtype=float)) ** (-decay)
    if even:
        mag = rng.standard_normal(grid.n) * amp
        c = np.where(np.abs(m) <= mmax, mag, 0.0).astype(complex)
        c = 0.5 * (c + c[(-m) % grid.n])  # real even coefficients: even cosine field
    else:
        z = rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)
        c = np.where(np.abs(m) <= mmax, z * amp, 0.0)
        c = 0.5 * (c + np.conj(c[(-m) % grid.n]))  # Hermitian: real field
        c[grid.nyquist_slot] = 0.0
    return coeffs_to_values(c, grid).real


def operator_norm(mat):
    return float(np.linalg.norm(mat, 2))


def smallest_singular_value(mat):
    return float(np.linalg.svd(mat, compute_uv=False)[-1])


class SpectralField:
    """Field in L^2_a stored through coefficients of e^{a x} f.

    values() returns node values of that representative.  apply() acts by a
    Fourier multiplier through the shifted symbol; multiply() is the 2/3-rule
    pointwise product, with weights adding (e^{ax}f * e^{bx}g represents fg
    at weight a + b).
    """

    def __init__(self, grid, coeffs, weight=0.0):
        self.grid = grid
        self.coeffs = np.asarray(coeffs, dtype=complex)
        if self.coeffs.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} coefficients, got shape {self.coeffs.shape}")
        self.weight = float(weight)

    @classmethod
    def from_values(cls, grid, values, weight=0.0):
        return cls(grid, values_to_coeffs(values, grid), weight)

    @classmethod
    def from_function(cls, grid, fn, weight=0.0):
        """fn is sampled at the nodes as the representative at the given weight."""
        return cls.from_values(grid, np.asarray(fn(grid.nodes), dtype=complex), weight)

    def values(self):
        return coeffs_to_values(self.coeffs, self.grid)

    def real_values(self):
        return self.values().real

    def apply(self, symbol):
        return SpectralField(
            self.grid,
            self.coeffs * evaluate_symbol(symbol, self.grid, self.weight),
            self.weight,
        )

    def multiply(self, other):
        if other.grid is not self.grid and other.grid != self.grid:
            raise ValueError("fields live on different grids")
        vals = multiply_dealiased_values(self.values(), other.values(), self.grid)
        return SpectralField.from_values(self.grid, vals, self.weight + other.weight)

    def dot(self, other):
        return inner_product(self.values(), other.values(), self.grid)

    def norm(self, s=0):
        return sobolev_norm_coeffs(self.coeffs, self.grid, s)

    def __add__(self, other):
        self._check_compatible(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs, self.weight)

    def __sub__(self, other):
        self._check_compatible(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs, self.weight)

    def __mul__(self, scalar):
        return SpectralField(self.grid, self.coeffs * scalar, self.weight)

    __rmul__ = __mul__

    def _check_compatible(self, other):
        if other.grid != self.grid or other.weight != self.weight:
            raise ValueError("fields must share grid and weight")
