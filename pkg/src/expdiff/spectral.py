"""Pseudospectral calculus on the unit circle R/Z.

Grid functions live on the uniform grid ``x_i = i/N`` with ``N`` even.
Fourier coefficients use the normalization ``c_n = (1/N) sum_i f(x_i)
exp(-2 pi i n x_i)`` so that ``c_0`` is the mean; only ``n >= 0`` is stored,
the negative half being fixed by Hermitian symmetry.

The ``_*_array`` helpers work on the last axis of an ndarray and accept
leading batch dimensions; the geodesic integrator calls them directly.
The public functions take and return :class:`Field`.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

MIN_POINTS = 16
# Cap on Taylor terms for grid-anchored evaluation: offsets are at most half
# a cell, so the remainder is below (pi/2)**25 / 25! ~ 5e-21 per unit coefficient.
TAYLOR_TERMS = 25


def grid(N: int) -> np.ndarray:
    """Grid points ``i/N`` for ``i = 0..N-1``."""
    return np.arange(N) / N


def wavenumbers(N: int) -> np.ndarray:
    """Nonnegative wavenumbers ``0..N/2`` matching the stored spectrum."""
    return np.arange(N // 2 + 1)


def dealias_mask(N: int) -> np.ndarray:
    """True for modes kept by the 2/3 rule (``|n| <= N/3``)."""
    return 3 * wavenumbers(N) <= N


def _check_size(N: int) -> None:
    if N < MIN_POINTS or N % 2:
        raise ValueError(f"grid size must be even and >= {MIN_POINTS}, got {N}")


def _analysis_array(values: np.ndarray) -> np.ndarray:
    return np.fft.rfft(values, axis=-1) / values.shape[-1]


def _synthesis_array(coeffs: np.ndarray, N: int) -> np.ndarray:
    return np.fft.irfft(coeffs * N, n=N, axis=-1)


def _deriv_symbol(N: int, j: int) -> np.ndarray:
    sym = (2j * np.pi * wavenumbers(N)) ** j
    if j % 2:
        sym[-1] = 0.0
    return sym


def _deriv_array(values: np.ndarray, j: int) -> np.ndarray:
    if j == 0:
        return values.copy()
    N = values.shape[-1]
    c = np.fft.rfft(values, axis=-1)
    return np.fft.irfft(c * _deriv_symbol(N, j), n=N, axis=-1)


def _multiplier_array(values: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    N = values.shape[-1]
    c = np.fft.rfft(values, axis=-1)
    return np.fft.irfft(c * symbol, n=N, axis=-1)


def _truncate_array(values: np.ndarray) -> np.ndarray:
    return _multiplier_array(values, dealias_mask(values.shape[-1]).astype(float))


def _product_array(a: np.ndarray, b: np.ndarray, dealias: bool = True) -> np.ndarray:
    if not dealias:
        return a * b
    return _truncate_array(_truncate_array(a) * _truncate_array(b))


def _direct_eval_array(values: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of 1-D ``values`` by summing the series."""
    N = values.shape[-1]
    c = _analysis_array(values)
    y = np.mod(np.asarray(points, dtype=float), 1.0)
    n = np.arange(1, N // 2)
    phase = np.exp(2j * np.pi * np.multiply.outer(y, n))
    out = c[0].real + 2.0 * (phase @ c[1 : N // 2]).real
    # Nyquist mode as the real cosine, the minimal-norm real interpolant
    out += c[N // 2].real * np.cos(np.pi * N * y)
    return out


def _anchor(points: np.ndarray, N: int):
    """Nearest grid index and signed sub-cell offset (``|r| <= 1/(2N)``) of each point."""
    y = np.mod(points, 1.0)
    j = np.rint(y * N).astype(np.intp)
    r = y - j / N
    j %= N
    return j, r


def _taylor_terms(c: np.ndarray, N: int, rmax: float, extra: int = 0,
                  rtol: float = 1e-17) -> int:
    """Rows needed so that derivatives ``0..extra`` are summed to round-off.

    Mode ``n`` contributes at most ``|c_n| (2 pi n rmax)**K / K!`` to the
    remainder after ``K`` terms.
    """
    mag = np.abs(c).reshape(-1, c.shape[-1]).max(axis=0)
    kn = 2 * np.pi * wavenumbers(N)
    z = kn * rmax
    needed = 1
    for o in range(extra + 1):
        term = mag * kn**o
        total = term.sum()
        if total == 0.0:
            continue
        K = TAYLOR_TERMS
        for m in range(1, TAYLOR_TERMS):
            term = term * z / m
            if term.sum() <= rtol * total:
                K = m
                break
        needed = max(needed, K)
    return needed + extra


@lru_cache(maxsize=64)
def _taylor_symbols(N: int, nterms: int) -> np.ndarray:
    """Rows ``(2 pi i n)^m / m!`` with the Nyquist entry dropped for odd ``m``."""
    ik = 2j * np.pi * wavenumbers(N)
    rows = np.empty((nterms, N // 2 + 1), dtype=complex)
    rows[0] = 1.0
    for m in range(1, nterms):
        rows[m] = rows[m - 1] * ik / m
    out = rows.copy()
    out[1::2, -1] = 0.0
    out.setflags(write=False)
    return out


def _taylor_stack(values: np.ndarray, extra: int = 0, rmax: float | None = None,
                  coeffs: np.ndarray | None = None) -> np.ndarray:
    """Grid samples of ``d^m f / m!``, shape ``(K+extra,) + values.shape``.

    ``K`` is chosen from the spectrum so that the Taylor sum over offsets up
    to ``rmax`` (default half a cell) reproduces the interpolant to round-off.
    ``coeffs`` may supply the unnormalized ``rfft`` of ``values`` directly.
    """
    c = np.fft.rfft(values, axis=-1) if coeffs is None else coeffs
    N = 2 * (c.shape[-1] - 1)
    if rmax is None:
        rmax = 0.5 / N
    nterms = _taylor_terms(c, N, rmax, extra)
    sym = _taylor_symbols(N, nterms).reshape((nterms,) + (1,) * (c.ndim - 1) + (-1,))
    return np.fft.irfft(sym * c[None], n=N, axis=-1)


def _taylor_eval(stack: np.ndarray, points: np.ndarray, offset=0):
    """Evaluate the interpolant (or its derivative of order ``offset``) at ``points``.

    Each point is anchored at its nearest grid node and the Taylor series in
    the sub-cell offset is summed by Horner's rule.  ``points`` must have the
    batch shape of ``stack`` (or be 1-D for an unbatched stack).  A tuple of
    offsets returns a tuple of results sharing one gather.
    """
    N = stack.shape[-1]
    batch = stack.shape[1:-1]
    j, r = _anchor(points, N)
    out_shape = np.broadcast_shapes(batch + (1,), j.shape)
    j = np.broadcast_to(j, out_shape)
    r = np.broadcast_to(r, out_shape).ravel()
    flat_stack = stack.reshape(stack.shape[0], -1)
    if out_shape == batch + (N,) and np.array_equal(j, np.broadcast_to(np.arange(N), out_shape)):
        g = flat_stack
    else:
        base = (np.arange(int(np.prod(batch, dtype=int))) * N).reshape(batch + (1,))
        g = flat_stack[:, (base + j).ravel()]
    offsets = offset if isinstance(offset, tuple) else (offset,)
    results = []
    for o in offsets:
        rows = g[o:]
        if o:
            # d^(m+o) f / m! = S_(m+o) * (m+o)! / m!
            m = np.arange(rows.shape[0])
            scale = np.ones(rows.shape[0])
            for i in range(1, o + 1):
                scale *= m + i
            rows = rows * scale[:, None]
        acc = rows[-1].copy()
        for m in range(rows.shape[0] - 2, -1, -1):
            acc *= r
            acc += rows[m]
        results.append(acc.reshape(out_shape))
    return tuple(results) if isinstance(offset, tuple) else results[0]


def _compose_array(values: np.ndarray, points: np.ndarray,
                   coeffs: np.ndarray | None = None) -> np.ndarray:
    """Interpolant of (batched) ``values`` at ``points`` via the grid-anchored Taylor sum.

    The number of terms is fitted to the largest actual sub-cell offset.
    """
    N = values.shape[-1] if coeffs is None else 2 * (coeffs.shape[-1] - 1)
    _, r = _anchor(points, N)
    rmax = float(np.max(np.abs(r))) if r.size else 0.0
    stack = _taylor_stack(values, rmax=rmax, coeffs=coeffs)
    return _taylor_eval(stack, points)


@dataclass(frozen=True, eq=False)
class Field:
    """Real 1-periodic grid function; immutable."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("Field values must be one-dimensional")
        _check_size(v.size)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, fn, N: int) -> "Field":
        return cls(fn(grid(N)))

    @classmethod
    def zeros(cls, N: int) -> "Field":
        return cls(np.zeros(N))

    @classmethod
    def constant(cls, c: float, N: int) -> "Field":
        return cls(np.full(N, float(c)))

    @classmethod
    def from_spectrum(cls, coeffs, N: int) -> "Field":
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (N // 2 + 1,):
            raise ValueError(f"expected {N // 2 + 1} coefficients, got {coeffs.shape}")
        out = cls(_synthesis_array(coeffs, N))
        # keep the exact coefficients so chained multipliers skip a round trip
        c = coeffs.copy()
        c.setflags(write=False)
        out.__dict__["spectrum"] = c
        return out

    @property
    def N(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return grid(self.N)

    @cached_property
    def spectrum(self) -> np.ndarray:
        """Coefficients ``c_n`` for ``n = 0..N/2``."""
        c = _analysis_array(self.values)
        c.setflags(write=False)
        return c

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def mean(self) -> float:
        return float(np.mean(self.values))

    def _coerce(self, other):
        if isinstance(other, Field):
            if other.N != self.N:
                raise ValueError(f"grid mismatch: {self.N} vs {other.N}")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.values - self._coerce(other))

    def __rsub__(self, other):
        return Field(self._coerce(other) - self.values)

    def __mul__(self, scalar):
        if isinstance(scalar, Field):
            raise TypeError("use spectral.product for Field * Field")
        return Field(self.values * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Field(self.values / scalar)

    def __neg__(self):
        return Field(-self.values)

    def __repr__(self):
        return f"Field(N={self.N}, sup={self.sup():.3e})"


@dataclass(frozen=True, eq=False)
class Multiplier:
    """Real even Fourier symbol ``sigma(n)`` sampled at ``n = 0..N/2``."""

    symbol: np.ndarray

    def __post_init__(self):
        s = np.array(self.symbol, dtype=float)
        if s.ndim != 1:
            raise ValueError("symbol must be one-dimensional")
        _check_size(2 * (s.size - 1))
        s.setflags(write=False)
        object.__setattr__(self, "symbol", s)

    @classmethod
    def from_function(cls, fn, N: int) -> "Multiplier":
        return cls(fn(wavenumbers(N)))

    @property
    def N(self) -> int:
        return 2 * (self.symbol.size - 1)

    def __matmul__(self, other: "Multiplier") -> "Multiplier":
        return Multiplier(self.symbol * other.symbol)


def deriv(f: Field, j: int, j_max: int = 8) -> Field:
    """``j``-th spectral derivative; the Nyquist mode is dropped for odd ``j``."""
    if j < 0 or j > j_max:
        raise ValueError(f"derivative order must be in [0, {j_max}], got {j}")
    if j == 0:
        return f
    return Field.from_spectrum(f.spectrum * _deriv_symbol(f.N, j), f.N)


def apply_multiplier(f: Field, m: Multiplier) -> Field:
    if m.N != f.N:
        raise ValueError(f"multiplier built for N={m.N}, field has N={f.N}")
    return Field.from_spectrum(f.spectrum * m.symbol, f.N)


def product(f: Field, g: Field, dealias: bool = True) -> Field:
    """Pointwise product, with 2/3-rule truncation before and after when ``dealias``."""
    if f.N != g.N:
        raise ValueError(f"grid mismatch: {f.N} vs {g.N}")
    return Field(_product_array(f.values, g.values, dealias))


def interpolate(f: Field, points, method: str = "direct") -> np.ndarray:
    """Evaluate the trigonometric interpolant of ``f`` at arbitrary real points.

    ``method="direct"`` sums the Fourier series at every point (O(N*M)).
    ``method="taylor"`` anchors each point at its nearest node and sums a
    Taylor series built from spectral derivatives on the grid; it agrees with
    the direct sum to round-off and is much cheaper when M ~ N.
    """
    pts = np.asarray(points, dtype=float)
    if method == "direct":
        return _direct_eval_array(f.values, pts)
    if method == "taylor":
        return _taylor_eval(_taylor_stack(f.values), pts)
    raise ValueError(f"unknown interpolation method {method!r}")


def sobolev_norm(f: Field, s: int) -> float:
    """``sqrt(sum_{j<=s} int (d^j f)^2 dx)``, computed spectrally."""
    n = wavenumbers(f.N)
    sym = sum((2 * np.pi * n) ** (2 * j) for j in range(s + 1))
    return math.sqrt(_weighted_square_sum(f.spectrum, sym))


def _weighted_square_sum(c: np.ndarray, weights: np.ndarray) -> float:
    # c_n for n = 0..N/2; interior modes appear twice in the full spectrum
    w = np.full(c.shape[-1], 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    return float(np.sum(w * weights * np.abs(c) ** 2))


# --- serialization -----------------------------------------------------------

def _fmt(v: float) -> str:
    return "%.17g" % v


def write_field_csv(f: Field, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "value"])
        for xi, vi in zip(f.x, f.values):
            w.writerow([_fmt(xi), _fmt(vi)])


def read_field_csv(path) -> Field:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != ["x", "value"]:
        raise ValueError(f"{path}: expected header 'x,value'")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    N = len(data)
    _check_size(N)
    if not np.allclose(data[:, 0], grid(N), atol=1e-12):
        raise ValueError(f"{path}: x column is not the uniform grid i/{N}")
    return Field(data[:, 1])


def write_spectrum_csv(f: Field, path) -> None:
    """Write ``n,re,im`` rows for ``n = 0..N/2`` (negative modes are conjugates)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "re", "im"])
        for n, c in zip(wavenumbers(f.N), f.spectrum):
            w.writerow([int(n), _fmt(c.real), _fmt(c.imag)])


def read_spectrum_csv(path) -> Field:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != ["n", "re", "im"]:
        raise ValueError(f"{path}: expected header 'n,re,im'")
    body = rows[1:]
    N = 2 * (len(body) - 1)
    coeffs = np.zeros(N // 2 + 1, dtype=complex)
    for n, re, im in body:
        coeffs[int(n)] = complex(float(re), float(im))
    return Field.from_spectrum(coeffs, N)


__all__ = [
    "Field", "Multiplier", "grid", "wavenumbers", "dealias_mask", "deriv",
    "apply_multiplier", "product", "interpolate", "sobolev_norm",
    "write_field_csv", "read_field_csv", "write_spectrum_csv", "read_spectrum_csv",
]
