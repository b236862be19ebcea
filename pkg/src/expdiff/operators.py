"""Metric operators of the right-invariant H^k metric and their conjugates.

``A_k = sum_{j<=k} (-1)^j d^{2j}`` is the Fourier multiplier with symbol
``sigma_k(n) = sum_{j<=k} (2 pi n)^{2j}``.  The conjugated derivatives
``D^n(phi, v) = (d^n (v o phi^-1)) o phi`` are evaluated by the chain-rule
recursion ``D^1 = v'/phi'``, ``D^{n+1} = (D^n)'/phi'`` so that no inverse of
``phi`` is needed.
"""
from __future__ import annotations

import numpy as np

from .diffeo import Diffeo
from .spectral import (
    Field,
    Multiplier,
    _deriv_array,
    _weighted_square_sum,
    apply_multiplier,
    dealias_mask,
    wavenumbers,
)

K_MAX = 4


def _check_order(k: int, allow_zero: bool = True) -> int:
    k = int(k)
    lo = 0 if allow_zero else 1
    if not lo <= k <= K_MAX:
        raise ValueError(f"metric order k must be in [{lo}, {K_MAX}], got {k}")
    return k


def a_k_symbol(N: int, k: int) -> np.ndarray:
    n2 = (2 * np.pi * wavenumbers(N)) ** 2
    return sum(n2**j for j in range(k + 1))


def a_k_multiplier(N: int, k: int) -> Multiplier:
    return Multiplier(a_k_symbol(N, _check_order(k)))


def a_k_apply(u: Field, k: int) -> Field:
    return apply_multiplier(u, a_k_multiplier(u.N, k))


def a_k_inverse(u: Field, k: int) -> Field:
    """Apply ``A_k^{-1}``; the identity for ``k = 0``."""
    return apply_multiplier(u, Multiplier(1.0 / a_k_symbol(u.N, _check_order(k))))


def _b_k_rfft(u: np.ndarray, k: int, dealias: bool = True) -> np.ndarray:
    """Unnormalized ``rfft`` of ``B_k(u) = -2u' A_k u + A_k(u u') - u A_k u'``.

    Factors are formed in spectral space so that each is transformed once;
    with ``dealias`` they are truncated to ``|n| <= N/3`` before the pointwise
    products and the result is truncated again.
    """
    N = u.shape[-1]
    sym = a_k_symbol(N, k)
    ik = 2j * np.pi * wavenumbers(N)
    ik[-1] = 0.0
    uh = np.fft.rfft(u, axis=-1)
    if dealias:
        uh = uh * dealias_mask(N)
    u_t, du, au, adu = (
        np.fft.irfft(h, n=N, axis=-1) for h in (uh, ik * uh, sym * uh, sym * ik * uh)
    )
    out = (
        -2.0 * np.fft.rfft(du * au, axis=-1)
        + sym * np.fft.rfft(u_t * du, axis=-1)
        - np.fft.rfft(u_t * adu, axis=-1)
    )
    if dealias:
        out = out * dealias_mask(N)
    return out


def _b_k_array(u: np.ndarray, k: int, dealias: bool = True) -> np.ndarray:
    return np.fft.irfft(_b_k_rfft(u, k, dealias), n=u.shape[-1], axis=-1)


def b_k_apply(u: Field, k: int, dealias: bool = True) -> Field:
    """The quadratic operator ``-2u' A_k u + A_k(u u') - u A_k u'``."""
    return Field(_b_k_array(u.values, _check_order(k), dealias))


def _d_n_arrays(f: np.ndarray, v: np.ndarray, n: int) -> list[np.ndarray]:
    """``[D^1, ..., D^n]`` for displacement ``f`` and field ``v`` (batched)."""
    inv_slope = 1.0 / (1.0 + _deriv_array(f, 1))
    out = []
    d = v
    for _ in range(n):
        d = _deriv_array(d, 1) * inv_slope
        out.append(d)
    return out


def d_n(phi: Diffeo, v: Field, n: int) -> Field:
    """Conjugated derivative ``D^n(phi, v) = (d^n (v o phi^-1)) o phi``."""
    if not 1 <= n <= 2 * K_MAX:
        raise ValueError(f"derivative order must be in [1, {2 * K_MAX}], got {n}")
    return Field(_d_n_arrays(phi.f.values, v.values, n)[-1])


def _conj_a_k_array(f: np.ndarray, v: np.ndarray, k: int) -> np.ndarray:
    if k == 0:
        return v.copy()
    ds = _d_n_arrays(f, v, 2 * k)
    out = v.copy()
    for j in range(1, k + 1):
        out = out + (-1) ** j * ds[2 * j - 1]
    return out


def conj_a_k(phi: Diffeo, v: Field, k: int) -> Field:
    """``(A_k (v o phi^-1)) o phi = v + sum_j (-1)^j D^{2j}(phi, v)``."""
    return Field(_conj_a_k_array(phi.f.values, v.values, _check_order(k)))


def _momentum_array(f: np.ndarray, v: np.ndarray, k: int) -> np.ndarray:
    slope = 1.0 + _deriv_array(f, 1)
    return _conj_a_k_array(f, v, k) * slope**2


def momentum_density(phi: Diffeo, v: Field, k: int) -> Field:
    """``I_k(phi, v) = conj_a_k(phi, v, k) * (phi')^2``; constant along geodesics."""
    return Field(_momentum_array(phi.f.values, v.values, _check_order(k)))


def energy(u: Field, k: int) -> float:
    """``<u, u>_k = sum_{j<=k} int (d^j u)^2 dx``, evaluated on the spectrum."""
    return _weighted_square_sum(u.spectrum, a_k_symbol(u.N, _check_order(k)))


__all__ = [
    "K_MAX", "a_k_symbol", "a_k_multiplier", "a_k_apply", "a_k_inverse",
    "b_k_apply", "d_n", "conj_a_k", "momentum_density", "energy",
]
