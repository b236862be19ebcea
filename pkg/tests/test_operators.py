import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from expdiff import (
    Diffeo, Field, a_k_apply, a_k_inverse, b_k_apply, compose, conj_a_k, d_n, deriv, energy,
    invert, momentum_density, product,
)
from expdiff.spectral import grid
from test_diffeo import smooth_diffeo
from test_spectral import band_field


def test_a_k_on_sine():
    # built from exact coefficients: grid round-off in high modes would be
    # amplified by sigma_4(32) ~ 1e21
    c = np.zeros(33, dtype=complex)
    c[2] = -0.5j
    u = Field.from_spectrum(c, 64)
    for k in range(5):
        sigma = sum((4 * np.pi) ** (2 * j) for j in range(k + 1))
        assert np.max(np.abs(a_k_apply(u, k).values - sigma * u.values)) < 1e-13 * sigma


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 4))
def test_a_k_round_trip(seed, k):
    u = band_field(64, 31, seed)
    assert np.max(np.abs(a_k_inverse(a_k_apply(u, k), k).values - u.values)) < 1e-13 * u.sup()


def test_a_k_rejects_bad_order():
    with pytest.raises(ValueError):
        a_k_apply(Field.zeros(16), 5)


def test_b_k_against_closed_form_k1():
    # u = a sin(2 pi x): A_1 u = (1 + w^2) u, u u' = (a^2 w / 2) sin(2 w x)
    N, a, w = 64, 0.3, 2 * np.pi
    x = grid(N)
    u = Field(a * np.sin(w * x))
    s1, s2 = 1 + w**2, 1 + 4 * w**2
    du = a * w * np.cos(w * x)
    expected = (-2 * du * s1 * u.values + s2 * 0.5 * a**2 * w * np.sin(2 * w * x)
                - u.values * s1 * du)
    assert np.max(np.abs(b_k_apply(u, 1).values - expected)) < 1e-12 * np.max(np.abs(expected))


def test_b_k_matches_product_path():
    N, k = 96, 2
    u = band_field(N, 12, 4, scale=0.1)
    du = deriv(u, 1)
    au, adu = a_k_apply(u, k), a_k_apply(du, k)
    expected = (-2.0 * product(du, au).values + a_k_apply(product(u, du), k).values
                - product(u, adu).values)
    assert np.max(np.abs(b_k_apply(u, k).values - expected)) < 1e-10 * np.max(np.abs(expected))


def test_d_n_at_identity_is_derivative():
    u = band_field(64, 10, 9)
    idn = Diffeo.identity(64)
    for n in (1, 2, 5):
        assert np.max(np.abs(d_n(idn, u, n).values - deriv(u, n).values)) < 1e-9 * deriv(u, n).sup()
    with pytest.raises(ValueError):
        d_n(idn, u, 9)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_d_n_matches_compose_path(n):
    # oracle: (d^n (v o phi^-1)) o phi through explicit inversion and composition
    N = 256
    phi = smooth_diffeo(N, 1, 0.3)
    v = band_field(N, 6, 2, scale=0.05)
    w = compose(v, invert(phi))
    oracle = compose(deriv(w, n), phi).values
    assert np.max(np.abs(d_n(phi, v, n).values - oracle)) < 1e-9 * np.max(np.abs(oracle))


def test_momentum_at_identity():
    u = band_field(64, 8, 1)
    assert np.allclose(momentum_density(Diffeo.identity(64), u, 2).values,
                       a_k_apply(u, 2).values, rtol=0, atol=1e-9 * a_k_apply(u, 2).sup())
    assert np.array_equal(conj_a_k(Diffeo.identity(64), u, 0).values, u.values)


def test_energy_matches_quadrature():
    # trapezoid rule is spectrally exact for band-limited periodic integrands
    N = 128
    u = band_field(N, 20, 6, scale=0.2)
    for k in range(3):
        quad = sum(np.mean(deriv(u, j).values ** 2) for j in range(k + 1))
        assert energy(u, k) == pytest.approx(quad, rel=1e-12)
