import numpy as np
import pytest

from expdiff import Diffeo, Field, NoConvergence, ShootingConfig, SolverConfig, d_exp, exp_map
from expdiff import integrate, log_map, shoot
from expdiff.diffeo import sup_distance
from expdiff.expmap import band_differential, shooting_basis
from expdiff.profiles import gauss_bump, random_band, sine

SOLVER = SolverConfig(N=64, dt=1e-2, k=1)
SHOOT = ShootingConfig(M=9, solver=SOLVER)


def band_velocity(seed, a=0.02, M=9, N=64):
    p = np.random.default_rng(seed).standard_normal(M)
    v = p @ shooting_basis(M, N)
    return Field(a * v / np.max(np.abs(v)))


def test_shooting_config_validation():
    with pytest.raises(ValueError):
        ShootingConfig(M=8, solver=SOLVER)
    with pytest.raises(ValueError):
        ShootingConfig(M=23, solver=SOLVER)
    with pytest.raises(ValueError):
        ShootingConfig(fd_step=1e-3)


def test_shooting_basis_is_orthogonal():
    B = shooting_basis(9, 64)
    G = B @ B.T / 64
    assert np.allclose(G, np.diag([1.0] + [0.5] * 8), atol=1e-14)


def test_exp_of_zero_is_identity():
    assert exp_map(Field.zeros(64), 1, SOLVER).f.sup() == 0.0


def test_exp_requires_positive_order():
    with pytest.raises(ValueError):
        exp_map(Field.zeros(64), 0, SOLVER)


def test_exp_linearizes_to_identity():
    v = gauss_bump(64, 0.4, 0.1, 1.0)
    errs = [(exp_map(eps * v, 1, SOLVER).f - eps * v).sup() / eps for eps in (1e-2, 1e-3)]
    # the remainder is O(eps^2), so err/eps shrinks tenfold
    assert errs[1] < 0.15 * errs[0]


def test_exp_of_scaled_velocity_matches_trajectory():
    v0 = sine(64, 1, 0.05)
    mid = integrate(v0, 0.5, SolverConfig(N=64, dt=5e-3, k=1))[-1]
    assert sup_distance(exp_map(0.5 * v0, 1, SOLVER), mid.phi) < 1e-8


def test_d_exp_at_zero_is_identity():
    dv = random_band(64, 5, 1.0, seed=3)
    assert (d_exp(Field.zeros(64), dv, 1, SOLVER) - dv).sup() < 1e-6
    assert d_exp(Field.zeros(64), Field.zeros(64), 1, SOLVER).sup() == 0.0


def test_d_exp_is_linear():
    v0 = sine(64, 1, 0.05)
    d1, d2 = random_band(64, 4, 1.0, seed=1), random_band(64, 4, 1.0, seed=2)
    lhs = d_exp(v0, 2.0 * d1 - 0.5 * d2, 1, SOLVER)
    rhs = 2.0 * d_exp(v0, d1, 1, SOLVER) - 0.5 * d_exp(v0, d2, 1, SOLVER)
    assert (lhs - rhs).sup() < 1e-5


def test_d_exp_agrees_with_forward_difference():
    v0 = sine(64, 1, 0.05)
    dv = random_band(64, 4, 1.0, seed=5)
    central = d_exp(v0, dv, 1, SOLVER, fd_step=1e-5)
    h = 0.5e-5
    base = exp_map(v0, 1, SOLVER).f
    forward = (exp_map(v0 + h * dv, 1, SOLVER).f - base) / h
    # forward differences carry an O(h) bias; central ones are O(h^2)
    assert (forward - central).sup() < 10 * h


def test_band_differential_at_zero():
    D = band_differential(Field.zeros(64), 1, SHOOT)
    s = np.linalg.svd(D, compute_uv=False)
    assert np.allclose(D, np.eye(9), atol=1e-8)
    assert s.min() > 0.5


def test_log_of_identity_is_zero():
    res = shoot(Diffeo.identity(64), 1, SHOOT)
    assert res.v.sup() == 0.0 and len(res.trace) == 1


@pytest.mark.parametrize("seed", [0, 1])
def test_log_inverts_exp_in_band(seed):
    v0 = band_velocity(seed)
    psi = exp_map(v0, 1, SOLVER)
    res = shoot(psi, 1, SHOOT)
    assert (res.v - v0).sup() < 1e-8 * v0.sup() / 0.02
    assert sup_distance(exp_map(res.v, 1, SOLVER), psi) < SHOOT.newton_tol
    residuals = [s.residual for s in res.trace]
    assert all(b < a for a, b in zip(residuals, residuals[1:]))
    assert np.allclose(log_map(psi, 1, SHOOT).values, res.v.values)


def test_log_reports_no_convergence_with_trace():
    v0 = band_velocity(4, a=0.05)
    psi = exp_map(v0, 1, SOLVER)
    cfg = ShootingConfig(M=9, max_newton=1, newton_tol=1e-30, solver=SOLVER)
    with pytest.raises(NoConvergence) as info:
        shoot(psi, 1, cfg)
    assert len(info.value.trace) >= 1
