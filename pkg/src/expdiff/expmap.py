"""Riemannian exponential map, its differential, and the shooting logarithm."""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .diffeo import Diffeo, _chart_shift
from .errors import NoConvergence
from .geodesic import SolverConfig, _flow
from .spectral import Field, grid

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ShootingConfig:
    """Gauss-Newton shooting parameters.

    The unknowns are the ``M`` real Fourier coefficients of ``v`` with
    ``|n| <= (M-1)/2``.
    """

    M: int = 33
    newton_tol: float = 1e-12
    max_newton: int = 20
    fd_step: float = 1e-5
    max_halvings: int = 10
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.M < 1 or self.M % 2 == 0:
            raise ValueError(f"M must be a positive odd integer, got {self.M}")
        if 3 * self.M > self.solver.N:
            raise ValueError(f"M={self.M} exceeds N/3 for N={self.solver.N}")
        if not 1e-7 <= self.fd_step <= 1e-4:
            raise ValueError(f"fd_step must lie in [1e-7, 1e-4], got {self.fd_step}")


def _resolve(v0: Field, k, cfg: SolverConfig | None) -> SolverConfig:
    if cfg is None:
        cfg = SolverConfig(N=v0.N, k=1 if k is None else k)
    elif k is not None and k != cfg.k:
        cfg = dataclasses.replace(cfg, k=k)
    if cfg.k < 1:
        raise ValueError("the exponential map requires k >= 1")
    if v0.N != cfg.N:
        raise ValueError(f"v0 has N={v0.N}, config expects N={cfg.N}")
    return cfg


def _endpoints(V: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    """Time-1 displacements for a batch of initial velocities (rows of ``V``)."""
    f, _, _ = _flow(V, 1.0, cfg)
    return f


def exp_map(v0: Field, k: int | None = None, cfg: SolverConfig | None = None) -> Diffeo:
    """``Exp_k(v0) = phi(1; v0)``."""
    cfg = _resolve(v0, k, cfg)
    return Diffeo(Field(_endpoints(v0.values, cfg)), cfg.slope_floor)


def _central_differences(v0: np.ndarray, directions: np.ndarray, steps: np.ndarray,
                         cfg: SolverConfig) -> np.ndarray:
    V = np.concatenate([v0 + steps[:, None] * directions, v0 - steps[:, None] * directions])
    f = _endpoints(V, cfg)
    n = len(directions)
    return (f[:n] - f[n:]) / (2.0 * steps[:, None])


def d_exp(v0: Field, dv: Field, k: int | None = None, cfg: SolverConfig | None = None,
          fd_step: float = 1e-5) -> Field:
    """Directional derivative of ``Exp_k`` at ``v0`` along ``dv`` by central differences.

    The perturbation has sup-norm ``fd_step``.
    """
    cfg = _resolve(v0, k, cfg)
    scale = dv.sup()
    if scale == 0.0:
        return Field.zeros(v0.N)
    h = np.array([fd_step / scale])
    return Field(_central_differences(v0.values, dv.values[None], h, cfg)[0])


def shooting_basis(M: int, N: int) -> np.ndarray:
    """Rows ``1, cos(2 pi x), sin(2 pi x), ..., cos(2 pi m x), sin(2 pi m x)`` with ``m = (M-1)/2``."""
    x = grid(N)
    rows = [np.ones(N)]
    for n in range(1, (M - 1) // 2 + 1):
        rows.append(np.cos(2 * np.pi * n * x))
        rows.append(np.sin(2 * np.pi * n * x))
    return np.array(rows)


def band_differential(v0: Field, k: int | None = None, cfg: ShootingConfig | None = None
                      ) -> np.ndarray:
    """``d_{v0} Exp_k`` restricted to the shooting band, in band coordinates.

    Columns are finite-difference directional derivatives along the basis
    modes, projected back onto the band by least squares; at ``v0 = 0`` the
    result is the identity.
    """
    cfg = cfg or ShootingConfig(solver=SolverConfig(N=v0.N))
    solver = _resolve(v0, k, cfg.solver)
    basis = shooting_basis(cfg.M, v0.N)
    J = _central_differences(v0.values, basis, np.full(cfg.M, cfg.fd_step), solver).T
    coords, *_ = np.linalg.lstsq(basis.T, J, rcond=None)
    return coords


class NewtonStep(NamedTuple):
    iter: int
    residual: float
    step_factor: float


class ShootingResult(NamedTuple):
    v: Field
    residual: float
    trace: list
    jacobian: np.ndarray


def shoot(psi: Diffeo, k: int | None = None, cfg: ShootingConfig | None = None) -> ShootingResult:
    """Gauss-Newton shooting for ``v`` in the band with ``Exp_k(v) = psi``.

    Jacobian columns are directional derivatives of ``Exp_k`` along the basis
    modes; steps are damped by halving until the sup residual decreases.
    ``trace`` rows record the residual at each accepted iterate and the step
    factor that produced it.
    """
    cfg = cfg or ShootingConfig(solver=SolverConfig(N=psi.N))
    solver = cfg.solver if k is None else dataclasses.replace(cfg.solver, k=k)
    if solver.k < 1:
        raise ValueError("the logarithm requires k >= 1")
    if psi.N != solver.N:
        raise ValueError(f"target has N={psi.N}, config expects N={solver.N}")
    basis = shooting_basis(cfg.M, psi.N)
    target = psi.f.values

    def residual(p):
        r = _endpoints(p @ basis, solver) - target
        return r - _chart_shift(r[0])

    # d_0 Exp is the identity, so the displacement itself is the first guess
    p, *_ = np.linalg.lstsq(basis.T, target, rcond=None)
    r = residual(p)
    res = float(np.max(np.abs(r)))
    trace = [NewtonStep(0, res, 0.0)]
    J = np.eye(psi.N, cfg.M)
    for it in range(1, cfg.max_newton + 1):
        if res < cfg.newton_tol:
            break
        h = np.full(cfg.M, cfg.fd_step)
        J = _central_differences(p @ basis, basis, h, solver).T
        delta, *_ = np.linalg.lstsq(J, -r, rcond=None)
        alpha = 1.0
        for _ in range(cfg.max_halvings + 1):
            p_try = p + alpha * delta
            r_try = residual(p_try)
            res_try = float(np.max(np.abs(r_try)))
            if res_try < res:
                break
            alpha *= 0.5
        else:
            raise NoConvergence(
                f"line search failed at iteration {it} (residual {res:.3e}); "
                "target is likely outside the shooting basin",
                trace,
            )
        p, r, res = p_try, r_try, res_try
        trace.append(NewtonStep(it, res, alpha))
        log.debug("shooting iter %d: residual %.3e (step %.4g)", it, res, alpha)
    if res >= cfg.newton_tol:
        raise NoConvergence(
            f"residual {res:.3e} above newton_tol={cfg.newton_tol:.1e} after "
            f"{cfg.max_newton} iterations",
            trace,
        )
    return ShootingResult(Field(p @ basis), res, trace, J)


def log_map(psi: Diffeo, k: int | None = None, cfg: ShootingConfig | None = None) -> Field:
    """Local inverse of ``Exp_k`` near the identity, by shooting."""
    return shoot(psi, k, cfg).v


__all__ = [
    "ShootingConfig", "ShootingResult", "NewtonStep", "exp_map", "d_exp",
    "log_map", "shoot", "shooting_basis", "band_differential",
]
