"""Orientation-preserving circle diffeomorphisms stored as periodic displacements.

A diffeomorphism is represented by the lift ``phi(x) = x + f(x)`` with ``f``
1-periodic.  Stored lifts are normalized so that ``|f(0)| < 1/2``; lifts
differing by an integer describe the same circle map.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidDiffeo, NoConvergence
from .spectral import (
    Field,
    _analysis_array,
    _compose_array,
    _deriv_array,
    _taylor_eval,
    _taylor_stack,
    grid,
)

SLOPE_FLOOR = 1e-6
INVERSION_TOL = 1e-12
MAX_ITER = 60


def _chart_shift(f0):
    """Integer to subtract from a displacement so that ``f(0)`` lies in [-1/2, 1/2)."""
    return np.floor(np.asarray(f0) + 0.5)


@dataclass(frozen=True, eq=False)
class Diffeo:
    """Circle diffeomorphism ``id + f``.

    Construction normalizes the lift into the chart ``|f(0)| < 1/2`` (so an
    input with ``0 < f(0) < 1`` is accepted and shifted) and raises
    :class:`InvalidDiffeo` unless ``1 + f'`` exceeds ``slope_floor`` on the grid.
    """

    f: Field
    slope_floor: float = SLOPE_FLOOR

    def __post_init__(self):
        f = self.f if isinstance(self.f, Field) else Field(self.f)
        if not np.all(np.isfinite(f.values)):
            raise InvalidDiffeo("displacement contains non-finite values")
        shift = float(_chart_shift(f.values[0]))
        if shift:
            f = f - shift
        object.__setattr__(self, "f", f)
        if self.min_slope <= self.slope_floor:
            raise InvalidDiffeo(
                f"min slope {self.min_slope:.3e} is not above the floor {self.slope_floor:.1e}"
            )

    @classmethod
    def identity(cls, N: int) -> "Diffeo":
        return cls(Field.zeros(N))

    @classmethod
    def from_lift(cls, phi_values, slope_floor: float = SLOPE_FLOOR) -> "Diffeo":
        phi_values = np.asarray(phi_values, dtype=float)
        return cls(Field(phi_values - grid(phi_values.size)), slope_floor)

    @property
    def N(self) -> int:
        return self.f.N

    @cached_property
    def min_slope(self) -> float:
        return float(1.0 + _deriv_array(self.f.values, 1).min())

    def lift(self) -> np.ndarray:
        """Lift values ``x_i + f(x_i)`` at the grid points."""
        return grid(self.N) + self.f.values

    def __repr__(self):
        return f"Diffeo(N={self.N}, sup|f|={self.f.sup():.3e}, min_slope={self.min_slope:.4f})"


def compose(u: Field, phi: Diffeo) -> Field:
    """Grid samples of ``u o phi`` (right translation of ``u`` by ``phi``)."""
    if u.N != phi.N:
        raise ValueError(f"grid mismatch: {u.N} vs {phi.N}")
    return Field(_compose_array(u.values, phi.lift()))


def compose_diffeos(phi: Diffeo, psi: Diffeo) -> Diffeo:
    """The diffeomorphism ``phi o psi``, built on lifts."""
    g = psi.f.values + _compose_array(phi.f.values, psi.lift())
    return Diffeo(Field(g), min(phi.slope_floor, psi.slope_floor))


def slope(phi: Diffeo) -> Field:
    """``phi' = 1 + f'``."""
    return Field(1.0 + _deriv_array(phi.f.values, 1))


def _invert_array(f: np.ndarray, tol: float = INVERSION_TOL,
                  max_iter: int = MAX_ITER) -> np.ndarray:
    """Displacement of the inverse of ``id + f`` for a (batch of) displacement(s).

    Solves ``y + f(y) = x_i`` at every node by Newton's method safeguarded by
    a bracket, falling back to bisection when a Newton step leaves it.  One
    extra Newton step is taken after the tolerance is met.
    """
    N = f.shape[-1]
    x = grid(N)
    c = _analysis_array(f)
    # |f(y) - c_0| <= sum over the full spectrum of |c_n|, n != 0
    spread = 2.0 * np.abs(c[..., 1:]).sum(axis=-1, keepdims=True)
    lo = x - (c[..., :1].real + spread) - 1e-12
    hi = x - (c[..., :1].real - spread) + 1e-12
    stack = _taylor_stack(f, extra=1)
    y = x - f
    for _ in range(max_iter):
        fy, dfy = _taylor_eval(stack, y, (0, 1))
        g = y + fy - x
        converged = np.max(np.abs(g)) < tol
        lo = np.where(g < 0, y, lo)
        hi = np.where(g > 0, y, hi)
        gp = 1.0 + dfy
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = y - g / gp
        ok = (gp > 0) & (newton >= lo) & (newton <= hi)
        y = np.where(ok, newton, 0.5 * (lo + hi))
        if converged:
            break
    else:
        raise NoConvergence(
            f"diffeomorphism inversion stalled after {max_iter} iterations "
            f"(residual {np.max(np.abs(g)):.2e}); slope is near-degenerate"
        )
    ginv = y - x
    return ginv - _chart_shift(ginv[..., :1])


def invert(phi: Diffeo, tol: float = INVERSION_TOL, max_iter: int = MAX_ITER) -> Diffeo:
    """The inverse diffeomorphism, normalized into the chart ``|f(0)| < 1/2``."""
    return Diffeo(Field(_invert_array(phi.f.values, tol, max_iter)), phi.slope_floor)


def write_diffeo_csv(phi: Diffeo, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "phi"])
        for xi, pi in zip(grid(phi.N), phi.lift()):
            w.writerow(["%.17g" % xi, "%.17g" % pi])


def read_diffeo_csv(path, slope_floor: float = SLOPE_FLOOR) -> Diffeo:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != ["x", "phi"]:
        raise ValueError(f"{path}: expected header 'x,phi'")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    N = len(data)
    if not np.allclose(data[:, 0], grid(N), atol=1e-12):
        raise ValueError(f"{path}: x column is not the uniform grid i/{N}")
    return Diffeo.from_lift(data[:, 1], slope_floor)


def sup_distance(phi: Diffeo, psi: Diffeo) -> float:
    """Sup-norm distance between chart-normalized lifts."""
    d = phi.f.values - psi.f.values
    d = d - _chart_shift(d[0])
    return float(np.max(np.abs(d)))


__all__ = [
    "Diffeo", "compose", "compose_diffeos", "slope", "invert", "sup_distance",
    "write_diffeo_csv", "read_diffeo_csv", "SLOPE_FLOOR", "INVERSION_TOL",
]
