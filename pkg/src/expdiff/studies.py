"""Convergence and invariant sweeps shared by the CLI and the acceptance suite."""
from __future__ import annotations

import dataclasses
import math

import numpy as np

from .geodesic import SolverConfig, euler_residual, eulerian, integrate, monitor
from .operators import energy
from .spectral import Field, _direct_eval_array, grid


def invariant_report(v0: Field, T: float, cfg: SolverConfig, stride: int = 1):
    """Monitor rows along a trajectory plus the maximal drifts.

    Returns ``(rows, summary)`` where ``summary`` holds the relative energy
    drift and the maxima of the other monitor columns.
    """
    traj = integrate(v0, T, cfg, stride=stride)
    rows = [monitor(s, v0, cfg.k) for s in traj]
    e0 = energy(v0, cfg.k)
    drift = max(abs(r.energy - e0) for r in rows)
    summary = {
        "energy_drift": drift / e0 if e0 > 0 else drift,
        "momentum_err": max(r.momentum_err for r in rows),
        "slope_err": max(r.slope_err for r in rows),
        "mean_err": max(r.mean_err for r in rows),
    }
    return rows, summary


def max_euler_residual(v0: Field, T: float, cfg: SolverConfig) -> float:
    """Largest residual of the Eulerian equation over interior trajectory times."""
    us = [eulerian(s) for s in integrate(v0, T, cfg)]
    return max(
        euler_residual(us[i - 1], us[i], us[i + 1], cfg.dt, cfg.k).sup()
        for i in range(1, len(us) - 1)
    )


def temporal_order(v0: Field, T: float, dts, cfg: SolverConfig):
    """Observed RK4 order from successive step halvings.

    With endpoints ``phi_i`` at step sizes ``dts`` (each half the previous),
    ``e_i = |phi_i - phi_{i+1}|_sup`` and the orders are ``log2(e_i / e_{i+1})``.
    Returns ``(differences, orders)``.
    """
    ends = []
    for dt in dts:
        run = dataclasses.replace(cfg, dt=dt)
        ends.append(integrate(v0, T, run, stride=10**9)[-1].phi.f.values)
    diffs = [float(np.max(np.abs(a - b))) for a, b in zip(ends, ends[1:])]
    orders = [math.log(a / b) / math.log(dts[i] / dts[i + 1])
              for i, (a, b) in enumerate(zip(diffs, diffs[1:]))]
    return diffs, orders


def spatial_errors(make_v0, T: float, grids, ref_N: int, cfg: SolverConfig):
    """Sup error of ``phi(T)`` on each grid against a finer reference grid.

    ``make_v0(N)`` builds the initial data on an ``N``-point grid; the
    reference displacement is evaluated at coarse nodes by its Fourier series.
    """
    def endpoint(N):
        run = dataclasses.replace(cfg, N=N)
        return integrate(make_v0(N), T, run, stride=10**9)[-1].phi.f.values

    ref = endpoint(ref_N)
    return {N: float(np.max(np.abs(_direct_eval_array(ref, grid(N)) - endpoint(N))))
            for N in grids}
