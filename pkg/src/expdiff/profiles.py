"""Named analytic initial profiles, parsed from strings such as ``sine(1, 0.05)``."""
from __future__ import annotations

import re

import numpy as np

from .spectral import Field, grid

_CALL = re.compile(r"^\s*([a-z][a-z\-]*)\s*\((.*)\)\s*$")


def sine(N: int, m: int = 1, a: float = 0.05) -> Field:
    return Field(a * np.sin(2 * np.pi * m * grid(N)))


def cosine(N: int, m: int = 1, a: float = 0.05) -> Field:
    return Field(a * np.cos(2 * np.pi * m * grid(N)))


def gauss_bump(N: int, x0: float = 0.5, w: float = 0.05, a: float = 0.05) -> Field:
    """Periodized Gaussian ``a sum_m exp(-(x - x0 + m)^2 / (2 w^2))``."""
    x = grid(N)
    d = (x - x0 + 0.5) % 1.0 - 0.5
    reach = int(np.ceil(8 * w)) + 1
    vals = sum(np.exp(-0.5 * ((d + m) / w) ** 2) for m in range(-reach, reach + 1))
    return Field(a * vals)


def random_band(N: int, nmax: int = 8, a: float = 0.05, seed: int = 0) -> Field:
    """Random trigonometric polynomial with modes ``1..nmax`` scaled to sup-norm ``a``."""
    if not 1 <= nmax < N // 2:
        raise ValueError(f"nmax must be in [1, {N // 2 - 1}], got {nmax}")
    rng = np.random.default_rng(seed)
    c = np.zeros(N // 2 + 1, dtype=complex)
    c[1 : nmax + 1] = rng.standard_normal(nmax) + 1j * rng.standard_normal(nmax)
    f = Field.from_spectrum(c, N)
    return f * (a / f.sup())


PROFILES = {
    "sine": (sine, (int, float)),
    "cosine": (cosine, (int, float)),
    "gauss-bump": (gauss_bump, (float, float, float)),
    "random-band": (random_band, (int, float, int)),
}

_AMPLITUDE = {"sine": 1, "cosine": 1, "gauss-bump": 2, "random-band": 1}


def parse_profile(text: str, N: int, seed: int | None = None) -> Field:
    """Build a Field from ``name(arg, ...)``; ``random-band`` may omit its seed."""
    m = _CALL.match(text)
    if not m or m.group(1) not in PROFILES:
        raise ValueError(f"unknown profile {text!r}; expected one of {sorted(PROFILES)}")
    fn, types = PROFILES[m.group(1)]
    raw = [s.strip() for s in m.group(2).split(",") if s.strip()]
    if m.group(1) == "random-band" and len(raw) == 2 and seed is not None:
        raw.append(str(seed))
    if len(raw) != len(types):
        raise ValueError(f"{m.group(1)} takes {len(types)} arguments, got {len(raw)}")
    try:
        args = [t(float(s)) if t is int else t(s) for t, s in zip(types, raw)]
    except ValueError:
        raise ValueError(f"bad arguments in {text!r}") from None
    for t, s in zip(types, raw):
        if t is int and float(s) != int(float(s)):
            raise ValueError(f"expected an integer in {text!r}, got {s}")
    if not args[_AMPLITUDE[m.group(1)]] > 0:
        raise ValueError(f"amplitude must be positive in {text!r}")
    return fn(N, *args)
