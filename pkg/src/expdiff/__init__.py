"""Geodesics of right-invariant Sobolev metrics on the circle diffeomorphism group."""
from .diffeo import (
    Diffeo, compose, compose_diffeos, invert, read_diffeo_csv, slope, sup_distance,
    write_diffeo_csv,
)
from .errors import BlowUp, ConfigError, ExpDiffError, InvalidDiffeo, NoConvergence, ShockFormed
from .expmap import ShootingConfig, ShootingResult, d_exp, exp_map, log_map, shoot
from .geodesic import (
    GeodesicState, MonitorRow, SolverConfig, burgers_oracle, euler_residual, eulerian,
    integrate, monitor, step, vector_field,
)
from .operators import (
    a_k_apply, a_k_inverse, a_k_multiplier, a_k_symbol, b_k_apply, conj_a_k, d_n, energy,
    momentum_density,
)
from .spectral import (
    Field, Multiplier, apply_multiplier, deriv, grid, interpolate, product,
    read_field_csv, read_spectrum_csv, sobolev_norm, write_field_csv, write_spectrum_csv,
)

__version__ = "0.1.0"
