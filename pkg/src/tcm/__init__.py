"""Pseudo-spectral simulator and analysis toolkit for a damped 3D tropical climate model.

The state is (u, v, theta): a divergence-free barotropic velocity, a
compressible first baroclinic velocity and a temperature, on a periodic box.
"""
from .config import ConfigError, RunConfig, dump_config, load_config, parse_config
from .diagnostics import (
    BlowupMonitor,
    DiagnosticsRecord,
    MonotonicityReport,
    coupling_cancellation_residual,
    damping_identity_residual,
    energy_balance_residual,
    monotonicity_report,
    record,
    smallness_functionals,
)
from .driver import RunResult, run
from .experiments import InitialData, InitialDataSpec, amplitude_sweep, make_initial_data, run_small_data_protocol
from .inequalities import gn_solve_kappa, theory_exponents
from .io import read_checkpoint, write_checkpoint, write_series
from .model import ModelParams, NonFiniteError, SimState, cfl_dt, damping_term, nonlinear_rhs, step
from .spectral import (
    Grid,
    SpectralScalarField,
    SpectralVectorField,
    forward_transform,
    inverse_transform,
    lambda_pow,
    leray_project,
    sobolev_norm,
)

__version__ = "0.1.0"
