"""Numerical laboratory for the logarithmic Schrödinger equation under quadratic potentials."""
from .errors import (ConfigError, CoverageError, InvalidArgument, LogNLSError, LossOfIntegrability,
                     MassMismatch, NoGaussonError, NumericalBlowup, ResolutionError, SingularityError,
                     ToleranceNotMet)
from .gaussian_dynamics import (GaussianSeries, GaussianState, galilean_boost, integrate_gaussian,
                                tau_from_width, tensor_product, widths_from_tau)
from .grid import Grid, RescaledFrame, WaveField, default_epsilon
from .potentials import PotentialSpec, eval_potential, gausson_profile, gausson_width
from .solver import l2_stability_probe, run, scaling_probe, split_step, split_step_rescaled
from .tau_ode import (TauParams, TauTrajectory, first_integral_residual, free_rate_check,
                      integrate_tau, mu_infinity_integral, mu_infinity_limit)

__version__ = "0.1.0"
