"""Predictive probabilities of Gibbs-type priors: exact, Monte Carlo and asymptotic."""
from .approximation import (EXPANDED, RATIONAL, Form, PredictiveWeights, beta_n,
                            first_order_weights, second_order_weights)
from .errors import DomainError, NumericalError, OutOfRangeError, PrecisionError
from .models import (NGG, PD, Generic, GibbsModel, LogValue, Stable, pd_log_V, phi_h,
                     stable_log_V)
from .montecarlo import (VEstimate, log_mean_exp, mc_log_V, mc_log_V_ngg, mc_new_type_weight,
                         mc_weight)
from .ngg_series import incomplete_gamma, ngg_log_V_series, ngg_predictive_weight_exact
from .predictive import (MC, Backend, FileSource, PartitionState, Trajectory, UrnSource,
                         ZetaSource, exact_weights, observe, predictive_weights, run_trajectory,
                         sample_next)
from .quadrature import quadrature_V
from .rng import RngStream
from .stable import (sample_exp_tilted_stable, sample_poly_tilted_stable,
                     sample_positive_stable, sample_zeta, stable_pdf)

__all__ = [name for name in dir() if not name.startswith("_")]
