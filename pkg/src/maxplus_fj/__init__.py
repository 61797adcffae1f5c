"""(max,+) algebra with external addition, and cycle-time analysis of acyclic fork-join networks."""

__version__ = "0.1.0"

from .algebra import (EPS, DimensionError, diag, identity, leq, madd, mp_equal, mp_power, norm, null,
                      oplus, otimes, otimes_vec, phi, psi, scalar_otimes, transpose)
from .analysis import (BoundsReport, GammaEstimate, bounds_report, convergence_profile, estimate_gamma,
                       estimate_limit_matrix, lower_bound_gamma, upper_bound_gamma, upper_bound_matrix)
from .dynamics import TrajectoryResult, build_A, product_family, run_trajectory, step
from .network import (AcyclicityError, CompiledNetwork, NetworkError, NetworkSpec, compile_network,
                      diamond, load_spec, random_dag, tandem, validate_nilpotency)
from .oracle import run_suite
from .service import Deterministic, Erlang, Exponential, ServiceSampler, Uniform, mean_T, variance_vector
