"""Fast attitude reconstruction from gyro data by Chebyshev-Picard iteration
of the Rodrigues vector."""

from .attitude import AttitudeTrack, attitude_error, chain_intervals, quat_compose, quat_from_rodrigues
from .baseline import quat_from_rotation_vector, run_two_sample, two_sample_update
from .chebyshev import ChebSeries3, coeffs_by_cosine_sampling, eval_basis, eval_series
from .coning import ConingParams, ErrorModel, synthesize_batch, true_coeff_oracle
from .errors import ConvergenceConditionViolated, NonFinite, SingularRodrigues, SingularSystem
from .fitting import FitConfig, GyroBatch, SampleKind, fit_angular_velocity
from .iteration import IterConfig, Mode, ReconstructionResult, picard_step, reconstruct, truncation_bound, weighted_term_count

__version__ = "0.1.0"
