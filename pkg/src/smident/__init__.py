"""Gray-box sensor model identification for robot localization streams.

Given a synchronized stream of vehicle core states and a measurement
stream from an unknown sensor, this toolkit decides which of seven
candidate sensor models produced the stream (stage 1), validates the
selection with a false-positive-rejecting health metric, estimates the
model's calibration states on raw data, and determines whether a
dedicated sensor reference frame must be modeled (stage 2).
"""

from .calibrate import (CalibrationResult, Stage2Options, determine_reference_frame,
                        loss_ref, refine_calibration, rotation_series_error)
from .errors import (CsvFormatError, EmptyInput, EmptyIntersection,
                     EnvelopeViolation, InvalidRotation, ModelHasNoReference,
                     NonUnitQuaternion, SmidentError, SolverDiverged,
                     WrongChannel, ZeroVariance)
from .geometry import exp_so3, geodesic_error, log_so3, quat_to_matrix, skew
from .health import (HealthCriterion, HealthThresholds, HealthVerdict,
                     ThresholdGrid, evaluate, precision_recall_sweep)
from .identify import (ObjectiveWeights, SolverOptions, Stage1Result,
                       assemble_residual, channel_models, loss_norm, loss_pos,
                       loss_rot, loss_std, loss_vec, optimize_stage1, select_model)
from .models import (MODEL_STATES, MODELS_WITH_REFERENCE, ModelKind,
                     ModelStateVector, NormalizationInfo, ROTATION_MODELS,
                     VECTOR_MODELS, default_calibration, normalize_series,
                     predict, predict_series, synthesize)
from .series import Channel, CoreStateSample, CoreStateSeries, MeasurementSeries
from .trajectory import (LissajousParams, NoiseProfile, axis_sigma_from_angle,
                         canonical_trajectories, generate_lissajous,
                         perturb_core_states, sigma_from_snr, synchronize)

__version__ = "0.1.0"
