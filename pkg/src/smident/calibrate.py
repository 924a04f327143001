"""Stage 2: calibration refinement on raw data and reference-frame
determination.

Only the selected model is optimized, initialized from the stage-1
states, against the unnormalized measurement stream.  Rotation-channel
errors are evaluated through rotation matrices so repeated tangent
representations of the same rotation compare as equal.  The
reference-frame decision adds an L1 penalty on the reference states; a
non-vanishing remaining norm means a reference frame must be modeled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import ModelHasNoReference, WrongChannel
from .identify import SMOOTHING_EPS, SolverOptions, Stage1Result, loss_rot
from .models import (MODEL_STATES, MODELS_WITH_REFERENCE, ModelKind,
                     ModelStateVector, predict_series)
from .optim import levenberg_marquardt
from .series import Channel, CoreStateSeries, MeasurementSeries


@dataclass
class Stage2Options:
    """Stage-2 solver settings; the LM budget is inherited from stage 1."""

    solver: SolverOptions = field(default_factory=SolverOptions)
    lambda_rot: float = 50.0     # angle-magnitude guard on optimized rotation states
    lambda_ref: float = 1.0      # reference-frame L1 penalty weight
    ref_threshold: float = 1e-3  # remaining L1 norm above this means "reference required"


@dataclass
class CalibrationResult:
    kind: ModelKind
    states: dict                      # refined slots of the selected model
    reference_required: bool
    reference_residual_norm: float    # ||p_rw||_1 + ||w_rw||_1 at the optimum
    rmse_per_axis: np.ndarray         # (3,) reprojection RMSE in channel units
    rotation_series_error: float | None  # mean geodesic error, rotation channel only
    iterations: int
    converged: bool


def loss_ref(p_rw, omega_rw) -> float:
    """L1 sparsity penalty on the reference frame states."""
    return float(np.abs(np.asarray(p_rw, float)).sum()
                 + np.abs(np.asarray(omega_rw, float)).sum())


def rotation_series_error(tan_a: np.ndarray, tan_b: np.ndarray) -> float:
    """Mean geodesic angle between two tangent-space rotation series.

    Inputs pass through exp() first, so 2*pi-equivalent representations
    of the same rotation contribute zero error.
    """
    ra = geometry.exp_so3_many(np.asarray(tan_a, float))
    rb = geometry.exp_so3_many(np.asarray(tan_b, float))
    rel = np.einsum("nij,nkj->nik", ra, rb)
    return float(np.mean(np.linalg.norm(geometry.log_so3_many(rel), axis=1)))


def _free_slots(kind: ModelKind, with_reference: bool) -> tuple[str, ...]:
    """Optimized slots: dedicated calibration plus the observable reference.

    The reference rotation of the rotation models is unobservable and
    stays fixed during plain refinement; it is only freed (against the
    L1 penalty) when the reference-frame question itself is asked.
    """
    dedicated = MODEL_STATES[kind]
    reference = MODELS_WITH_REFERENCE.get(kind, ())
    if kind in (ModelKind.ROTATION, ModelKind.INVERSE_ROTATION) and not with_reference:
        reference = ()
    return tuple(reference) + dedicated


class _Stage2Problem:
    def __init__(self, kind: ModelKind, core: CoreStateSeries, meas: MeasurementSeries,
                 base_x: ModelStateVector, slots: tuple[str, ...],
                 options: Stage2Options, with_reference_loss: bool):
        self.kind = kind
        self.core = core
        self.slots = slots
        self.base_x = base_x.copy()
        self.options = options
        self.with_reference_loss = with_reference_loss
        self.n = len(core)
        self.sqrt_n = np.sqrt(self.n)
        if kind.channel is Channel.ROTATION:
            self.r_meas = geometry.exp_so3_many(meas.tangent())
            self.meas = None
        else:
            self.meas = meas.values
            self.r_meas = None
        self.rot_slot_set = tuple(s for s in slots if s in ModelStateVector.ROTATION_SLOTS)

    def pack(self, x: ModelStateVector) -> np.ndarray:
        return np.concatenate([getattr(x, s) for s in self.slots])

    def unpack(self, params: np.ndarray) -> ModelStateVector:
        x = self.base_x.copy()
        for i, s in enumerate(self.slots):
            setattr(x, s, params[3 * i:3 * i + 3].copy())
        return x

    def data_residual(self, x: ModelStateVector) -> np.ndarray:
        pred = predict_series(self.kind, self.core, x)
        if self.r_meas is not None:
            r_pred = geometry.exp_so3_many(pred)
            rel = np.matmul(r_pred, self.r_meas.transpose(0, 2, 1))
            return geometry.log_so3_many(rel)
        return pred - self.meas

    def residual(self, params: np.ndarray) -> np.ndarray:
        x = self.unpack(params)
        rows = [(self.data_residual(x) / self.sqrt_n).ravel()]
        eps2 = SMOOTHING_EPS**2
        guards = [np.sqrt(self.options.lambda_rot) * (loss_rot(getattr(x, s)) ** 2 + eps2) ** 0.25
                  for s in self.rot_slot_set]
        if guards:
            rows.append(guards)
        if self.with_reference_loss:
            # One Charbonnier-smoothed row per reference component: the
            # summed squares equal lambda_ref * (||p_rw||_1 + ||w_rw||_1)
            # to within eps, keeping the L1 sparsifying pull while staying
            # differentiable for the finite-difference Jacobian.
            ref = np.concatenate((x.p_rw, x.w_rw))
            rows.append(np.sqrt(self.options.lambda_ref) * (ref**2 + eps2) ** 0.25)
        return np.concatenate(rows)


def _run(kind: ModelKind, core: CoreStateSeries, meas_raw: MeasurementSeries,
         init: Stage1Result, options: Stage2Options,
         with_reference_loss: bool) -> CalibrationResult:
    if init.selected is not kind:
        raise ValueError(f"stage-1 selected {init.selected}, refinement requested {kind}")
    if meas_raw.channel is not kind.channel:
        raise WrongChannel(f"{kind} expects a {kind.channel.value} measurement stream")
    if len(core) != len(meas_raw):
        raise ValueError("core and measurement series must be synchronized (equal length)")

    base_x = init.x_m_final.copy()
    if kind in (ModelKind.ROTATION, ModelKind.INVERSE_ROTATION):
        base_x.w_rw = np.zeros(3)  # unobservable; fixed so w_is is well defined
    slots = _free_slots(kind, with_reference_loss)
    problem = _Stage2Problem(kind, core, meas_raw, base_x, slots, options,
                             with_reference_loss)
    sol = options.solver
    fit = levenberg_marquardt(
        problem.residual, problem.pack(base_x),
        max_iter=sol.max_iter, ftol=sol.ftol, gtol=sol.gtol,
        rel_step=sol.rel_step, abs_step=sol.abs_step)

    x_final = problem.unpack(fit.x)
    data = problem.data_residual(x_final)
    rmse = np.sqrt(np.mean(data ** 2, axis=0))
    rot_err = None
    if kind.channel is Channel.ROTATION:
        rot_err = float(np.mean(np.linalg.norm(data, axis=1)))

    has_reference = kind in MODELS_WITH_REFERENCE
    ref_norm = loss_ref(x_final.p_rw, x_final.w_rw) if has_reference else 0.0
    states = {s: getattr(x_final, s).copy() for s in MODEL_STATES[kind]}
    for s in MODELS_WITH_REFERENCE.get(kind, ()):
        states[s] = getattr(x_final, s).copy()
    return CalibrationResult(
        kind=kind,
        states=states,
        reference_required=ref_norm > options.ref_threshold,
        reference_residual_norm=ref_norm,
        rmse_per_axis=rmse,
        rotation_series_error=rot_err,
        iterations=fit.iterations,
        converged=fit.converged,
    )


def refine_calibration(kind: ModelKind, core: CoreStateSeries, meas_raw: MeasurementSeries,
                       init: Stage1Result, options: Stage2Options | None = None) -> CalibrationResult:
    """Refine the selected model's states on raw data, stage-1 initialized."""
    return _run(kind, core, meas_raw, init, options or Stage2Options(), False)


def determine_reference_frame(kind: ModelKind, core: CoreStateSeries,
                              meas_raw: MeasurementSeries, init: Stage1Result,
                              options: Stage2Options | None = None) -> CalibrationResult:
    """Refinement with the L1 reference penalty; decides if a reference
    frame must be modeled from the remaining reference-state norm."""
    if kind not in MODELS_WITH_REFERENCE:
        raise ModelHasNoReference(f"{kind} has no sensor reference frame states")
    return _run(kind, core, meas_raw, init, options or Stage2Options(), True)
