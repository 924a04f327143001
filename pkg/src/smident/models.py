"""The seven forward sensor models, their calibration-state layout,
measurement synthesis, and the min-max normalization used by stage 1.

Frame conventions: ``w`` navigation world frame, ``i`` IMU/body frame,
``s`` sensor frame, ``r`` dedicated sensor reference frame.  ``p_ab`` is
the translation of frame b w.r.t. frame a, ``R_ab`` the rotation of b
w.r.t. a; tangent-space states ``w_ab`` satisfy ``exp(w_ab^) = R_ab``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from enum import Enum

import numpy as np

from . import geometry
from .series import Channel, CoreStateSample, CoreStateSeries, MeasurementSeries


class ModelKind(Enum):
    POSITION = "position"
    INVERSE_POSITION = "inverse_position"
    ROTATION = "rotation"
    INVERSE_ROTATION = "inverse_rotation"
    WORLD_VELOCITY = "world_velocity"
    BODY_VELOCITY = "body_velocity"
    MAGNETOMETER = "magnetometer"

    @property
    def channel(self) -> Channel:
        if self in (ModelKind.ROTATION, ModelKind.INVERSE_ROTATION):
            return Channel.ROTATION
        return Channel.VECTOR


# Catalog order of the selector vectors per channel.
VECTOR_MODELS = (
    ModelKind.POSITION,
    ModelKind.INVERSE_POSITION,
    ModelKind.WORLD_VELOCITY,
    ModelKind.BODY_VELOCITY,
    ModelKind.MAGNETOMETER,
)
ROTATION_MODELS = (ModelKind.ROTATION, ModelKind.INVERSE_ROTATION)

# Models that own sensor-reference slots (shared p_rw / w_rw).
MODELS_WITH_REFERENCE = {
    ModelKind.POSITION: ("p_rw", "w_rw"),
    ModelKind.INVERSE_POSITION: ("p_rw", "w_rw"),
    ModelKind.ROTATION: ("w_rw",),
    ModelKind.INVERSE_ROTATION: ("w_rw",),
}

# Dedicated calibration slots per model.
MODEL_STATES = {
    ModelKind.POSITION: ("pos_p_is",),
    ModelKind.INVERSE_POSITION: ("ipos_p_is", "ipos_w_is"),
    ModelKind.ROTATION: ("rot_w_is",),
    ModelKind.INVERSE_ROTATION: ("irot_w_is",),
    ModelKind.WORLD_VELOCITY: ("wvel_p_is",),
    ModelKind.BODY_VELOCITY: ("bvel_p_is", "bvel_w_is"),
    ModelKind.MAGNETOMETER: ("mag_w_is", "m_w"),
}


def _vec3(x=None) -> np.ndarray:
    return np.zeros(3) if x is None else np.asarray(x, dtype=float).reshape(3)


@dataclass
class ModelStateVector:
    """Stacked calibration/reference states of all candidate models (36-dim).

    The reference translation/rotation (``p_rw``, ``w_rw``) is a single
    slot shared by all models that use a reference frame; every other
    slot is dedicated to one model.
    """

    p_rw: np.ndarray = field(default_factory=_vec3)      # shared reference translation
    w_rw: np.ndarray = field(default_factory=_vec3)      # shared reference rotation (tangent)
    pos_p_is: np.ndarray = field(default_factory=_vec3)
    ipos_p_is: np.ndarray = field(default_factory=_vec3)
    ipos_w_is: np.ndarray = field(default_factory=_vec3)
    rot_w_is: np.ndarray = field(default_factory=_vec3)
    irot_w_is: np.ndarray = field(default_factory=_vec3)
    wvel_p_is: np.ndarray = field(default_factory=_vec3)
    bvel_p_is: np.ndarray = field(default_factory=_vec3)
    bvel_w_is: np.ndarray = field(default_factory=_vec3)
    mag_w_is: np.ndarray = field(default_factory=_vec3)
    m_w: np.ndarray = field(default_factory=lambda: _vec3([0.0, 0.0, 1.0]))

    SLOTS = ("p_rw", "w_rw", "pos_p_is", "ipos_p_is", "ipos_w_is", "rot_w_is",
             "irot_w_is", "wvel_p_is", "bvel_p_is", "bvel_w_is", "mag_w_is", "m_w")
    ROTATION_SLOTS = ("w_rw", "ipos_w_is", "rot_w_is", "irot_w_is", "bvel_w_is", "mag_w_is")

    def __post_init__(self):
        for f in fields(self):
            setattr(self, f.name, _vec3(getattr(self, f.name)))

    def to_array(self) -> np.ndarray:
        return np.concatenate([getattr(self, s) for s in self.SLOTS])

    @classmethod
    def from_array(cls, x: np.ndarray) -> "ModelStateVector":
        x = np.asarray(x, dtype=float).reshape(36)
        return cls(**{s: x[3 * i:3 * i + 3] for i, s in enumerate(cls.SLOTS)})

    def copy(self) -> "ModelStateVector":
        return ModelStateVector.from_array(self.to_array())

    def canonicalize(self) -> "ModelStateVector":
        """Wrap every rotational slot to the canonical range ||w|| <= pi."""
        out = self.copy()
        for s in self.ROTATION_SLOTS:
            w = getattr(out, s)
            angle = np.linalg.norm(w)
            if angle > np.pi:
                wrapped = np.remainder(angle + np.pi, 2.0 * np.pi) - np.pi
                setattr(out, s, w * (wrapped / angle))
        return out


@dataclass
class NormalizationInfo:
    """Per-component affine map (x - offset) / scale into [0, 1]."""

    offset: np.ndarray
    scale: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (x - self.offset) / self.scale

    def invert(self, x: np.ndarray) -> np.ndarray:
        return x * self.scale + self.offset


def normalize_series(values: np.ndarray) -> tuple[np.ndarray, NormalizationInfo]:
    """Per-component min-max mapping of an (n, 3) series into [0, 1].

    Components with zero span map to a constant 0.5 (unit scale recorded),
    so degenerate channels stay bounded instead of blowing up.
    """
    values = np.asarray(values, dtype=float)
    lo = values.min(axis=0)
    hi = values.max(axis=0)
    span = hi - lo
    flat = span <= 0.0
    scale = np.where(flat, 1.0, span)
    offset = np.where(flat, lo - 0.5, lo)
    return (values - offset) / scale, NormalizationInfo(offset, scale)


# ---------------------------------------------------------------------------
# Forward models.


def predict(kind: ModelKind, core: CoreStateSample, x: ModelStateVector) -> np.ndarray:
    """Evaluate one sensor model at a single core state.

    Vector-channel models return the measurement 3-vector; rotation-channel
    models return the predicted rotation in tangent space.
    """
    r_wi = geometry.quat_to_matrix(core.q_wi)
    if kind is ModelKind.POSITION:
        r_rw = geometry.exp_so3(x.w_rw)
        return x.p_rw + r_rw @ (core.p_wi + r_wi @ x.pos_p_is)
    if kind is ModelKind.INVERSE_POSITION:
        r_rw = geometry.exp_so3(x.w_rw)
        r_is = geometry.exp_so3(x.ipos_w_is)
        return -r_is.T @ (r_wi.T @ (r_rw.T @ x.p_rw + core.p_wi) + x.ipos_p_is)
    if kind is ModelKind.ROTATION:
        r_rw = geometry.exp_so3(x.w_rw)
        r_is = geometry.exp_so3(x.rot_w_is)
        return geometry.log_so3(r_rw @ r_wi @ r_is)
    if kind is ModelKind.INVERSE_ROTATION:
        r_rw = geometry.exp_so3(x.w_rw)
        r_is = geometry.exp_so3(x.irot_w_is)
        return geometry.log_so3(r_is.T @ r_wi.T @ r_rw.T)
    if kind is ModelKind.WORLD_VELOCITY:
        return core.v_wi + r_wi @ np.cross(core.omega_i, x.wvel_p_is)
    if kind is ModelKind.BODY_VELOCITY:
        r_is = geometry.exp_so3(x.bvel_w_is)
        return r_is.T @ (r_wi.T @ core.v_wi + np.cross(core.omega_i, x.bvel_p_is))
    if kind is ModelKind.MAGNETOMETER:
        r_is = geometry.exp_so3(x.mag_w_is)
        return r_is.T @ (r_wi.T @ x.m_w)
    raise ValueError(f"unknown model kind {kind}")


def predict_series(kind: ModelKind, core: CoreStateSeries, x: ModelStateVector) -> np.ndarray:
    """Vectorized forward model over a whole series; (n, 3) output.

    Rotation-channel output rows are tangent vectors.
    """
    r_wi = core.rotations()
    if kind is ModelKind.POSITION:
        r_rw = geometry.exp_so3(x.w_rw)
        inner = core.p + np.einsum("nij,j->ni", r_wi, x.pos_p_is)
        return x.p_rw + inner @ r_rw.T
    if kind is ModelKind.INVERSE_POSITION:
        r_rw = geometry.exp_so3(x.w_rw)
        r_is = geometry.exp_so3(x.ipos_w_is)
        inner = np.einsum("nji,j->ni", r_wi, r_rw.T @ x.p_rw) \
            + np.einsum("nji,nj->ni", r_wi, core.p) + x.ipos_p_is
        return -(inner @ r_is)
    if kind is ModelKind.ROTATION:
        r_rw = geometry.exp_so3(x.w_rw)
        r_is = geometry.exp_so3(x.rot_w_is)
        return geometry.log_so3_many(np.einsum("ij,njk,kl->nil", r_rw, r_wi, r_is))
    if kind is ModelKind.INVERSE_ROTATION:
        r_rw = geometry.exp_so3(x.w_rw)
        r_is = geometry.exp_so3(x.irot_w_is)
        m = np.einsum("ij,njk,kl->nil", r_rw, r_wi, r_is)
        return geometry.log_so3_many(m.transpose(0, 2, 1))
    if kind is ModelKind.WORLD_VELOCITY:
        lever = np.cross(core.w, x.wvel_p_is)
        return core.v + np.einsum("nij,nj->ni", r_wi, lever)
    if kind is ModelKind.BODY_VELOCITY:
        r_is = geometry.exp_so3(x.bvel_w_is)
        body_v = np.einsum("nji,nj->ni", r_wi, core.v)
        return (body_v + np.cross(core.w, x.bvel_p_is)) @ r_is
    if kind is ModelKind.MAGNETOMETER:
        r_is = geometry.exp_so3(x.mag_w_is)
        return np.einsum("nji,j->ni", r_wi, x.m_w) @ r_is
    raise ValueError(f"unknown model kind {kind}")


def synthesize(kind: ModelKind, truth: CoreStateSeries, calib: ModelStateVector,
               sigma: float, seed: int) -> MeasurementSeries:
    """Simulate a measurement stream: predict on ground truth, add noise.

    Position and velocity kinds get additive per-axis Gaussian noise of
    std ``sigma``.  Rotation kinds get a right-multiplied axis-angle
    perturbation and the magnetometer vector is rotated by one, both with
    per-axis std ``sigma / sqrt(3)`` (``sigma`` is the angle magnitude).
    """
    if sigma < 0.0:
        raise ValueError("sigma must be >= 0")
    rng = np.random.default_rng(seed)
    pred = predict_series(kind, truth, calib)
    n = len(truth)
    if kind.channel is Channel.ROTATION:
        rot = geometry.exp_so3_many(pred)
        if sigma > 0.0:
            noise = geometry.exp_so3_many(rng.standard_normal((n, 3)) * sigma / np.sqrt(3.0))
            rot = rot @ noise
        quats = geometry.matrix_to_quat_many(rot)
        return MeasurementSeries(Channel.ROTATION, truth.t.copy(), quats)
    if kind is ModelKind.MAGNETOMETER:
        if sigma > 0.0:
            noise = geometry.exp_so3_many(rng.standard_normal((n, 3)) * sigma / np.sqrt(3.0))
            pred = np.einsum("nij,nj->ni", noise, pred)
        return MeasurementSeries(Channel.VECTOR, truth.t.copy(), pred)
    values = pred + sigma * rng.standard_normal((n, 3))
    return MeasurementSeries(Channel.VECTOR, truth.t.copy(), values)


def default_calibration(with_reference: bool = False) -> ModelStateVector:
    """Ground-truth calibration used by the simulation experiments.

    The position-sensor lever arm and the optional reference frame match
    the values of the published calibration study; the remaining slots
    are fixed, moderately exciting defaults.
    """
    w_is = np.array([0.12, -0.2, 0.3])
    m_w = np.array([0.5, -0.15, 0.85])
    x = ModelStateVector(
        pos_p_is=[0.3, 0.5, 1.0],
        ipos_p_is=[0.3, 0.5, 1.0],
        ipos_w_is=w_is,
        rot_w_is=w_is,
        irot_w_is=w_is,
        wvel_p_is=[0.3, 0.5, 1.0],
        bvel_p_is=[0.3, 0.5, 1.0],
        bvel_w_is=w_is,
        mag_w_is=w_is,
        m_w=m_w / np.linalg.norm(m_w),
    )
    if with_reference:
        x.p_rw = _vec3([10.0, 0.0, 0.0])
        x.w_rw = _vec3([0.0, 0.8727, 0.0])
    return x
