"""Synthetic Lissajous core-state trajectories, noise injection, and
time synchronization of state/measurement streams.

Positions follow component-wise ``A_k sin(f_k t + phi_k)``; attitude is a
roll/pitch/yaw (ZYX) sinusoid composition with the analytic body rate.
Every generated trajectory is checked against the published motion
envelope (position range 3.5 m, speed 3.5 m/s, tilt 30 deg, rate
3.2 rad/s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import geometry
from .errors import EmptyIntersection, EnvelopeViolation, ZeroVariance
from .models import ModelKind
from .series import CoreStateSeries, MeasurementSeries

# Published trajectory envelope (checked after generation).
POSITION_RANGE_M = 3.5
MAX_SPEED_MPS = 3.5
MAX_TILT_RAD = math.radians(30.0)
MAX_BODY_RATE = 3.2

# Default sampling: sized so the full 70-case low-noise suite runs in
# minutes on one desktop core.
DEFAULT_CORE_RATE_HZ = 200.0
DEFAULT_MEAS_RATE_HZ = 50.0
DEFAULT_DURATION_S = 30.0

# Gyro white-noise density of a BMI055-class MEMS IMU, deg/s/sqrt(Hz).
GYRO_NOISE_DENSITY_DEG = 0.014


@dataclass
class LissajousParams:
    """Parameter set for one closed-form trajectory."""

    amplitudes: np.ndarray        # (3,) position amplitudes, m
    frequencies: np.ndarray       # (3,) position angular frequencies, rad/s
    phases: np.ndarray            # (3,) position phases, rad
    att_amplitudes: np.ndarray    # (3,) roll/pitch/yaw amplitudes, rad
    att_frequencies: np.ndarray   # (3,) roll/pitch/yaw angular frequencies, rad/s
    duration: float               # s
    rate_hz: float                # Hz
    seed: int = 0

    def __post_init__(self):
        for name in ("amplitudes", "frequencies", "phases",
                     "att_amplitudes", "att_frequencies"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))

    def at_rate(self, rate_hz: float, duration: float | None = None) -> "LissajousParams":
        """Same trajectory resampled at a different rate/duration."""
        return replace(self, rate_hz=rate_hz,
                       duration=self.duration if duration is None else duration)


@dataclass
class NoiseProfile:
    """1-sigma noise settings for core states and per-sensor measurements.

    ``sigma_rot`` is the total axis-angle magnitude of the orientation
    perturbation; each tangent axis receives ``sigma_rot / sqrt(3)``.
    ``sigma_omega`` is per-sample (discrete) gyro noise.  Rotation-type
    measurement sigmas (rotation, inverse rotation, magnetometer) are
    angles in radians; the rest are additive in channel units.
    """

    sigma_p: float = 0.0
    sigma_v: float = 0.0
    sigma_rot: float = 0.0
    sigma_omega: float = 0.0
    meas_sigmas: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        for name in ("sigma_p", "sigma_v", "sigma_rot", "sigma_omega"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        for kind, sigma in self.meas_sigmas.items():
            if sigma < 0.0:
                raise ValueError(f"measurement sigma for {kind} must be >= 0")

    @classmethod
    def realistic(cls, rate_hz: float = DEFAULT_CORE_RATE_HZ, seed: int = 0) -> "NoiseProfile":
        """The realistic 1-sigma setup used throughout the experiments."""
        return cls(
            sigma_p=0.1,
            sigma_v=0.05,
            sigma_rot=math.radians(2.0),
            sigma_omega=math.radians(GYRO_NOISE_DENSITY_DEG) * math.sqrt(rate_hz),
            meas_sigmas={
                ModelKind.POSITION: 0.3,
                ModelKind.INVERSE_POSITION: 0.3,
                ModelKind.ROTATION: math.radians(3.0),
                ModelKind.INVERSE_ROTATION: math.radians(3.0),
                ModelKind.WORLD_VELOCITY: 0.05,
                ModelKind.BODY_VELOCITY: 0.05,
                ModelKind.MAGNETOMETER: math.radians(6.0),
            },
            seed=seed,
        )

    @classmethod
    def quiet(cls, seed: int = 0) -> "NoiseProfile":
        """All-zero profile; perturbation becomes the identity."""
        return cls(seed=seed)


def _euler_zyx_to_quat(roll, pitch, yaw) -> np.ndarray:
    """Vectorized q = qz(yaw) * qy(pitch) * qx(roll), scalar first."""
    cr, sr = np.cos(roll / 2), np.sin(roll / 2)
    cp, sp = np.cos(pitch / 2), np.sin(pitch / 2)
    cy, sy = np.cos(yaw / 2), np.sin(yaw / 2)
    return np.stack([
        cy * cp * cr + sy * sp * sr,
        cy * cp * sr - sy * sp * cr,
        cy * sp * cr + sy * cp * sr,
        sy * cp * cr - cy * sp * sr,
    ], axis=-1)


def generate_lissajous(params: LissajousParams) -> CoreStateSeries:
    """Closed-form core-state trajectory with analytic velocity/body rate."""
    if params.duration <= 0.0 or params.rate_hz <= 0.0:
        raise ValueError("duration and rate must be positive")
    n = int(round(params.duration * params.rate_hz)) + 1
    t = np.arange(n) / params.rate_hz

    arg = np.outer(t, params.frequencies) + params.phases
    p = params.amplitudes * np.sin(arg)
    v = params.amplitudes * params.frequencies * np.cos(arg)

    att_arg = np.outer(t, params.att_frequencies)
    roll, pitch, yaw = (params.att_amplitudes * np.sin(att_arg)).T
    droll, dpitch, dyaw = (params.att_amplitudes * params.att_frequencies
                           * np.cos(att_arg)).T

    q = _euler_zyx_to_quat(roll, pitch, yaw)

    # ZYX Euler rates mapped into the body frame.
    sph, cph = np.sin(roll), np.cos(roll)
    sth, cth = np.sin(pitch), np.cos(pitch)
    w = np.stack([
        droll - dyaw * sth,
        dpitch * cph + dyaw * cth * sph,
        -dpitch * sph + dyaw * cth * cph,
    ], axis=-1)

    _check_envelope(p, v, roll, pitch, yaw, w)
    return CoreStateSeries(t, p, v, q, w, params.rate_hz)


def _check_envelope(p, v, roll, pitch, yaw, w) -> None:
    eps = 1e-9
    span = (p.max(axis=0) - p.min(axis=0)).max()
    if span > POSITION_RANGE_M + eps:
        raise EnvelopeViolation(f"position range {span:.3f} m exceeds {POSITION_RANGE_M}")
    speed = np.linalg.norm(v, axis=1).max()
    if speed > MAX_SPEED_MPS + eps:
        raise EnvelopeViolation(f"max speed {speed:.3f} m/s exceeds {MAX_SPEED_MPS}")
    tilt = max(np.abs(roll).max(), np.abs(pitch).max(), np.abs(yaw).max())
    if tilt > MAX_TILT_RAD + eps:
        raise EnvelopeViolation(f"attitude {math.degrees(tilt):.2f} deg exceeds 30 deg")
    rate = np.linalg.norm(w, axis=1).max()
    if rate > MAX_BODY_RATE + eps:
        raise EnvelopeViolation(f"angular rate {rate:.3f} rad/s exceeds {MAX_BODY_RATE}")


def perturb_core_states(truth: CoreStateSeries, noise: NoiseProfile) -> CoreStateSeries:
    """Additive Gaussian noise on p/v/omega; right-multiplied rotation noise.

    All four noise blocks are drawn in a fixed order regardless of which
    sigmas are zero, so changing one sigma never reshuffles another
    block's samples.
    """
    rng = np.random.default_rng(noise.seed)
    n = len(truth)
    dp = rng.standard_normal((n, 3))
    dv = rng.standard_normal((n, 3))
    drot = rng.standard_normal((n, 3))
    dw = rng.standard_normal((n, 3))

    p = truth.p + noise.sigma_p * dp
    v = truth.v + noise.sigma_v * dv
    w = truth.w + noise.sigma_omega * dw
    if noise.sigma_rot > 0.0:
        per_axis = axis_sigma_from_angle(noise.sigma_rot)
        rots = truth.rotations() @ geometry.exp_so3_many(per_axis * drot)
        q = geometry.matrix_to_quat_many(rots)
    else:
        q = truth.q.copy()
    return CoreStateSeries(truth.t.copy(), p, v, q, w, truth.rate_hz)


def sigma_from_snr(series_component: np.ndarray, snr: float) -> float:
    """Noise sigma such that lambda(x) / sigma == snr.

    ``lambda`` is the population standard deviation of the component.
    """
    if snr <= 0.0:
        raise ValueError("snr must be positive")
    x = np.asarray(series_component, dtype=float)
    if x.size < 2:
        raise ValueError("series must have at least two samples")
    lam = float(np.sqrt(np.mean((x - x.mean()) ** 2)))
    if lam <= 1e-12 * (1.0 + abs(float(x.mean()))):
        raise ZeroVariance("component has zero variance; SNR-scaled sigma undefined")
    return lam / snr


def axis_sigma_from_angle(alpha: float) -> float:
    """Per-axis tangent sigma of an axis-angle magnitude with equal axis effect."""
    if alpha < 0.0:
        raise ValueError("angle must be >= 0")
    return alpha / math.sqrt(3.0)


def series_angle_std(tangent: np.ndarray) -> float:
    """Overall angular variation of a rotation series in tangent space.

    Combines the per-axis population standard deviations into a single
    axis-angle magnitude (Euclidean norm over the three axes), the
    rotational analogue of a component's lambda for SNR scaling.
    """
    x = np.asarray(tangent, dtype=float)
    var = np.mean((x - x.mean(axis=0)) ** 2, axis=0)
    return float(np.sqrt(var.sum()))


def synchronize(core: CoreStateSeries, meas: MeasurementSeries,
                tolerance: float) -> tuple[CoreStateSeries, MeasurementSeries]:
    """Pair measurements with their nearest core samples within tolerance.

    Greedy in measurement time order; each core sample is claimed at most
    once; equidistant neighbors resolve to the earlier core sample.
    Unmatched points on either stream are dropped.
    """
    if tolerance <= 0.0:
        raise ValueError("tolerance must be positive")
    tc, tm = core.t, meas.t
    nc = tc.size
    used = np.zeros(nc, dtype=bool)
    pos = np.searchsorted(tc, tm)
    core_idx, meas_idx = [], []
    for j in range(tm.size):
        t = tm[j]
        left, right = pos[j] - 1, int(pos[j])
        best = -1
        # walk outward in distance order until past the tolerance window
        while left >= 0 or right < nc:
            d_left = t - tc[left] if left >= 0 else np.inf
            d_right = tc[right] - t if right < nc else np.inf
            if d_left <= d_right:
                i, d = left, d_left
                left -= 1
            else:
                i, d = right, d_right
                right += 1
            if d > tolerance:
                break
            if not used[i]:
                best = i
                break
        if best >= 0:
            used[best] = True
            core_idx.append(best)
            meas_idx.append(j)
    if not core_idx:
        raise EmptyIntersection("no core/measurement pairs within tolerance")
    ci = np.asarray(core_idx)
    mi = np.asarray(meas_idx)
    order = np.argsort(mi, kind="stable")
    return core.subset(ci[order]), meas.subset(mi[order])


# ---------------------------------------------------------------------------
# Canonical trajectory catalog.
#
# Ten fixed parameter sets: position frequencies are small coprime integer
# ratios, phases spread over [0, pi/2], all inside the published envelope.

_CANONICAL = [
    # amplitudes,            freq ratio, scale, phases (x pi/2),   att amplitudes,     att frequencies
    # Attitude frequencies put the peak body rate in the 2.3-3.1 rad/s
    # band: the rotational excitation is what separates the world/body
    # velocity models and makes the lever arms observable.
    ([1.50, 1.30, 1.10], (1, 2, 3), 0.60, (0.00, 0.33, 0.67), [0.44, 0.38, 0.50], [3.60, 4.60, 3.10]),
    ([1.60, 1.20, 1.00], (2, 3, 5), 0.36, (0.17, 0.50, 0.83), [0.50, 0.42, 0.36], [3.70, 2.70, 4.60]),
    ([1.70, 1.10, 0.90], (1, 3, 4), 0.50, (0.33, 0.67, 0.00), [0.38, 0.50, 0.44], [2.60, 4.40, 3.50]),
    ([1.30, 1.20, 0.95], (3, 4, 5), 0.38, (0.50, 0.17, 0.83), [0.46, 0.34, 0.48], [4.70, 3.70, 2.50]),
    ([1.65, 1.45, 0.80], (1, 2, 5), 0.42, (0.67, 0.00, 0.33), [0.36, 0.48, 0.42], [5.30, 2.40, 3.30]),
    ([1.40, 1.25, 1.05], (2, 3, 4), 0.45, (0.83, 0.33, 0.17), [0.48, 0.40, 0.34], [2.50, 4.10, 5.70]),
    ([1.55, 1.35, 0.85], (1, 3, 5), 0.42, (0.08, 0.42, 0.75), [0.42, 0.46, 0.38], [4.40, 2.60, 4.00]),
    ([1.45, 1.15, 0.90], (2, 5, 7), 0.30, (0.25, 0.58, 0.92), [0.34, 0.44, 0.50], [3.30, 5.10, 2.70]),
    ([1.35, 1.30, 0.95], (3, 5, 7), 0.28, (0.42, 0.75, 0.08), [0.50, 0.36, 0.46], [4.00, 4.50, 2.50]),
    ([1.60, 1.05, 0.95], (1, 4, 5), 0.40, (0.58, 0.92, 0.25), [0.40, 0.50, 0.44], [2.70, 3.20, 4.60]),
]


def canonical_trajectories(duration: float = DEFAULT_DURATION_S,
                           rate_hz: float = DEFAULT_CORE_RATE_HZ) -> list[tuple[str, LissajousParams]]:
    """The ten versioned trajectory parameter sets used by all sweeps."""
    out = []
    for i, (amp, ratio, scale, ph, att_amp, att_freq) in enumerate(_CANONICAL):
        params = LissajousParams(
            amplitudes=np.array(amp),
            frequencies=scale * np.array(ratio, dtype=float),
            phases=(math.pi / 2.0) * np.array(ph),
            att_amplitudes=np.array(att_amp),
            att_frequencies=np.array(att_freq),
            duration=duration,
            rate_hz=rate_hz,
            seed=1000 + i,
        )
        out.append((f"traj{i:02d}", params))
    return out
