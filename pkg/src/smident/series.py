"""Timestamped state and measurement containers.

Series are stored struct-of-arrays for vectorized math; ``sample(i)``
views expose the per-timestep record used by the scalar model equations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import geometry
from .errors import EmptyInput


class Channel(Enum):
    """Measurement payload type: 3-vector samples or rotation samples."""

    VECTOR = "vector"
    ROTATION = "rotation"


@dataclass
class CoreStateSample:
    """One vehicle core state: position, velocity, attitude, body rate."""

    t: float
    p_wi: np.ndarray       # (3,) position of IMU in world, m
    v_wi: np.ndarray       # (3,) velocity in world, m/s
    q_wi: np.ndarray       # (4,) attitude world<-IMU, Hamilton (w, x, y, z)
    omega_i: np.ndarray    # (3,) body angular rate, rad/s


@dataclass
class CoreStateSeries:
    """Time series of core states at (nominally) uniform rate."""

    t: np.ndarray          # (n,)
    p: np.ndarray          # (n, 3)
    v: np.ndarray          # (n, 3)
    q: np.ndarray          # (n, 4)
    w: np.ndarray          # (n, 3)
    rate_hz: float
    _rot: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        if self.t.size == 0:
            raise EmptyInput("core state series is empty")
        if np.any(np.diff(self.t) <= 0.0):
            raise ValueError("core state timestamps must be strictly increasing")
        self.p = np.asarray(self.p, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        self.q = np.asarray(self.q, dtype=float)
        self.w = np.asarray(self.w, dtype=float)

    def __len__(self) -> int:
        return self.t.size

    def sample(self, i: int) -> CoreStateSample:
        return CoreStateSample(float(self.t[i]), self.p[i], self.v[i], self.q[i], self.w[i])

    def rotations(self) -> np.ndarray:
        """(n, 3, 3) attitude matrices R_wi; computed once, then cached."""
        if self._rot is None:
            self._rot = geometry.quat_to_matrix_many(self.q)
        return self._rot

    def subset(self, idx: np.ndarray) -> "CoreStateSeries":
        series = CoreStateSeries(self.t[idx], self.p[idx], self.v[idx],
                                 self.q[idx], self.w[idx], self.rate_hz)
        if self._rot is not None:
            series._rot = self._rot[idx]
        return series


@dataclass
class MeasurementSeries:
    """The unknown sensor stream: 3-vector samples or quaternion samples."""

    channel: Channel
    t: np.ndarray          # (n,)
    values: np.ndarray     # (n, 3) vector channel, (n, 4) rotation channel
    _tangent: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.t.size == 0:
            raise EmptyInput("measurement series is empty")
        want = 4 if self.channel is Channel.ROTATION else 3
        if self.values.ndim != 2 or self.values.shape[1] != want:
            raise ValueError(f"{self.channel.value} channel expects (n, {want}) values")

    def __len__(self) -> int:
        return self.t.size

    def tangent(self) -> np.ndarray:
        """(n, 3) axis-angle samples of a rotation-channel series (cached)."""
        if self.channel is not Channel.ROTATION:
            raise ValueError("tangent() is only defined for the rotation channel")
        if self._tangent is None:
            self._tangent = geometry.quat_to_rotvec_many(self.values)
        return self._tangent

    def subset(self, idx: np.ndarray) -> "MeasurementSeries":
        return MeasurementSeries(self.channel, self.t[idx], self.values[idx])

    def scaled(self, factor: float) -> "MeasurementSeries":
        """Series with all raw samples multiplied by ``factor``."""
        return MeasurementSeries(self.channel, self.t.copy(), self.values * factor)
