"""CSV stream formats, report serialization, and trajectory configs.

Core-state CSV: ``t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz``.
Measurement CSV: ``t,mx,my,mz`` (vector channel) or ``t,qw,qx,qy,qz``
(rotation channel).  Plain decimal point, UTF-8, LF line endings; floats
are written with shortest round-trip repr so re-serializing parsed data
is byte-identical.

Reports and manifests are flat YAML documents (key-value text) written
with a fixed style so that load -> dump round trips byte-identically.
"""

from __future__ import annotations

import csv
import math
from typing import Sequence

import numpy as np
import yaml

from .calibrate import CalibrationResult
from .errors import CsvFormatError
from .health import HealthCriterion, HealthVerdict
from .identify import Stage1Result
from .models import ModelKind, ModelStateVector
from .series import Channel, CoreStateSeries, MeasurementSeries
from .trajectory import LissajousParams

CORE_HEADER = ["t", "px", "py", "pz", "vx", "vy", "vz",
               "qw", "qx", "qy", "qz", "wx", "wy", "wz"]
MEAS_VECTOR_HEADER = ["t", "mx", "my", "mz"]
MEAS_ROTATION_HEADER = ["t", "qw", "qx", "qy", "qz"]


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_rows(path, header: Sequence[str], rows: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _read_rows(path, header: Sequence[str]) -> np.ndarray:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise CsvFormatError(1, "empty file") from None
        if [h.strip() for h in first] != list(header):
            raise CsvFormatError(1, f"expected header {','.join(header)}")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CsvFormatError(line_no, f"expected {len(header)} columns, got {len(row)}")
            try:
                parsed = [float(v) for v in row]
            except ValueError as exc:
                raise CsvFormatError(line_no, str(exc)) from None
            if not all(math.isfinite(v) for v in parsed):
                raise CsvFormatError(line_no, "non-finite value")
            rows.append(parsed)
    if not rows:
        raise CsvFormatError(2, "no data rows")
    return np.asarray(rows, dtype=float)


def write_core_csv(path, series: CoreStateSeries) -> None:
    rows = np.hstack([series.t[:, None], series.p, series.v, series.q, series.w])
    _write_rows(path, CORE_HEADER, rows)


def read_core_csv(path) -> CoreStateSeries:
    data = _read_rows(path, CORE_HEADER)
    t = data[:, 0]
    rate = 1.0 / float(np.median(np.diff(t))) if t.size > 1 else 0.0
    return CoreStateSeries(t, data[:, 1:4], data[:, 4:7], data[:, 7:11],
                           data[:, 11:14], rate)


def write_meas_csv(path, meas: MeasurementSeries) -> None:
    header = MEAS_ROTATION_HEADER if meas.channel is Channel.ROTATION else MEAS_VECTOR_HEADER
    rows = np.hstack([meas.t[:, None], meas.values])
    _write_rows(path, header, rows)


def read_meas_csv(path) -> MeasurementSeries:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        try:
            first = next(csv.reader(fh))
        except StopIteration:
            raise CsvFormatError(1, "empty file") from None
    header = [h.strip() for h in first]
    if header == MEAS_VECTOR_HEADER:
        channel = Channel.VECTOR
    elif header == MEAS_ROTATION_HEADER:
        channel = Channel.ROTATION
    else:
        raise CsvFormatError(1, "unrecognized measurement header")
    data = _read_rows(path, header)
    return MeasurementSeries(channel, data[:, 0], data[:, 1:])


# ---------------------------------------------------------------------------
# Key-value reports.


def _vec(x) -> list[float]:
    return [float(v) for v in np.asarray(x).ravel()]


def write_report(path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        yaml.safe_dump(doc, fh, sort_keys=False, default_flow_style=False)


def read_report(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return yaml.safe_load(fh)


def state_vector_to_dict(x: ModelStateVector) -> dict:
    return {slot: _vec(getattr(x, slot)) for slot in ModelStateVector.SLOTS}


def state_vector_from_dict(d: dict) -> ModelStateVector:
    return ModelStateVector(**{slot: np.asarray(d[slot], float)
                               for slot in ModelStateVector.SLOTS})


def stage1_report(result: Stage1Result, verdict: HealthVerdict,
                  provenance: dict | None = None) -> dict:
    doc = {
        "report": "stage1_identification",
        "channel": result.channel.value,
        "selected": result.selected.value,
        "selectors": _vec(result.b_final),
        "delta_b": float(result.delta_b),
        "residual_rmse": float(result.residual_rmse),
        "loss_norm": float(result.loss_norm),
        "loss_pos": float(result.loss_pos),
        "loss_std": float(result.loss_std),
        "loss_vec": float(result.loss_vec),
        "loss_rot": float(result.loss_rot),
        "iterations": int(result.iterations),
        "converged": bool(result.converged),
        "states": state_vector_to_dict(result.x_m_final),
        "health": {
            "accepted": bool(verdict.accepted),
            "failed_criteria": [c.value for c in verdict.failed_criteria],
        },
    }
    if provenance:
        doc["provenance"] = provenance
    return doc


def stage1_from_report(doc: dict) -> tuple[Stage1Result, HealthVerdict]:
    channel = Channel(doc["channel"])
    result = Stage1Result(
        channel=channel,
        b_final=np.asarray(doc["selectors"], float),
        selected=ModelKind(doc["selected"]),
        delta_b=float(doc["delta_b"]),
        x_m_final=state_vector_from_dict(doc["states"]),
        residual_rmse=float(doc["residual_rmse"]),
        loss_norm=float(doc["loss_norm"]),
        loss_pos=float(doc["loss_pos"]),
        loss_std=float(doc["loss_std"]),
        loss_vec=float(doc["loss_vec"]),
        loss_rot=float(doc["loss_rot"]),
        iterations=int(doc["iterations"]),
        converged=bool(doc["converged"]),
    )
    verdict = HealthVerdict(
        accepted=bool(doc["health"]["accepted"]),
        failed_criteria=[HealthCriterion(c) for c in doc["health"]["failed_criteria"]],
    )
    return result, verdict


def calibration_report(result: CalibrationResult, provenance: dict | None = None) -> dict:
    doc = {
        "report": "stage2_calibration",
        "model": result.kind.value,
        "states": {k: _vec(v) for k, v in result.states.items()},
        "reference_required": bool(result.reference_required),
        "reference_residual_norm": float(result.reference_residual_norm),
        "rmse_per_axis": _vec(result.rmse_per_axis),
        "rotation_series_error": (None if result.rotation_series_error is None
                                  else float(result.rotation_series_error)),
        "iterations": int(result.iterations),
        "converged": bool(result.converged),
    }
    if provenance:
        doc["provenance"] = provenance
    return doc


# ---------------------------------------------------------------------------
# Trajectory configs (key-value tree under configs/trajectories/).


def params_to_dict(name: str, params: LissajousParams) -> dict:
    return {
        "name": name,
        "amplitudes": _vec(params.amplitudes),
        "frequencies": _vec(params.frequencies),
        "phases": _vec(params.phases),
        "att_amplitudes": _vec(params.att_amplitudes),
        "att_frequencies": _vec(params.att_frequencies),
        "duration": float(params.duration),
        "rate_hz": float(params.rate_hz),
        "seed": int(params.seed),
    }


def params_from_dict(d: dict) -> tuple[str, LissajousParams]:
    return d["name"], LissajousParams(
        amplitudes=np.asarray(d["amplitudes"], float),
        frequencies=np.asarray(d["frequencies"], float),
        phases=np.asarray(d["phases"], float),
        att_amplitudes=np.asarray(d["att_amplitudes"], float),
        att_frequencies=np.asarray(d["att_frequencies"], float),
        duration=float(d["duration"]),
        rate_hz=float(d["rate_hz"]),
        seed=int(d["seed"]),
    )


def write_trajectory_config(path, entries: Sequence[tuple[str, LissajousParams]]) -> None:
    doc = {"trajectories": [params_to_dict(name, p) for name, p in entries]}
    write_report(path, doc)


def load_trajectory_config(path) -> list[tuple[str, LissajousParams]]:
    doc = read_report(path)
    if not isinstance(doc, dict) or "trajectories" not in doc:
        raise ValueError(f"{path}: expected a 'trajectories' list")
    return [params_from_dict(d) for d in doc["trajectories"]]
