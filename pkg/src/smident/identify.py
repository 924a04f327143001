"""Stage 1: joint soft-Boolean model selection and calibration estimation.

One selector per candidate model is optimized together with the stacked
calibration states against the unknown measurement stream.  Four loss
terms shape the selectors into a one-out-of-many choice: an L1-budget
term, a positivity term, a unit-magnitude term for the magnetometer
field vector, and a standard-deviation term whose optimum is provably
attained only by one-hot selectors.  A magnitude guard keeps tangent
rotation states inside +-pi.

The two measurement channels are fully isolated: 3-vector streams are
matched against the five vector models on per-component [0, 1]
normalized data, rotation streams against the two rotation models in
tangent space (unnormalized; angles are already bounded).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import EmptyInput, WrongChannel
from .models import (ModelKind, ModelStateVector, ROTATION_MODELS,
                     VECTOR_MODELS, normalize_series)
from .optim import levenberg_marquardt
from .series import Channel, CoreStateSeries, MeasurementSeries

# Kink-smoothing scale of the L1-style loss lifts; well above the
# absolute finite-difference step, well below any decision threshold.
SMOOTHING_EPS = 1e-6

# Optimized state slots per channel (order defines parameter packing).
VECTOR_STATE_SLOTS = ("p_rw", "w_rw", "pos_p_is", "ipos_p_is", "ipos_w_is",
                      "wvel_p_is", "bvel_p_is", "bvel_w_is", "mag_w_is", "m_w")
VECTOR_ROT_SLOTS = ("w_rw", "ipos_w_is", "bvel_w_is", "mag_w_is")
ROTATION_STATE_SLOTS = ("w_rw", "rot_w_is", "irot_w_is")
ROTATION_ROT_SLOTS = ROTATION_STATE_SLOTS


def channel_models(channel: Channel) -> tuple[ModelKind, ...]:
    """Candidate catalog (and selector order) of a channel."""
    return ROTATION_MODELS if channel is Channel.ROTATION else VECTOR_MODELS


@dataclass
class ObjectiveWeights:
    """Loss weights; defaults put all initial loss terms in the same range."""

    lambda_p: float = 200.0
    lambda_n: float = 50.0
    lambda_v: float = 100.0
    lambda_s: float = 20.0
    lambda_rot: float = 50.0

    def __post_init__(self):
        for name in ("lambda_p", "lambda_n", "lambda_v", "lambda_s", "lambda_rot"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")


@dataclass
class SolverOptions:
    """Levenberg-Marquardt budget and finite-difference step sizes.

    ``warm_start_iter`` bounds the per-model state pre-fit that runs
    before the joint solve (0 disables it).  Without it the joint
    optimization starts all candidates from zero states, and whichever
    model's states happen to descend first can lock the selector race
    into a wrong basin.
    """

    max_iter: int = 400
    ftol: float = 1e-10
    gtol: float = 1e-10
    rel_step: float = 1e-6
    abs_step: float = 1e-8
    warm_start_iter: int = 60
    # Near-tied selectors sit on a symmetric saddle of the std loss where
    # a Gauss-Newton model is first-order blind; below this gap the solve
    # is restarted from both one-sided sharpenings of the top-2 pair and
    # the lowest-cost outcome wins.
    sharpen_gap: float = 0.35
    sharpen_iter: int = 150


@dataclass
class Stage1Result:
    """Outcome of one identification run.

    The recorded loss terms are the weighted values that enter the
    objective (e.g. ``lambda_s * |std(b) - 1/sqrt(N)|``); the health
    thresholds are defined on this scale.
    """

    channel: Channel
    b_final: np.ndarray
    selected: ModelKind
    delta_b: float
    x_m_final: ModelStateVector
    residual_rmse: float
    loss_norm: float
    loss_pos: float
    loss_std: float
    loss_vec: float
    loss_rot: float
    iterations: int
    converged: bool


# ---------------------------------------------------------------------------
# Loss terms.


def loss_rot(omega) -> float:
    """Angle-magnitude guard: excess of ||omega|| over pi, zero inside."""
    angle = float(np.linalg.norm(omega))
    return angle - np.pi if angle > np.pi else 0.0


def loss_norm(b) -> float:
    """Squared deviation of the selector L1 norm from one."""
    b = np.asarray(b, dtype=float)
    return float((np.abs(b).sum() - 1.0) ** 2)


def loss_pos(b) -> float:
    """L2 norm of the negative selector entries."""
    b = np.asarray(b, dtype=float)
    neg = b[b < 0.0]
    return float(np.linalg.norm(neg)) if neg.size else 0.0


def loss_vec(m_w) -> float:
    """Deviation of the field-vector magnitude from one (squared at assembly)."""
    return float(abs(np.linalg.norm(m_w) - 1.0))


def loss_std(b) -> float:
    """Deviation of the selector sample std from its one-hot value 1/sqrt(N).

    With the L1 budget and positivity in place, std(b) = 1/sqrt(N) holds
    exactly for one-hot selectors and for nothing else.
    """
    b = np.asarray(b, dtype=float)
    n = b.size
    if n < 2:
        raise ValueError("selector vector needs at least two entries")
    return float(abs(b.std(ddof=1) - 1.0 / np.sqrt(n)))


def select_model(b, channel: Channel) -> tuple[ModelKind, float]:
    """Argmax selector hardening; ties resolve to catalog order."""
    b = np.asarray(b, dtype=float)
    catalog = channel_models(channel)
    if b.size != len(catalog):
        raise ValueError(f"selector length {b.size} does not match {channel}")
    order = np.sort(b)[::-1]
    return catalog[int(np.argmax(b))], float(order[0] - order[1])


def _minmax_rows(values: np.ndarray) -> np.ndarray:
    # per-component min-max on a (3, n) array; same policy as
    # normalize_series (constant components pin to 0.5)
    lo = values.min(axis=1)
    hi = values.max(axis=1)
    span = hi - lo
    flat = span <= 0.0
    scale = np.where(flat, 1.0, span)
    offset = np.where(flat, lo - 0.5, lo)
    return (values - offset[:, None]) / scale[:, None]


def _cross_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # cross product of (3, n) stacks
    out = np.empty_like(a)
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]
    return out


def _cross_rows_const(a: np.ndarray, c: np.ndarray) -> np.ndarray:
    # cross product of a (3, n) stack with a constant 3-vector
    out = np.empty_like(a)
    out[0] = a[1] * c[2] - a[2] * c[1]
    out[1] = a[2] * c[0] - a[0] * c[2]
    out[2] = a[0] * c[1] - a[1] * c[0]
    return out


class Stage1Problem:
    """Residual assembly over a synchronized (core, measurement) pair.

    ``meas`` must already be in optimization form: [0, 1]-normalized
    (n, 3) values for the vector channel, tangent vectors for the
    rotation channel.  Model predictions are re-normalized with their own
    min-max on every evaluation so the channels stay in [0, 1] as the
    states move.
    """

    def __init__(self, channel: Channel, core: CoreStateSeries, meas: np.ndarray,
                 weights: ObjectiveWeights, base_x: ModelStateVector | None = None):
        if len(core) == 0:
            raise EmptyInput("no synchronized samples")
        if meas.shape != (len(core), 3):
            raise ValueError("measurement array must be (n, 3) and synchronized")
        self.channel = channel
        self.weights = weights
        self.meas = meas
        self.base_x = (base_x or ModelStateVector()).copy()
        self.n = len(core)
        self.sqrt_n = np.sqrt(self.n)
        self.r_wi = core.rotations()
        if channel is Channel.VECTOR:
            # Hot-path layout: component-major (3, n) arrays.  State-
            # independent parts of the model chains are precomputed, and
            # the per-sample rotations are stacked axis-major so rotating
            # a constant vector through the whole series is one GEMV.
            self.meas = np.ascontiguousarray(meas.T)
            self.p_t = np.ascontiguousarray(core.p.T)
            self.v_t = np.ascontiguousarray(core.v.T)
            self.w_t = np.ascontiguousarray(core.w.T)
            self.p_body = np.ascontiguousarray(
                np.einsum("nji,nj->ni", self.r_wi, core.p).T)
            self.v_body = np.ascontiguousarray(
                np.einsum("nji,nj->ni", self.r_wi, core.v).T)
            self.w_world = np.ascontiguousarray(
                np.einsum("nij,nj->ni", self.r_wi, core.w).T)
            # (3n, 3) blocks: row block a holds component a of all samples
            self.rw_axis = np.ascontiguousarray(
                self.r_wi.transpose(1, 0, 2).reshape(3 * self.n, 3))
            self.rwt_axis = np.ascontiguousarray(
                self.r_wi.transpose(2, 0, 1).reshape(3 * self.n, 3))
        self.state_slots = VECTOR_STATE_SLOTS if channel is Channel.VECTOR else ROTATION_STATE_SLOTS
        self.rot_slots = VECTOR_ROT_SLOTS if channel is Channel.VECTOR else ROTATION_ROT_SLOTS
        self.n_models = len(channel_models(channel))
        self.n_params = 3 * len(self.state_slots) + self.n_models
        self._rot_offsets = [3 * self.state_slots.index(s) for s in self.rot_slots]

    def pack(self, x: ModelStateVector, b: np.ndarray) -> np.ndarray:
        return np.concatenate([x.__dict__[s] for s in self.state_slots] + [np.asarray(b, float)])

    def unpack(self, params: np.ndarray) -> tuple[ModelStateVector, np.ndarray]:
        x = self.base_x.copy()
        for i, s in enumerate(self.state_slots):
            setattr(x, s, params[3 * i:3 * i + 3].copy())
        return x, params[3 * len(self.state_slots):].copy()

    def _loss_rows(self, params: np.ndarray, m_w: np.ndarray | None) -> np.ndarray:
        # Residual lift of the loss terms.  The exact lift sqrt(lambda*L)
        # has an unbounded derivative wherever L touches zero, which is
        # precisely the one-hot optimum the selector losses drive towards;
        # a finite-difference LM provably stalls there.  L_pos, L_std and
        # L_rot therefore enter through a Charbonnier envelope
        # lambda*sqrt(L^2 + eps^2), which keeps their exact-penalty pull
        # (constant-slope, sharp selections) while staying smooth at the
        # finite-difference step scale.  L_norm and the squared L_vec are
        # already quadratic forms and lift exactly.
        w = self.weights
        b = params[3 * len(self.state_slots):]
        rows = np.empty(3 + (1 if m_w is not None else 0) + len(self._rot_offsets))
        rows[0] = np.sqrt(w.lambda_n) * (np.abs(b).sum() - 1.0)
        pos_sq = float(np.sum(np.minimum(b, 0.0) ** 2))
        rows[1] = np.sqrt(w.lambda_p) * (pos_sq + SMOOTHING_EPS**2) ** 0.25
        std_dev = b.std(ddof=1) - 1.0 / np.sqrt(b.size)
        rows[2] = np.sqrt(w.lambda_s) * (std_dev**2 + SMOOTHING_EPS**2) ** 0.25
        k = 3
        if m_w is not None:
            rows[k] = np.sqrt(w.lambda_v) * (np.linalg.norm(m_w) - 1.0)
            k += 1
        for off in self._rot_offsets:
            guard = loss_rot(params[off:off + 3])
            rows[k] = np.sqrt(w.lambda_rot) * (guard**2 + SMOOTHING_EPS**2) ** 0.25
            k += 1
        return rows

    def _m_w(self, params: np.ndarray) -> np.ndarray | None:
        return params[27:30] if self.channel is Channel.VECTOR else None

    def _predict_model(self, k: int, params: np.ndarray) -> np.ndarray:
        """Raw prediction of catalog model ``k`` at ``params``.

        Vector channel returns component-major (3, n); rotation channel
        returns tangent rows (n, 3).
        """
        n = self.n
        if self.channel is Channel.VECTOR:
            if k == 0:
                r_rw = geometry.exp_so3(params[3:6])
                lever = (self.rw_axis @ params[6:9]).reshape(3, n)
                return r_rw @ (self.p_t + lever) + params[0:3, None]
            if k == 1:
                r_rw = geometry.exp_so3(params[3:6])
                r_is = geometry.exp_so3(params[12:15])
                ref = (self.rwt_axis @ (r_rw.T @ params[0:3])).reshape(3, n)
                return r_is.T @ (ref + self.p_body + params[9:12, None]) * -1.0
            if k == 2:
                # R (w x p) == (R w) x (R p) for R in SO(3)
                lever = (self.rw_axis @ params[15:18]).reshape(3, n)
                return self.v_t + _cross_rows(self.w_world, lever)
            if k == 3:
                r_is = geometry.exp_so3(params[21:24])
                return r_is.T @ (self.v_body + _cross_rows_const(self.w_t, params[18:21]))
            if k == 4:
                r_is = geometry.exp_so3(params[24:27])
                return r_is.T @ (self.rwt_axis @ params[27:30]).reshape(3, n)
        else:
            r_rw = geometry.exp_so3(params[0:3])
            if k == 0:
                m = np.matmul(np.matmul(r_rw, self.r_wi), geometry.exp_so3(params[3:6]))
                return geometry.log_so3_many(m)
            if k == 1:
                m = np.matmul(np.matmul(r_rw, self.r_wi), geometry.exp_so3(params[6:9]))
                return geometry.log_so3_many(m.transpose(0, 2, 1))
        raise ValueError(f"model index {k} out of range for {self.channel}")

    def _channel_terms(self, k: int, params: np.ndarray) -> np.ndarray:
        """Model k's contribution channel: normalized (vector) or raw tangent."""
        pred = self._predict_model(k, params)
        return _minmax_rows(pred) if self.channel is Channel.VECTOR else pred

    def _data_rows(self, arr: np.ndarray) -> np.ndarray:
        # flatten to the public sample-major residual layout
        if self.channel is Channel.VECTOR:
            return arr.T.ravel()
        return arr.ravel()

    def residual(self, params: np.ndarray) -> np.ndarray:
        b = params[3 * len(self.state_slots):]
        f_sys = b[0] * self._channel_terms(0, params)
        for k in range(1, self.n_models):
            f_sys += b[k] * self._channel_terms(k, params)
        data = self._data_rows((f_sys - self.meas) / self.sqrt_n)
        return np.concatenate((data, self._loss_rows(params, self._m_w(params))))

    # Which catalog models each packed state slot feeds (by model index).
    _VECTOR_AFFECTS = ((0, 1), (0, 1), (0,), (1,), (1,), (2,), (3,), (3,), (4,), (4,))
    _ROTATION_AFFECTS = ((0, 1), (0,), (1,))

    # State slots fitted during each model's warm start.  The shared
    # reference slots (0, 1) ride with the position model; later models
    # see whatever it wrote there.
    _VECTOR_WARM = ((0, 1, 2), (3, 4), (5,), (6, 7), (8, 9))
    _ROTATION_WARM = ((1,), (2,))

    def warm_start(self, params: np.ndarray, options) -> np.ndarray:
        """Pre-fit every candidate model's own states, one model at a time.

        Each fit minimizes that model's normalized prediction error with
        its selector pinned to one (plus the relevant guard rows), so the
        joint solve starts with all candidates at their individual best
        and the selector race is decided by fit quality, not by which
        states happened to move first.
        """
        if options.warm_start_iter <= 0:
            return params
        params = params.copy()
        n_states = 3 * len(self.state_slots)
        warm = (self._VECTOR_WARM if self.channel is Channel.VECTOR
                else self._ROTATION_WARM)
        for k in range(self.n_models):
            cols = np.concatenate([np.arange(3 * s, 3 * s + 3) for s in warm[k]])
            base = params.copy()
            base[n_states:] = 0.0
            base[n_states + k] = 1.0

            def fun(z, base=base, cols=cols, k=k):
                q = base.copy()
                q[cols] = z
                pred = self._channel_terms(k, q)
                data = self._data_rows((pred - self.meas) / self.sqrt_n)
                return np.concatenate((data, self._loss_rows(q, self._m_w(q))))

            fit = levenberg_marquardt(
                fun, params[cols], max_iter=options.warm_start_iter,
                ftol=options.ftol, gtol=options.gtol,
                rel_step=options.rel_step, abs_step=options.abs_step)
            params[cols] = fit.x
        return params

    @staticmethod
    def _fd_step(value: float, rel_step: float, abs_step: float) -> float:
        h = max(rel_step * abs(value), abs_step)
        return -h if value < 0.0 else h

    def jacobian(self, params: np.ndarray, f0: np.ndarray,
                 rel_step: float = 1e-6, abs_step: float = 1e-8) -> np.ndarray:
        """Structured forward-difference Jacobian.

        Selector columns are analytic in the data block (the system is
        linear in b); each state column only re-evaluates the model terms
        that the state feeds, and only the loss rows its slot enters.
        Matches the dense finite-difference Jacobian up to floating-point
        cancellation.
        """
        w = self.weights
        n_states = 3 * len(self.state_slots)
        n_b = self.n_models
        n_data = 3 * self.n
        affects = (self._VECTOR_AFFECTS if self.channel is Channel.VECTOR
                   else self._ROTATION_AFFECTS)
        b = params[n_states:]
        terms = [self._channel_terms(k, params) for k in range(n_b)]
        jac = np.zeros((f0.size, params.size))

        # loss-row indices within the residual vector
        row_norm = n_data
        row_pos = n_data + 1
        row_std = n_data + 2
        row_vec = n_data + 3 if self.channel is Channel.VECTOR else None
        row_rot0 = (row_vec + 1) if row_vec is not None else row_std + 1
        rot_row_of = {off: row_rot0 + i for i, off in enumerate(self._rot_offsets)}

        def charb(value_sq: float, lam: float) -> float:
            return np.sqrt(lam) * (value_sq + SMOOTHING_EPS**2) ** 0.25

        for j in range(n_states):
            h = self._fd_step(params[j], rel_step, abs_step)
            pj = params.copy()
            pj[j] += h
            delta = None
            for k in affects[j // 3]:
                dk = b[k] * (self._channel_terms(k, pj) - terms[k])
                delta = dk if delta is None else delta + dk
            jac[:n_data, j] = self._data_rows(delta / (h * self.sqrt_n))
            slot_off = 3 * (j // 3)
            if slot_off in rot_row_of:
                r0 = charb(loss_rot(params[slot_off:slot_off + 3]) ** 2, w.lambda_rot)
                r1 = charb(loss_rot(pj[slot_off:slot_off + 3]) ** 2, w.lambda_rot)
                jac[rot_row_of[slot_off], j] = (r1 - r0) / h
            if row_vec is not None and j >= 27:
                v0 = np.sqrt(w.lambda_v) * (np.linalg.norm(params[27:30]) - 1.0)
                v1 = np.sqrt(w.lambda_v) * (np.linalg.norm(pj[27:30]) - 1.0)
                jac[row_vec, j] = (v1 - v0) / h

        abs_sum = np.abs(b).sum()
        std_target = 1.0 / np.sqrt(n_b)
        pos_sq0 = float(np.sum(np.minimum(b, 0.0) ** 2))
        std0 = b.std(ddof=1) - std_target
        sqrt_ln = np.sqrt(w.lambda_n)
        for k in range(n_b):
            j = n_states + k
            h = self._fd_step(params[j], rel_step, abs_step)
            jac[:n_data, j] = self._data_rows(terms[k] / self.sqrt_n)
            bj = b.copy()
            bj[k] += h
            jac[row_norm, j] = sqrt_ln * (np.abs(bj).sum() - abs_sum) / h
            pos_sq1 = float(np.sum(np.minimum(bj, 0.0) ** 2))
            jac[row_pos, j] = (charb(pos_sq1, w.lambda_p) - charb(pos_sq0, w.lambda_p)) / h
            std1 = bj.std(ddof=1) - std_target
            jac[row_std, j] = (charb(std1**2, w.lambda_s) - charb(std0**2, w.lambda_s)) / h
        return jac


def assemble_residual(channel: Channel, core: CoreStateSeries, meas_normed: np.ndarray,
                      x_m: ModelStateVector, b, weights: ObjectiveWeights) -> np.ndarray:
    """Full stage-1 residual vector at a given state.

    Layout: per-sample, per-axis data residuals scaled by 1/sqrt(n), then
    the weighted loss rows (norm budget, per-selector positivity,
    selector std, field-vector magnitude, rotation guards).  The summed
    squares equal twice the scalar objective.
    """
    problem = Stage1Problem(channel, core, np.asarray(meas_normed, float), weights, base_x=x_m)
    return problem.residual(problem.pack(x_m, np.asarray(b, float)))


def _sharpen_ties(problem: Stage1Problem, fit, options: SolverOptions, jac):
    """Saddle-escape restarts for near-tied selector pairs.

    The selector-std loss is first-order flat when the two leading
    selectors are equal, so the joint solve can stall in a mixed state
    even when one pure selection has strictly lower cost.  Both one-sided
    mass transfers of the top-2 pair are tried; a restart is adopted only
    if it ends at a lower total cost, so genuinely ambiguous data keeps
    its mixed (health-rejectable) solution.
    """
    n_states = 3 * len(problem.state_slots)
    b = fit.x[n_states:]
    if b.size < 2 or options.sharpen_iter <= 0:
        return fit
    order = np.argsort(b)[::-1]
    i1, i2 = int(order[0]), int(order[1])
    if b[i1] - b[i2] >= options.sharpen_gap:
        return fit
    best = fit
    for winner, loser in ((i1, i2), (i2, i1)):
        start = fit.x.copy()
        start[n_states + winner] = b[i1] + b[i2]
        start[n_states + loser] = 0.0
        trial = levenberg_marquardt(
            problem.residual, start, jac=jac,
            max_iter=options.sharpen_iter, ftol=options.ftol, gtol=options.gtol,
            rel_step=options.rel_step, abs_step=options.abs_step)
        if trial.cost < best.cost:
            best = trial
    return best


def initial_state(channel: Channel, meas: MeasurementSeries) -> tuple[ModelStateVector, np.ndarray]:
    """Stage-1 starting point: zero states, uniform selectors, and the
    measurement's mean direction as the field-vector guess."""
    x = ModelStateVector()
    if channel is Channel.VECTOR:
        mean = meas.values.mean(axis=0)
        norm = np.linalg.norm(mean)
        x.m_w = mean / norm if norm > 1e-9 else np.array([0.0, 0.0, 1.0])
    b = np.full(len(channel_models(channel)), 1.0 / len(channel_models(channel)))
    return x, b


def optimize_stage1(channel: Channel | None, core: CoreStateSeries,
                    meas: MeasurementSeries, weights: ObjectiveWeights | None = None,
                    options: SolverOptions | None = None) -> Stage1Result:
    """Run the joint selector/state optimization on a synchronized pair."""
    weights = weights or ObjectiveWeights()
    options = options or SolverOptions()
    if channel is None:
        channel = meas.channel
    elif channel is not meas.channel:
        raise WrongChannel(f"measurement is {meas.channel}, requested {channel}")
    if len(core) != len(meas):
        raise ValueError("core and measurement series must be synchronized (equal length)")
    if len(meas) == 0:
        raise EmptyInput("empty synchronized input")

    if channel is Channel.VECTOR:
        meas_arr, _ = normalize_series(meas.values)
    else:
        meas_arr = meas.tangent()

    x0, b0 = initial_state(channel, meas)
    problem = Stage1Problem(channel, core, meas_arr, weights, base_x=x0)

    def structured_jac(x, f0):
        return problem.jacobian(x, f0, options.rel_step, options.abs_step)

    start = problem.warm_start(problem.pack(x0, b0), options)
    fit = levenberg_marquardt(
        problem.residual, start, jac=structured_jac,
        max_iter=options.max_iter, ftol=options.ftol, gtol=options.gtol,
        rel_step=options.rel_step, abs_step=options.abs_step)
    fit = _sharpen_ties(problem, fit, options, structured_jac)

    x_final, b_final = problem.unpack(fit.x)
    selected, delta_b = select_model(b_final, channel)
    n_data = 3 * problem.n
    rmse = float(np.sqrt(np.sum(fit.residual[:n_data] ** 2)))

    rot_total = sum(loss_rot(getattr(x_final, s)) for s in problem.rot_slots)
    return Stage1Result(
        channel=channel,
        b_final=b_final,
        selected=selected,
        delta_b=delta_b,
        x_m_final=x_final,
        residual_rmse=rmse,
        loss_norm=weights.lambda_n * loss_norm(b_final),
        loss_pos=weights.lambda_p * loss_pos(b_final),
        loss_std=weights.lambda_s * loss_std(b_final),
        loss_vec=weights.lambda_v * loss_vec(x_final.m_w) ** 2 if channel is Channel.VECTOR else 0.0,
        loss_rot=weights.lambda_rot * rot_total,
        iterations=fit.iterations,
        converged=fit.converged,
    )
