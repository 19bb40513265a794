"""One predictive question and its online answer.

A question names a target signal (the cumulant) and a timescale T; the answer
is a linear value estimate over sparse binary features, learned by TD(lambda)
with accumulating eligibility traces. A separate verifier turns the stream of
(prediction, cumulant) pairs into truncated computed returns so that learned
forecasts can be checked against what actually happened.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DivergenceError
from .tilecoder import FeatureVector


def gamma_for_timescale(timescale_steps: int) -> float:
    if timescale_steps < 1:
        raise ConfigError(f"timescale must be >= 1 step, got {timescale_steps}")
    return 1.0 - 1.0 / timescale_steps


@dataclass(frozen=True)
class GvfQuestion:
    """What to predict: cumulant selector name, timescale, on-policy only."""

    id: str
    cumulant: str
    timescale_steps: int
    policy: str = "behaviour"

    @property
    def gamma(self) -> float:
        return gamma_for_timescale(self.timescale_steps)


@dataclass(frozen=True)
class LearnerParams:
    alpha_base: float = 0.1
    lam: float = 0.9
    replacing_traces: bool = False
    trace_cutoff: float = 1e-8   # traces below this are dropped (set to exactly 0)

    def validate(self) -> None:
        if not 0.0 < self.alpha_base <= 1.0:
            raise ConfigError(f"alpha_base must be in (0, 1], got {self.alpha_base}")
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigError(f"lambda must be in [0, 1], got {self.lam}")


def normalize_prediction(value: float, gamma: float) -> float:
    """Rescale a raw return estimate to per-step cumulant scale."""
    return value * (1.0 - gamma)


class GvfLearner:
    """Linear TD(lambda) learner for a single question.

    Weights and traces are dense float64 vectors; the set of nonzero trace
    entries is tracked explicitly so per-tick work scales with the number of
    recently active features, not the table size. Updates are strictly
    deterministic: identical input streams give bit-identical weights.
    """

    def __init__(
        self,
        question: GvfQuestion,
        params: LearnerParams,
        num_features_total: int,
        active_features: int,
    ):
        params.validate()
        if active_features < 1:
            raise ConfigError("active_features must be >= 1")
        self.question = question
        self.params = params
        self.gamma = question.gamma
        self.num_features_total = num_features_total
        self.alpha = params.alpha_base / active_features
        self.weights = np.zeros(num_features_total)
        self.traces = np.zeros(num_features_total)
        self._trace_idx = np.empty(0, dtype=np.int64)
        self._in_trace = np.zeros(num_features_total, dtype=bool)
        self.last_prediction = 0.0
        self.updates_applied = 0

    def predict(self, x: FeatureVector) -> float:
        if x.num_features_total != self.num_features_total:
            raise ConfigError(
                f"feature size {x.num_features_total} does not match learner "
                f"size {self.num_features_total} for question '{self.question.id}'"
            )
        v = float(self.weights[x.active_indices].sum())
        self.last_prediction = v
        return v

    def update(
        self,
        x_t: FeatureVector,
        cumulant_next: float,
        x_next: FeatureVector,
        value_next: float | None = None,
    ) -> float:
        """One TD step for the transition x_t -> x_next observing cumulant_next.

        Order is fixed: TD error from the current weights, trace decay plus
        bump for x_t, then the weight step along the traces.
        """
        w = self.weights
        if value_next is None:
            value_next = float(w[x_next.active_indices].sum())
        value_t = float(w[x_t.active_indices].sum())
        delta = cumulant_next + self.gamma * value_next - value_t
        if not math.isfinite(delta):
            raise DivergenceError(self.question.id, self.updates_applied, delta)

        decay = self.gamma * self.params.lam
        t = self.traces
        idx = self._trace_idx
        if idx.size:
            t[idx] *= decay
            dead = t[idx] < self.params.trace_cutoff
            if dead.any():
                dead_idx = idx[dead]
                t[dead_idx] = 0.0
                self._in_trace[dead_idx] = False
                idx = idx[~dead]
        active = x_t.active_indices
        if self.params.replacing_traces:
            t[active] = 1.0
        else:
            t[active] += 1.0
        fresh = active[~self._in_trace[active]]
        if fresh.size:
            self._in_trace[fresh] = True
            idx = np.concatenate((idx, fresh))
        self._trace_idx = idx

        w[idx] += self.alpha * delta * t[idx]
        self.updates_applied += 1
        return delta

    def reset_traces(self) -> None:
        if self._trace_idx.size:
            self.traces[self._trace_idx] = 0.0
            self._in_trace[self._trace_idx] = False
        self._trace_idx = np.empty(0, dtype=np.int64)


def truncation_horizon(gamma: float, tail: float = 0.01) -> int:
    """Smallest K with gamma**K below the tail mass (K=1 for gamma=0)."""
    if gamma <= 0.0:
        return 1
    return max(1, math.ceil(math.log(tail) / math.log(gamma)))


@dataclass
class MaturedReturn:
    step: int
    computed_return: float
    prediction: float


@dataclass
class ReturnVerifier:
    """Pairs each prediction with the truncated return computed K ticks later.

    Call :meth:`observe` exactly once per tick with the prediction made at that
    tick and the cumulant observed at that tick. The cumulant at tick t is the
    first (k=0) term of the return for the prediction made at t-1.
    """

    gamma: float
    horizon: int = 0
    tail: float = 0.01

    def __post_init__(self) -> None:
        if self.horizon <= 0:
            self.horizon = truncation_horizon(self.gamma, self.tail)
        self._powers = self.gamma ** np.arange(self.horizon)
        self._pending: deque[tuple[int, float]] = deque()
        # ring of the cumulants c_{t0+1}.. needed by the oldest pending prediction
        self._ring = np.zeros(self.horizon, dtype=float)
        self._ring_start = 0
        self._ring_len = 0

    def observe(self, step: int, prediction: float, cumulant: float) -> MaturedReturn | None:
        if self._pending:
            end = (self._ring_start + self._ring_len) % self.horizon
            self._ring[end] = cumulant
            self._ring_len += 1
        self._pending.append((step, prediction))
        if self._ring_len >= self.horizon:
            t0, pred = self._pending.popleft()
            s = self._ring_start
            window = np.concatenate((self._ring[s:], self._ring[:s])) if s else self._ring
            g = float(self._powers @ window)
            self._ring_start = (s + 1) % self.horizon   # k=0 term retires with t0
            self._ring_len -= 1
            return MaturedReturn(step=t0, computed_return=g, prediction=pred)
        return None

    def drain(self, zero_pad: bool = False) -> list[MaturedReturn]:
        """End of session: zero-pad remaining windows or discard them."""
        out: list[MaturedReturn] = []
        if zero_pad:
            s = self._ring_start
            cums = [self._ring[(s + i) % self.horizon] for i in range(self._ring_len)]
            pending = list(self._pending)
            for i, (t0, pred) in enumerate(pending):
                window = np.zeros(self.horizon)
                avail = cums[i : i + self.horizon]
                window[: len(avail)] = avail
                out.append(MaturedReturn(t0, float(self._powers @ window), pred))
        self._pending.clear()
        self._ring_len = 0
        self._ring_start = 0
        return out
