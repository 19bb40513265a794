"""A bank of independent GVF learners advanced in lockstep, one tick at a time.

All learners share the single feature vector encoded for the tick (exactly one
encode per tick, whatever the question count). Each learner owns its weights
and traces outright, so the update order across learners never matters; a
checker for that property is included because it guards against accidental
state sharing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError
from .gvf import (
    GvfLearner,
    GvfQuestion,
    LearnerParams,
    MaturedReturn,
    ReturnVerifier,
    normalize_prediction,
)
from .pipeline import PipelineConfig, ProcessedSignals, StateVector
from .sample import NUM_JOINTS, JOINT_NAMES, TimeStepSample
from .tilecoder import FeatureVector, TileCoder, active_count


CumulantFn = Callable[[TimeStepSample, ProcessedSignals], float]

_JOINT_SPEED_RE = re.compile(r"^joint_speed\[([0-3])\]$")


def make_cumulant(name: str, pipeline_cfg: PipelineConfig) -> CumulantFn:
    """Resolve a cumulant selector name against the sample schema."""
    if name == "switch_pulse":
        return lambda s, p: float(s.switch_pulse)
    if name == "ch_drive_abs":
        return lambda s, p: abs(p.ch_drive)
    if name == "ch_switch":
        return lambda s, p: p.ch_switch
    m = _JOINT_SPEED_RE.match(name)
    if m:
        j = int(m.group(1))
        v_max = pipeline_cfg.vel_max
        return lambda s, p: min(abs(float(s.joint_vel[j])) / v_max, 1.0)
    raise ConfigError(f"unknown cumulant selector '{name}'")


def build_default_questions(timescale_steps: int = 10) -> list[GvfQuestion]:
    """The stock bank: switch cue, per-joint activity, both EMG channels."""
    qs = [GvfQuestion("switch_event", "switch_pulse", timescale_steps)]
    for j in range(NUM_JOINTS):
        qs.append(
            GvfQuestion(f"joint_{JOINT_NAMES[j]}", f"joint_speed[{j}]", timescale_steps)
        )
    qs.append(GvfQuestion("emg_drive", "ch_drive_abs", timescale_steps))
    qs.append(GvfQuestion("emg_switch", "ch_switch", timescale_steps))
    return qs


@dataclass
class QuestionTick:
    raw: float
    normalized: float
    delta: float | None
    matured: list[MaturedReturn] = field(default_factory=list)


@dataclass
class HordeSnapshot:
    step: int
    questions: dict[str, QuestionTick]


class Horde:
    """Owns the learners for a question bank and the per-tick update cycle."""

    def __init__(
        self,
        questions: Sequence[GvfQuestion],
        params: LearnerParams,
        tile_coder: TileCoder,
        pipeline_cfg: PipelineConfig,
        verify: bool = True,
    ):
        ids = [q.id for q in questions]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"duplicate question ids: {ids}")
        self.questions = list(questions)
        self.tile_coder = tile_coder
        n_total = tile_coder.config.num_features_total
        n_active = active_count(tile_coder.config)
        self.learners = [
            GvfLearner(q, params, n_total, n_active) for q in self.questions
        ]
        self._cumulants = [make_cumulant(q.cumulant, pipeline_cfg) for q in self.questions]
        self.verifiers = (
            [ReturnVerifier(gamma=q.gamma) for q in self.questions] if verify else None
        )
        self._prev_features: FeatureVector | None = None
        self.encode_count = 0
        self.step_count = 0

    def step(
        self,
        sample: TimeStepSample,
        processed: ProcessedSignals,
        state: StateVector,
        learn: bool = True,
        order: Sequence[int] | None = None,
    ) -> HordeSnapshot:
        """Advance every learner one tick over a shared, immutable encoding."""
        x = self.tile_coder.encode(state.values)
        self.encode_count += 1
        indices = range(len(self.learners)) if order is None else order
        rows: dict[str, QuestionTick] = {}
        for i in indices:
            learner = self.learners[i]
            question = self.questions[i]
            cumulant = self._cumulants[i](sample, processed)
            value = learner.predict(x)
            delta: float | None = None
            if learn and self._prev_features is not None:
                # raises DivergenceError naming the question if delta goes non-finite
                delta = learner.update(self._prev_features, cumulant, x, value_next=value)
            matured: list[MaturedReturn] = []
            if self.verifiers is not None:
                m = self.verifiers[i].observe(sample.step, value, cumulant)
                if m is not None:
                    matured.append(m)
            rows[question.id] = QuestionTick(
                raw=value,
                normalized=normalize_prediction(value, question.gamma),
                delta=delta,
                matured=matured,
            )
        self._prev_features = x
        self.step_count += 1
        snapshot_rows = {q.id: rows[q.id] for q in self.questions}
        return HordeSnapshot(step=sample.step, questions=snapshot_rows)

    def reset_traces(self) -> None:
        """Clear eligibility traces and the previous-tick features (weights kept)."""
        for learner in self.learners:
            learner.reset_traces()
        self._prev_features = None

    def reset_verifiers(self) -> None:
        if self.verifiers is not None:
            self.verifiers = [ReturnVerifier(gamma=q.gamma) for q in self.questions]

    def drain_verifiers(self, zero_pad: bool = False) -> dict[str, list[MaturedReturn]]:
        """End of session: flush pending verifier windows (discarded by default)."""
        if self.verifiers is None:
            return {}
        return {
            q.id: v.drain(zero_pad=zero_pad)
            for q, v in zip(self.questions, self.verifiers)
        }

    def weights_by_question(self) -> dict[str, np.ndarray]:
        return {q.id: l.weights for q, l in zip(self.questions, self.learners)}

    def set_weights(self, weights: dict[str, np.ndarray]) -> None:
        for q, learner in zip(self.questions, self.learners):
            if q.id not in weights:
                raise ConfigError(f"missing weights for question '{q.id}'")
            w = weights[q.id]
            if w.shape != learner.weights.shape:
                raise ConfigError(
                    f"weight length {w.shape} does not match learner for '{q.id}'"
                )
            learner.weights = w.astype(float).copy()


def reorder_invariance_check(
    make_horde: Callable[[], Horde],
    stream: Sequence[tuple[TimeStepSample, ProcessedSignals, StateVector]],
) -> bool:
    """True iff per-question weights are bit-identical under reversed update order."""
    forward = make_horde()
    backward = make_horde()
    n = len(forward.learners)
    rev = list(reversed(range(n)))
    for sample, processed, state in stream:
        forward.step(sample, processed, state, learn=True)
        backward.step(sample, processed, state, learn=True, order=rev)
    fw = forward.weights_by_question()
    bw = backward.weights_by_question()
    return all(
        fw[qid].tobytes() == bw[qid].tobytes() for qid in fw
    )
