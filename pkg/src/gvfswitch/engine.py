"""The fixed-rate core loop tying simulator, pipeline, horde and advisor together.

Stage order inside one tick is frozen: apply queued commands, read user or
pilot input, synthesize EMG, assemble the sample, condition signals, advance
every learner, decide switching, actuate the arm, then hand the tick to the
log writer and any telemetry hook. Headless runs execute as fast as possible;
paced runs keep a fixed-period schedule and complete late ticks rather than
skipping them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .advisor import AdvisorAction, AdvisorOutput, Autonomy, SwitchAdvisor
from .armsim import ArmSim, ScriptConfig, ScriptOutput, ScriptedUser, synth_emg
from .config import EngineConfig, learning_fingerprint
from .errors import ConfigError
from .horde import Horde, HordeSnapshot
from .pipeline import ProcessedSignals, SignalPipeline, StateVector
from .sample import JOINT_NAMES, NUM_JOINTS, TimeStepSample
from .tilecoder import TileCoder


class PilotInput:
    """Keyboard/slider proxy for muscle contraction, fed through the same EMG path."""

    def __init__(self, burst_len: int = 3):
        self.drive_level = 0.0
        self._burst_len = max(1, burst_len)
        self._burst_left = 0

    def request_switch(self) -> None:
        self._burst_left = self._burst_len

    def step(self, arm: ArmSim) -> ScriptOutput:
        contractions = np.zeros(NUM_JOINTS)
        if self.drive_level > 0:
            contractions[0] = min(self.drive_level, 1.0)
        elif self.drive_level < 0:
            contractions[1] = min(-self.drive_level, 1.0)
        intent = pulse = False
        if self._burst_left > 0:
            contractions[2] = 1.0
            intent = True
            pulse = self._burst_left == self._burst_len   # cue on the first burst tick
            self._burst_left -= 1
        return ScriptOutput(contractions, intent, pulse)


@dataclass
class TickResult:
    sample: TimeStepSample
    processed: ProcessedSignals
    state: StateVector
    snapshot: HordeSnapshot
    advisor: AdvisorOutput
    provenance: str                     # "user" | "auto" | "none"
    switched_to: int | None
    events: list[dict] = field(default_factory=list)
    core_seconds: float = 0.0


@dataclass
class RunSummary:
    ticks: int = 0
    overruns: int = 0
    core_seconds: list[float] = field(default_factory=list)

    @property
    def mean_core_ms(self) -> float:
        return 1000.0 * sum(self.core_seconds) / len(self.core_seconds) if self.core_seconds else 0.0

    @property
    def p99_core_ms(self) -> float:
        if not self.core_seconds:
            return 0.0
        xs = sorted(self.core_seconds)
        return 1000.0 * xs[min(len(xs) - 1, int(0.99 * len(xs)))]


def _passive_advisor_output(current: int, pulse: bool) -> AdvisorOutput:
    """Baseline sequential behaviour when the question bank lacks advisor inputs."""
    ranking = tuple((current + 1 + i) % NUM_JOINTS for i in range(NUM_JOINTS))
    return AdvisorOutput(
        timing_alarm=False,
        alarm_rose=False,
        ranking=ranking,
        suggested_joint=ranking[0],
        action=AdvisorAction.NONE,
        lead_candidate_tick=None,
        switch_target=ranking[0] if pulse else None,
    )


class Engine:
    """One live session: owns all mutable state, advanced one tick at a time."""

    def __init__(self, config: EngineConfig, learning: bool = True, log_writer=None):
        config.validate()
        self.config = config
        self.fingerprint = learning_fingerprint(config)
        self.learning = learning
        self.log_writer = log_writer
        self.rng = np.random.default_rng(config.seed)
        self.pipeline = SignalPipeline(config.pipeline)
        self.tile_coder = TileCoder(config.tile_config(), self.pipeline.layout)
        questions = config.horde.resolve_questions()
        self.horde = Horde(
            questions,
            config.horde.learner_params(),
            self.tile_coder,
            config.pipeline,
        )
        joint_qids = [f"joint_{name}" for name in JOINT_NAMES]
        qids = {q.id for q in questions}
        self.advisor: SwitchAdvisor | None = None
        if set(joint_qids) <= qids and "switch_event" in qids:
            self.advisor = SwitchAdvisor(config.advisor, joint_qids)
        self.arm = ArmSim(config.sim.arm, config.tick_rate_hz)
        self.script: ScriptedUser | None = None
        self.pilot: PilotInput | None = None
        if config.mode == "scripted":
            self.script = ScriptedUser(config.sim.script, config.sim.emg, self.rng)
        elif config.mode == "piloted":
            self.pilot = PilotInput(config.sim.emg.switch_burst_len)
        else:
            raise ConfigError("replay sessions are driven by sessionio, not Engine")
        self.step_index = 0
        self.pending_model_saves: list[str] = []

    # -- command intake ------------------------------------------------------

    def apply_command(self, command: dict) -> tuple[bool, str]:
        """Validate and apply one command at a tick boundary."""
        name = command.get("cmd")
        if name == "drive":
            if self.pilot is None:
                return False, "mode conflict: drive is only valid in piloted mode"
            value = command.get("value")
            if not isinstance(value, (int, float)) or not -1.0 <= float(value) <= 1.0:
                return False, f"drive value out of range [-1, 1]: {value!r}"
            self.pilot.drive_level = float(value)
            return True, "drive set"
        if name == "switch":
            if self.pilot is None:
                return False, "mode conflict: switch is only valid in piloted mode"
            self.pilot.request_switch()
            return True, "switch queued"
        if name == "set-autonomy":
            value = command.get("value")
            if self.advisor is None:
                return False, "advisor disabled: question bank lacks advisor questions"
            try:
                self.advisor.set_autonomy(Autonomy(value))
            except ValueError:
                return False, f"unknown autonomy level {value!r}"
            return True, f"autonomy {value}"
        if name == "toggle-learning":
            value = command.get("value")
            if value not in ("on", "off"):
                return False, f"toggle-learning wants on|off, got {value!r}"
            self.learning = value == "on"
            return True, f"learning {value}"
        if name == "save-model":
            path = command.get("value")
            if not isinstance(path, str) or not path:
                return False, "save-model needs a path"
            self.pending_model_saves.append(path)
            return True, f"model save queued: {path}"
        return False, f"unknown command {name!r}"

    # -- the tick ------------------------------------------------------------

    def tick(self) -> TickResult:
        cfg = self.config
        user = self.script if self.script is not None else self.pilot
        user_out = user.step(self.arm)
        emg = synth_emg(user_out.contractions, cfg.sim.emg, self.rng)
        sample = TimeStepSample(
            step=self.step_index,
            time_s=self.step_index / cfg.tick_rate_hz,
            emg_raw=emg,
            joint_pos=self.arm.joint_pos.copy(),
            joint_vel=self.arm.joint_vel.copy(),
            switch_pulse=int(user_out.switch_pulse),
            active_joint=self.arm.active_joint,
        )

        t0 = time.perf_counter()
        processed, state = self.pipeline.step(sample)
        snapshot = self.horde.step(sample, processed, state, learn=self.learning)
        if self.advisor is not None:
            normalized = {qid: q.normalized for qid, q in snapshot.questions.items()}
            advisor_out = self.advisor.step(
                sample.step, normalized, bool(sample.switch_pulse), self.arm.active_joint
            )
        else:
            advisor_out = _passive_advisor_output(
                self.arm.active_joint, bool(sample.switch_pulse)
            )
        core_seconds = time.perf_counter() - t0

        events: list[dict] = []
        if advisor_out.alarm_rose:
            events.append({"kind": "alarm_rise", "tick": sample.step})

        # actuation: drive the pre-switch joint, then apply at most one switch
        self.arm.step_motion(processed.ch_drive)
        provenance = "none"
        switched_to = None
        if advisor_out.switch_target is not None:
            switched_to = self.arm.switch_to(advisor_out.switch_target)
            if advisor_out.action is AdvisorAction.AUTO_SWITCH:
                provenance = "auto"
            else:
                provenance = "user"
            events.append(
                {
                    "kind": "switch",
                    "tick": sample.step,
                    "to": switched_to,
                    "provenance": provenance,
                    "action": advisor_out.action.value,
                }
            )
            if (
                advisor_out.action is AdvisorAction.REROUTED_USER_SWITCH
                and self.advisor.autonomy is Autonomy.AUTO
            ):
                events.append({"kind": "override", "tick": sample.step})

        self.step_index += 1
        result = TickResult(
            sample=sample,
            processed=processed,
            state=state,
            snapshot=snapshot,
            advisor=advisor_out,
            provenance=provenance,
            switched_to=switched_to,
            events=events,
            core_seconds=core_seconds,
        )
        if self.log_writer is not None:
            self.log_writer.write_tick(result)
        return result

    # -- loops ----------------------------------------------------------------

    def run(
        self,
        n_ticks: int,
        pace: bool = False,
        hook=None,
        command_source=None,
    ) -> RunSummary:
        """Advance n_ticks; paced runs never skip a tick, late ones are counted."""
        summary = RunSummary()
        period = 1.0 / self.config.tick_rate_hz
        next_deadline = time.monotonic() + period if pace else 0.0
        try:
            for _ in range(n_ticks):
                if command_source is not None:
                    for command, reply in command_source():
                        ok, message = self.apply_command(command)
                        if reply is not None:
                            reply(ok, message)
                result = self.tick()
                summary.ticks += 1
                summary.core_seconds.append(result.core_seconds)
                if hook is not None:
                    hook(self, result)
                if pace:
                    now = time.monotonic()
                    if now > next_deadline:
                        summary.overruns += 1
                    else:
                        time.sleep(next_deadline - now)
                    next_deadline += period
        finally:
            if self.log_writer is not None:
                self.log_writer.flush()
        return summary
