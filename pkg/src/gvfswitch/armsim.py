"""Simulated 4-joint arm, sequential mode switcher, scripted user, synthetic EMG.

The arm is first-order kinematic: the active joint moves at gain * drive range
units per second, everything else holds still. A scripted user performs the
repeating four-phase task (shoulder out, cycle a joint, shoulder back, cycle
another joint), pausing motion to operate the switch channel whenever the
phase needs a joint other than the active one. Muscle contractions become
signed EMG through a seeded noise model, so the learner sees realistic
precursors: the switching muscle ramps up for several ticks before each cue.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .sample import NUM_JOINTS


@dataclass(frozen=True)
class ArmConfig:
    joint_gains: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    init_pos: tuple[float, float, float, float] = (0.1, 0.25, 0.25, 0.5)
    init_active: int = 0


@dataclass
class ArmState:
    joint_pos: np.ndarray
    joint_vel: np.ndarray
    active_joint: int


class NoOpSwitchError(ValueError):
    """Explicit switch target equals the current active joint."""


class ArmSim:
    """First-order kinematic arm; one instance per session."""

    def __init__(self, config: ArmConfig | None = None, tick_rate_hz: float = 15.0):
        self.config = config or ArmConfig()
        self.dt = 1.0 / tick_rate_hz
        self.joint_pos = np.array(self.config.init_pos, dtype=float)
        self.joint_vel = np.zeros(NUM_JOINTS)
        self.active_joint = self.config.init_active

    def step_motion(self, drive: float) -> None:
        """Move the active joint by gain*drive*dt; report achieved velocity."""
        j = self.active_joint
        old = self.joint_pos[j]
        new = float(np.clip(old + self.config.joint_gains[j] * drive * self.dt, 0.0, 1.0))
        self.joint_vel[:] = 0.0
        self.joint_vel[j] = (new - old) / self.dt
        self.joint_pos[j] = new

    def switch_sequential(self) -> int:
        self.active_joint = (self.active_joint + 1) % NUM_JOINTS
        return self.active_joint

    def switch_to(self, target: int) -> int:
        if target not in range(NUM_JOINTS):
            raise ConfigError(f"switch target must be in 0..3, got {target}")
        if target == self.active_joint:
            raise NoOpSwitchError(f"already on joint {target}; switching must change mode")
        self.active_joint = target
        return self.active_joint

    def state(self) -> ArmState:
        return ArmState(self.joint_pos.copy(), self.joint_vel.copy(), self.active_joint)


@dataclass(frozen=True)
class EmgSynthConfig:
    burst_gain: float = 1.0       # signed carrier amplitude per unit contraction
    noise_sigma: float = 0.1      # extra contraction-borne noise std
    baseline_sigma: float = 0.02  # resting noise std
    switch_burst_len: int = 3     # ticks of switch-muscle burst per cue


def synth_emg(
    contractions: np.ndarray, config: EmgSynthConfig, rng: np.random.Generator
) -> np.ndarray:
    """Signed EMG per electrode for one tick.

    emg[i] = c[i] * (burst_gain*s + noise_sigma*u) + baseline_sigma*v with
    s, u, v standard normal. Three draws happen per electrode regardless of
    contraction level so the random stream does not depend on signal values.
    """
    draws = rng.standard_normal((3, contractions.shape[0]))
    return (
        contractions * (config.burst_gain * draws[0] + config.noise_sigma * draws[1])
        + config.baseline_sigma * draws[2]
    )


class Phase(enum.Enum):
    SHOULDER_OUT = 0
    CYCLES_A = 1
    SHOULDER_BACK = 2
    CYCLES_B = 3


@dataclass(frozen=True)
class ScriptConfig:
    cycle_joints: tuple[int, int] = (1, 2)     # joints cycled in phases 1 and 3
    shoulder_hi: float = 0.9
    shoulder_lo: float = 0.1
    cycle_hi: float = 0.75
    cycle_lo: float = 0.25
    cycles_range: tuple[int, int] = (2, 5)
    contraction_range: tuple[float, float] = (0.55, 0.8)
    precursor_ticks: int = 5      # switch-muscle ramp before the first cue of a run
    inter_pulse_rest: int = 2     # re-ramp ticks between cues in a multi-cue run
    release_ticks: int = 1        # wind-down ticks after landing on the wanted joint

    def validate(self) -> None:
        if any(j not in range(NUM_JOINTS) for j in self.cycle_joints):
            raise ConfigError("cycle_joints must be joint indices 0..3")
        if self.cycles_range[0] < 1 or self.cycles_range[1] < self.cycles_range[0]:
            raise ConfigError("cycles_range must be a nonempty positive range")
        if self.precursor_ticks < 0 or self.inter_pulse_rest < 0:
            raise ConfigError("ramp lengths must be >= 0")


@dataclass
class ScriptOutput:
    contractions: np.ndarray   # (4,) in [0, 1]
    switch_intent: bool
    switch_pulse: bool


class ScriptedUser:
    """Deterministic state machine reproducing the semi-repetitive arm task.

    Phase order is fixed; cycle counts and per-phase contraction levels are
    drawn from the supplied generator on phase entry. When the phase needs a
    joint other than the active one, the script pauses the drive muscles and
    works the switch muscle: a contraction ramp, then a burst carrying the cue,
    repeated until the arm lands on the required joint (however the control
    layer routes each cue).
    """

    def __init__(
        self,
        config: ScriptConfig,
        emg_config: EmgSynthConfig,
        rng: np.random.Generator,
    ):
        config.validate()
        self.config = config
        self.emg_config = emg_config
        self.rng = rng
        self.events: list[tuple[int, str]] = []
        self._tick = -1
        self._waypoints: list[float] = []
        self._level = 0.0
        self._stroke_dir = 0.0          # 0 = not yet chosen for the current waypoint
        self._attempt: list[tuple[float, bool, bool]] = []
        self._attempt_step = 0
        self._first_attempt = True
        self._was_switching = False
        self._release_left = 0
        self.phase = Phase.SHOULDER_OUT
        self._enter_phase(Phase.SHOULDER_OUT)

    def _phase_joint(self, phase: Phase) -> int:
        if phase in (Phase.SHOULDER_OUT, Phase.SHOULDER_BACK):
            return 0
        if phase is Phase.CYCLES_A:
            return self.config.cycle_joints[0]
        return self.config.cycle_joints[1]

    def _enter_phase(self, phase: Phase) -> None:
        cfg = self.config
        self.phase = phase
        self._level = float(self.rng.uniform(*cfg.contraction_range))
        if phase is Phase.SHOULDER_OUT:
            self._waypoints = [cfg.shoulder_hi]
        elif phase is Phase.SHOULDER_BACK:
            self._waypoints = [cfg.shoulder_lo]
        else:
            n = int(self.rng.integers(cfg.cycles_range[0], cfg.cycles_range[1] + 1))
            wps: list[float] = []
            for _ in range(n):
                wps.extend([cfg.cycle_hi, cfg.cycle_lo])
            wps.append(cfg.cycle_hi)   # park raised so the next pass re-enters cleanly
            self._waypoints = wps
        self._stroke_dir = 0.0
        self._first_attempt = True
        self.events.append((max(self._tick, 0), f"enter:{phase.name}"))

    def set_config(self, config: ScriptConfig) -> None:
        """Swap task parameters mid-session; applies from the next phase change."""
        config.validate()
        self.config = config

    def _build_attempt(self) -> list[tuple[float, bool, bool]]:
        """(switch-muscle contraction, intent, pulse) per tick of one cue attempt."""
        cfg = self.config
        burst = max(1, self.emg_config.switch_burst_len)
        ramp = cfg.precursor_ticks if self._first_attempt else cfg.inter_pulse_rest
        profile = [((i + 1) / (ramp + 1), False, False) for i in range(ramp)]
        pulse_at = 1 if burst > 1 else 0
        profile.extend((1.0, True, i == pulse_at) for i in range(burst))
        return profile

    def step(self, arm: ArmSim) -> ScriptOutput:
        self._tick += 1
        contractions = np.zeros(NUM_JOINTS)
        target_joint = self._phase_joint(self.phase)

        if arm.active_joint != target_joint:
            self._was_switching = True
            if self._attempt_step >= len(self._attempt):
                self._attempt = self._build_attempt()
                self._attempt_step = 0
            level, intent, pulse = self._attempt[self._attempt_step]
            self._attempt_step += 1
            if self._attempt_step >= len(self._attempt):
                self._first_attempt = False   # next attempt, if any, re-ramps briefly
            contractions[2] = level
            return ScriptOutput(contractions, intent, pulse)

        if self._was_switching:
            self._was_switching = False
            self._attempt = []
            self._attempt_step = 0
            self._first_attempt = True
            self._release_left = self.config.release_ticks
        if self._release_left > 0:
            self._release_left -= 1
            contractions[2] = 0.4
            return ScriptOutput(contractions, False, False)

        waypoint = self._waypoints[0]
        pos = float(arm.joint_pos[target_joint])
        if self._stroke_dir == 0.0:
            self._stroke_dir = 1.0 if waypoint > pos else -1.0
        reached = pos >= waypoint if self._stroke_dir > 0 else pos <= waypoint
        if reached:
            self._waypoints.pop(0)
            self._stroke_dir = 0.0
            if not self._waypoints:
                self._enter_phase(Phase((self.phase.value + 1) % 4))
            return ScriptOutput(contractions, False, False)
        if self._stroke_dir > 0:
            contractions[0] = self._level
        else:
            contractions[1] = self._level
        return ScriptOutput(contractions, False, False)
