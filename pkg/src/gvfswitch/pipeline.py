"""Per-tick signal conditioning: EMG envelopes, control channels, decayed traces.

Raw samples become a fixed-layout state vector: joint positions, clipped and
rescaled joint velocities, the two control channels derived from the EMG
envelope, the active-joint one-hot, the raw switch cue, and a bank of decayed
traces that carry recent history. Every dimension stays inside its declared
range so the tile coder downstream never sees out-of-bound values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .sample import NUM_ELECTRODES, NUM_JOINTS, TimeStepSample


@dataclass(frozen=True)
class PipelineConfig:
    mav_window: int = 3
    drive_max: float = 1.0          # full-scale for the drive channel (flexor - extensor MAV)
    switch_max: float = 1.0         # full-scale for the switch channel MAV
    vel_max: float = 0.5            # full-scale joint speed, range units per second
    trace_decays: tuple[float, ...] = (0.8, 0.95, 0.99)
    traced_signals: tuple[str, ...] = ("ch_drive", "ch_switch", "switch_pulse")
    include_raw_pulse: bool = True

    def validate(self) -> None:
        if self.mav_window < 1:
            raise ConfigError("mav_window must be >= 1")
        if self.drive_max <= 0 or self.switch_max <= 0 or self.vel_max <= 0:
            raise ConfigError("normalization constants must be positive")
        for beta in self.trace_decays:
            if not 0.0 <= beta < 1.0:
                raise ConfigError(f"trace decay must be in [0, 1), got {beta}")
        for name in self.traced_signals:
            if name not in _SIGNAL_RANGES:
                raise ConfigError(f"unknown traced signal '{name}'")


_SIGNAL_RANGES = {
    "ch_drive": (-1.0, 1.0),
    "ch_switch": (0.0, 1.0),
    "switch_pulse": (0.0, 1.0),
}


@dataclass
class ProcessedSignals:
    """Rectified moving-average EMG and the two normalized control channels."""

    emg_mav: np.ndarray   # (4,) nonnegative
    ch_drive: float       # in [-1, 1]
    ch_switch: float      # in [0, 1]


@dataclass
class TraceBank:
    """Decayed traces of selected signals, one trace per (signal, decay) pair.

    Update rule is the convex combination ``trace <- beta*trace + (1-beta)*s``,
    so a trace of a bounded signal stays on the signal's own scale.
    """

    decay_rates: tuple[float, ...]
    tracked_signals: tuple[str, ...]
    traces: np.ndarray = field(init=False)   # (n_signals, n_decays)

    def __post_init__(self) -> None:
        self.traces = np.zeros((len(self.tracked_signals), len(self.decay_rates)))
        self._decays = np.asarray(self.decay_rates)

    def update(self, signal_values: np.ndarray) -> None:
        d = self._decays
        self.traces = self.traces * d + signal_values[:, None] * (1.0 - d)

    def reset(self) -> None:
        self.traces[:] = 0.0


@dataclass
class StateVector:
    """Fixed-layout real vector handed to the tile coder each tick.

    ``layout`` holds one (name, lo, hi) descriptor per entry of ``values``.
    """

    values: np.ndarray
    layout: tuple[tuple[str, float, float], ...]


def build_layout(config: PipelineConfig) -> tuple[tuple[str, float, float], ...]:
    """The fixed (name, lo, hi) layout for a pipeline configuration."""
    entries: list[tuple[str, float, float]] = []
    for j in range(NUM_JOINTS):
        entries.append((f"joint_pos[{j}]", 0.0, 1.0))
    for j in range(NUM_JOINTS):
        entries.append((f"joint_vel[{j}]", 0.0, 1.0))   # clipped to +-vel_max, then mapped
    entries.append(("ch_drive", -1.0, 1.0))
    entries.append(("ch_switch", 0.0, 1.0))
    for j in range(NUM_JOINTS):
        entries.append((f"active[{j}]", 0.0, 1.0))
    if config.include_raw_pulse:
        entries.append(("switch_pulse", 0.0, 1.0))
    for name in config.traced_signals:
        lo, hi = _SIGNAL_RANGES[name]
        for beta in config.trace_decays:
            entries.append((f"trace[{name},{beta}]", lo, hi))
    return tuple(entries)


class SignalPipeline:
    """Streaming state for one session: MAV window plus the trace bank.

    Strictly causal and deterministic: the outputs at tick t depend only on
    samples up to t, and identical sample sequences reproduce identical state
    vectors bit for bit. One instance per session, advanced one tick at a time.
    """

    def __init__(self, config: PipelineConfig | None = None):
        self.config = config or PipelineConfig()
        self.config.validate()
        self.layout = build_layout(self.config)
        self._abs_window = np.zeros((self.config.mav_window, NUM_ELECTRODES))
        self._window_pos = 0
        self.bank = TraceBank(self.config.trace_decays, self.config.traced_signals)

    def reset(self) -> None:
        self._abs_window[:] = 0.0
        self._window_pos = 0
        self.bank.reset()

    def process(self, sample: TimeStepSample) -> ProcessedSignals:
        """Rectify and window the EMG, then form the two control channels."""
        cfg = self.config
        self._abs_window[self._window_pos] = np.abs(sample.emg_raw)
        self._window_pos = (self._window_pos + 1) % cfg.mav_window
        mav = self._abs_window.mean(axis=0)
        drive = float(np.clip((mav[0] - mav[1]) / cfg.drive_max, -1.0, 1.0))
        switch = float(np.clip(mav[2] / cfg.switch_max, 0.0, 1.0))
        return ProcessedSignals(emg_mav=mav, ch_drive=drive, ch_switch=switch)

    def update_traces(self, sample: TimeStepSample, processed: ProcessedSignals) -> TraceBank:
        values = np.array(
            [_signal_value(name, sample, processed) for name in self.config.traced_signals]
        )
        self.bank.update(values)
        return self.bank

    def build_state_vector(
        self, sample: TimeStepSample, processed: ProcessedSignals
    ) -> StateVector:
        cfg = self.config
        vel = np.clip(sample.joint_vel, -cfg.vel_max, cfg.vel_max)
        vel_mapped = (vel + cfg.vel_max) / (2.0 * cfg.vel_max)
        one_hot = np.zeros(NUM_JOINTS)
        one_hot[sample.active_joint] = 1.0
        parts = [sample.joint_pos, vel_mapped,
                 np.array([processed.ch_drive, processed.ch_switch]), one_hot]
        if cfg.include_raw_pulse:
            parts.append(np.array([float(sample.switch_pulse)]))
        parts.append(self.bank.traces.reshape(-1))
        values = np.concatenate(parts)
        if values.shape[0] != len(self.layout):
            raise ConfigError(
                f"state vector length {values.shape[0]} does not match layout "
                f"length {len(self.layout)}"
            )
        return StateVector(values=values, layout=self.layout)

    def step(self, sample: TimeStepSample) -> tuple[ProcessedSignals, StateVector]:
        """Advance one tick: envelope, traces, then the full state vector."""
        processed = self.process(sample)
        self.update_traces(sample, processed)
        return processed, self.build_state_vector(sample, processed)


def _signal_value(name: str, sample: TimeStepSample, processed: ProcessedSignals) -> float:
    if name == "ch_drive":
        return processed.ch_drive
    if name == "ch_switch":
        return processed.ch_switch
    if name == "switch_pulse":
        return float(sample.switch_pulse)
    raise ConfigError(f"unknown traced signal '{name}'")
