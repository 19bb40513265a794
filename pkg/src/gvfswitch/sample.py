"""The raw per-tick sensorimotor record shared by simulator, pipeline and logs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NUM_JOINTS = 4
NUM_ELECTRODES = 4
JOINT_NAMES = ("shoulder", "elbow", "wrist", "gripper")


@dataclass
class TimeStepSample:
    """One tick of raw sensorimotor data at the engine rate.

    ``emg_raw`` is signed synthetic EMG per electrode; ``joint_pos`` is the
    normalized angle of each joint in [0, 1]; ``switch_pulse`` is 1 only on
    ticks where the user issues a switch cue; ``active_joint`` is the joint the
    drive channel currently controls.
    """

    step: int
    time_s: float
    emg_raw: np.ndarray
    joint_pos: np.ndarray
    joint_vel: np.ndarray
    switch_pulse: int
    active_joint: int

    def validate(self, tick_rate_hz: float = 15.0) -> None:
        if self.step < 0:
            raise ValueError(f"step must be >= 0, got {self.step}")
        if abs(self.time_s - self.step / tick_rate_hz) > 1e-9:
            raise ValueError(f"time_s {self.time_s} inconsistent with step {self.step}")
        if self.emg_raw.shape != (NUM_ELECTRODES,):
            raise ValueError(f"emg_raw must have shape (4,), got {self.emg_raw.shape}")
        if self.joint_pos.shape != (NUM_JOINTS,) or self.joint_vel.shape != (NUM_JOINTS,):
            raise ValueError("joint_pos and joint_vel must have shape (4,)")
        if np.any(self.joint_pos < 0.0) or np.any(self.joint_pos > 1.0):
            raise ValueError(f"joint_pos out of [0, 1]: {self.joint_pos}")
        if self.switch_pulse not in (0, 1):
            raise ValueError(f"switch_pulse must be 0 or 1, got {self.switch_pulse}")
        if self.active_joint not in range(NUM_JOINTS):
            raise ValueError(f"active_joint must be in 0..3, got {self.active_joint}")
