"""Turns normalized predictions into switching decisions.

Timing comes from a hysteresis detector with a refractory window over the
switch-cue prediction; targeting ranks the per-joint activity predictions.
Three autonomy levels decide who initiates the switch. The advisor never
touches learner state: correction happens purely through the data the user
generates by using (or not using) a joint.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import ConfigError
from .sample import NUM_JOINTS


class Autonomy(str, enum.Enum):
    MANUAL = "manual"
    SUGGEST = "suggest"
    AUTO = "auto"


class AdvisorAction(str, enum.Enum):
    NONE = "none"
    REROUTED_USER_SWITCH = "rerouted_user_switch"
    AUTO_SWITCH = "auto_switch"


@dataclass(frozen=True)
class AdvisorConfig:
    # theta_on sits just under the (1-gamma) ceiling that a single isolated
    # switch cue can reach at the 10-tick timescale, so lone cues are
    # detectable in principle and cue runs clear the bar with margin
    theta_on: float = 0.09
    theta_off: float = 0.05
    refractory_ticks: int = 15
    autonomy: Autonomy = Autonomy.MANUAL

    def validate(self) -> None:
        if not 0.0 <= self.theta_off < self.theta_on <= 1.0:
            raise ConfigError(
                f"need 0 <= theta_off < theta_on <= 1, got "
                f"({self.theta_off}, {self.theta_on})"
            )
        if self.refractory_ticks < 0:
            raise ConfigError("refractory_ticks must be >= 0")


@dataclass
class AdvisorOutput:
    timing_alarm: bool
    alarm_rose: bool
    ranking: tuple[int, int, int, int]
    suggested_joint: int
    action: AdvisorAction
    lead_candidate_tick: int | None       # tick the current alarm first rose, if up
    switch_target: int | None             # joint the engine should switch to, if any


class TimingDetector:
    """Hysteresis-with-refractory automaton over the normalized prediction.

    The alarm rises when the value crosses theta_on from below, provided the
    refractory window since the last rise has elapsed; it stays up until the
    value falls below theta_off. A crossing suppressed by the refractory window
    does not fire later: a fresh crossing is required.
    """

    def __init__(self, config: AdvisorConfig):
        config.validate()
        self.config = config
        self.alarm = False
        self.rise_tick: int | None = None
        self._armed = True           # value was below theta_on
        self._last_rise: int | None = None

    def step(self, tick: int, value: float) -> tuple[bool, bool]:
        """Returns (alarm level, rose this tick)."""
        cfg = self.config
        rose = False
        if self.alarm and value < cfg.theta_off:
            self.alarm = False
            self.rise_tick = None
        if value >= cfg.theta_on:
            if self._armed and not self.alarm:
                elapsed = (
                    self._last_rise is None
                    or tick - self._last_rise >= cfg.refractory_ticks
                )
                if elapsed:
                    self.alarm = True
                    rose = True
                    self.rise_tick = tick
                    self._last_rise = tick
            self._armed = False
        else:
            self._armed = True
        return self.alarm, rose

    def reset(self) -> None:
        self.alarm = False
        self.rise_tick = None
        self._armed = True
        self._last_rise = None


def rank_joints(
    activity_predictions, current: int
) -> tuple[tuple[int, int, int, int], int]:
    """Joints by descending predicted activity; ties in sequential order.

    Sequential tie-breaking counts forward from the current joint, so an
    uninformative (all-equal) prediction vector degrades to the plain
    sequential switcher. The suggestion is the best-ranked joint that is not
    the current one.
    """
    preds = [float(v) for v in activity_predictions]
    if len(preds) != NUM_JOINTS:
        raise ConfigError(f"expected {NUM_JOINTS} predictions, got {len(preds)}")
    order = sorted(range(NUM_JOINTS), key=lambda j: (-preds[j], (j - current - 1) % NUM_JOINTS))
    ranking = tuple(order)
    suggested = next(j for j in ranking if j != current)
    return ranking, suggested


class SwitchAdvisor:
    """Per-tick decision state machine for one session."""

    def __init__(self, config: AdvisorConfig, joint_question_ids: list[str],
                 switch_question_id: str = "switch_event"):
        config.validate()
        if len(joint_question_ids) != NUM_JOINTS:
            raise ConfigError("need one activity question id per joint")
        self.config = config
        self.autonomy = config.autonomy
        self.joint_question_ids = list(joint_question_ids)
        self.switch_question_id = switch_question_id
        self.detector = TimingDetector(config)

    def set_autonomy(self, autonomy: Autonomy) -> None:
        self.autonomy = autonomy

    def step(
        self,
        tick: int,
        normalized: dict[str, float],
        user_pulse: bool,
        current_joint: int,
    ) -> AdvisorOutput:
        alarm, rose = self.detector.step(tick, normalized[self.switch_question_id])
        activity = [normalized[qid] for qid in self.joint_question_ids]
        ranking, suggested = rank_joints(activity, current_joint)

        action = AdvisorAction.NONE
        target: int | None = None
        if user_pulse:
            if self.autonomy is Autonomy.MANUAL:
                target = (current_joint + 1) % NUM_JOINTS   # baseline passthrough
            else:
                target = suggested
                action = AdvisorAction.REROUTED_USER_SWITCH
        elif rose and self.autonomy is Autonomy.AUTO:
            target = suggested
            action = AdvisorAction.AUTO_SWITCH

        return AdvisorOutput(
            timing_alarm=alarm,
            alarm_rose=rose,
            ranking=ranking,
            suggested_joint=suggested,
            action=action,
            lead_candidate_tick=self.detector.rise_tick,
            switch_target=target,
        )

    def reset(self) -> None:
        self.detector.reset()


@dataclass
class LeadTimeStats:
    leads: list[int] = field(default_factory=list)   # ticks, one per matched pulse
    matched_pulses: int = 0
    missed_pulses: int = 0
    false_alarms: int = 0

    @property
    def total_pulses(self) -> int:
        return self.matched_pulses + self.missed_pulses

    @property
    def anticipation_rate(self) -> float | None:
        total = self.total_pulses
        return self.matched_pulses / total if total else None

    @property
    def median_lead(self) -> float | None:
        if not self.leads:
            return None
        xs = sorted(self.leads)
        n = len(xs)
        mid = n // 2
        return float(xs[mid]) if n % 2 else (xs[mid - 1] + xs[mid]) / 2.0

    @property
    def mean_lead(self) -> float | None:
        return sum(self.leads) / len(self.leads) if self.leads else None


def lead_time_account(
    alarm_rise_ticks, pulse_ticks, window: int = 15
) -> LeadTimeStats:
    """Match each pulse to the nearest preceding alarm rise within the window.

    A rise may cover several pulses (one alarm ahead of a run of cues); rises
    covering no pulse are false alarms, pulses with no rise in the window are
    misses.
    """
    rises = sorted(alarm_rise_ticks)
    stats = LeadTimeStats()
    used = [False] * len(rises)
    for pulse in sorted(pulse_ticks):
        best = None
        for i, rise in enumerate(rises):
            if rise > pulse:
                break
            if pulse - rise <= window:
                best = i
        if best is None:
            stats.missed_pulses += 1
        else:
            stats.matched_pulses += 1
            stats.leads.append(pulse - rises[best])
            used[best] = True
    stats.false_alarms = sum(1 for u in used if not u)
    return stats
