"""Session logs, model files, offline training and evaluation.

Log format: line-delimited JSON, one self-describing record per tick after a
single header line. Every float is written as a C99 hexadecimal float literal
(``float.hex()``), so a parsed log reproduces the recorded values bit for bit
on any platform. Field order inside a record:

    header: {"format", "version", "fingerprint", "seed", "tick_rate_hz", "config"}
    record: {"t": tick,
             "s": {"emg", "pos", "vel", "pulse", "active"},          # raw sample
             "p": {"mav", "drive", "switch"},                         # processed
             "q": {qid: {"raw", "norm", "delta"}},                    # predictions
             "m": {qid: [[step, return, prediction], ...]},           # matured pairs
             "a": {"alarm", "rose", "rank", "sugg", "action",
                   "lead_tick", "target"},                            # advisor
             "prov": "user" | "auto" | "none"}

Model files are little-endian binary: magic ``GVFS``, format version, the
16-hex learning fingerprint, question count, then per question the id, the
timescale, gamma and the dense float64 weight vector.
"""

from __future__ import annotations

import json
import math
import struct
import time
from dataclasses import dataclass, field

import numpy as np

from .advisor import SwitchAdvisor, lead_time_account
from .config import EngineConfig, config_from_dict, config_to_dict, learning_fingerprint
from .engine import TickResult
from .errors import ConfigError, LogFormatError, ModelMismatchError
from .gvf import GvfQuestion
from .horde import Horde
from .pipeline import ProcessedSignals, SignalPipeline
from .sample import JOINT_NAMES, TimeStepSample
from .tilecoder import TileCoder

LOG_FORMAT = "gvfswitch-log"
LOG_VERSION = 1
MODEL_MAGIC = b"GVFS"
MODEL_VERSION = 1


def _hex(x: float) -> str:
    return float(x).hex()


def _hexlist(xs) -> list[str]:
    return [float(x).hex() for x in xs]


def _unhex(s: str) -> float:
    return float.fromhex(s)


def _unhexarray(xs) -> np.ndarray:
    return np.array([float.fromhex(s) for s in xs], dtype=float)


# ---------------------------------------------------------------------------
# log writing
# ---------------------------------------------------------------------------


class SessionLogWriter:
    """Append-only tick log; single producer, records in tick order."""

    def __init__(self, path: str, config: EngineConfig):
        self.path = path
        self._fh = open(path, "w", encoding="utf-8")
        self._next_step = 0
        header = {
            "format": LOG_FORMAT,
            "version": LOG_VERSION,
            "fingerprint": learning_fingerprint(config),
            "seed": config.seed,
            "tick_rate_hz": config.tick_rate_hz,
            "config": config_to_dict(config),
        }
        self._fh.write(json.dumps(header, sort_keys=True) + "\n")

    def write_tick(self, result: TickResult) -> None:
        if result.sample.step != self._next_step:
            raise LogFormatError(
                f"records must be contiguous: expected step {self._next_step}, "
                f"got {result.sample.step}"
            )
        self._next_step += 1
        s = result.sample
        p = result.processed
        a = result.advisor
        record = {
            "t": s.step,
            "s": {
                "emg": _hexlist(s.emg_raw),
                "pos": _hexlist(s.joint_pos),
                "vel": _hexlist(s.joint_vel),
                "pulse": int(s.switch_pulse),
                "active": int(s.active_joint),
            },
            "p": {
                "mav": _hexlist(p.emg_mav),
                "drive": _hex(p.ch_drive),
                "switch": _hex(p.ch_switch),
            },
            "q": {
                qid: {
                    "raw": _hex(row.raw),
                    "norm": _hex(row.normalized),
                    "delta": None if row.delta is None else _hex(row.delta),
                }
                for qid, row in result.snapshot.questions.items()
            },
            "a": {
                "alarm": a.timing_alarm,
                "rose": a.alarm_rose,
                "rank": list(a.ranking),
                "sugg": a.suggested_joint,
                "action": a.action.value,
                "lead_tick": a.lead_candidate_tick,
                "target": a.switch_target,
            },
            "prov": result.provenance,
        }
        matured = {
            qid: [[m.step, _hex(m.computed_return), _hex(m.prediction)] for m in row.matured]
            for qid, row in result.snapshot.questions.items()
            if row.matured
        }
        if matured:
            record["m"] = matured
        self._fh.write(json.dumps(record, sort_keys=True) + "\n")

    def flush(self) -> None:
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


# ---------------------------------------------------------------------------
# log reading
# ---------------------------------------------------------------------------


@dataclass
class LogHeader:
    fingerprint: str
    seed: int
    tick_rate_hz: float
    config: dict
    version: int


@dataclass
class LogRecord:
    step: int
    sample: TimeStepSample
    processed: ProcessedSignals
    predictions: dict[str, tuple[float, float, float | None]]
    matured: dict[str, list[tuple[int, float, float]]]
    advisor: dict
    provenance: str


@dataclass
class SessionLog:
    header: LogHeader
    records: list[LogRecord]
    truncation_diagnostic: str | None = None

    def engine_config(self) -> EngineConfig:
        return config_from_dict(self.header.config)


def _parse_record(obj: dict, tick_rate_hz: float) -> LogRecord:
    s = obj["s"]
    step = obj["t"]
    sample = TimeStepSample(
        step=step,
        time_s=step / tick_rate_hz,
        emg_raw=_unhexarray(s["emg"]),
        joint_pos=_unhexarray(s["pos"]),
        joint_vel=_unhexarray(s["vel"]),
        switch_pulse=int(s["pulse"]),
        active_joint=int(s["active"]),
    )
    p = obj["p"]
    processed = ProcessedSignals(
        emg_mav=_unhexarray(p["mav"]),
        ch_drive=_unhex(p["drive"]),
        ch_switch=_unhex(p["switch"]),
    )
    predictions = {
        qid: (
            _unhex(row["raw"]),
            _unhex(row["norm"]),
            None if row["delta"] is None else _unhex(row["delta"]),
        )
        for qid, row in obj["q"].items()
    }
    matured = {
        qid: [(int(t0), _unhex(g), _unhex(pred)) for t0, g, pred in rows]
        for qid, rows in obj.get("m", {}).items()
    }
    return LogRecord(
        step=step,
        sample=sample,
        processed=processed,
        predictions=predictions,
        matured=matured,
        advisor=obj["a"],
        provenance=obj["prov"],
    )


def read_log(path: str) -> SessionLog:
    """Parse a whole session log; tolerates a truncated final line."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.read()
    lines = raw.split("\n")
    ends_clean = raw.endswith("\n")
    if ends_clean:
        lines = lines[:-1]
    if not lines:
        raise LogFormatError(f"{path}: empty file")
    try:
        header_obj = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise LogFormatError(f"{path}: unreadable header: {e}") from e
    if header_obj.get("format") != LOG_FORMAT:
        raise LogFormatError(f"{path}: not a {LOG_FORMAT} file")
    if header_obj.get("version") != LOG_VERSION:
        raise LogFormatError(
            f"{path}: unsupported version {header_obj.get('version')}"
        )
    if "fingerprint" not in header_obj:
        raise LogFormatError(f"{path}: header missing config fingerprint")
    header = LogHeader(
        fingerprint=header_obj["fingerprint"],
        seed=header_obj["seed"],
        tick_rate_hz=header_obj["tick_rate_hz"],
        config=header_obj["config"],
        version=header_obj["version"],
    )
    records: list[LogRecord] = []
    diagnostic = None
    for i, line in enumerate(lines[1:], start=1):
        is_last = i == len(lines) - 1
        try:
            obj = json.loads(line)
            record = _parse_record(obj, header.tick_rate_hz)
        except (json.JSONDecodeError, KeyError, ValueError) as e:
            if is_last and not ends_clean:
                diagnostic = (
                    f"truncated final line dropped; last whole tick is "
                    f"{records[-1].step if records else 'none'}"
                )
                break
            raise LogFormatError(f"{path}: malformed record on line {i + 1}: {e}") from e
        if record.step != len(records):
            raise LogFormatError(
                f"{path}: non-contiguous tick {record.step} on line {i + 1}"
            )
        records.append(record)
    return SessionLog(header=header, records=records, truncation_diagnostic=diagnostic)


# ---------------------------------------------------------------------------
# model files
# ---------------------------------------------------------------------------


@dataclass
class ModelFile:
    fingerprint: str
    entries: list[tuple[GvfQuestion, np.ndarray]]

    @staticmethod
    def from_horde(horde: Horde, fingerprint: str) -> "ModelFile":
        return ModelFile(
            fingerprint=fingerprint,
            entries=[
                (q, learner.weights.copy())
                for q, learner in zip(horde.questions, horde.learners)
            ],
        )

    def save(self, path: str) -> None:
        with open(path, "wb") as fh:
            fh.write(MODEL_MAGIC)
            fh.write(struct.pack("<I", MODEL_VERSION))
            fp = self.fingerprint.encode("ascii")
            if len(fp) != 16:
                raise ConfigError(f"fingerprint must be 16 hex chars, got {self.fingerprint!r}")
            fh.write(fp)
            fh.write(struct.pack("<I", len(self.entries)))
            for question, weights in self.entries:
                ident = question.id.encode("utf-8")
                fh.write(struct.pack("<I", len(ident)))
                fh.write(ident)
                fh.write(struct.pack("<Id", question.timescale_steps, question.gamma))
                w = np.ascontiguousarray(weights, dtype="<f8")
                fh.write(struct.pack("<Q", w.shape[0]))
                fh.write(w.tobytes())

    @staticmethod
    def load(path: str) -> "ModelFile":
        with open(path, "rb") as fh:
            magic = fh.read(4)
            if magic != MODEL_MAGIC:
                raise ConfigError(f"{path}: bad magic {magic!r}")
            (version,) = struct.unpack("<I", fh.read(4))
            if version != MODEL_VERSION:
                raise ConfigError(f"{path}: unsupported model version {version}")
            fingerprint = fh.read(16).decode("ascii")
            (count,) = struct.unpack("<I", fh.read(4))
            entries: list[tuple[GvfQuestion, np.ndarray]] = []
            for _ in range(count):
                (id_len,) = struct.unpack("<I", fh.read(4))
                ident = fh.read(id_len).decode("utf-8")
                timescale, gamma = struct.unpack("<Id", fh.read(12))
                (n,) = struct.unpack("<Q", fh.read(8))
                weights = np.frombuffer(fh.read(8 * n), dtype="<f8").astype(float)
                question = GvfQuestion(ident, cumulant="", timescale_steps=timescale)
                if abs(question.gamma - gamma) > 1e-12:
                    raise ConfigError(
                        f"{path}: stored gamma {gamma} inconsistent with timescale "
                        f"{timescale} for '{ident}'"
                    )
                entries.append((question, weights))
            return ModelFile(fingerprint=fingerprint, entries=entries)

    def weights_by_id(self) -> dict[str, np.ndarray]:
        return {q.id: w for q, w in self.entries}


# ---------------------------------------------------------------------------
# replaying a log through the learning stack
# ---------------------------------------------------------------------------


class LogReplayer:
    """Feeds logged raw samples back through pipeline + horde (+ advisor)."""

    def __init__(self, log: SessionLog):
        self.log = log
        self.config = log.engine_config()
        self.fingerprint = learning_fingerprint(self.config)
        if self.fingerprint != log.header.fingerprint:
            raise ModelMismatchError(
                "log header fingerprint does not match its own config block"
            )
        self.pipeline = SignalPipeline(self.config.pipeline)
        self.tile_coder = TileCoder(self.config.tile_config(), self.pipeline.layout)
        self.horde = Horde(
            self.config.horde.resolve_questions(),
            self.config.horde.learner_params(),
            self.tile_coder,
            self.config.pipeline,
        )
        joint_qids = [f"joint_{name}" for name in JOINT_NAMES]
        self.advisor = SwitchAdvisor(self.config.advisor, joint_qids)

    def run_pass(
        self,
        learn: bool,
        run_advisor: bool = False,
        collect_core_times: bool = False,
    ) -> "PassResult":
        """One full traversal of the log. Pipeline and traces start fresh."""
        self.pipeline.reset()
        self.horde.reset_traces()
        self.horde.reset_verifiers()
        self.advisor.reset()
        result = PassResult()
        sq = {q.id: 0.0 for q in self.horde.questions}
        n = {q.id: 0 for q in self.horde.questions}
        for record in self.log.records:
            t0 = time.perf_counter() if collect_core_times else 0.0
            processed, state = self.pipeline.step(record.sample)
            snapshot = self.horde.step(record.sample, processed, state, learn=learn)
            advisor_out = None
            if run_advisor:
                normalized = {qid: q.normalized for qid, q in snapshot.questions.items()}
                advisor_out = self.advisor.step(
                    record.step,
                    normalized,
                    bool(record.sample.switch_pulse),
                    record.sample.active_joint,
                )
                if advisor_out.alarm_rose:
                    result.alarm_rise_ticks.append(record.step)
                if record.sample.switch_pulse:
                    result.pulse_suggestions.append(
                        (record.step, advisor_out.suggested_joint)
                    )
            if collect_core_times:
                result.core_seconds.append(time.perf_counter() - t0)
            for qid, row in snapshot.questions.items():
                for m in row.matured:
                    sq[qid] += (m.prediction - m.computed_return) ** 2
                    n[qid] += 1
        result.rmse_raw = {
            qid: math.sqrt(sq[qid] / n[qid]) if n[qid] else None for qid in sq
        }
        result.matured_counts = dict(n)
        return result


@dataclass
class PassResult:
    rmse_raw: dict[str, float | None] = field(default_factory=dict)
    matured_counts: dict[str, int] = field(default_factory=dict)
    alarm_rise_ticks: list[int] = field(default_factory=list)
    pulse_suggestions: list[tuple[int, int]] = field(default_factory=list)
    core_seconds: list[float] = field(default_factory=list)


# ---------------------------------------------------------------------------
# offline training and evaluation
# ---------------------------------------------------------------------------


@dataclass
class TrainResult:
    model: ModelFile
    rmse_per_pass: dict[str, list[float | None]]


def train_offline(log_path: str, passes: int, out_model: str | None = None) -> TrainResult:
    """Replay a logged session `passes` times with learning on.

    Weights persist across passes; eligibility traces and pipeline state reset
    at the start of each pass so no pass sees a fabricated seam between the
    last and first ticks.
    """
    if passes < 1:
        raise ConfigError("passes must be >= 1")
    log = read_log(log_path)
    replayer = LogReplayer(log)
    curves: dict[str, list[float | None]] = {q.id: [] for q in replayer.horde.questions}
    for _ in range(passes):
        result = replayer.run_pass(learn=True)
        for qid, value in result.rmse_raw.items():
            curves[qid].append(value)
    model = ModelFile.from_horde(replayer.horde, replayer.fingerprint)
    if out_model is not None:
        model.save(out_model)
    return TrainResult(model=model, rmse_per_pass=curves)


def continue_training(replayer: LogReplayer, passes: int) -> dict[str, list[float | None]]:
    """Extra passes on an existing replayer (weights carry over)."""
    curves: dict[str, list[float | None]] = {q.id: [] for q in replayer.horde.questions}
    for _ in range(passes):
        result = replayer.run_pass(learn=True)
        for qid, value in result.rmse_raw.items():
            curves[qid].append(value)
    return curves


def next_used_joint(records: list[LogRecord], pulse_index: int, move_eps: float) -> int | None:
    """The first joint that actually moves after a switch cue."""
    for record in records[pulse_index + 1 :]:
        j = record.sample.active_joint
        if abs(float(record.sample.joint_vel[j])) >= move_eps:
            return j
    return None


@dataclass
class EvalReport:
    ticks: int
    duration_s: float
    num_pulses: int
    anticipation_rate: float | None
    median_lead_ticks: float | None
    mean_lead_ticks: float | None
    false_alarms_per_min: float
    top1_next_joint_accuracy: float | None
    rmse_raw: dict[str, float | None]
    rmse_normalized: dict[str, float | None]
    matured_counts: dict[str, int]
    core_ms_mean: float
    core_ms_p99: float

    def metrics_dict(self) -> dict:
        """Deterministic part of the report (no wall-clock measurements)."""
        return {
            "ticks": self.ticks,
            "duration_s": self.duration_s,
            "num_pulses": self.num_pulses,
            "anticipation_rate": self.anticipation_rate,
            "median_lead_ticks": self.median_lead_ticks,
            "mean_lead_ticks": self.mean_lead_ticks,
            "false_alarms_per_min": self.false_alarms_per_min,
            "top1_next_joint_accuracy": self.top1_next_joint_accuracy,
            "rmse_raw": self.rmse_raw,
            "rmse_normalized": self.rmse_normalized,
            "matured_counts": self.matured_counts,
        }

    def to_dict(self) -> dict:
        d = self.metrics_dict()
        d["timing"] = {"core_ms_mean": self.core_ms_mean, "core_ms_p99": self.core_ms_p99}
        return d

    def to_text(self, tick_rate_hz: float = 15.0) -> str:
        ms_per_tick = 1000.0 / tick_rate_hz

        def fmt(v, scale=1.0, suffix=""):
            return "n/a" if v is None else f"{v * scale:.3f}{suffix}"

        lines = [
            "evaluation report",
            "-" * 46,
            f"{'ticks':<28}{self.ticks}",
            f"{'duration (s)':<28}{self.duration_s:.1f}",
            f"{'switch cues':<28}{self.num_pulses}",
            f"{'anticipation rate':<28}{fmt(self.anticipation_rate)}",
            f"{'median lead (ticks)':<28}{fmt(self.median_lead_ticks)}",
            f"{'median lead (ms)':<28}{fmt(self.median_lead_ticks, ms_per_tick)}",
            f"{'false alarms / min':<28}{self.false_alarms_per_min:.3f}",
            f"{'top-1 next-joint accuracy':<28}{fmt(self.top1_next_joint_accuracy)}",
            f"{'core work mean (ms)':<28}{self.core_ms_mean:.3f}",
            f"{'core work p99 (ms)':<28}{self.core_ms_p99:.3f}",
            "",
            f"{'question':<20}{'RMSE raw':>12}{'RMSE norm':>12}{'pairs':>8}",
        ]
        for qid, raw in self.rmse_raw.items():
            norm = self.rmse_normalized[qid]
            lines.append(
                f"{qid:<20}"
                f"{('n/a' if raw is None else f'{raw:.4f}'):>12}"
                f"{('n/a' if norm is None else f'{norm:.4f}'):>12}"
                f"{self.matured_counts.get(qid, 0):>8}"
            )
        return "\n".join(lines) + "\n"


def evaluate(
    model: ModelFile | str,
    log_path: str,
    online_learning: bool = False,
    allow_mismatch: bool = False,
    move_eps: float = 0.02,
    match_window_ticks: int = 15,
) -> EvalReport:
    """Replay a log against a model with frozen weights and score everything."""
    if isinstance(model, str):
        model = ModelFile.load(model)
    log = read_log(log_path)
    if model.fingerprint != log.header.fingerprint and not allow_mismatch:
        raise ModelMismatchError(
            f"model fingerprint {model.fingerprint} does not match log "
            f"fingerprint {log.header.fingerprint} (pass allow_mismatch to override)"
        )
    replayer = LogReplayer(log)
    replayer.horde.set_weights(model.weights_by_id())
    result = replayer.run_pass(
        learn=online_learning, run_advisor=True, collect_core_times=True
    )

    pulse_ticks = [r.step for r in log.records if r.sample.switch_pulse]
    stats = lead_time_account(result.alarm_rise_ticks, pulse_ticks, match_window_ticks)
    duration_s = len(log.records) / log.header.tick_rate_hz
    minutes = duration_s / 60.0 if duration_s > 0 else 1.0

    step_to_index = {r.step: i for i, r in enumerate(log.records)}
    correct = 0
    scored = 0
    for step, suggested in result.pulse_suggestions:
        truth = next_used_joint(log.records, step_to_index[step], move_eps)
        if truth is None:
            continue
        scored += 1
        if truth == suggested:
            correct += 1

    gammas = {q.id: q.gamma for q in replayer.horde.questions}
    rmse_norm = {
        qid: None if v is None else v * (1.0 - gammas[qid])
        for qid, v in result.rmse_raw.items()
    }
    core = sorted(result.core_seconds)
    return EvalReport(
        ticks=len(log.records),
        duration_s=duration_s,
        num_pulses=len(pulse_ticks),
        anticipation_rate=stats.anticipation_rate,
        median_lead_ticks=stats.median_lead,
        mean_lead_ticks=stats.mean_lead,
        false_alarms_per_min=stats.false_alarms / minutes,
        top1_next_joint_accuracy=(correct / scored) if scored else None,
        rmse_raw=result.rmse_raw,
        rmse_normalized=rmse_norm,
        matured_counts=result.matured_counts,
        core_ms_mean=1000.0 * (sum(core) / len(core)) if core else 0.0,
        core_ms_p99=1000.0 * core[min(len(core) - 1, int(0.99 * len(core)))] if core else 0.0,
    )


def write_eval_report(report: EvalReport, path: str, tick_rate_hz: float = 15.0) -> None:
    """Structured JSON document plus the plain-text summary table."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(path + ".txt", "w", encoding="utf-8") as fh:
        fh.write(report.to_text(tick_rate_hz))
