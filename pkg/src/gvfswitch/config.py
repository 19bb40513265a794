"""Engine configuration: parameter blocks, file round-trip, canonical hashing.

The learning-relevant blocks (pipeline, tiles, questions, learner parameters)
are hashed into a 16-hex fingerprint that stamps every log and model file.
The session seed, run mode and advisor thresholds are deliberately outside the
fingerprint: a model trained on one session must be loadable against a log
recorded with a different seed, and only representation or question changes
make artifacts incompatible.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

from .advisor import AdvisorConfig, Autonomy
from .armsim import ArmConfig, EmgSynthConfig, ScriptConfig
from .errors import ConfigError
from .gvf import GvfQuestion, LearnerParams
from .hashing import hash_text
from .horde import build_default_questions
from .pipeline import PipelineConfig, build_layout
from .tilecoder import TileCoderConfig, default_tile_config


@dataclass(frozen=True)
class TileSpec:
    """How to build the tile coder; groups are derived from the state layout."""

    hash_bits: int = 20
    seed: int = 99


@dataclass(frozen=True)
class HordeSpec:
    timescale_steps: int = 10
    alpha_base: float = 0.1
    lam: float = 0.9
    replacing_traces: bool = False
    questions: tuple[GvfQuestion, ...] | None = None   # None = default bank

    def resolve_questions(self) -> list[GvfQuestion]:
        if self.questions is not None:
            return list(self.questions)
        return build_default_questions(self.timescale_steps)

    def learner_params(self) -> LearnerParams:
        return LearnerParams(
            alpha_base=self.alpha_base,
            lam=self.lam,
            replacing_traces=self.replacing_traces,
        )


@dataclass(frozen=True)
class SimConfig:
    arm: ArmConfig = field(default_factory=ArmConfig)
    emg: EmgSynthConfig = field(default_factory=EmgSynthConfig)
    script: ScriptConfig = field(default_factory=ScriptConfig)


@dataclass(frozen=True)
class EngineConfig:
    tick_rate_hz: float = 15.0
    seed: int = 1
    mode: str = "scripted"                  # scripted | piloted | replay
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    tiles: TileSpec = field(default_factory=TileSpec)
    horde: HordeSpec = field(default_factory=HordeSpec)
    advisor: AdvisorConfig = field(default_factory=AdvisorConfig)
    sim: SimConfig = field(default_factory=SimConfig)

    def validate(self) -> None:
        if self.tick_rate_hz <= 0:
            raise ConfigError("tick_rate_hz must be positive")
        if self.mode not in ("scripted", "piloted", "replay"):
            raise ConfigError(f"unknown mode '{self.mode}'")
        self.pipeline.validate()
        self.advisor.validate()
        self.sim.script.validate()

    def tile_config(self) -> TileCoderConfig:
        layout = build_layout(self.pipeline)
        return default_tile_config(
            layout, hash_bits=self.tiles.hash_bits, seed=self.tiles.seed
        )


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def learning_fingerprint(config: EngineConfig) -> str:
    """16-hex hash over everything that defines features and questions."""
    tile_cfg = config.tile_config()
    payload = {
        "pipeline": asdict(config.pipeline),
        "tiles": {
            "hash_bits": tile_cfg.hash_bits,
            "seed": tile_cfg.seed,
            "groups": [
                {
                    "dims": list(g.dim_indices),
                    "tiles": list(g.tiles_per_dim),
                    "tilings": g.num_tilings,
                }
                for g in tile_cfg.groups
            ],
        },
        "questions": [
            {"id": q.id, "cumulant": q.cumulant, "timescale": q.timescale_steps,
             "policy": q.policy}
            for q in config.horde.resolve_questions()
        ],
        "learner": {
            "alpha_base": config.horde.alpha_base,
            "lambda": config.horde.lam,
            "replacing": config.horde.replacing_traces,
        },
        "tick_rate_hz": config.tick_rate_hz,
    }
    return hash_text(_canonical(payload))


def config_to_dict(config: EngineConfig) -> dict:
    d = asdict(config)
    d["advisor"]["autonomy"] = config.advisor.autonomy.value
    if config.horde.questions is not None:
        d["horde"]["questions"] = [asdict(q) for q in config.horde.questions]
    return d


def config_from_dict(d: dict) -> EngineConfig:
    horde_d = dict(d.get("horde", {}))
    questions = horde_d.pop("questions", None)
    if questions is not None:
        questions = tuple(GvfQuestion(**q) for q in questions)
    advisor_d = dict(d.get("advisor", {}))
    if "autonomy" in advisor_d:
        advisor_d["autonomy"] = Autonomy(advisor_d["autonomy"])
    sim_d = d.get("sim", {})

    def _tup(block: dict, keys: tuple[str, ...]) -> dict:
        return {k: tuple(v) if k in keys and isinstance(v, list) else v
                for k, v in block.items()}

    pipeline_d = _tup(dict(d.get("pipeline", {})), ("trace_decays", "traced_signals"))
    arm_d = _tup(dict(sim_d.get("arm", {})), ("joint_gains", "init_pos"))
    script_d = _tup(
        dict(sim_d.get("script", {})),
        ("cycle_joints", "cycles_range", "contraction_range"),
    )
    return EngineConfig(
        tick_rate_hz=d.get("tick_rate_hz", 15.0),
        seed=d.get("seed", 1),
        mode=d.get("mode", "scripted"),
        pipeline=PipelineConfig(**pipeline_d),
        tiles=TileSpec(**d.get("tiles", {})),
        horde=HordeSpec(questions=questions, **horde_d),
        advisor=AdvisorConfig(**advisor_d),
        sim=SimConfig(
            arm=ArmConfig(**arm_d),
            emg=EmgSynthConfig(**sim_d.get("emg", {})),
            script=ScriptConfig(**script_d),
        ),
    )


def load_config(path: str) -> EngineConfig:
    with open(path, "r", encoding="utf-8") as f:
        return config_from_dict(json.load(f))


def save_config(config: EngineConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config_to_dict(config), f, indent=2, sort_keys=True)
        f.write("\n")


def with_seed(config: EngineConfig, seed: int) -> EngineConfig:
    return replace(config, seed=seed)
