"""Real-time predictive mode-switching engine for a simulated myoelectric arm.

The engine learns many temporally extended forecasts (general value functions)
about a user's switching cues and joint usage from the live 15 Hz sensorimotor
stream, verifies them against computed returns, and uses them to time and
target control-mode switches under adjustable autonomy.
"""

from .advisor import (
    AdvisorAction,
    AdvisorConfig,
    AdvisorOutput,
    Autonomy,
    SwitchAdvisor,
    lead_time_account,
    rank_joints,
)
from .armsim import (
    ArmConfig,
    ArmSim,
    ArmState,
    EmgSynthConfig,
    NoOpSwitchError,
    ScriptConfig,
    ScriptedUser,
    synth_emg,
)
from .config import (
    EngineConfig,
    HordeSpec,
    SimConfig,
    TileSpec,
    learning_fingerprint,
    load_config,
    save_config,
    with_seed,
)
from .engine import Engine, PilotInput, RunSummary, TickResult
from .errors import ConfigError, DivergenceError, LogFormatError, ModelMismatchError
from .gvf import (
    GvfLearner,
    GvfQuestion,
    LearnerParams,
    ReturnVerifier,
    gamma_for_timescale,
    normalize_prediction,
    truncation_horizon,
)
from .horde import Horde, HordeSnapshot, build_default_questions, make_cumulant
from .pipeline import (
    PipelineConfig,
    ProcessedSignals,
    SignalPipeline,
    StateVector,
    TraceBank,
    build_layout,
)
from .sample import JOINT_NAMES, NUM_JOINTS, TimeStepSample
from .sessionio import (
    EvalReport,
    LogReplayer,
    ModelFile,
    SessionLogWriter,
    evaluate,
    read_log,
    train_offline,
    write_eval_report,
)
from .tilecoder import (
    FeatureVector,
    TileCoder,
    TileCoderConfig,
    TilingGroup,
    active_count,
    default_tile_config,
)

__version__ = "0.1.0"
