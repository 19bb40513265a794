"""Exception types shared across the engine."""


class ConfigError(ValueError):
    """A configuration is internally inconsistent or does not match its data."""


class ModelMismatchError(ConfigError):
    """A persisted model was produced under a different learning configuration."""


class LogFormatError(ValueError):
    """A session log file is malformed or has an unsupported version."""


class DivergenceError(RuntimeError):
    """A learner produced a non-finite TD error; learning must halt."""

    def __init__(self, question_id: str, step: int, value: float):
        super().__init__(
            f"non-finite TD error for question '{question_id}' at step {step}: {value!r}"
        )
        self.question_id = question_id
        self.step = step
        self.value = value
