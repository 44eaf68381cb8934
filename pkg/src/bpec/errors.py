"""Exception hierarchy; the CLI maps each category to its own exit code."""


class BpecError(Exception):
    exit_code = 1


class ConfigError(BpecError):
    exit_code = 2


class CorpusError(BpecError):
    exit_code = 3


class ModelError(BpecError):
    exit_code = 4


class TrainingError(ModelError):
    exit_code = 5


class EvaluationError(BpecError):
    exit_code = 6


class AnalysisError(BpecError):
    exit_code = 7
