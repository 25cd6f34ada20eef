from .config import ConfigError, PipelineConfig, config_from_dict, load_config
from .pipeline import PipelineError, RunReport, StageCount, run_pipeline
from .records import (
    CorpusReadError,
    RecordKind,
    SftRecord,
    Violation,
    read_jsonl,
    read_samples,
    validate_corpus,
    write_jsonl,
    write_samples,
)

__all__ = [
    "ConfigError",
    "CorpusReadError",
    "PipelineConfig",
    "PipelineError",
    "RecordKind",
    "RunReport",
    "SftRecord",
    "StageCount",
    "Violation",
    "config_from_dict",
    "load_config",
    "read_jsonl",
    "read_samples",
    "run_pipeline",
    "validate_corpus",
    "write_jsonl",
    "write_samples",
]
