from .metrics import InsufficientAttemptsError, compilation_at_k, group_outcomes, pass_at_k
from .runner import (
    REGISTRY,
    AttemptJob,
    DirectoryRegistry,
    ExecOutcome,
    Limits,
    SandboxBusyError,
    SandboxConfig,
    ToolchainMissingError,
    run_attempt,
    run_attempts,
)
from .tasks import TaskPackage, load_attempts, load_tasks, write_task

__all__ = [
    "REGISTRY",
    "AttemptJob",
    "DirectoryRegistry",
    "ExecOutcome",
    "InsufficientAttemptsError",
    "Limits",
    "SandboxBusyError",
    "SandboxConfig",
    "TaskPackage",
    "ToolchainMissingError",
    "compilation_at_k",
    "group_outcomes",
    "load_attempts",
    "load_tasks",
    "pass_at_k",
    "run_attempt",
    "run_attempts",
    "write_task",
]
