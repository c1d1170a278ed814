"""실험 실행기와 CLI"""

from src.experiments.runner import (
    ExperimentOptions,
    ResultDocument,
    emit,
    run_named_experiment,
    run_script,
)
from src.experiments.script import ProtocolScript, ScriptOperation, parse_script

__all__ = [
    "ExperimentOptions",
    "ProtocolScript",
    "ResultDocument",
    "ScriptOperation",
    "emit",
    "parse_script",
    "run_named_experiment",
    "run_script",
]
