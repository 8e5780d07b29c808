"""Experiment orchestration: configs, synthetic data, eval runs, sweeps."""

from .config import ExperimentConfig, load_config
from .pipeline import (
    SweepResult,
    make_judgments,
    run_retrieval_eval,
    run_summarization_eval,
    sweep_k,
)
from .synth import SynthSpec, generate_synth

__all__ = [
    "ExperimentConfig",
    "load_config",
    "make_judgments",
    "run_retrieval_eval",
    "run_summarization_eval",
    "sweep_k",
    "SweepResult",
    "SynthSpec",
    "generate_synth",
]
