"""Configuration, cached stage orchestration, parallel execution and the CLI."""

from .cache import STAGES, cache_root, dependency_hash
from .config import PipelineConfig, load_config, parse_config
from .dataset import export_dataset
from .parallel import run_parallel, task_seed
from .stages import RunReport, run_pipeline

__all__ = [
    "STAGES", "PipelineConfig", "RunReport", "cache_root", "dependency_hash", "export_dataset",
    "load_config", "parse_config", "run_parallel", "run_pipeline", "task_seed",
]
