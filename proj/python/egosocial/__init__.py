"""Post-processing, fusion and evaluation for egocentric social interaction scores."""

import json

from ._core import (
    ConfigError,
    Error,
    IoError,
    UndefinedMetricError,
    ValidationError,
    average_precision,
    fuse_segment,
    max_score_filter,
    median_filter,
    oracle_ap,
    top1_accuracy,
)
from . import _core

__all__ = [
    "ConfigError",
    "Error",
    "IoError",
    "UndefinedMetricError",
    "ValidationError",
    "average_precision",
    "compare_ttm_methods",
    "fuse_segment",
    "generate_scenario",
    "max_score_filter",
    "median_filter",
    "oracle_ap",
    "run_pipeline",
    "top1_accuracy",
    "validate",
]


def validate(scores, segments=None, quality=None, labels=None, format="jsonl"):
    """Validate input files; returns the report as a dict."""
    return json.loads(_core.validate(scores, segments, quality, labels, format))


def run_pipeline(config_path):
    """Run a pipeline config file; returns the evaluation report as a dict."""
    return json.loads(_core.run_pipeline(config_path))


def generate_scenario(out_dir, seed=0, **fields):
    """Write a synthetic scenario; fields override the default config."""
    _core.synth_generate(json.dumps({"seed": seed, **fields}), out_dir)


def compare_ttm_methods(seed=0, **fields):
    """TTM mAP of raw/filtered visual, audio, and both fusion methods."""
    return _core.compare_ttm_methods(json.dumps({"seed": seed, **fields}))
