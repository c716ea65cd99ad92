"""Hierarchical affordance learning laboratory (compiled core in hal._core)."""

from hal._core import (
    ChecksumError,
    ConfigError,
    Env,
    HalError,
    default_config,
    desk_config,
    evaluate_checkpoint,
    expand_preset,
    fit_filter_margin,
    git_blob_sha1,
    preset_names,
    read_metrics,
    recipes_text,
    resolve_config,
    tolerance_factor,
    train,
)

__all__ = [
    "ChecksumError",
    "ConfigError",
    "Env",
    "HalError",
    "default_config",
    "desk_config",
    "evaluate_checkpoint",
    "expand_preset",
    "fit_filter_margin",
    "git_blob_sha1",
    "preset_names",
    "read_metrics",
    "recipes_text",
    "resolve_config",
    "tolerance_factor",
    "train",
]
