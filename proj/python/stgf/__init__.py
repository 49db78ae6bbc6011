"""Forecasting on mobility graphs.

Thin convenience layer over the compiled ``_stgf`` module: experiment
configurations are plain dicts here and cross into C++ as JSON text in the
same schema the command line tool reads.
"""

import json

from ._stgf import (
    ClassificationScores,
    MobilityGraph,
    PanelSeries,
    PopulationTable,
    Snapshot,
    StandardizationParams,
    apply_zscore,
    classification_scores,
    classification_targets,
    disparity_pvalue,
    extract_backbone,
    fit_zscore,
    generate_synthetic,
    invert_zscore,
    load_edge_list,
    load_panel,
    load_population,
    make_snapshots,
    moving_average,
    node_stats,
    propagation_matrix,
    quantile,
    rmse,
    save_edge_list,
    save_panel,
    split_chronological,
    summarize,
    target_of,
    window_of,
)
from . import _stgf

__version__ = "0.1.0"


def _to_json(config):
    if isinstance(config, str):
        return config
    return json.dumps(config)


def default_config():
    """Default experiment configuration as a dict."""
    return json.loads(_stgf.default_config_json())


def load_experiment_config(path):
    """Config dict from a config file or a manifest embedding one."""
    return json.loads(_stgf.load_experiment_config(str(path)))


def config_hash(config):
    """Stable hash of a configuration (dict or JSON text)."""
    return _stgf.config_hash(_to_json(config))


def validate_config(config):
    """Raises ValueError when the configuration (dict or JSON text) is invalid."""
    _stgf.validate_config(_to_json(config))


def run_experiment(config):
    """Runs the full pipeline and returns the result as a dict.

    Writes metrics.csv, predictions.csv, model.ckpt and manifest.json into
    the configuration's output_dir.
    """
    return _stgf.run_experiment(_to_json(config))


def evaluate_checkpoint(config, checkpoint_path):
    """Scores a saved checkpoint on the test split, no training."""
    return _stgf.evaluate_checkpoint(_to_json(config), str(checkpoint_path))


__all__ = [
    "ClassificationScores",
    "MobilityGraph",
    "PanelSeries",
    "PopulationTable",
    "Snapshot",
    "StandardizationParams",
    "apply_zscore",
    "classification_scores",
    "classification_targets",
    "config_hash",
    "default_config",
    "disparity_pvalue",
    "evaluate_checkpoint",
    "extract_backbone",
    "fit_zscore",
    "generate_synthetic",
    "invert_zscore",
    "load_edge_list",
    "load_experiment_config",
    "load_panel",
    "load_population",
    "make_snapshots",
    "moving_average",
    "node_stats",
    "propagation_matrix",
    "quantile",
    "rmse",
    "run_experiment",
    "save_edge_list",
    "save_panel",
    "split_chronological",
    "summarize",
    "target_of",
    "validate_config",
    "window_of",
]
