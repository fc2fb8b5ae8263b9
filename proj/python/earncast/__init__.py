"""Quarterly earnings direction forecasting from fundamentals panels."""

import json

from ._earncast import (
    Config,
    EarncastError,
    GbdtModel,
    HyperParams,
    PcaModel,
    conditional_accuracy,
    enumerate_subsets,
    fit_gbdt,
    fit_pca,
    lagged_column_count,
    loads_gbdt,
    report,
    select_fill_period,
    synth,
)
from ._earncast import backtest as _backtest


def backtest(config):
    """Runs the backtest; returns (results_dir, list of per-subset records)."""
    out_dir, lines = _backtest(config)
    return out_dir, [json.loads(line) for line in lines]


__all__ = [
    "Config",
    "EarncastError",
    "GbdtModel",
    "HyperParams",
    "PcaModel",
    "backtest",
    "conditional_accuracy",
    "enumerate_subsets",
    "fit_gbdt",
    "fit_pca",
    "lagged_column_count",
    "loads_gbdt",
    "report",
    "select_fill_period",
    "synth",
]
