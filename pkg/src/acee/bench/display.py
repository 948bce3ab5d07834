"""Rich tables for experiment and estimation output."""

import math
from typing import Any, Dict

import pandas as pd
from rich.console import Console
from rich.table import Table

from ..effects import DagEffectEstimate, EffectReport
from .experiment import ExperimentResult


def _fmt(value: Any, digits: int = 4) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "-"
    if isinstance(value, float):
        return f"{value:.{digits}f}"
    return str(value)


def mse_table(table: pd.DataFrame, title: str = "Mean squared error of the ATE") -> Table:
    """One row per (model, n, n_source), one MSE column per method."""
    methods = list(dict.fromkeys(table["method"]))
    out = Table(title=title)
    for name in ("Model", "n", "n_source"):
        out.add_column(name, style="cyan")
    for method in methods:
        out.add_column(method, style="magenta", justify="right")
    keys = ["model", "n", "n_source"]
    for key, group in table.groupby(keys, sort=False):
        by_method = dict(zip(group["method"], group["mse"]))
        out.add_row(*(str(k) for k in key), *(_fmt(by_method.get(m)) for m in methods))
    return out


def print_experiment(console: Console, result: ExperimentResult) -> None:
    console.print(mse_table(result.mse_table()))
    if result.true_effect is not None:
        console.print(f"True effect: [bold]{result.true_effect:.5f}[/bold]")
    if len(result.failures):
        summary = result.failures.get_error_summary()
        console.print(f"[yellow]{summary['total_errors']} runs failed[/yellow]")
        for operation, stats in summary["operations"].items():
            console.print(f"  - {operation}: {stats['error_types']}")


def effect_table(report: EffectReport) -> Table:
    table = Table(title="Treatment effect")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", style="magenta", justify="right")
    table.add_row("Units", str(report.n))
    table.add_row("Treated / control", f"{int((report.D == 1).sum())} / {int((report.D == 0).sum())}")
    table.add_row("ATE", _fmt(report.ate))
    table.add_row("ATE (bias-corrected)", _fmt(report.ate_c))
    table.add_row("Neighbors (control, treated)", f"{report.neighbors.n_neighbors[0]}, {report.neighbors.n_neighbors[1]}")
    table.add_row("Draws per unit and arm", str(report.settings.get("M")))
    return table


def dag_effect_table(estimate: DagEffectEstimate) -> Table:
    table = Table(title=f"Total effect {estimate.k} -> {estimate.j}")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", style="magenta", justify="right")
    table.add_row("Contrast", f"do({estimate.k}={estimate.x1:g}) - do({estimate.k}={estimate.x0:g})")
    table.add_row("Estimate", _fmt(estimate.tau_hat))
    table.add_row("Std. error", _fmt(estimate.std_error))
    table.add_row("Units", str(estimate.contrasts.shape[0]))
    table.add_row("Conditioning", ", ".join(estimate.layout))
    return table


def key_value_table(title: str, values: Dict[str, Any], digits: int = 4) -> Table:
    table = Table(title=title)
    table.add_column("Field", style="cyan")
    table.add_column("Value", style="magenta")
    for key, value in values.items():
        table.add_row(key, _fmt(value, digits))
    return table
