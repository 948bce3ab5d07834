"""Command-line interface for acee."""

import json
import logging
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd
import typer
from pydantic import ValidationError
from rich.console import Console

from .bench import (
    ate_training_data,
    baseline_dag_regression,
    ingest_csv,
    run_experiment,
    train_generator,
    write_dataset_csv,
    write_results,
)
from .bench.display import dag_effect_table, effect_table, key_value_table, print_experiment
from .config import ExperimentConfig, Settings, load_experiment_config, load_settings, validate_configuration
from .diffusion import DiffusionGenerator, Schedule, ScoreModel, load_checkpoint, save_checkpoint
from .effects import (
    ObservationalDataset,
    dag_conditioning_layout,
    dag_training_data,
    estimate_dag_total_effect,
    estimate_effects,
    write_dag_effect,
    write_effect_report,
)
from .numerics import make_rng
from .proxy import eigen_gap_report, fit_factor_proxy, fit_residual_proxy, proxy_sufficiency_diagnostic
from .scm import Scm, bench_model, default_query, load_scm, simulate, true_ate
from .utils.error_handling import AceeError, ConfigError, error_record
from .utils.logging import setup_logging

app = typer.Typer(help="Augmented causal effect estimation with diffusion-generated counterfactuals")
console = Console()
logger = logging.getLogger(__name__)

_SIMULATE_STREAM = 0
_DIAGNOSTIC_STREAM = 4

TREATMENT = typer.Option("treatment", "--treatment", help="Treatment column (0/1)")
OUTCOME = typer.Option("outcome", "--outcome", help="Outcome column")
COVARIATES = typer.Option(None, "--covariates", help="Comma-separated covariate columns (default: all others)")
UNIT_ID = typer.Option(None, "--unit-id", help="Column holding integer unit ids")
RANK = typer.Option(None, "--q", min=1, help="Proxy rank (overrides the experiment config)")
EPOCHS = typer.Option(None, "--epochs", min=0, help="Training epochs (overrides the experiment config)")
DRAWS = typer.Option(None, "--draws", "-m", min=1, help="Conditional draws per unit and arm")


@dataclass
class CliState:
    settings: Settings
    experiment: ExperimentConfig
    config_path: Optional[Path]
    seed: int
    out: Optional[Path]

    def output_dir(self) -> Path:
        return self.out or self.experiment.output_dir or self.settings.output_dir


@contextmanager
def _errors() -> Iterator[None]:
    """Report package errors as one JSON record on stderr and exit non-zero."""
    try:
        yield
    except AceeError as exc:
        logger.debug("Command failed", exc_info=True)
        typer.echo(json.dumps({"error": error_record(exc)}, sort_keys=True), err=True)
        raise typer.Exit(1 if isinstance(exc, ConfigError) else 2) from exc


def _state(ctx: typer.Context) -> CliState:
    state = ctx.obj
    if not isinstance(state, CliState):
        raise typer.Exit(1)
    return state


def _split(value: Optional[str]) -> Optional[List[str]]:
    if value is None:
        return None
    return [part.strip() for part in value.split(",") if part.strip()]


def _experiment(state: CliState, q: Optional[int] = None, epochs: Optional[int] = None, draws: Optional[int] = None) -> ExperimentConfig:
    """The experiment config with command-line overrides applied."""
    config = state.experiment.with_settings(state.settings)
    train = config.train.model_copy(update={"seed": state.seed})
    if epochs is not None:
        train = train.model_copy(update={"epochs": epochs})
    update: Dict[str, Any] = {"train": train}
    if q is not None:
        update["q"] = q
    if draws is not None:
        update["M"] = draws
    return config.model_copy(update=update)


def _dataset(path: Path, treatment: str, outcome: str, covariates: Optional[str], unit_id: Optional[str]) -> ObservationalDataset:
    return ingest_csv(path, treatment, outcome, _split(covariates), unit_id)


def _scm(config: ExperimentConfig, name: Optional[str], scm_file: Optional[Path], shift: float = 0.0) -> Scm:
    if scm_file is not None:
        return load_scm(scm_file)
    name = name or config.model
    if name == "csv":
        raise ConfigError("name a benchmark model or pass --scm")
    v = None if config.v is None else np.asarray(config.v, dtype=np.float64)
    return bench_model(name, v=v, shift=shift)


def _schedule(state: CliState) -> Schedule:
    return Schedule.from_settings(state.settings)


@app.callback()
def main_options(
    ctx: typer.Context,
    config_file: Optional[Path] = typer.Option(None, "--config", "-c", help="Experiment configuration (JSON)"),
    settings_file: Optional[Path] = typer.Option(None, "--settings", help="Settings file (.env or JSON)"),
    seed: Optional[int] = typer.Option(None, "--seed", min=0, help="Master seed (bench uses the config seed list)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    debug: bool = typer.Option(False, "--debug", help="Enable debug logging"),
):
    """Global options shared by every command."""
    try:
        settings = load_settings(settings_file)
    except ValidationError as exc:
        console.print("[red]Configuration issues found:[/red]")
        for error in exc.errors():
            console.print(f"  - {'.'.join(str(p) for p in error['loc'])}: {error['msg']}")
        raise typer.Exit(1) from exc
    if debug:
        settings.debug = debug

    issues = validate_configuration(settings)
    if issues and ctx.invoked_subcommand != "config":
        console.print("[red]Configuration issues found:[/red]")
        for issue in issues:
            console.print(f"  - {issue}")
        raise typer.Exit(1)

    setup_logging(settings)
    with _errors():
        experiment = load_experiment_config(config_file) if config_file else ExperimentConfig()
    ctx.obj = CliState(settings, experiment, config_file, seed if seed is not None else settings.default_seed, out)


@app.command("simulate")
def simulate_command(
    ctx: typer.Context,
    model: Optional[str] = typer.Argument(None, help="Benchmark model (default: the config's model)"),
    n: int = typer.Option(500, "--n", min=1, help="Rows to draw"),
    shift: float = typer.Option(0.0, "--shift", help="Shift of every root distribution"),
    scm_file: Optional[Path] = typer.Option(None, "--scm", help="SCM description (JSON) to simulate instead"),
):
    """Draw an observational sample and write it as CSV."""
    state = _state(ctx)
    with _errors():
        scm = _scm(state.experiment, model, scm_file, shift)
        result = simulate(scm, n, make_rng(state.seed, _SIMULATE_STREAM, n))
        path = write_dataset_csv(result.dataset, state.output_dir() / f"{scm.name}.csv")

    values: Dict[str, Any] = {"Model": scm.name, "Rows": n, "Columns": ", ".join(result.dataset.columns), "Written": str(path)}
    arms = result.dataset.arm_counts()
    if arms:
        values["Treated / control"] = f"{arms[1]} / {arms[0]}"
    if scm.treatment is not None and scm_file is None:
        values["True ATE"] = true_ate(model or state.experiment.model, shift)
    console.print(key_value_table("Simulated sample", values))


@app.command("ingest")
def ingest_command(
    ctx: typer.Context,
    path: Path = typer.Argument(..., help="Headed CSV file"),
    treatment: str = TREATMENT,
    outcome: str = OUTCOME,
    covariates: Optional[str] = COVARIATES,
    unit_id: Optional[str] = UNIT_ID,
):
    """Validate a CSV and write it back in the canonical column layout."""
    state = _state(ctx)
    with _errors():
        dataset = _dataset(path, treatment, outcome, covariates, unit_id)
        written = write_dataset_csv(dataset, state.output_dir() / "dataset.csv")

    arms = dataset.arm_counts()
    console.print(
        key_value_table(
            "Ingested dataset",
            {
                "Rows": dataset.n,
                "Covariates": ", ".join(dataset.columns),
                "Treated / control": f"{arms[1]} / {arms[0]}",
                "Written": str(written),
            },
        )
    )


@app.command("fit-proxy")
def fit_proxy_command(
    ctx: typer.Context,
    path: Path = typer.Argument(..., help="Headed CSV file"),
    treatment: str = TREATMENT,
    outcome: str = OUTCOME,
    covariates: Optional[str] = COVARIATES,
    unit_id: Optional[str] = UNIT_ID,
    q: Optional[int] = RANK,
    max_q: int = typer.Option(5, "--max-q", min=1, help="Largest rank in the eigen-gap report"),
):
    """Fit the factor proxy and report the singular-value gaps."""
    state = _state(ctx)
    config = _experiment(state, q=q)
    with _errors():
        dataset = _dataset(path, treatment, outcome, covariates, unit_id)
        proxy = fit_factor_proxy(dataset, config.q, config.include_x, config.include_d, config.include_y)
        z, _ = dataset.stacked(config.include_x, config.include_d, config.include_y)
        gaps = eigen_gap_report(z, max_q)

    out_dir = state.output_dir()
    out_dir.mkdir(parents=True, exist_ok=True)
    frame = {"unit_id": dataset.unit_ids, **{f"S_{c}": proxy.s_hat[:, i] for i, c in enumerate(proxy.columns)}}
    written = out_dir / "proxy.csv"
    pd.DataFrame(frame).to_csv(written, index=False, float_format="%.17g")

    values: Dict[str, Any] = {"Rank q": proxy.q, "Columns": ", ".join(proxy.columns), "Suggested q": gaps.suggested_q}
    for i, s in enumerate(gaps.singular_values, start=1):
        values[f"Singular value {i}"] = float(s)
    values["Written"] = str(written)
    console.print(key_value_table("Factor proxy", values))


@app.command("diagnose")
def diagnose_command(
    ctx: typer.Context,
    path: Path = typer.Argument(..., help="Headed CSV file"),
    treatment: str = TREATMENT,
    outcome: str = OUTCOME,
    covariates: Optional[str] = COVARIATES,
    unit_id: Optional[str] = UNIT_ID,
    q: Optional[int] = RANK,
    permutations: int = typer.Option(199, "--permutations", min=99, help="Permutations for the p-value"),
    level: float = typer.Option(0.05, "--level", min=0.0, max=1.0, help="Test level"),
):
    """Test whether the proxy leaves structure in the outcome residual."""
    state = _state(ctx)
    config = _experiment(state, q=q)
    with _errors():
        dataset = _dataset(path, treatment, outcome, covariates, unit_id)
        proxy = fit_factor_proxy(dataset, config.q, config.include_x, config.include_d, config.include_y)
        result = proxy_sufficiency_diagnostic(dataset, proxy, make_rng(state.seed, _DIAGNOSTIC_STREAM), permutations)

    console.print(
        key_value_table(
            "Proxy sufficiency diagnostic",
            {
                "Statistic": result.statistic,
                "p-value": result.p_value,
                "Permutations": result.permutations,
                "Terms": ", ".join(result.terms) or "-",
                f"Rejects at {level:g}": result.rejects(level),
            },
        )
    )


def _fit_ate_generator(
    state: CliState, config: ExperimentConfig, dataset: ObservationalDataset, source: Optional[ObservationalDataset]
) -> Tuple[ScoreModel, Tuple[str, ...]]:
    _, layout, cond = ate_training_data(config, dataset)
    pretraining = None
    if source is not None:
        _, source_layout, source_cond = ate_training_data(config, source)
        if source_layout != layout:
            raise ConfigError("source and target columns differ", source=list(source_layout), target=list(layout))
        pretraining = (source_cond, source.Y)
    return train_generator(config, cond, dataset.Y, layout, _schedule(state), pretraining), layout


@app.command("train")
def train_command(
    ctx: typer.Context,
    path: Path = typer.Argument(..., help="Headed CSV file"),
    treatment: str = TREATMENT,
    outcome: str = OUTCOME,
    covariates: Optional[str] = COVARIATES,
    unit_id: Optional[str] = UNIT_ID,
    source: Optional[Path] = typer.Option(None, "--source", help="Auxiliary CSV for source pretraining"),
    q: Optional[int] = RANK,
    epochs: Optional[int] = EPOCHS,
):
    """Train the conditional generator and write a checkpoint."""
    state = _state(ctx)
    config = _experiment(state, q=q, epochs=epochs)
    with _errors():
        dataset = _dataset(path, treatment, outcome, covariates, unit_id)
        auxiliary = None if source is None else _dataset(source, treatment, outcome, covariates, unit_id)
        model, layout = _fit_ate_generator(state, config, dataset, auxiliary)
        written = save_checkpoint(model, state.output_dir() / "model.json")

    console.print(
        key_value_table(
            "Trained generator",
            {
                "Rows": dataset.n,
                "Source rows": 0 if auxiliary is None else auxiliary.n,
                "Conditioning": ", ".join(layout),
                "Checkpoint": str(written),
            },
        )
    )


@app.command("estimate")
def estimate_command(
    ctx: typer.Context,
    path: Path = typer.Argument(..., help="Headed CSV file"),
    treatment: str = TREATMENT,
    outcome: str = OUTCOME,
    covariates: Optional[str] = COVARIATES,
    unit_id: Optional[str] = UNIT_ID,
    checkpoint: Optional[Path] = typer.Option(None, "--model", help="Checkpoint from `train` (trains one otherwise)"),
    q: Optional[int] = RANK,
    epochs: Optional[int] = EPOCHS,
    draws: Optional[int] = DRAWS,
    neighbors: Optional[int] = typer.Option(None, "--neighbors", min=1, help="Neighbors per arm (default ceil(n^0.4))"),
):
    """Estimate individual and average treatment effects."""
    state = _state(ctx)
    config = _experiment(state, q=q, epochs=epochs, draws=draws)
    with _errors():
        dataset = _dataset(path, treatment, outcome, covariates, unit_id)
        proxy, layout, _ = ate_training_data(config, dataset)
        if checkpoint is not None:
            model = load_checkpoint(checkpoint)
            if tuple(model.layout) != tuple(layout):
                raise ConfigError(
                    "checkpoint was trained on a different conditioning layout",
                    checkpoint=list(model.layout),
                    data=list(layout),
                )
        else:
            model, _ = _fit_ate_generator(state, config, dataset, None)
        report = estimate_effects(
            dataset,
            proxy,
            DiffusionGenerator(model),
            M=config.M,
            N=neighbors if neighbors is not None else config.N,
            seed=state.seed,
            include_self=config.include_self,
        )
        csv_path, json_path = write_effect_report(report, state.output_dir())

    console.print(effect_table(report))
    console.print(f"Wrote {csv_path} and {json_path}")


@app.command("dag-effect")
def dag_effect_command(
    ctx: typer.Context,
    model: Optional[str] = typer.Argument(None, help="Benchmark model to simulate (default: the config's model)"),
    data: Optional[Path] = typer.Option(None, "--data", help="Headed CSV of observed nodes instead of a simulation"),
    order: Optional[str] = typer.Option(None, "--order", help="Comma-separated causal order of the CSV columns"),
    treatment: Optional[str] = typer.Option(None, "--treatment", help="Intervened node"),
    outcome: Optional[str] = typer.Option(None, "--outcome", help="Target node"),
    x1: Optional[float] = typer.Option(None, "--x1", help="Treatment level"),
    x0: Optional[float] = typer.Option(None, "--x0", help="Reference level"),
    n: int = typer.Option(500, "--n", min=10, help="Rows to simulate"),
    q: Optional[int] = RANK,
    epochs: Optional[int] = EPOCHS,
    draws: Optional[int] = DRAWS,
):
    """Estimate the total effect of one node on another in a DAG."""
    state = _state(ctx)
    config = _experiment(state, q=q, epochs=epochs, draws=draws)
    query = config.query
    with _errors():
        k = treatment or query.treatment
        j = outcome or query.outcome
        if data is not None:
            if not k or not j:
                raise ConfigError("--treatment and --outcome are required with --data")
            observed = ingest_csv(data, None, None)
            X, columns = observed.X, list(observed.columns)
            causal_order = _split(order) or columns
        else:
            scm = _scm(config, model, None)
            columns = list(scm.dag.observed_order())
            X = simulate(scm, n, make_rng(state.seed, _SIMULATE_STREAM, n)).matrix(columns)
            causal_order = columns
            if not k or not j:
                default_k, default_j = default_query(model or config.model)
                k, j = k or default_k, j or default_j
        level1 = query.x1 if x1 is None else x1
        level0 = query.x0 if x0 is None else x0

        proxy = fit_residual_proxy(X, config.q, columns) if config.include_x else None
        cond, y = dag_training_data(X, columns, causal_order, k, j, proxy)
        layout = dag_conditioning_layout(causal_order, k)
        generator = train_generator(config, cond, y, layout, _schedule(state))
        estimate = estimate_dag_total_effect(
            X, columns, causal_order, k, j, DiffusionGenerator(generator), level1, level0, proxy, M=config.M, seed=state.seed
        )
        regression = baseline_dag_regression(X, columns, causal_order, k, j)
        csv_path, json_path = write_dag_effect(estimate, state.output_dir())

    console.print(dag_effect_table(estimate))
    console.print(f"Regression adjustment (per unit of {k}): {regression.ate:.4f} ± {regression.std_error:.4f}")
    console.print(f"Wrote {csv_path} and {json_path}")


@app.command("bench")
def bench_command(
    ctx: typer.Context,
    config_file: Optional[Path] = typer.Argument(None, help="Experiment configuration (default: --config)"),
    workers: Optional[int] = typer.Option(None, "--workers", min=1, help="Parallel replication workers"),
):
    """Run a replicated experiment and write results.csv and summary.json.

    Replications follow the seed list of the experiment config; --seed does not apply.
    """
    state = _state(ctx)
    with _errors():
        if config_file is not None:
            state.experiment = load_experiment_config(config_file)
        elif state.config_path is None:
            raise ConfigError("bench needs an experiment configuration (argument or --config)")
        result = run_experiment(state.experiment, state.settings, workers)
        csv_path, json_path = write_results(result, state.output_dir())

    print_experiment(console, result)
    console.print(f"Wrote {csv_path} and {json_path}")


@app.command("config")
def show_config(ctx: typer.Context):
    """Show current configuration."""
    state = _state(ctx)
    settings = state.settings

    console.print("[bold blue]acee configuration[/bold blue]")
    console.print(f"Output directory: {settings.output_dir}")
    console.print(f"Default seed: {settings.default_seed}")
    console.print(f"Workers: {settings.workers}")
    console.print(f"Draws per unit (M): {settings.mc_draws}")
    console.print(f"Diffusion: tau in [{settings.tau_min:g}, {settings.tau_max:g}], {settings.sampler_steps} steps")
    console.print(f"Debug mode: {settings.debug}")
    console.print(f"Log level: {settings.log_level} ({settings.log_format})")
    if state.config_path is not None:
        console.print(f"Experiment: {state.config_path} ({state.experiment.kind}, model {state.experiment.model})")

    issues = validate_configuration(settings)
    if issues:
        console.print("\n[red]Configuration issues:[/red]")
        for issue in issues:
            console.print(f"  - {issue}")
        raise typer.Exit(1)
    console.print("\n[green]✓ Configuration is valid[/green]")


def main():
    """Main entry point."""
    app()


if __name__ == "__main__":
    main()
