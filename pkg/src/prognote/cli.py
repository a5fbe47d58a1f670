"""Command-line interface for the pipeline stages and the HTTP service."""
from __future__ import annotations

import functools
import json
from pathlib import Path

import click

from . import __version__
from .config import load_config
from .exceptions import PrognoteError
from .pipeline import (REPORT_FILE, build_service_state, run_build_dataset,
                       run_evaluate, run_predict, run_train, run_train_embed)
from .synth import SynthConfig, generate_cohort, write_cohort_files


def _fail_on_error(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except PrognoteError as exc:
            raise click.ClickException(str(exc)) from exc
        except FileNotFoundError as exc:
            raise click.ClickException(f"missing file: {exc.filename or exc}") from exc
    return wrapper


config_option = click.option(
    "--config", "config_path", required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Pipeline TOML config file.")


@click.group()
@click.version_option(version=__version__, prog_name="prognote")
def main():
    """Survival-probability curves from longitudinal clinical notes."""


@main.command()
@click.option("--n", "n_patients", type=int, required=True, help="Number of patients.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", required=True,
              type=click.Path(file_okay=False, path_type=Path))
@click.option("--hazard-scale", type=float, default=None,
              help="Override the per-visit death hazard scale.")
@_fail_on_error
def synth(n_patients: int, seed: int, out_dir: Path, hazard_scale: float | None):
    """Generate a synthetic cohort: notes.jsonl, outcomes.jsonl, truth.jsonl."""
    if n_patients < 1:
        raise click.ClickException("--n must be at least 1")
    cfg = SynthConfig() if hazard_scale is None else SynthConfig(hazard_scale=hazard_scale)
    cohort = generate_cohort(n_patients, seed=seed, config=cfg)
    paths = write_cohort_files(cohort, out_dir)
    click.echo(f"wrote {len(cohort.records)} notes for {n_patients} patients "
               f"under {paths['notes'].parent}")


@main.command("train-embed")
@config_option
@_fail_on_error
def train_embed(config_path: Path):
    """Train the note embedding over the normalized corpus."""
    cfg = load_config(config_path)
    out = run_train_embed(cfg)
    click.echo(f"wrote {out}")


@main.command("build-dataset")
@config_option
@_fail_on_error
def build_dataset(config_path: Path):
    """Vectorize, label, and split the cohort into the dataset artifact."""
    cfg = load_config(config_path)
    out = run_build_dataset(cfg)
    click.echo(f"wrote {out}")


@main.command()
@config_option
@_fail_on_error
def train(config_path: Path):
    """Train the sequence model on the train split."""
    cfg = load_config(config_path)
    out = run_train(cfg)
    click.echo(f"wrote {out}")


@main.command()
@config_option
@click.option("--split", default="test", show_default=True,
              type=click.Choice(["train", "val", "test"]))
@_fail_on_error
def evaluate(config_path: Path, split: str):
    """Evaluate the trained model on a split and write report.json."""
    cfg = load_config(config_path)
    report = run_evaluate(cfg, split=split)
    click.echo(f"wrote {cfg.artifacts_dir / REPORT_FILE}")
    click.echo(f"auc_pr={report['auc_pr']:.4f} brier={report['brier']:.4f} "
               f"n={report['n']}")


@main.command()
@config_option
@click.option("--patient-id", required=True)
@_fail_on_error
def predict(config_path: Path, patient_id: str):
    """Print the survival curve JSON for one patient."""
    cfg = load_config(config_path)
    click.echo(json.dumps(run_predict(cfg, patient_id), indent=2))


@main.command()
@config_option
@click.option("--addr", default="127.0.0.1:8000", show_default=True,
              help="host:port to listen on.")
@_fail_on_error
def serve(config_path: Path, addr: str):
    """Start the read-only HTTP JSON service."""
    import uvicorn

    from .server import create_app

    host, _, port_text = addr.partition(":")
    if not host or not port_text.isdigit():
        raise click.ClickException(f"malformed --addr {addr!r}, expected host:port")
    cfg = load_config(config_path)
    state = build_service_state(cfg)
    click.echo(f"serving {state.meta['n_patients']} patients on http://{addr}")
    uvicorn.run(create_app(state), host=host, port=int(port_text), log_level="warning")


if __name__ == "__main__":
    main()
