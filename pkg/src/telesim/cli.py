"""Batch front-end: a thin HTTP client over the compute service.

Without --server the CLI talks to an in-process instance of the service
through an ASGI transport, so no daemon is needed for desk-scale runs; with
--server URL the same requests go to a remote instance. Artifacts are written
atomically (temp file + rename), so failed runs leave no partial files.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import click
import httpx

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .analysis import report_csv, sweep_csv


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        # Some starlette builds warn about their httpx pairing on import.
        warnings.simplefilter("ignore", DeprecationWarning)
        from fastapi.testclient import TestClient

    from .service import create_app

    return TestClient(create_app())


def _load(config_path: str | None, seed: int | None, cutoff: int | None) -> RunConfig:
    try:
        cfg = load_config(config_path) if config_path else RunConfig()
    except ConfigError as exc:
        raise click.UsageError(f"config rejected: {exc}") from exc
    if seed is not None:
        cfg = cfg.model_copy(update={"seed": seed})
    if cutoff is not None:
        cfg = cfg.model_copy(update={"setup": cfg.setup.model_copy(update={"cutoff": cutoff})})
    return cfg


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except Exception:
            detail = response.text
        raise click.ClickException(f"service error ({response.status_code}): {detail}")
    return response.json()


def _write_atomic(directory: Path, name: str, text: str) -> Path:
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        target = directory / name
        os.replace(tmp, target)
        return target
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _prepare_out(out: str) -> Path:
    directory = Path(out)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        probe = tempfile.TemporaryFile(dir=directory)
        probe.close()
    except OSError as exc:
        raise click.ClickException(f"output directory not writable: {directory} ({exc})") from exc
    return directory


def _json_text(data: dict) -> str:
    return json.dumps(data, indent=2) + "\n"


config_option = click.option("--config", "config_path", type=click.Path(), default=None, help="YAML run configuration.")
out_option = click.option("--out", default="out", show_default=True, help="Output directory for artifacts.")
seed_option = click.option("--seed", type=int, default=None, help="Override the configured seed.")
format_option = click.option(
    "--format", "fmt", type=click.Choice(["csv", "json", "both"]), default="both", show_default=True
)
cutoff_option = click.option("--cutoff", type=int, default=None, help="Override the Fock-space cutoff.")
server_option = click.option("--server", default=None, help="Base URL of a running service; defaults to in-process.")


@click.group()
@click.version_option(version=__version__, prog_name="telesim")
def main() -> None:
    """Conditional-output simulator for a two-source teleportation bench."""


@main.command()
@config_option
@out_option
@seed_option
@format_option
@cutoff_option
@server_option
def run(config_path, out, seed, fmt, cutoff, server) -> None:
    """Run the configured scenarios and write the report artifacts."""
    cfg = _load(config_path, seed, cutoff)
    directory = _prepare_out(out)
    with _client(server) as client:
        data = _post(client, "/run", {"config": cfg.model_dump(mode="json")})
    report = data["report"]
    if fmt in ("json", "both"):
        click.echo(f"wrote {_write_atomic(directory, 'report.json', _json_text(report))}")
    if fmt in ("csv", "both"):
        click.echo(f"wrote {_write_atomic(directory, 'report.csv', report_csv(report))}")
    for row in report.get("scenarios", []):
        label = row["scenario"]
        if row.get("structurally_zero"):
            click.echo(f"{label}: structurally zero probability")
        else:
            fid = row.get("fidelity_extrapolated", row.get("fidelity"))
            click.echo(f"{label}: fidelity(leading order) = {fid:.6f}, probability = {row['probability']:.3e}")
    zero = [r["scenario"] for r in report.get("scenarios", []) if r.get("structurally_zero")]
    if zero:
        raise click.ClickException(f"structurally zero probability for: {', '.join(zero)}")


@main.command()
@config_option
@out_option
@seed_option
@format_option
@cutoff_option
@server_option
@click.option("--ratios", default=None, help="Comma-separated coupling ratios, overriding the config sweep.")
def sweep(config_path, out, seed, fmt, cutoff, server, ratios) -> None:
    """Sweep the source-coupling ratio and write one row per grid point."""
    cfg = _load(config_path, seed, cutoff)
    if ratios is not None:
        try:
            values = [float(v) for v in ratios.split(",") if v.strip()]
        except ValueError as exc:
            raise click.UsageError(f"bad --ratios: {exc}") from exc
        from .config import SweepModel

        try:
            cfg = cfg.model_copy(update={"sweep": SweepModel(values=values)})
        except Exception as exc:
            raise click.UsageError(f"bad --ratios: {exc}") from exc
    if cfg.sweep is None:
        raise click.UsageError("no sweep section in config and no --ratios given")
    directory = _prepare_out(out)
    with _client(server) as client:
        data = _post(client, "/sweep", {"config": cfg.model_dump(mode="json")})
    rows = data["rows"]
    if fmt in ("csv", "both"):
        click.echo(f"wrote {_write_atomic(directory, 'sweep.csv', sweep_csv(rows))}")
    if fmt in ("json", "both"):
        payload = {"schema_version": 1, "parameter": data["parameter"], "rows": rows}
        click.echo(f"wrote {_write_atomic(directory, 'sweep.json', _json_text(payload))}")
    for row in rows:
        click.echo(f"r = {row['ratio']:g}: fidelity(leading order) = {row['fidelity']:.6f}")


@main.command()
@server_option
@click.option("--cutoff", type=int, default=4, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--perturb-bs-sign", is_flag=True, hidden=True)
def validate(server, cutoff, seed, perturb_bs_sign) -> None:
    """Run the structural invariant suite and print pass/fail per property."""
    with _client(server) as client:
        data = _post(
            client,
            "/validate",
            {"cutoff": cutoff, "seed": seed, "perturb_bs_sign": perturb_bs_sign},
        )
    for check in data["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        click.echo(f"[{status}] {check['name']}: {check['detail']}")
    click.echo("all passed" if data["all_passed"] else "failures detected")


@main.command()
@config_option
@out_option
@seed_option
@format_option
@cutoff_option
@server_option
def tomo(config_path, out, seed, fmt, cutoff, server) -> None:
    """Tomograph the conditional output and write the reconstruction summary."""
    cfg = _load(config_path, seed, cutoff)
    directory = _prepare_out(out)
    with _client(server) as client:
        data = _post(client, "/tomography", {"config": cfg.model_dump(mode="json")})
    summary = data["summary"]
    if fmt in ("json", "both"):
        click.echo(f"wrote {_write_atomic(directory, 'tomography.json', _json_text(summary))}")
    if fmt in ("csv", "both"):
        version = summary["schema_version"]
        lines = ["schema_version,setting,outcome,probability"]
        for basis, outcomes in summary["exact"]["probabilities"].items():
            for outcome, p in outcomes.items():
                lines.append(f"{version},{basis},{outcome},{format(p, '.12g')}")
        text = "\n".join(lines) + "\n"
        click.echo(f"wrote {_write_atomic(directory, 'tomography.csv', text)}")
    click.echo(
        "vacuum weight estimate (leading order) = "
        f"{summary['extrapolated_vacuum_weight']['value']:.6f}"
    )
    if "sampled" in summary:
        click.echo(
            f"vacuum weight estimate ({summary['sampled']['shots']} shots) = "
            f"{summary['sampled']['vacuum_weight_estimate']:.6f}"
        )


if __name__ == "__main__":
    main(prog_name="telesim")
