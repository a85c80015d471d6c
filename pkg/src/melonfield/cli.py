"""Command-line client for the compute service.

One command per invocation (``lo``, ``saddle``, ``series``, ``sd``,
``hermite``).  Each command reads an optional JSON config document,
applies flag overrides (flags win), validates the result against the
service schema, posts it to the service (in-process by default, remote
with ``--server``) and writes CSV/JSON outputs.

Exit codes: 0 success, 2 config error, 3 solver divergence,
4 estimator failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
from pydantic import ValidationError

from . import SCHEMA_VERSION
from .client import ServiceClient
from .service import schemas

EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_ESTIMATOR = 4


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        _fail(EXIT_CONFIG, f"cannot read config {path}: {exc}")
    if not isinstance(data, dict):
        _fail(EXIT_CONFIG, f"config {path} must hold a JSON object")
    return data


def _set_override(config: dict, dotted: str, value):
    if value is None or value == () or value == []:
        return
    keys = dotted.split(".")
    node = config
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            _fail(EXIT_CONFIG, f"config field {key} must be an object")
    node[keys[-1]] = list(value) if isinstance(value, tuple) else value


def _validate(model_cls, config: dict) -> dict:
    try:
        model = model_cls.model_validate(config)
    except ValidationError as exc:
        lines = [
            ".".join(str(piece) for piece in err["loc"]) + ": " + err["msg"]
            for err in exc.errors()
        ]
        _fail(EXIT_CONFIG, "invalid config\n  " + "\n  ".join(lines))
    return model.model_dump(mode="json")


def _post(ctx_obj: dict, path: str, payload: dict) -> dict:
    client = ServiceClient(base_url=ctx_obj.get("server"))
    status, body = client.post(path, payload)
    if status == 200:
        return body
    detail = body.get("detail", body) if isinstance(body, dict) else body
    code = detail.get("code", "") if isinstance(detail, dict) else ""
    message = detail.get("message", str(detail)) if isinstance(detail, dict) else str(detail)
    if status == 422:
        _fail(EXIT_CONFIG, f"request rejected by service: {json.dumps(detail)}")
    if code == "solver_divergence":
        _fail(EXIT_DIVERGENCE, f"{message} (residual {detail.get('residual_norm')})")
    if code == "estimator_failure":
        _fail(EXIT_ESTIMATOR, message)
    if code == "domain_error":
        _fail(EXIT_CONFIG, message)
    _fail(1, f"service returned {status}: {message}")


def _dump_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_text(path: str, text: str):
    if path == "-":
        click.echo(text, nl=False)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _csv(header: list, rows: list, config: dict) -> str:
    def fmt(value) -> str:
        if value is None:
            return "inf"
        if isinstance(value, float):
            return repr(value)
        return str(value)

    lines = [
        f"# schema_version: {SCHEMA_VERSION}",
        "# config: " + json.dumps(config, sort_keys=True),
        ",".join(header),
    ]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


@click.group()
@click.option("--server", default=None, help="Base URL of a running service; in-process if omitted.")
@click.option(
    "--threads",
    type=int,
    default=None,
    envvar="MELONFIELD_THREADS",
    help="Worker cap for parallel estimators (default: hardware parallelism).",
)
@click.pass_context
def main(ctx, server, threads):
    """Laboratory for the D-color coupled matrix model."""
    ctx.obj = {"server": server, "threads": threads}


@main.command()
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--colors", "-D", multiple=True, type=int, help="Color counts for the grid.")
@click.option("--coupling", "couplings", multiple=True, type=float, help="Couplings for the grid.")
@click.option("--output", "-o", default="-", help="CSV path, or - for stdout.")
@click.pass_context
def lo(ctx, config_path, colors, couplings, output):
    """Closed-form alpha, log Z and G2 over a (D, lambda) grid as CSV."""
    config = _load_config(config_path)
    _set_override(config, "colors", colors)
    _set_override(config, "couplings", couplings)
    payload = _validate(schemas.LoRequest, config)
    body = _post(ctx.obj, "/lo", payload)
    rows = [
        [row["colors"], row["coupling"], row["alpha_im"], row["log_z"], row["g2"]]
        for row in body["rows"]
    ]
    _write_text(
        output, _csv(["D", "lambda", "alpha_im", "log_z", "g2"], rows, body["config"])
    )


@main.command()
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--colors", "-D", type=int, default=None)
@click.option("--size", "-N", type=int, default=None)
@click.option("--coupling", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--tolerance", type=float, default=None)
@click.option("--max-iterations", type=int, default=None)
@click.option("--damping", type=float, default=None)
@click.option("--mode", type=click.Choice(["symmetric_ansatz", "full_coupled"]), default=None)
@click.option("--bins", type=int, default=None)
@click.option("--output-dir", default=".", help="Directory for solution.json and histogram.csv.")
@click.pass_context
def saddle(ctx, config_path, colors, size, coupling, seed, tolerance,
           max_iterations, damping, mode, bins, output_dir):
    """Solve the finite-N saddle equations and emit spectrum plus histogram."""
    config = _load_config(config_path)
    _set_override(config, "model.colors", colors)
    _set_override(config, "model.size", size)
    _set_override(config, "model.coupling", coupling)
    _set_override(config, "solver.seed", seed)
    _set_override(config, "solver.tolerance", tolerance)
    _set_override(config, "solver.max_iterations", max_iterations)
    _set_override(config, "solver.damping", damping)
    _set_override(config, "solver.mode", mode)
    _set_override(config, "histogram_bins", bins)
    payload = _validate(schemas.SaddleRequest, config)
    body = _post(ctx.obj, "/saddle", payload)
    if not body["converged"]:
        _fail(
            EXIT_DIVERGENCE,
            f"solver did not converge within iteration budget "
            f"(last residual {body['residual_norm']:.3e})",
        )
    out = Path(output_dir)
    solution = {
        "schema_version": SCHEMA_VERSION,
        "config": body["config"],
        "params": body["params"],
        "spectrum": body["spectrum"],
        "residual_norm": body["residual_norm"],
        "iterations": body["iterations"],
        "converged": body["converged"],
        "law": body["law"],
        "comparison": body["comparison"],
    }
    _write_text(str(out / "solution.json"), _dump_json(solution))
    hist = body["histogram"]
    edges = hist["bin_edges"]
    rows = [
        [edges[i], edges[i + 1], hist["counts"][i],
         hist["empirical_density"][i], hist["law_density"][i]]
        for i in range(len(hist["counts"]))
    ]
    _write_text(
        str(out / "histogram.csv"),
        _csv(
            ["bin_left", "bin_right", "count", "empirical_density", "law_density"],
            rows,
            body["config"],
        ),
    )
    click.echo(body["summary"])


@main.command()
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--colors", "-D", multiple=True, type=int)
@click.option("--order", type=int, default=None)
@click.option("--output", "-o", default="-", help="JSON path, or - for stdout.")
@click.pass_context
def series(ctx, config_path, colors, order, output):
    """Exact-rational coupling expansions with the equality report."""
    config = _load_config(config_path)
    _set_override(config, "colors", colors)
    _set_override(config, "order", order)
    payload = _validate(schemas.SeriesRequest, config)
    body = _post(ctx.obj, "/series", payload)
    _write_text(output, _dump_json(body))


@main.command()
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--colors", "-D", type=int, default=None)
@click.option("--size", "-N", type=int, default=None)
@click.option("--coupling", type=float, default=None)
@click.option("--ks", multiple=True, type=int)
@click.option("--color", "check_colors", multiple=True, type=int,
              help="Colors to verify; all colors when omitted.")
@click.option("--estimator", type=click.Choice(["quadrature", "mc"]), default=None)
@click.option("--chains", type=int, default=None)
@click.option("--steps", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--measure-every", type=int, default=None)
@click.option("--tolerance", type=float, default=None)
@click.option("--output", "-o", default="-", help="JSON path, or - for stdout.")
@click.pass_context
def sd(ctx, config_path, colors, size, coupling, ks, check_colors, estimator,
       chains, steps, seed, measure_every, tolerance, output):
    """Schwinger-Dyson residual report, exact and leading forms."""
    config = _load_config(config_path)
    _set_override(config, "model.colors", colors)
    _set_override(config, "model.size", size)
    _set_override(config, "model.coupling", coupling)
    _set_override(config, "ks", ks)
    _set_override(config, "colors", check_colors)
    _set_override(config, "estimator", estimator)
    _set_override(config, "mc.chains", chains)
    _set_override(config, "mc.steps", steps)
    _set_override(config, "mc.seed", seed)
    _set_override(config, "mc.measure_every", measure_every)
    _set_override(config, "quadrature.tolerance", tolerance)
    if ctx.obj.get("threads") is not None and "threads" not in config:
        config["threads"] = ctx.obj["threads"]
    payload = _validate(schemas.SdRequest, config)
    body = _post(ctx.obj, "/sd", payload)
    for warning in body.get("warnings", []):
        click.echo(f"warning: {warning}", err=True)
    _write_text(output, _dump_json(body))


@main.command()
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--size", "-N", type=int, default=None)
@click.option("--colors", "-D", type=int, default=None)
@click.option("--coupling", type=float, default=None)
@click.option("--output", "-o", default="-", help="JSON path, or - for stdout.")
@click.pass_context
def hermite(ctx, config_path, size, colors, coupling, output):
    """Hermite roots, optionally with the rescaled NLO solution and law."""
    config = _load_config(config_path)
    _set_override(config, "size", size)
    _set_override(config, "model.colors", colors)
    _set_override(config, "model.coupling", coupling)
    payload = _validate(schemas.HermiteRequest, config)
    body = _post(ctx.obj, "/hermite", payload)
    _write_text(output, _dump_json(body))


if __name__ == "__main__":
    main()
