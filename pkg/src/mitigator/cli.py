"""Command line entry points: run, analyze, validate, replay, serve.

Exit codes: 0 success, 1 validation failure, 2 runtime error. Set
``MITIGATOR_NO_COLOR`` to disable ANSI styling.
"""

from __future__ import annotations

import json
import os
import sys

import click

from .dsl import ParseError, load_program, parse_policy, validate_program, PolicySource
from .exact import StateSpaceTooLarge, exact_analysis
from .harness import RunConfig, default_scenarios, emit_report, replay_log, run_batch
from .model import InductionType
from .simulator import Scenario, SimUserParams, default_params


def _color_enabled() -> bool:
    return not os.environ.get("MITIGATOR_NO_COLOR")


def _echo(message: str, fg=None, err: bool = False):
    if fg and _color_enabled():
        click.secho(message, fg=fg, err=err)
    else:
        click.echo(message, err=err)


def _load_params(spec: str) -> SimUserParams:
    if spec == "default":
        return default_params()
    with open(spec, "r", encoding="utf-8") as fh:
        return SimUserParams.from_json(fh.read())


def _load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    params_spec = data.get("params", "default")
    if isinstance(params_spec, dict):
        params = SimUserParams.from_dict(params_spec)
    else:
        params = _load_params(params_spec)
    return Scenario(
        induction=InductionType(data["induction"]),
        params=params,
        max_turns=int(data.get("max_turns", 60)),
        seed=int(data.get("seed", 0)),
    )


@click.group()
def main():
    """Confusion-mitigation policy toolkit."""


@main.command()
@click.option("--policy", default="builtin", help="Policy file path or 'builtin'.")
@click.option("--scenario", "scenarios", multiple=True,
              help="Scenario JSON file (repeatable). Defaults to the four shipped scenarios.")
@click.option("--trials", default=100, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_dir", default=None, help="Directory for per-trial JSONL logs.")
@click.option("--format", "fmt", type=click.Choice(["summary", "jsonl"]), default="summary")
@click.option("--canonical/--wall-clock", default=True,
              help="Canonical mode zeroes timestamps for byte-stable outputs.")
def run(policy, scenarios, trials, seed, out_dir, fmt, canonical):
    """Execute a policy x scenario batch and print the metrics report."""
    try:
        program = load_program(policy)
    except (ParseError, ValueError, OSError) as exc:
        _echo(str(exc), fg="red", err=True)
        sys.exit(1)
    try:
        scenario_list = [_load_scenario(p) for p in scenarios] if scenarios else default_scenarios()
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        _echo(f"bad scenario file: {exc}", fg="red", err=True)
        sys.exit(1)
    try:
        config = RunConfig(
            program=program, scenarios=scenario_list, trials=trials,
            root_seed=seed, output_dir=out_dir, fmt=fmt, canonical=canonical,
        )
        report = run_batch(config)
        rendered = emit_report(report, fmt)
        click.echo(rendered, nl=False)
        if out_dir:
            with open(os.path.join(out_dir, f"summary.{ 'jsonl' if fmt == 'jsonl' else 'txt'}"),
                      "w", encoding="utf-8") as fh:
                fh.write(rendered)
    except Exception as exc:
        _echo(f"runtime error: {exc}", fg="red", err=True)
        sys.exit(2)


@main.command()
@click.option("--policy", default="builtin")
@click.option("--params", "params_spec", default="default",
              help="Params JSON file or 'default'.")
@click.option("--induction", default="all",
              type=click.Choice(["all"] + [i.value for i in InductionType]))
@click.option("--bins", default=101, show_default=True, type=int)
def analyze(policy, params_spec, induction, bins):
    """Exact absorption analysis of the mitigation loop."""
    try:
        program = load_program(policy)
        params = _load_params(params_spec)
    except (ParseError, ValueError, OSError) as exc:
        _echo(str(exc), fg="red", err=True)
        sys.exit(1)
    inductions = list(InductionType) if induction == "all" else [InductionType(induction)]
    try:
        for ind in inductions:
            report = exact_analysis(program, params, ind, bins=bins)
            steps = "-" if report.mean_steps_resolved is None else f"{report.mean_steps_resolved:.4f}"
            click.echo(
                f"{ind.value}: p_resolved={report.p_resolved:.4f} "
                f"p_disengaged={report.p_disengaged:.4f} "
                f"p_exhausted={report.p_exhausted:.4f} "
                f"mean_steps={steps} states={report.n_states}"
            )
    except StateSpaceTooLarge as exc:
        _echo(str(exc), fg="red", err=True)
        sys.exit(2)


@main.command()
@click.option("--policy", required=True, help="Policy file path or 'builtin'.")
def validate(policy):
    """Parse and validate a policy file; print diagnostics."""
    try:
        if policy == "builtin":
            from .dsl import builtin_default
            source = builtin_default()
        else:
            with open(policy, "r", encoding="utf-8") as fh:
                source = PolicySource(fh.read(), origin=policy)
    except OSError as exc:
        _echo(str(exc), fg="red", err=True)
        sys.exit(2)
    try:
        ast = parse_policy(source)
    except ParseError as exc:
        _echo(f"parse error: {exc}", fg="red", err=True)
        sys.exit(1)
    diags = validate_program(ast)
    if diags:
        for d in diags:
            _echo(str(d), fg="yellow", err=True)
        sys.exit(1)
    _echo("policy is valid", fg="green")


@main.command()
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--strict-single-step", is_flag=True,
              help="Require failed steps to advance by exactly one.")
def replay(log_path, strict_single_step):
    """Re-check engine invariants on a JSONL trial log."""
    try:
        violations = replay_log(log_path, strict_single_step=strict_single_step)
    except (OSError, json.JSONDecodeError) as exc:
        _echo(f"cannot read log: {exc}", fg="red", err=True)
        sys.exit(2)
    if violations:
        for v in violations:
            _echo(v, fg="red", err=True)
        sys.exit(1)
    _echo("log replays cleanly", fg="green")


@main.command()
@click.option("--bind", default="127.0.0.1:8750", show_default=True)
@click.option("--journal", default=None, help="Directory for per-session JSONL journals.")
def serve(bind, journal):
    """Run the wizard-of-oz session service."""
    import uvicorn
    from .service import create_app

    host, _, port = bind.rpartition(":")
    app = create_app(journal_dir=journal)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")


if __name__ == "__main__":
    main()
