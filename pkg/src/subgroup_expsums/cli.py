"""Command-line entry point: ``expsums``."""

from __future__ import annotations

import functools
import json
import sys
import time
from pathlib import Path

import click

from .config import DEFAULT_K_CAP, TOL, as_fraction, p_cap
from .errors import CheckFailure, ExpSumError, HypothesesFail, InvalidInput, StageViolation
from .expsum import check_incomplete_smear, exp_sum, max_nontrivial_fourier, translate_margins
from .field_core import make_field_context, subgroup
from .measures import uniform_on
from .pipeline import assemble_contradiction, run_pipeline, verify_hypotheses
from .scan import build_config, cmd_scan, parse_config_file
from .verify import SUITES, run_suites


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def guarded(fn):
    """Map library errors to exit codes: 2 for bad input, 1 for failed checks."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except InvalidInput as exc:
            _fail(2, str(exc))
        except StageViolation as exc:
            cert = getattr(exc, "certificate", None)
            if cert is not None:
                click.echo(cert.dumps())
            _fail(1, str(exc))
        except CheckFailure as exc:
            _fail(1, f"{type(exc).__name__}: {exc}")
        except ExpSumError as exc:
            _fail(1, f"{type(exc).__name__}: {exc}")

    return wrapper


def _emit(obj: dict, output: str | None) -> None:
    text = json.dumps(obj, indent=2)
    if output:
        Path(output).write_text(text + "\n")
    else:
        click.echo(text)


@click.group()
@click.option("--p-cap", type=int, default=None, help="Largest prime accepted (default: $EXPSUM_P_CAP or 200000).")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for randomized checks.")
@click.option("--tolerance-overrides", default=None, help="Comma-separated name=value pairs, e.g. parseval=1e-10.")
@click.option("--k-cap", type=int, default=DEFAULT_K_CAP, show_default=True, help="Largest k allowed in (k, delta) selection.")
@click.pass_context
def main(ctx, p_cap, seed, tolerance_overrides, k_cap):
    """Exponential sums over multiplicative subgroups of F_p."""
    try:
        tol = TOL.override(tolerance_overrides) if tolerance_overrides else TOL
    except (InvalidInput, ValueError) as exc:
        raise click.UsageError(f"bad --tolerance-overrides: {exc}")
    ctx.obj = {"p_cap": p_cap, "seed": seed, "tol": tol, "k_cap": k_cap}


@main.command()
@click.option("--p", "p", type=int, required=True)
@click.option("--index", type=int, required=True, help="Subgroup index m, a divisor of p-1.")
@click.option("--xi", type=int, multiple=True, help="Frequencies to report (repeatable).")
@click.pass_obj
@guarded
def analyze(obj, p, index, xi):
    """Exponential sums and the empirical bound for one subgroup."""
    ctx = make_field_context(p, obj["p_cap"])
    H = subgroup(ctx, index)
    bound = max_nontrivial_fourier(ctx, H)
    _emit({
        "p": p,
        "index": index,
        "subgroup_order": H.order,
        "bound": bound.to_json(),
        "sums": [exp_sum(ctx, H, x).to_json() for x in xi],
    }, None)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--p-min", type=int, default=None)
@click.option("--p-max", type=int, default=None)
@click.option("--index", type=int, multiple=True, help="Restrict to these indices (repeatable).")
@click.option("--alpha-min", type=float, default=None)
@click.option("--eta", default=None)
@click.option("--output", default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "jsonl"]), default=None)
@click.option("--parallelism", type=int, default=None)
@click.pass_obj
@guarded
def scan(obj, config_path, p_min, p_max, index, alpha_min, eta, output, fmt, parallelism):
    """Tabulate empirical exponents for every subgroup of every prime in a range."""
    file_values = parse_config_file(config_path) if config_path else {}
    config = build_config(
        file_values,
        p_min=p_min, p_max=p_max, indices=tuple(index) or None, alpha_min=alpha_min,
        eta=eta, output_path=output, format=fmt, parallelism=parallelism,
    )
    _, info = cmd_scan(config, obj["p_cap"])
    click.echo(json.dumps(info))


@main.command()
@click.option("--p", "p", type=int, required=True)
@click.option("--index", type=int, default=None, help="Run on the subgroup of this index.")
@click.option("--uniform", is_flag=True, help="Run on the uniform measure of F_p.")
@click.option("--eta", default=None, help="eta for (k, delta) selection; Delta = p^(-10 eta).")
@click.option("--delta", "delta", default=None, help="Override Delta directly.")
@click.option("--output", default=None)
@click.pass_obj
@guarded
def pipeline(obj, p, index, uniform, eta, delta, output):
    """Evaluate the stability pipeline and emit its certificate."""
    if uniform == (index is not None):
        raise click.UsageError("give exactly one of --uniform or --index")
    ctx = make_field_context(p, obj["p_cap"])
    if uniform:
        D = as_fraction(delta if delta is not None else "1/2")
        mu = uniform_on(p, range(p))
        hyp = verify_hypotheses(mu, D)
        try:
            cert = run_pipeline(mu, D, ctx=ctx, hypotheses=hyp)
        except HypothesesFail:
            _emit({"schema": "cert/1", "p": p, "status": "hypotheses_fail", "hypotheses": hyp.to_json()}, output)
            return
        _emit(cert.to_json(), output)
        if not cert.passed:
            sys.exit(1)
        return
    if eta is None:
        raise click.UsageError("--index requires --eta")
    H = subgroup(ctx, index)
    report = assemble_contradiction(ctx, H, eta, Delta=delta, k_cap=obj["k_cap"], tol=obj["tol"])
    _emit(report.to_json(), output)


@main.command()
@click.option("--suite", type=click.Choice(list(SUITES) + ["all"]), default="all", show_default=True)
@click.option("--p-max", type=int, default=31, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Emit a JSON summary instead of text lines.")
@click.pass_obj
@guarded
def verify(obj, suite, p_max, as_json):
    """Run property suites over all primes up to --p-max and all their subgroups."""
    limit = p_cap(obj["p_cap"])
    if p_max > limit:
        raise InvalidInput(f"p_max={p_max} exceeds the prime cap {limit}")
    start = time.perf_counter()
    results = run_suites(suite, p_max, seed=obj["seed"], tol=obj["tol"])
    total = time.perf_counter() - start
    if as_json:
        click.echo(json.dumps({"results": [r.to_json() for r in results], "elapsed_s": round(total, 3)}))
    else:
        for r in results:
            click.echo(r.line())
        click.echo(f"runtime: {total:.2f}s")
    failed = [r for r in results if not r.passed]
    if failed:
        _fail(1, f"first violation: {failed[0].first_violation}")


@main.command()
@click.option("--p", "p", type=int, required=True)
@click.option("--g0", type=int, default=None, help="Segment base (default: least primitive root).")
@click.option("--T", "T", type=int, required=True, help="Segment length.")
@click.option("--eta", default="1/4", show_default=True)
@click.option("--delta", default="1/5", show_default=True, help="delta for the translate inequality.")
@click.pass_obj
@guarded
def incomplete(obj, p, g0, T, eta, delta):
    """Checks for sums over a segment {g0^t : 0 <= t < T}."""
    ctx = make_field_context(p, obj["p_cap"])
    g0 = ctx.g if g0 is None else g0
    tr = translate_margins(ctx, g0, T, as_fraction(delta))
    report = check_incomplete_smear(ctx, g0, T, eta, k_cap=obj["k_cap"], tol=obj["tol"])
    out = report.to_json()
    out["translate"] = {"delta": str(as_fraction(delta)), "worst_xi": tr.xi, "worst_l": tr.l,
                        "lhs": tr.lhs, "rhs": tr.rhs, "margin": tr.margin}
    _emit(out, None)


if __name__ == "__main__":
    main()
