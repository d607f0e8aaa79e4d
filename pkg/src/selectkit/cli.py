"""Command-line front end: score, select, gains.

Every command is deterministic given its flags and seed, and exits 0
only after its outputs are fully written and re-validated.  Engine
errors are reported as ``Error: <ErrorName>: <message>`` on stderr with
a nonzero exit code.
"""

from __future__ import annotations

import functools
import json
from contextlib import contextmanager

import click

from .core import KernelSpec, random_selection, validate_inputs
from .diagnostics import gain_sweep, recommend_gamma_range, write_gain_curves_csv, write_gamma_report_json
from .errors import SelectKitError, ValidationError
from .facility_location import fl_greedy_lazy, fl_greedy_naive, fl_greedy_stochastic
from .io import file_digest, read_embeddings, read_selection, read_token_stats, write_selection
from .kcenter import kcenter_greedy
from .oracle import exhaustive_fl_opt, exhaustive_kcenter_opt, exhaustive_topk
from .uncertainty import UncertaintyKind, rank_by_score, score_sequences, select_topk_uncertain, shifted_min_margin

_MEASURES = [k.value for k in UncertaintyKind]
_STRATEGIES = ["random", "uncertainty", "kcenter", "fl", "fl-mixture"]


def _friendly_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SelectKitError as exc:
            raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc

    return wrapper


@contextmanager
def _capped_threads(threads):
    if threads is None:
        yield
    else:
        from threadpoolctl import threadpool_limits

        with threadpool_limits(limits=threads):
            yield


@click.group()
@click.option(
    "--threads",
    type=int,
    default=None,
    envvar="SELECTKIT_THREADS",
    help="Cap internal worker threads (default: machine parallelism). "
    "The flag wins over the SELECTKIT_THREADS environment variable.",
)
@click.pass_context
def main(ctx, threads):
    """Subset selection for annotation budgets over prompt embeddings and token stats."""
    ctx.ensure_object(dict)
    ctx.obj["threads"] = threads


def _parse_greedy(text: str):
    if text == "naive" or text == "lazy":
        return text, None
    if text.startswith("stochastic:"):
        try:
            eps = float(text.split(":", 1)[1])
        except ValueError:
            raise click.UsageError(f"bad epsilon in --greedy {text!r}") from None
        if not 0.0 < eps < 1.0:
            raise click.UsageError(f"--greedy stochastic epsilon must be in (0, 1), got {eps}")
        return "stochastic", eps
    raise click.UsageError(f"unknown --greedy {text!r} (expected naive, lazy, or stochastic:EPS)")


def _parse_kernel(text: str) -> KernelSpec:
    try:
        return KernelSpec.parse(text)
    except ValidationError as exc:
        raise click.UsageError(str(exc)) from None


@main.command()
@click.option("--stats", "stats_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--measure", required=True, type=click.Choice(_MEASURES))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--length-normalize", is_flag=True, default=False,
              help="Score least-confidence by per-token geometric mean instead of the raw product.")
@click.option("--top", "top_n", type=int, default=None,
              help="Additionally print the ids of the N most uncertain prompts.")
@click.pass_context
@_friendly_errors
def score(ctx, stats_path, measure, out_path, length_normalize, top_n):
    """Score every prompt under one uncertainty measure; writes CSV (id,score)."""
    with _capped_threads(ctx.obj.get("threads")):
        stats = read_token_stats(stats_path)
        scores = score_sequences(stats, UncertaintyKind(measure), length_normalize)
        with open(out_path, "w", encoding="utf-8", newline="\n") as f:
            f.write("id,score\n")
            for i, s in enumerate(scores):
                f.write(f"{i},{s:.9g}\n")
        click.echo(f"scored {len(scores)} prompts with {measure} -> {out_path}")
        if top_n is not None:
            for i in rank_by_score(scores)[: max(top_n, 0)]:
                click.echo(str(int(i)))


@main.command()
@click.option("--strategy", required=True, type=click.Choice(_STRATEGIES))
@click.option("--embeddings", "emb_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--stats", "stats_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--kernel", "kernel_text", default=None,
              help='Similarity kernel for fl/fl-mixture: "rbf:GAMMA" (e.g. rbf:0.002) or "cosine".')
@click.option("--budget", required=True, type=int)
@click.option("--greedy", "greedy_text", default="lazy", show_default=True,
              help="Greedy variant for fl strategies: naive, lazy, or stochastic:EPS.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--measure", type=click.Choice(_MEASURES), default=None,
              help="Uncertainty measure (required for --strategy uncertainty).")
@click.option("--log-weight", type=float, default=1.0, show_default=True,
              help="Weight on the uncertainty log term of the fl-mixture objective.")
@click.option("--length-normalize", is_flag=True, default=False,
              help="Length-normalize least-confidence scores (uncertainty strategy only).")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.pass_context
@_friendly_errors
def select(ctx, strategy, emb_path, stats_path, kernel_text, budget, greedy_text, seed,
           measure, log_weight, length_normalize, out_path):
    """Select --budget prompts with one strategy; writes a selection JSON."""
    needs_emb = strategy in ("kcenter", "fl", "fl-mixture")
    needs_stats = strategy in ("uncertainty", "fl-mixture")
    if needs_emb and emb_path is None:
        raise click.UsageError(f"--strategy {strategy} requires --embeddings")
    if needs_stats and stats_path is None:
        raise click.UsageError(f"--strategy {strategy} requires --stats")
    if strategy == "random" and emb_path is None and stats_path is None:
        raise click.UsageError("--strategy random requires --embeddings or --stats to size the pool")
    if strategy == "uncertainty" and measure is None:
        raise click.UsageError("--strategy uncertainty requires --measure")

    spec = None
    if strategy in ("fl", "fl-mixture"):
        if kernel_text is None:
            raise click.UsageError(f"--strategy {strategy} requires --kernel")
        spec = _parse_kernel(kernel_text)
    greedy, epsilon = _parse_greedy(greedy_text)

    with _capped_threads(ctx.obj.get("threads")):
        emb = read_embeddings(emb_path) if emb_path is not None else None
        stats = read_token_stats(stats_path) if stats_path is not None else None
        cfg = validate_inputs(embeddings=emb, stats=stats, budget=budget)

        if strategy == "random":
            result = random_selection(cfg.n, cfg.budget, seed)
        elif strategy == "uncertainty":
            result = select_topk_uncertain(stats, UncertaintyKind(measure), cfg.budget, length_normalize)
        elif strategy == "kcenter":
            result = kcenter_greedy(emb, cfg.budget)
        else:
            u = shifted_min_margin(stats) if strategy == "fl-mixture" else None
            if greedy == "naive":
                result = fl_greedy_naive(emb, spec, cfg.budget, uncertainty=u, log_weight=log_weight)
            elif greedy == "lazy":
                result = fl_greedy_lazy(emb, spec, cfg.budget, uncertainty=u, log_weight=log_weight)
            else:
                result = fl_greedy_stochastic(
                    emb, spec, cfg.budget, epsilon, seed, uncertainty=u, log_weight=log_weight
                )

        params = {
            "n": cfg.n,
            "budget": cfg.budget.k,
            "seed": seed,
            "kernel": str(spec) if spec is not None else None,
            "gamma": spec.gamma if spec is not None else None,
            "greedy": greedy if strategy in ("fl", "fl-mixture") else None,
            "epsilon": epsilon if strategy in ("fl", "fl-mixture") else None,
            "measure": measure,
            "log_weight": log_weight if strategy == "fl-mixture" else None,
            "length_normalize": length_normalize if strategy == "uncertainty" else None,
            "provenance": emb.provenance if emb is not None else None,
        }
        digests = {
            "embeddings": file_digest(emb_path) if emb_path is not None else None,
            "stats": file_digest(stats_path) if stats_path is not None else None,
        }
        write_selection(out_path, result, strategy=strategy, params=params, input_digests=digests)
        read_selection(out_path)  # exit 0 only for a file that validates
        click.echo(f"selected {cfg.budget.k} of {cfg.n} with {strategy} -> {out_path}")


@main.command()
@click.option("--embeddings", "emb_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--gammas", "gammas_text", required=True,
              help="Comma-separated RBF kernel widths to sweep, e.g. 0.001,0.005,0.01.")
@click.option("--budget", required=True, type=int)
@click.option("--threshold", type=float, default=None,
              help="Absolute per-step gain cutoff for saturation "
              "(default: 1e-3 x each curve's first-step gain).")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for the off-diagonal similarity pair sample.")
@click.option("--out-csv", "csv_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out-json", "json_path", required=True, type=click.Path(dir_okay=False))
@click.pass_context
@_friendly_errors
def gains(ctx, emb_path, gammas_text, budget, threshold, seed, csv_path, json_path):
    """Sweep RBF widths, record greedy gain curves, and report the usable range."""
    try:
        gammas = [float(g) for g in gammas_text.split(",") if g.strip()]
    except ValueError:
        raise click.UsageError(f"bad --gammas list {gammas_text!r}") from None
    if not gammas:
        raise click.UsageError("--gammas must list at least one kernel width")
    if any(g <= 0 for g in gammas):
        raise click.UsageError("--gammas entries must be positive")

    with _capped_threads(ctx.obj.get("threads")):
        emb = read_embeddings(emb_path)
        curves = gain_sweep(emb, gammas, budget, threshold=threshold, seed=seed)
        rec = recommend_gamma_range(curves, budget)
        write_gain_curves_csv(csv_path, curves)
        write_gamma_report_json(json_path, rec, curves, budget)
        with open(json_path, "r", encoding="utf-8") as f:
            json.load(f)  # exit 0 only for outputs that parse back
        stable = ", ".join(f"{g:g}" for g in rec.stable) or "none"
        click.echo(f"swept {len(gammas)} widths to k={budget}; stable: {stable}")
        click.echo(f"curves -> {csv_path}; summary -> {json_path}")


@main.group(hidden=True)
def oracle():
    """Exhaustive-search helpers for debugging tiny instances."""


def _load_problem(path):
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


@oracle.command("fl")
@click.option("--input", "path", required=True, type=click.Path(exists=True))
@_friendly_errors
def oracle_fl(path):
    doc = _load_problem(path)
    best, value = exhaustive_fl_opt(doc["kernel"], int(doc["k"]))
    click.echo(json.dumps({"set": list(best), "value": value}))


@oracle.command("kcenter")
@click.option("--input", "path", required=True, type=click.Path(exists=True))
@_friendly_errors
def oracle_kcenter(path):
    doc = _load_problem(path)
    best, radius = exhaustive_kcenter_opt(doc["points"], int(doc["k"]))
    click.echo(json.dumps({"set": list(best), "radius": radius}))


@oracle.command("topk")
@click.option("--input", "path", required=True, type=click.Path(exists=True))
@_friendly_errors
def oracle_topk(path):
    doc = _load_problem(path)
    best, value = exhaustive_topk(doc["scores"], int(doc["k"]))
    click.echo(json.dumps({"set": list(best), "value": value}))


if __name__ == "__main__":
    main()
