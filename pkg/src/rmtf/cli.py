"""Command-line interface for key generation, evaluation, inversion,
parameter validation, size accounting, failure simulation, and sphere counts.

Every randomized subcommand takes an explicit --seed so that experiments are
replayable; nothing draws from ambient entropy.  Parameters are given inline
(--q --m --n --L --k --w --t --N [--lam]) or through a JSON --config file;
inline values win field by field.

Exit codes: 0 success, 2 usage error, 3 step-I decode failure, 4 step-II
decode or inversion failure, 5 file I/O or malformed data, 6 parameter
violation (including failed validation reports).
"""

from __future__ import annotations

import json
import math
import random
import sys
from typing import Dict, Optional, Sequence

import click

from . import analysis
from .decoder import StepIFailure, StepIIFailure
from .linalg import MatFqm
from .subspace import sphere_log2_bounds, sphere_size
from .trapdoor import (Ciphertext, InversionError, ParamSet, deserialize_ct,
                       deserialize_pk, deserialize_tk, evaluate, gen, invert,
                       sample_input, serialize_ct, serialize_pk, serialize_tk)

EXIT_STEP_I = 3
EXIT_STEP_II = 4
EXIT_IO = 5
EXIT_PARAMS = 6

_PARAM_FIELDS = ("q", "m", "n", "L", "k", "w", "t", "N", "lam")
_SIM_FIELDS = ("ell", "n_cols", "w", "t", "N", "m", "q")


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _read_file(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}")


def _write_file(path: str, data: bytes) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write {path}: {exc.strerror or exc}")


def _write_text(path: str, lines: Sequence[str]) -> None:
    _write_file(path, ("\n".join(lines) + "\n").encode("ascii"))


def _load_config(path: Optional[str], fields: Sequence[str]) -> Dict[str, int]:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}")
    except json.JSONDecodeError as exc:
        _fail(EXIT_IO, f"{path} is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        _fail(EXIT_IO, f"{path} must hold a JSON object of parameter fields")
    unknown = sorted(set(raw) - set(fields))
    if unknown:
        _fail(EXIT_IO, f"{path} has unknown fields: {', '.join(unknown)}")
    return {k: v for k, v in raw.items() if k in fields}


def _merge_params(config: Optional[str], inline: Dict[str, Optional[int]],
                  fields: Sequence[str],
                  defaults: Optional[Dict[str, int]] = None) -> Dict[str, int]:
    """ Config file values overridden by inline flags, then defaults. """
    data = _load_config(config, fields)
    for key, value in inline.items():
        if value is not None:
            data[key] = value
    for key, value in (defaults or {}).items():
        data.setdefault(key, value)
    missing = [f for f in fields if f not in data]
    if missing:
        raise click.UsageError(
            f"missing parameters: {', '.join(missing)} "
            "(give inline flags or --config)")
    return data


def _build_params(config: Optional[str], **inline) -> ParamSet:
    data = _merge_params(config, inline, _PARAM_FIELDS,
                         defaults={"lam": 128})
    try:
        return ParamSet(**data)
    except (TypeError, ValueError) as exc:
        _fail(EXIT_PARAMS, str(exc))


def _param_options(fn):
    opts = [
        click.option("--q", "q", type=int, default=None,
                     help="base field size (prime)"),
        click.option("--m", "m", type=int, default=None,
                     help="extension degree of F_{q^m}"),
        click.option("--n", "n", type=int, default=None,
                     help="trapdoor rows / syndrome length"),
        click.option("--L", "L", type=int, default=None,
                     help="extra columns beside the square trapdoor block"),
        click.option("--k", "k", type=int, default=None,
                     help="public matrix rows"),
        click.option("--w", "w", type=int, default=None,
                     help="trapdoor row support dimension"),
        click.option("--t", "t", type=int, default=None,
                     help="error support dimension"),
        click.option("--N", "N", type=int, default=None,
                     help="error matrix rows"),
        click.option("--lam", "lam", type=int, default=None,
                     help="target security level in bits (default 128)"),
        click.option("--config", type=click.Path(), default=None,
                     help="JSON file with parameter fields; inline flags win"),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


@click.group()
def main() -> None:
    """Rank-metric trapdoor functions: keys, inversion, bounds, experiments.

    Exit codes: 0 success, 2 usage, 3 step-I decode failure, 4 step-II
    decode or inversion failure, 5 I/O or malformed data, 6 parameter
    violation.
    """


# ---------------------------------------------------------------------------
# keygen / eval / invert
# ---------------------------------------------------------------------------

@main.command()
@_param_options
@click.option("--seed", type=int, required=True, help="RNG seed (required)")
@click.option("--pk", "pk_path", type=click.Path(), required=True,
              help="output path for the public key")
@click.option("--tk", "tk_path", type=click.Path(), required=True,
              help="output path for the trapdoor key")
def keygen(seed: int, pk_path: str, tk_path: str, config: Optional[str],
           **inline) -> None:
    """Generate a keypair and write the two key files."""
    params = _build_params(config, **inline)
    try:
        pk, tk = gen(params, random.Random(seed))
    except ValueError as exc:
        _fail(EXIT_PARAMS, str(exc))
    _write_file(pk_path, serialize_pk(pk))
    _write_file(tk_path, serialize_tk(tk))
    sizes = analysis.key_sizes(params)
    click.echo(f"wrote {pk_path} ({sizes.pk_kb} KB payload) and "
               f"{tk_path} ({sizes.tk_kb} KB payload)")


@main.command("eval")
@click.option("--pk", "pk_path", type=click.Path(), required=True,
              help="public key file")
@click.option("--seed", type=int, default=None,
              help="RNG seed (required when sampling inputs)")
@click.option("--x", "x_path", type=click.Path(), default=None,
              help="read the uniform input matrix instead of sampling")
@click.option("--e", "e_path", type=click.Path(), default=None,
              help="read the error matrix instead of sampling")
@click.option("--ct", "ct_path", type=click.Path(), required=True,
              help="output path for the ciphertext")
@click.option("--save-x", type=click.Path(), default=None,
              help="also write the (sampled) input matrix here")
@click.option("--save-e", type=click.Path(), default=None,
              help="also write the (sampled) error matrix here")
def eval_cmd(pk_path: str, seed: Optional[int], x_path: Optional[str],
             e_path: Optional[str], ct_path: str, save_x: Optional[str],
             save_e: Optional[str]) -> None:
    """Evaluate the function on a sampled or supplied input pair."""
    try:
        pk = deserialize_pk(_read_file(pk_path))
    except ValueError as exc:
        _fail(EXIT_IO, f"{pk_path}: {exc}")
    ctx = pk.ctx
    if (x_path is None) != (e_path is None):
        raise click.UsageError("--x and --e must be given together")
    if x_path is not None:
        try:
            X = MatFqm.from_bytes(ctx, _read_file(x_path))
            E = MatFqm.from_bytes(ctx, _read_file(e_path))
        except ValueError as exc:
            _fail(EXIT_IO, f"input matrices: {exc}")
    else:
        if seed is None:
            raise click.UsageError("--seed is required when sampling inputs")
        X, E = sample_input(pk, random.Random(seed))
    try:
        ct = evaluate(pk, X, E)
    except ValueError as exc:
        _fail(EXIT_PARAMS, str(exc))
    _write_file(ct_path, serialize_ct(ct))
    if save_x is not None:
        _write_file(save_x, X.to_bytes())
    if save_e is not None:
        _write_file(save_e, E.to_bytes())
    click.echo(f"wrote {ct_path}")


@main.command("invert")
@click.option("--pk", "pk_path", type=click.Path(), required=True,
              help="public key file")
@click.option("--tk", "tk_path", type=click.Path(), required=True,
              help="trapdoor key file")
@click.option("--ct", "ct_path", type=click.Path(), required=True,
              help="ciphertext file")
@click.option("--out-x", type=click.Path(), default=None,
              help="write the recovered input matrix here")
@click.option("--out-e", type=click.Path(), default=None,
              help="write the recovered error matrix here")
def invert_cmd(pk_path: str, tk_path: str, ct_path: str,
               out_x: Optional[str], out_e: Optional[str]) -> None:
    """Invert a ciphertext with the trapdoor; report the failing step."""
    try:
        pk = deserialize_pk(_read_file(pk_path))
        tk = deserialize_tk(_read_file(tk_path))
        ct = deserialize_ct(_read_file(ct_path))
    except ValueError as exc:
        _fail(EXIT_IO, str(exc))
    try:
        X, E = invert(pk, tk, ct)
    except StepIFailure as exc:
        _fail(EXIT_STEP_I, f"inversion failed at step I: {exc}")
    except StepIIFailure as exc:
        _fail(EXIT_STEP_II, f"inversion failed at step II: {exc}")
    except InversionError as exc:
        _fail(EXIT_STEP_II, f"inversion failed: {exc}")
    except ValueError as exc:
        _fail(EXIT_IO, str(exc))
    if out_x is not None:
        _write_file(out_x, X.to_bytes())
    if out_e is not None:
        _write_file(out_e, E.to_bytes())
    click.echo("inversion succeeded")


# ---------------------------------------------------------------------------
# validate / sizes
# ---------------------------------------------------------------------------

def _plot_table(path: str, lines) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = [f"{ln.group[:6]}-{ln.params.lam}" for ln in lines]
    totals = [float(ln.log2_total) for ln in lines]
    targets = [-ln.params.lam for ln in lines]
    xs = range(len(lines))
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.bar(xs, totals, color="#4878a8", label="log2 failure bound")
    ax.plot(xs, targets, "r_", markersize=22, label="-lambda target")
    eps_xs = [i for i, ln in enumerate(lines) if ln.group == "statistical"]
    if eps_xs:
        ax.plot(eps_xs, [float(lines[i].log2_epsilon) for i in eps_xs],
                "k.", label="log2 closeness bound")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylabel("log2 probability / distance")
    ax.set_title("reference parameter sets: bounds vs targets")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _plot_report(path: str, report: analysis.ParamReport) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    names, values = [], []
    if report.bound is not None:
        names += ["log2 P_I", "log2 P_II", "log2 total"]
        values += [float(report.bound.log2_PI), float(report.bound.log2_PII),
                   float(report.bound.log2_total)]
    names.append("log2 closeness")
    values.append(float(report.log2_epsilon))
    fig, ax = plt.subplots(figsize=(6.5, 4))
    ax.bar(range(len(values)), values, color="#4878a8")
    ax.axhline(-report.security_level, color="r", linestyle="--",
               label=f"-lambda = -{report.security_level}")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=20, ha="right")
    ax.set_ylabel("log2 value")
    ax.set_title("bound components vs security target")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


@main.command()
@_param_options
@click.option("--statistical", is_flag=True,
              help="also require the closeness bound to clear -lambda")
@click.option("--table", is_flag=True,
              help="recompute sizes and bounds for all reference rows")
@click.option("--records", type=click.Path(), default=None,
              help="write tab-separated constraint records to this file")
@click.option("--plot", "plot_path", type=click.Path(), default=None,
              help="render the bound figure to this file")
def validate(statistical: bool, table: bool, records: Optional[str],
             plot_path: Optional[str], config: Optional[str],
             **inline) -> None:
    """Validate parameters, or reproduce the reference table with --table."""
    if table:
        lines = analysis.reference_table()
        header = ("group\tlam\tq\tm\tn\tL\tk\tw\tt\tN\t"
                  "pk_kb\tpk_expected\tct_kb\tct_expected\t"
                  "log2_total\tlog2_eps\tstatus")
        rows = [header]
        for ln in lines:
            p = ln.params
            rows.append(
                f"{ln.group}\t{p.lam}\t{p.q}\t{p.m}\t{p.n}\t{p.L}\t{p.k}\t"
                f"{p.w}\t{p.t}\t{p.N}\t{ln.pk_kb}\t{ln.pk_kb_expected}\t"
                f"{ln.ct_kb}\t{ln.ct_kb_expected}\t"
                f"{float(ln.log2_total):.2f}\t{float(ln.log2_epsilon):.2f}\t"
                f"{'PASS' if ln.passed else 'FAIL'}")
        click.echo("\n".join(rows))
        if records is not None:
            _write_text(records, rows)
        if plot_path is not None:
            _plot_table(plot_path, lines)
            click.echo(f"wrote {plot_path}")
        if not all(ln.passed for ln in lines):
            sys.exit(EXIT_PARAMS)
        return

    params = _build_params(config, **inline)
    report = analysis.validate_params(params, statistical=statistical)
    click.echo(report.render())
    if records is not None:
        _write_text(records, report.records())
    if plot_path is not None:
        _plot_report(plot_path, report)
        click.echo(f"wrote {plot_path}")
    if not report.passed:
        sys.exit(EXIT_PARAMS)


@main.command()
@_param_options
@click.option("--table", is_flag=True,
              help="print sizes for all reference rows instead")
def sizes(table: bool, config: Optional[str], **inline) -> None:
    """Print public key, trapdoor key, and ciphertext payload sizes."""
    if table:
        click.echo("group\tlam\tpk_kb\tct_kb\tpk_expected\tct_expected")
        for ln in analysis.reference_table():
            click.echo(f"{ln.group}\t{ln.params.lam}\t{ln.pk_kb}\t"
                       f"{ln.ct_kb}\t{ln.pk_kb_expected}\t{ln.ct_kb_expected}")
        return
    params = _build_params(config, **inline)
    s = analysis.key_sizes(params)
    click.echo("key\tbytes\tkb")
    click.echo(f"pk\t{s.pk_bytes}\t{s.pk_kb}")
    click.echo(f"tk\t{s.tk_bytes}\t{s.tk_kb}")
    click.echo(f"ct\t{s.ct_bytes}\t{s.ct_kb}")


# ---------------------------------------------------------------------------
# simulate / sphere
# ---------------------------------------------------------------------------

def _plot_simulation(path: str, result: analysis.SimulationResult) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    running, failures = [], 0
    for row in result.rows:
        failures += 1 if row.step_failed else 0
        running.append(failures / (row.trial + 1))
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(range(1, result.trials + 1), running, color="#4878a8",
            label="running empirical rate")
    ax.axhline(result.analytic_bound, color="r", linestyle="--",
               label="analytic bound")
    ax.set_xlabel("trials")
    ax.set_ylabel("failure rate")
    ax.set_title("decoder failure rate vs analytic bound")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


@main.command()
@click.option("--ell", "ell", type=int, default=None,
              help="check matrix rows")
@click.option("--n-cols", "n_cols", type=int, default=None,
              help="check matrix columns")
@click.option("--w", "w", type=int, default=None,
              help="row support dimension")
@click.option("--t", "t", type=int, default=None,
              help="error support dimension")
@click.option("--N", "N", type=int, default=None,
              help="error matrix rows (syndrome columns)")
@click.option("--m", "m", type=int, default=None,
              help="extension degree")
@click.option("--q", "q", type=int, default=None,
              help="base field size (prime)")
@click.option("--config", type=click.Path(), default=None,
              help="JSON file with the fields above; inline flags win")
@click.option("--trials", type=int, required=True, help="trial count")
@click.option("--seed", type=int, required=True,
              help="master seed; trial seeds derive from it")
@click.option("--csv", "csv_path", type=click.Path(), default=None,
              help="write per-trial CSV (columns: trial, step_failed, seed)")
@click.option("--plot", "plot_path", type=click.Path(), default=None,
              help="render the running-rate figure to this file")
def simulate(config: Optional[str], trials: int, seed: int,
             csv_path: Optional[str], plot_path: Optional[str],
             **inline) -> None:
    """Estimate the decode failure rate on random instances.

    Per-trial results go to --csv with columns trial (0-based index),
    step_failed ('' for success, 'I' or 'II' otherwise), and seed (the
    derived per-trial seed).
    """
    data = _merge_params(config, inline, _SIM_FIELDS)
    try:
        result = analysis.simulate_failure(
            data["ell"], data["n_cols"], data["w"], data["t"], data["N"],
            data["m"], data["q"], trials=trials, master_seed=seed)
    except ValueError as exc:
        _fail(EXIT_PARAMS, str(exc))
    sigma = (result.analytic_bound * (1 - result.analytic_bound)
             / trials) ** 0.5
    click.echo(f"trials\t{result.trials}")
    click.echo(f"failures_step_i\t{result.failures_i}")
    click.echo(f"failures_step_ii\t{result.failures_ii}")
    click.echo(f"successes\t{result.successes}")
    click.echo(f"empirical_rate\t{result.empirical_rate:.6f}")
    click.echo(f"analytic_bound\t{result.analytic_bound:.6f}")
    click.echo(f"log2_bound\t{float(result.bound.log2_total):.4f}")
    click.echo(f"in_regime\t{result.bound.regime_ok}")
    click.echo(f"within_3_sigma\t"
               f"{result.empirical_rate <= result.analytic_bound + 3 * sigma}")
    if csv_path is not None:
        _write_text(csv_path, list(result.csv_lines()))
        click.echo(f"wrote {csv_path}")
    if plot_path is not None:
        _plot_simulation(plot_path, result)
        click.echo(f"wrote {plot_path}")


@main.command()
@click.option("--q", type=int, required=True, help="base field size (prime)")
@click.option("--m", type=int, required=True, help="extension degree")
@click.option("--L", "length", type=int, required=True,
              help="vector length")
@click.option("--w", type=int, required=True, help="rank weight")
def sphere(q: int, m: int, length: int, w: int) -> None:
    """Exact size of the rank-w sphere in F_{q^m}^L, with log2 bounds."""
    try:
        count = sphere_size(q, m, length, w)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    click.echo(f"sphere_size\t{count}")
    if count > 0:
        click.echo(f"log2\t{_log2_int(count):.6f}")
    try:
        lo, hi = sphere_log2_bounds(q, m, length, w)
        click.echo(f"log2_lower\t{lo:.6f}")
        click.echo(f"log2_upper\t{hi:.6f}")
    except ValueError as exc:
        click.echo(f"log2_bounds\tnot applicable ({exc})")


def _log2_int(x: int) -> float:
    """ log2 of a positive integer too large for float conversion. """
    shift = max(0, x.bit_length() - 64)
    return math.log2(x >> shift) + shift


if __name__ == "__main__":
    main()
