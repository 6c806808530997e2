"""Command line interface.

Every option can also be set through an environment variable named
``RANKFUSE_<OPTION>`` (for example ``RANKFUSE_SEED=3``).

Exit codes: 0 success, 1 theorem conclusion false, 2 parse or argument
error, 3 degenerate (zero) matrix, 4 dimension mismatch, 5 infeasible
generator configuration.
"""

from __future__ import annotations

import functools
import io
import json
import logging
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .analysis import ALPHA_MODES, FusionSettings, calibrated_sigmas, fuse_pair, noise_sweep, pair_score
from .errors import DimensionMismatchError, RankFuseError
from .fileio import FORMATS, dumps_report, infer_format, read_matrix, write_matrix, write_report
from .fusion import CONVENTIONS, BlendSpec
from .informativeness import DEFAULT_RATIO, low_channels_by_ratio
from .spectral import decompose, dominant_subspace, effective_rank, principal_angles
from .synth import GeneratorConfig, gen_complementary_pair, gen_spectrum_matrix
from .validator import default_k, validate_theorem

EXIT_CONCLUSION_FALSE = 1


def option(*decls, **kwargs):
    """``click.option`` with a ``RANKFUSE_`` environment variable attached."""
    name = max((d for d in decls if d.startswith("--")), key=len)
    kwargs.setdefault("envvar", "RANKFUSE_" + name[2:].upper().replace("-", "_"))
    kwargs.setdefault("show_envvar", True)
    return click.option(*decls, **kwargs)


def handle_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except RankFuseError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(exc.exit_code)

    return wrapper


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {text!r}") from None


def _emit_table(rows: list[dict], columns: list[str], as_json: bool, kind: str) -> None:
    if as_json:
        click.echo(dumps_report({"rows": rows}, kind), nl=False)
        return
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_cell(row[c]) for c in columns) + "\n")
    click.echo(buf.getvalue(), nl=False)


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


format_option = option("--format", "fmt", type=click.Choice(FORMATS), default=None,
                       help="Matrix file format; inferred from the extension when omitted.")
batch_option = option("--batch-rows", type=click.IntRange(min=1), default=None,
                      help="Input is a flattened (B*T) x D dump with B batches.")
json_option = option("--json", "as_json", is_flag=True, help="Emit JSON instead of CSV.")
ratio_option = option("--ratio", type=click.FloatRange(0.0, 1.0, min_open=True), default=DEFAULT_RATIO,
                      show_default=True, help="Fraction of channels treated as low-informativeness.")
seed_option = option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
convention_option = option("--alpha-convention", type=click.Choice(CONVENTIONS), default="own",
                           show_default=True,
                           help="'own': alpha weights the channel being replaced; 'other': alpha weights the donor.")


def _fusion_options(func):
    func = convention_option(func)
    func = option("--alpha", type=click.FloatRange(0.0, 1.0), default=0.5, show_default=True,
                  help="Blend coefficient used with --alpha-mode fixed.")(func)
    func = option("--alpha-mode", type=click.Choice(ALPHA_MODES), default="optimize", show_default=True)(func)
    func = ratio_option(func)
    func = seed_option(func)
    return func


@click.group()
@click.version_option(__version__, prog_name="rankfuse")
def cli():
    """Effective-rank diagnostics and rank-targeted channel fusion."""
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")


def _spectrum_rows(X) -> tuple[list[dict], object, object]:
    dec = decompose(X)
    spec = effective_rank(dec)
    rows = [
        {"index": i + 1, "sigma": float(s), "p": float(p)}
        for i, (s, p) in enumerate(zip(dec.singular_values, spec.probabilities))
    ]
    return rows, dec, spec


@cli.command()
@click.argument("input_path", type=click.Path(dir_okay=False))
@format_option
@batch_option
@json_option
@handle_errors
def erank(input_path, fmt, batch_rows, as_json):
    """Effective rank, entropy, numerical rank and normalized spectrum."""
    X = read_matrix(input_path, fmt, batch_rows)
    rows, dec, spec = _spectrum_rows(X)
    if as_json:
        payload = {
            "effective_rank": spec.effective_rank,
            "entropy": spec.entropy,
            "numerical_rank": dec.numerical_rank,
            "spectrum": rows,
        }
        click.echo(dumps_report(payload, "erank"), nl=False)
        return
    click.echo(f"effective_rank,{spec.effective_rank!r}")
    click.echo(f"entropy,{spec.entropy!r}")
    click.echo(f"numerical_rank,{dec.numerical_rank}")
    click.echo("")
    _emit_table(rows, ["index", "sigma", "p"], False, "spectrum")


@cli.command()
@click.argument("input_path", type=click.Path(dir_okay=False))
@format_option
@batch_option
@json_option
@handle_errors
def spectrum(input_path, fmt, batch_rows, as_json):
    """Singular values and their normalized weights, one row per component."""
    X = read_matrix(input_path, fmt, batch_rows)
    rows, _, _ = _spectrum_rows(X)
    _emit_table(rows, ["index", "sigma", "p"], as_json, "spectrum")


def _read_pair(a_path, b_path, fmt, batch_rows):
    A = read_matrix(a_path, fmt, batch_rows)
    B = read_matrix(b_path, fmt, batch_rows)
    if A.shape != B.shape:
        raise DimensionMismatchError(f"{a_path} is {A.shape[0]}x{A.shape[1]} but {b_path} is {B.shape[0]}x{B.shape[1]}")
    return A, B


@cli.command()
@click.argument("a_path", type=click.Path(dir_okay=False))
@click.argument("b_path", type=click.Path(dir_okay=False))
@_fusion_options
@option("--out-prefix", default="fused", show_default=True, help="Prefix for the written files.")
@format_option
@batch_option
@handle_errors
def fuse(a_path, b_path, seed, ratio, alpha_mode, alpha, alpha_convention, out_prefix, fmt, batch_rows):
    """Fuse two modalities in both directions and report effective-rank gains."""
    A, B = _read_pair(a_path, b_path, fmt, batch_rows)
    settings = FusionSettings(ratio=ratio, alpha_mode=alpha_mode, alpha=alpha,
                              convention=alpha_convention, seed=seed)
    res = fuse_pair(A, B, settings)
    out_fmt = fmt or infer_format(a_path)
    suffix = ".f64" if out_fmt == "raw-f64" else ".csv"
    a_out = write_matrix(f"{out_prefix}_a_fused{suffix}", res.fused_a, out_fmt)
    b_out = write_matrix(f"{out_prefix}_b_fused{suffix}", res.fused_b, out_fmt)
    payload = {
        "inputs": {"a": str(a_path), "b": str(b_path)},
        "settings": {"ratio": ratio, "alpha_mode": alpha_mode, "alpha": alpha,
                     "alpha_convention": alpha_convention, "seed": seed},
        "a": _direction_payload(res.low_a.indices, res.spec_a, res.erank_a),
        "b": _direction_payload(res.low_b.indices, res.spec_b, res.erank_b),
        "delta_a": res.delta_a,
        "delta_b": res.delta_b,
        "harmonic_mean": res.harmonic_mean,
        "outputs": {"a_fused": str(a_out), "b_fused": str(b_out)},
        "warnings": list(res.warnings),
    }
    report = write_report(f"{out_prefix}_report.json", payload, "fuse")
    click.echo(f"delta_a,{res.delta_a!r}")
    click.echo(f"delta_b,{res.delta_b!r}")
    click.echo(f"harmonic_mean,{res.harmonic_mean!r}")
    click.echo(f"report,{report}")


def _direction_payload(indices, spec: BlendSpec, eranks) -> dict:
    return {
        "low_channels": list(indices),
        "alphas": [spec.alphas[c] for c in indices],
        "erank_before": eranks[0],
        "erank_after": eranks[1],
        "erank_gain": eranks[1] - eranks[0],
    }


def _alpha_value(text: str) -> str | float:
    if text == "random":
        return text
    try:
        value = float(text)
    except ValueError:
        raise click.BadParameter("alpha must be a number in [0, 1] or 'random'") from None
    if not 0.0 <= value <= 1.0:
        raise click.BadParameter(f"alpha {value} outside [0, 1]")
    return value


@cli.command()
@click.argument("x_path", type=click.Path(dir_okay=False))
@click.argument("y_path", type=click.Path(dir_okay=False))
@ratio_option
@option("--k", "k", type=click.IntRange(min=1), default=None,
        help="Dominant subspace size; default is the smallest k holding 90% of the energy.")
@option("--alpha", default="0.5", show_default=True,
        help="Uniform blend coefficient, or 'random' for a seeded uniform draw per channel.")
@seed_option
@option("--beta", type=click.FloatRange(min=0.0, min_open=True), default=None,
        help="Column-norm cap for the injected channels; default is the measured maximum.")
@option("--center/--no-center", default=False, show_default=True, help="Column-center Y before auditing.")
@convention_option
@format_option
@batch_option
@handle_errors
def validate(x_path, y_path, ratio, k, alpha, seed, beta, center, alpha_convention, fmt, batch_rows):
    """Check every assumption and proof-step bound of the rank-increase theorem.

    Prints the report as JSON; exits 1 when the effective rank does not increase.
    """
    alpha = _alpha_value(alpha)
    X, Y = _read_pair(x_path, y_path, fmt, batch_rows)
    low = low_channels_by_ratio(X, ratio)
    if alpha == "random":
        draws = np.random.default_rng(seed).uniform(0.0, 1.0, size=len(low))
        spec = BlendSpec.from_array(low, draws)
    else:
        spec = BlendSpec.uniform(low, alpha)
    k = default_k(X) if k is None else k
    report = validate_theorem(X, Y, low, spec, k, beta=beta, center=center, convention=alpha_convention)
    payload = report.to_dict()
    payload["low_channels"] = list(low.indices)
    payload["alphas"] = [spec.alphas[c] for c in low.indices]
    click.echo(dumps_report(payload, "theorem"), nl=False)
    if not report.conclusion_ok:
        sys.exit(EXIT_CONCLUSION_FALSE)


@cli.command("pair-score")
@click.argument("base_path", type=click.Path(dir_okay=False))
@click.argument("candidate_paths", nargs=-1, required=True, type=click.Path(dir_okay=False))
@_fusion_options
@format_option
@batch_option
@json_option
@handle_errors
def pair_score_cmd(base_path, candidate_paths, seed, ratio, alpha_mode, alpha, alpha_convention,
                   fmt, batch_rows, as_json):
    """Rank candidate modalities by harmonic mean of mutual effective-rank gains."""
    base = read_matrix(base_path, fmt, batch_rows)
    candidates = [read_matrix(p, fmt, batch_rows) for p in candidate_paths]
    settings = FusionSettings(ratio=ratio, alpha_mode=alpha_mode, alpha=alpha,
                              convention=alpha_convention, seed=seed)
    rows, skipped = pair_score(base, candidates, names=list(candidate_paths), settings=settings)
    if not rows:
        raise DimensionMismatchError("no candidate matches the base matrix shape")
    for rank, row in enumerate(rows, start=1):
        row["rank"] = rank
    _emit_table(rows, ["rank", "candidate", "delta_base", "delta_candidate", "harmonic_mean"],
                as_json, "pair_score")


@cli.command("noise-sweep")
@click.argument("a_path", type=click.Path(dir_okay=False))
@click.argument("b_path", type=click.Path(dir_okay=False))
@option("--target", type=click.Choice(["a", "b"]), default="a", show_default=True,
        help="Modality that receives the noise.")
@option("--sigmas", default=None, help="Comma-separated noise standard deviations.")
@option("--rel-changes", default=None,
        help="Comma-separated relative Frobenius changes; each is converted to a sigma for the target.")
@_fusion_options
@format_option
@batch_option
@json_option
@handle_errors
def noise_sweep_cmd(a_path, b_path, target, sigmas, rel_changes, seed, ratio, alpha_mode, alpha,
                    alpha_convention, fmt, batch_rows, as_json):
    """Effective-rank gains of the clean and noisy modality across noise levels."""
    if (sigmas is None) == (rel_changes is None):
        raise click.UsageError("give exactly one of --sigmas or --rel-changes")
    A, B = _read_pair(a_path, b_path, fmt, batch_rows)
    if sigmas is not None:
        levels = _float_list(sigmas)
    else:
        levels = calibrated_sigmas(A if target == "a" else B, _float_list(rel_changes), seed)
    if any(s < 0 for s in levels):
        raise click.BadParameter("noise levels must be nonnegative")
    settings = FusionSettings(ratio=ratio, alpha_mode=alpha_mode, alpha=alpha,
                              convention=alpha_convention, seed=seed)
    rows = noise_sweep(A, B, levels, target=target, settings=settings)
    _emit_table(rows, ["sigma", "delta_clean", "delta_noisy", "harmonic_mean"], as_json, "noise_sweep")


@cli.command()
@click.argument("x_path", type=click.Path(dir_okay=False))
@click.argument("y_path", type=click.Path(dir_okay=False))
@ratio_option
@option("--k", "k", type=click.IntRange(min=1), default=None)
@format_option
@batch_option
@json_option
@handle_errors
def angles(x_path, y_path, ratio, k, fmt, batch_rows, as_json):
    """Principal angles between X's dominant subspace and Y's injected channels."""
    X, Y = _read_pair(x_path, y_path, fmt, batch_rows)
    low = low_channels_by_ratio(X, ratio)
    k = default_k(X) if k is None else k
    basis_x = dominant_subspace(decompose(X), k)
    injected, _ = np.linalg.qr(Y[:, low.as_array()])
    rows = [{"index": i + 1, "angle_deg": float(a)}
            for i, a in enumerate(principal_angles(basis_x, injected))]
    _emit_table(rows, ["index", "angle_deg"], as_json, "angles")


@cli.command()
@option("--rows", type=click.IntRange(min=1), required=True)
@option("--cols", type=click.IntRange(min=1), required=True)
@option("--spectrum", "spectrum_text", default=None,
        help="Comma-separated singular values; alone, writes one matrix with this spectrum.")
@option("--pair/--single", "as_pair", default=None,
        help="Write a complementary pair (default when no --spectrum is given).")
@option("--gamma", type=click.FloatRange(0.0, 1.0, max_open=True), default=0.2, show_default=True)
@option("--beta", type=click.FloatRange(min=0.0, min_open=True), default=1.0, show_default=True)
@option("--k", "k", type=click.IntRange(min=1), default=3, show_default=True)
@option("--low-channels", type=click.IntRange(min=1), default=None)
@option("--low-scale", type=click.FloatRange(min=0.0, min_open=True), default=1e-3, show_default=True)
@option("--novelty", type=click.FloatRange(0.0, 1.0, max_open=True), default=0.5, show_default=True)
@seed_option
@option("--out", "out", required=True, help="Output path (single) or prefix (pair).")
@format_option
@handle_errors
def gen(rows, cols, spectrum_text, as_pair, gamma, beta, k, low_channels, low_scale, novelty, seed, out, fmt):
    """Generate synthetic feature matrices."""
    values = tuple(_float_list(spectrum_text)) if spectrum_text else None
    config = GeneratorConfig(rows=rows, cols=cols, singular_values=values, gamma_target=gamma,
                             beta=beta, k=k, seed=seed, low_channels=low_channels,
                             low_scale=low_scale, novelty=novelty)
    if as_pair is None:
        as_pair = values is None
    if not as_pair:
        path = write_matrix(out, gen_spectrum_matrix(config), fmt)
        click.echo(str(path))
        return
    X, Y = gen_complementary_pair(config)
    suffix = ".f64" if fmt == "raw-f64" else ".csv"
    for name, M in (("x", X), ("y", Y)):
        click.echo(str(write_matrix(f"{out}_{name}{suffix}", M, fmt)))


def main(argv=None):
    cli.main(args=argv, prog_name="rankfuse")


if __name__ == "__main__":
    main()
