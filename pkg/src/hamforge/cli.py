"""``forge`` command line: solve, verify, sample, growth, sweep.

Exit codes: 0 success / all checks pass, 1 numeric failure or failed
check, 2 infeasible targets or invalid flags.
"""
from __future__ import annotations

import csv
import json
import logging
import sys

import click
import mpmath

from . import geomlab, model_io
from .expcalc import ensure_precision, mpf
from .polycore import TYPE1, TYPE2, InvariantViolation, RootTuple, partial_degree, total_degree
from .profiles import (EXPANDING, SHRINKING, AnsatzConfig, CertificationReport, ConfigError,
                       ObstructionError, build_q, certify_profiles)
from .solvers import InfeasibleError, SolverError, shrinker_H, solve, solve_shrinker_a

log = logging.getLogger("hamforge")

EXIT_OK, EXIT_NUMERIC, EXIT_INFEASIBLE = 0, 1, 2
DELTA_TOL = 1e-8
ORACLE_TOL = 1e-6
H_TOL = 1e-10

SAMPLE_COLUMNS = [
    ("xi_<j>", "momentum coordinate ξ_j"),
    ("min_eig", "smallest eigenvalue of the fiber metric matrix in (ξ, t)"),
    ("base_<k>", "base factors ε_B p_nc(0), ε_j p_nc(α_j)"),
    ("scal", "scalar curvature of the ℓ=2 fiber (blank otherwise)"),
    ("sup_sec", "max |f_s| over [-1,1]², bounds |sec| of the ℓ=2 fiber"),
    ("K_<r><s>", "g(K_r, K_s) for the torus generators K_r = ∂/∂t_r"),
    ("oracle", "max-norm of the Ricci-oracle residual (blank when not requested or out of regime)"),
]
GROWTH_COLUMNS = [
    ("R", "completeness distance at ξ_ℓ = X (and ξ_1 = -X for Type 2)"),
    ("X", "level of the unbounded momentum coordinate(s)"),
    ("vol_comparison", "comparison volume of {ξ_ℓ ≤ X (, ξ_1 ≥ -X)}"),
    ("d_lower", "lower distance bound at the sample point"),
    ("d_upper", "upper distance bound (broken ξ-path length)"),
]
SWEEP_COLUMNS = [
    ("alpha", "swept root parameter"),
    ("a", "soliton scale used (solved for shrinkers)"),
    ("delta_<j>", "partial degrees δ_j"),
    ("H", "shrinker compatibility function H(α, a) (blank otherwise)"),
]


def _doc(cols) -> str:
    return "\n".join(f"  {n}: {d}" for n, d in cols)


def _parse_ints(s: str) -> tuple:
    return tuple(int(v) for v in s.split(",") if v.strip() != "")


def _parse_range(s: str) -> tuple:
    """lo:hi:n."""
    try:
        lo, hi, n = s.split(":")
        return mpf(lo), mpf(hi), int(n)
    except ValueError as exc:
        raise click.BadParameter(f"expected lo:hi:n, got {s!r}") from exc


def _linspace(lo, hi, n):
    if n == 1:
        return [lo]
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def _write_csv(path, schema, header, rows) -> None:
    fh = open(path, "w", newline="", encoding="utf-8") if path != "-" else sys.stdout
    try:
        fh.write("# schema: " + "; ".join(f"{n} = {d}" for n, d in schema) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(["" if v is None else (mpmath.nstr(v, 17) if isinstance(v, mpmath.mpf) else v) for v in r])
    finally:
        if fh is not sys.stdout:
            fh.close()


# verification

def verify_model(model, oracle_points: int = 5, seed: int = 0) -> CertificationReport:
    """Re-derive every stored invariant of a model and check it."""
    cfg = model.config
    roots = model.roots
    rep = certify_profiles(model.profiles, cfg)
    ell = roots.ell
    deltas = [partial_degree(model.q, roots, j) for j in range(ell)]
    err = max(abs(mpf(d) - t) for d, t in zip(deltas, cfg.delta_targets))
    rep.add("delta_match", err <= DELTA_TOL, err, DELTA_TOL,
            f"δ = {[mpmath.nstr(mpf(d), 12) for d in deltas]} vs targets {list(cfg.delta_targets)}")
    stored = max(abs(mpf(d) - mpf(s)) for d, s in zip(deltas, model.deltas))
    rep.add("stored_deltas", stored <= 1e-20, stored, 1e-20)
    try:
        q2 = build_q(roots, cfg, model.a)
        diff = max([abs(mpf(c1) - mpf(c2)) for c1, c2 in zip(q2.coeffs, model.q.coeffs)]
                   + [mpf(0) if q2.degree == model.q.degree else mpf(1)])
        rep.add("q_rebuild", diff <= 1e-20, diff, 1e-20, "q re-solved from (α, a)")
    except Exception as exc:     # construction failure is itself a failed check
        rep.add("q_rebuild", False, None, 1e-20, f"rebuild failed: {exc}")
    try:
        td = total_degree(model.q, roots, tol=1e-12)
        weighted = sum((d + 1) * mpf(x) for d, x in zip(roots.d_js, deltas))
        e = abs(weighted - mpf(td.closed_form))
        rep.add("total_degree", e <= DELTA_TOL, e, DELTA_TOL, "Σ(d_j+1)δ_j vs q_ℓσ_ℓ + (−1)^{ℓ−1}q(0)")
    except InvariantViolation as exc:
        rep.add("total_degree", False, None, DELTA_TOL, str(exc))
    if cfg.soliton_class == SHRINKING:
        alpha = 1 / mpf(roots.alphas[0])
        h = abs(shrinker_H(alpha, model.a, cfg))
        rep.add("shrinker_H", h <= H_TOL, h, H_TOL, "H(α, a) re-evaluated")
    pts = geomlab.interior_points(model, max(oracle_points, 1), seed=seed)
    worst = None
    for p in pts:
        try:
            s = geomlab.eval_metric(model, p, with_sec=False)
            ok = s.positive
        except (geomlab.DomainError, geomlab.ChartError) as exc:
            ok = False
            log.warning("metric sample failed at %s: %s", p, exc)
        if not ok:
            worst = p
    rep.add("metric_positive", worst is None, None, None, f"{len(pts)} interior samples")
    if oracle_points > 0 and ell == 2 and not any(roots.d_js):
        res = mpf(0)
        for p in pts:
            res = max(res, geomlab._maxabs(geomlab.ricci_oracle(model, p)))
        rep.add("ricci_oracle", res <= ORACLE_TOL, res, ORACLE_TOL, f"{len(pts)} points")
    return rep


# commands

@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--bits", type=int, default=None, envvar="FORGE_BITS", show_envvar=True,
              help="Working precision in bits (default 128).")
@click.option("-v", "--verbose", is_flag=True)
def main(bits, verbose):
    """Solve, certify and sample the ansatz metrics."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")
    mpmath.mp.prec = max(bits or 128, 80)
    ensure_precision(mpmath.mp.prec)


def _config(case, cls, iB, dB, d, m, a, experimental) -> AnsatzConfig:
    d, m = _parse_ints(d), _parse_ints(m)
    if case == TYPE2 and len(d) == len(m) - 1:
        d = d + (0,)        # d_ℓ = 0 is forced for Type 2 and may be omitted
    try:
        return AnsatzConfig(case, cls, dB, iB, d, m,
                            a if a is not None else 0, experimental)
    except ObstructionError as exc:
        raise click.UsageError(f"{exc} (there can be no complete Type 2 shrinking or expanding soliton)")
    except ConfigError as exc:
        raise click.UsageError(str(exc))


def _parse_a(a):
    if a is None:
        return None
    from fractions import Fraction
    try:
        return Fraction(a)
    except ValueError:
        return mpf(a)


@main.command("solve")
@click.option("--case", type=click.Choice([TYPE1, TYPE2]), required=True)
@click.option("--class", "cls", type=click.Choice(["cy", "steady", "shrinking", "expanding"]), required=True)
@click.option("--iB", "iB", type=int, required=True, help="Fano index of the base.")
@click.option("--dB", "dB", type=int, required=True, help="Complex dimension of the base.")
@click.option("--d", "d", required=True, help="Comma-separated d_j.")
@click.option("--m", "m", required=True, help="Comma-separated twists m_j.")
@click.option("--a", "a", default=None, help="Soliton scale (steady/expanding); rational strings stay exact.")
@click.option("--experimental", is_flag=True, help="Allow the unproved general-ℓ solver.")
@click.option("-o", "--output", default="model.json", show_default=True)
def cmd_solve(case, cls, iB, dB, d, m, a, experimental, output):
    """Solve for (α, a), certify, and write a model file."""
    cfg = _config(case, cls, iB, dB, d, m, _parse_a(a), experimental)
    try:
        model = solve(cfg)
    except InfeasibleError as exc:
        click.echo(f"infeasible: {exc}", err=True)
        if exc.report:
            click.echo("range report: " + json.dumps(model_io.encode(exc.report)), err=True)
        sys.exit(EXIT_INFEASIBLE)
    except (SolverError, ArithmeticError) as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)
    except ConfigError as exc:
        raise click.UsageError(str(exc))
    rep = model.certify()
    model_io.save(model, output, rep)
    click.echo(f"wrote {output}: α = {[mpmath.nstr(mpf(x), 15) for x in model.alphas]}, "
               f"a = {mpmath.nstr(mpf(model.a), 15)}, certification {'PASS' if rep.passed else 'FAIL'}")
    sys.exit(EXIT_OK if rep.passed else EXIT_NUMERIC)


def _load(path):
    try:
        return model_io.load(path)
    except (model_io.ModelFileError, OSError) as exc:
        raise click.ClickException(str(exc))


@main.command("verify")
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--oracle-points", default=5, show_default=True, type=int)
@click.option("--json", "as_json", is_flag=True, help="Machine-readable report on stdout.")
def cmd_verify(model_file, oracle_points, as_json):
    """Re-certify a model file; exit 0 iff every check passes."""
    model = _load(model_file)
    rep = verify_model(model, oracle_points)
    if as_json:
        click.echo(json.dumps(rep.to_dict(), indent=1, ensure_ascii=False))
    else:
        click.echo(rep.text())
        click.echo("PASS" if rep.passed else "FAIL")
    sys.exit(EXIT_OK if rep.passed else EXIT_NUMERIC)


@main.command("sample", epilog="CSV columns:\n\n" + _doc(SAMPLE_COLUMNS))
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--grid", "grids", multiple=True, help="lo:hi:n per coordinate (repeat ℓ times).")
@click.option("--n", "n", default=20, show_default=True, help="Random interior points when no grid is given.")
@click.option("--seed", default=0, show_default=True)
@click.option("--oracle", is_flag=True, help="Also evaluate the Ricci oracle (ℓ=2, d=0).")
@click.option("-o", "--output", default="-", show_default=True)
def cmd_sample(model_file, grids, n, seed, oracle, output):
    """Metric invariants at sample points."""
    model = _load(model_file)
    ell = model.ell
    if grids:
        if len(grids) != ell:
            raise click.UsageError(f"need {ell} --grid options")
        axes = [_linspace(*_parse_range(g)) for g in grids]
        pts = [[]]
        for ax in axes:
            pts = [p + [x] for p in pts for x in ax]
    else:
        pts = geomlab.interior_points(model, n, seed=seed)
    header = [f"xi_{j + 1}" for j in range(ell)] + ["min_eig"] + [f"base_{k}" for k in range(ell + 1)]
    header += ["scal", "sup_sec"] + [f"K_{r + 1}{s + 1}" for r in range(ell) for s in range(r, ell)] + ["oracle"]
    rows, clipped = [], 0
    for p in pts:
        try:
            s = geomlab.eval_metric(model, p)
        except geomlab.DomainError:
            clipped += 1
            continue
        _, gtt = geomlab.fiber_blocks(model, p)
        row = list(s.xi) + [s.min_eig] + list(s.base_factors)
        row += [s.sec_data["scal"], s.sec_data["sup_abs"]] if s.sec_data else [None, None]
        row += [gtt[r, c] for r in range(ell) for c in range(r, ell)]
        res = None
        if oracle and ell == 2 and not any(model.roots.d_js):
            res = geomlab._maxabs(geomlab.ricci_oracle(model, p))
        rows.append(row + [res])
    if clipped:
        click.echo(f"warning: {clipped} grid points outside the certified domain were clipped", err=True)
    _write_csv(output, SAMPLE_COLUMNS, header, rows)


@main.command("growth", epilog="CSV columns:\n\n" + _doc(GROWTH_COLUMNS))
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--npts", default=16, show_default=True)
@click.option("--decades", default=2.0, show_default=True)
@click.option("-o", "--output", default="-", show_default=True)
def cmd_growth(model_file, npts, decades, output):
    """Volume-growth regression and distance bounds."""
    model = _load(model_file)
    try:
        v = geomlab.volume_exponent(model, npts=npts, decades=decades)
    except geomlab.IncompleteMetricError as exc:
        click.echo(f"incomplete metric: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)
    rows = []
    for R, X, vol in zip(v["R"], v["X"], v["volume"]):
        xi = _growth_point(model, X)
        db = geomlab.distance_bounds(model, xi)
        rows.append([R, X, vol, db["lower"], db["upper"]])
    _write_csv(output, GROWTH_COLUMNS, [c for c, _ in GROWTH_COLUMNS], rows)
    click.echo(f"volume exponent: analytic {v['analytic']}, regression slope {v['slope']:.4f}", err=True)


def _growth_point(model, X):
    xi = []
    for j, (lo, hi) in enumerate(model.roots.intervals()):
        if hi == mpmath.inf:
            xi.append(mpf(X))
        elif lo == -mpmath.inf:
            xi.append(-mpf(X))
        else:
            xi.append((mpf(lo) + mpf(hi)) / 2)
    return xi


@main.command("sweep", epilog="CSV columns:\n\n" + _doc(SWEEP_COLUMNS))
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha", "alpha_range", required=True, help="lo:hi:n for the swept root parameter.")
@click.option("-o", "--output", default="-", show_default=True)
def cmd_sweep(model_file, alpha_range, output):
    """Partial degrees along a line in root space.

    Type 1 rank 2 sweeps α₂ (α₁ = 1), except shrinkers/expanders which sweep
    the scale α with roots (1/α, bα). Type 2 rank 2 sweeps α₂ (α₁ = −1);
    rank 3 sweeps α₃ with α₁ taken from the model.
    """
    model = _load(model_file)
    cfg = model.config
    lo, hi, n = _parse_range(alpha_range)
    ell = model.ell
    rows = []
    for al in _linspace(lo, hi, n):
        H = None
        a = model.a
        try:
            if cfg.soliton_class in (SHRINKING, EXPANDING) and cfg.case == TYPE1:
                if cfg.soliton_class == SHRINKING:
                    a, H, _ = solve_shrinker_a(al, cfg)
                roots = RootTuple((1 / al, cfg.b * al), TYPE1, cfg.d_js)
            elif cfg.case == TYPE1 and ell == 2:
                roots = RootTuple((1, al), TYPE1, cfg.d_js)
            elif cfg.case == TYPE2 and ell == 2:
                roots = RootTuple((-1, al), TYPE2, cfg.d_js)
            elif cfg.case == TYPE2 and ell == 3:
                roots = RootTuple((model.alphas[0], -1, al), TYPE2, cfg.d_js)
            else:
                raise click.UsageError("sweep supports rank-2 models and Type 2 rank 3")
            q = build_q(roots, cfg, a)
            ds = [partial_degree(q, roots, j) for j in range(ell)]
        except click.UsageError:
            raise
        except Exception as exc:
            log.warning("sweep point α=%s skipped: %s", al, exc)
            continue
        rows.append([al, mpf(a)] + [mpf(d) for d in ds] + [H])
    header = ["alpha", "a"] + [f"delta_{j + 1}" for j in range(ell)] + ["H"]
    _write_csv(output, SWEEP_COLUMNS, header, rows)


if __name__ == "__main__":
    main()
