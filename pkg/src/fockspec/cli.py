"""Batch command-line front end.

Every number is read and written as a decimal string at full working
precision; outputs are deterministic (sorted keys, fixed row order) and
carry a provenance header.  Exit codes: 0 success, 2 configuration error,
3 precondition error, 4 numerical certification failure, 5 internal
consistency failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpfr

from . import __version__
from .bigarith import PrecisionContext
from .errors import (
    CertificationError,
    ConfigError,
    ConvergenceError,
    FockspecError,
    InternalConsistencyError,
    PreconditionError,
)
from .asymptotics import (
    capacity_limit_profile,
    counting_law_profile,
    slope_fit,
)
from .landau import cluster_bounds
from .moments import gram_matrix, toeplitz_truncation, weighted_moment_matrix
from .orthopoly import nth_root_profile, orthonormal_basis
from .pencil import pencil_series
from .symbols import Disc, Symbol, capacity, detect_swap_symmetry, green_disc_complement
from .toeplitz import (
    SpectrumRecord,
    SpectrumSeries,
    spectrum_series,
    tail_bound,
)

COMMANDS = (
    "moments",
    "outbed",
    "orthopoly",
    "toeplitz-spectrum",
    "asymfit",
    "capacity",
    "landau-report",
    "selftest",
)


@dataclass
class JobConfig:
    command: str
    symbol_path: str | None = None
    precision_bits: int | None = None
    degree_ladder: list = field(default_factory=list)
    out: str | None = None
    format: str = "json"
    memory_budget_mb: int | None = None
    epsilon: str | None = None
    a: str | None = None
    lambda_grid: list = field(default_factory=list)
    interval: tuple | None = None
    degree: int | None = None
    kind: str | None = None
    point: str | None = None
    window: tuple | None = None
    series_path: str | None = None


def _parse_ladder(text):
    try:
        return sorted({int(t) for t in text.split(",") if t.strip()})
    except ValueError as exc:
        raise ConfigError(f"bad degree ladder {text!r}: {exc}") from exc


def _parse_pair(text, what):
    parts = [t.strip() for t in text.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"{what} must be two comma-separated values, got {text!r}")
    return tuple(parts)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fockspec",
        description="spectral laboratory for Gaussian Toeplitz operators with disc symbols",
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("symbol", nargs="?", help="symbol JSON file (omit for selftest)")
    p.add_argument("--precision-bits", type=int, default=None)
    p.add_argument("--degree-ladder", default=None, help='e.g. "10,15,20,25,30,35,40"')
    p.add_argument("--degree", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--memory-budget-mb", type=int, default=None)
    p.add_argument("--epsilon", default=None)
    p.add_argument("--a", default=None)
    p.add_argument("--lambda-grid", default=None, help='e.g. "1e-4,1e-8,1e-12"')
    p.add_argument("--interval", default=None, help='e.g. "0.5,2"')
    p.add_argument("--kind", default=None,
                   choices=("gram-plus", "gram-minus", "weighted-lebesgue",
                            "weighted-fock", "fock-toeplitz"))
    p.add_argument("--point", default=None, help='evaluation point "re,im"')
    p.add_argument("--window", default=None, help='fit window "10,30"')
    p.add_argument("--series", default=None, help="spectrum-series JSON (asymfit input)")
    return p


def config_from_args(args) -> JobConfig:
    cfg = JobConfig(command=args.command, symbol_path=args.symbol)
    cfg.precision_bits = args.precision_bits
    if args.degree_ladder:
        cfg.degree_ladder = _parse_ladder(args.degree_ladder)
    cfg.degree = args.degree
    cfg.out = args.out
    cfg.format = args.format
    cfg.memory_budget_mb = args.memory_budget_mb
    cfg.epsilon = args.epsilon
    cfg.a = args.a
    if args.lambda_grid:
        cfg.lambda_grid = [t.strip() for t in args.lambda_grid.split(",") if t.strip()]
    if args.interval:
        cfg.interval = _parse_pair(args.interval, "--interval")
    cfg.kind = args.kind
    cfg.point = args.point
    if args.window:
        lo, hi = _parse_pair(args.window, "--window")
        cfg.window = (int(lo), int(hi))
    cfg.series_path = args.series
    return cfg


def _load_symbol(cfg: JobConfig) -> Symbol:
    if not cfg.symbol_path:
        raise ConfigError(f"command {cfg.command} needs a symbol JSON file")
    try:
        with open(cfg.symbol_path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read symbol file: {exc}") from exc
    return Symbol.from_json(text)


def _context(cfg: JobConfig, dim_hint: int) -> PrecisionContext:
    if cfg.precision_bits is not None:
        return PrecisionContext(bits=cfg.precision_bits)
    return PrecisionContext.for_dimension(dim_hint)


def _provenance(cfg: JobConfig, ctx: PrecisionContext):
    return {
        "artifact": "fockspec",
        "version": __version__,
        "command": cfg.command,
        "precision_bits": ctx.bits,
        "degree_ladder": cfg.degree_ladder or None,
        "memory_budget_mb": cfg.memory_budget_mb,
        "thresholds": {
            "jacobi_threshold_exponent": ctx.jacobi_threshold_exponent,
            "certified_eigenvalue_rule": "magnitude > 2*tau(N)",
            "inertia_zero_threshold_rule": "2^(-bits/3) * frobenius",
        },
    }


def _emit(cfg: JobConfig, payload=None, csv_rows=None, csv_header=None,
          provenance=None):
    if cfg.format == "json":
        doc = {"provenance": provenance}
        doc.update(payload or {})
        text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    else:
        lines = [f"# {k}: {json.dumps(v, sort_keys=True)}" for k, v in (provenance or {}).items()]
        if csv_header:
            lines.append(",".join(csv_header))
        for row in csv_rows or []:
            lines.append(",".join(str(x) for x in row))
        text = "\n".join(lines) + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dec(ctx, x):
    return ctx.to_decimal(x)


def _matrix_entries(ctx, mm):
    out = []
    for j in range(mm.dim):
        row = []
        for k in range(mm.dim):
            v = mm.entry(j, k)
            row.append([_dec(ctx, v.real), _dec(ctx, v.imag)])
        out.append(row)
    return out


def cmd_moments(cfg: JobConfig) -> int:
    sym = _load_symbol(cfg)
    n = cfg.degree if cfg.degree is not None else 10
    ctx = _context(cfg, n + 1)
    kind = cfg.kind or "fock-toeplitz"
    if kind == "gram-plus" or kind == "gram-minus":
        plus, minus, _, _ = sym.decompose()
        region = plus if kind == "gram-plus" else minus
        mm = gram_matrix(region, n, ctx)
    elif kind == "weighted-lebesgue":
        mm = weighted_moment_matrix(sym, n, ctx, gaussian=False)
    elif kind == "weighted-fock":
        mm = weighted_moment_matrix(sym, n, ctx, gaussian=True)
    else:
        mm = toeplitz_truncation(sym, n, ctx)
    _emit(cfg, {"degree": n, "kind": mm.kind, "entries": _matrix_entries(ctx, mm)},
          provenance=_provenance(cfg, ctx))
    return 0


def cmd_outbed(cfg: JobConfig) -> int:
    sym = _load_symbol(cfg)
    plus, minus, _, _ = sym.decompose()
    if plus.is_empty() or minus.is_empty():
        raise PreconditionError("outbedding needs both sign supports nonempty")
    ladder = cfg.degree_ladder or list(range(0, 21))
    ctx = _context(cfg, max(ladder) + 1)
    series = pencil_series(plus, minus, ladder, ctx)
    rows = []
    payload_rows = []
    for n in sorted(series):
        spec = series[n]
        lo, nu, hi = spec.split_counts()
        eig = ";".join(_dec(ctx, v) for v in spec.eigenvalues)
        rows.append([n, lo, hi, nu, f'"{eig}"'])
        payload_rows.append({
            "n": n, "count_01": lo, "count_1inf": hi, "near_unit": nu,
            "eigenvalues": [_dec(ctx, v) for v in spec.eigenvalues],
        })
    _emit(cfg, {"degrees": payload_rows},
          csv_rows=rows, csv_header=["n", "count_01", "count_1inf", "near_unit", "eigenvalues"],
          provenance=_provenance(cfg, ctx))
    return 0


def cmd_orthopoly(cfg: JobConfig) -> int:
    sym = _load_symbol(cfg)
    plus, _minus, _, _ = sym.decompose()
    if plus.is_empty():
        raise PreconditionError("orthopoly uses the positive support; it is empty")
    n = cfg.degree if cfg.degree is not None else 20
    ctx = _context(cfg, n + 1)
    if not cfg.point:
        raise ConfigError("orthopoly needs --point \"re,im\"")
    re, im = _parse_pair(cfg.point, "--point")
    with ctx.workprec():
        z = ctx.complex(ctx.parse_decimal(re), ctx.parse_decimal(im))
    basis = orthonormal_basis(plus, n, ctx)
    prof = nth_root_profile(basis, z, range(1, n + 1))
    rows = []
    payload = []
    with ctx.workprec():
        tgt = _dec(ctx, prof.target) if prof.target is not None else ""
        for k, v in zip(prof.ks, prof.values):
            rows.append([k, _dec(ctx, v), tgt])
            payload.append({"k": k, "nth_root": _dec(ctx, v)})
    _emit(cfg, {"profile": payload, "green_target": tgt or None,
                "approximate_target": prof.approximate_target},
          csv_rows=rows, csv_header=["k", "nth_root", "green_target"],
          provenance=_provenance(cfg, ctx))
    return 0


def _series_payload(ctx, series: SpectrumSeries):
    rungs = []
    for n in series.degrees:
        rec = series.record(n)
        rungs.append({
            "N": n,
            "tau": _dec(ctx, rec.tail.value),
            "lambda_plus": [_dec(ctx, v) for v in rec.lambda_plus],
            "lambda_minus": [_dec(ctx, v) for v in rec.lambda_minus],
            "certified_counts": {
                "plus": rec.certified_count("+"),
                "minus": rec.certified_count("-"),
                "abs": rec.certified_count("abs"),
            },
        })
    return {
        "symbol": series.symbol.to_json_obj(),
        "precision_bits": series.bits,
        "rungs": rungs,
    }


def cmd_toeplitz_spectrum(cfg: JobConfig) -> int:
    sym = _load_symbol(cfg)
    ladder = cfg.degree_ladder or None
    n_max = max(ladder) if ladder else 40
    ctx = _context(cfg, n_max + 1)
    series = spectrum_series(sym, n_max, ctx, ladder=ladder)
    _emit(cfg, _series_payload(ctx, series), provenance=_provenance(cfg, ctx))
    return 0


def _series_from_payload(doc) -> SpectrumSeries:
    try:
        sym = Symbol.from_json_obj(doc["symbol"])
        bits = int(doc["precision_bits"])
        ctx = PrecisionContext(bits=bits)
        series = SpectrumSeries(sym, bits)
        with ctx.workprec():
            for rung in doc["rungs"]:
                n = int(rung["N"])
                plus = [ctx.parse_decimal(v) for v in rung["lambda_plus"]]
                minus = [ctx.parse_decimal(v) for v in rung["lambda_minus"]]
                series.records[n] = SpectrumRecord(n, plus, minus, tail_bound(sym, n, ctx))
        return series
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed spectrum-series JSON: {exc}") from exc


def cmd_asymfit(cfg: JobConfig) -> int:
    path = cfg.series_path or cfg.symbol_path
    if not path:
        raise ConfigError("asymfit needs a spectrum-series JSON (--series or positional)")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read series file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno}: {exc.msg}") from exc
    series = _series_from_payload(doc)
    ctx = PrecisionContext(bits=series.bits)
    rec = series.top
    payload = {}
    rows = []
    with ctx.workprec():
        thr = 2 * rec.tail.value
        certified = sum(1 for v in rec.singular_values if v > thr)
        if cfg.window:
            window = range(cfg.window[0], cfg.window[1] + 1)
        else:
            window = range(max(1, certified // 4), max(9, certified + 1))
        fits = {}
        for name, ladder in (("singular", rec.singular_values),
                             ("plus", rec.lambda_plus), ("minus", rec.lambda_minus)):
            usable = sum(1 for v in ladder if v > thr)
            win = [n for n in window if n <= usable]
            if len(win) >= 8:
                f = slope_fit(ladder, win, ctx)
                fits[name] = {
                    "c": _dec(ctx, f.c), "d": _dec(ctx, f.d),
                    "offset": _dec(ctx, f.offset),
                    "window": [win[0], win[-1]],
                    "max_residual": _dec(ctx, f.max_residual),
                    "instability": _dec(ctx, f.instability),
                }
        payload["fits"] = fits
        _plus, minus_r, _sm, _b = series.symbol.decompose()
        if minus_r.is_empty():
            prof = capacity_limit_profile(series, ctx)
            payload["capacity_limit"] = {
                "bracket": [_dec(ctx, prof.bracket[0]), _dec(ctx, prof.bracket[1])],
                "tolerance": prof.tolerance,
                "verdict": prof.verdict,
            }
            for n, v in zip(prof.indices, prof.values):
                rows.append([n, _dec(ctx, v)])
        if cfg.lambda_grid:
            law = counting_law_profile(series, cfg.lambda_grid, ctx)
            payload["counting_law"] = {
                "lambdas": [_dec(ctx, l) for l in law.lambdas],
                "counts": law.counts,
                "values": [_dec(ctx, v) for v in law.values],
                "tolerance": law.tolerance,
                "verdict": law.verdict,
            }
    _emit(cfg, payload, csv_rows=rows, csv_header=["n", "n_times_sn_nth_root"],
          provenance=_provenance(cfg, ctx))
    return 0


def cmd_capacity(cfg: JobConfig) -> int:
    sym = _load_symbol(cfg)
    ctx = _context(cfg, 8)
    plus, minus, suppm, _ = sym.decompose()
    payload = {}
    for name, region in (("supp_plus", plus), ("supp_minus", minus),
                         ("supp_minus_of_negative_part", suppm)):
        if region.is_empty():
            payload[name] = None
            continue
        lo, hi = capacity(region, ctx)
        payload[name] = {"lower": _dec(ctx, lo), "upper": _dec(ctx, hi)}
    _emit(cfg, {"capacity": payload}, provenance=_provenance(cfg, ctx))
    return 0


def cmd_landau_report(cfg: JobConfig) -> int:
    sym = _load_symbol(cfg)
    if not cfg.epsilon or not cfg.a or not cfg.lambda_grid:
        raise ConfigError("landau-report needs --epsilon, --a and --lambda-grid")
    n_max = max(cfg.degree_ladder) if cfg.degree_ladder else None
    ctx = PrecisionContext(bits=cfg.precision_bits) if cfg.precision_bits else None
    rep = cluster_bounds(sym, cfg.epsilon, cfg.a, cfg.lambda_grid, ctx, N_max=n_max)
    out_ctx = PrecisionContext(bits=rep.sources["base_bits"])
    payload = {
        "epsilon": rep.epsilon,
        "a": rep.a,
        "magnetic_field": rep.magnetic_field,
        "lambdas": rep.lambdas,
        "negative_side": {
            "lower": rep.negative_lower.counts,
            "upper_plus_unknown_constant": rep.negative_upper.counts,
        },
        "positive_side": {
            "lower_minus_unknown_constant": rep.positive_lower.counts,
            "upper_plus_unknown_constant": rep.positive_upper.counts,
        },
        "unknown_constant_note": (
            "bounds marked with the unknown constant hold modulo an "
            "unspecified additive integer m depending on the symbol, epsilon and a"
        ),
        "sources": rep.sources,
    }
    _emit(cfg, payload, provenance=_provenance(cfg, out_ctx))
    return 0


def cmd_selftest(cfg: JobConfig) -> int:
    """Runs the closed-form sanity battery (the spec's TRIVIAL examples)."""
    ctx = PrecisionContext(bits=192)
    checks = []

    def check(name, fn):
        try:
            fn()
            checks.append((name, True, ""))
        except Exception as exc:  # noqa: BLE001 - selftest reports, never raises
            checks.append((name, False, f"{type(exc).__name__}: {exc}"))

    def expect(cond, msg="check failed"):
        if not cond:
            raise AssertionError(msg)

    from .bigarith import (
        HermitianMatrix,
        cholesky,
        hermitian_eigen,
        ldlt_inertia,
        lower_incomplete_gamma,
        whiten,
    )

    check("gamma(1,0) = 0", lambda: expect(lower_incomplete_gamma(1, 0, ctx) == 0))
    check("eigen identity", lambda: expect(
        [float(v) for v in hermitian_eigen(
            HermitianMatrix([[1, 0, 0], [1, 0], [1]], ctx)).eigenvalues] == [1, 1, 1]))
    check("eigen diag sort", lambda: expect(
        [float(v) for v in hermitian_eigen(
            HermitianMatrix([[3, 0, 0], [1, 0], [2]], ctx)).eigenvalues] == [1, 2, 3]))
    check("cholesky diag", lambda: expect(
        float(cholesky(HermitianMatrix([[4, 0], [9]], ctx))[1][1]) == 3.0))
    check("inertia signs", lambda: expect(
        ldlt_inertia(HermitianMatrix([[1, 0, 0], [0, 0], [-1]], ctx),
                     zero_threshold=0).as_tuple() == (1, 1, 1)))
    check("whiten diagonal pencil", lambda: expect(
        abs(float(whiten(HermitianMatrix([[2, 0], [8]], ctx),
                         HermitianMatrix([[1, 0], [4]], ctx)).entry(1, 1).real) - 2.0) < 1e-40))

    s = Symbol.from_terms((0, 2, 1), (0, 1, -2))
    check("evaluate additive weights", lambda: expect(
        float(s.evaluate(0.5, ctx)) == -1.0 and float(s.evaluate(1.5, ctx)) == 1.0))
    check("green log e", lambda: expect(
        abs(float(green_disc_complement(Disc.make(0, 1), gmpy2.exp(mpfr(1)), ctx)) - 1) < 1e-40))
    check("capacity single disc", lambda: expect(
        float(capacity(Disc.make(7, 3), ctx)[0]) == 3.0))
    check("swap symmetry point reflection", lambda: expect(
        detect_swap_symmetry(Disc.make(-2, 1), Disc.make(2, 1), ctx) is not None))

    from .moments import fock_norm_sq, lebesgue_moment

    check("lebesgue centered (1;1) = pi/2", lambda: expect(
        abs(float(lebesgue_moment(Disc.make(0, 1), 1, 1, ctx).real) - 3.141592653589793 / 2) < 1e-12))
    check("fock norm ratio", lambda: expect(
        abs(float(fock_norm_sq(4, ctx) / fock_norm_sq(3, ctx)) - 4) < 1e-12))

    from .pencil import outbedding_spectrum

    check("outbedding area ratio", lambda: expect(
        abs(float(outbedding_spectrum(Disc.make(0, 2), Disc.make(5, 1), 0,
                                      PrecisionContext(bits=192)).eigenvalues[0]) - 0.25) < 1e-40))

    rows = [[name, "pass" if ok else "FAIL", msg] for name, ok, msg in checks]
    payload = {"selftest": [{"name": n, "ok": ok, "detail": m} for n, ok, m in checks]}
    _emit(cfg, payload, csv_rows=rows, csv_header=["check", "status", "detail"],
          provenance=_provenance(cfg, ctx))
    return 0 if all(ok for _n, ok, _m in checks) else 5


DISPATCH = {
    "moments": cmd_moments,
    "outbed": cmd_outbed,
    "orthopoly": cmd_orthopoly,
    "toeplitz-spectrum": cmd_toeplitz_spectrum,
    "asymfit": cmd_asymfit,
    "capacity": cmd_capacity,
    "landau-report": cmd_landau_report,
    "selftest": cmd_selftest,
}


def run(cfg: JobConfig) -> int:
    return DISPATCH[cfg.command](cfg)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = config_from_args(args)
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PreconditionError as exc:
        print(f"precondition error: {exc}", file=sys.stderr)
        return 3
    except (CertificationError, ConvergenceError) as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return 4
    except InternalConsistencyError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return 5
    except FockspecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
