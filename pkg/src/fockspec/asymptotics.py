"""Fits and law checks on eigenvalue ladders and counting data.

The workhorse model is -log x_n = c n log n + d n (+ offset): the
super-exponential ladders here genuinely carry the O(n) term, and at desk
scale they also carry an O(log n) tail that biases any fit lacking a free
offset, so the least squares runs on the three regressors {n log n, n, 1}
and reports (c, d) with the offset folded into the residual description.
Counting laws are fitted in inverted form (|log lambda| regressed on the
count) for the same reason: the direct count-versus-law ratio converges
only at triple-log speed and is reported, never asserted.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr

from .bigarith import PrecisionContext
from .errors import PreconditionError
from .pencil import DeltaEstimates
from .symbols import Symbol, capacity, hulls_disjoint
from .toeplitz import SpectrumSeries, counting_function


def _lstsq3(rows, ys, ctx):
    """Least squares for up to 3 columns via normal equations."""
    cols = len(rows[0])
    with ctx.workprec():
        G = [[mpfr(0)] * cols for _ in range(cols)]
        b = [mpfr(0)] * cols
        for r, y in zip(rows, ys):
            for i in range(cols):
                for j in range(cols):
                    G[i][j] += r[i] * r[j]
                b[i] += r[i] * y
        # Gaussian elimination with partial pivoting
        for i in range(cols):
            piv = max(range(i, cols), key=lambda k: abs(G[k][i]))
            if G[piv][i] == 0:
                raise PreconditionError("degenerate fit system")
            G[i], G[piv] = G[piv], G[i]
            b[i], b[piv] = b[piv], b[i]
            for k in range(i + 1, cols):
                f = G[k][i] / G[i][i]
                for j in range(i, cols):
                    G[k][j] -= f * G[i][j]
                b[k] -= f * b[i]
        x = [mpfr(0)] * cols
        for i in range(cols - 1, -1, -1):
            acc = b[i] - sum(G[i][j] * x[j] for j in range(i + 1, cols))
            x[i] = acc / G[i][i]
        return x


@dataclass
class SlopeFit:
    c: mpfr
    d: mpfr
    offset: mpfr
    window: list
    max_residual: mpfr
    instability: mpfr  # |c| shift between the window halves


def slope_fit(values, window, ctx: PrecisionContext | None = None) -> SlopeFit:
    """Fit -log x_n = c n log n + d n (+ offset) over 1-based indices.

    ``values`` is the descending positive ladder (values[0] is x_1); the
    window is an iterable of indices into it.
    """
    ctx = ctx or PrecisionContext(bits=192)
    window = sorted(set(int(n) for n in window))
    if len(window) < 8:
        raise PreconditionError("slope fit needs at least 8 certified values")
    if window[0] < 1 or window[-1] > len(values):
        raise PreconditionError(
            f"window {window[0]}..{window[-1]} exceeds the ladder length {len(values)}"
        )
    with ctx.workprec():
        rows, ys = [], []
        for n in window:
            x = mpfr(values[n - 1])
            if x <= 0:
                raise PreconditionError(f"ladder value at index {n} is not positive")
            nn = mpfr(n)
            rows.append([nn * gmpy2.log(nn), nn, mpfr(1)])
            ys.append(-gmpy2.log(x))
        c, d, e = _lstsq3(rows, ys, ctx)
        resid = max(abs(ys[i] - (c * rows[i][0] + d * rows[i][1] + e))
                    for i in range(len(ys)))
        half = len(window) // 2
        inst = mpfr(0)
        if half >= 4:
            c1 = _lstsq3(rows[:half], ys[:half], ctx)[0]
            c2 = _lstsq3(rows[half:], ys[half:], ctx)[0]
            inst = abs(c1 - c2)
        return SlopeFit(c, d, e, window, resid, inst)


@dataclass
class CapacityLimitProfile:
    indices: list
    values: list  # n * s_n^(1/n), 1-based singular-value indexing
    bracket: tuple  # (e Cp_lower^2, e Cp_upper^2)
    tolerance: float
    verdict: str

    def value_at(self, n: int):
        return self.values[self.indices.index(n)]


def capacity_limit_profile(series: SpectrumSeries,
                           ctx: PrecisionContext | None = None,
                           tolerance: float = 0.10) -> CapacityLimitProfile:
    """n s_n^(1/n) for the certified part of a nonnegative symbol's ladder,
    against the capacity bracket [e Cp_lower^2, e Cp_upper^2] of the support.

    Indexing is the eigenvalue-ordering convention s_1 >= s_2 >= ...; the
    verdict is pass when the trailing three profile values lie inside the
    bracket inflated by ``tolerance``.
    """
    ctx = ctx or PrecisionContext(bits=series.bits)
    sym = series.symbol
    plus, minus, _, _ = sym.decompose()
    if not minus.is_empty():
        raise PreconditionError("capacity-limit law applies to nonnegative symbols")
    rec = series.top
    thr = 2 * rec.tail.value
    ladder = [v for v in rec.singular_values if v > thr]
    if len(ladder) < 3:
        raise PreconditionError("fewer than 3 certified singular values")
    lo, hi = capacity(plus, ctx)
    with ctx.workprec():
        e = gmpy2.exp(mpfr(1))
        bracket = (e * lo * lo, e * hi * hi)
        idx = list(range(1, len(ladder) + 1))
        vals = [n * gmpy2.exp(gmpy2.log(ladder[n - 1]) / n) for n in idx]
        lo_tol = bracket[0] * (1 - mpfr(tolerance))
        hi_tol = bracket[1] * (1 + mpfr(tolerance))
        tail_ok = all(lo_tol <= v <= hi_tol for v in vals[-3:])
    return CapacityLimitProfile(idx, vals, bracket, tolerance,
                                "pass" if tail_ok else "fail")


@dataclass
class CountingLawProfile:
    lambdas: list
    counts: list
    values: list  # count * log|log lam| / |log lam|
    tolerance: float
    verdict: str


def counting_law_profile(series: SpectrumSeries, lam_grid,
                         ctx: PrecisionContext | None = None,
                         tolerance: float = 0.35,
                         sign: str = "abs") -> CountingLawProfile:
    """Profile of N((lam,inf)) * log|log lam| / |log lam| over the grid.

    The law's o(1) decays like repeated logarithms, so at desk scale the
    profile sits visibly above 1; the verdict records whether the trailing
    values fall within the configured band, it does not force them to.
    """
    ctx = ctx or PrecisionContext(bits=series.bits)
    with ctx.workprec():
        lams = sorted((mpfr(l) for l in lam_grid), reverse=True)
        if not lams or lams[-1] <= 0:
            raise PreconditionError("lambda grid must be positive")
        counts = [counting_function(series, l, sign) for l in lams]
        vals = []
        for l, k in zip(lams, counts):
            if k == 0:
                vals.append(mpfr(0))
                continue
            al = abs(gmpy2.log(l))
            if al <= 1:
                raise PreconditionError("grid too close to 1: |log lambda| must exceed 1")
            vals.append(k * gmpy2.log(al) / al)
        trail = vals[-3:] if len(vals) >= 3 else vals
        ok = all(1 - mpfr(tolerance) <= v <= 1 + mpfr(tolerance) for v in trail)
    return CountingLawProfile(lams, counts, vals, tolerance, "pass" if ok else "fail")


@dataclass
class InvertedCountFit:
    c: mpfr  # counting constant: counts grow like c |log lam|/log|log lam|
    d: mpfr
    offset: mpfr
    max_residual: mpfr


def inverted_count_fit(lams, counts, ctx: PrecisionContext) -> InvertedCountFit:
    """Fit |log lam| = (1/c) k log k + d k + offset over (lam, count=k) pairs:
    the desk-scale estimator of the counting constant (the direct ratio
    against |log lam|/log|log lam| converges only at triple-log speed)."""
    pairs = [(l, k) for l, k in zip(lams, counts) if k >= 2]
    if len(pairs) < 3:
        raise PreconditionError("need at least 3 grid points with count >= 2")
    with ctx.workprec():
        rows, ys = [], []
        for l, k in pairs:
            kk = mpfr(k)
            rows.append([kk * gmpy2.log(kk), kk, mpfr(1)])
            ys.append(abs(gmpy2.log(mpfr(l))))
        u, d, e = _lstsq3(rows, ys, ctx)
        if u <= 0:
            raise PreconditionError("inverted count fit produced nonpositive slope")
        resid = max(abs(ys[i] - (u * rows[i][0] + d * rows[i][1] + e))
                    for i in range(len(ys)))
        return InvertedCountFit(1 / u, d, e, resid)


@dataclass
class SandwichReport:
    fit_plus: SlopeFit
    fit_minus: SlopeFit
    fit_singular: SlopeFit
    c_plus_window: tuple
    c_minus_window: tuple
    ok: bool
    delta_relations: tuple  # residuals re-reported from the pencil side


def sandwich_check(series: SpectrumSeries, deltas: DeltaEstimates, window,
                   ctx: PrecisionContext | None = None,
                   tol: float = 0.3) -> SandwichReport:
    """Slope exponents of the +/- ladders against the pencil's counting
    windows: c must land in [1/Delta - tol, 1/delta + tol] on each side."""
    ctx = ctx or PrecisionContext(bits=series.bits)
    rec = series.top
    window = sorted(set(window))
    with ctx.workprec():
        thr = 2 * rec.tail.value
        for side in (rec.lambda_plus, rec.lambda_minus):
            if len(side) < window[-1] or side[window[-1] - 1] <= thr:
                raise PreconditionError(
                    "fit window extends past the certified part of the ladder"
                )
        fp = slope_fit(rec.lambda_plus, window, ctx)
        fm = slope_fit(rec.lambda_minus, window, ctx)
        # singular values interleave both sides; a window reaching the same
        # eigenvalue depth keeps the pair-staircase bias of the merged
        # ladder small
        swindow = range(window[0], 2 * window[-1] + 1)
        fs = slope_fit(rec.singular_values, swindow, ctx)
        t = mpfr(tol)
        wplus = (1 / deltas.Delta_plus - t, 1 / deltas.delta_plus + t)
        wminus = (1 / deltas.Delta_minus - t, 1 / deltas.delta_minus + t)
        ok = wplus[0] <= fp.c <= wplus[1] and wminus[0] <= fm.c <= wminus[1]
    return SandwichReport(
        fp, fm, fs, wplus, wminus, bool(ok),
        (deltas.residual_minus_plus, deltas.residual_plus_minus),
    )


@dataclass
class WitnessReport:
    m: int
    a: mpfr
    b: mpfr
    witness: int | None
    gamma: mpfr
    verified_up_to: int
    failures: list


def teo2_witness(a, b, m: int, ctx: PrecisionContext | None = None,
                 cap: int = 10**6) -> WitnessReport:
    """Smallest n >= 1 with (m+n-1)^-(m+n-1) a^(m+n-1) > m^-m b^m, plus a
    verification sweep over n < gamma m / log m with gamma = 0.9 log(a/b)
    (small m may produce failures there; they are reported, not raised)."""
    ctx = ctx or PrecisionContext(bits=192)
    if m < 3:
        raise PreconditionError("witness construction needs m >= 3")
    with ctx.workprec():
        av, bv = mpfr(a), mpfr(b)
        if not av > bv > 0:
            raise PreconditionError("need a > b > 0")
        la, lb = gmpy2.log(av), gmpy2.log(bv)
        rhs = m * (lb - gmpy2.log(mpfr(m)))

        def holds(n):
            q = m + n - 1
            return q * (la - gmpy2.log(mpfr(q))) > rhs

        witness = None
        for n in range(1, cap + 1):
            if holds(n):
                witness = n
                break
        gamma = mpfr("0.9") * (la - lb)
        limit = int(gamma * m / gmpy2.log(mpfr(m)))
        failures = [n for n in range(1, max(limit, 1)) if not holds(n)]
        return WitnessReport(m, av, bv, witness, gamma, max(limit - 1, 0), failures)


@dataclass
class Corollary36Report:
    c_plus: mpfr
    beta_cap: float
    certified_counts: list
    ok: bool


def corollary36_check(symbol: Symbol, series: SpectrumSeries, window,
                      ctx: PrecisionContext | None = None,
                      beta_cap: float = 5.0) -> Corollary36Report:
    """Positive-ladder lower-bound check for a symbol with a positive patch
    whose hull avoids the negative support: the fitted exponent must stay
    below beta_cap and the certified positive counts must grow."""
    ctx = ctx or PrecisionContext(bits=series.bits)
    plus, minus, _, _ = symbol.decompose()
    if plus.is_empty():
        raise PreconditionError("no positive patch: the bound does not apply")
    if not minus.is_empty():
        sep, _ = hulls_disjoint(plus, minus, ctx)
        if not sep:
            raise PreconditionError(
                "positive patch hull meets the negative support hull"
            )
    fit = slope_fit(series.top.lambda_plus, window, ctx)
    counts = [series.record(n).certified_count("+") for n in series.degrees]
    grew = any(x < y for x, y in zip(counts, counts[1:]))
    ok = bool(fit.c <= beta_cap and grew)
    return Corollary36Report(fit.c, beta_cap, counts, ok)
