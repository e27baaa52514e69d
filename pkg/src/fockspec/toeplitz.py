"""Finite sections of the Gaussian-multiplication (Toeplitz) form and the
spectral bookkeeping built on them.

Certification rests on the tail bound: on the subspace spanned by z^m,
m > N, the absolute form is at most tau(N) = sup|V| R^(2N+2)/(N+1)!, so a
truncation eigenvalue is trusted only above 2 tau(N).  The per-degree
ladder slices one top-degree assembly (entries do not depend on the
truncation degree, so slicing is bit-identical to reassembly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpfr, mpq

from .bigarith import (
    HermitianMatrix,
    InertiaTriple,
    PrecisionContext,
    hermitian_eigen,
    ldlt_inertia,
)
from .errors import (
    CertificationError,
    ConvergenceError,
    InternalConsistencyError,
    PreconditionError,
)
from .moments import disc_quadrature, toeplitz_truncation, weighted_moment_matrix
from .symbols import Disc, Symbol, _q

DEFAULT_LADDER = (10, 15, 20, 25, 30, 35, 40)


@dataclass(frozen=True)
class TailBound:
    """Rigorous bound on the form over the degree->N tail subspace."""

    degree: int
    radius: mpfr
    sup_abs: mpfr
    value: mpfr


def tail_bound(symbol: Symbol, N: int, ctx: PrecisionContext) -> TailBound:
    if N < 0:
        raise PreconditionError("tail bound degree must be nonnegative")
    with ctx.workprec():
        R = symbol.support_radius(ctx)
        sup = mpfr(symbol.sup_abs())
        tau = sup * R ** (2 * N + 2) / mpfr(math.factorial(N + 1))
        return TailBound(N, R, sup, tau)


@dataclass
class SpectrumRecord:
    degree: int
    lambda_plus: list  # positive eigenvalues, descending
    lambda_minus: list  # magnitudes of negative eigenvalues, descending
    tail: TailBound

    @property
    def singular_values(self):
        """Descending merge of both sign ladders (exact multiset union)."""
        return sorted(self.lambda_plus + self.lambda_minus, reverse=True)

    def certified_count(self, sign: str) -> int:
        thr = 2 * self.tail.value
        if sign == "+":
            return sum(1 for v in self.lambda_plus if v > thr)
        if sign == "-":
            return sum(1 for v in self.lambda_minus if v > thr)
        if sign == "abs":
            return self.certified_count("+") + self.certified_count("-")
        raise PreconditionError(f"sign must be +, - or abs, got {sign!r}")


@dataclass
class SpectrumSeries:
    symbol: Symbol
    bits: int
    records: dict = field(default_factory=dict)

    @property
    def degrees(self):
        return sorted(self.records)

    @property
    def top(self) -> SpectrumRecord:
        return self.records[self.degrees[-1]]

    def record(self, N: int) -> SpectrumRecord:
        return self.records[N]


def _ladder(N_max: int, ladder=None):
    if ladder is not None:
        L = sorted(set(int(n) for n in ladder))
        if not L or L[0] < 0:
            raise PreconditionError("ladder must be nonempty nonnegative degrees")
        return L
    L = [n for n in DEFAULT_LADDER if n <= N_max]
    if not L or L[-1] != N_max:
        L.append(N_max)
    return sorted(set(L))


def spectrum_series(symbol: Symbol, N_max: int,
                    ctx: PrecisionContext | None = None,
                    ladder=None, gate: bool = True) -> SpectrumSeries:
    """Eigenvalue ladders of the truncations for each rung of the ladder.

    Eigenvalues with magnitude below 2 tau(N) stay in the record but are
    excluded from every certified count.  The assembled operator norm is
    checked against sup|V| after each solve.
    """
    if N_max < 5:
        raise PreconditionError("need N_max >= 5")
    rungs = _ladder(N_max, ladder)
    top = rungs[-1]
    ctx = ctx or PrecisionContext.for_dimension(top + 1)
    mm = toeplitz_truncation(symbol, top, ctx, gate=gate)
    series = SpectrumSeries(symbol, ctx.bits)
    with ctx.workprec():
        sup = mpfr(symbol.sup_abs())
        slack = 1 + mpfr(2) ** (-(ctx.bits // 2))
        for N in rungs:
            sub = mm.matrix.principal_submatrix(N + 1)
            ev = hermitian_eigen(sub, ctx).eigenvalues
            if max(abs(ev[0]), abs(ev[-1])) > sup * slack:
                raise InternalConsistencyError(
                    f"truncation norm exceeds sup|V| at degree {N}"
                )
            plus = sorted((v for v in ev if v > 0), reverse=True)
            minus = sorted((-v for v in ev if v < 0), reverse=True)
            series.records[N] = SpectrumRecord(N, plus, minus, tail_bound(symbol, N, ctx))
    return series


def counting_function(series: SpectrumSeries, lam, sign: str = "abs",
                      N: int | None = None) -> int:
    """N((lam, inf)) against the chosen sign ladder at the rung N (top rung
    by default); refuses below the certification radius."""
    rec = series.record(N) if N is not None else series.top
    ctx = PrecisionContext(bits=series.bits)
    with ctx.workprec():
        lam = mpfr(lam)
        if lam <= 0:
            raise PreconditionError("counting threshold must be positive")
        if lam <= 2 * rec.tail.value:
            raise CertificationError(
                f"lambda = {lam} is below the certification radius "
                f"2*tau({rec.degree}) = {2 * rec.tail.value}",
                tail_bound=rec.tail.value,
            )
        if sign == "+":
            return sum(1 for v in rec.lambda_plus if v > lam)
        if sign == "-":
            return sum(1 for v in rec.lambda_minus if v > lam)
        if sign == "abs":
            return sum(1 for v in rec.singular_values if v > lam)
        raise PreconditionError(f"sign must be +, - or abs, got {sign!r}")


@dataclass
class CountLadder:
    degrees: list
    counts: list
    taus: list
    verdict: str


def negative_count_profile(series_or_symbol, ladder=None,
                           ctx: PrecisionContext | None = None,
                           plateau_tau_drop: float = 1e6) -> CountLadder:
    """Certified negative counts per rung with a plateau/growing verdict.

    plateau: the count is constant over the last three rungs and tau has
    dropped by the configured factor since the count last changed (measured
    from the first rung if it never changed).  growing: strictly increasing
    across the last three rungs.
    """
    series = _as_series(series_or_symbol, ladder, ctx)
    degrees = series.degrees
    counts = [series.record(n).certified_count("-") for n in degrees]
    taus = [series.record(n).tail.value for n in degrees]
    verdict = "undetermined"
    if len(degrees) >= 3:
        last3 = counts[-3:]
        if last3[0] == last3[1] == last3[2]:
            ref = 0
            for i in range(1, len(counts)):
                if counts[i] != counts[i - 1]:
                    ref = i
            if float(taus[ref] / taus[-1]) >= plateau_tau_drop:
                verdict = "plateau"
        elif last3[0] < last3[1] < last3[2]:
            verdict = "growing"
    return CountLadder(degrees, counts, taus, verdict)


def rank_growth_check(series_or_symbol, ladder=None,
                      ctx: PrecisionContext | None = None) -> CountLadder:
    """Certified nonzero-eigenvalue counts per rung; the verdict is
    consistent-with-infinite-rank when they never decrease and grow at
    least once (a single rung is undetermined by construction)."""
    series = _as_series(series_or_symbol, ladder, ctx)
    degrees = series.degrees
    counts = [series.record(n).certified_count("abs") for n in degrees]
    taus = [series.record(n).tail.value for n in degrees]
    if len(counts) < 2:
        verdict = "undetermined"
    else:
        nondecreasing = all(a <= b for a, b in zip(counts, counts[1:]))
        grew = any(a < b for a, b in zip(counts, counts[1:]))
        verdict = "consistent-with-infinite-rank" if (nondecreasing and grew) else "undetermined"
    return CountLadder(degrees, counts, taus, verdict)


def _as_series(series_or_symbol, ladder, ctx) -> SpectrumSeries:
    if isinstance(series_or_symbol, SpectrumSeries):
        return series_or_symbol
    if isinstance(series_or_symbol, Symbol):
        rungs = list(ladder) if ladder is not None else list(DEFAULT_LADDER)
        return spectrum_series(series_or_symbol, max(rungs), ctx, ladder=rungs)
    raise PreconditionError("expected a Symbol or SpectrumSeries")


def stability_report(series: SpectrumSeries):
    """Max movement of certified eigenvalues between consecutive rungs,
    paired by descending index within each sign; movements are measured
    against the earlier rung's tail bound."""
    ctx = PrecisionContext(bits=series.bits)
    degrees = series.degrees
    out = []
    with ctx.workprec():
        for a, b in zip(degrees, degrees[1:]):
            ra, rb = series.record(a), series.record(b)
            thr = 2 * ra.tail.value
            worst = mpfr(0)
            for side in ("lambda_plus", "lambda_minus"):
                va = getattr(ra, side)
                vb = getattr(rb, side)
                for i, v in enumerate(va):
                    if v <= thr:
                        break
                    if i < len(vb):
                        worst = max(worst, abs(v - vb[i]))
            out.append((a, b, worst, worst <= ra.tail.value))
    return out


def inertia_criterion(symbol: Symbol, n: int,
                      ctx: PrecisionContext | None = None) -> InertiaTriple:
    """Inertia of the Gaussian-weighted form on degree-<=n polynomials; its
    negative count lower-bounds the negative spectrum of the full operator
    (min-max), and is basis-independent by Sylvester's law."""
    ctx = ctx or PrecisionContext.for_dimension(n + 1)
    q = weighted_moment_matrix(symbol, n, ctx, gaussian=True)
    return ldlt_inertia(q.matrix, ctx=ctx)


def _mobius_image_disc(d: Disc, pole_re: mpq, pole_im: mpq) -> Disc:
    """Image of a disc (not containing the pole) under w = 1/(z - pole):
    again a disc, with exact rational center and radius."""
    dre = d.center_re - pole_re
    dim = d.center_im - pole_im
    den = dre * dre + dim * dim - d.radius * d.radius
    if den <= 0:
        raise PreconditionError(f"pole lies in or on {d}")
    return Disc(dre / den, -dim / den, d.radius / den)


@dataclass
class MobiusReport:
    direct: InertiaTriple
    transported: InertiaTriple
    certified: bool
    transported_matrix: HermitianMatrix | None = None

    @property
    def match(self) -> bool:
        return self.certified and self.direct.as_tuple() == self.transported.as_tuple()


def mobius_inertia_crosscheck(symbol: Symbol, pole, n: int,
                              ctx: PrecisionContext | None = None) -> MobiusReport:
    """Recomputes the weighted-form matrix in the coordinates w = 1/(z-pole)
    (pushforward measure, Jacobian |dz/dw|^2 = 1/|w|^4) by quadrature over
    the exact Moebius-image discs, and compares inertias: the same quadratic
    form in a transported description must have identical integer inertia.
    """
    ctx = ctx or PrecisionContext(bits=256)
    if isinstance(pole, (tuple, list)):
        pre, pim = _q(pole[0]), _q(pole[1])
    else:
        pre, pim = _q(pole), mpq(0)
    # certified pole separation from the support
    cells = [c for c in symbol.cells() if c.value != 0]
    for c in cells:
        d = c.outer
        if (pre - d.center_re) ** 2 + (pim - d.center_im) ** 2 <= d.radius * d.radius:
            raise PreconditionError("pole must lie strictly outside the symbol support")
    direct = inertia_criterion(symbol, n, ctx)
    size = n + 1
    with ctx.workprec():
        zpole = ctx.complex(mpfr(pre), mpfr(pim))
        acc = [[gmpy2.mpc(0)] * size for _ in range(size)]
        certified = True
        try:
            for d, w in symbol.terms:
                img = _mobius_image_disc(d, pre, pim)
                ww = mpfr(w)
                for j in range(size):
                    for k in range(j, size):
                        def f(wv, _j=j, _k=k):
                            z = zpole + 1 / wv
                            jac = 1 / (gmpy2.norm(wv) ** 2)
                            return (z**_j * z.conjugate() ** _k
                                    * gmpy2.exp(-gmpy2.norm(z)) * jac)
                        # sign classification needs far less than full
                        # working precision from the quadrature route
                        acc[j][k] += ww * disc_quadrature(
                            img, f, ctx, rel_tol_exp=-(ctx.bits // 4)
                        )
        except ConvergenceError:
            certified = False
        upper = [[acc[j][k] for k in range(j, size)] for j in range(size)]
        tmat = HermitianMatrix(upper, ctx)
        transported = ldlt_inertia(tmat, ctx=ctx)
    return MobiusReport(direct, transported, certified, tmat)
