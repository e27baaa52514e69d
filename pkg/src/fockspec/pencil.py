"""Spectra of the outbedding operators A_n = (S_n)* S_n for a domain pair.

A_n^+ acts on degree-<=n polynomials carrying the L2(Omega_+) inner product
and its quadratic form is the L2(Omega_-) norm, so its matrix in a
+-orthonormal basis is the Cholesky-whitened pencil of the two monomial
Gram matrices.  The minus operator has exactly the reciprocal spectrum;
both sides are computed independently and verified against each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpfr

from .bigarith import (
    HermitianMatrix,
    PrecisionContext,
    hermitian_eigen,
    whiten,
)
from .errors import (
    InternalConsistencyError,
    NotPositiveDefiniteError,
    PreconditionError,
)
from .moments import gram_matrix
from .symbols import Disc, RegionSet, PotentialData

INF = mpfr("inf")


@dataclass
class CountResult:
    count: int
    boundary_warning: bool = False

    def __int__(self):
        return self.count

    def __eq__(self, other):
        if isinstance(other, CountResult):
            return self.count == other.count
        return self.count == other


@dataclass
class PencilSpectrum:
    """Eigenvalues of A_n^+ (ascending, all positive); the minus spectrum is
    the reciprocal list, stored as independently computed values when the
    reciprocity verification ran."""

    degree: int
    eigenvalues: list
    bits: int
    residual: mpfr
    minus_eigenvalues: list | None = None
    reciprocity_defect: mpfr | None = None

    @property
    def dim(self) -> int:
        return self.degree + 1

    def reciprocals(self):
        return sorted(1 / v for v in self.eigenvalues)

    def unit_band(self) -> mpfr:
        return mpfr(2) ** (-(self.bits // 3))

    def split_counts(self):
        """(N((0,1)), near-unit tally, N((1,inf))) with the near-unit band
        kept out of both open counts."""
        band = self.unit_band()
        lo = sum(1 for v in self.eigenvalues if v < 1 - band)
        hi = sum(1 for v in self.eigenvalues if v > 1 + band)
        return lo, self.dim - lo - hi, hi


def _region(obj):
    if isinstance(obj, Disc):
        return RegionSet.from_disc(obj)
    if isinstance(obj, RegionSet):
        return obj
    raise PreconditionError(f"expected a disc or region, got {obj!r}")


def _whitened(B, G, ctx):
    """whiten with monomial-Gram conditioning care: Cholesky at 2x precision,
    escalating to 4x before giving up."""
    for factor in (2.0, 4.0):
        try:
            return whiten(B, G, ctx.scaled(factor))
        except NotPositiveDefiniteError:
            continue
    raise PreconditionError(
        "Gram pencil is numerically indefinite even at 4x precision; "
        "raise --precision-bits or lower the degree"
    )


def outbedding_spectrum(omega_plus, omega_minus, n: int,
                        ctx: PrecisionContext | None = None,
                        verify: bool = True) -> PencilSpectrum:
    """Spectrum of A_n^+ for the pair, re-verified against the independently
    whitened reciprocal operator when ``verify`` is set."""
    rp, rm = _region(omega_plus), _region(omega_minus)
    if rp.is_empty() or rm.is_empty():
        raise PreconditionError("outbedding needs nonempty regions")
    ctx = ctx or PrecisionContext.for_dimension(n + 1)
    gp = gram_matrix(rp, n, ctx.scaled(2.0))
    gm = gram_matrix(rm, n, ctx.scaled(2.0))
    return _spectrum_from_grams(gp.matrix, gm.matrix, n, ctx, verify)


def _spectrum_from_grams(gp: HermitianMatrix, gm: HermitianMatrix, n: int,
                         ctx: PrecisionContext, verify: bool) -> PencilSpectrum:
    # only the factorization runs elevated; the eigensolve is at working bits
    plus = hermitian_eigen(_whitened(gm, gp, ctx).with_context(ctx), ctx)
    with ctx.workprec():
        if plus.eigenvalues[0] <= 0:
            raise InternalConsistencyError(
                f"outbedding spectrum must be positive, found {plus.eigenvalues[0]}"
            )
        minus_vals = None
        defect = None
        if verify:
            minus = hermitian_eigen(_whitened(gp, gm, ctx).with_context(ctx), ctx)
            minus_vals = minus.eigenvalues
            defect = mpfr(0)
            for a, b in zip(plus.eigenvalues, reversed(minus_vals)):
                defect = max(defect, abs(a * b - 1))
            if defect > mpfr(2) ** (-(ctx.bits // 4)):
                raise InternalConsistencyError(
                    f"reciprocal-duality defect {defect} exceeds tolerance at degree {n}"
                )
    return PencilSpectrum(
        degree=n,
        eigenvalues=plus.eigenvalues,
        bits=ctx.bits,
        residual=plus.offdiag_residual,
        minus_eigenvalues=minus_vals,
        reciprocity_defect=defect,
    )


def pencil_series(omega_plus, omega_minus, degrees,
                  ctx: PrecisionContext | None = None,
                  verify: bool = False) -> dict:
    """PencilSpectrum per degree; the top-degree Grams are assembled once and
    sliced (monomial Gram entries do not depend on the truncation degree)."""
    degrees = sorted(set(degrees))
    if not degrees:
        raise PreconditionError("empty degree list")
    top = degrees[-1]
    ctx = ctx or PrecisionContext.for_dimension(top + 1)
    rp, rm = _region(omega_plus), _region(omega_minus)
    gp = gram_matrix(rp, top, ctx.scaled(2.0)).matrix
    gm = gram_matrix(rm, top, ctx.scaled(2.0)).matrix
    out = {}
    for n in degrees:
        out[n] = _spectrum_from_grams(
            gp.principal_submatrix(n + 1), gm.principal_submatrix(n + 1), n, ctx, verify
        )
    return out


def counting(spectrum: PencilSpectrum, a, b, use_minus: bool = False) -> CountResult:
    """Strict count of eigenvalues in (a, b); warns when an eigenvalue sits
    within 2^(-bits/3) of an endpoint."""
    with PrecisionContext(bits=spectrum.bits).workprec():
        a = mpfr(a)
        b = INF if b is None else mpfr(b)
        if not 0 <= a < b:
            raise PreconditionError(f"need 0 <= a < b, got ({a}, {b})")
        values = spectrum.minus_eigenvalues if use_minus else spectrum.eigenvalues
        if use_minus and values is None:
            values = spectrum.reciprocals()
        band = spectrum.unit_band()
        count = 0
        warn = False
        for v in values:
            if a < v < b:
                count += 1
            if abs(v - a) <= band or (b != INF and abs(v - b) <= band):
                warn = True
        return CountResult(count, warn)


@dataclass
class CountingProfile:
    interval: tuple
    degrees: list
    counts: list
    verdict: str
    slack: int = 2


def midrange_profile(omega_plus, omega_minus, a1, a2, n_max: int,
                     ctx: PrecisionContext | None = None,
                     slack: int = 2) -> CountingProfile:
    """Counts N((a1,a2); A_n^+) for n = 0..n_max with a bounded/growing
    verdict: bounded when the upper half of the range never beats the lower
    half by more than ``slack``."""
    with (ctx or PrecisionContext.for_dimension(n_max + 1)).workprec():
        a1v = mpfr(a1)
        a2v = INF if a2 is None else mpfr(a2)
        if not (0 <= a1v < a2v):
            raise PreconditionError(f"need 0 <= a1 < a2, got ({a1}, {a2})")
    series = pencil_series(omega_plus, omega_minus, range(n_max + 1), ctx)
    degrees = sorted(series)
    counts = [counting(series[n], a1v, a2v).count for n in degrees]
    half = len(degrees) // 2
    lo_max = max(counts[:half]) if counts[:half] else 0
    hi_max = max(counts[half:])
    verdict = "bounded" if hi_max <= lo_max + slack else "growing"
    return CountingProfile((a1v, a2v), degrees, counts, verdict, slack)


@dataclass
class DeltaEstimates:
    delta_plus: mpfr
    Delta_plus: mpfr
    delta_minus: mpfr
    Delta_minus: mpfr
    window: list
    residual_minus_plus: mpfr = field(default=None)  # |delta_- + Delta_+ - 1|
    residual_plus_minus: mpfr = field(default=None)  # |delta_+ + Delta_- - 1|

    def all_in_unit_interval(self) -> bool:
        vals = (self.delta_plus, self.Delta_plus, self.delta_minus, self.Delta_minus)
        return all(0 < v < 1 for v in vals) and self.delta_plus <= self.Delta_plus \
            and self.delta_minus <= self.Delta_minus


def delta_estimates(omega_plus, omega_minus, n_range,
                    ctx: PrecisionContext | None = None) -> DeltaEstimates:
    """Trailing-window min/max of N((0,1); A_n^{+-})/n: the desk-scale stand-in
    for liminf/limsup in the counting-constant bookkeeping.  Near-unit
    eigenvalues are tallied separately and excluded from both open counts."""
    n_range = sorted(set(n_range))
    if len(n_range) < 10:
        raise PreconditionError("delta estimates need at least 10 degrees")
    series = pencil_series(omega_plus, omega_minus, n_range, ctx)
    window = [n for n in n_range if n >= n_range[len(n_range) // 2] and n > 0]
    ratios_plus = []
    ratios_minus = []
    top_bits = series[n_range[-1]].bits
    with PrecisionContext(bits=top_bits).workprec():
        for n in window:
            lo, _nu, hi = series[n].split_counts()
            ratios_plus.append(mpfr(lo) / n)
            # N((0,1); A_n^-) = N((1,inf); A_n^+) by reciprocal duality
            ratios_minus.append(mpfr(hi) / n)
        est = DeltaEstimates(
            delta_plus=min(ratios_plus),
            Delta_plus=max(ratios_plus),
            delta_minus=min(ratios_minus),
            Delta_minus=max(ratios_minus),
            window=window,
        )
        est.residual_minus_plus = abs(est.delta_minus + est.Delta_plus - 1)
        est.residual_plus_minus = abs(est.delta_plus + est.Delta_minus - 1)
    return est


@dataclass
class NormBoundReport:
    degrees: list
    log_max_eigs: list
    bound_ok: bool
    b_plus: mpfr
    lower_c_fit: mpfr
    b_minus: mpfr


def norm_bound_check(omega_plus, omega_minus, potential: PotentialData, n_range,
                     ctx: PrecisionContext | None = None,
                     n_start: int = 5) -> NormBoundReport:
    """Checks ||A_n^+|| <= e^(2 b+ n) over the window (a theorem for large n,
    so the window starts at n_start) and reports the fitted constant c with
    ||A_n^+|| >= e^(2 b- n - c) on the same window."""
    n_range = [n for n in sorted(set(n_range)) if n >= n_start]
    if not n_range:
        raise PreconditionError(f"empty check window after dropping n < {n_start}")
    series = pencil_series(omega_plus, omega_minus, n_range, ctx)
    bits = series[n_range[-1]].bits
    with PrecisionContext(bits=bits).workprec():
        b_plus = mpfr(potential.b_plus)
        b_minus = mpfr(potential.b_minus)
        logs = []
        ok = True
        c_fit = mpfr("-inf")
        for n in n_range:
            lmax = gmpy2.log(series[n].eigenvalues[-1])
            logs.append(lmax)
            if lmax > 2 * b_plus * n:
                ok = False
            c_fit = max(c_fit, 2 * b_minus * n - lmax)
    return NormBoundReport(n_range, logs, ok, b_plus, c_fit, b_minus)
