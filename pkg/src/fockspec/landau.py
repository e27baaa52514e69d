"""Cluster-count bounds for the lowest level of the perturbed Landau
Hamiltonian, through the tilt V +/- eps|V| and the unitary identification of
the level-zero compression with the Gaussian Toeplitz operator.

The magnetic field is normalized to B = 2 throughout (any other field
rescales onto this one).  Every bound carrying the theorem's unspecified
additive constant is flagged, never subtracted.
"""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpfr

from .bigarith import PrecisionContext
from .errors import PreconditionError
from .asymptotics import InvertedCountFit, inverted_count_fit
from .symbols import Symbol, hulls_disjoint
from .toeplitz import counting_function, spectrum_series, tail_bound

MAGNETIC_FIELD = 2


@dataclass
class BoundColumn:
    counts: list
    modulo_constant: bool  # True when the column is only known up to +m


@dataclass
class ClusterReport:
    epsilon: str
    a: str
    lambdas: list
    negative_lower: BoundColumn  # N((-inf,-lam); H) >= these
    negative_upper: BoundColumn  # N((-inf,-lam); H) <= these + m
    positive_lower: BoundColumn  # N((lam,a); H) >= these - m
    positive_upper: BoundColumn  # N((lam,a); H) <= these + m
    sources: dict
    magnetic_field: int = MAGNETIC_FIELD


def required_degree(symbol: Symbol, lam_min, ctx: PrecisionContext,
                    start: int = 10, cap: int = 400) -> int:
    """Smallest truncation degree whose tail certifies counts at lam_min."""
    with ctx.workprec():
        target = mpfr(lam_min) / 2
        n = start
        while n <= cap:
            if tail_bound(symbol, n, ctx).value < target:
                return n
            n += 1
    raise PreconditionError(f"no degree below {cap} certifies lambda = {lam_min}")


def _three_series(symbol: Symbol, eps, lam_min,
                  ctx: PrecisionContext | None,
                  N_max: int | None) -> tuple:
    up, down = symbol.epsilon_tilt(eps)
    probe = ctx or PrecisionContext(bits=192)
    if N_max is None:
        N_max = max(required_degree(s, lam_min, probe) for s in (symbol, up, down))
    ctx = ctx or PrecisionContext.for_dimension(N_max + 1)
    ladder = [N_max]
    return (
        spectrum_series(symbol, N_max, ctx, ladder=ladder),
        spectrum_series(up, N_max, ctx, ladder=ladder),
        spectrum_series(down, N_max, ctx, ladder=ladder),
    )


def cluster_bounds(symbol: Symbol, eps, a, lam_grid,
                   ctx: PrecisionContext | None = None,
                   N_max: int | None = None,
                   series_triple=None) -> ClusterReport:
    """Two-sided certified count bounds for the cluster at the lowest Landau
    level, per grid point, each side bracketed by the tilted compressions."""
    epsq = str(eps)
    af = float(a)
    if not 0 < float(epsq) < 1:
        raise PreconditionError("tilt epsilon must lie in (0,1)")
    if not 0 < af < MAGNETIC_FIELD:
        raise PreconditionError("spectral window edge a must lie in (0, 2)")
    lams = sorted((str(l) for l in lam_grid), key=float, reverse=True)
    if not lams or float(lams[-1]) <= 0:
        raise PreconditionError("lambda grid must be positive")
    if series_triple is None:
        series_triple = _three_series(symbol, epsq, lams[-1], ctx, N_max)
    base, up, down = series_triple
    neg_lo = [counting_function(base, l, "-") for l in lams]
    neg_hi = [counting_function(down, l, "-") for l in lams]
    pos_lo = [counting_function(down, l, "+") for l in lams]
    pos_hi = [counting_function(up, l, "+") for l in lams]
    return ClusterReport(
        epsilon=epsq,
        a=str(a),
        lambdas=lams,
        negative_lower=BoundColumn(neg_lo, False),
        negative_upper=BoundColumn(neg_hi, True),
        positive_lower=BoundColumn(pos_lo, True),
        positive_upper=BoundColumn(pos_hi, True),
        sources={
            "base_bits": base.bits,
            "degree": base.top.degree,
            "tilt_up_terms": str(up.symbol),
            "tilt_down_terms": str(down.symbol),
        },
    )


@dataclass
class ClusterGrowth:
    report: ClusterReport
    negative_fit: InvertedCountFit
    positive_fit: InvertedCountFit
    grows: bool

    @property
    def c_negative(self):
        return self.negative_fit.c

    @property
    def c_positive(self):
        return self.positive_fit.c


def cluster_growth_check(symbol: Symbol, eps, a, lam_grid,
                         ctx: PrecisionContext | None = None,
                         N_max: int | None = None,
                         series_triple=None) -> ClusterGrowth:
    """Verifies both cluster sides produce growing lower-bound counts along
    the grid and fits the counting constant of each side (inverted-model
    fit; the symmetric-pair value is 1/2)."""
    plus, minus, _, _ = symbol.decompose()
    if minus.is_empty():
        raise PreconditionError(
            "growth check needs a genuinely sign-changing symbol "
            "(for V >= 0 the negative side is empty)"
        )
    sep, _gap = hulls_disjoint(plus, minus)
    if not sep:
        raise PreconditionError("support hulls must be certified disjoint")
    rep = cluster_bounds(symbol, eps, a, lam_grid, ctx, N_max, series_triple)
    fit_ctx = PrecisionContext(bits=192)
    lams = rep.lambdas
    neg = rep.negative_lower.counts
    pos = rep.positive_lower.counts
    grows = all(x <= y for x, y in zip(neg, neg[1:])) and any(
        x < y for x, y in zip(neg, neg[1:])
    ) and all(x <= y for x, y in zip(pos, pos[1:])) and any(
        x < y for x, y in zip(pos, pos[1:])
    )
    return ClusterGrowth(
        rep,
        negative_fit=inverted_count_fit(lams, neg, fit_ctx),
        positive_fit=inverted_count_fit(lams, pos, fit_ctx),
        grows=grows,
    )
