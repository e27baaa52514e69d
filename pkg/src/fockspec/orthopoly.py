"""Orthonormal polynomials for the area measure of a region, and their
nth-root growth against the complement Green's function."""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpc, mpfr

from .bigarith import PrecisionContext, cholesky, solve_lower
from .errors import NotPositiveDefiniteError, PreconditionError
from .moments import gram_matrix
from .symbols import Disc, RegionSet, green_disc_complement


@dataclass
class OrthoBasis:
    """Coefficient triangle: row k holds the monomial coefficients of P_k,
    normalized in L2 of the region with a positive real leading coefficient."""

    region: RegionSet
    degree: int
    rows: list
    ctx: PrecisionContext

    def coefficient(self, k: int, j: int):
        if j > k:
            return mpc(0)
        return self.rows[k][j]

    def evaluate(self, k: int, z):
        """P_k(z) by Horner at working precision."""
        with self.ctx.workprec():
            zz = mpc(z)
            acc = mpc(self.rows[k][k])
            for j in range(k - 1, -1, -1):
                acc = acc * zz + self.rows[k][j]
            return acc

    def orthonormality_residual(self, gram=None) -> mpfr:
        """Frobenius norm of C^T G conj(C) - I."""
        ctx = self.ctx
        if gram is None:
            gram = gram_matrix(self.region, self.degree, ctx).matrix
        n = self.degree + 1
        with ctx.workprec():
            G = gram.full()
            acc = mpfr(0)
            for a in range(n):
                ra = self.rows[a]
                for b in range(n):
                    rb = self.rows[b]
                    s = mpc(0)
                    for j in range(a + 1):
                        Gj = G[j]
                        for k in range(b + 1):
                            s += ra[j] * Gj[k] * mpc(rb[k]).conjugate()
                    if a == b:
                        s -= 1
                    acc += gmpy2.norm(s)
            return gmpy2.sqrt(acc)


def orthonormal_basis(region, n: int, ctx: PrecisionContext | None = None) -> OrthoBasis:
    """Inverse-adjoint of the Cholesky factor of the region Gram: row k of
    L^-1 is the coefficient vector of P_k."""
    if isinstance(region, Disc):
        region = RegionSet.from_disc(region)
    if region.is_empty():
        raise PreconditionError("cannot orthonormalize over an empty region")
    ctx = ctx or PrecisionContext.for_dimension(n + 1)
    G = gram_matrix(region, n, ctx.scaled(2.0)).matrix
    L = None
    for factor in (2.0, 4.0):
        try:
            L = cholesky(G, ctx.scaled(factor))
            break
        except NotPositiveDefiniteError:
            continue
    if L is None:
        raise PreconditionError(
            "Gram matrix numerically indefinite at 4x precision; "
            "raise precision or lower the degree"
        )
    size = n + 1
    with ctx.scaled(2.0).workprec():
        eye = [[mpfr(1) if i == j else mpfr(0) for j in range(size)] for i in range(size)]
        inv = solve_lower(L, eye, ctx.scaled(2.0))
    with ctx.workprec():
        rows = [[mpc(inv[k][j]) for j in range(k + 1)] for k in range(size)]
    return OrthoBasis(region, n, rows, ctx)


@dataclass
class NthRootProfile:
    point: complex
    ks: list
    values: list
    target: mpfr | None
    approximate_target: bool


def nth_root_profile(basis: OrthoBasis, z, k_range) -> NthRootProfile:
    """|P_k(z)|^(1/k) over k_range, with the Green's-function target e^g(z)
    (exact for a single-disc region, enclosing-disc bound otherwise)."""
    ks = sorted(set(k_range))
    if not ks or ks[0] < 1 or ks[-1] > basis.degree:
        raise PreconditionError("k_range must lie within 1..degree")
    ctx = basis.ctx
    with ctx.workprec():
        vals = []
        for k in ks:
            mag = gmpy2.sqrt(gmpy2.norm(basis.evaluate(k, z)))
            vals.append(gmpy2.exp(gmpy2.log(mag) / k))
        outs = basis.region.outer_discs()
        approx = len(outs) > 1
        if approx:
            cx = sum(mpfr(d.center_re) for d in outs) / len(outs)
            cy = sum(mpfr(d.center_im) for d in outs) / len(outs)
            rad = max(
                gmpy2.sqrt((mpfr(d.center_re) - cx) ** 2 + (mpfr(d.center_im) - cy) ** 2)
                + mpfr(d.radius)
                for d in outs
            )
            target = None
            zz = mpc(z)
            dist = gmpy2.sqrt(gmpy2.norm(zz - mpc(cx, cy)))
            if dist >= rad:
                target = dist / rad
        else:
            d = outs[0]
            zz = mpc(z)
            dc = gmpy2.sqrt(gmpy2.norm(zz - d.center(ctx)))
            target = None
            if dc >= mpfr(d.radius):
                target = gmpy2.exp(green_disc_complement(d, zz, ctx))
    return NthRootProfile(z, ks, vals, target, approx)
