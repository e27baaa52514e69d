"""Monomial moment matrices over discs: Lebesgue (closed form) and Gaussian.

Gaussian (Fock) moments over an off-center disc have no closed form.  They
are computed by expanding the shifted Gaussian into the displaced-basis
coefficient table c[m][j] (the double series integrated term by term into
lower incomplete gamma factors), so a whole truncation assembles in
O(M N^2) big-float operations; every entry is independently checkable
against a polar tensor Gauss-Legendre quadrature and assemblies gate a
sample of entries through that check by default.

Entry convention: matrix (j, k) holds the z-power j, zbar-power k moment,
so Hermitian symmetry reads M[j][k] = conj(M[k][j]) and orthonormal
coefficient triangles satisfy C^T G conj(C) = I.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpc, mpfr

from .bigarith import (
    DEFAULT_CONTEXT,
    HermitianMatrix,
    PrecisionContext,
    incomplete_gamma_ladder,
)
from .errors import ConvergenceError, InternalConsistencyError, PreconditionError
from .symbols import Disc, RegionSet, Symbol

KINDS = ("lebesgue-gram", "weighted-lebesgue", "weighted-fock", "fock-toeplitz")


@dataclass
class MomentMatrix:
    degree: int
    kind: str
    matrix: HermitianMatrix

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionError(f"unknown moment-matrix kind {self.kind}")

    @property
    def dim(self) -> int:
        return self.matrix.dim

    def entry(self, j, k):
        return self.matrix.entry(j, k)


_factorial_cache: dict[int, int] = {}


def _fact(n: int) -> int:
    v = _factorial_cache.get(n)
    if v is None:
        v = math.factorial(n)
        _factorial_cache[n] = v
    return v


def fock_norm_sq(j: int, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """||z^j||^2 in the Gaussian-weighted plane: pi * j!."""
    if j < 0:
        raise PreconditionError("index must be nonnegative")
    with ctx.workprec():
        return gmpy2.const_pi() * mpfr(_fact(j))


def lebesgue_moment(disc: Disc, j: int, k: int, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """Closed form for the plain-area moment of z^j zbar^k over the disc."""
    if j < 0 or k < 0:
        raise PreconditionError("indices must be nonnegative")
    with ctx.workprec():
        pi = gmpy2.const_pi()
        r = mpfr(disc.radius)
        a = mpc(mpfr(disc.center_re), mpfr(disc.center_im))
        real_center = disc.center_im == 0
        if real_center:
            a = a.real
        acc = mpc(0) if not real_center else mpfr(0)
        ac = a if real_center else a.conjugate()
        for p in range(min(j, k) + 1):
            term = (
                mpfr(math.comb(j, p) * math.comb(k, p))
                * a ** (j - p)
                * ac ** (k - p)
                * pi
                * r ** (2 * p + 2)
                / (p + 1)
            )
            acc += term
        return mpc(acc)


def gram_matrix(region, n: int, ctx: PrecisionContext = DEFAULT_CONTEXT) -> MomentMatrix:
    """Lebesgue Gram of monomials 0..n over a region (signed-disc sum)."""
    if isinstance(region, Disc):
        region = RegionSet.from_disc(region)
    if region.is_empty():
        raise PreconditionError("gram matrix over an empty region")
    signed = region.signed_discs()
    with ctx.workprec():
        upper = []
        for j in range(n + 1):
            row = []
            for k in range(j, n + 1):
                acc = mpc(0)
                for d, sgn in signed:
                    acc += sgn * lebesgue_moment(d, j, k, ctx)
                row.append(acc)
            upper.append(row)
    return MomentMatrix(n, "lebesgue-gram", HermitianMatrix(upper, ctx))


# --- Gaussian moments via displaced-basis tables -----------------------------

_table_cache: dict = {}


def _table_key(disc: Disc, bits: int):
    return (disc.center_re, disc.center_im, disc.radius, bits)


def _required_m(radius: float, bits: int, nmin: int) -> int:
    """Smallest M with sum_{m>M} gamma(m+1,r^2)/m! below 2^-(bits+24)."""
    target = -(bits + 24) * math.log(2)
    M = max(nmin, int(2 * radius * radius) + 4)
    while True:
        lb = (2 * M + 4) * math.log(max(radius, 1e-300)) - math.lgamma(M + 3) + math.log(2)
        if lb < target:
            return M
        M += 1


def _disc_table(disc: Disc, N: int, ctx: PrecisionContext):
    """(gammaP, c) with c[m][j] the displaced-basis coefficients for m <= M,
    j <= N and gammaP[m] = gamma(m+1, r^2)/m!; all at padded precision.

    c[m][j] is a column of a unitary, so |c| <= 1; the table is computed at
    a precision padded for the alternating-sum cancellation, which is the
    only rounding the entries see.
    """
    key = _table_key(disc, ctx.bits)
    cached = _table_cache.get(key)
    if cached is not None and cached[0] >= N:
        return cached[1], cached[2], cached[3]
    rf = float(disc.radius)
    M = _required_m(rf, ctx.bits, N)
    af = math.hypot(float(disc.center_re), float(disc.center_im))
    pad_tab = 64 + int((M + N) * math.log2(2.0 + af))
    real_center = disc.center_im == 0
    with ctx.workprec(pad_tab):
        r2 = mpfr(disc.radius) ** 2
        gl = incomplete_gamma_ladder(M + 1, r2, PrecisionContext(bits=ctx.bits + pad_tab))
        fact = [mpfr(1)]
        for i in range(1, M + 1):
            fact.append(fact[-1] * i)
        gammaP = [gl[m + 1] / fact[m] for m in range(M + 1)]
        if real_center:
            a = mpfr(disc.center_re)
            na = -a
            epref = gmpy2.exp(-a * a / 2)
        else:
            a = mpc(mpfr(disc.center_re), mpfr(disc.center_im))
            na = -a.conjugate()
            epref = gmpy2.exp(-gmpy2.norm(a) / 2)
        sqf = [gmpy2.sqrt(f) for f in fact]
        # powers of a and of -conj(a)
        apow = [a ** 0]
        napow = [na ** 0]
        for i in range(1, max(M, N) + 1):
            apow.append(apow[-1] * a)
        for i in range(1, M + 1):
            napow.append(napow[-1] * na)
        c = []
        for m in range(M + 1):
            row = []
            for j in range(N + 1):
                if af == 0.0:
                    row.append(mpfr(1) if m == j else mpfr(0))
                    continue
                acc = mpfr(0) if real_center else mpc(0)
                for p in range(min(m, j) + 1):
                    acc += (
                        mpfr(math.comb(j, p))
                        * apow[j - p]
                        * napow[m - p]
                        / fact[m - p]
                    )
                row.append(epref * sqf[m] / sqf[j] * acc)
            c.append(row)
        # unitarity sanity: no displaced coefficient may exceed 1
        lim = 1 + mpfr(2) ** (-ctx.bits // 2)
        for row in c:
            for v in row:
                if (abs(v) if real_center else gmpy2.sqrt(gmpy2.norm(v))) > lim:
                    raise InternalConsistencyError(
                        f"displaced-basis coefficient exceeds 1 for {disc}"
                    )
    _table_cache[key] = (N, gammaP, c, real_center)
    return gammaP, c, real_center


def fock_moment(disc: Disc, j: int, k: int, ctx: PrecisionContext = DEFAULT_CONTEXT,
                crosscheck: bool = False):
    """Gaussian-weighted moment of z^j zbar^k over the disc.

    Centered discs reduce to pi * gamma(j+1, r^2) * delta_jk exactly; the
    off-center value is the displaced-basis series.  With ``crosscheck`` the
    value is recomputed by polar tensor quadrature and the two must agree to
    2^(-bits/4) relative.
    """
    if j < 0 or k < 0:
        raise PreconditionError("indices must be nonnegative")
    gammaP, c, real_center = _disc_table(disc, max(j, k), ctx)
    with ctx.workprec(32):
        acc = mpfr(0) if real_center else mpc(0)
        for m in range(len(gammaP)):
            cmj = c[m][j]
            cmk = c[m][k]
            acc += gammaP[m] * (cmj * cmk if real_center else cmj * cmk.conjugate())
        pref = gmpy2.const_pi() * gmpy2.sqrt(mpfr(_fact(j)) * mpfr(_fact(k)))
        val = mpc(pref * acc)
    if crosscheck:
        quad = fock_moment_quadrature(disc, j, k, ctx)
        with ctx.workprec():
            scale = max(gmpy2.sqrt(gmpy2.norm(val)), mpfr(2) ** (-(ctx.bits // 8)))
            diff = gmpy2.sqrt(gmpy2.norm(val - quad))
            if diff > scale * mpfr(2) ** (-(ctx.bits // 4)):
                raise InternalConsistencyError(
                    f"series {val} and quadrature {quad} disagree for "
                    f"moment ({j},{k}) over {disc}"
                )
    return val


_node_cache: dict = {}


def gauss_legendre_nodes(n: int, ctx: PrecisionContext):
    """Nodes/weights on [-1, 1] by Newton iteration on the Legendre
    recurrence, from Chebyshev initial guesses; cached per (n, bits)."""
    key = (n, ctx.bits)
    hit = _node_cache.get(key)
    if hit is not None:
        return hit
    with ctx.workprec(16):
        pi = gmpy2.const_pi()
        eps = mpfr(2) ** (-ctx.bits - 4)
        half = []  # positive-half roots, descending (middle root of odd n is 0)
        for i in range(1, n // 2 + n % 2 + 1):
            x = gmpy2.cos(pi * (4 * i - 1) / (4 * n + 2))
            dp = None
            for _ in range(200):
                p0, p1 = mpfr(1), x
                for m in range(2, n + 1):
                    p0, p1 = p1, ((2 * m - 1) * x * p1 - (m - 1) * p0) / m
                dp = n * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < eps:
                    break
            else:
                raise ConvergenceError(f"Legendre node Newton stalled at n={n}")
            w = 2 / ((1 - x * x) * dp * dp)
            half.append((x, w))
        full_x = [-x for (x, _w) in half]
        full_w = [w for (_x, w) in half]
        for x, w in reversed(half[: n // 2]):
            full_x.append(x)
            full_w.append(w)
        pair = (full_x, full_w)
    _node_cache[key] = pair
    return pair


def disc_quadrature(disc: Disc, integrand, ctx: PrecisionContext,
                    rel_tol_exp: int | None = None, start: int = 16,
                    max_nodes: int = 2048):
    """Polar tensor Gauss-Legendre over the disc with node doubling until the
    relative change drops below 2^rel_tol_exp (default -bits/2)."""
    if rel_tol_exp is None:
        rel_tol_exp = -(ctx.bits // 2)
    with ctx.workprec(16):
        tol = mpfr(2) ** rel_tol_exp
        r = mpfr(disc.radius)
        cx, cy = mpfr(disc.center_re), mpfr(disc.center_im)
        pi = gmpy2.const_pi()
        prev = None
        n = start
        while n <= max_nodes:
            xs, ws = gauss_legendre_nodes(n, ctx)
            total = mpc(0)
            coss = [gmpy2.cos(pi * (x + 1)) for x in xs]
            sins = [gmpy2.sin(pi * (x + 1)) for x in xs]
            for xr, wr in zip(xs, ws):
                rho = r * (xr + 1) / 2
                jac = rho * (r / 2) * pi  # dr and dtheta jacobians folded
                for ct, st, wt in zip(coss, sins, ws):
                    z = mpc(cx + rho * ct, cy + rho * st)
                    total += wr * wt * jac * integrand(z)
            if prev is not None:
                mag = gmpy2.sqrt(gmpy2.norm(total))
                change = gmpy2.sqrt(gmpy2.norm(total - prev))
                # relative stabilization, with an absolute escape so that
                # symmetry-zero integrals terminate instead of chasing noise
                if change <= tol * max(mag, tol):
                    return total
            prev = total
            n *= 2
        raise ConvergenceError(
            f"disc quadrature did not stabilize below 2^{rel_tol_exp} with {max_nodes} nodes"
        )


def fock_moment_quadrature(disc: Disc, j: int, k: int,
                           ctx: PrecisionContext = DEFAULT_CONTEXT):
    """Independent route to the Gaussian disc moment (polar tensor GL)."""

    def f(z):
        return z**j * z.conjugate() ** k * gmpy2.exp(-gmpy2.norm(z))

    return disc_quadrature(disc, f, ctx)


def weighted_moment_matrix(symbol: Symbol, n: int,
                           ctx: PrecisionContext = DEFAULT_CONTEXT,
                           gaussian: bool = True) -> MomentMatrix:
    """Q_n(W): the form matrix of the symbol against monomials 0..n, with the
    Gaussian damping (flag on) or the raw Lebesgue weight (flag off)."""
    if n < 0:
        raise PreconditionError("degree must be nonnegative")
    with ctx.workprec():
        size = n + 1
        acc = [[mpc(0)] * size for _ in range(size)]
        if gaussian:
            for d, w in symbol.terms:
                gammaP, c, real_center = _disc_table(d, n, ctx)
                ww = mpfr(w)
                for j in range(size):
                    for k in range(j, size):
                        s = mpfr(0) if real_center else mpc(0)
                        for m in range(len(gammaP)):
                            cmj = c[m][j]
                            cmk = c[m][k]
                            s += gammaP[m] * (cmj * cmk if real_center else cmj * cmk.conjugate())
                        acc[j][k] += ww * s
            pi = gmpy2.const_pi()
            sqf = [gmpy2.sqrt(mpfr(_fact(i))) for i in range(size)]
            upper = [
                [pi * sqf[j] * sqf[k] * acc[j][k] for k in range(j, size)]
                for j in range(size)
            ]
        else:
            for d, w in symbol.terms:
                ww = mpfr(w)
                for j in range(size):
                    for k in range(j, size):
                        acc[j][k] += ww * lebesgue_moment(d, j, k, ctx)
            upper = [[acc[j][k] for k in range(j, size)] for j in range(size)]
    kind = "weighted-fock" if gaussian else "weighted-lebesgue"
    return MomentMatrix(n, kind, HermitianMatrix(upper, ctx))


def toeplitz_truncation(symbol: Symbol, N: int,
                        ctx: PrecisionContext = DEFAULT_CONTEXT,
                        gate: bool = True) -> MomentMatrix:
    """Matrix of the Gaussian multiplication form in the orthonormal basis
    e_j = z^j / sqrt(pi j!), truncated to degrees 0..N.

    With ``gate`` (default) a deterministic sample of entries of every
    off-center disc is re-derived by quadrature at a reduced gate precision;
    disagreement raises InternalConsistencyError.
    """
    if N < 0:
        raise PreconditionError("truncation degree must be nonnegative")
    with ctx.workprec():
        size = N + 1
        acc = [[mpc(0)] * size for _ in range(size)]
        for d, w in symbol.terms:
            gammaP, c, real_center = _disc_table(d, N, ctx)
            ww = mpfr(w)
            for j in range(size):
                accj = acc[j]
                for k in range(j, size):
                    s = mpfr(0) if real_center else mpc(0)
                    for m in range(len(gammaP)):
                        cmj = c[m][j]
                        cmk = c[m][k]
                        s += gammaP[m] * (cmj * cmk if real_center else cmj * cmk.conjugate())
                    accj[k] += ww * s
        upper = [[acc[j][k] for k in range(j, size)] for j in range(size)]
    out = MomentMatrix(N, "fock-toeplitz", HermitianMatrix(upper, ctx))
    if gate:
        _gate_assembly(symbol, out, ctx)
    return out


def _gate_assembly(symbol: Symbol, mm: MomentMatrix, ctx: PrecisionContext):
    """Sampled series-vs-quadrature agreement gate for off-center discs.

    Runs at a fixed reduced precision: a genuine assembly bug shows up at
    far coarser tolerances than 2^-48, while the full-strength per-entry
    check stays available through fock_moment(..., crosscheck=True).
    """
    gate_ctx = PrecisionContext(bits=192)
    N = mm.degree
    picks = sorted({(0, 0), (0, min(2, N)), (min(5, N), min(5, N))})
    for d, _w in symbol.terms:
        if d.center_re == 0 and d.center_im == 0:
            continue  # centered discs are exact incomplete-gamma diagonals
        for (j, k) in picks:
            val = fock_moment(d, j, k, gate_ctx)
            quad = disc_quadrature(
                d,
                lambda z, _j=j, _k=k: z**_j * z.conjugate() ** _k * gmpy2.exp(-gmpy2.norm(z)),
                gate_ctx,
                rel_tol_exp=-56,
            )
            with gate_ctx.workprec():
                scale = max(gmpy2.sqrt(gmpy2.norm(val)), mpfr(2) ** (-24))
                if gmpy2.sqrt(gmpy2.norm(val - quad)) > scale * mpfr(2) ** (-48):
                    raise InternalConsistencyError(
                        f"assembly gate: series and quadrature disagree for "
                        f"moment ({j},{k}) over {d}"
                    )


def clear_caches():
    _table_cache.clear()
    _node_cache.clear()
