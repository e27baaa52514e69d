"""Arbitrary-precision arithmetic and dense Hermitian linear algebra kernels.

Everything here is built on GNU MPFR/MPC via gmpy2.  Values are plain
``gmpy2.mpfr`` / ``gmpy2.mpc`` objects (aliased ``BigReal`` / ``BigComplex``);
the precision that governs an operation comes from an explicit
:class:`PrecisionContext`, never from global state left behind by a caller.
Mixing objects tagged with different contexts promotes to the larger
precision (see :meth:`PrecisionContext.merge`).

The eigensolver is a cyclic Jacobi iteration with a fixed row-major sweep
order, so repeated runs on the same input are bit-identical.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpc, mpfr

from .errors import ConvergenceError, NotPositiveDefiniteError, PreconditionError

BigReal = mpfr
BigComplex = mpc

_MIN_BITS = 128


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision plus the Jacobi stopping policy.

    ``jacobi_threshold_exponent`` is the binary exponent e such that the
    sweep loop stops once the off-diagonal Frobenius norm drops below
    2**e * ||M||_F.  It must stay at least 20 bits above the mantissa floor.
    """

    bits: int
    jacobi_threshold_exponent: int = field(default=0)
    max_jacobi_sweeps: int = 60

    def __post_init__(self):
        if self.bits < _MIN_BITS:
            raise PreconditionError(f"precision must be at least {_MIN_BITS} bits, got {self.bits}")
        if self.jacobi_threshold_exponent == 0:
            object.__setattr__(self, "jacobi_threshold_exponent", -self.bits + 20)
        if self.jacobi_threshold_exponent > -self.bits + 20:
            raise PreconditionError(
                "jacobi_threshold_exponent must be <= -bits + 20 "
                f"(got {self.jacobi_threshold_exponent} at {self.bits} bits)"
            )
        if self.max_jacobi_sweeps < 1:
            raise PreconditionError("max_jacobi_sweeps must be positive")

    @staticmethod
    def for_dimension(dim: int) -> "PrecisionContext":
        """Default policy: enough bits to resolve eigenvalues near e^(-N log N)."""
        if dim < 1:
            raise PreconditionError("dimension must be positive")
        n = max(dim, 2)
        bits = max(192, math.ceil(4.5 * n * math.log(n) / math.log(2)) + 64)
        return PrecisionContext(bits=bits)

    def merge(self, other: "PrecisionContext") -> "PrecisionContext":
        """Promotion rule for mixed-precision operands: the larger context wins."""
        if other.bits > self.bits:
            return other
        return self

    def scaled(self, factor: float) -> "PrecisionContext":
        return PrecisionContext(bits=max(_MIN_BITS, int(self.bits * factor)),
                                max_jacobi_sweeps=self.max_jacobi_sweeps)

    @contextmanager
    def workprec(self, extra_bits: int = 0):
        """Run a block at this context's precision (plus guard bits)."""
        ctx = gmpy2.get_context()
        saved = ctx.precision
        ctx.precision = self.bits + extra_bits
        try:
            yield
        finally:
            ctx.precision = saved

    def real(self, x) -> BigReal:
        with self.workprec():
            return mpfr(x)

    def complex(self, x, y=None) -> BigComplex:
        with self.workprec():
            return mpc(x) if y is None else mpc(mpfr(x), mpfr(y))

    def eps(self, shift: int = 0) -> BigReal:
        with self.workprec():
            return mpfr(2) ** (-self.bits + shift)

    def decimal_digits(self) -> int:
        return int(self.bits * 0.30103) + 2

    def to_decimal(self, x) -> str:
        """Full-working-precision decimal string (round-trips at this context)."""
        if isinstance(x, mpc):
            return f"{self.to_decimal(x.real)}{'+' if x.imag >= 0 else ''}{self.to_decimal(x.imag)}j"
        with self.workprec():
            return str(mpfr(x))

    def parse_decimal(self, s: str) -> BigReal:
        with self.workprec():
            return mpfr(s.strip())


DEFAULT_CONTEXT = PrecisionContext(bits=256)


@dataclass(frozen=True)
class InertiaTriple:
    n_plus: int
    n_zero: int
    n_minus: int

    def __post_init__(self):
        if min(self.n_plus, self.n_zero, self.n_minus) < 0:
            raise PreconditionError("inertia counts must be nonnegative")

    @property
    def dimension(self) -> int:
        return self.n_plus + self.n_zero + self.n_minus

    def as_tuple(self):
        return (self.n_plus, self.n_zero, self.n_minus)


def lower_incomplete_gamma(s: int, x, ctx: PrecisionContext = DEFAULT_CONTEXT) -> BigReal:
    """gamma(s, x) = int_0^x t^(s-1) e^(-t) dt for integer s >= 1.

    Uses the exact finite recurrence gamma(s,x) = (s-1) gamma(s-1,x)
    - x^(s-1) e^(-x), run at a padded precision sized from the known
    cancellation (each step loses about log2(k/x) bits when x < k).
    """
    return incomplete_gamma_ladder(s, x, ctx)[s]


def incomplete_gamma_ladder(smax: int, x, ctx: PrecisionContext = DEFAULT_CONTEXT) -> list:
    """gamma(s, x) for every s in 1..smax; index 0 of the result is unused."""
    if smax < 1:
        raise PreconditionError("s must be a positive integer")
    with ctx.workprec():
        xv = mpfr(x)
    if xv < 0:
        raise PreconditionError(f"lower incomplete gamma needs x >= 0, got {xv}")
    if xv == 0:
        zero = ctx.real(0)
        return [None] + [zero] * smax
    pad = _gamma_recurrence_pad(smax, float(xv))
    with ctx.workprec(pad):
        xx = mpfr(xv)
        ex = gmpy2.exp(-xx)
        out = [None, 1 - ex]
        xpow = mpfr(1)
        for s in range(2, smax + 1):
            xpow *= xx  # x^(s-1)
            out.append((s - 1) * out[s - 1] - xpow * ex)
    with ctx.workprec():
        return [None] + [mpfr(v) for v in out[1:]]


def _gamma_recurrence_pad(s: int, x: float) -> int:
    if s <= 1:
        return 16
    try:
        loss = (math.lgamma(s) - (s - 1) * math.log(x)) / math.log(2)
    except (ValueError, OverflowError):
        loss = 0.0
    return 16 + max(0, math.ceil(loss))


class HermitianMatrix:
    """Dense Hermitian matrix; dense upper-triangle storage of BigComplex.

    Construction takes the upper triangle row by row (row j holds entries
    j..n-1); the lower triangle is the conjugate by definition and diagonal
    imaginary parts are dropped exactly.  Purely real matrices are detected
    once so the kernels can run the cheaper real-symmetric paths.
    """

    __slots__ = ("dim", "ctx", "upper", "is_real")

    def __init__(self, upper_rows, ctx: PrecisionContext):
        self.dim = len(upper_rows)
        if self.dim < 1:
            raise PreconditionError("matrix dimension must be positive")
        self.ctx = ctx
        with ctx.workprec():
            rows = []
            real = True
            for j, row in enumerate(upper_rows):
                if len(row) != self.dim - j:
                    raise PreconditionError(
                        f"upper-triangle row {j} must have {self.dim - j} entries, got {len(row)}"
                    )
                conv = []
                for i, v in enumerate(row):
                    z = mpc(v)
                    if i == 0:
                        z = mpc(z.real, 0)  # diagonal is real by definition
                    if z.imag != 0:
                        real = False
                    conv.append(z)
                rows.append(conv)
        self.upper = rows
        self.is_real = real

    @classmethod
    def from_square(cls, entries, ctx: PrecisionContext, hermitize: bool = False):
        """Build from a full square array; off-pair mismatches are averaged
        only when ``hermitize`` is set, otherwise the upper triangle wins."""
        n = len(entries)
        upper = []
        with ctx.workprec():
            for j in range(n):
                row = []
                for k in range(j, n):
                    v = mpc(entries[j][k])
                    if hermitize and k > j:
                        v = (v + mpc(entries[k][j]).conjugate()) / 2
                    row.append(v)
                upper.append(row)
        return cls(upper, ctx)

    def entry(self, j: int, k: int):
        if k >= j:
            return self.upper[j][k - j]
        return self.upper[k][j - k].conjugate()

    def full(self):
        """Square list-of-lists copy (mpfr entries when the matrix is real)."""
        n = self.dim
        if self.is_real:
            out = [[None] * n for _ in range(n)]
            for j in range(n):
                for k in range(j, n):
                    v = self.upper[j][k - j].real
                    out[j][k] = v
                    out[k][j] = v
            return out
        out = [[None] * n for _ in range(n)]
        for j in range(n):
            for k in range(j, n):
                v = self.upper[j][k - j]
                out[j][k] = v
                out[k][j] = v.conjugate()
        return out

    def frobenius(self) -> BigReal:
        with self.ctx.workprec():
            acc = mpfr(0)
            for j in range(self.dim):
                row = self.upper[j]
                d = row[0].real
                acc += d * d
                for v in row[1:]:
                    acc += 2 * gmpy2.norm(v)  # norm() is |v|^2
            return gmpy2.sqrt(acc)

    def trace(self) -> BigReal:
        with self.ctx.workprec():
            return mpfr(sum(row[0].real for row in self.upper))

    def principal_submatrix(self, dim: int) -> "HermitianMatrix":
        if not 1 <= dim <= self.dim:
            raise PreconditionError(f"submatrix dimension {dim} out of range")
        return HermitianMatrix([row[: dim - j] for j, row in enumerate(self.upper[:dim])], self.ctx)

    def with_context(self, ctx: PrecisionContext) -> "HermitianMatrix":
        """Retag (and round, when ctx is coarser) to another context."""
        return HermitianMatrix(self.upper, ctx)

    def scaled(self, factor) -> "HermitianMatrix":
        with self.ctx.workprec():
            f = mpfr(factor)
            return HermitianMatrix(
                [[v * f for v in row] for row in self.upper], self.ctx
            )

    def add(self, other: "HermitianMatrix") -> "HermitianMatrix":
        if other.dim != self.dim:
            raise PreconditionError("dimension mismatch")
        ctx = self.ctx.merge(other.ctx)
        with ctx.workprec():
            return HermitianMatrix(
                [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.upper, other.upper)],
                ctx,
            )


@dataclass
class EigenResult:
    eigenvalues: list
    sweeps: int
    offdiag_residual: BigReal
    bits: int
    vectors: list | None = None


def hermitian_eigen(M: HermitianMatrix, ctx: PrecisionContext | None = None,
                    want_vectors: bool = False) -> EigenResult:
    """All eigenvalues of M, ascending, by cyclic Jacobi with threshold.

    Rotations sweep the upper triangle row-major; within a sweep a pivot is
    rotated only when it exceeds threshold/dim, which cannot prevent the
    off-diagonal Frobenius norm from reaching the stopping value.  Raises
    ConvergenceError (with the residual) if max_jacobi_sweeps is exhausted.
    """
    ctx = (ctx or M.ctx).merge(M.ctx)
    n = M.dim
    with ctx.workprec():
        fro = mpfr(M.frobenius())
        if fro == 0:
            zero = mpfr(0)
            vecs = _identity(n) if want_vectors else None
            return EigenResult([zero] * n, 0, zero, ctx.bits, vecs)
        thresh = fro * mpfr(2) ** ctx.jacobi_threshold_exponent
        if M.is_real:
            diag, sweeps, off, vecs = _jacobi_real(M.full(), thresh, ctx.max_jacobi_sweeps,
                                                   want_vectors)
        else:
            diag, sweeps, off, vecs = _jacobi_complex(M.full(), thresh, ctx.max_jacobi_sweeps,
                                                      want_vectors)
        if off >= thresh:
            raise ConvergenceError(
                f"Jacobi did not converge in {ctx.max_jacobi_sweeps} sweeps "
                f"(residual {off:.3e}, threshold {thresh:.3e})",
                residual=off,
            )
        order = sorted(range(n), key=lambda i: diag[i])
        values = [diag[i] for i in order]
        if want_vectors:
            vecs = [[vecs[r][i] for i in order] for r in range(n)]
        return EigenResult(values, sweeps, off, ctx.bits, vecs)


def _identity(n):
    out = [[mpfr(0)] * n for _ in range(n)]
    for i in range(n):
        out[i][i] = mpfr(1)
    return out


def _jacobi_real(A, thresh, max_sweeps, want_vectors):
    n = len(A)
    ind = thresh / n
    V = _identity(n) if want_vectors else None
    off = thresh  # forces at least one sweep of bookkeeping
    sweeps = 0
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        off2 = mpfr(0)
        rotated = 0
        for p in range(n - 1):
            Ap = A[p]
            for q in range(p + 1, n):
                apq = Ap[q]
                if apq == 0:
                    continue
                off2 += apq * apq
                if abs(apq) <= ind:
                    continue
                rotated += 1
                theta = (A[q][q] - Ap[p]) / (2 * apq)
                t = 1 / (abs(theta) + gmpy2.sqrt(1 + theta * theta))
                if theta < 0:
                    t = -t
                c = 1 / gmpy2.sqrt(1 + t * t)
                s = t * c
                Aq = A[q]
                for i in range(n):
                    Ai = A[i]
                    aip = Ai[p]
                    aiq = Ai[q]
                    Ai[p] = c * aip - s * aiq
                    Ai[q] = s * aip + c * aiq
                for i in range(n):
                    api = Ap[i]
                    aqi = Aq[i]
                    Ap[i] = c * api - s * aqi
                    Aq[i] = s * api + c * aqi
                if want_vectors:
                    for i in range(n):
                        Vi = V[i]
                        vip = Vi[p]
                        viq = Vi[q]
                        Vi[p] = c * vip - s * viq
                        Vi[q] = s * vip + c * viq
        off = gmpy2.sqrt(off2)
        if rotated == 0 or off < thresh:
            break
    return [A[i][i] for i in range(n)], sweeps, off, V


def _jacobi_complex(A, thresh, max_sweeps, want_vectors):
    n = len(A)
    ind = thresh / n
    V = None
    if want_vectors:
        V = [[mpc(0)] * n for _ in range(n)]
        for i in range(n):
            V[i][i] = mpc(1)
    off = thresh
    sweeps = 0
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        off2 = mpfr(0)
        rotated = 0
        for p in range(n - 1):
            Ap = A[p]
            for q in range(p + 1, n):
                apq = Ap[q]
                mag2 = gmpy2.norm(apq)
                if mag2 == 0:
                    continue
                off2 += mag2
                mag = gmpy2.sqrt(mag2)
                if mag <= ind:
                    continue
                rotated += 1
                u = apq / mag  # unit phase; column q absorbs conj(u)
                theta = (A[q][q].real - Ap[p].real) / (2 * mag)
                t = 1 / (abs(theta) + gmpy2.sqrt(1 + theta * theta))
                if theta < 0:
                    t = -t
                c = 1 / gmpy2.sqrt(1 + t * t)
                s = t * c
                uc = u.conjugate()
                Aq = A[q]
                for i in range(n):
                    Ai = A[i]
                    aip = Ai[p]
                    aiq = Ai[q] * uc
                    Ai[p] = c * aip - s * aiq
                    Ai[q] = s * aip + c * aiq
                for i in range(n):
                    api = Ap[i]
                    aqi = u * Aq[i]
                    Ap[i] = c * api - s * aqi
                    Aq[i] = s * api + c * aqi
                if want_vectors:
                    for i in range(n):
                        Vi = V[i]
                        vip = Vi[p]
                        viq = Vi[q] * uc
                        Vi[p] = c * vip - s * viq
                        Vi[q] = s * vip + c * viq
        off = gmpy2.sqrt(off2)
        if rotated == 0 or off < thresh:
            break
    return [A[i][i].real for i in range(n)], sweeps, off, V


def cholesky(M: HermitianMatrix, ctx: PrecisionContext | None = None):
    """Lower-triangular L with M = L L*; raises on a nonpositive pivot.

    Returns a full square list-of-lists (mpfr for real input, mpc otherwise)
    with zeros above the diagonal.
    """
    ctx = (ctx or M.ctx).merge(M.ctx)
    n = M.dim
    with ctx.workprec():
        if M.is_real:
            A = M.full()
            L = [[mpfr(0)] * n for _ in range(n)]
            for j in range(n):
                Lj = L[j]
                d = A[j][j] - sum(Lj[k] * Lj[k] for k in range(j))
                if d <= 0:
                    raise NotPositiveDefiniteError(j + 1)
                Lj[j] = gmpy2.sqrt(d)
                for i in range(j + 1, n):
                    Li = L[i]
                    Li[j] = (A[i][j] - sum(Li[k] * Lj[k] for k in range(j))) / Lj[j]
            return L
        A = M.full()
        L = [[mpc(0)] * n for _ in range(n)]
        for j in range(n):
            Lj = L[j]
            d = A[j][j].real - sum(gmpy2.norm(Lj[k]) for k in range(j))
            if d <= 0:
                raise NotPositiveDefiniteError(j + 1)
            Lj[j] = mpc(gmpy2.sqrt(d))
            for i in range(j + 1, n):
                Li = L[i]
                acc = A[i][j]
                for k in range(j):
                    acc -= Li[k] * Lj[k].conjugate()
                Li[j] = acc / Lj[j].real
        return L


def solve_lower(L, B, ctx: PrecisionContext):
    """Columns X with L X = B for lower-triangular L; B is a square array."""
    n = len(L)
    m = len(B[0])
    with ctx.workprec():
        X = [[None] * m for _ in range(n)]
        for c in range(m):
            for i in range(n):
                acc = B[i][c]
                Li = L[i]
                for k in range(i):
                    acc -= Li[k] * X[k][c]
                X[i][c] = acc / Li[i]
        return X


def whiten(B: HermitianMatrix, G: HermitianMatrix,
           ctx: PrecisionContext | None = None) -> HermitianMatrix:
    """L^-1 B L^-* where G = L L*: the Hermitian matrix carrying the
    generalized eigenvalues of the pencil (B, G)."""
    if B.dim != G.dim:
        raise PreconditionError("pencil matrices must have equal dimension")
    ctx = (ctx or B.ctx).merge(B.ctx).merge(G.ctx)
    L = cholesky(G, ctx)
    with ctx.workprec():
        X = solve_lower(L, B.full(), ctx)  # L^-1 B
        n = B.dim
        if B.is_real and G.is_real:
            Xt = [[X[j][i] for j in range(n)] for i in range(n)]
        else:
            Xt = [[X[j][i].conjugate() if isinstance(X[j][i], mpc) else X[j][i]
                   for j in range(n)] for i in range(n)]
        Y = solve_lower(L, Xt, ctx)  # Y = L^-1 B L^-*, Hermitian up to roundoff
        upper = []
        for j in range(n):
            row = []
            for k in range(j, n):
                a = Y[j][k]
                b = Y[k][j]
                if isinstance(a, mpc) or isinstance(b, mpc):
                    v = (mpc(a) + mpc(b).conjugate()) / 2
                else:
                    v = (a + b) / 2
                row.append(v)
            upper.append(row)
        return HermitianMatrix(upper, ctx)


def ldlt_inertia(M: HermitianMatrix, zero_threshold=None,
                 ctx: PrecisionContext | None = None) -> InertiaTriple:
    """Inertia from symmetric-pivoted LDL^T (Bunch-Parlett full pivoting).

    Pivots with magnitude <= zero_threshold count as zero; a trailing block
    whose largest entry is below the threshold is flushed to zeros.  The
    default threshold 2^(-bits/3) ||M||_F separates genuine kernel from
    roundoff at working precision.
    """
    ctx = (ctx or M.ctx).merge(M.ctx)
    n = M.dim
    with ctx.workprec():
        if zero_threshold is None:
            zero_threshold = M.frobenius() * mpfr(2) ** (-ctx.bits // 3)
        else:
            zero_threshold = mpfr(zero_threshold)
        if zero_threshold < 0:
            raise PreconditionError("zero_threshold must be nonnegative")
        A = M.full()
        is_real = M.is_real

        def mag2(v):
            return v * v if is_real else gmpy2.norm(v)

        alpha = (1 + gmpy2.sqrt(mpfr(17))) / 8
        n_plus = n_zero = n_minus = 0
        k = 0
        while k < n:
            dmax = mpfr(-1)
            dpos = k
            for i in range(k, n):
                v = abs(A[i][i].real if not is_real else A[i][i])
                if v > dmax:
                    dmax, dpos = v, i
            omax2 = mpfr(-1)
            opos = None
            for i in range(k, n):
                Ai = A[i]
                for j in range(i + 1, n):
                    v = mag2(Ai[j])
                    if v > omax2:
                        omax2, opos = v, (i, j)
            omax = gmpy2.sqrt(omax2) if omax2 > 0 else mpfr(0)
            if max(dmax, omax) <= zero_threshold:
                n_zero += n - k
                break
            if dmax >= alpha * omax:
                _sym_swap(A, k, dpos)
                piv = A[k][k] if is_real else A[k][k].real
                if abs(piv) <= zero_threshold:
                    n_zero += 1
                elif piv > 0:
                    n_plus += 1
                else:
                    n_minus += 1
                if abs(piv) > zero_threshold:
                    Ak = A[k]
                    for i in range(k + 1, n):
                        f = A[i][k] / piv
                        Ai = A[i]
                        for j in range(k + 1, n):
                            Ai[j] -= f * Ak[j]
                k += 1
            else:
                i0, j0 = opos
                _sym_swap(A, k, i0)
                if j0 == k:
                    j0 = i0
                _sym_swap(A, k + 1, j0)
                a = A[k][k] if is_real else A[k][k].real
                d = A[k + 1][k + 1] if is_real else A[k + 1][k + 1].real
                b = A[k][k + 1]
                det = a * d - mag2(b)
                disc = gmpy2.sqrt((a - d) * (a - d) / 4 + mag2(b))
                for lam in ((a + d) / 2 + disc, (a + d) / 2 - disc):
                    if abs(lam) <= zero_threshold:
                        n_zero += 1
                    elif lam > 0:
                        n_plus += 1
                    else:
                        n_minus += 1
                bc = b if is_real else b.conjugate()
                for i in range(k + 2, n):
                    u = A[i][k]
                    v = A[i][k + 1]
                    x = (d * u - bc * v) / det
                    y = (a * v - b * u) / det
                    Ak = A[k]
                    Ak1 = A[k + 1]
                    Ai = A[i]
                    for j in range(k + 2, n):
                        Ai[j] -= x * Ak[j] + y * Ak1[j]
                k += 2
        return InertiaTriple(n_plus, n_zero, n_minus)


def _sym_swap(A, i, j):
    if i == j:
        return
    A[i], A[j] = A[j], A[i]
    for row in A:
        row[i], row[j] = row[j], row[i]
