import math
import random

import gmpy2
import mpmath
import pytest
from gmpy2 import mpfr

from fockspec.bigarith import (
    HermitianMatrix,
    InertiaTriple,
    PrecisionContext,
    cholesky,
    hermitian_eigen,
    incomplete_gamma_ladder,
    ldlt_inertia,
    lower_incomplete_gamma,
    whiten,
)
from fockspec.errors import ConvergenceError, NotPositiveDefiniteError, PreconditionError

CTX = PrecisionContext(bits=256)


def gamma_series_oracle(s, x, dps=100):
    """Independent oracle: gamma(s,x) = x^s sum_k (-x)^k / (k! (s+k))."""
    with mpmath.workdps(dps):
        acc = mpmath.mpf(0)
        term_scale = mpmath.mpf(1)
        x = mpmath.mpf(x)
        for k in range(0, 400):
            acc += (-1) ** k * x**k / (mpmath.factorial(k) * (s + k))
        return x**s * acc


def as_mp(x):
    if isinstance(x, (mpmath.mpf, mpmath.mpc)):
        return x
    return mpmath.mpf(str(x))


def rel_err(a, b):
    with mpmath.workdps(130):
        a, b = as_mp(a), as_mp(b)
        if b == 0:
            return abs(a)
        return abs(a - b) / abs(b)


class TestIncompleteGamma:
    def test_gamma_1_1(self):
        got = lower_incomplete_gamma(1, 1, CTX)
        want = gamma_series_oracle(1, 1)
        assert rel_err(got, want) < mpmath.mpf(2) ** (-248)

    def test_gamma_1_0_is_zero(self):
        assert lower_incomplete_gamma(1, 0, CTX) == 0

    def test_gamma_2_50_closed_form(self):
        got = lower_incomplete_gamma(2, 50, CTX)
        with mpmath.workdps(100):
            want = 1 - mpmath.e ** (-50) * 51
        assert rel_err(got, want) < mpmath.mpf(2) ** (-248)
        # ~1 to 19 decimal places
        assert abs(as_mp(got) - 1) < mpmath.mpf("1e-19")

    @pytest.mark.parametrize("s,x", [(5, 0.25), (17, 1.0), (40, 4.0), (61, 9.0), (3, 30.0)])
    def test_against_mpmath(self, s, x):
        got = lower_incomplete_gamma(s, x, CTX)
        with mpmath.workdps(140):
            want = mpmath.gammainc(s, 0, x)
        assert rel_err(got, want) < mpmath.mpf(2) ** (-248)

    def test_ladder_matches_single(self):
        ladder = incomplete_gamma_ladder(30, 2.5, CTX)
        for s in (1, 7, 30):
            assert ladder[s] == lower_incomplete_gamma(s, 2.5, CTX)

    def test_negative_x_rejected(self):
        with pytest.raises(PreconditionError):
            lower_incomplete_gamma(3, -1, CTX)


def diag_matrix(values, ctx=CTX):
    n = len(values)
    return HermitianMatrix(
        [[values[j] if k == j else 0 for k in range(j, n)] for j in range(n)], ctx
    )


class TestHermitianEigen:
    def test_identity(self):
        res = hermitian_eigen(diag_matrix([1, 1, 1]))
        assert [float(v) for v in res.eigenvalues] == [1.0, 1.0, 1.0]

    def test_diagonal_sorted(self):
        res = hermitian_eigen(diag_matrix([3, 1, 2]))
        assert [float(v) for v in res.eigenvalues] == [1.0, 2.0, 3.0]

    def test_2x2_offdiagonal(self):
        M = HermitianMatrix([[0, 1], [0]], CTX)
        res = hermitian_eigen(M)
        assert rel_err(res.eigenvalues[0], -1) < 1e-70
        assert rel_err(res.eigenvalues[1], 1) < 1e-70

    def test_complex_2x2_closed_form(self):
        # [[2, i],[-i, 0]] has eigenvalues 1 +/- sqrt(2)
        M = HermitianMatrix([[2, gmpy2.mpc(0, 1)], [0]], CTX)
        res = hermitian_eigen(M)
        with mpmath.workdps(90):
            lo, hi = 1 - mpmath.sqrt(2), 1 + mpmath.sqrt(2)
        assert rel_err(res.eigenvalues[0], lo) < 1e-70
        assert rel_err(res.eigenvalues[1], hi) < 1e-70

    def test_trace_and_frobenius_match(self):
        rng = random.Random(7)
        n = 8
        raw = [[rng.randint(-9, 9) + (rng.randint(-9, 9) * 1j if k > j else 0)
                for k in range(j, n)] for j in range(n)]
        M = HermitianMatrix(raw, CTX)
        res = hermitian_eigen(M)
        with CTX.workprec():
            tr = sum(res.eigenvalues, mpfr(0))
            fr = gmpy2.sqrt(sum(v * v for v in res.eigenvalues))
        assert rel_err(tr, M.trace()) < mpmath.mpf(2) ** (-128) or abs(as_mp(tr - M.trace())) < mpmath.mpf(2) ** (-120)
        assert rel_err(fr, M.frobenius()) < mpmath.mpf(2) ** (-128)

    def test_unitary_similarity_invariance(self):
        # apply a handful of exact Jacobi-style rotations; spectrum must not move
        rng = random.Random(21)
        n = 6
        raw = [[rng.randint(-5, 5) for _ in range(j, n)] for j in range(n)]
        M = HermitianMatrix(raw, CTX)
        base = hermitian_eigen(M).eigenvalues
        with CTX.workprec():
            A = M.full()
            for _ in range(10):
                p, q = sorted(rng.sample(range(n), 2))
                ang = mpfr(rng.randint(1, 9)) / 10
                c, s = gmpy2.cos(ang), gmpy2.sin(ang)
                for i in range(n):
                    aip, aiq = A[i][p], A[i][q]
                    A[i][p], A[i][q] = c * aip - s * aiq, s * aip + c * aiq
                for i in range(n):
                    api, aqi = A[p][i], A[q][i]
                    A[p][i], A[q][i] = c * api - s * aqi, s * api + c * aqi
        M2 = HermitianMatrix.from_square(A, CTX, hermitize=True)
        rotated = hermitian_eigen(M2).eigenvalues
        scale = M.frobenius()
        for a, b in zip(base, rotated):
            assert abs(as_mp(a - b)) <= as_mp(scale) * mpmath.mpf(2) ** (-128)

    def test_against_mpmath_complex(self):
        rng = random.Random(3)
        n = 5
        raw = [[rng.randint(-4, 4) + (rng.randint(-4, 4) * 1j if k > j else 0)
                for k in range(j, n)] for j in range(n)]
        M = HermitianMatrix(raw, CTX)
        got = hermitian_eigen(M).eigenvalues
        with mpmath.workdps(60):
            A = mpmath.matrix(n, n)
            for j in range(n):
                for k in range(n):
                    v = M.entry(j, k)
                    A[j, k] = mpmath.mpc(str(v.real), str(v.imag))
            want = sorted(mpmath.eigh(A, eigvals_only=True))
            for g, w in zip(got, want):
                assert abs(as_mp(g) - w) < mpmath.mpf("1e-45")

    def test_eigenvectors_reconstruct(self):
        rng = random.Random(11)
        n = 5
        raw = [[rng.randint(-5, 5) for _ in range(j, n)] for j in range(n)]
        M = HermitianMatrix(raw, CTX)
        res = hermitian_eigen(M, want_vectors=True)
        with CTX.workprec():
            V = res.vectors
            lam = res.eigenvalues
            for col in range(n):
                for row in range(n):
                    mv = sum(M.entry(row, k).real * V[k][col] for k in range(n))
                    assert abs(mv - lam[col] * V[row][col]) < mpfr(2) ** (-200)

    def test_sweep_budget_enforced(self):
        tight = PrecisionContext(bits=256, max_jacobi_sweeps=1)
        rng = random.Random(5)
        n = 12
        raw = [[rng.randint(-5, 5) for _ in range(j, n)] for j in range(n)]
        with pytest.raises(ConvergenceError) as exc:
            hermitian_eigen(HermitianMatrix(raw, tight))
        assert exc.value.residual is not None


class TestCholesky:
    def test_identity(self):
        L = cholesky(diag_matrix([1, 1, 1]))
        assert all(float(L[i][i]) == 1.0 for i in range(3))

    def test_diagonal(self):
        L = cholesky(diag_matrix([4, 9]))
        assert float(L[0][0]) == 2.0 and float(L[1][1]) == 3.0

    def test_2x2_hand_elimination(self):
        M = HermitianMatrix([[2, 1], [2]], CTX)
        L = cholesky(M)
        with mpmath.workdps(90):
            assert abs(as_mp(L[0][0]) - mpmath.sqrt(2)) < 1e-70
            assert abs(as_mp(L[1][0]) - 1 / mpmath.sqrt(2)) < 1e-70
            assert abs(as_mp(L[1][1]) - mpmath.sqrt(mpmath.mpf(3) / 2)) < 1e-70

    def test_reconstruction_residual(self):
        rng = random.Random(13)
        n = 7
        # build SPD as C C^T + n I
        C = [[mpfr(rng.randint(-5, 5)) for _ in range(n)] for _ in range(n)]
        with CTX.workprec():
            G = [[sum(C[i][k] * C[j][k] for k in range(n)) + (n if i == j else 0)
                  for j in range(n)] for i in range(n)]
        M = HermitianMatrix.from_square(G, CTX)
        L = cholesky(M)
        with CTX.workprec():
            resid = mpfr(0)
            for i in range(n):
                for j in range(n):
                    v = sum(L[i][k] * L[j][k] for k in range(min(i, j) + 1)) - G[i][j]
                    resid += v * v
            resid = gmpy2.sqrt(resid)
        assert resid <= M.frobenius() * CTX.eps(16)

    def test_not_positive_definite_reports_dimension(self):
        M = HermitianMatrix([[1, 2], [1]], CTX)  # det < 0
        with pytest.raises(NotPositiveDefiniteError) as exc:
            cholesky(M)
        assert exc.value.dimension == 2


class TestInertia:
    def test_positive_diagonal(self):
        M = diag_matrix([math.pi, math.pi / 2])
        assert ldlt_inertia(M).as_tuple() == (2, 0, 0)

    def test_signed_diagonal_zero_threshold(self):
        M = diag_matrix([1, 0, -1])
        assert ldlt_inertia(M, zero_threshold=0).as_tuple() == (1, 1, 1)

    def test_offdiagonal_block(self):
        M = HermitianMatrix([[0, 1], [0]], CTX)
        assert ldlt_inertia(M).as_tuple() == (1, 0, 1)

    def test_congruence_invariance_vs_eigen_oracle(self):
        rng = random.Random(17)
        n = 5
        for _ in range(4):
            raw = [[rng.randint(-6, 6) for _ in range(j, n)] for j in range(n)]
            M = HermitianMatrix(raw, CTX)
            # oracle: sign counts from the eigensolver
            ev = hermitian_eigen(M).eigenvalues
            tol = M.frobenius() * CTX.eps(CTX.bits - CTX.bits // 3)
            oracle = InertiaTriple(
                sum(1 for v in ev if v > tol),
                sum(1 for v in ev if abs(v) <= tol),
                sum(1 for v in ev if v < -tol),
            )
            assert ldlt_inertia(M).as_tuple() == oracle.as_tuple()
            # congruence with a random invertible C
            with CTX.workprec():
                C = [[mpfr(rng.randint(-3, 3)) for _ in range(n)] for _ in range(n)]
                for i in range(n):
                    C[i][i] += 7  # diagonally dominant, hence invertible
                A = M.full()
                CM = [[sum(C[k][i] * A[k][l] for k in range(n)) for l in range(n)] for i in range(n)]
                CMC = [[sum(CM[i][k] * C[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
            M2 = HermitianMatrix.from_square(CMC, CTX, hermitize=True)
            assert ldlt_inertia(M2).as_tuple() == oracle.as_tuple()

    def test_complex_inertia_matches_eigen(self):
        rng = random.Random(29)
        n = 6
        raw = [[rng.randint(-4, 4) + (rng.randint(-4, 4) * 1j if k > j else 0)
                for k in range(j, n)] for j in range(n)]
        M = HermitianMatrix(raw, CTX)
        ev = hermitian_eigen(M).eigenvalues
        oracle = (sum(1 for v in ev if v > 0), 0, sum(1 for v in ev if v < 0))
        assert ldlt_inertia(M).as_tuple() == oracle


class TestWhiten:
    def test_b_equals_g(self):
        M = HermitianMatrix([[2, 1], [2]], CTX)
        W = whiten(M, M)
        assert rel_err(W.entry(0, 0).real, 1) < 1e-70
        assert abs(float(W.entry(0, 1).real)) < 1e-70
        assert rel_err(W.entry(1, 1).real, 1) < 1e-70

    def test_g_identity_keeps_b(self):
        B = HermitianMatrix([[5, 3], [2]], CTX)
        W = whiten(B, diag_matrix([1, 1]))
        for j in range(2):
            for k in range(2):
                assert rel_err(W.entry(j, k).real, B.entry(j, k).real) < 1e-70

    def test_diagonal_pencil(self):
        W = whiten(diag_matrix([2, 8]), diag_matrix([1, 4]))
        assert rel_err(W.entry(0, 0).real, 2) < 1e-70
        assert rel_err(W.entry(1, 1).real, 2) < 1e-70

    def test_generalized_eigenvalues(self):
        # pencil (B, G): eigs of G^-1 B, checked against mpmath on floats
        B = HermitianMatrix([[3, 1, 0], [2, 1], [4]], CTX)
        G = HermitianMatrix([[4, 1, 0], [3, 1], [5]], CTX)
        got = hermitian_eigen(whiten(B, G)).eigenvalues
        with mpmath.workdps(60):
            Bm = mpmath.matrix([[3, 1, 0], [1, 2, 1], [0, 1, 4]])
            Gm = mpmath.matrix([[4, 1, 0], [1, 3, 1], [0, 1, 5]])
            want = sorted(mpmath.eig(Gm**-1 * Bm, left=False, right=False),
                          key=lambda z: mpmath.re(z))
            for g, w in zip(got, want):
                assert abs(as_mp(g) - mpmath.re(w)) < mpmath.mpf("1e-45")

    def test_context_promotion(self):
        hi = PrecisionContext(bits=512)
        B = HermitianMatrix([[5, 3], [2]], CTX)
        G = HermitianMatrix([[2, 0], [2]], hi)
        assert whiten(B, G).ctx.bits == 512


class TestPrecisionEscalation:
    def test_doubling_precision_is_stable(self):
        rng = random.Random(41)
        n = 9
        raw = [[rng.randint(-8, 8) for _ in range(j, n)] for j in range(n)]
        lo = PrecisionContext(bits=192)
        hi = PrecisionContext(bits=384)
        ev_lo = hermitian_eigen(HermitianMatrix(raw, lo)).eigenvalues
        ev_hi = hermitian_eigen(HermitianMatrix(raw, hi)).eigenvalues
        scale = HermitianMatrix(raw, lo).frobenius()
        for a, b in zip(ev_lo, ev_hi):
            assert abs(as_mp(a) - as_mp(b)) <= as_mp(scale) * mpmath.mpf(2) ** (-96)

    def test_policy_floor_and_growth(self):
        assert PrecisionContext.for_dimension(3).bits == 192
        c41 = PrecisionContext.for_dimension(41)
        assert c41.bits == max(192, math.ceil(4.5 * 41 * math.log(41) / math.log(2)) + 64)

    def test_merge_promotes(self):
        a, b = PrecisionContext(bits=192), PrecisionContext(bits=320)
        assert a.merge(b).bits == 320

    def test_decimal_roundtrip(self):
        x = CTX.real(1) / 7
        s = CTX.to_decimal(x)
        assert CTX.parse_decimal(s) == x
