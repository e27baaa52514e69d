import math

import gmpy2
import pytest
from gmpy2 import mpfr, mpq

from fockspec.bigarith import PrecisionContext
from fockspec.errors import ConfigError, PreconditionError, UnsupportedArrangementError
from fockspec.symbols import (
    Disc,
    RegionSet,
    Symbol,
    capacity,
    detect_swap_symmetry,
    green_disc_complement,
    hulls_disjoint,
    potential_constants,
)

CTX = PrecisionContext(bits=256)


def sym(*triples):
    return Symbol.from_terms(*triples)


class TestEvaluate:
    def test_single_disc(self):
        v = sym((0, 1, 1)).evaluate(0.5, CTX)
        assert float(v) == 1.0

    def test_additive_weights(self):
        s = sym((0, 2, 1), (0, 1, -2))
        assert float(s.evaluate(0.5, CTX)) == -1.0
        assert float(s.evaluate(1.5, CTX)) == 1.0

    def test_outside_support(self):
        assert float(sym((0, 1, 1)).evaluate(3.0, CTX)) == 0.0

    def test_additivity_over_terms_on_grid(self):
        a = sym((0, 1, 1))
        b = sym(((1, 1), "1.5", "-0.5"))
        both = sym((0, 1, 1), ((1, 1), "1.5", "-0.5"))
        for i in range(40):
            z = complex(math.cos(i) * 2, math.sin(1.7 * i) * 2)
            assert float(both.evaluate(z, CTX)) == float(a.evaluate(z, CTX)) + float(
                b.evaluate(z, CTX)
            )


class TestDecompose:
    def test_disjoint_pair(self):
        plus, minus, suppm, bounds = sym((0, 1, 1), (4, 1, -1)).decompose()
        assert len(plus) == 1 and len(minus) == 1
        assert plus.cells[0].outer.same_disc(Disc.make(0, 1))
        assert minus.cells[0].outer.same_disc(Disc.make(4, 1))
        assert bounds.tau_plus == 1 == bounds.sigma_plus
        assert bounds.tau_minus == 1 == bounds.sigma_minus

    def test_laminar_annulus(self):
        plus, minus, _, _ = sym((0, 2, 1), (0, 1, -2)).decompose()
        # positive part is the annulus 1 <= |z| <= 2, negative the core
        assert len(plus) == 1
        assert plus.cells[0].outer.same_disc(Disc.make(0, 2))
        assert len(plus.cells[0].holes) == 1
        assert minus.cells[0].outer.same_disc(Disc.make(0, 1))

    def test_positive_only(self):
        plus, minus, suppm, bounds = sym((0, 1, 3)).decompose()
        assert minus.is_empty() and suppm.is_empty()
        assert bounds.sigma_plus == 3 == bounds.tau_plus
        assert bounds.tau_minus is None

    def test_general_overlap_rejected(self):
        with pytest.raises(UnsupportedArrangementError) as exc:
            sym((0, 1, 1), (1, 1, 1)).cells()
        assert len(exc.value.pair) == 2

    def test_resynthesis_on_grid(self):
        s = sym((0, 2, 1), (0, "0.5", -2), (5, 1, "1.5"))
        plus, minus, _, _ = s.decompose()
        for i in range(100):
            z = complex(-3 + 0.09 * i + 0.013, 0.11 * ((i * 7) % 13) - 0.7)
            vp = 1.0 if plus.contains_point(gmpy2.mpc(z), CTX) else 0.0
            vm = 1.0 if minus.contains_point(gmpy2.mpc(z), CTX) else 0.0
            v = float(s.evaluate(z, CTX))
            if vp:
                assert v > 0
            elif vm:
                assert v < 0
            else:
                assert v == 0

    def test_tilt_scales_signwise(self):
        s = sym((0, 1, 1), (4, 1, -1))
        up, down = s.epsilon_tilt("0.1")
        w = dict()
        for d, wt in up.terms:
            w[float(d.center_re)] = wt
        assert w[0.0] == mpq(11, 10)
        assert w[4.0] == mpq(-9, 10)
        w = dict()
        for d, wt in down.terms:
            w[float(d.center_re)] = wt
        assert w[0.0] == mpq(9, 10)
        assert w[4.0] == mpq(-11, 10)

    def test_tilt_nonnegative_symbol(self):
        s = sym((0, 1, 2))
        up, down = s.epsilon_tilt("0.25")
        assert up.terms[0][1] == mpq(5, 2)
        assert down.terms[0][1] == mpq(3, 2)

    def test_tilt_laminar_cellwise(self):
        # annulus value 1, core value -1: tilts act on cell values, not weights
        s = sym((0, 2, 1), (0, 1, -2))
        up, _ = s.epsilon_tilt("0.1")
        vals = {float(c.outer.radius): c.value for c in up.cells()}
        assert vals[2.0] == mpq(11, 10)
        assert vals[1.0] == mpq(-9, 10)

    def test_tilt_epsilon_range(self):
        with pytest.raises(PreconditionError):
            sym((0, 1, 1)).epsilon_tilt("1.5")

    def test_sup_abs_and_radius(self):
        s = sym((0, 2, 1), (0, "0.5", -2))
        assert s.sup_abs() == 1
        r = s.support_radius(CTX)
        assert float(r) == 2.0


def exact_hull_gap_oracle(discs_a, discs_b, samples=20000):
    """Brute-force oracle: distance between convex hulls of disc unions via
    dense direction sampling (K -> infinity limit of the support method)."""
    best = -1e18
    for i in range(samples):
        t = 2 * math.pi * i / samples
        cu, su = math.cos(t), math.sin(t)
        ha = max(c[0] * cu + c[1] * su + r for (c, r) in discs_a)
        hb = max(-(c[0] * cu + c[1] * su) + r for (c, r) in discs_b)
        best = max(best, -ha - hb)
    return best


class TestHulls:
    def test_collinear_pair(self):
        ok, gap = hulls_disjoint(Disc.make(0, 1), Disc.make(4, 1), CTX)
        assert ok
        assert 1.999 < float(gap) <= 2.0

    def test_overlapping(self):
        ok, gap = hulls_disjoint(Disc.make(0, 1), Disc.make(1, 1), CTX)
        assert not ok and float(gap) == 0.0

    def test_three_disc_oracle(self):
        # oracle value: the exact hull distance here is 2.0 (stadium at x=-1
        # versus disc edge at x=1); frozen from the dense-direction oracle
        oracle = exact_hull_gap_oracle(
            [((-2, 0), 1.0), ((-2, 2), 1.0)], [((2, 0), 1.0)]
        )
        assert abs(oracle - 2.0) < 1e-6
        region_a = RegionSet([c for c in sym((-2, 1, 1), ((-2, 2), 1, 1)).cells()])
        ok, gap = hulls_disjoint(region_a, Disc.make(2, 1), CTX)
        assert ok
        assert abs(float(gap) - oracle) <= 0.05 * oracle


class TestGreen:
    def test_log_e(self):
        v = green_disc_complement(Disc.make(0, 1), math.e, CTX)
        assert abs(float(v) - 1.0) < 1e-60

    def test_boundary_zero(self):
        assert float(green_disc_complement(Disc.make(0, 1), 1.0, CTX)) == 0.0

    def test_shifted(self):
        v = green_disc_complement(Disc.make(1, 2), 5.0, CTX)
        assert abs(float(v) - math.log(2)) < 1e-15

    def test_interior_rejected(self):
        with pytest.raises(PreconditionError):
            green_disc_complement(Disc.make(0, 1), 0.5, CTX)

    def test_log_normalization_at_infinity(self):
        # g(z) - log|z| -> -log(radius) along a ray, checked at |z| = 1e6
        d = Disc.make((3, 1), "0.7")
        z = 1e6
        v = green_disc_complement(d, z, CTX)
        with CTX.workprec():
            diff = v - gmpy2.log(mpfr(z))
        assert abs(float(diff) - (-math.log(0.7))) < 1e-5


def potential_oracle_boundary_sampling(cp, rp, cm, rm, samples=4000):
    """inf/sup of the single-disc Green's functions by dense boundary sampling."""
    sup_gp = -1e18
    inf_gm = 1e18
    for i in range(samples):
        t = 2 * math.pi * i / samples
        zm = complex(cm + rm * math.cos(t), rm * math.sin(t))
        sup_gp = max(sup_gp, math.log(abs(zm - cp) / rp))
        zp = complex(cp + rp * math.cos(t), rp * math.sin(t))
        inf_gm = min(inf_gm, math.log(abs(zp - cm) / rm))
    return sup_gp, inf_gm


class TestPotentialConstants:
    def test_separated_pair_closed_form(self):
        pd = potential_constants(Disc.make(0, 1), Disc.make(4, 1), CTX)
        sup_gp, inf_gm = potential_oracle_boundary_sampling(0, 1, 4, 1)
        assert abs(float(pd.a_plus) - math.log(5)) < 1e-30
        assert abs(float(pd.a_minus) - math.log(3)) < 1e-30
        assert abs(float(pd.a_plus) - sup_gp) < 1e-5
        assert abs(float(pd.a_minus) - inf_gm) < 1e-5
        assert float(pd.b_plus) > float(pd.a_plus)
        assert 0 < float(pd.b_minus) < float(pd.a_minus)

    def test_symmetric_pair_swap(self):
        a = potential_constants(Disc.make(-2, 1), Disc.make(2, 1), CTX)
        b = potential_constants(Disc.make(2, 1), Disc.make(-2, 1), CTX)
        assert float(a.a_plus) == float(b.a_plus)
        assert abs(float(a.a_plus) - math.log(5)) < 1e-30
        assert abs(float(a.a_minus) - math.log(3)) < 1e-30

    def test_scale_invariance(self):
        a = potential_constants(Disc.make(0, 1), Disc.make(4, 1), CTX)
        b = potential_constants(Disc.make(0, 2), Disc.make(8, 2), CTX)
        assert abs(float(a.a_plus) - float(b.a_plus)) < 1e-60
        assert abs(float(a.a_minus) - float(b.a_minus)) < 1e-60

    def test_overlapping_rejected(self):
        with pytest.raises(PreconditionError):
            potential_constants(Disc.make(0, 1), Disc.make(1, 1), CTX)


def equilibrium_energy_oracle(discs, M=2048):
    """Independent oracle: minimize the discrete log-energy of equal point
    charges over mass splits between components (two-component case)."""
    import numpy as np

    (c1, r1), (c2, r2) = discs
    best = None
    for frac in np.linspace(0.3, 0.7, 17):
        m1 = max(8, int(M * frac))
        m2 = max(8, M - m1)
        th1 = 2 * np.pi * np.arange(m1) / m1
        th2 = 2 * np.pi * np.arange(m2) / m2
        p = np.concatenate(
            [
                np.stack([c1 + r1 * np.cos(th1), r1 * np.sin(th1)], 1),
                np.stack([c2 + r2 * np.cos(th2), r2 * np.sin(th2)], 1),
            ]
        )
        w = np.concatenate([np.full(m1, frac / m1), np.full(m2, (1 - frac) / m2)])
        d = np.sqrt(((p[:, None, :] - p[None, :, :]) ** 2).sum(-1))
        np.fill_diagonal(d, 1.0)
        E = -(w[:, None] * w[None, :] * np.log(d)).sum()
        # diagonal correction: self-energy of an arc
        arc1 = 2 * np.pi * r1 / m1
        arc2 = 2 * np.pi * r2 / m2
        E += (w[:m1] ** 2 * -np.log(arc1 / 4)).sum() + (w[m1:] ** 2 * -np.log(arc2 / 4)).sum()
        if best is None or E < best:
            best = E
    return math.exp(-best)


class TestCapacity:
    def test_single_disc_exact(self):
        lo, hi = capacity(Disc.make(7, 3), CTX)
        assert float(lo) == 3.0 == float(hi)

    def test_two_disc_bracket(self):
        lo, hi = capacity([Disc.make(0, 1), Disc.make(5, 1)], CTX, points=1024)
        assert float(lo) >= 1.0
        assert float(hi) <= 3.5
        oracle = equilibrium_energy_oracle([(0.0, 1.0), (5.0, 1.0)], M=2048)
        # oracle ~ sqrt(5); the bracket must contain it
        assert float(lo) - 1e-9 <= oracle <= float(hi) + 1e-9

    def test_nested_uses_outer_boundary(self):
        region = RegionSet(sym((0, 2, 1), ("0.5", "0.99", 1)).cells())
        lo, hi = capacity(region, CTX)
        assert float(lo) == 2.0 == float(hi)

    def test_monotonicity(self):
        lo1, hi1 = capacity([Disc.make(0, 1)], CTX)
        lo2, hi2 = capacity([Disc.make(0, 1), Disc.make(5, 1)], CTX, points=512)
        assert float(hi1) <= float(hi2) + 1e-12


class TestSwapSymmetry:
    def test_point_reflection(self):
        m = detect_swap_symmetry(Disc.make(-2, 1), Disc.make(2, 1), CTX)
        assert m is not None
        # involution on test points
        for z in (0.3 + 0.1j, -1.0 + 2.0j):
            w = m.apply(m.apply(z, CTX), CTX)
            assert abs(complex(w) - z) < 1e-70

    def test_radii_mismatch_absent(self):
        assert detect_swap_symmetry(Disc.make(0, 1), Disc.make(4, 2), CTX) is None

    def test_offset_mirror(self):
        m = detect_swap_symmetry(Disc.make((-2, 1), 1), Disc.make((2, 1), 1), CTX)
        assert m is not None
        img = m.apply_disc(Disc.make((-2, 1), 1))
        assert img.same_disc(Disc.make((2, 1), 1))
        back = m.apply_disc(img)
        assert back.same_disc(Disc.make((-2, 1), 1))

    def test_rotation_about_common_centroid(self):
        a = [Disc.make((1, 0), "0.25"), Disc.make((-1, 0), "0.25")]
        b = [Disc.make((0, 1), "0.25"), Disc.make((0, -1), "0.25")]
        m = detect_swap_symmetry(a, b, CTX)
        assert m is not None
        imgs = [m.apply_disc(d) for d in a]
        assert any(i.same_disc(b[0]) for i in imgs)


class TestJson:
    def test_roundtrip(self):
        s = sym((0, 2, 1), ((0, "0.25"), "0.5", "-2"))
        import json as _json

        s2 = Symbol.from_json(_json.dumps(s.to_json_obj()))
        assert len(s2.terms) == 2
        assert s2.sup_abs() == s.sup_abs()

    def test_malformed_rejected(self):
        with pytest.raises(ConfigError):
            Symbol.from_json("{not json")

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError):
            Symbol.from_json('{"terms": [{"center": ["0","0"], "radius": "1", "weight": "1", "extra": 1}]}')

    def test_decimal_strings_exact(self):
        s = Symbol.from_json('{"terms": [{"center": ["0.1", "0"], "radius": "0.3", "weight": "1"}]}')
        assert s.terms[0][0].center_re == mpq(1, 10)
        assert s.terms[0][0].radius == mpq(3, 10)

    def test_zero_weight_merge_rejected(self):
        with pytest.raises(PreconditionError):
            sym((0, 1, 1), (0, 1, -1))
