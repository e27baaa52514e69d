"""Disc-based symbols and their potential theory.

A symbol is a finite sum of weighted open-disc indicators.  Geometry
(centers, radii, weights) is kept as exact rationals, so arrangement
classification (disjoint / laminar / general) is decided exactly and the
derived cell values, supports and tilts carry no rounding at all.  Numeric
quantities (Green's functions, capacity brackets, hull gaps) are produced
on demand under a :class:`~fockspec.bigarith.PrecisionContext`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpq

from .bigarith import DEFAULT_CONTEXT, PrecisionContext
from .errors import ConfigError, PreconditionError, UnsupportedArrangementError


def _q(value) -> mpq:
    """Exact rational from a decimal string / int / Fraction."""
    if isinstance(value, mpq):
        return value
    if isinstance(value, int):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, float):
        value = repr(value)  # decimal literal semantics
    if isinstance(value, str):
        f = Fraction(value.strip())
        return mpq(f.numerator, f.denominator)
    raise ConfigError(f"cannot parse exact number from {value!r}")


@dataclass(frozen=True)
class Disc:
    """Open disc |z - center| < radius with exact rational data."""

    center_re: mpq
    center_im: mpq
    radius: mpq

    def __post_init__(self):
        if self.radius <= 0:
            raise PreconditionError(f"disc radius must be positive, got {self.radius}")

    @classmethod
    def make(cls, center, radius) -> "Disc":
        if isinstance(center, (tuple, list)):
            re, im = center
        elif isinstance(center, complex):
            re, im = center.real, center.imag
        else:
            re, im = center, 0
        return cls(_q(re), _q(im), _q(radius))

    def center(self, ctx: PrecisionContext):
        return ctx.complex(mpfr(self.center_re), mpfr(self.center_im))

    def radius_value(self, ctx: PrecisionContext):
        with ctx.workprec():
            return mpfr(self.radius)

    def reach_value(self, ctx: PrecisionContext):
        with ctx.workprec():
            c = gmpy2.sqrt(mpfr(self.center_re) ** 2 + mpfr(self.center_im) ** 2)
            return c + mpfr(self.radius)

    def contains_point(self, z, ctx: PrecisionContext) -> bool:
        with ctx.workprec():
            dz = z - self.center(ctx)
            return gmpy2.norm(dz) < mpfr(self.radius) ** 2

    def _dist2(self, other: "Disc") -> mpq:
        return (self.center_re - other.center_re) ** 2 + (self.center_im - other.center_im) ** 2

    def disjoint_from(self, other: "Disc") -> bool:
        return self._dist2(other) >= (self.radius + other.radius) ** 2

    def inside(self, other: "Disc") -> bool:
        """Open-disc containment self ⊆ other (tangency counts as inside)."""
        if self.radius > other.radius:
            return False
        return self._dist2(other) <= (other.radius - self.radius) ** 2

    def same_disc(self, other: "Disc") -> bool:
        return (self.center_re == other.center_re and self.center_im == other.center_im
                and self.radius == other.radius)

    def __str__(self):
        return f"D({float(self.center_re)}{float(self.center_im):+}i; r={float(self.radius)})"


@dataclass(frozen=True)
class Cell:
    """One constant-value cell of a laminar arrangement: outer disc minus holes."""

    outer: Disc
    holes: tuple
    value: mpq

    def signed_discs(self):
        return [(self.outer, 1)] + [(h, -1) for h in self.holes]


@dataclass(frozen=True)
class SymbolBounds:
    """Essential bounds of the weight on each sign part (None if side absent)."""

    tau_plus: mpq | None
    sigma_plus: mpq | None
    tau_minus: mpq | None
    sigma_minus: mpq | None


@dataclass(frozen=True)
class PotentialData:
    """Green's-function constants of a separated disc pair, with chosen margins."""

    a_plus: mpfr
    a_minus: mpfr
    b_plus: mpfr
    b_minus: mpfr

    def __post_init__(self):
        if not (self.a_plus > 0 and self.a_minus > 0):
            raise PreconditionError("potential constants require separated hulls (a± > 0)")
        if not (self.b_plus > self.a_plus and 0 < self.b_minus < self.a_minus):
            raise PreconditionError("margins must satisfy b+ > a+ and 0 < b- < a-")


class RegionSet:
    """Finite union of laminar cells (discs/annuli as signed disc lists)."""

    def __init__(self, cells):
        self.cells = list(cells)

    @classmethod
    def from_disc(cls, disc: Disc):
        return cls([Cell(disc, (), mpq(1))])

    @property
    def classification(self) -> str:
        if not self.cells:
            return "pairwise-disjoint"
        if any(c.holes for c in self.cells):
            return "laminar"
        outers = [c.outer for c in self.cells]
        for i in range(len(outers)):
            for j in range(i + 1, len(outers)):
                if not outers[i].disjoint_from(outers[j]):
                    return "laminar"
        return "pairwise-disjoint"

    def is_empty(self) -> bool:
        return not self.cells

    def signed_discs(self):
        out = []
        for c in self.cells:
            out.extend(c.signed_discs())
        return out

    def outer_discs(self):
        """Maximal discs: the filled outer boundary of the region
        (capacity and convex hulls only see these, by monotonicity and
        the outer-boundary property)."""
        outs = [c.outer for c in self.cells]
        maximal = []
        for d in outs:
            if any(d is not e and d.inside(e) and not d.same_disc(e) for e in outs):
                continue
            if any(d.same_disc(m) for m in maximal):
                continue
            maximal.append(d)
        return maximal

    def single_outer_disc(self) -> Disc | None:
        outs = self.outer_discs()
        return outs[0] if len(outs) == 1 else None

    def support_radius(self, ctx: PrecisionContext):
        """max |z| over the region (closure), as an mpfr upper value."""
        if self.is_empty():
            raise PreconditionError("empty region has no support radius")
        with ctx.workprec():
            return max(c.outer.reach_value(ctx) for c in self.cells)

    def contains_point(self, z, ctx: PrecisionContext) -> bool:
        for c in self.cells:
            if c.outer.contains_point(z, ctx) and not any(
                h.contains_point(z, ctx) for h in c.holes
            ):
                return True
        return False

    def __len__(self):
        return len(self.cells)


class Symbol:
    """V(z) = sum of weights of the open discs containing z."""

    def __init__(self, terms):
        merged: list[tuple[Disc, mpq]] = []
        for disc, weight in terms:
            w = _q(weight)
            for i, (d0, w0) in enumerate(merged):
                if disc.same_disc(d0):
                    merged[i] = (d0, w0 + w)
                    break
            else:
                merged.append((disc, w))
        merged = [(d, w) for d, w in merged if w != 0]
        if not merged:
            raise PreconditionError("symbol must have at least one nonzero-weight term")
        self.terms = merged

    @classmethod
    def from_terms(cls, *triples):
        """from_terms((center, radius, weight), ...) with decimal-exact values."""
        return cls([(Disc.make(c, r), w) for (c, r, w) in triples])

    @classmethod
    def from_json_obj(cls, obj):
        if not isinstance(obj, dict) or set(obj) != {"terms"}:
            raise ConfigError("symbol JSON must be exactly {\"terms\": [...]}")
        terms = []
        if not isinstance(obj["terms"], list) or not obj["terms"]:
            raise ConfigError("symbol JSON needs a nonempty terms list")
        for i, t in enumerate(obj["terms"]):
            if not isinstance(t, dict) or set(t) != {"center", "radius", "weight"}:
                raise ConfigError(
                    f"term {i} must have exactly the keys center, radius, weight"
                )
            c = t["center"]
            if not isinstance(c, list) or len(c) != 2:
                raise ConfigError(f"term {i}: center must be [x, y]")
            try:
                terms.append((Disc.make((c[0], c[1]), t["radius"]), _q(t["weight"])))
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"term {i}: {exc}") from exc
        return cls(terms)

    @classmethod
    def from_json(cls, text: str):
        try:
            obj = json.loads(text, parse_float=str, parse_int=str)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed symbol JSON at line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
        return cls.from_json_obj(obj)

    def to_json_obj(self):
        def dec(q):
            return str(Fraction(q.numerator, q.denominator)) if q.denominator != 1 else str(q.numerator)
        return {
            "terms": [
                {
                    "center": [dec(d.center_re), dec(d.center_im)],
                    "radius": dec(d.radius),
                    "weight": dec(w),
                }
                for d, w in self.terms
            ]
        }

    def discs(self):
        return [d for d, _ in self.terms]

    def evaluate(self, z, ctx: PrecisionContext = DEFAULT_CONTEXT):
        """Pointwise value; open-disc convention on boundaries."""
        with ctx.workprec():
            zz = gmpy2.mpc(z)
            total = mpq(0)
            for d, w in self.terms:
                if d.contains_point(zz, ctx):
                    total += w
            return mpfr(total)

    def classify_arrangement(self) -> str:
        discs = self.discs()
        kind = "pairwise-disjoint"
        for i in range(len(discs)):
            for j in range(i + 1, len(discs)):
                a, b = discs[i], discs[j]
                if a.disjoint_from(b):
                    continue
                if a.inside(b) or b.inside(a):
                    kind = "laminar"
                    continue
                return "general"
        return kind

    def _forest(self):
        """Laminar forest: for each disc its parent (smallest strict container)."""
        discs = self.discs()
        parents = []
        for i, d in enumerate(discs):
            best = None
            for j, e in enumerate(discs):
                if i == j or not d.inside(e) or d.same_disc(e):
                    continue
                if best is None or e.radius < discs[best].radius:
                    best = j
            parents.append(best)
        return discs, parents

    def cells(self):
        """Constant-value cells of the arrangement (requires disjoint/laminar)."""
        if self.classify_arrangement() == "general":
            discs = self.discs()
            for i in range(len(discs)):
                for j in range(i + 1, len(discs)):
                    a, b = discs[i], discs[j]
                    if not (a.disjoint_from(b) or a.inside(b) or b.inside(a)):
                        raise UnsupportedArrangementError(a, b)
        discs, parents = self._forest()
        weights = [w for _, w in self.terms]
        values = []
        for i in range(len(discs)):
            v = weights[i]
            p = parents[i]
            while p is not None:
                v += weights[p]
                p = parents[p]
            values.append(v)
        cells = []
        for i, d in enumerate(discs):
            holes = tuple(discs[j] for j in range(len(discs)) if parents[j] == i)
            cells.append(Cell(d, holes, values[i]))
        return cells

    def decompose(self):
        """(supp V+, supp V-, supp_-(V-), bounds); for piecewise-constant disc
        symbols supp_-(V-) is the closure of {V < 0}, identical to supp V-."""
        cells = self.cells()
        plus = RegionSet([c for c in cells if c.value > 0])
        minus = RegionSet([c for c in cells if c.value < 0])
        pos_vals = [c.value for c in cells if c.value > 0]
        neg_vals = [-c.value for c in cells if c.value < 0]
        bounds = SymbolBounds(
            tau_plus=min(pos_vals) if pos_vals else None,
            sigma_plus=max(pos_vals) if pos_vals else None,
            tau_minus=min(neg_vals) if neg_vals else None,
            sigma_minus=max(neg_vals) if neg_vals else None,
        )
        return plus, minus, minus, bounds

    def sup_abs(self) -> mpq:
        """Exact sup |V| (max over cells, zero-value cells ignored)."""
        return max(abs(c.value) for c in self.cells())

    def support_radius(self, ctx: PrecisionContext = DEFAULT_CONTEXT):
        cells = [c for c in self.cells() if c.value != 0]
        if not cells:
            raise PreconditionError("symbol support is empty")
        with ctx.workprec():
            return max(c.outer.reach_value(ctx) for c in cells)

    def scaled(self, factor) -> "Symbol":
        f = _q(factor)
        return Symbol([(d, w * f) for d, w in self.terms])

    def negated(self) -> "Symbol":
        return Symbol([(d, -w) for d, w in self.terms])

    def epsilon_tilt(self, eps):
        """(V + eps|V|, V - eps|V|) as new weighted-disc symbols on the same
        arrangement: each cell value v becomes v(1 +/- eps sign v)."""
        e = _q(eps)
        if not (0 < e < 1):
            raise PreconditionError(f"tilt parameter must lie in (0,1), got {e}")
        cells = self.cells()
        discs, parents = self._forest()
        cell_by_disc = {id(discs[i]): cells[i] for i in range(len(discs))}

        def tilted_weights(sign):
            tilted = []
            for i in range(len(discs)):
                v = cells[i].value
                tv = v + sign * e * abs(v)
                pv = mpq(0)
                if parents[i] is not None:
                    p = cells[parents[i]].value
                    pv = p + sign * e * abs(p)
                tilted.append(tv - pv)
            return tilted

        out = []
        for sign in (1, -1):
            ws = tilted_weights(sign)
            terms = [(discs[i], ws[i]) for i in range(len(discs)) if ws[i] != 0]
            out.append(Symbol(terms))
        return out[0], out[1]

    def __str__(self):
        return " + ".join(f"{float(w):g}*chi[{d}]" for d, w in self.terms)


def green_disc_complement(disc: Disc, z, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """Green's function of the disc complement: log(|z - center| / radius)."""
    with ctx.workprec():
        zz = gmpy2.mpc(z)
        d = gmpy2.sqrt(gmpy2.norm(zz - disc.center(ctx)))
        r = mpfr(disc.radius)
        if d < r:
            raise PreconditionError(f"point {z} lies inside {disc}")
        return gmpy2.log(d / r)


def hulls_disjoint(region_a, region_b, ctx: PrecisionContext = DEFAULT_CONTEXT,
                   directions: int = 256):
    """(separated, gap): gap is a certified lower bound on the distance
    between the convex hulls, from support functions in sampled directions
    (every sampled direction yields a true lower bound; a golden-section
    refinement around the best sample tightens it)."""
    discs_a = _as_region(region_a).outer_discs()
    discs_b = _as_region(region_b).outer_discs()
    with ctx.workprec():
        def sep(theta):
            # inf_B <b,u> - sup_A <a,u> with u = (cos theta, sin theta)
            cu, su = gmpy2.cos(theta), gmpy2.sin(theta)
            ha = max(mpfr(d.center_re) * cu + mpfr(d.center_im) * su + mpfr(d.radius)
                     for d in discs_a)
            hb = max(-(mpfr(d.center_re) * cu + mpfr(d.center_im) * su) + mpfr(d.radius)
                     for d in discs_b)
            return -hb - ha

        two_pi = 2 * gmpy2.const_pi()
        best_t, best = mpfr(0), sep(mpfr(0))
        for i in range(1, directions):
            t = two_pi * i / directions
            v = sep(t)
            if v > best:
                best_t, best = t, v
        # golden-section polish inside the bracketing samples
        lo = best_t - two_pi / directions
        hi = best_t + two_pi / directions
        phi = (gmpy2.sqrt(mpfr(5)) - 1) / 2
        a, b = lo, hi
        c1 = b - phi * (b - a)
        c2 = a + phi * (b - a)
        f1, f2 = sep(c1), sep(c2)
        for _ in range(60):
            if f1 < f2:
                a, c1, f1 = c1, c2, f2
                c2 = a + phi * (b - a)
                f2 = sep(c2)
            else:
                b, c2, f2 = c2, c1, f1
                c1 = b - phi * (b - a)
                f1 = sep(c1)
        best = max(best, f1, f2)
        if best > 0:
            return True, best
        return False, mpfr(0)


def _as_region(obj) -> RegionSet:
    if isinstance(obj, RegionSet):
        return obj
    if isinstance(obj, Disc):
        return RegionSet.from_disc(obj)
    if isinstance(obj, (list, tuple)):
        return RegionSet([Cell(d, (), mpq(1)) for d in obj])
    raise PreconditionError(f"cannot interpret {obj!r} as a region")


def potential_constants(omega_plus, omega_minus,
                        ctx: PrecisionContext = DEFAULT_CONTEXT,
                        margin: float | str = "0.05") -> PotentialData:
    """Closed-form Green's constants for a separated pair of (outer) discs:
    a+ = sup over Omega- of g+, a- = inf over Omega+ of g-."""
    da = _as_region(omega_plus).single_outer_disc()
    db = _as_region(omega_minus).single_outer_disc()
    if da is None or db is None:
        raise PreconditionError("potential constants need single-outer-disc regions")
    sep, _gap = hulls_disjoint(da, db, ctx)
    if not sep:
        raise PreconditionError("discs are not disjoint: potential constants undefined")
    m = _q(margin)
    if not (0 < m < 1):
        raise PreconditionError("margin must lie in (0,1)")
    with ctx.workprec():
        d = gmpy2.sqrt(mpfr((da.center_re - db.center_re) ** 2 + (da.center_im - db.center_im) ** 2))
        rp, rm = mpfr(da.radius), mpfr(db.radius)
        a_plus = gmpy2.log((d + rm) / rp)
        a_minus = gmpy2.log((d - rp) / rm)
        mf = mpfr(m)
        return PotentialData(
            a_plus=a_plus,
            a_minus=a_minus,
            b_plus=a_plus * (1 + mf),
            b_minus=a_minus * (1 - mf),
        )


def capacity(region, ctx: PrecisionContext = DEFAULT_CONTEXT,
             points: int = 1024) -> tuple:
    """(lower, upper) bracket for the logarithmic capacity.

    The region is first reduced to its filled maximal discs (capacity sees
    only the outer boundary).  A single disc is exact.  Unions get: lower =
    the largest member disc (monotonicity), upper = a Richardson-extrapolated
    discrete equilibrium energy on the boundary circles, padded by the
    observed extrapolation spread and clamped by an enclosing-disc radius.
    """
    region = _as_region(region)
    if region.is_empty():
        raise PreconditionError("capacity of an empty region")
    outs = region.outer_discs()
    with ctx.workprec():
        if len(outs) == 1:
            r = mpfr(outs[0].radius)
            return r, r
        lower = max(mpfr(d.radius) for d in outs)
        # enclosing disc centered at the centroid of centers
        cx = sum(mpfr(d.center_re) for d in outs) / len(outs)
        cy = sum(mpfr(d.center_im) for d in outs) / len(outs)
        enclose = max(
            gmpy2.sqrt((mpfr(d.center_re) - cx) ** 2 + (mpfr(d.center_im) - cy) ** 2)
            + mpfr(d.radius)
            for d in outs
        )
        gammas = []
        for m in (points // 4, points // 2, points):
            gammas.append(_equilibrium_robin(outs, m))
        extrap = 2 * gammas[2] - gammas[1]
        spread = abs(gammas[2] - gammas[1]) + abs(gammas[1] - gammas[0])
        cap_est = math.exp(-extrap)
        upper = mpfr(cap_est + 3 * spread * cap_est + 1e-9)
        upper = min(upper, enclose)
        upper = max(upper, lower)
        return lower, upper


def _equilibrium_robin(discs, total_points: int) -> float:
    """Robin constant of the discrete equilibrium problem on the boundary
    circles: solve A mu = gamma 1, sum mu = 1 with log-kernel and arc-length
    self-interaction, in float64 (capacity feeds inequalities only)."""
    radii = np.array([float(d.radius) for d in discs])
    alloc = np.maximum((total_points * radii / radii.sum()).astype(int), 32)
    pts = []
    self_d = []
    for d, m in zip(discs, alloc):
        th = 2 * np.pi * np.arange(m) / m
        r = float(d.radius)
        pts.append(np.stack([float(d.center_re) + r * np.cos(th),
                             float(d.center_im) + r * np.sin(th)], axis=1))
        arc = 2 * np.pi * r / m
        self_d.extend([-np.log(arc / 4.0)] * m)
    P = np.concatenate(pts)
    n = len(P)
    diff = P[:, None, :] - P[None, :, :]
    dist = np.sqrt((diff**2).sum(-1))
    np.fill_diagonal(dist, 1.0)
    A = -np.log(dist)
    np.fill_diagonal(A, self_d)
    K = np.zeros((n + 1, n + 1))
    K[:n, :n] = A
    K[:n, n] = -1.0
    K[n, :n] = 1.0
    rhs = np.zeros(n + 1)
    rhs[n] = 1.0
    sol = np.linalg.solve(K, rhs)
    return float(sol[n])


@dataclass(frozen=True)
class Motion:
    """Euclidean motion z -> u*z + c or u*conj(z) + c with |u| = 1,
    stored as exact rational components."""

    u_re: mpq
    u_im: mpq
    c_re: mpq
    c_im: mpq
    conjugate: bool

    def theta(self, ctx: PrecisionContext = DEFAULT_CONTEXT):
        with ctx.workprec():
            return gmpy2.atan2(mpfr(self.u_im), mpfr(self.u_re))

    def apply(self, z, ctx: PrecisionContext = DEFAULT_CONTEXT):
        with ctx.workprec():
            zz = gmpy2.mpc(z)
            if self.conjugate:
                zz = zz.conjugate()
            u = ctx.complex(mpfr(self.u_re), mpfr(self.u_im))
            c = ctx.complex(mpfr(self.c_re), mpfr(self.c_im))
            return u * zz + c

    def apply_disc(self, d: Disc) -> Disc:
        zr, zi = d.center_re, d.center_im
        if self.conjugate:
            zi = -zi
        return Disc(self.u_re * zr - self.u_im * zi + self.c_re,
                    self.u_im * zr + self.u_re * zi + self.c_im,
                    d.radius)


def detect_swap_symmetry(omega_plus, omega_minus,
                         ctx: PrecisionContext = DEFAULT_CONTEXT) -> Motion | None:
    """A Euclidean motion phi with phi(Omega+) = Omega- and phi(Omega-) =
    Omega+, if the disc configurations admit one.  Candidates come from the
    centroids and matched disc pairs; verification is exact on the rational
    disc data."""
    A = _as_region(omega_plus).outer_discs()
    B = _as_region(omega_minus).outer_discs()
    if len(A) != len(B):
        return None
    if sorted(d.radius for d in A) != sorted(d.radius for d in B):
        return None
    ga = (sum(d.center_re for d in A) / len(A), sum(d.center_im for d in A) / len(A))
    gb = (sum(d.center_re for d in B) / len(B), sum(d.center_im for d in B) / len(B))

    candidates = []
    dre, dim = ga[0] - gb[0], ga[1] - gb[1]
    if (dre, dim) != (0, 0):
        # distinct centroids force u = -(gA-gB)/(gA-gB) = -1 (plain case)
        candidates.append(Motion(mpq(-1), mpq(0), ga[0] + gb[0], ga[1] + gb[1], False))
        # conjugate case: u = -(gA-gB)/conj(gA-gB), exact rational unit
        den = dre * dre + dim * dim
        ure = -(dre * dre - dim * dim) / den
        uim = -(2 * dre * dim) / den
        cre = gb[0] - (ure * ga[0] + uim * ga[1])
        cim = gb[1] - (uim * ga[0] - ure * ga[1])
        candidates.append(Motion(ure, uim, cre, cim, True))
    else:
        # common centroid: unit factors from matching disc offsets
        for da in A:
            ur, ui = da.center_re - ga[0], da.center_im - ga[1]
            n2 = ur * ur + ui * ui
            if n2 == 0:
                continue
            for db in B:
                if da.radius != db.radius:
                    continue
                vr, vi = db.center_re - gb[0], db.center_im - gb[1]
                if vr * vr + vi * vi != n2:
                    continue
                # plain: u = v/u0
                candidates.append(Motion((vr * ur + vi * ui) / n2,
                                         (vi * ur - vr * ui) / n2,
                                         ga[0], ga[1], False))
                # conjugate: u = v/conj(u0)
                candidates.append(Motion((vr * ur - vi * ui) / n2,
                                         (vi * ur + vr * ui) / n2,
                                         ga[0], ga[1], True))
        # adjust translation for the common-centroid candidates
        fixed = []
        for cand in candidates:
            gr, gi = ga
            if cand.conjugate:
                ir, ii = gr, -gi
            else:
                ir, ii = gr, gi
            fixed.append(Motion(cand.u_re, cand.u_im,
                                gr - (cand.u_re * ir - cand.u_im * ii),
                                gi - (cand.u_im * ir + cand.u_re * ii),
                                cand.conjugate))
        candidates = fixed

    def matches(imgs, targets):
        used = [False] * len(targets)
        for d in imgs:
            for i, t in enumerate(targets):
                if not used[i] and d.same_disc(t):
                    used[i] = True
                    break
            else:
                return False
        return True

    for cand in candidates:
        if matches([cand.apply_disc(d) for d in A], B) and matches(
            [cand.apply_disc(d) for d in B], A
        ):
            return cand
    return None
