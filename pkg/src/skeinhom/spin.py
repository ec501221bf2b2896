"""Skein-level arithmetic in the Temperley-Lieb category and cross-checks
against truncated Euler series of the categorified complexes.

Coefficients are exact rational functions in q.  The module provides
Jones-Wenzl idempotents, closed-diagram evaluations (loops and colored
theta graphs), admissibly colored networks on triangulated surfaces with
their predicted self-pairings, and crosscheck reports comparing those
closed forms against Euler series computed from the chain level.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .barproj import bottom_projector
from .errors import AdmissibilityError, InvalidBoundary, SpecError, TruncationError
from .homalg import LaurentPoly, circle_poly
from .planar import PlanarTangle, compose, cup_over_cap, identity_tangle, juxtapose
from .surface import SurfaceComplex, SurfaceSpec, SurfaceTangle, arc, validate_surface
from .tqft import hom_double


def quantum_integer(k):
    """[k] = q^{k-1} + q^{k-3} + ... + q^{1-k} as a Laurent polynomial."""
    if k < 0:
        raise InvalidBoundary(f"quantum integer of negative index {k}")
    return LaurentPoly({k - 1 - 2 * i: 1 for i in range(k)})


def _poly_rem(a, b):
    """Remainder of dense ascending coefficient lists over the rationals."""
    a = list(a)
    db = len(b) - 1
    while len(a) - 1 >= db and any(a):
        while a and not a[-1]:
            a.pop()
        if len(a) - 1 < db:
            break
        lead = Fraction(a[-1], 1) / b[-1]
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[shift + i] -= lead * c
        a.pop()
    while a and not a[-1]:
        a.pop()
    return a


def _primitive(coeffs):
    """Scale rational coefficients to coprime integers with positive lead."""
    if not any(coeffs):
        return []
    denom = math.lcm(*(Fraction(c).denominator for c in coeffs))
    ints = [int(Fraction(c) * denom) for c in coeffs]
    content = math.gcd(*(abs(c) for c in ints))
    ints = [c // content for c in ints]
    if ints[-1] < 0:
        ints = [-c for c in ints]
    return ints


def _poly_gcd(a, b):
    a = [Fraction(c) for c in a]
    b = [Fraction(c) for c in b]
    while any(b):
        a, b = b, _poly_rem(a, b)
    return _primitive(a)


def _poly_div_exact(a, g):
    """Quotient of integer lists when g divides a; exactness is asserted."""
    a = [Fraction(c) for c in a]
    out = [Fraction(0)] * (len(a) - len(g) + 1)
    while any(a):
        while a and not a[-1]:
            a.pop()
        deg = len(a) - len(g)
        assert deg >= 0, "inexact polynomial division"
        lead = a[-1] / g[-1]
        out[deg] = lead
        for i, c in enumerate(g):
            a[deg + i] -= lead * c
        a.pop()
    assert all(c.denominator == 1 for c in out)
    return [int(c) for c in out]


def _coeff_list(poly):
    lo, hi = poly.min_exp(), poly.max_exp()
    return lo, [poly.coefficient(e) for e in range(lo, hi + 1)]


class RationalFunctionQ:
    """Quotient of integer Laurent polynomials in q, kept in reduced form.

    The denominator is a genuine polynomial with a nonzero constant term,
    positive leading coefficient, and no common factor (content or
    polynomial) with the numerator; any power of q is carried by the
    numerator.  Equality of reduced forms is literal equality.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        if isinstance(num, RationalFunctionQ):
            assert den is None
            object.__setattr__(self, "num", num.num)
            object.__setattr__(self, "den", num.den)
            return
        num = LaurentPoly({0: num}) if isinstance(num, int) else num
        den = LaurentPoly.one() if den is None else den
        den = LaurentPoly({0: den}) if isinstance(den, int) else den
        if not den:
            raise ZeroDivisionError("rational function with zero denominator")
        if not num:
            object.__setattr__(self, "num", LaurentPoly.zero())
            object.__setattr__(self, "den", LaurentPoly.one())
            return
        nlo, ncs = _coeff_list(num)
        dlo, dcs = _coeff_list(den)
        g = _poly_gcd(ncs, dcs)
        ncs = _poly_div_exact(ncs, g)
        dcs = _poly_div_exact(dcs, g)
        content = math.gcd(math.gcd(*(abs(c) for c in ncs)), math.gcd(*(abs(c) for c in dcs)))
        sign = 1 if dcs[-1] > 0 else -1
        ncs = [sign * c // content for c in ncs]
        dcs = [sign * c // content for c in dcs]
        object.__setattr__(self, "num", LaurentPoly({nlo - dlo + i: c for i, c in enumerate(ncs)}))
        object.__setattr__(self, "den", LaurentPoly(dict(enumerate(dcs))))

    def __setattr__(self, *a):
        raise AttributeError("RationalFunctionQ is immutable")

    @classmethod
    def zero(cls):
        return cls(0)

    @classmethod
    def one(cls):
        return cls(1)

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        if isinstance(other, (int, LaurentPoly)):
            other = RationalFunctionQ(other)
        return (
            isinstance(other, RationalFunctionQ)
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self):
        return hash((self.num, self.den))

    def __add__(self, other):
        other = RationalFunctionQ(other)
        return RationalFunctionQ(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunctionQ(-self.num, self.den)

    def __sub__(self, other):
        return self + (-RationalFunctionQ(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = RationalFunctionQ(other)
        return RationalFunctionQ(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = RationalFunctionQ(other)
        if not other:
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunctionQ(self.num * other.den, self.den * other.num)

    def series(self, lo, hi):
        """Coefficients of the q-power-series expansion on [lo, hi], as a
        dict of nonzero Fractions."""
        if not self.num:
            return {}
        nlo = self.num.min_exp()
        length = hi - nlo + 1
        if length <= 0:
            return {}
        dcs = {e: c for e, c in self.den.terms}
        inv = [Fraction(1, dcs[0])]
        for m in range(1, length):
            acc = Fraction(0)
            for t, c in dcs.items():
                if 1 <= t <= m:
                    acc += c * inv[m - t]
            inv.append(-acc / dcs[0])
        out = {}
        for e, c in self.num.terms:
            for m, ic in enumerate(inv):
                exp = e + m
                if lo <= exp <= hi:
                    out[exp] = out.get(exp, Fraction(0)) + c * ic
        return {e: c for e, c in out.items() if c}

    def series_poly(self, lo, hi):
        """Series on [lo, hi] as a LaurentPoly; the window must be integral."""
        coeffs = self.series(lo, hi)
        bad = {e: c for e, c in coeffs.items() if c.denominator != 1}
        if bad:
            raise ValueError(f"series has non-integer coefficients at {sorted(bad)}")
        return LaurentPoly({e: int(c) for e, c in coeffs.items()})

    def __str__(self):
        if self.den == LaurentPoly.one():
            return str(self.num)
        return f"{self.num} / {self.den}"

    def __repr__(self):
        return f"RationalFunctionQ({self.num!r}, {self.den!r})"


def as_quantum_integer(value):
    """The k with value = [k], or None."""
    value = RationalFunctionQ(value)
    if value.den != LaurentPoly.one():
        return None
    if not value.num:
        return 0
    k = value.num.max_exp() + 1
    return k if k >= 1 and value.num == quantum_integer(k) else None


class TLElement:
    """Formal sum of crossingless (n, n)-tangles with rational-function
    coefficients; free circles are folded into the coefficients as [2]."""

    __slots__ = ("strands", "terms")

    def __init__(self, strands, terms=None):
        clean = {}
        for d, coeff in (terms or {}).items():
            if d.bottom != strands or d.top != strands:
                raise InvalidBoundary(
                    f"({d.bottom}, {d.top})-tangle in an element on {strands} strands"
                )
            coeff = RationalFunctionQ(coeff)
            if d.circles:
                coeff = coeff * circle_poly(d.circles)
                d = d.strip_circles()
            if coeff:
                acc = clean.get(d)
                coeff = coeff if acc is None else acc + coeff
                if coeff:
                    clean[d] = coeff
                else:
                    clean.pop(d, None)
        object.__setattr__(self, "strands", strands)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):
        raise AttributeError("TLElement is immutable")

    def coefficient(self, tangle):
        return self.terms.get(tangle.strip_circles(), RationalFunctionQ.zero())

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return (
            isinstance(other, TLElement)
            and self.strands == other.strands
            and self.terms == other.terms
        )

    def __add__(self, other):
        if self.strands != other.strands:
            raise InvalidBoundary("cannot add elements on different strand counts")
        out = dict(self.terms)
        for d, c in other.terms.items():
            out[d] = out.get(d, RationalFunctionQ.zero()) + c
        return TLElement(self.strands, out)

    def __neg__(self):
        return self.scaled(-1)

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, coeff):
        coeff = RationalFunctionQ(coeff)
        return TLElement(self.strands, {d: c * coeff for d, c in self.terms.items()})

    def __repr__(self):
        body = "; ".join(f"({c})*{d.partner}" for d, c in sorted(self.terms.items(), key=repr))
        return f"TLElement({self.strands}: {body or '0'})"


def identity_element(n):
    return TLElement(n, {identity_tangle(n): 1})


def cup_cap_at(n, i):
    """The tangle joining strands i, i+1 by a cup below and a cap above."""
    if not 0 <= i <= n - 2:
        raise InvalidBoundary(f"no strand pair at {i} on {n} strands")
    partner = list(range(n, 2 * n)) + list(range(n))
    partner[i], partner[i + 1] = i + 1, i
    partner[n + i], partner[n + i + 1] = n + i + 1, n + i
    return PlanarTangle(n, n, tuple(partner))


def tl_compose(x, y):
    """Stack y on top of x; closed circles become factors of [2]."""
    if x.strands != y.strands:
        raise InvalidBoundary(
            f"composing elements on {x.strands} and {y.strands} strands"
        )
    out = {}
    for dx, cx in x.terms.items():
        for dy, cy in y.terms.items():
            d = compose(dy, dx)
            coeff = cx * cy * circle_poly(d.circles)
            d = d.strip_circles()
            out[d] = out.get(d, RationalFunctionQ.zero()) + coeff
    return TLElement(x.strands, out)


def tl_tensor(x, y):
    out = {}
    for dx, cx in x.terms.items():
        for dy, cy in y.terms.items():
            out[juxtapose(dx, dy)] = cx * cy
    return TLElement(x.strands + y.strands, out)


def _trace_circles(d):
    """Circles formed when an (n, n)-tangle is closed around an annulus."""
    n = d.bottom
    seen = set()
    count = 0
    for start in range(2 * n):
        if start in seen:
            continue
        count += 1
        p = start
        while True:
            seen.add(p)
            q = d.partner[p]
            seen.add(q)
            p = q + n if q < n else q - n
            if p == start:
                break
    return count + d.circles


def tl_closure(x):
    """Annular trace: every strand is closed off and each circle gives [2]."""
    total = RationalFunctionQ.zero()
    for d, c in x.terms.items():
        total = total + c * circle_poly(_trace_circles(d))
    return total


@lru_cache(maxsize=None)
def wenzl(n):
    """The n-strand Jones-Wenzl idempotent."""
    if n < 0:
        raise InvalidBoundary(f"negative strand count {n}")
    if n <= 1:
        return identity_element(n)
    p = tl_tensor(wenzl(n - 1), identity_element(1))
    hook = TLElement(n, {cup_cap_at(n, n - 2): 1})
    coeff = RationalFunctionQ(quantum_integer(n - 1), quantum_integer(n))
    return p - tl_compose(tl_compose(p, hook), p).scaled(coeff)


def admissible_triple(a, b, c):
    """Even total and triangle inequalities; the condition for a trivalent
    vertex joining colors a, b, c to exist."""
    if min(a, b, c) < 0 or (a + b + c) % 2:
        return False
    return a + b >= c and b + c >= a and c + a >= b


def _vertex_tangle(a, b, c):
    """The trivalent vertex as an (a+b, c)-tangle: i cups between the a and
    b groups, the remaining strands passing through."""
    i = (a + b - c) // 2
    j = (b + c - a) // 2
    k = (c + a - b) // 2
    partner = [None] * (a + b + c)

    def pair(p, q):
        partner[p], partner[q] = q, p

    for t in range(i):
        pair(a - 1 - t, a + t)
    for t in range(k):
        pair(t, a + b + t)
    for u in range(j):
        pair(a + i + u, a + b + k + u)
    return PlanarTangle(a + b, c, tuple(partner))


def loop(a):
    """Closure of the a-strand Jones-Wenzl idempotent; equals [a+1]."""
    return tl_closure(wenzl(a))


def theta(a, b, c):
    """Evaluation of the theta graph with edges colored a, b, c, each edge
    carrying its Jones-Wenzl idempotent; zero when inadmissible."""
    if not admissible_triple(a, b, c):
        return RationalFunctionQ.zero()
    vertex = _vertex_tangle(a, b, c)
    mirror = vertex.reflect_y()
    mid = tl_tensor(wenzl(a), wenzl(b))
    sandwich = {}
    for d, coeff in mid.terms.items():
        t = compose(vertex, compose(d, mirror))
        coeff = coeff * circle_poly(t.circles)
        t = t.strip_circles()
        sandwich[t] = sandwich.get(t, RationalFunctionQ.zero()) + coeff
    return tl_closure(tl_compose(TLElement(c, sandwich), wenzl(c)))


@dataclass
class SpinNetwork:
    """A triangulated surface together with a coloring of its arcs and seams."""

    surface: SurfaceSpec
    coloring: dict

    @classmethod
    def from_data(cls, data):
        spec = data["surface"]
        if not isinstance(spec, SurfaceSpec):
            spec = SurfaceSpec.from_data(spec)
        coloring = {str(k): int(v) for k, v in data["coloring"].items()}
        return validate_network(cls(spec, coloring))


def validate_network(net):
    validate_surface(net.surface)
    names = {name for name, _sign in net.surface.arcs} | set(net.surface.seams)
    missing = sorted(names - set(net.coloring))
    if missing:
        raise SpecError(f"coloring misses {missing}")
    extra = sorted(set(net.coloring) - names)
    if extra:
        raise SpecError(f"coloring mentions unknown segments {extra}")
    bad = sorted(k for k, v in net.coloring.items() if not isinstance(v, int) or v < 0)
    if bad:
        raise SpecError(f"colors must be non-negative integers; bad at {bad}")
    for ri, region in enumerate(net.surface.regions):
        if len(region) != 3:
            raise SpecError(
                f"region {ri} has {len(region)} sides; networks need triangles"
            )
    return net


def region_colors(net, ri):
    return tuple(net.coloring[seg.name] for seg in net.surface.regions[ri])


def check_admissible(net):
    validate_network(net)
    for ri in range(len(net.surface.regions)):
        triple = region_colors(net, ri)
        if not admissible_triple(*triple):
            raise AdmissibilityError(
                f"region {ri} carries colors {triple}, which fail the parity "
                "or triangle conditions"
            )
    return net


def pairing_prediction(net):
    """Predicted Euler characteristic of the symmetrized self-pairing of the
    network: the product of vertex theta values over loop values of the
    internal edges."""
    check_admissible(net)
    value = RationalFunctionQ.one()
    for ri in range(len(net.surface.regions)):
        value = value * theta(*region_colors(net, ri))
    for seam in net.surface.seams:
        value = value / loop(net.coloring[seam])
    return value


def cross_pairing_prediction(net_a, net_b):
    """Predicted pairing of two networks on the same triangulated surface
    with equal boundary colors; distinct colorings pair to zero."""
    if net_a.surface != net_b.surface:
        raise InvalidBoundary("networks live on different surfaces")
    check_admissible(net_a)
    check_admissible(net_b)
    for name, _sign in net_a.surface.arcs:
        if net_a.coloring[name] != net_b.coloring[name]:
            raise InvalidBoundary(f"boundary colors differ on arc {name!r}")
    if net_a.coloring == net_b.coloring:
        return pairing_prediction(net_a)
    return RationalFunctionQ.zero()


def projector_truncation(n, depth):
    """Chain objects (tangle, homological degree, q-shift) of the n-strand
    categorified idempotent, truncated at the given depth; available for
    n at most 2."""
    if n in (0, 1):
        return ((identity_tangle(n), 0, 0),)
    if n == 2:
        objs = [(identity_tangle(2), 0, 0)]
        objs.extend((cup_over_cap(2), -s, 2 * s - 1) for s in range(1, depth + 1))
        return tuple(objs)
    raise SpecError(f"categorified idempotent data stops at 2 strands, got {n}")


def projector_euler_terms(n, depth):
    """Alternating sum of shift monomials per tangle, for comparison against
    the coefficients of wenzl(n)."""
    out = {}
    for tangle, h, q in projector_truncation(n, depth):
        cur = out.get(tangle, LaurentPoly.zero())
        out[tangle] = cur + LaurentPoly({q: (-1) ** (h % 2)})
    return out


_TRIANGLE = SurfaceSpec(
    arcs=(("ea", 1), ("eb", 1), ("ec", 1)),
    seams=(),
    regions=((arc("ea"), arc("eb"), arc("ec")),),
)


def _triangle_cap(a, b, c):
    i = (a + b - c) // 2
    j = (b + c - a) // 2
    k = (c + a - b) // 2
    total = a + b + c
    partner = [None] * total

    def pair(p, q):
        partner[p], partner[q] = q, p

    for t in range(i):
        pair(a - 1 - t, a + t)
    for t in range(j):
        pair(a + b - 1 - t, a + b + t)
    for t in range(k):
        pair(total - 1 - t, t)
    return PlanarTangle(total, 0, tuple(partner))


def _edge_plugs(color, order):
    """(insert, homological degree, q-shift) choices for one edge."""
    if color <= 1:
        return ((identity_tangle(color), 0, 0),)
    out = [(identity_tangle(2), 0, 0)]
    out.extend((cup_over_cap(2), -s, 2 * s - 1) for s in range(1, (order + 1) // 2 + 1))
    return tuple(out)


def costandard_pairing_series(colors, order):
    """Euler series, exact through q^order, of the symmetrized self-pairing
    of the costandard object on the one-triangle disk with the given edge
    colors; edge colors are capped at 2 by the available idempotent data."""
    a, b, c = colors
    if not admissible_triple(a, b, c):
        raise AdmissibilityError(f"colors {colors} fail parity or triangle conditions")
    if max(colors) > 2:
        raise SpecError(f"categorified idempotent data stops at 2 strands, got {colors}")
    base = _triangle_cap(a, b, c)
    counts = ((a, b, c),)
    objects = []
    for combo in itertools.product(*(_edge_plugs(col, order) for col in colors)):
        lower = juxtapose(*(plug for plug, _h, _q in combo))
        plugged = compose(base, lower)
        objects.append(
            (
                plugged.strip_circles(),
                plugged.circles,
                sum(h for _p, h, _q in combo),
                sum(q for _p, _h, q in combo),
            )
        )

    tangles = {o[0] for o in objects}
    ranks = {}
    for t1 in tangles:
        for t2 in tangles:
            cx = SurfaceComplex(
                _TRIANGLE,
                SurfaceTangle((t2,), counts),
                SurfaceTangle((t1,), counts),
                depth=0,
            )
            gens = cx.truncated.generators[0]
            poly = LaurentPoly.zero()
            for _label, qq in gens:
                poly = poly + LaurentPoly.q(qq)
            ranks[(t1, t2)] = poly
    max_circles = max(o[1] for o in objects)
    floor = min(r.min_exp() for r in ranks.values()) - 2 * max_circles

    series = LaurentPoly.zero()
    for (t1, c1, h1, q1), (t2, c2, h2, q2) in itertools.product(objects, objects):
        if q1 + q2 + floor > order:
            continue
        contrib = ranks[(t1, t2)] * circle_poly(c1 + c2)
        sign = (-1) ** ((h1 + h2) % 2)
        series = series + contrib.shifted(q1 + q2) * sign
    return series.truncated(series.min_exp() or 0, order)


def costandard_pairing_offset(colors):
    """Power of q separating the assembled pairing from the network
    prediction: half the number of boundary points."""
    return sum(colors) // 2


def _annulus_core_complex(depth):
    spec = SurfaceSpec.from_data(
        {
            "arcs": ["a", "b"],
            "seams": ["g"],
            "regions": [
                [
                    {"seam": "g", "side": "-"},
                    {"arc": "a"},
                    {"seam": "g", "side": "+"},
                    {"arc": "b"},
                ]
            ],
        }
    )
    core = SurfaceTangle.from_data(
        {"regions": [{"counts": [1, 0, 1, 0], "chords": [[0, 1]]}]}
    )
    return SurfaceComplex(spec, core, core, depth=depth)


def _word_euler_series(cx, order):
    """Euler series of an assembled complex by direct circle counting of the
    plugged closures; no homology is computed."""
    t = cx.truncated
    if not t.complete:
        bound = t.min_q_at(t.h_min - 1)
        if bound is not None and bound <= order:
            raise TruncationError(
                f"series at q={order} needs degrees below {t.h_min} "
                f"(certificate bound {bound})"
            )
    out = LaurentPoly.zero()
    for h, words in cx.multiwords.items():
        sign = (-1) ** (h % 2)
        for mw in words:
            d, off = hom_double(cx.z_jux, cx.m_tangle(mw))
            out = out + circle_poly(len(d)).shifted(cx.qshift(mw) + int(off)) * sign
    return out.truncated(out.min_exp() or 0, order)


@dataclass
class CrosscheckReport:
    scenario: str
    order: int
    lhs: LaurentPoly
    rhs: LaurentPoly

    @property
    def mismatches(self):
        exps = {e for e, _c in self.lhs.terms} | {e for e, _c in self.rhs.terms}
        out = []
        for e in sorted(exps):
            lc, rc = self.lhs.coefficient(e), self.rhs.coefficient(e)
            if lc != rc:
                out.append((e, lc, rc))
        return tuple(out)

    @property
    def ok(self):
        return not self.mismatches

    @property
    def max_mismatch(self):
        return max((abs(lc - rc) for _e, lc, rc in self.mismatches), default=0)


def euler_crosscheck(scenario, order, depth=None):
    """Compare a truncated Euler series from the chain level against the
    closed-form prediction, coefficientwise through q^order."""
    if order < 0:
        raise SpecError(f"order must be non-negative, got {order}")
    if scenario == "strands0":
        proj = bottom_projector(0, depth if depth is not None else 1)
        lhs = proj.k0_series(identity_tangle(0), (0, order))
        rhs = RationalFunctionQ.one().series_poly(0, order)
    elif scenario == "bproj2":
        proj = bottom_projector(2, depth if depth is not None else order // 2 + 1)
        lhs = proj.k0_series(cup_over_cap(2), (0, order))
        rhs = RationalFunctionQ(quantum_integer(1), quantum_integer(2)).series_poly(0, order)
    elif scenario == "annulus":
        d = depth if depth is not None else order // 2 + 2
        cx = _annulus_core_complex(d)
        t = cx.truncated
        bound = t.min_q_at(t.h_min)
        if bound is not None and bound <= order:
            raise TruncationError(
                f"series at q={order} gets contributions at degree {t.h_min}, "
                f"outside the homology window (first quantum degree {bound})"
            )
        lhs = t.euler_series((0, order), from_homology=True, h_range=(t.h_min + 1, 0))
        rhs = _word_euler_series(cx, order)
    elif scenario == "triangle112":
        lhs = costandard_pairing_series((1, 1, 2), order)
        shift = LaurentPoly.q(costandard_pairing_offset((1, 1, 2)))
        rhs = (theta(1, 1, 2) * shift).series_poly(lhs.min_exp() or 0, order)
    else:
        raise SpecError(f"unknown crosscheck scenario {scenario!r}")
    return CrosscheckReport(scenario, order, lhs, rhs)
