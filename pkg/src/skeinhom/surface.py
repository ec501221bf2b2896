"""Hom complexes of flat tangles glued over seamed surfaces.

A surface is described combinatorially: named boundary arcs, named cutting
seams, and disk regions whose boundary cycles interleave segments of both
kinds.  A tangle assigns to every region a cap matching, partitioned by that
region's segments.  The hom complex between two tangles rides on a twisted
complex: each region contributes a fixed closure pairing the two caps, and
bar words at the seams vary the middle layer through plug tangles.  Bar
faces with Koszul signs over the seam order give the differential, and
evaluating states against the closure produces an integer complex with a
certified truncation.

Composition stacks region states through the shared caps and shuffles the
seam words, units are the all-ones states on identity words, and coarsening
deletes one seam by surgering its two plugs into each other.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .barproj import SmallRing, TwistedTangleComplex, signed_shuffles, word_degree
from .errors import InvalidBoundary, SpecError, TruncationError
from .homalg import ChainMap
from .planar import ClosedDiagram, PlanarTangle, identity_tangle, juxtapose
from .planar import compose as stack
from .tqft import (ONE, StateVector, _arc_at_port, _chord_index, _double_instances,
                   _joint_terms, hom_double, identity_state, juxtaposed, kh_basis,
                   reflected_x, transport, transposed, whisker)


@dataclass(frozen=True)
class Segment:
    """One piece of a region's boundary cycle."""

    kind: str
    name: str
    side: int = 1

    def describe(self):
        if self.kind == "seam":
            return f"seam({self.name}, {'+' if self.side > 0 else '-'})"
        return f"arc({self.name})"


def arc(name):
    return Segment("arc", name)


def seam_side(name, side):
    return Segment("seam", name, side)


@dataclass(frozen=True)
class SurfaceSpec:
    """Boundary arcs, cutting seams, and disk regions of a marked surface.

    arcs is a tuple of (name, sign) pairs, seams a tuple of names, and each
    region a tuple of Segments read around its boundary.  The first listed
    segment of a region starts its linear order; other starts give the same
    homology.
    """

    arcs: tuple
    seams: tuple
    regions: tuple

    @classmethod
    def from_data(cls, data):
        arcs = []
        for a in data.get("arcs", ()):
            if isinstance(a, str):
                arcs.append((a, 1))
            else:
                arcs.append((a["id"], int(a.get("sign", 1))))
        regions = []
        for ri, region in enumerate(data.get("regions", ())):
            segs = []
            for si, seg in enumerate(region):
                loc = f"region {ri}, segment {si}"
                if "arc" in seg:
                    segs.append(Segment("arc", seg["arc"]))
                elif "seam" in seg:
                    side = seg.get("side")
                    if side not in ("+", "-", 1, -1):
                        raise SpecError(f"{loc}: seam side must be '+' or '-'")
                    segs.append(Segment("seam", seg["seam"], 1 if side in ("+", 1) else -1))
                else:
                    raise SpecError(f"{loc}: segment needs an 'arc' or 'seam' key")
            regions.append(tuple(segs))
        return validate_surface(cls(tuple(arcs), tuple(data.get("seams", ())), tuple(regions)))

    def seam_sides(self, name):
        """(region, segment) of the minus and plus side of a seam."""
        out = {}
        for ri, region in enumerate(self.regions):
            for si, seg in enumerate(region):
                if seg.kind == "seam" and seg.name == name:
                    out[seg.side] = (ri, si)
        return out[-1], out[1]


def validate_surface(spec):
    """Check a spec for well-formedness and return it unchanged."""
    names = [n for n, _ in spec.arcs]
    if len(set(names)) != len(names):
        raise SpecError("duplicate arc ids")
    if len(set(spec.seams)) != len(spec.seams):
        raise SpecError("duplicate seam ids")
    seen_arcs = {}
    sides = {n: {} for n in spec.seams}
    for ri, region in enumerate(spec.regions):
        for si, seg in enumerate(region):
            loc = f"region {ri}, segment {si}"
            if seg.kind == "arc":
                if seg.name not in names:
                    raise SpecError(f"{loc}: unknown arc {seg.name!r}")
                if seg.name in seen_arcs:
                    raise SpecError(f"{loc}: arc {seg.name!r} already used at {seen_arcs[seg.name]}")
                seen_arcs[seg.name] = loc
            elif seg.kind == "seam":
                if seg.name not in sides:
                    raise SpecError(f"{loc}: unknown seam {seg.name!r}")
                if seg.side not in (1, -1):
                    raise SpecError(f"{loc}: seam side must be +1 or -1")
                if seg.side in sides[seg.name]:
                    raise SpecError(
                        f"{loc}: side {'+' if seg.side > 0 else '-'} of seam "
                        f"{seg.name!r} appears twice"
                    )
                sides[seg.name][seg.side] = ri
            else:
                raise SpecError(f"{loc}: unknown segment kind {seg.kind!r}")
    for n, d in sides.items():
        for s, label in ((1, "+"), (-1, "-")):
            if s not in d:
                raise SpecError(f"seam {n!r} is missing its {label} side")
    unused = sorted(set(names) - set(seen_arcs))
    if unused:
        raise SpecError(f"arcs never referenced: {unused}")
    if spec.regions:
        parent = list(range(len(spec.regions)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for d in sides.values():
            parent[find(d[1])] = find(d[-1])
        roots = {find(r) for r in range(len(spec.regions))}
        if len(roots) > 1:
            raise SpecError("regions do not glue into a connected surface")
    return spec


@dataclass(frozen=True)
class SurfaceTangle:
    """A crossingless tangle in a seamed surface, one cap matching per region.

    caps[i] is a (k, 0)-tangle on region i's boundary points; counts[i]
    splits those k points among the region's segments, in order.
    """

    caps: tuple
    counts: tuple

    @classmethod
    def from_data(cls, data):
        caps, counts = [], []
        for ri, reg in enumerate(data.get("regions", ())):
            cnt = tuple(int(c) for c in reg.get("counts", ()))
            k = sum(cnt)
            partner = [None] * k
            for p, q in reg.get("chords", ()):
                if not (0 <= p < k and 0 <= q < k) or p == q:
                    raise SpecError(f"region {ri}: chord ({p}, {q}) is out of range")
                if partner[p] is not None or partner[q] is not None:
                    raise SpecError(f"region {ri}: point reused by chord ({p}, {q})")
                partner[p], partner[q] = q, p
            if any(v is None for v in partner):
                raise SpecError(f"region {ri}: chords do not cover all {k} points")
            caps.append(PlanarTangle(k, 0, tuple(partner)))
            counts.append(cnt)
        return cls(tuple(caps), tuple(counts))

    def seam_count(self, spec, name):
        (ri, si), _ = spec.seam_sides(name)
        return self.counts[ri][si]


def validate_tangle(spec, tangle, who="tangle"):
    if len(tangle.caps) != len(spec.regions):
        raise SpecError(
            f"{who}: {len(tangle.caps)} regions against {len(spec.regions)} in the spec"
        )
    for ri, region in enumerate(spec.regions):
        cap, cnt = tangle.caps[ri], tangle.counts[ri]
        if len(cnt) != len(region):
            raise SpecError(f"{who}: region {ri} splits {len(cnt)} segments, spec has {len(region)}")
        if cap.top != 0:
            raise SpecError(f"{who}: region {ri} cap has points on top")
        if cap.circles:
            raise SpecError(f"{who}: region {ri} cap must be minimal")
        if cap.bottom != sum(cnt):
            raise SpecError(f"{who}: region {ri} cap has {cap.bottom} points, counts give {sum(cnt)}")
    for name in spec.seams:
        (ri, si), (rj, sj) = spec.seam_sides(name)
        if tangle.counts[ri][si] != tangle.counts[rj][sj]:
            raise SpecError(
                f"{who}: seam {name!r} meets {tangle.counts[ri][si]} points on one side "
                f"and {tangle.counts[rj][sj]} on the other"
            )
    return tangle


def _compositions(total, parts):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


class SurfaceComplex:
    """The glued hom complex between two surface tangles, truncated at a depth.

    Chain objects in homological degree -r are indexed by tuples of bar
    words, one per seam, with lengths summing to r; each carries the
    middle-layer tangle whose seam slots hold the word's end plugs.  The
    evaluated integer complex sits in .truncated.
    """

    def __init__(self, spec, top, bottom, depth, inserts=None, reduced=True, check=True):
        validate_surface(spec)
        validate_tangle(spec, top, "top tangle")
        validate_tangle(spec, bottom, "bottom tangle")
        self.spec, self.top, self.bottom = spec, top, bottom
        self.depth, self.reduced = depth, reduced
        self.inserts = dict(inserts or {})
        arc_sign = dict(spec.arcs)
        for name in self.inserts:
            if name not in arc_sign:
                raise SpecError(f"insert references unknown arc {name!r}")

        self.seam_names = tuple(spec.seams)
        self._seam_pos = {n: g for g, n in enumerate(self.seam_names)}
        self._slots = []
        self._slot_pos = []
        self._slot_global = {}
        self._seam_slots = {n: {} for n in self.seam_names}
        for ri, region in enumerate(spec.regions):
            for si, seg in enumerate(region):
                k = len(self._slots)
                self._slot_pos.append((ri, si))
                self._slot_global[(ri, si)] = k
                nb, nt = bottom.counts[ri][si], top.counts[ri][si]
                if seg.kind == "arc":
                    v = self.inserts.get(seg.name)
                    if v is None:
                        if nb != nt:
                            raise SpecError(
                                f"arc {seg.name!r}: {nt} top points against {nb} bottom "
                                "points with no insert tangle"
                            )
                        v = identity_tangle(nt)
                    elif arc_sign[seg.name] < 0:
                        v = v.reflect_x()
                    if (v.bottom, v.top) != (nb, nt):
                        raise SpecError(
                            f"arc {seg.name!r}: insert is ({v.bottom}, {v.top}), "
                            f"boundary needs ({nb}, {nt})"
                        )
                    if v.circles:
                        raise SpecError(f"arc {seg.name!r}: insert tangles must be minimal")
                    self._slots.append(("arc", v))
                else:
                    self._seam_slots[seg.name][seg.side] = k
                    self._slots.append(("seam", seg.name, seg.side))

        self.rings = {}
        for name in self.seam_names:
            (ri, si), _ = spec.seam_sides(name)
            self.rings[name] = SmallRing(bottom.counts[ri][si], top.counts[ri][si])

        closures = []
        for ri in range(len(spec.regions)):
            sc, tc = bottom.caps[ri], top.caps[ri]
            partner = [0] * (sc.bottom + tc.bottom)
            for p, q in sc.chords:
                partner[p], partner[q] = q, p
            for p, q in tc.chords:
                partner[sc.bottom + p], partner[sc.bottom + q] = sc.bottom + q, sc.bottom + p
            closures.append(PlanarTangle(sc.bottom, tc.bottom, tuple(partner)))
        self.z_regions = tuple(closures)
        self.z_jux = juxtapose(*closures)

        boundary_points = self.z_jux.bottom + self.z_jux.top
        if boundary_points % 4:
            raise SpecError(
                f"{boundary_points} region boundary points leave the quantum "
                "grading non-integral"
            )
        self.q_base = boundary_points // 4

        self._word_pool = {}
        for name in self.seam_names:
            ring = self.rings[name]
            self._word_pool[name] = {r: self._words_of(ring, r) for r in range(depth + 1)}
        self.multiwords, self.index = {}, {}
        for total in range(depth + 1):
            bucket = []
            for comp in _compositions(total, len(self.seam_names)):
                pools = [self._word_pool[n][r] for n, r in zip(self.seam_names, comp)]
                bucket.extend(itertools.product(*pools))
            self.multiwords[-total] = tuple(bucket)
            self.index[-total] = {w: i for i, w in enumerate(bucket)}

        self._m_cache = {}
        self._ident_cache = {}
        objects = {
            h: tuple((self.m_tangle(w), self.qshift(w)) for w in ws)
            for h, ws in self.multiwords.items()
        }
        diffs = {}
        for h in range(-depth, 0):
            entries = {}
            for j, mw in enumerate(self.multiwords[h]):
                for mw_tgt, sv in self._faces(mw):
                    key = (self.index[h + 1][mw_tgt], j)
                    if key in entries:
                        entries[key] = entries[key] + sv
                    else:
                        entries[key] = sv
            diffs[h] = {k: sv for k, sv in entries.items() if sv}

        complete = not self.seam_names
        cert = None
        if not complete:
            mins = []
            for n in self.seam_names:
                ring = self.rings[n]
                if not reduced:
                    mins.append(0)
                elif any(ring.reduced(a, b) for a in ring.objects for b in ring.objects):
                    mins.append(ring.min_letter_degree)
            if mins:
                base, c_min = self.q_base, min(mins)
                cert = lambda r: -base + c_min * r
            else:
                complete = True
        self.twisted = TwistedTangleComplex(objects, diffs, -depth, 0,
                                            complete, cert, check=check)
        self.truncated = self.twisted.hom_complex(self.z_jux, check=check)
        self._positions = {
            h: {lbl: idx for idx, (lbl, _q) in enumerate(gens)}
            for h, gens in self.truncated.generators.items()
        }

    def _words_of(self, ring, r):
        def pool(a, b):
            if self.reduced:
                return ring.reduced(a, b)
            return tuple(lab for lab, _ in ring.basis(a, b))

        if r == 0:
            return tuple(((a,), ()) for a in ring.objects)
        out = []
        for objs in itertools.product(ring.objects, repeat=r + 1):
            pools = [pool(objs[i], objs[i + 1]) for i in range(r)]
            for letters in itertools.product(*pools):
                out.append((objs, letters))
        return tuple(out)

    def slot_tangles(self, mw):
        out = []
        for slot in self._slots:
            if slot[0] == "arc":
                out.append(slot[1])
            else:
                _, name, side = slot
                objs, _letters = mw[self._seam_pos[name]]
                out.append(objs[0].reflect_x() if side < 0 else objs[-1])
        return tuple(out)

    def m_tangle(self, mw):
        if mw not in self._m_cache:
            self._m_cache[mw] = juxtapose(*self.slot_tangles(mw))
        return self._m_cache[mw]

    def qshift(self, mw):
        total = sum(
            word_degree(self.rings[n], w) for n, w in zip(self.seam_names, mw)
        )
        return total - self.q_base

    def _ident(self, tangle):
        if tangle not in self._ident_cache:
            self._ident_cache[tangle] = identity_state(tangle)
        return self._ident_cache[tangle]

    def _slot_entry(self, slots_src, k, tgt_slot, sv):
        factors = []
        for idx, t in enumerate(slots_src):
            if idx == k:
                factors.append((t, tgt_slot, sv))
            else:
                factors.append((t, t, self._ident(t)))
        return juxtaposed(factors)

    def _faces(self, mw):
        """Bar faces of a word tuple, with alternating and Koszul signs."""
        slots_src = self.slot_tangles(mw)
        koszul = 1
        for g, name in enumerate(self.seam_names):
            objs, letters = mw[g]
            r = len(letters)
            ring = self.rings[name]
            if r:
                neg = self._seam_slots[name][-1]
                pos = self._seam_slots[name][1]
                first = ring.state(objs[0], objs[1], letters[0])
                sv = reflected_x(first, objs[0], objs[1])
                w0 = (objs[1:], letters[1:])
                yield (self._replace(mw, g, w0),
                       self._slot_entry(slots_src, neg, objs[1].reflect_x(), sv).scaled(koszul))
                for i in range(1, r):
                    prod = ring.mul(objs[i - 1], objs[i], objs[i + 1],
                                    letters[i - 1], letters[i])
                    ident = self._ident(self.m_tangle(mw))
                    for lab, coeff in prod.sorted_terms():
                        if not coeff:
                            continue
                        wi = (objs[:i] + objs[i + 1:],
                              letters[:i - 1] + (lab,) + letters[i + 1:])
                        yield (self._replace(mw, g, wi),
                               ident.scaled(koszul * coeff * (-1) ** (i % 2)))
                last = ring.state(objs[-2], objs[-1], letters[-1])
                sv = transposed(last, objs[-2], objs[-1])
                wr = (objs[:-1], letters[:-1])
                yield (self._replace(mw, g, wr),
                       self._slot_entry(slots_src, pos, objs[-2], sv).scaled(koszul * (-1) ** (r % 2)))
            koszul *= (-1) ** (r % 2)

    @staticmethod
    def _replace(mw, g, word):
        return mw[:g] + (word,) + mw[g + 1:]

    def homology(self, h_range, q_range, threads=None):
        return self.truncated.homology(h_range, q_range, threads)

    def basis_elements(self, h):
        out = []
        for (i, lab), _q in self.truncated.generators.get(h, ()):
            out.append(SurfaceElement(self, h, {(self.multiwords[h][i], lab): 1}))
        return tuple(out)

    def arcs_are_identities(self):
        return all(slot[0] != "arc" or slot[1].is_identity() for slot in self._slots)

    def differential(self, elem):
        """Apply the integer differential to an element."""
        if elem.owner is not self:
            raise InvalidBoundary("element does not live in this complex")
        h = elem.h
        gens_tgt = self.truncated.generators.get(h + 1, ())
        d = self.truncated.differentials.get(h, {})
        vec = {}
        for (mw, lab), c in elem.terms.items():
            if not c:
                continue
            col = self._positions[h][(self.index[h][mw], lab)]
            for (row, col2), coeff in d.items():
                if col2 == col:
                    vec[row] = vec.get(row, 0) + c * coeff
        terms = {}
        for row, c in vec.items():
            if not c:
                continue
            (i, lab), _q = gens_tgt[row]
            terms[(self.multiwords[h + 1][i], lab)] = c
        return SurfaceElement(self, h + 1, terms)


@dataclass
class SurfaceElement:
    """A homogeneous chain of a surface hom complex.

    terms maps (word tuple, labeling) pairs to integer coefficients; h is
    the homological degree, minus the total bar length of each word tuple.
    """

    owner: SurfaceComplex
    h: int
    terms: dict

    def _clean(self):
        return {k: v for k, v in sorted(self.terms.items()) if v}

    def __eq__(self, other):
        if not isinstance(other, SurfaceElement):
            return NotImplemented
        return (self.owner is other.owner and self.h == other.h
                and self._clean() == other._clean())

    def __bool__(self):
        return any(self.terms.values())

    def __add__(self, other):
        if self.owner is not other.owner or self.h != other.h:
            raise InvalidBoundary("cannot add elements of different degrees or complexes")
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, 0) + v
        return SurfaceElement(self.owner, self.h, {k: v for k, v in terms.items() if v})

    def scaled(self, k):
        return SurfaceElement(self.owner, self.h, {key: k * v for key, v in self.terms.items()})

    def __neg__(self):
        return self.scaled(-1)

    def __sub__(self, other):
        return self + (-other)

    def quantum_degrees(self):
        out = set()
        for (mw, lab), c in self.terms.items():
            if not c:
                continue
            d, off = hom_double(self.owner.z_jux, self.owner.m_tangle(mw))
            raw = int(off) + sum(1 if l else -1 for l in lab)
            out.add(self.owner.qshift(mw) + raw)
        return sorted(out)


def identity_unit(cx):
    """The unit of an endomorphism complex: identity plugs, all-ones state."""
    if cx.top != cx.bottom:
        raise InvalidBoundary("units need equal top and bottom tangles")
    if not cx.arcs_are_identities():
        raise InvalidBoundary("units need identity insert tangles on every arc")
    mw = tuple(
        ((identity_tangle(cx.rings[n].n),), ()) for n in cx.seam_names
    )
    d, _off = hom_double(cx.z_jux, cx.m_tangle(mw))
    lab = (ONE,) * len(d)
    return SurfaceElement(cx, 0, {(mw, lab): 1})


def _stacked_state(fc, gc, tc, m1, m2, labf, labg):
    """Pair a state of fc with one of gc through the shared middle caps.

    Returns the state on tc's double of the stacked middle layer; the
    declared offset is the target's own hom offset.
    """
    z1, z2, zt = fc.z_jux, gc.z_jux, tc.z_jux
    tangles, glue = {}, {}
    _double_instances(1, z1, m1, tangles, glue)
    _double_instances(2, z2, m2, tangles, glue)
    union = ClosedDiagram.from_instances(tangles, glue)
    d1, off1 = hom_double(z1, m1)
    d2, off2 = hom_double(z2, m2)
    state = _joint_terms(union, {1: StateVector(d1, off1, {labf: 1}),
                                 2: StateVector(d2, off2, {labg: 1})})
    kr = z2.bottom
    for k, (p, q) in enumerate(z1.chords):
        if p >= z1.bottom:
            break
        arc1 = ((1, "x"), k)
        arc2 = ((2, "x"), _chord_index(z2, kr + p))
        n1p = union.node_of_port(((1, "x"), "b", p))
        n1q = union.node_of_port(((1, "x"), "b", q))
        n2p = union.node_of_port(((2, "x"), "t", p))
        n2q = union.node_of_port(((2, "x"), "t", q))
        state = state.surgered(arc1, arc2, ((n1p, n2p), (n1q, n2q)))
    m_out = stack(m1, m2)
    if m_out.circles:
        raise SpecError("stacked middle layers acquire free circles; out of scope")
    canon, off_t = hom_double(zt, m_out)
    arc_map = {}
    for k, (p, q) in enumerate(zt.chords):
        if q < zt.bottom:
            arc_map[((2, "x"), _chord_index(z2, p))] = ("x", k)
        else:
            local = p - zt.bottom
            arc_map[((1, "x"), _chord_index(z1, z1.bottom + local))] = ("x", k)
    for k, (p, q) in enumerate(m_out.chords):
        if p < m_out.bottom:
            port = ((2, "y"), "b", p)
        else:
            port = ((1, "y"), "t", p - m_out.bottom)
        arc_map[_arc_at_port(tangles, port)] = ("y", k)
    out = transport(state, canon, arc_map)
    return StateVector(canon, off_t, dict(out.terms))


def _shuffle_compose(ring_f, ring_g, w1, w2):
    """Signed composite-ring words from interleaving two seam words.

    Letters of the first word are widened by the current plug of the second
    underneath, and vice versa on top; each widened letter is expanded in
    the standard basis of the stacked hom space.
    """
    objs1, lets1 = w1
    objs2, lets2 = w2

    def stacked_obj(i, j):
        t = stack(objs1[i], objs2[j])
        if t.circles:
            raise SpecError("composite seam plugs acquire free circles; out of scope")
        return t

    out = []
    for sign, pattern in signed_shuffles(len(lets1), len(lets2)):
        i = j = 0
        objs = [stacked_obj(0, 0)]
        expansions = []
        for v in pattern:
            if v == 1:
                sv = whisker(ring_f.state(objs1[i], objs1[i + 1], lets1[i]),
                             objs1[i], objs1[i + 1], objs2[j], above=False)
                i += 1
            else:
                sv = whisker(ring_g.state(objs2[j], objs2[j + 1], lets2[j]),
                             objs2[j], objs2[j + 1], objs1[i], above=True)
                j += 1
            objs.append(stacked_obj(i, j))
            expansions.append([(lab, c) for lab, c in sv.sorted_terms() if c])
        for combo in itertools.product(*expansions):
            coeff = sign
            letters = []
            for lab, c in combo:
                coeff *= c
                letters.append(lab)
            out.append((coeff, (tuple(objs), tuple(letters))))
    return out


def compose(f, g, target=None):
    """Compose two elements; f after g, through the shared middle tangle."""
    fc, gc = f.owner, g.owner
    if fc.spec != gc.spec:
        raise InvalidBoundary("elements live over different surfaces")
    if fc.bottom != gc.top:
        raise InvalidBoundary("middle tangles do not match")
    if target is None:
        if not (fc.arcs_are_identities() and gc.arcs_are_identities()):
            raise InvalidBoundary("provide a target complex when arc inserts are present")
        target = SurfaceComplex(fc.spec, fc.top, gc.bottom, fc.depth + gc.depth,
                                reduced=fc.reduced)
    if target.top != fc.top or target.bottom != gc.bottom:
        raise InvalidBoundary("target complex has the wrong boundary tangles")
    h_out = f.h + g.h
    if -h_out > target.depth:
        raise TruncationError(
            f"composite sits at degree {h_out}, below the target depth {target.depth}"
        )
    names = fc.seam_names
    result = {}
    shuffles = {}
    for (wf, labf), cf in f.terms.items():
        if not cf:
            continue
        rf = [len(w[1]) for w in wf]
        for (wg, labg), cg in g.terms.items():
            if not cg:
                continue
            rg = [len(w[1]) for w in wg]
            cross = sum(rg[s] * rf[t] for s in range(len(names))
                        for t in range(s + 1, len(names)))
            sign_cross = -1 if cross % 2 else 1
            m1, m2 = fc.m_tangle(wf), gc.m_tangle(wg)
            st = _stacked_state(fc, gc, target, m1, m2, labf, labg)
            per_seam = []
            for s, name in enumerate(names):
                key = (name, wf[s], wg[s])
                if key not in shuffles:
                    shuffles[key] = _shuffle_compose(fc.rings[name], gc.rings[name],
                                                     wf[s], wg[s])
                per_seam.append(shuffles[key])
            for combo in itertools.product(*per_seam):
                w_out = tuple(w for _c, w in combo)
                coeff = cf * cg * sign_cross
                for c, _w in combo:
                    coeff *= c
                if not coeff:
                    continue
                for lab_out, c_out in st.sorted_terms():
                    if not c_out:
                        continue
                    key = (w_out, lab_out)
                    result[key] = result.get(key, 0) + coeff * c_out
    return SurfaceElement(target, h_out, {k: v for k, v in result.items() if v})


def _splice_caps(tangle, ri, si, rj, sj, order):
    """Merge region rj's cap into region ri's across one seam.

    Seam points are identified end to end (point t on the minus side against
    point n-1-t on the plus side) and chords are followed through the
    identification.  Returns the merged cap, its counts, a map from old
    (region, point) to merged points, and a map from old (region, chord
    index) to merged chord indices.
    """
    counts = tangle.counts
    n = counts[ri][si]
    start_old = {}
    for r in (ri, rj):
        acc = 0
        for s, c in enumerate(counts[r]):
            start_old[(r, s)] = acc
            acc += c
    point_map = {}
    acc = 0
    new_counts = []
    for r, s in order:
        for t in range(counts[r][s]):
            point_map[(r, start_old[(r, s)] + t)] = acc + t
        acc += counts[r][s]
        new_counts.append(counts[r][s])
    gi, gj = start_old[(ri, si)], start_old[(rj, sj)]
    ident = {}
    for t in range(n):
        ident[(ri, gi + t)] = (rj, gj + n - 1 - t)
        ident[(rj, gj + n - 1 - t)] = (ri, gi + t)

    partner = [None] * acc
    paths = []
    visited = set()
    for r0, p0 in point_map:
        if (r0, p0) in visited:
            continue
        chain = []
        r, p = r0, p0
        while True:
            q = tangle.caps[r].partner[p]
            chain.append((r, _chord_index(tangle.caps[r], p)))
            if (r, q) not in ident:
                break
            r, p = ident[(r, q)]
        visited.add((r0, p0))
        visited.add((r, q))
        u, v = point_map[(r0, p0)], point_map[(r, q)]
        partner[u], partner[v] = v, u
        paths.append(((u, v), chain))
    if any(v is None for v in partner):
        raise SpecError("coarsening would close a tangle component off the boundary")
    seen_chords = {rc for _, chain in paths for rc in chain}
    for r in (ri, rj):
        for k in range(len(tangle.caps[r].chords)):
            if (r, k) not in seen_chords:
                raise SpecError("coarsening would close a tangle component off the boundary")
    merged = PlanarTangle(acc, 0, tuple(partner))
    chord_carry = {}
    for (u, v), chain in paths:
        new_k = _chord_index(merged, u)
        for rc in chain:
            chord_carry[rc] = new_k
    return merged, tuple(new_counts), point_map, chord_carry


def coarsen(cx, seam, check=True):
    """Delete one seam, collapsing its plugs into each other.

    Returns the complex over the coarsened surface and the chain map from
    cx.truncated onto its truncated complex.  Words with letters at the
    removed seam map to zero; length-zero words map by one saddle per plug
    chord.
    """
    spec = cx.spec
    if seam not in spec.seams:
        raise SpecError(f"unknown seam {seam!r}")
    g_idx = cx._seam_pos[seam]
    (ri, si), (rj, sj) = spec.seam_sides(seam)
    if ri == rj:
        raise SpecError(
            f"seam {seam!r} has both sides on one region; removing it does not leave disks"
        )
    order = ([(ri, s) for s in range(si)]
             + [(rj, s) for s in range(sj + 1, len(spec.regions[rj]))]
             + [(rj, s) for s in range(sj)]
             + [(ri, s) for s in range(si + 1, len(spec.regions[ri]))])
    merged_segs = tuple(spec.regions[r][s] for r, s in order)
    new_regions = []
    region_pos = {}
    for r in range(len(spec.regions)):
        if r == rj:
            continue
        region_pos[r] = len(new_regions)
        new_regions.append(merged_segs if r == ri else spec.regions[r])
    region_pos[rj] = region_pos[ri]
    new_spec = SurfaceSpec(spec.arcs, tuple(n for n in spec.seams if n != seam),
                           tuple(new_regions))
    seg_pos = {}
    for r in range(len(spec.regions)):
        if r in (ri, rj):
            continue
        for s in range(len(spec.regions[r])):
            seg_pos[(r, s)] = (region_pos[r], s)
    for new_s, (r, s) in enumerate(order):
        seg_pos[(r, s)] = (region_pos[ri], new_s)

    def splice(tangle):
        merged, new_counts, point_map, chord_carry = _splice_caps(tangle, ri, si, rj, sj, order)
        caps, counts = [], []
        for r in range(len(spec.regions)):
            if r == rj:
                continue
            if r == ri:
                caps.append(merged)
                counts.append(new_counts)
            else:
                caps.append(tangle.caps[r])
                counts.append(tangle.counts[r])
        return SurfaceTangle(tuple(caps), tuple(counts)), point_map, chord_carry

    new_top, top_points, top_chords = splice(cx.top)
    new_bot, bot_points, bot_chords = splice(cx.bottom)
    target = SurfaceComplex(new_spec, new_top, new_bot, cx.depth,
                            inserts=cx.inserts, reduced=cx.reduced, check=check)

    z_arc_map = _closure_arc_map(cx, target, region_pos, ri, rj,
                                 bot_points, bot_chords, top_points, top_chords)
    m_arc_map = _middle_arc_map(cx, target, seg_pos, seam)

    comps = {}
    for h, mws in cx.multiwords.items():
        mat = {}
        for j, mw in enumerate(mws):
            objs, letters = mw[g_idx]
            if letters:
                continue
            a0 = objs[0]
            mw_t = mw[:g_idx] + mw[g_idx + 1:]
            i_t = target.index[h][mw_t]
            m_src = cx.m_tangle(mw)
            d_src, off_src = hom_double(cx.z_jux, m_src)
            d_tgt, _off_tgt = hom_double(target.z_jux, target.m_tangle(mw_t))
            surgeries = _plug_surgeries(cx, seam, mw, a0, m_src, d_src)
            arc_map = dict(z_arc_map)
            arc_map.update(m_arc_map[mw])
            for lab, _raw in kh_basis(d_src, off_src):
                col = cx._positions[h][(j, lab)]
                sv = StateVector(d_src, off_src, {lab: 1})
                for arc1, arc2, pairing in surgeries:
                    sv = sv.surgered(arc1, arc2, pairing)
                image = transport(sv, d_tgt, arc_map)
                for lab2, c2 in image.terms.items():
                    if not c2:
                        continue
                    row = target._positions[h][(i_t, lab2)]
                    mat[(row, col)] = mat.get((row, col), 0) + c2
        comps[h] = mat
    return target, ChainMap(cx.truncated, target.truncated, comps, check=check)


def _region_offsets(cx):
    """Cumulative closure point offsets per region, bottom and top."""
    boff, toff = [], []
    b = t = 0
    for z in cx.z_regions:
        boff.append(b)
        toff.append(t)
        b += z.bottom
        t += z.top
    return boff, toff


def _closure_arc_map(cx, target, region_pos, ri, rj,
                     bot_points, bot_chords, top_points, top_chords):
    """Old closure chord arcs to new ones, following the cap splice."""
    src_b, src_t = _region_offsets(cx)
    tgt_b, tgt_t = _region_offsets(target)
    out = {}
    for r in range(len(cx.spec.regions)):
        nr = region_pos[r]
        sc, tc = cx.bottom.caps[r], cx.top.caps[r]
        for k in range(len(sc.chords)):
            if r in (ri, rj):
                nk = bot_chords[(r, k)]
                p_new = target.bottom.caps[nr].chords[nk][0]
            else:
                p_new = sc.chords[k][0]
            old_arc = ("x", _chord_index(cx.z_jux, src_b[r] + sc.chords[k][0]))
            out[old_arc] = ("x", _chord_index(target.z_jux, tgt_b[nr] + p_new))
        for k in range(len(tc.chords)):
            if r in (ri, rj):
                nk = top_chords[(r, k)]
                p_new = target.top.caps[nr].chords[nk][0]
            else:
                p_new = tc.chords[k][0]
            old_arc = ("x", _chord_index(cx.z_jux, cx.z_jux.bottom + src_t[r] + tc.chords[k][0]))
            out[old_arc] = ("x", _chord_index(target.z_jux,
                                              target.z_jux.bottom + tgt_t[nr] + p_new))
    return out


def _slot_offsets(cx, mw):
    """Cumulative middle-layer point offsets per slot for a word tuple."""
    boff, toff = [], []
    b = t = 0
    for tangle in cx.slot_tangles(mw):
        boff.append(b)
        toff.append(t)
        b += tangle.bottom
        t += tangle.top
    return boff, toff


def _middle_arc_map(cx, target, seg_pos, seam):
    """Per word tuple, old middle chord arcs to new ones away from the seam."""
    g_idx = cx._seam_pos[seam]
    out = {}
    for h, mws in cx.multiwords.items():
        for mw in mws:
            if mw[g_idx][1]:
                continue
            mw_t = mw[:g_idx] + mw[g_idx + 1:]
            m_src, m_tgt = cx.m_tangle(mw), target.m_tangle(mw_t)
            src_b, src_t = _slot_offsets(cx, mw)
            tgt_b, tgt_t = _slot_offsets(target, mw_t)
            amap = {}
            slots = cx.slot_tangles(mw)
            for k_old, tangle in enumerate(slots):
                r, s = cx._slot_pos[k_old]
                pos = seg_pos.get((r, s))
                if pos is None:
                    continue
                k_new = target._slot_global[pos]
                for p, _q in tangle.chords:
                    if p < tangle.bottom:
                        gp_old = src_b[k_old] + p
                        gp_new = tgt_b[k_new] + p
                    else:
                        gp_old = m_src.bottom + src_t[k_old] + (p - tangle.bottom)
                        gp_new = m_tgt.bottom + tgt_t[k_new] + (p - tangle.bottom)
                    amap[("y", _chord_index(m_src, gp_old))] = ("y", _chord_index(m_tgt, gp_new))
            out[mw] = amap
    return out


def transfer(elem, cmap, target):
    """Push an element through a chain map onto the target surface complex."""
    owner = elem.owner
    if cmap.source is not owner.truncated or cmap.target is not target.truncated:
        raise InvalidBoundary("chain map does not connect these complexes")
    comp = cmap.components.get(elem.h, {})
    vec = {}
    for (mw, lab), c in elem.terms.items():
        if not c:
            continue
        col = owner._positions[elem.h][(owner.index[elem.h][mw], lab)]
        for (row, col2), c2 in comp.items():
            if col2 == col:
                vec[row] = vec.get(row, 0) + c * c2
    terms = {}
    for row, c in vec.items():
        if not c:
            continue
        (i, lab), _q = target.truncated.generators[elem.h][row]
        terms[(target.multiwords[elem.h][i], lab)] = c
    return SurfaceElement(target, elem.h, terms)


def h0(spec, top, bottom, q_degree, inserts=None, reduced=True):
    """Rank of the degree-zero homology in one quantum degree.

    Exact: only bar lengths zero and one enter, so no truncation is needed.
    """
    cx = SurfaceComplex(spec, top, bottom, depth=1, inserts=inserts, reduced=reduced)
    return cx.truncated.homology_at(0, q_degree)[0]


def symmetrized_pairing(spec, x, y, h_range, q_range, depth=None, threads=None):
    """Homology of the hom complex pairing two surface tangles.

    Reflecting the second factor is the identity on cap matchings, so the
    pairing complex is the hom complex from y to x; the symmetry in x and y
    holds at the level of homology, not of chains.
    """
    if depth is None:
        depth = -h_range[0] + 1
    cx = SurfaceComplex(spec, x, y, depth=depth)
    return cx.truncated.homology(h_range, q_range, threads)


def _plug_surgeries(cx, seam, mw, a0, m_src, d_src):
    """Saddle data joining the two plug copies of a length-zero seam word.

    The minus-side slot holds a0 reflected; point t there is glued to point
    count-1-t on the plus side, separately along the bottom and the top.
    One surgery per chord of a0.
    """
    neg = cx._seam_slots[seam][-1]
    pos = cx._seam_slots[seam][1]
    src_b, src_t = _slot_offsets(cx, mw)

    def glob(slot, p):
        if p < a0.bottom:
            return src_b[slot] + p
        return m_src.bottom + src_t[slot] + (p - a0.bottom)

    def mir(p):
        if p < a0.bottom:
            return a0.bottom - 1 - p
        return a0.bottom + (a0.top - 1 - (p - a0.bottom))

    def node(gp):
        if gp < m_src.bottom:
            return d_src.node_of_port(("y", "b", gp))
        return d_src.node_of_port(("y", "t", gp - m_src.bottom))

    out = []
    for u, v in a0.chords:
        gnu, gnv = glob(neg, mir(u)), glob(neg, mir(v))
        gpu, gpv = glob(pos, u), glob(pos, v)
        arc1 = ("y", _chord_index(m_src, gnu))
        arc2 = ("y", _chord_index(m_src, gpu))
        out.append((arc1, arc2, ((node(gnu), node(gpu)), (node(gnv), node(gpv)))))
    return out
