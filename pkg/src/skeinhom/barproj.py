"""Projector complexes of flat tangles via the reduced bar construction.

The ring of a strand split (m, n) collects the hom spaces among all minimal
flat (m, n)-tangles.  Words in its reduced letters (basis elements other than
identities) index the chain objects of the bottom projector: a word from a0
to ar contributes the through-degree-zero tangle that folds a0 down onto the
bottom edge and ar up onto the top edge, shifted by the word's total letter
degree plus half the strand count.  Face maps absorb the outer letters into
the folds and compose adjacent inner letters, with alternating signs.

TwistedTangleComplex is the common carrier: a complex whose objects are
shifted flat tangles (free circles allowed) and whose differentials are
state vectors between their doubles.  Evaluating hom from a fixed tangle
turns it into an integer complex for the homological algebra layer.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache

from .errors import ChainMapError, GradingError, InvalidBoundary, TruncationError
from .homalg import LaurentPoly, TruncatedComplex
from .planar import (PlanarTangle, bend_down, bend_up, compose, enumerate_matchings,
                     identity_tangle, juxtapose)
from .tqft import (ONE, X, StateVector, basis_state, hom_double, identity_state,
                   juxtaposed, kh_basis, pair, reflected_x, transposed, whisker)


class SmallRing:
    """Hom spaces among the minimal flat (m, n)-tangles, with composition."""

    def __init__(self, m, n):
        self.m, self.n = m, n
        self.objects = enumerate_matchings(m, n)
        if not self.objects:
            raise InvalidBoundary(f"no flat ({m}, {n})-tangles exist")
        self._doubles = {}
        self._bases = {}
        self._products = {}

    def double(self, a, b):
        key = (a, b)
        if key not in self._doubles:
            self._doubles[key] = hom_double(a, b)
        return self._doubles[key]

    def basis(self, a, b):
        key = (a, b)
        if key not in self._bases:
            self._bases[key] = kh_basis(*self.double(a, b))
        return self._bases[key]

    def degree(self, a, b, lab):
        d, off = self.double(a, b)
        return int(off) + sum(1 if l == X else -1 for l in lab)

    def state(self, a, b, lab):
        d, off = self.double(a, b)
        return StateVector(d, off, {tuple(lab): 1})

    def identity_labeling(self, a):
        ident = identity_state(a)
        (lab, _), = ident.sorted_terms()
        return lab

    def reduced(self, a, b):
        """Letter labelings: every basis element except the identity."""
        labs = [lab for lab, _ in self.basis(a, b)]
        if a == b:
            labs.remove(self.identity_labeling(a))
        return tuple(labs)

    def mul(self, a, b, c, lab1, lab2):
        key = (a, b, c, tuple(lab1), tuple(lab2))
        if key not in self._products:
            self._products[key] = pair(a, b, c, self.state(a, b, lab1), self.state(b, c, lab2))
        return self._products[key]

    def gram(self):
        """Graded dimensions of all hom spaces, as a nested dict."""
        out = {}
        for a in self.objects:
            for b in self.objects:
                counts = {}
                for _, deg in self.basis(a, b):
                    counts[deg] = counts.get(deg, 0) + 1
                out[(a, b)] = LaurentPoly(counts)
        return out

    @property
    def min_letter_degree(self):
        """Smallest degree of a non-identity letter, or None if there are none."""
        degs = []
        for a in self.objects:
            for b in self.objects:
                degs.extend(self.degree(a, b, lab) for lab in self.reduced(a, b))
        return min(degs) if degs else None


def bar_words(ring, r):
    """All reduced words of length r, as (objects, letters) pairs.

    Objects is a tuple of r+1 ring objects and letters a tuple of r basis
    labelings, letter i mapping objects[i] to objects[i+1].
    """
    if r == 0:
        return tuple(((a,), ()) for a in ring.objects)
    words = []
    for objs in itertools.product(ring.objects, repeat=r + 1):
        pools = [ring.reduced(objs[i], objs[i + 1]) for i in range(r)]
        for letters in itertools.product(*pools):
            words.append((objs, letters))
    return tuple(words)


def word_degree(ring, word):
    objs, letters = word
    return sum(ring.degree(objs[i], objs[i + 1], lab) for i, lab in enumerate(letters))


@lru_cache(maxsize=None)
def fold_tangle(a0, ar):
    """The (N, N) through-degree-zero tangle with a0 folded down and ar up."""
    caps = bend_down(a0.reflect_x())
    cups = bend_up(ar)
    N = caps.bottom
    if cups.top != N:
        raise InvalidBoundary("folded tangles need matching strand counts")
    partner = [0] * (2 * N)
    for p, q in caps.chords:
        partner[p], partner[q] = q, p
    for p, q in cups.chords:
        partner[N + p], partner[N + q] = N + q, N + p
    return PlanarTangle(N, N, tuple(partner))


def _cap_chord_index(a0, p, q):
    """Chord index in reflect_x(a0) folding onto the cap chord (p, q)."""
    u = a0.reflect_x()
    m, n = u.bottom, u.top

    def inv(v):
        return v if v < m else m + n - 1 - (v - m)

    s, t = sorted((inv(p), inv(q)))
    return u.chords.index((s, t))


def _cup_chord_index(ar, p, q):
    """Chord index in ar folding onto the cup chord at positions (p, q)."""
    m = ar.bottom

    def inv(w):
        return m - 1 - w if w < m else w

    s, t = sorted((inv(p), inv(q)))
    return ar.chords.index((s, t))


def fold_entry(a0, ar, b0, br, cap_sv, cup_sv):
    """A morphism between fold tangles acting separately on caps and cups.

    cap_sv lives on the double of reflect_x(a0) and reflect_x(b0); cup_sv on
    the double of ar and br.  Their labels are carried onto the bottom and
    top circle families of the fold double.
    """
    Ta, Tb = fold_tangle(a0, ar), fold_tangle(b0, br)
    D, off = hom_double(Ta, Tb)
    N = Ta.bottom
    assignment = []
    for circ in D.circles:
        arc = next(a for a in circ if a[0] == "x")
        p, q = Ta.chords[arc[1]]
        if q < N:
            k0 = _cap_chord_index(a0, p, q)
            assignment.append((0, cap_sv.diagram.component_of[("x", k0)]))
        else:
            k0 = _cup_chord_index(ar, p - N, q - N)
            assignment.append((1, cup_sv.diagram.component_of[("x", k0)]))
    terms = {}
    for lab_cap, c1 in cap_sv.sorted_terms():
        for lab_cup, c2 in cup_sv.sorted_terms():
            lab = tuple((lab_cap, lab_cup)[w][i] for w, i in assignment)
            terms[lab] = terms.get(lab, 0) + c1 * c2
    return StateVector(D, off, terms)


class TwistedTangleComplex:
    """A complex of grading-shifted flat tangles with state-vector entries.

    objects: {h: ((tangle, qshift), ...)}; differentials: {h: {(i, j): sv}}
    with sv a morphism from object j of degree h to object i of degree h+1,
    homogeneous of raw degree qshift_j - qshift_i so that hom evaluation
    preserves the quantum grading.  Degrees below h_min may be truncated
    away, in which case a certificate bounds the shifts living there; the
    tangles down there are assumed to repeat tangles already present.
    """

    def __init__(self, objects, differentials, h_min=None, h_max=None,
                 complete=True, certificate=None, check=True):
        self.objects = {h: tuple(obs) for h, obs in objects.items() if obs}
        self.differentials = {
            h: {k: sv for k, sv in d.items() if sv} for h, d in differentials.items()
        }
        self.differentials = {h: d for h, d in self.differentials.items() if d}
        degrees = sorted(self.objects)
        self.h_min = h_min if h_min is not None else (degrees[0] if degrees else 0)
        self.h_max = h_max if h_max is not None else (degrees[-1] if degrees else 0)
        self.complete = complete
        self.certificate = certificate
        if check:
            self._validate()

    def _validate(self):
        for h, d in self.differentials.items():
            src = self.objects.get(h, ())
            tgt = self.objects.get(h + 1, ())
            for (i, j), sv in d.items():
                T_src, s_src = src[j]
                T_tgt, s_tgt = tgt[i]
                expected, _ = hom_double(T_src, T_tgt)
                if sv.diagram.arcs != expected.arcs:
                    raise GradingError(f"entry ({i}, {j}) at degree {h} is on the wrong double")
                if not sv.is_homogeneous():
                    raise GradingError(f"entry ({i}, {j}) at degree {h} is inhomogeneous")
                if sv and sv.degrees()[0] != s_src - s_tgt:
                    raise GradingError(
                        f"entry ({i}, {j}) at degree {h} has degree {sv.degrees()[0]}, "
                        f"expected {s_src - s_tgt}"
                    )
        for h in sorted(self.differentials):
            if h + 1 not in self.differentials:
                continue
            first, second = self.differentials[h], self.differentials[h + 1]
            acc = {}
            for (k, j), sv1 in first.items():
                for (i, k2), sv2 in second.items():
                    if k2 != k:
                        continue
                    T_j = self.objects[h][j][0]
                    T_k = self.objects[h + 1][k][0]
                    T_i = self.objects[h + 2][i][0]
                    prod = pair(T_j, T_k, T_i, sv1, sv2)
                    if (i, j) in acc:
                        acc[(i, j)] = acc[(i, j)] + prod
                    else:
                        acc[(i, j)] = prod
            bad = [k for k, sv in acc.items() if sv]
            if bad:
                raise ChainMapError(f"differential does not square to zero from degree {h}: {bad[:3]}")

    def shifted(self, dh=0, dq=0):
        objects = {
            h + dh: tuple((T, s + dq) for T, s in obs) for h, obs in self.objects.items()
        }
        sign = -1 if dh % 2 else 1
        diffs = {
            h + dh: {k: sv.scaled(sign) for k, sv in d.items()}
            for h, d in self.differentials.items()
        }
        cert = None
        if self.certificate is not None:
            cert = lambda r: self.certificate(r + dh) + dq
        return TwistedTangleComplex(objects, diffs, self.h_min + dh, self.h_max + dh,
                                    self.complete, cert, check=False)

    def stacked(self, e, above=True):
        """Glue the fixed tangle e onto every object, whiskering entries."""
        objects = {
            h: tuple((compose(e, T) if above else compose(T, e), s) for T, s in obs)
            for h, obs in self.objects.items()
        }
        diffs = {}
        for h, d in self.differentials.items():
            new = {}
            for (i, j), sv in d.items():
                T_src = self.objects[h][j][0]
                T_tgt = self.objects[h + 1][i][0]
                new[(i, j)] = whisker(sv, T_src, T_tgt, e, above=above)
            diffs[h] = new
        return TwistedTangleComplex(objects, diffs, self.h_min, self.h_max,
                                    self.complete, self.certificate, check=False)

    def _hom_floor(self, b):
        floor = 0
        for obs in self.objects.values():
            for T, _ in obs:
                d, off = hom_double(b, T)
                floor = min(floor, int(off) - len(d))
        return floor

    def hom_complex(self, b, check=True):
        """Evaluate hom from the fixed tangle b, object by object."""
        gens = {}
        diffs = {}
        positions = {}
        for h, obs in sorted(self.objects.items()):
            bucket = []
            for i, (T, s) in enumerate(obs):
                d, off = hom_double(b, T)
                for lab, raw in kh_basis(d, off):
                    positions[(h, i, lab)] = len(bucket)
                    bucket.append(((i, lab), s + raw))
            gens[h] = tuple(bucket)
        for h, d in sorted(self.differentials.items()):
            entries = {}
            for (i, j), sv in d.items():
                T_src, _ = self.objects[h][j]
                T_tgt, _ = self.objects[h + 1][i]
                dd, off = hom_double(b, T_src)
                for lab, _raw in kh_basis(dd, off):
                    src_state = basis_state(b, T_src, lab)
                    out = pair(b, T_src, T_tgt, src_state, sv)
                    col = positions[(h, j, lab)]
                    for lab_out, coeff in out.sorted_terms():
                        row = positions[(h + 1, i, lab_out)]
                        entries[(row, col)] = entries.get((row, col), 0) + coeff
            diffs[h] = {k: v for k, v in entries.items() if v}
        cert = None
        if self.certificate is not None:
            floor = self._hom_floor(b)
            cert = lambda r: self.certificate(r) + floor
        return TruncatedComplex(gens, diffs, self.h_min, self.h_max,
                                self.complete, cert, check=check)

    def k0_series(self, tangle, q_range):
        """Alternating sum of shift monomials over objects equal to tangle."""
        j1, j2 = q_range
        if not self.complete:
            if self.certificate is None:
                raise TruncationError("no certificate for the truncated degrees")
            bound = self.certificate(-(self.h_min - 1))
            if bound <= j2:
                raise TruncationError(
                    f"series at q={j2} needs degrees below {self.h_min} "
                    f"(certificate bound {bound})"
                )
        out = {}
        for h, obs in self.objects.items():
            for T, s in obs:
                if T == tangle:
                    out[s] = out.get(s, 0) + (-1) ** (h % 2)
        return LaurentPoly(out).truncated(j1, j2)


def unit_complex(N):
    return TwistedTangleComplex({0: ((identity_tangle(N), 0),)}, {})


def bottom_projector(N, depth, split=None):
    """The bar-resolution projector on N strands, truncated at bar degree depth.

    Chain objects at degree -r are fold tangles of reduced words of length r,
    shifted by N/2 plus the word degree.
    """
    if N % 2:
        raise InvalidBoundary("an odd strand count admits no flat fold objects")
    if split is None:
        split = (N // 2, N // 2)
    m, n = split
    if m + n != N:
        raise InvalidBoundary(f"split {split} does not sum to {N}")
    ring = SmallRing(m, n)
    words = {r: bar_words(ring, r) for r in range(depth + 1)}
    index = {r: {w: i for i, w in enumerate(ws)} for r, ws in words.items()}
    objects = {}
    for r, ws in words.items():
        objects[-r] = tuple(
            (fold_tangle(w[0][0], w[0][-1]), N // 2 + word_degree(ring, w)) for w in ws
        )
    diffs = {}
    for r in range(1, depth + 1):
        entries = {}
        for j, (objs, letters) in enumerate(words[r]):
            a0, ar = objs[0], objs[-1]
            faces = []
            # left absorption: the first letter acts on the bottom caps
            w0 = (objs[1:], letters[1:])
            f1 = ring.state(objs[0], objs[1], letters[0])
            sv0 = fold_entry(a0, ar, objs[1], ar,
                             reflected_x(f1, objs[0], objs[1]), identity_state(ar))
            faces.append((w0, sv0))
            # inner compositions
            for i in range(1, r):
                prod = ring.mul(objs[i - 1], objs[i], objs[i + 1],
                                letters[i - 1], letters[i])
                ident = identity_state(fold_tangle(a0, ar))
                for lab, coeff in prod.sorted_terms():
                    wi = (objs[:i] + objs[i + 1:],
                          letters[:i - 1] + (lab,) + letters[i + 1:])
                    sv = ident.scaled(coeff * (-1) ** (i % 2))
                    faces.append((wi, sv))
            # right absorption: the last letter acts on the top cups
            wr = (objs[:-1], letters[:-1])
            fr = ring.state(objs[-2], objs[-1], letters[-1])
            svr = fold_entry(a0, ar, a0, objs[-2],
                             identity_state(a0.reflect_x()),
                             transposed(fr, objs[-2], objs[-1]))
            faces.append((wr, svr.scaled((-1) ** (r % 2))))
            for w_tgt, sv in faces:
                i_tgt = index[r - 1][w_tgt]
                key = (i_tgt, j)
                if key in entries:
                    entries[key] = entries[key] + sv
                else:
                    entries[key] = sv
        diffs[-r] = {k: sv for k, sv in entries.items() if sv}
    c_min = ring.min_letter_degree
    if c_min is None:
        return TwistedTangleComplex(objects, diffs, -depth, 0, complete=True)
    cert = lambda r: N // 2 + c_min * r
    return TwistedTangleComplex(objects, diffs, -depth, 0,
                                complete=False, certificate=cert)


def counit_components(projector, N):
    """The fold-collapse map onto the identity tangle, at chain degree zero."""
    comps = {}
    ident = identity_tangle(N)
    entries = {}
    for j, (T, s) in enumerate(projector.objects[0]):
        D, off = hom_double(T, ident)
        all_ones = StateVector(D, off, {(ONE,) * len(D): 1})
        if all_ones.degrees()[0] != s:
            raise GradingError("fold collapse has unexpected degree")
        entries[(0, j)] = all_ones
    comps[0] = entries
    return comps


def twisted_cone(source, target, components, check=True):
    """Mapping cone of a degree-zero map between twisted complexes."""
    if check:
        _verify_twisted_map(source, target, components)
    objects, diffs = {}, {}
    offs = {}
    h_lo = min(source.h_min - 1, target.h_min)
    h_hi = max(source.h_max - 1, target.h_max)
    for h in range(h_lo, h_hi + 1):
        bucket = list(target.objects.get(h, ()))
        offs[h] = len(bucket)
        bucket.extend(source.objects.get(h + 1, ()))
        if bucket:
            objects[h] = tuple(bucket)
    for h in range(h_lo, h_hi):
        d = {}
        for (i, j), sv in target.differentials.get(h, {}).items():
            d[(i, j)] = sv
        for (i, j), sv in components.get(h + 1, {}).items():
            d[(i, offs[h] + j)] = sv
        for (i, j), sv in source.differentials.get(h + 1, {}).items():
            d[(offs[h + 1] + i, offs[h] + j)] = sv.scaled(-1)
        if d:
            diffs[h] = d
    complete = source.complete and target.complete
    cert = None
    if not complete:
        def cert(r):
            vals = []
            for cx, shift in ((target, 0), (source, 1)):
                h = -r + shift
                if h > cx.h_max:
                    continue
                if h >= cx.h_min:
                    vals.extend(s for _, s in cx.objects.get(h, ()))
                elif not cx.complete:
                    vals.append(cx.certificate(-h))
            return min(vals) if vals else 10 ** 9
    return TwistedTangleComplex(objects, diffs, h_lo, h_hi, complete, cert, check=False)


def _verify_twisted_map(source, target, components):
    lo = max(source.h_min, target.h_min)
    hi = min(source.h_max, target.h_max)
    for h in range(lo, hi):
        acc = {}
        for (k, j), sv in source.differentials.get(h, {}).items():
            for (i, k2), f in components.get(h + 1, {}).items():
                if k2 != k:
                    continue
                prod = pair(source.objects[h][j][0], source.objects[h + 1][k][0],
                            target.objects[h + 1][i][0], sv, f)
                acc[(i, j)] = acc[(i, j)] + prod if (i, j) in acc else prod
        for (k, j), f in components.get(h, {}).items():
            for (i, k2), sv in target.differentials.get(h, {}).items():
                if k2 != k:
                    continue
                prod = pair(source.objects[h][j][0], target.objects[h][k][0],
                            target.objects[h + 1][i][0], f, sv)
                prod = prod.scaled(-1)
                acc[(i, j)] = acc[(i, j)] + prod if (i, j) in acc else prod
        bad = [key for key, sv in acc.items() if sv]
        if bad:
            raise ChainMapError(f"components do not commute with differentials at {h}: {bad[:3]}")


def signed_shuffles(r, s):
    """All interleavings of r left slots and s right slots with shuffle signs."""
    out = []
    for positions in itertools.combinations(range(r + s), r):
        pattern = [2] * (r + s)
        for p in positions:
            pattern[p] = 1
        inv = sum(1 for p in positions for idx2, v in enumerate(pattern)
                  if v == 2 and p > idx2)
        out.append(((-1) ** (inv % 2), tuple(pattern)))
    return tuple(out)


def shuffle_words(w1, w2):
    """Signed interleavings of two letter tuples."""
    out = []
    for sign, pattern in signed_shuffles(len(w1), len(w2)):
        it1, it2 = iter(w1), iter(w2)
        merged = tuple(next(it1) if v == 1 else next(it2) for v in pattern)
        out.append((sign, merged))
    return out
