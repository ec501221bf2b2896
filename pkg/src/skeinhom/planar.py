"""Crossingless planar tangles in a rectangle, and closed diagrams.

Boundary points of an (m, n)-tangle are indexed 0..m-1 along the bottom edge
left to right, then m..m+n-1 along the top edge left to right.  Chords are
noncrossing with respect to the boundary circle of the rectangle, which is
traversed bottom left-to-right and then top right-to-left.

A ClosedDiagram is a finite collection of tangle instances whose boundary
ports are completely glued in pairs.  Its circles are traced once at
construction time and listed in a deterministic order, so that everything
downstream (labelings, matrices, CLI output) is reproducible byte for byte.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .errors import InvalidBoundary, OpenBoundary


def _sort_key(x):
    # total order on heterogeneous tuple ids
    return repr(x)


@dataclass(frozen=True)
class PlanarTangle:
    """A crossingless (bottom, top)-tangle plus a count of free circles."""

    bottom: int
    top: int
    partner: tuple
    circles: int = 0

    def __post_init__(self):
        k = self.bottom + self.top
        if len(self.partner) != k:
            raise InvalidBoundary(f"partner array has length {len(self.partner)}, expected {k}")
        for p, q in enumerate(self.partner):
            if not (0 <= q < k) or q == p or self.partner[q] != p:
                raise InvalidBoundary(f"partner array {self.partner} is not a fixed-point-free involution")
        if self.circles < 0:
            raise InvalidBoundary("negative circle count")
        if not self._noncrossing():
            raise InvalidBoundary(f"chords of {self.partner} cross")

    def _cyclic_position(self, p):
        if p < self.bottom:
            return p
        return self.bottom + (self.bottom + self.top - 1 - p)

    def _noncrossing(self):
        pos = [self._cyclic_position(p) for p in range(self.points)]
        for (a, b), (c, d) in itertools.combinations(self.chords, 2):
            a, b = sorted((pos[a], pos[b]))
            c, d = sorted((pos[c], pos[d]))
            if (a < c < b < d) or (c < a < d < b):
                return False
        return True

    @property
    def chords(self):
        return tuple(sorted((p, q) for p, q in enumerate(self.partner) if p < q))

    @property
    def points(self):
        return self.bottom + self.top

    def port_of_point(self, p):
        """Point index -> ("b"|"t", position) port name."""
        assert 0 <= p < self.points
        return ("b", p) if p < self.bottom else ("t", p - self.bottom)

    def is_identity(self):
        return (
            self.circles == 0
            and self.bottom == self.top
            and all(self.partner[i] == self.bottom + i for i in range(self.bottom))
        )

    def with_circles(self, circles):
        return PlanarTangle(self.bottom, self.top, self.partner, circles)

    def strip_circles(self):
        return self.with_circles(0)

    def reflect_x(self):
        """Left-right mirror."""
        m, n = self.bottom, self.top
        ref = lambda p: (m - 1 - p) if p < m else m + (n - 1 - (p - m))
        partner = [0] * (m + n)
        for p, q in enumerate(self.partner):
            partner[ref(p)] = ref(q)
        return PlanarTangle(m, n, tuple(partner), self.circles)

    def reflect_y(self):
        """Top-bottom mirror; swaps the roles of the two edges."""
        m, n = self.bottom, self.top
        ref = lambda p: (n + p) if p < m else p - m
        partner = [0] * (m + n)
        for p, q in enumerate(self.partner):
            partner[ref(p)] = ref(q)
        return PlanarTangle(n, m, tuple(partner), self.circles)

    def rotate_half(self):
        return self.reflect_x().reflect_y()


def identity_tangle(n):
    return PlanarTangle(n, n, tuple(list(range(n, 2 * n)) + list(range(n))))


def cup_over_cap(m=2):
    """The through-degree-zero (m, m)-tangle: nested caps below, nested cups above."""
    if m % 2:
        raise InvalidBoundary("cup_over_cap needs an even strand count")
    partner = [0] * (2 * m)
    for i in range(m // 2):
        partner[i], partner[m - 1 - i] = m - 1 - i, i
        partner[m + i], partner[2 * m - 1 - i] = 2 * m - 1 - i, m + i
    return PlanarTangle(m, m, tuple(partner))


def rotate_cap(t):
    """One-click rotation of a cap tangle: the last boundary point becomes the first."""
    if t.top != 0:
        raise InvalidBoundary("rotation is defined for cap tangles only")
    k = t.bottom
    partner = [0] * k
    for p, q in enumerate(t.partner):
        partner[(p + 1) % k] = (q + 1) % k
    return PlanarTangle(k, 0, tuple(partner), t.circles)


def compose(upper, lower):
    """Stack upper onto lower, gluing lower's top edge to upper's bottom edge.

    Closed components created at the interface are added to the carried
    circle count.
    """
    if lower.top != upper.bottom:
        raise InvalidBoundary(
            f"cannot glue a {lower.top}-point top edge to a {upper.bottom}-point bottom edge"
        )
    mid = lower.top
    kb, nt = lower.bottom, upper.top

    # encodings while walking: ("L", p) a point of lower, ("U", p) of upper
    def step(enc):
        side, p = enc
        if side == "L":
            q = lower.partner[p]
            return ("U", q - kb) if q >= kb else ("L", q)
        q = upper.partner[p]
        return ("L", kb + q) if q < mid else ("U", q)

    def result_index(enc):
        side, p = enc
        if side == "L" and p < kb:
            return p
        if side == "U" and p >= mid:
            return kb + (p - mid)
        return None

    def twin(enc):
        side, p = enc
        return ("U", p - kb) if side == "L" else ("L", kb + p)

    partner = [None] * (kb + nt)
    touched = set()
    starts = [("L", p) for p in range(kb)] + [("U", p) for p in range(mid, mid + nt)]
    for start in starts:
        if partner[result_index(start)] is not None:
            continue
        cur = step(start)
        while result_index(cur) is None:
            touched.add(cur)
            touched.add(twin(cur))
            cur = step(cur)
        a, b = result_index(start), result_index(cur)
        assert a != b
        partner[a], partner[b] = b, a

    new_circles = 0
    for i in range(mid):
        enc = ("L", kb + i)
        if enc in touched:
            continue
        cur = enc
        while cur not in touched:
            touched.add(cur)
            touched.add(twin(cur))
            cur = step(cur)
        new_circles += 1

    return PlanarTangle(kb, nt, tuple(partner), lower.circles + upper.circles + new_circles)


def juxtapose(*tangles):
    """Place tangles side by side, left to right."""
    total_b = sum(t.bottom for t in tangles)
    total_t = sum(t.top for t in tangles)
    partner = [0] * (total_b + total_t)
    off_b, off_t = 0, 0
    for t in tangles:
        def glob(p, off_b=off_b, off_t=off_t, t=t):
            return (off_b + p) if p < t.bottom else (total_b + off_t + p - t.bottom)

        for p, q in enumerate(t.partner):
            partner[glob(p)] = glob(q)
        off_b += t.bottom
        off_t += t.top
    return PlanarTangle(total_b, total_t, tuple(partner), sum(t.circles for t in tangles))


def bend_down(t):
    """Flatten an (m, n)-tangle to an (m+n, 0)-cap tangle by sweeping the top
    edge clockwise down to the right of the bottom edge."""
    m, n = t.bottom, t.top
    rho = lambda p: p if p < m else m + (m + n - 1 - p)
    partner = [0] * (m + n)
    for p, q in enumerate(t.partner):
        partner[rho(p)] = rho(q)
    return PlanarTangle(m + n, 0, tuple(partner), t.circles)


def bend_up(t):
    """Flatten an (m, n)-tangle to a (0, m+n)-cup tangle, sweeping the bottom
    edge counterclockwise up to the left of the top edge."""
    m, n = t.bottom, t.top
    sig = lambda p: (m - 1 - p) if p < m else p
    partner = [0] * (m + n)
    for p, q in enumerate(t.partner):
        partner[sig(p)] = sig(q)
    return PlanarTangle(0, m + n, tuple(partner), t.circles)


@lru_cache(maxsize=None)
def enumerate_matchings(m, n):
    """All minimal (m, n)-tangles (no free circles), sorted by partner array.

    Empty when m + n is odd; otherwise there are Catalan((m+n)/2) of them.
    """
    k = m + n
    if k % 2:
        return ()
    order = list(range(m)) + list(range(m + n - 1, m - 1, -1))  # boundary circle

    def rec(points):
        if not points:
            yield []
            return
        first = points[0]
        for j in range(1, len(points), 2):
            inside, outside = points[1:j], points[j + 1:]
            for mi in rec(inside):
                for mo in rec(outside):
                    yield [(first, points[j])] + mi + mo

    tangles = []
    for chords in rec(order):
        partner = [0] * k
        for a, b in chords:
            partner[a], partner[b] = b, a
        tangles.append(PlanarTangle(m, n, tuple(partner)))
    return tuple(sorted(tangles, key=lambda t: t.partner))


class ClosedDiagram:
    """A fully glued collection of tangles; a disjoint union of circles.

    Arcs are identified by (instance, chord_index) for tangle chords and by
    (instance, "o", k) for carried free circles.  Nodes are glued port pairs,
    a port being (instance, "b"|"t", position).
    """

    def __init__(self, arcs, port_node=None):
        self.arcs = dict(arcs)
        self.port_node = dict(port_node or {})
        degree = {}
        for a, (u, v) in self.arcs.items():
            degree[u] = degree.get(u, 0) + 1
            degree[v] = degree.get(v, 0) + 1
        bad = [x for x, d in degree.items() if d != 2]
        if bad:
            raise OpenBoundary(f"nodes without exactly two arc ends: {sorted(map(repr, bad))[:4]}")
        self.circles = self._trace()
        self.component_of = {}
        for i, circ in enumerate(self.circles):
            for a in circ:
                self.component_of[a] = i

    def __len__(self):
        return len(self.circles)

    def _trace(self):
        at_node = {}
        for a, (u, v) in self.arcs.items():
            at_node.setdefault(u, []).append(a)
            at_node.setdefault(v, []).append(a)
        unseen = set(self.arcs)
        circles = []
        for start in sorted(self.arcs, key=_sort_key):
            if start not in unseen:
                continue
            circ = [start]
            unseen.discard(start)
            u, v = self.arcs[start]
            node = v
            while True:
                nxt = [a for a in at_node[node] if a in unseen]
                if not nxt:
                    break
                step = min(nxt, key=_sort_key)
                circ.append(step)
                unseen.discard(step)
                a, b = self.arcs[step]
                node = b if a == node else a
            circles.append(tuple(circ))
        return tuple(sorted(circles, key=lambda c: _sort_key(c[0])))

    @classmethod
    def from_instances(cls, tangles, glue):
        """Build from tangle instances and a complete pairing of their ports.

        Ports are (instance, "b"|"t", position); glue must be a symmetric
        involution covering every port exactly once.
        """
        pairing = dict(glue)
        for p, q in pairing.items():
            if pairing.get(q) != p:
                raise OpenBoundary(f"gluing is not symmetric at {p!r}")
        ports = set()
        for inst, t in tangles.items():
            for i in range(t.bottom):
                ports.add((inst, "b", i))
            for j in range(t.top):
                ports.add((inst, "t", j))
        if set(pairing) != ports:
            missing = ports ^ set(pairing)
            raise OpenBoundary(f"gluing does not cover ports exactly: {sorted(map(repr, missing))[:4]}")

        port_node = {}
        for p, q in pairing.items():
            port_node[p] = tuple(sorted((p, q), key=_sort_key))

        arcs = {}
        for inst, t in tangles.items():
            for k, (p, q) in enumerate(t.chords):
                pp = (inst,) + t.port_of_point(p)
                qq = (inst,) + t.port_of_point(q)
                arcs[(inst, k)] = (port_node[pp], port_node[qq])
            for k in range(t.circles):
                loop = ("loop", inst, k)
                arcs[(inst, "o", k)] = (loop, loop)
        return cls(arcs, port_node)

    @classmethod
    def from_stack(cls, layers):
        """Glue a vertical stack of tangles; the stack must be closed."""
        if not layers or layers[0].bottom != 0 or layers[-1].top != 0:
            raise OpenBoundary("stack is not closed top and bottom")
        glue = {}
        for i in range(len(layers) - 1):
            if layers[i].top != layers[i + 1].bottom:
                raise OpenBoundary(
                    f"layer {i} top has {layers[i].top} points, layer {i + 1} bottom {layers[i + 1].bottom}"
                )
            for p in range(layers[i].top):
                glue[(i, "t", p)] = (i + 1, "b", p)
                glue[(i + 1, "b", p)] = (i, "t", p)
        return cls.from_instances(dict(enumerate(layers)), glue)

    @classmethod
    def double(cls, x, y):
        """Glue two (m, n)-tangles along their whole boundary, point to point."""
        if (x.bottom, x.top) != (y.bottom, y.top):
            raise InvalidBoundary("tangles in a double must share boundary data")
        glue = {}
        for side, count in (("b", x.bottom), ("t", x.top)):
            for p in range(count):
                glue[("x", side, p)] = ("y", side, p)
                glue[("y", side, p)] = ("x", side, p)
        return cls.from_instances({"x": x, "y": y}, glue)

    def node_of_port(self, port):
        return self.port_node[port]

    @staticmethod
    def disjoint_union(d1, d2, tag1="1", tag2="2"):
        arcs = {}
        port_node = {}
        for tag, d in ((tag1, d1), (tag2, d2)):
            wrap = lambda x, tag=tag: (tag, x)
            for a, (u, v) in d.arcs.items():
                arcs[wrap(a)] = (wrap(u), wrap(v))
            for p, nd in d.port_node.items():
                port_node[wrap(p)] = wrap(nd)
        return ClosedDiagram(arcs, port_node)

    def surger(self, arc1, arc2, pairing):
        """Cut arc1 and arc2 and reconnect their ends as prescribed.

        pairing is ((u1, u2), (v1, v2)) with {u1, v1} the nodes of arc1 and
        {u2, v2} those of arc2; the new arcs run u1-u2 and v1-v2.
        """
        if arc1 not in self.arcs or arc2 not in self.arcs or arc1 == arc2:
            raise KeyError((arc1, arc2))
        (u1, u2), (v1, v2) = pairing
        if set(self.arcs[arc1]) != {u1, v1} or set(self.arcs[arc2]) != {u2, v2}:
            raise KeyError(f"pairing does not match arc endpoints for {arc1!r}, {arc2!r}")
        arcs = dict(self.arcs)
        del arcs[arc1], arcs[arc2]
        arcs[("srg", arc1, arc2, 0)] = (u1, u2)
        arcs[("srg", arc1, arc2, 1)] = (v1, v2)
        return ClosedDiagram(arcs, self.port_node)
