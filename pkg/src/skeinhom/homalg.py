"""Exact homological algebra over the integers for bigraded complexes.

A TruncatedComplex stores generators per cohomological degree (differentials
raise that degree by one and preserve the quantum degree) together with an
honest account of what is known: degrees above h_max are genuinely zero,
degrees below h_min are either zero (complete complexes) or merely not
computed, in which case a certificate bounds the quantum degrees living
there.  Requests that the stored data cannot answer raise TruncationError
rather than returning something quietly wrong.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import ChainMapError, GradingError, TruncationError


class LaurentPoly:
    """Integer Laurent polynomial in q, immutable."""

    __slots__ = ("terms",)

    def __init__(self, coeffs=None):
        terms = {}
        for e, c in dict(coeffs or {}).items():
            if c:
                terms[int(e)] = int(c)
        object.__setattr__(self, "terms", tuple(sorted(terms.items())))

    def __setattr__(self, *a):
        raise AttributeError("LaurentPoly is immutable")

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def one(cls):
        return cls({0: 1})

    @classmethod
    def q(cls, exp=1, coeff=1):
        return cls({exp: coeff})

    def as_dict(self):
        return dict(self.terms)

    def coefficient(self, exp):
        return dict(self.terms).get(exp, 0)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, int):
            other = LaurentPoly({0: other})
        return isinstance(other, LaurentPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __add__(self, other):
        if isinstance(other, int):
            other = LaurentPoly({0: other})
        out = dict(self.terms)
        for e, c in other.terms:
            out[e] = out.get(e, 0) + c
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({e: -c for e, c in self.terms})

    def __sub__(self, other):
        if isinstance(other, int):
            other = LaurentPoly({0: other})
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return LaurentPoly({e: c * other for e, c in self.terms})
        out = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return LaurentPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k):
        assert k >= 0
        out = LaurentPoly.one()
        for _ in range(k):
            out = out * self
        return out

    def shifted(self, exp):
        return LaurentPoly({e + exp: c for e, c in self.terms})

    def min_exp(self):
        return self.terms[0][0] if self.terms else None

    def max_exp(self):
        return self.terms[-1][0] if self.terms else None

    def truncated(self, lo, hi):
        """Keep exponents in [lo, hi]."""
        return LaurentPoly({e: c for e, c in self.terms if lo <= e <= hi})

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms:
            mag = abs(c)
            if e == 0:
                body = str(mag)
            else:
                var = "q" if e == 1 else f"q^{e}"
                body = var if mag == 1 else f"{mag}{var}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(parts)

    def __repr__(self):
        return f"LaurentPoly({dict(self.terms)!r})"


def circle_poly(k=1):
    """(q^-1 + q)^k, the graded rank contributed by k unlabeled circles."""
    return LaurentPoly({-1: 1, 1: 1}) ** k


def smith_invariants(rows):
    """Invariant factors (positive, each dividing the next) of an integer matrix."""
    m = [list(map(int, r)) for r in rows]
    R = len(m)
    C = len(m[0]) if R else 0
    t = 0
    while t < min(R, C):
        # locate a nonzero entry of minimal magnitude in the lower-right block
        best = None
        for i in range(t, R):
            for j in range(t, C):
                if m[i][j] and (best is None or abs(m[i][j]) < abs(m[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        bi, bj = best
        m[t], m[bi] = m[bi], m[t]
        for row in m:
            row[t], row[bj] = row[bj], row[t]
        pivot = m[t][t]
        dirty = False
        for i in range(t + 1, R):
            q, r = divmod(m[i][t], pivot)
            if q:
                for j in range(t, C):
                    m[i][j] -= q * m[t][j]
            if r:
                dirty = True
        for j in range(t + 1, C):
            q, r = divmod(m[t][j], pivot)
            if q:
                for i in range(t, R):
                    m[i][j] -= q * m[i][t]
            if r:
                dirty = True
        if dirty:
            continue
        # pivot must divide the rest of the block for true invariant factors;
        # fold a bad row in and redo this pivot
        offender = None
        for i in range(t + 1, R):
            for j in range(t + 1, C):
                if m[i][j] % pivot:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            for j in range(t, C):
                m[t][j] += m[offender][j]
            continue
        t += 1
    invs = [abs(m[i][i]) for i in range(t)]
    for a, b in zip(invs, invs[1:]):
        assert b % a == 0
    return invs


def matrix_rank(rows):
    """Rank over Q via fraction-free (Bareiss) elimination."""
    m = [list(map(int, r)) for r in rows]
    if not m or not m[0]:
        return 0
    R, C = len(m), len(m[0])
    rank = 0
    prev = 1
    r = 0
    for c in range(C):
        piv = next((i for i in range(r, R) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, R):
            for j in range(c + 1, C):
                m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) // prev
            m[i][c] = 0
        prev = m[r][c]
        rank += 1
        r += 1
        if r == R:
            break
    return rank


@dataclass(frozen=True)
class BigradedHomology:
    """Free ranks and torsion of a complex on a bidegree window."""

    betti: dict
    torsion: dict
    window: tuple

    def rows(self):
        keys = sorted(set(self.betti) | set(self.torsion))
        out = []
        for i, j in keys:
            b = self.betti.get((i, j), 0)
            tor = self.torsion.get((i, j), ())
            if b or tor:
                out.append((i, j, b, tuple(tor)))
        return out

    def total_rank(self):
        return sum(self.betti.values())

    def poincare(self):
        """dict (i, j) -> rank, zeros omitted."""
        return {k: v for k, v in self.betti.items() if v}


class TruncatedComplex:
    """Bigraded cochain complex of free abelian groups, possibly truncated below.

    generators: {h: ((label, qdeg), ...)}
    differentials: {h: {(target_index, source_index): coeff}} for the map from
    degree h to degree h+1.
    """

    def __init__(self, generators, differentials, h_min=None, h_max=None,
                 complete=True, certificate=None, check=True):
        self.generators = {h: tuple(gens) for h, gens in generators.items() if gens}
        self.differentials = {h: dict(d) for h, d in differentials.items() if d}
        degrees = sorted(self.generators)
        self.h_min = h_min if h_min is not None else (degrees[0] if degrees else 0)
        self.h_max = h_max if h_max is not None else (degrees[-1] if degrees else 0)
        self.complete = complete
        self.certificate = certificate
        if not complete and certificate is None:
            # permitted (oracle complexes), but homology will be limited
            pass
        if check:
            self._validate()

    def _validate(self):
        for h, gens in self.generators.items():
            if not (self.h_min <= h <= self.h_max):
                raise GradingError(f"generators at degree {h} outside [{self.h_min}, {self.h_max}]")
        for h, d in self.differentials.items():
            src = self.generators.get(h, ())
            tgt = self.generators.get(h + 1, ())
            for (i, j), c in d.items():
                if not (0 <= j < len(src)) or not (0 <= i < len(tgt)):
                    raise GradingError(f"differential entry out of range at degree {h}")
                if src[j][1] != tgt[i][1]:
                    raise GradingError(
                        f"differential does not preserve quantum degree at h={h}: "
                        f"{src[j]} -> {tgt[i]}"
                    )
                assert c != 0
        for h in sorted(self.differentials):
            if h + 1 not in self.differentials:
                continue
            prod = {}
            for (i, j), c in self.differentials[h].items():
                for (k, i2), c2 in self.differentials[h + 1].items():
                    if i2 == i:
                        prod[(k, j)] = prod.get((k, j), 0) + c * c2
            bad = {k: v for k, v in prod.items() if v}
            if bad:
                raise ChainMapError(f"d^2 != 0 from degree {h}: {sorted(bad.items())[:4]}")

    def gen_count(self, h, j=None):
        gens = self.generators.get(h, ())
        if j is None:
            return len(gens)
        return sum(1 for g in gens if g[1] == j)

    def chain_poincare(self):
        out = {}
        for h, gens in self.generators.items():
            for _, j in gens:
                out[(h, j)] = out.get((h, j), 0) + 1
        return out

    def min_q_at(self, h):
        """Smallest quantum degree that can occur at degree h, or None if empty."""
        if h > self.h_max:
            return None
        if h >= self.h_min:
            gens = self.generators.get(h, ())
            return min((j for _, j in gens), default=None)
        if self.complete:
            return None
        if self.certificate is None:
            raise TruncationError(f"degree {h} lies below the truncation and no certificate is stored")
        return self.certificate(-h)

    def _matrix(self, h, j):
        """The differential from degree h to h+1 in quantum degree j, as rows."""
        src = [idx for idx, g in enumerate(self.generators.get(h, ())) if g[1] == j]
        tgt = [idx for idx, g in enumerate(self.generators.get(h + 1, ())) if g[1] == j]
        pos_s = {g: k for k, g in enumerate(src)}
        pos_t = {g: k for k, g in enumerate(tgt)}
        rows = [[0] * len(src) for _ in range(len(tgt))]
        for (i, jj), c in self.differentials.get(h, {}).items():
            if i in pos_t and jj in pos_s:
                rows[pos_t[i]][pos_s[jj]] = c
        return rows, len(src), len(tgt)

    def _require_known(self, h, j):
        """Raise unless the chain group at (h, j) is fully stored or provably zero."""
        if h > self.h_max or h >= self.h_min:
            return
        if self.complete:
            return
        bound = self.min_q_at(h)
        if bound is None or j < bound:
            return
        raise TruncationError(
            f"chain group at (h={h}, q={j}) is beyond the truncation (certificate bound {bound})"
        )

    def homology_at(self, i, j):
        """(betti, torsion) of H^{i, j}; exact or TruncationError."""
        self._require_known(i - 1, j)
        self._require_known(i, j)
        self._require_known(i + 1, j)
        rows_in, n_src_in, _ = self._matrix(i - 1, j)
        rows_out, n_i, _ = self._matrix(i, j)
        invs = smith_invariants(rows_in) if rows_in and rows_in[0] else []
        rank_in = len([d for d in invs if d])
        rank_out = matrix_rank(rows_out) if rows_out and rows_out[0] else 0
        betti = n_i - rank_in - rank_out
        assert betti >= 0
        torsion = tuple(d for d in invs if d > 1)
        return betti, torsion

    def homology(self, h_range, q_range, threads=None):
        i1, i2 = h_range
        j1, j2 = q_range
        cells = [(i, j) for j in range(j1, j2 + 1) for i in range(i1, i2 + 1)]

        def work(cell):
            return cell, self.homology_at(*cell)

        if threads and threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(work, cells))
        else:
            results = [work(c) for c in cells]
        betti, torsion = {}, {}
        for (i, j), (b, tor) in sorted(results):
            if b:
                betti[(i, j)] = b
            if tor:
                torsion[(i, j)] = tor
        return BigradedHomology(betti, torsion, (h_range, q_range))

    def euler_series(self, q_range, from_homology=False, h_range=None):
        """Alternating sum over homological degrees, per quantum degree."""
        j1, j2 = q_range
        out = {}
        if from_homology:
            assert h_range is not None
            hom = self.homology(h_range, q_range)
            for (i, j), b in hom.betti.items():
                out[j] = out.get(j, 0) + (-1) ** (i % 2) * b
            return LaurentPoly(out)
        for j in range(j1, j2 + 1):
            if not self.complete:
                bound = self.min_q_at(self.h_min - 1)
                if bound is not None and bound <= j:
                    raise TruncationError(
                        f"euler series at q={j} needs degrees below {self.h_min} "
                        f"(certificate bound {bound})"
                    )
            for h in range(self.h_min, self.h_max + 1):
                c = self.gen_count(h, j)
                if c:
                    out[j] = out.get(j, 0) + (-1) ** (h % 2) * c
        return LaurentPoly(out)

    def shifted(self, dh=0, dq=0):
        gens = {h + dh: tuple((lbl, q + dq) for lbl, q in gg) for h, gg in self.generators.items()}
        diffs = {h + dh: dict(d) for h, d in self.differentials.items()}
        sign = -1 if dh % 2 else 1
        if sign < 0:
            diffs = {h: {k: -c for k, c in d.items()} for h, d in diffs.items()}
        cert = None
        if self.certificate is not None:
            cert = lambda r: self.certificate(r + dh) + dq
        return TruncatedComplex(gens, diffs, self.h_min + dh, self.h_max + dh,
                                self.complete, cert, check=False)


def tensor(a, b):
    """Tensor product with the Koszul sign on the second differential."""
    if not (a.complete and b.complete):
        raise TruncationError("tensor of truncated complexes is not supported; tensor complete ones")
    gens = {}
    index = {}
    for ha, ga in a.generators.items():
        for hb, gb in b.generators.items():
            h = ha + hb
            bucket = gens.setdefault(h, [])
            for ia, (la, qa) in enumerate(ga):
                for ib, (lb, qb) in enumerate(gb):
                    index[(ha, ia, hb, ib)] = (h, len(bucket))
                    bucket.append(((la, lb), qa + qb))
    diffs = {}
    for (ha, ia, hb, ib), (h, pos) in index.items():
        for (it, js), c in a.differentials.get(ha, {}).items():
            if js == ia:
                ht, post = index[(ha + 1, it, hb, ib)]
                assert ht == h + 1
                diffs.setdefault(h, {})[(post, pos)] = diffs.get(h, {}).get((post, pos), 0) + c
        sign = -1 if ha % 2 else 1
        for (it, js), c in b.differentials.get(hb, {}).items():
            if js == ib:
                ht, post = index[(ha, ia, hb + 1, it)]
                assert ht == h + 1
                diffs.setdefault(h, {})[(post, pos)] = diffs.get(h, {}).get((post, pos), 0) + sign * c
    diffs = {h: {k: c for k, c in d.items() if c} for h, d in diffs.items()}
    return TruncatedComplex({h: tuple(g) for h, g in gens.items()}, diffs)


class ChainMap:
    """A degree-(0,0) map of complexes, stored sparsely per degree."""

    def __init__(self, source, target, components, check=True):
        self.source = source
        self.target = target
        self.components = {h: dict(d) for h, d in components.items() if d}
        if check:
            self.verify()

    def verify(self):
        for h, comp in self.components.items():
            src = self.source.generators.get(h, ())
            tgt = self.target.generators.get(h, ())
            for (i, j), c in comp.items():
                if not (0 <= j < len(src) and 0 <= i < len(tgt)):
                    raise ChainMapError(f"component out of range at degree {h}")
                if src[j][1] != tgt[i][1]:
                    raise ChainMapError(f"component changes quantum degree at {h}")
        lo = max(self.source.h_min, self.target.h_min)
        hi = min(self.source.h_max, self.target.h_max)
        for h in range(lo, hi):
            lhs = {}
            for (i, j), c in self.source.differentials.get(h, {}).items():
                for (k, i2), c2 in self.components.get(h + 1, {}).items():
                    if i2 == i:
                        lhs[(k, j)] = lhs.get((k, j), 0) + c * c2
            rhs = {}
            for (i, j), c in self.components.get(h, {}).items():
                for (k, i2), c2 in self.target.differentials.get(h, {}).items():
                    if i2 == i:
                        rhs[(k, j)] = rhs.get((k, j), 0) + c * c2
            keys = set(lhs) | set(rhs)
            bad = [k for k in keys if lhs.get(k, 0) != rhs.get(k, 0)]
            if bad:
                raise ChainMapError(f"does not commute with differentials at degree {h}: {sorted(bad)[:4]}")

    def cone(self):
        """Mapping cone; degree h holds target^h then source^{h+1}."""
        a, b, f = self.source, self.target, self.components
        gens, diffs = {}, {}
        offs_b, offs_a = {}, {}
        h_lo = min(a.h_min - 1, b.h_min)
        h_hi = max(a.h_max - 1, b.h_max)
        for h in range(h_lo, h_hi + 1):
            bucket = []
            for lbl, q in b.generators.get(h, ()):
                bucket.append((("tgt", lbl), q))
            offs_a[h] = len(bucket)
            for lbl, q in a.generators.get(h + 1, ()):
                bucket.append((("src", lbl), q))
            if bucket:
                gens[h] = tuple(bucket)
        for h in range(h_lo, h_hi):
            d = {}
            for (i, j), c in b.differentials.get(h, {}).items():
                d[(i, j)] = c
            for (i, j), c in f.get(h + 1, {}).items():
                d[(i, offs_a[h] + j)] = c
            for (i, j), c in a.differentials.get(h + 1, {}).items():
                d[(offs_a[h + 1] + i, offs_a[h] + j)] = -c
            if d:
                diffs[h] = d
        complete = a.complete and b.complete
        cert = None
        if not complete:
            def cert(r):
                # cone degree -r holds target^{-r} and source^{-r + 1}
                vals = [v for v in (b.min_q_at(-r), a.min_q_at(-r + 1)) if v is not None]
                return min(vals) if vals else 10 ** 9
        return TruncatedComplex(gens, diffs, h_lo, h_hi, complete, cert, check=False)
