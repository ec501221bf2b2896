import itertools

import pytest
from hypothesis import given, settings, strategies as st

from skeinhom.errors import (AdmissibilityError, InvalidBoundary, SpecError,
                             TruncationError)
from skeinhom.homalg import LaurentPoly, circle_poly
from skeinhom.planar import compose, cup_over_cap, identity_tangle
from skeinhom.spin import (CrosscheckReport, RationalFunctionQ, SpinNetwork,
                           TLElement, admissible_triple, as_quantum_integer,
                           check_admissible, costandard_pairing_offset,
                           costandard_pairing_series, cross_pairing_prediction,
                           cup_cap_at, euler_crosscheck, identity_element, loop,
                           pairing_prediction, projector_euler_terms,
                           projector_truncation, quantum_integer, theta,
                           tl_closure, tl_compose, tl_tensor, validate_network,
                           wenzl)
from skeinhom.surface import SurfaceSpec, arc, seam_side

from .oracles import theta_formula

RFQ = RationalFunctionQ

laurents = st.dictionaries(st.integers(-4, 4), st.integers(-5, 5), max_size=5).map(LaurentPoly)
nonzero_laurents = laurents.filter(bool)

TRI_DISK = SurfaceSpec(
    arcs=(("ea", 1), ("eb", 1), ("ec", 1)),
    seams=(),
    regions=((arc("ea"), arc("eb"), arc("ec")),),
)

TRI_ANNULUS = SurfaceSpec(
    arcs=(("a", 1), ("b", 1)),
    seams=("g1", "g2"),
    regions=(
        (arc("a"), seam_side("g1", 1), seam_side("g2", -1)),
        (arc("b"), seam_side("g2", 1), seam_side("g1", -1)),
    ),
)


def disk_network(ea, eb, ec):
    return SpinNetwork(TRI_DISK, {"ea": ea, "eb": eb, "ec": ec})


class TestQuantumInteger:
    def test_small_values(self):
        assert quantum_integer(0) == LaurentPoly.zero()
        assert quantum_integer(1) == LaurentPoly.one()
        assert quantum_integer(2) == LaurentPoly({-1: 1, 1: 1})
        assert quantum_integer(3) == LaurentPoly({-2: 1, 0: 1, 2: 1})

    def test_negative_rejected(self):
        with pytest.raises(InvalidBoundary):
            quantum_integer(-1)

    def test_recognizer(self):
        for k in range(7):
            assert as_quantum_integer(RFQ(quantum_integer(k))) == k
        assert as_quantum_integer(RFQ(LaurentPoly({0: 1, 1: 1}))) is None
        assert as_quantum_integer(RFQ(1, quantum_integer(2))) is None


class TestRationalFunctionQ:
    def test_normalization_cancels(self):
        two = quantum_integer(2)
        assert RFQ(two, two) == RFQ.one()
        assert RFQ(two * two, two) == RFQ(two)
        assert RFQ(two).den == LaurentPoly.one()

    def test_q_power_lives_in_numerator(self):
        f = RFQ(LaurentPoly.q(2), quantum_integer(2))
        assert f.den.min_exp() == 0
        assert f.den.coefficient(0) != 0
        assert f.num == LaurentPoly.q(3)

    def test_denominator_sign_and_content(self):
        f = RFQ(LaurentPoly({0: -2}), LaurentPoly({0: -4, 2: -4}))
        assert f.num == LaurentPoly.one()
        assert f.den == LaurentPoly({0: 2, 2: 2})

    def test_zero_and_bool(self):
        assert not RFQ.zero()
        assert RFQ.zero() == RFQ(0)
        assert RFQ.one()
        with pytest.raises(ZeroDivisionError):
            RFQ(1, LaurentPoly.zero())
        with pytest.raises(ZeroDivisionError):
            RFQ.one() / RFQ.zero()

    def test_arithmetic_identities(self):
        half = RFQ(1, quantum_integer(2))
        assert half * quantum_integer(2) == RFQ.one()
        assert half + half == RFQ(2, quantum_integer(2))
        assert half - half == RFQ.zero()
        assert -half + half == RFQ.zero()
        assert (half / half) == RFQ.one()
        assert 1 - half == RFQ(quantum_integer(2) - LaurentPoly.one(), quantum_integer(2))

    @settings(deadline=None, max_examples=80)
    @given(a=laurents, b=nonzero_laurents)
    def test_division_roundtrip(self, a, b):
        assert RFQ(a, b) * b == RFQ(a)

    @settings(deadline=None, max_examples=80)
    @given(a=laurents, b=nonzero_laurents, c=nonzero_laurents)
    def test_common_factor_cancels(self, a, b, c):
        assert RFQ(a * c, b * c) == RFQ(a, b)

    @settings(deadline=None, max_examples=80)
    @given(a=laurents, b=laurents, c=nonzero_laurents)
    def test_addition_over_common_denominator(self, a, b, c):
        assert RFQ(a, c) + RFQ(b, c) == RFQ(a + b, c)

    @settings(deadline=None, max_examples=40)
    @given(a=laurents)
    def test_polynomial_series_is_identity(self, a):
        assert RFQ(a).series_poly(-10, 10) == a

    def test_series_of_inverse_quantum_two(self):
        half = RFQ(1, quantum_integer(2))
        assert half.series_poly(0, 8) == LaurentPoly({1: 1, 3: -1, 5: 1, 7: -1})

    def test_series_rejects_fractional_window(self):
        f = RFQ(1, LaurentPoly({0: 2}))
        with pytest.raises(ValueError, match="non-integer"):
            f.series_poly(0, 2)

    def test_str_forms(self):
        assert str(RFQ(quantum_integer(2))) == "q^-1 + q"
        assert str(RFQ(1, quantum_integer(2))) == "q / 1 + q^2"
        assert str(RFQ.zero()) == "0"


class TestTLElement:
    def test_circles_fold_into_coefficients(self):
        e = cup_over_cap(2)
        x = TLElement(2, {e.with_circles(2): 1})
        assert x.coefficient(e) == RFQ(circle_poly(2))

    def test_boundary_mismatch_rejected(self):
        with pytest.raises(InvalidBoundary):
            TLElement(3, {identity_tangle(2): 1})
        with pytest.raises(InvalidBoundary):
            tl_compose(identity_element(2), identity_element(3))
        with pytest.raises(InvalidBoundary):
            identity_element(2) + identity_element(3)

    def test_zero_coefficients_drop(self):
        x = identity_element(2) - identity_element(2)
        assert not x
        assert identity_element(2).scaled(0) == x

    def test_generator_relation(self):
        e = TLElement(2, {cup_over_cap(2): 1})
        assert tl_compose(e, e) == e.scaled(quantum_integer(2))

    def test_cup_cap_range(self):
        with pytest.raises(InvalidBoundary):
            cup_cap_at(2, 1)
        with pytest.raises(InvalidBoundary):
            cup_cap_at(2, -1)
        assert cup_cap_at(2, 0) == cup_over_cap(2)

    def test_closure_of_identity_counts_strands(self):
        for n in range(4):
            assert tl_closure(identity_element(n)) == RFQ(circle_poly(n))

    def test_closure_multiplicative_under_tensor(self):
        e = TLElement(2, {cup_over_cap(2): 1})
        both = tl_tensor(e, identity_element(1))
        assert tl_closure(both) == tl_closure(e) * tl_closure(identity_element(1))


class TestWenzl:
    def test_closure_gives_quantum_dimension(self):
        for n in range(6):
            assert tl_closure(wenzl(n)) == RFQ(quantum_integer(n + 1))
            assert loop(n) == RFQ(quantum_integer(n + 1))

    def test_two_strand_coefficients(self):
        p = wenzl(2)
        assert p.coefficient(identity_tangle(2)) == RFQ.one()
        assert p.coefficient(cup_over_cap(2)) == -RFQ(1, quantum_integer(2))

    def test_three_strand_coefficients(self):
        p = wenzl(3)
        frac = RFQ(quantum_integer(2), quantum_integer(3))
        assert p.coefficient(identity_tangle(3)) == RFQ.one()
        assert p.coefficient(cup_cap_at(3, 0)) == -frac
        assert p.coefficient(cup_cap_at(3, 1)) == -frac
        mixed = compose(cup_cap_at(3, 0), cup_cap_at(3, 1))
        assert p.coefficient(mixed) == RFQ(1, quantum_integer(3))
        assert p.coefficient(compose(cup_cap_at(3, 1), cup_cap_at(3, 0))) == RFQ(
            1, quantum_integer(3)
        )

    @pytest.mark.parametrize("n", range(2, 5))
    def test_idempotent(self, n):
        p = wenzl(n)
        assert tl_compose(p, p) == p

    @pytest.mark.parametrize("n", range(2, 5))
    def test_kills_every_cup_cap(self, n):
        p = wenzl(n)
        for i in range(n - 1):
            hook = TLElement(n, {cup_cap_at(n, i): 1})
            assert not tl_compose(p, hook)
            assert not tl_compose(hook, p)

    def test_negative_strands_rejected(self):
        with pytest.raises(InvalidBoundary):
            wenzl(-1)


class TestTheta:
    def test_matches_factorial_formula(self):
        for a, b, c in itertools.product(range(5), repeat=3):
            num, den = theta_formula(a, b, c)
            val = theta(a, b, c)
            assert val.num * LaurentPoly(den) == val.den * LaurentPoly(num), (a, b, c)

    def test_symmetric_in_colors(self):
        for triple in [(1, 1, 2), (2, 2, 2), (1, 2, 3), (0, 2, 2)]:
            vals = {theta(*p) for p in itertools.permutations(triple)}
            assert len(vals) == 1, triple

    def test_inadmissible_vanishes(self):
        assert not theta(1, 1, 1)
        assert not theta(0, 1, 2)
        assert not theta(1, 1, 4)
        assert not admissible_triple(1, 1, 1)
        assert not admissible_triple(1, 1, 4)
        assert admissible_triple(1, 1, 2)

    def test_closed_forms(self):
        assert theta(1, 1, 0) == RFQ(quantum_integer(2))
        assert theta(1, 1, 2) == RFQ(quantum_integer(3))
        assert theta(2, 1, 1) == RFQ(quantum_integer(3))
        for a in range(4):
            assert theta(a, a, 0) == RFQ(quantum_integer(a + 1))
            assert theta(a, 0, a) == RFQ(quantum_integer(a + 1))

    def test_two_two_two_is_not_polynomial(self):
        val = theta(2, 2, 2)
        assert val.den != LaurentPoly.one()
        num = quantum_integer(4) * quantum_integer(3)
        den = quantum_integer(2) * quantum_integer(2)
        assert val == RFQ(num, den)


class TestSpinNetwork:
    def test_from_data_roundtrip(self):
        net = SpinNetwork.from_data(
            {
                "surface": {
                    "arcs": ["ea", "eb", "ec"],
                    "regions": [[{"arc": "ea"}, {"arc": "eb"}, {"arc": "ec"}]],
                },
                "coloring": {"ea": 1, "eb": 1, "ec": 2},
            }
        )
        assert net.surface == TRI_DISK
        assert net.coloring == {"ea": 1, "eb": 1, "ec": 2}

    def test_missing_and_extra_colors(self):
        with pytest.raises(SpecError, match="misses"):
            validate_network(SpinNetwork(TRI_DISK, {"ea": 1, "eb": 1}))
        with pytest.raises(SpecError, match="unknown"):
            validate_network(
                SpinNetwork(TRI_DISK, {"ea": 1, "eb": 1, "ec": 0, "ed": 1})
            )

    def test_negative_color_rejected(self):
        with pytest.raises(SpecError, match="non-negative"):
            validate_network(SpinNetwork(TRI_DISK, {"ea": -1, "eb": 1, "ec": 0}))

    def test_non_triangular_region_rejected(self):
        square = SurfaceSpec(
            arcs=(("a", 1), ("b", 1)),
            seams=("g",),
            regions=((seam_side("g", -1), arc("a"), seam_side("g", 1), arc("b")),),
        )
        with pytest.raises(SpecError, match="triangles"):
            validate_network(SpinNetwork(square, {"a": 0, "b": 0, "g": 0}))

    def test_admissibility_names_the_region(self):
        with pytest.raises(AdmissibilityError, match="region 0"):
            check_admissible(disk_network(1, 1, 1))
        check_admissible(disk_network(1, 1, 2))

    def test_disk_predictions(self):
        assert pairing_prediction(disk_network(1, 1, 0)) == RFQ(quantum_integer(2))
        assert pairing_prediction(disk_network(1, 1, 2)) == RFQ(quantum_integer(3))

    def test_annulus_prediction_divides_seam_loops(self):
        net = SpinNetwork(TRI_ANNULUS, {"a": 0, "b": 0, "g1": 1, "g2": 1})
        assert pairing_prediction(net) == RFQ.one()
        net = SpinNetwork(TRI_ANNULUS, {"a": 2, "b": 2, "g1": 1, "g2": 1})
        expected = (
            theta(2, 1, 1) * theta(2, 1, 1) / (loop(1) * loop(1))
        )
        assert pairing_prediction(net) == expected

    def test_cross_pairing_same_coloring(self):
        net = disk_network(1, 1, 2)
        assert cross_pairing_prediction(net, net) == pairing_prediction(net)

    def test_cross_pairing_distinct_interiors_vanish(self):
        one = SpinNetwork(TRI_ANNULUS, {"a": 0, "b": 0, "g1": 1, "g2": 1})
        other = SpinNetwork(TRI_ANNULUS, {"a": 0, "b": 0, "g1": 0, "g2": 0})
        assert not cross_pairing_prediction(one, other)

    def test_cross_pairing_needs_matching_boundary(self):
        one = SpinNetwork(TRI_ANNULUS, {"a": 0, "b": 0, "g1": 1, "g2": 1})
        other = SpinNetwork(TRI_ANNULUS, {"a": 2, "b": 0, "g1": 1, "g2": 1})
        with pytest.raises(InvalidBoundary, match="arc"):
            cross_pairing_prediction(one, other)
        with pytest.raises(InvalidBoundary, match="surfaces"):
            cross_pairing_prediction(one, disk_network(1, 1, 2))


class TestProjectorTruncation:
    def test_small_strand_counts_are_identities(self):
        assert projector_truncation(0, 5) == ((identity_tangle(0), 0, 0),)
        assert projector_truncation(1, 5) == ((identity_tangle(1), 0, 0),)

    def test_two_strand_layout(self):
        objs = projector_truncation(2, 4)
        assert objs[0] == (identity_tangle(2), 0, 0)
        assert objs[1:] == tuple(
            (cup_over_cap(2), -s, 2 * s - 1) for s in range(1, 5)
        )

    def test_euler_terms_match_wenzl(self):
        terms = projector_euler_terms(2, 12)
        p = wenzl(2)
        assert terms[identity_tangle(2)] == LaurentPoly.one()
        e_series = p.coefficient(cup_over_cap(2)).series_poly(0, 23)
        assert terms[cup_over_cap(2)] == e_series

    def test_three_strands_unavailable(self):
        with pytest.raises(SpecError, match="2 strands"):
            projector_truncation(3, 4)


class TestCostandardPairing:
    @pytest.mark.parametrize(
        "colors,order",
        [((1, 1, 0), 10), ((1, 1, 2), 10), ((0, 2, 2), 10), ((2, 2, 2), 8)],
    )
    def test_series_matches_prediction(self, colors, order):
        series = costandard_pairing_series(colors, order)
        shift = LaurentPoly.q(costandard_pairing_offset(colors))
        lo = min(0, series.min_exp() or 0)
        predicted = (theta(*colors) * shift).series_poly(lo, order)
        assert series == predicted

    def test_explicit_values(self):
        assert costandard_pairing_series((1, 1, 0), 6) == LaurentPoly({0: 1, 2: 1})
        assert costandard_pairing_series((1, 1, 2), 6) == LaurentPoly({0: 1, 2: 1, 4: 1})
        assert costandard_pairing_series((2, 2, 2), 8) == LaurentPoly(
            {0: 1, 4: 2, 6: -1, 8: 2}
        )

    def test_inadmissible_colors_rejected(self):
        with pytest.raises(AdmissibilityError):
            costandard_pairing_series((1, 1, 1), 6)

    def test_large_colors_rejected(self):
        with pytest.raises(SpecError, match="2 strands"):
            costandard_pairing_series((3, 3, 2), 6)


class TestCrosscheck:
    @pytest.mark.parametrize(
        "scenario,order",
        [("strands0", 6), ("bproj2", 9), ("annulus", 6), ("triangle112", 10)],
    )
    def test_scenarios_agree(self, scenario, order):
        report = euler_crosscheck(scenario, order)
        assert report.scenario == scenario
        assert report.order == order
        assert report.ok
        assert report.mismatches == ()
        assert report.max_mismatch == 0

    def test_shallow_depth_is_detected(self):
        with pytest.raises(TruncationError):
            euler_crosscheck("bproj2", 9, depth=2)
        with pytest.raises(TruncationError):
            euler_crosscheck("annulus", 9, depth=2)

    def test_unknown_scenario(self):
        with pytest.raises(SpecError, match="scenario"):
            euler_crosscheck("moebius", 4)
        with pytest.raises(SpecError, match="order"):
            euler_crosscheck("strands0", -1)

    def test_report_mismatch_summary(self):
        report = CrosscheckReport(
            "demo", 4, LaurentPoly({0: 1, 2: 2}), LaurentPoly({0: 1, 2: 1, 4: 1})
        )
        assert not report.ok
        assert report.mismatches == ((2, 2, 1), (4, 0, 1))
        assert report.max_mismatch == 1
