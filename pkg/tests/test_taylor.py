import random
from fractions import Fraction

import pytest

from mfderive.errors import ScalingObstruction
from mfderive.lattice import LatticeExpr, Occurrence, build_master_rhs, model_from_dict, shift
from mfderive.symexpr import (
    JetPoint,
    deriv,
    eval_at_jet,
    h_coefficient,
    hpow,
    mul,
    param,
    reduce_mod_h,
)
from mfderive.taylor import ExpansionOptions, expand_lattice, take_limit, taylor_occurrence

from . import oracle, randgen

F = Fraction
h = hpow()


def d(func, *orders):
    return deriv(func, *orders)


class TestTaylorOccurrence:
    def test_unit_step_x(self):
        got = taylor_occurrence(Occurrence("r", (1, 0)), 2)
        assert got == d("r", 0, 0) + h * d("r", 1, 0) + hpow(2) * d("r", 2, 0) / 2

    def test_unit_step_y_first_order(self):
        got = taylor_occurrence(Occurrence("b", (0, 1)), 1)
        assert got == d("b", 0, 0) + h * d("b", 0, 1)

    @pytest.mark.parametrize("order", [0, 1, 3])
    def test_zero_offset(self, order):
        assert taylor_occurrence(Occurrence("r", (0, 0)), order) == d("r", 0, 0)

    def test_double_step(self):
        # frozen from the multi-index formula with a = 2: 2^k / k!
        expected = d("r", 0, 0) + 2 * h * d("r", 1, 0) + 2 * hpow(2) * d("r", 2, 0)
        got = taylor_occurrence(Occurrence("r", (2, 0)), 2)
        assert got == expected
        # cross-check on an explicit degree-2 polynomial
        rng = random.Random(3)
        polys = {"r": oracle.random_poly(rng, 2, 2)}
        point = (F(1, 3), F(-2))
        jet = oracle.jet_values(polys, point, got.atoms())
        lattice = oracle.lattice_series(LatticeExpr.occ("r", 2, 0), polys, point, {}, 2)
        assert oracle.expansion_series(got, jet, {}, 2) == lattice

    def test_diagonal_has_mixed_term(self):
        got = taylor_occurrence(Occurrence("r", (1, -1)), 2)
        assert h_coefficient(got, 2) == d("r", 2, 0) / 2 - d("r", 1, 1) + d("r", 0, 2) / 2

    def test_exact_on_polynomials(self):
        # single occurrences need no truncation: exact at numeric h
        rng = random.Random(5)
        for _ in range(20):
            dim, degree = rng.randint(1, 3), rng.randint(0, 3)
            polys = {"c": oracle.random_poly(rng, dim, degree)}
            offset = tuple(rng.randint(-2, 2) for _ in range(dim))
            point = tuple(F(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(dim))
            hv = F(rng.randint(1, 5), rng.randint(1, 7))
            ce = taylor_occurrence(Occurrence("c", offset), degree)
            jet = oracle.jet_values(polys, point, ce.atoms())
            subs = {oracle.COORDS[v]: point[v] + offset[v] * hv for v in range(dim)}
            exact = oracle.to_fraction(polys["c"].subs(subs))
            assert eval_at_jet(ce, JetPoint(h=hv, jet=jet)) == exact


class TestExpandLattice:
    def test_bare_occurrence(self):
        assert expand_lattice(LatticeExpr.occ("r", 0, 0), 2) == d("r", 0, 0)

    def test_discrete_divergence(self):
        e = LatticeExpr.occ("r", -1, 0) - LatticeExpr.occ("r", 0, 0)
        assert expand_lattice(e, 2) == -h * d("r", 1, 0) + hpow(2) * d("r", 2, 0) / 2

    def test_pedestrian_red_leading_order(self, pedestrian):
        ex = expand_lattice(build_master_rhs(pedestrian, "r"), 2)
        assert h_coefficient(ex, 0).is_zero()
        first = h_coefficient(ex, 1)
        r, b = d("r", 0, 0), d("b", 0, 0)
        head = {
            r * d("b", 1, 0): 1,
            param("alpha") * r * r * d("b", 1, 0): 1,
            d("r", 1, 0): -1,
            b * d("r", 1, 0): 1,
            r * d("r", 1, 0): 2,
        }
        terms = first.terms()
        for mono, c in head.items():
            (key,) = mono.terms()
            assert terms[key] == c

    def test_never_exceeds_order(self):
        e = (LatticeExpr.occ("r", 1, 1) + 1) ** 3
        for order in (1, 2, 3):
            assert expand_lattice(e, order).max_h_power() <= order


def _corpus(n=100, seed=2024):
    rng = random.Random(seed)
    return [randgen.lattice_expr(rng, dim=rng.choice((1, 2)), max_degree=3, max_terms=3) for _ in range(n)]


class TestExpansionInvariants:
    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_truncation_consistency(self, order):
        for e in _corpus(40, seed=order):
            assert reduce_mod_h(expand_lattice(e, order + 1), order + 1) == expand_lattice(e, order)

    def test_multiplicative_up_to_truncation(self):
        rng = random.Random(9)
        for _ in range(40):
            a, c = randgen.lattice_expr(rng), randgen.lattice_expr(rng)
            for order in (1, 2):
                lhs = expand_lattice(a * c, order)
                rhs = reduce_mod_h(mul(expand_lattice(a, order), expand_lattice(c, order)), order + 1)
                assert lhs == rhs

    def test_shift_is_taylor_recentering(self):
        rng = random.Random(17)
        for _ in range(40):
            e = randgen.lattice_expr(rng)
            v = randgen.jump(rng, 2)
            for order in (1, 2):
                assert expand_lattice(shift(e, v), order) == oracle.recenter(expand_lattice(e, order), v, order)


class TestTakeLimit:
    def test_monomial_shift(self):
        e = hpow(2) * d("f", 2)
        assert take_limit(e, ExpansionOptions(2, 1, 2)) == h * d("f", 2)

    def test_obstruction_reports_coefficient(self):
        e = d("f", 0) + h * d("f", 1)
        with pytest.raises(ScalingObstruction) as info:
            take_limit(e, ExpansionOptions(2, 1, 1))
        assert info.value.power == 0
        assert info.value.coefficient == d("f", 0)

    def test_parabolic_obstruction(self):
        e = h * d("f", 1) + hpow(2) * d("f", 2)
        with pytest.raises(ScalingObstruction) as info:
            take_limit(e, ExpansionOptions(2, 2, 1))
        assert info.value.power == 1

    def test_adhesion_hyperbolic_has_no_obstruction(self, adhesion):
        ex = expand_lattice(build_master_rhs(adhesion, "c"), 2)
        assert take_limit(ex, ExpansionOptions(2, 1, 1)).is_zero()

    def test_adhesion_parabolic(self, adhesion):
        ex = expand_lattice(build_master_rhs(adhesion, "c"), 2)
        got = take_limit(ex, ExpansionOptions(2, 2, 1))
        c, cx, cxx, a = d("c", 0), d("c", 1), d("c", 2), param("alpha")
        diffusivity = 1 - 4 * a * c + 3 * a * c * c
        assert got == diffusivity * cxx + (-4 * a + 6 * a * c) * cx * cx

    def test_pedestrian_tail(self, pedestrian_report):
        limit = pedestrian_report.diagnostics["r"].limit
        tail = -h * param("gamma2") * d("b", 0, 0) ** 2 * d("r", 0, 2) / 2
        (key,) = tail.terms()
        assert limit.terms()[key] == F(-1, 2)
        assert limit.max_h_power() == 1

    @pytest.mark.parametrize("kwargs", [
        dict(order=0), dict(scaling=0), dict(order=1, scaling=2), dict(keep=3), dict(keep=-1),
    ])
    def test_option_validation(self, kwargs):
        with pytest.raises(ValueError):
            ExpansionOptions(**kwargs)


class TestConservation:
    def test_random_models_have_no_zeroth_order(self):
        rng = random.Random(77)
        for _ in range(20):
            dim = rng.choice((1, 2))
            species = ("u", "w")[: rng.randint(1, 2)]
            transitions = []
            for _ in range(rng.randint(1, 4)):
                rate = randgen.lattice_expr(rng, species=species, dim=dim, max_degree=2, max_terms=3)
                transitions.append({"species": rng.choice(species), "jump": list(randgen.jump(rng, dim)),
                                    "rate": rate.to_text()})
            m = model_from_dict({"dimension": dim, "species": list(species),
                                 "parameters": list(randgen.PARAMS), "transitions": transitions})
            for s in species:
                ex = expand_lattice(build_master_rhs(m, s), 2)
                assert h_coefficient(ex, 0).is_zero()
                take_limit(ex, ExpansionOptions(2, 1, 2))


class TestPolynomialOracle:
    def test_expansion_matches_substitution(self):
        # with densities of degree <= K the Taylor series of each occurrence is exact,
        # so truncating the product in h must agree with literal substitution
        rng = random.Random(2024)
        params = {n: F(rng.randint(-4, 4), rng.randint(1, 3)) for n in randgen.PARAMS}
        for _ in range(100):
            dim = rng.choice((1, 2))
            e = randgen.lattice_expr(rng, dim=dim, max_degree=3, max_terms=3)
            order = rng.randint(1, 3)
            polys = {s: oracle.random_poly(rng, dim, order) for s in ("r", "b")}
            point = tuple(F(rng.randint(-3, 3), rng.randint(1, 4)) for _ in range(dim))
            ce = expand_lattice(e, order)
            jet = oracle.jet_values(polys, point, ce.atoms())
            assert oracle.expansion_series(ce, jet, params, order) == oracle.lattice_series(
                e, polys, point, params, order
            )
