import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfderive.conserve import (
    Decomposition,
    IntegrationOrder,
    extract_diffusivity,
    flatten,
    partial_integrate,
)
from mfderive.errors import NotInDiffusionForm, UnlistedFunction
from mfderive.sexp import dump_decomposition, parse_decomposition
from mfderive.symexpr import ContinuumExpr, VarId, deriv, equal, eval_at_jet, param, total_derivative

from . import randgen

F = Fraction
X, Y = VarId("x", 0), VarId("y", 1)
ZERO = ContinuumExpr()

# one variable
f, fx, fxx = (deriv("f", k) for k in (0, 1, 2))
g, gx, gxx = (deriv("g", k) for k in (0, 1, 2))

# two variables
f2, fx2, fy2, fxy2 = (deriv("f", *o) for o in [(0, 0), (1, 0), (0, 1), (1, 1)])

many = settings(max_examples=200, deadline=None)
randoms = st.integers(min_value=0, max_value=2**32 - 1).map(random.Random)


def order(funcs="f", vars_=("x",), depth=1):
    return IntegrationOrder(tuple(funcs), tuple(vars_), depth)


def leaf(e):
    return Decomposition(e)


class TestPartialIntegrateExamples:
    def test_half_square(self):
        dec = partial_integrate(f * fx, order())
        assert dec == Decomposition(ZERO, ((X, leaf(f * f / 2)),))

    def test_half_square_plus_remainder(self):
        dec = partial_integrate(f * fx + f, order())
        assert dec == Decomposition(f, ((X, leaf(f * f / 2)),))

    def test_order_ambiguity(self):
        dec = partial_integrate(fx * gx, order("fg"))
        assert dec == Decomposition(-f * gxx, ((X, leaf(f * gx)),))

    def test_reversed_order_gives_the_other_form(self):
        dec = partial_integrate(fx * gx, order("gf"))
        assert dec == Decomposition(-g * fxx, ((X, leaf(g * fx)),))

    def test_textbook_expression_is_exact(self):
        E = f * f * gxx - 2 * fx * fx * g - 2 * f * fxx * g
        dec = partial_integrate(E, order("fg"))
        assert flatten(dec) == E
        assert dec.remainder.is_zero()
        (var, inner), = dec.parts
        assert var == X
        assert inner == leaf(f * f * gx - 2 * f * fx * g)

    def test_multivariate(self):
        E = fx2 * fy2 + fx2 + fy2
        dec = partial_integrate(E, order("f", ("x", "y")))
        assert flatten(dec) == E
        assert dec.remainder == -f2 * fxy2
        assert dec.parts == ((X, leaf(f2 * fy2 + f2)), (Y, leaf(f2)))

    def test_square_of_first_derivative_is_left_alone(self):
        trace = []
        dec = partial_integrate(fx * fx, order(), trace)
        assert dec == leaf(fx * fx)
        assert trace[0].swept == 1

    def test_zero_and_constant(self):
        assert partial_integrate(ZERO, order()) == leaf(ZERO)
        assert partial_integrate(param("alpha") * f, order()) == leaf(param("alpha") * f)

    def test_unlisted_function(self):
        with pytest.raises(UnlistedFunction, match="g"):
            partial_integrate(f * gx, order("f"))

    @pytest.mark.parametrize("kwargs", [
        dict(funcs=(), vars=("x",)),
        dict(funcs=("f",), vars=()),
        dict(funcs=("f", "f"), vars=("x",)),
        dict(funcs=("f",), vars=("x", "x")),
        dict(funcs=("f",), vars=("x",), depth=0),
    ])
    def test_order_validation(self, kwargs):
        with pytest.raises(ValueError):
            IntegrationOrder(**kwargs)


class TestFlatten:
    def test_pure_remainder(self):
        assert flatten(leaf(f * g + 1)) == f * g + 1

    def test_inverse_of_half_square(self):
        assert flatten(Decomposition(ZERO, ((X, leaf(f * f / 2)),))) == f * fx

    def test_nested(self):
        dec = Decomposition(ZERO, ((X, Decomposition(f, ((X, leaf(f * f / 2)),))),))
        assert flatten(dec) == fx + fx * fx + f * fxx


def _random_order(rng, e, depth):
    funcs = sorted(e.functions() | {"f"})
    rng.shuffle(funcs)
    vars_ = ["x", "y"]
    rng.shuffle(vars_)
    return IntegrationOrder(tuple(funcs), tuple(VarId(v, "xy".index(v)) for v in vars_), depth)


class TestProperties:
    @many
    @given(randoms)
    def test_soundness(self, rng):
        E = randgen.diff_poly(rng, n_funcs=3, dim=2, max_order=3, max_degree=3).normalized()
        dec = partial_integrate(E, _random_order(rng, E, rng.randint(1, 3)))
        flat = flatten(dec)
        assert equal(flat, E)
        for _ in range(5):
            p = randgen.jet_for(rng, E, flat)
            assert eval_at_jet(flat, p) == eval_at_jet(E, p)

    @many
    @given(randoms)
    def test_remainder_is_a_fixed_point(self, rng):
        E = randgen.diff_poly(rng, dim=1, max_order=3).normalized()
        ordr = IntegrationOrder(tuple(sorted(E.functions() | {"f"})), (X,), 1)
        R = partial_integrate(E, ordr).remainder
        assert partial_integrate(R, ordr) == leaf(R)

    @many
    @given(randoms)
    def test_inner_loop_bound(self, rng):
        E = randgen.diff_poly(rng).normalized()
        trace = []
        partial_integrate(E, _random_order(rng, E, 2), trace)
        for rec in trace:
            if rec.iterations:
                assert rec.iterations <= rec.first_exponent + 1

    def test_every_depth_is_sound(self):
        rng = random.Random(4)
        for _ in range(60):
            E = randgen.diff_poly(rng).normalized()
            for d in (1, 2, 3):
                dec = partial_integrate(E, _random_order(random.Random(d), E, d))
                assert dec.depth <= d
                assert flatten(dec) == E

    def test_deterministic_serialization(self):
        rng = random.Random(8)
        for _ in range(40):
            E = randgen.diff_poly(rng).normalized()
            ordr = _random_order(rng, E, 2)
            a = dump_decomposition(partial_integrate(E, ordr), ["x", "y"])
            b = dump_decomposition(partial_integrate(E, ordr), ["x", "y"])
            assert a == b
            assert flatten(parse_decomposition(a, ["x", "y"])) == E


class TestExtractDiffusivity:
    c, cx, cxx = (deriv("c", k) for k in (0, 1, 2))

    def test_linear_diffusion(self):
        assert extract_diffusivity(self.cxx, "c", X) == ContinuumExpr.const(1)

    def test_nonlinear(self):
        D = 1 + self.c * self.c
        rhs = total_derivative(D * self.cx, 0)
        assert extract_diffusivity(rhs, "c", X) == D

    def test_adhesion(self, adhesion_report):
        a, c = param("alpha"), self.c
        D = extract_diffusivity(adhesion_report.diagnostics["c"].limit, "c", X)
        assert D == 1 - 4 * a * c + 3 * a * c * c
        assert D == 3 * a * (c - F(2, 3)) ** 2 + 1 - F(4, 3) * a

    def test_transport_term_is_rejected(self):
        with pytest.raises(NotInDiffusionForm) as info:
            extract_diffusivity(self.c * self.cx, "c", X)
        assert info.value.residual == self.c * self.cx

    def test_derivative_in_coefficient_is_rejected(self):
        with pytest.raises(NotInDiffusionForm):
            extract_diffusivity(self.cx * self.cxx, "c", X)
