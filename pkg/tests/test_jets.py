import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from heavenly import Scalar
from heavenly.jets import (
    LETTERS,
    JetContext,
    JetTruncationError,
    contact_forms,
    heavenly_equation,
)
from heavenly.forms import exterior_derivative, pullback, wedge, wedge_all
from sympy_bridge import to_sympy

CTX = JetContext(LETTERS, jet_order=6)
EQ = heavenly_equation(CTX)
T, X, Y, Z = sp.symbols("t x y z")
U = sp.Function("u")(T, X, Y, Z)


def as_function(expr):
    """Replace jet symbols ``u_<letters>`` by derivatives of u(t, x, y, z)."""
    expr = to_sympy(expr)
    reps = {}
    for s in expr.free_symbols:
        n = s.name
        if n == "u":
            reps[s] = U
        elif n.startswith("u_"):
            reps[s] = U.diff(*[sp.Symbol(ch) for ch in n[2:]])
    return expr.xreplace(reps)


LOW_JETS = ["u", "u_t", "u_x", "u_y", "u_xy", "u_ty", "u_xx", "u_yy", "u_xz", "u_tz", "u_zz"]


@st.composite
def jet_scalars(draw):
    s = Scalar.const(draw(st.integers(-2, 2)))
    for _ in range(draw(st.integers(1, 3))):
        m = Scalar.const(draw(st.integers(-3, 3)) or 1)
        for n in draw(st.lists(st.sampled_from(LOW_JETS + ["t", "y"]), max_size=2)):
            m = m * CTX.parse(n)
        s = s + m
    if draw(st.booleans()):
        s = s / (CTX.parse(draw(st.sampled_from(LOW_JETS))) + 1)
    return s


def test_jet_names_are_canonical():
    assert CTX.jet("yx").name == "u_xy"
    assert CTX.counts(CTX.jet("txz")) == (1, 1, 0, 1)
    with pytest.raises(ValueError):
        CTX.parse("u_yx")


def test_truncation_error():
    small = JetContext(LETTERS, jet_order=2)
    with pytest.raises(JetTruncationError):
        small.jet("xxx")


@settings(max_examples=40)
@given(jet_scalars(), st.sampled_from(LETTERS))
def test_total_derivative_matches_chain_rule(s, d):
    got = as_function(CTX.total_derivative(s, d))
    want = sp.diff(as_function(s), sp.Symbol(d))
    assert sp.cancel(sp.together(got - want)) == 0


def test_equation_residual_reduces_to_zero():
    E = EQ.residual()
    assert not EQ.reduce(E)
    for d in LETTERS:
        assert not EQ.reduce(CTX.total_derivative(E, d))
        for e in LETTERS:
            assert not EQ.reduce(CTX.total_derivative(CTX.total_derivative(E, d), e))


def test_normal_form_of_a_third_order_principal_jet():
    # the x-derivative of the right side contains no principal jet
    rhs = as_function("u_ty + u_xx*u_yy - u_xy^2")
    want = sp.diff(rhs, X)
    got = as_function(EQ.normal_form((0, 2, 0, 1)))
    assert sp.expand(got - want) == 0


def test_reduce_substitutes_the_solved_jet():
    got = EQ.reduce(CTX.parse("u_xz^2*u_t"))
    assert got == CTX.parse("(u_ty + u_xx*u_yy - u_xy^2)^2*u_t")


@settings(max_examples=50)
@given(jet_scalars())
def test_reduce_is_idempotent_and_leaves_no_principal_jet(s):
    r = EQ.reduce(s)
    assert EQ.reduce(r) == r
    assert all(EQ.is_internal(v) for v in r.variables())


@settings(max_examples=50)
@given(jet_scalars(), jet_scalars())
def test_reduce_is_a_ring_homomorphism(a, b):
    assert EQ.reduce(a * b) == EQ.reduce(a) * EQ.reduce(b)
    assert EQ.reduce(a + b) == EQ.reduce(a) + EQ.reduce(b)


@settings(max_examples=100)
@given(jet_scalars(), st.sampled_from(LETTERS), st.sampled_from(LETTERS))
def test_restricted_total_derivatives_commute(s, a, b):
    ab = EQ.restricted_derivative(EQ.restricted_derivative(s, b), a)
    ba = EQ.restricted_derivative(EQ.restricted_derivative(s, a), b)
    assert ab == ba


def test_contact_forms_vanish_on_holonomic_sections():
    # pull back along the 2-jet of u = t^3 x + t x^2 (n = 2)
    tt, xx = sp.Symbol("t"), sp.Symbol("x")
    f = tt ** 3 * xx + tt * xx ** 2
    vals = {
        "u": f, "u_t": f.diff(tt), "u_x": f.diff(xx),
        "u_tt": f.diff(tt, tt), "u_tx": f.diff(tt, xx), "u_xx": f.diff(xx, xx),
    }
    smap = {k: Scalar.coerce(str(v).replace("**", "^")) for k, v in vals.items()}
    for form in contact_forms(2):
        assert not pullback(form, smap)


def test_contact_forms_are_independent_and_not_closed():
    th = contact_forms(3)
    g = th[0].gens
    assert wedge_all(th)
    # d(theta_0) = dx^i ^ du_i
    want = g.zero()
    for x, ui in zip("txy", ["u_t", "u_x", "u_y"]):
        want = want + wedge(g.d(x), g.d(ui))
    assert exterior_derivative(th[0]) == want
