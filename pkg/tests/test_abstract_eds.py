import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heavenly.abstract_eds import (
    appendix_checks,
    corpus_text,
    d_squared_check,
    d_squared_partial,
    determined_set,
    formal_d,
    load_system,
    parse_system,
    partial_set,
    render_system,
)
from heavenly.forms import parse_form, wedge
from heavenly.report import FAIL, INFO, PASS
from heavenly.syntax import ParseError

SYS = load_system()

SO3 = """
gen e1 e2 e3
d e1 = e2 ^ e3
d e2 = e3 ^ e1
d e3 = e1 ^ e2
"""


def form(text, sys=SYS):
    return parse_form(text, sys.gens, abstract=True)


# parsing --------------------------------------------------------------------

def test_parse_single_rule():
    s = parse_system("gen eta1 eta2 xi1 xi4\nd xi1 = eta1 ^ xi1 + eta2 ^ xi4\n")
    assert s.rules["xi1"] == parse_form("eta1 ^ xi1 + eta2 ^ xi4", s.gens, abstract=True)


def test_parse_zero_rule():
    s = parse_system("gen eta5\nd eta5 = 0\n")
    assert not s.rules["eta5"]


@pytest.mark.parametrize("text, fragment", [
    ("gen foo\nd foo = bar\n", "bar"),
    ("gen a b\nd a = b\n", "2-form"),
    ("gen a\ngen a\n", "a"),
    ("gen a\nunknown b\nd b = a ^ a\n", "b"),
    ("gen a b\nd a = a ^ ^ b\n", "unexpected"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError) as e:
        parse_system(text)
    assert fragment in str(e.value)
    assert e.value.line >= 1


def test_parse_error_points_at_continuation_line():
    text = "gen a b c\nd a = b ^ c\n  + b ^ q\n"
    with pytest.raises(ParseError) as e:
        parse_system(text)
    assert e.value.line == 3


def test_corpus_shape():
    assert len(SYS.rules) == 40
    assert SYS.unknown == [f"eta{k}" for k in range(23, 43)]
    assert len([g for g in SYS.order if not g.startswith("D(")]) == 60
    assert set(SYS.ambiguous) == {"eta9", "eta16"}


def test_corpus_sets():
    det = determined_set(SYS)
    expected = ([f"theta{i}" for i in range(5)] + [f"xi{i}" for i in range(1, 5)]
                + ["sigma11", "sigma12", "sigma13", "sigma14", "sigma22", "sigma23",
                   "sigma33", "sigma34", "sigma44"]
                + [f"eta{i}" for i in range(1, 7)])
    assert det == expected
    assert partial_set(SYS) == [f"eta{i}" for i in range(7, 23)]


def test_corpus_round_trip():
    text = render_system(SYS)
    again = parse_system(text)
    assert again == SYS
    assert render_system(again) == text
    assert again.ambiguous == SYS.ambiguous


def test_corpus_text_is_readable():
    assert "d xi1 = eta1 ^ xi1 + eta2 ^ xi4" in corpus_text()


# formal d ---------------------------------------------------------------------

def test_formal_d_of_generators():
    assert formal_d(form("xi1"), SYS) == form("eta1 ^ xi1 + eta2 ^ xi4")
    assert not formal_d(form("eta5"), SYS)


def test_formal_d_leibniz_example():
    got = formal_d(form("xi1 ^ xi4"), SYS)
    want = (wedge(form("eta1 ^ xi1 + eta2 ^ xi4"), form("xi4"))
            - wedge(form("xi1"), form("eta3 ^ xi1 + eta4 ^ xi4")))
    assert got == want


def test_formal_d_unknown_needs_permission():
    with pytest.raises(ValueError):
        formal_d(form("eta23"), SYS)
    assert formal_d(form("eta23"), SYS, allow_unknown=True) == form("D(eta23)")


KNOWN = [g for g in SYS.known()]


@st.composite
def monomials(draw, max_size=2):
    names = draw(st.lists(st.sampled_from(KNOWN), min_size=1, max_size=max_size, unique=True))
    coeff = draw(st.integers(-3, 3)) or 1
    return form(f"{coeff}*" + " ^ ".join(names)), len(names)


# corpus forms are capped at degree 4, so keep a ^ b at degree 3
@settings(max_examples=60)
@given(monomials(max_size=1), monomials())
def test_formal_d_graded_leibniz(a, b):
    (fa, _), (fb, _) = a, b
    lhs = formal_d(wedge(fa, fb), SYS)
    sign = -1
    rhs = wedge(formal_d(fa, SYS), fb) + wedge(fa, formal_d(fb, SYS)) * sign
    assert lhs == rhs


@settings(max_examples=30)
@given(monomials(), monomials())
def test_formal_d_is_linear(a, b):
    (fa, _), (fb, _) = a, b
    assert formal_d(fa * 3 - fb, SYS) == formal_d(fa, SYS) * 3 - formal_d(fb, SYS)


# d^2 ---------------------------------------------------------------------------

def test_d_squared_xi1_by_hand():
    # d(eta1 ^ xi1 + eta2 ^ xi4) = d eta1 ^ xi1 - eta1 ^ d xi1 + d eta2 ^ xi4 - eta2 ^ d xi4
    r = SYS.rules
    manual = (wedge(r["eta1"], form("xi1")) - wedge(form("eta1"), r["xi1"])
              + wedge(r["eta2"], form("xi4")) - wedge(form("eta2"), r["xi4"]))
    assert not manual
    assert d_squared_check("xi1", SYS).status == PASS


def test_d_squared_eta5():
    assert d_squared_check("eta5", SYS).status == PASS


def test_d_squared_on_a_consistent_lie_algebra():
    s = parse_system(SO3)
    assert all(d_squared_check(g, s).status == PASS for g in ("e1", "e2", "e3"))


def test_d_squared_detects_inconsistency():
    s = parse_system(SO3 + "gen f\nd f = 2*e1 ^ f + e2 ^ e3\n")
    r = d_squared_check("f", s)
    assert r.status == FAIL
    # by hand: 2 de1 ^ f - 2 e1 ^ df + d(e2 ^ e3) = 2 e2^e3^f - 2 e1^e2^e3
    assert form(r.residual, s) == form("2*e2 ^ e3 ^ f - 2*e1 ^ e2 ^ e3", s)


def test_full_check_refuses_unknown_differentials():
    with pytest.raises(ValueError, match="d_squared_partial"):
        d_squared_check("eta7", SYS)


def test_partial_mode_eta10():
    r = d_squared_partial("eta10", SYS, ["xi1", "xi4"])
    assert r.status == PASS
    assert "D(eta23)" in r.note and "D(eta28)" in r.note


def test_partial_mode_without_unknowns_matches_full_check():
    a = d_squared_partial("xi1", SYS, [])
    b = d_squared_check("xi1", SYS)
    assert (a.status, a.residual) == (b.status, b.residual)


def test_partial_mode_rejects_unabsorbed_unknown():
    with pytest.raises(ValueError, match="non-absorber"):
        d_squared_partial("eta7", SYS, ["xi1"])


def test_ambiguous_rules_report_info():
    r = d_squared_check("sigma22", SYS)
    assert r.status in (PASS, INFO)
    if r.status == INFO:
        assert "eta9" in r.note and r.residual


def test_every_report_has_a_verdict():
    reports = appendix_checks("all", SYS)
    assert len(reports) == 40
    for r in reports:
        assert r.status in (PASS, FAIL, INFO)
        assert (r.status == PASS) == (r.residual == "")


# findings on the printed corpus --------------------------------------------------

def test_theta0_residual_matches_hand_expansion():
    # the theta2 ^ xi4 terms come from d xi2 ^ theta2 and -xi4 ^ d theta4;
    # their xi4 and theta2 factors add instead of cancelling
    r = d_squared_check("theta0", SYS)
    want = wedge(form("2/3*eta5 + 2*sigma33"), form("xi4 ^ theta2"))
    assert r.status == FAIL
    assert form(r.residual) == want


def test_single_sign_variant_of_eta15_closes_several_rules():
    printed = "- 4/3*(eta8 - eta10 + 2*eta15) ^ eta1"
    variant = "- 4/3*(eta8 + eta10 - 2*eta15) ^ eta1"
    text = corpus_text()
    assert printed in text
    alt = parse_system(text.replace(printed, variant))
    for g in ("eta1", "eta4", "sigma23"):
        assert d_squared_check(g, SYS).status == FAIL
        assert d_squared_check(g, alt).status == PASS
    assert d_squared_partial("eta7", SYS).status == FAIL
    assert d_squared_partial("eta7", alt).status == PASS
