import pytest

from heavenly.covering import CoveringContext
from heavenly.forms import congruent_modulo, exterior_derivative, wedge_all
from heavenly.pseudogroup import (
    build_lifted_coframe,
    build_reduced_forms,
    check_cont_structure,
    expected_eta2,
    expected_eta3,
    group_dimension,
    solve_printed_rule,
    solve_reduced_structure,
    theorem_residual,
    verify_theorem,
)
from heavenly.report import FAIL, INFO, PASS


def parameter_count(n):
    # a, b^i_k, c_i, f_ik = f_ki, g_i, s_ij, w^k_ij, z_ijk fully symmetric
    sym = n * (n + 1) // 2
    sym3 = n * (n + 1) * (n + 2) // 6
    return 1 + n * n + n + sym + n + sym + n * sym + sym3


@pytest.mark.parametrize("n", [1, 2, 3])
def test_group_dimension(n):
    cf = build_lifted_coframe(n)
    assert len(cf.params) == parameter_count(n) == group_dimension(n)
    assert len(cf.sigma) == n * (n + 1) // 2


@pytest.mark.parametrize("n", [1, 2])
def test_lifted_coframe_is_a_coframe(n):
    cf = build_lifted_coframe(n)
    assert wedge_all(cf.all_forms())


@pytest.mark.parametrize("n", [1, 2])
def test_cont_structure_checks_pass(n):
    reports = check_cont_structure(n)
    assert reports and all(r.status == PASS for r in reports), [r.line() for r in reports if not r.ok]
    ids = {r.check_id for r in reports}
    assert f"cont-structure.n{n}.theta0" in ids


@pytest.mark.parametrize("n", [1, 2])
def test_literal_coframe_matches_adapted_basis(n):
    fast = [r.status for r in check_cont_structure(n)]
    literal = [r.status for r in check_cont_structure(n, literal=True)]
    assert fast == literal


def test_desymmetrized_control_fails():
    reports = check_cont_structure(2, symmetric_f=False)
    bad = [r for r in reports if r.status == FAIL]
    assert bad and all(r.residual for r in bad)
    assert any(r.check_id.endswith("theta0") for r in bad)


def test_reduced_forms_closed_parts():
    rf = build_reduced_forms()
    assert not exterior_derivative(rf.eta5)
    assert not exterior_derivative(rf.eta1 + rf.eta4)


def test_reduced_structure_reports():
    reports = {r.check_id: r for r in solve_reduced_structure()}
    required = ["reduced.dxi1.wedge-xi4", "reduced.dxi4.wedge-xi1", "reduced.eta2", "reduced.eta3",
                "reduced.deta5", "reduced.d(eta1+eta4)", "reduced.dxi2.module", "reduced.dxi3.module"]
    for cid in required:
        assert reports[cid].status == PASS, reports[cid].line()
    assert reports["reduced.dxi2.strict"].status in (PASS, INFO)


def test_printed_rule_solver_recovers_eta2_and_eta3():
    rf = build_reduced_forms()
    xi1, xi4 = rf.xi[0], rf.xi[3]
    out = solve_printed_rule("xi1", ["eta2"], ["xi4"], rf=rf)
    assert [r.status for r in out] == [PASS, INFO]
    # the INFO report renders the coefficient; recompute to compare forms
    from heavenly.forms import solve_structure, wedge

    sol = solve_structure(exterior_derivative(xi1) - wedge(rf.eta1, xi1), [xi4])
    assert congruent_modulo(sol.solutions[0], expected_eta2(rf), [xi1, xi4])
    sol = solve_structure(exterior_derivative(xi4) - wedge(rf.eta4, xi4), [xi1])
    assert congruent_modulo(sol.solutions[0], expected_eta3(rf), [xi1, xi4])


def test_printed_rule_solver_rejects_unlisted_unknowns():
    with pytest.raises(ValueError):
        solve_printed_rule("xi2", ["eta6"], ["xi1"])
    with pytest.raises(ValueError):
        solve_printed_rule("theta0", [], [])


@pytest.fixture(scope="module")
def cov():
    return CoveringContext(jet_order=6, cov_order=3)


@pytest.mark.parametrize("branch", [1, 2])
def test_theorem_both_branches(cov, branch):
    r = verify_theorem(branch, cov)
    assert r.status == PASS, r.line()
    assert not theorem_residual(branch, cov)


def test_theorem_control_with_wrong_image_fails(cov):
    r = verify_theorem(1, cov, w_image="lambda")
    assert r.status == FAIL
    assert "u_xy" in r.residual


def test_theorem_rejects_unknown_branch(cov):
    with pytest.raises(ValueError):
        theorem_residual(3, cov)
