import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from hdgmg import diagnostics as dg
from hdgmg.hdg import SolverKind


# ---------------------------------------------------------------- sup_ratio

def test_sup_ratio_trivial_cases():
    D = sp.identity(5, format="csr")
    assert np.isclose(dg.sup_ratio(D, D), 1.0)
    N = sp.diags([1.0, 4.0, 2.0, 3.0, 0.5])
    assert np.isclose(dg.sup_ratio(N, D), 4.0)
    assert np.isclose(dg.sup_ratio(N, 2 * N), 0.5)


def test_sup_ratio_semidefinite():
    N = np.diag([2.0, 0.0])
    D = np.diag([1.0, 0.0])
    assert np.isclose(dg.sup_ratio(N, D, semidefinite=True), 2.0)
    with pytest.raises(ValueError):
        dg.sup_ratio(N, D)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_sparse_path_agrees_with_dense(seed):
    rng = np.random.default_rng(seed)
    n = 60
    B = sp.random(n, n, density=0.1, random_state=rng) + sp.identity(n)
    D = (B @ B.T + sp.identity(n)).tocsr()
    C = sp.random(n, n, density=0.1, random_state=rng)
    N = (C @ C.T).tocsr()
    dense = dg.sup_ratio(N, D)
    lanczos = dg.sup_ratio(N, D, dense_limit=0, tol=1e-12)
    assert np.isclose(dense, lanczos, rtol=1e-8)


# ---------------------------------------------------------------- reports

def test_report_csv_layout():
    rows = [dg.ReportRow("IA2", "1-2", "LDG-H", 1, "1/h", "I1", 1.5e-16, np.nan, True),
            dg.ReportRow("ES-I", "2-3", "LDG-H", 1, "1/h", "I1", 2.0, 1.25, False)]
    text = dg.AssumptionReport(rows).to_csv().splitlines()
    assert text[0] == ",".join(dg.CSV_HEADER)
    assert text[1] == "IA2,1-2,LDG-H,1,1/h,I1,1.500000e-16,,pass"
    assert text[2] == "ES-I,2-3,LDG-H,1,1/h,I1,2.000000e+00,1.250000e+00,FAIL"
    assert not dg.AssumptionReport(rows).passed


# ---------------------------------------------------------------- checks

@pytest.fixture(scope="module")
def ctx(hierarchy):
    return dg.DiagnosticContext(SolverKind.ldg(1), 3, hierarchy)


@pytest.fixture(scope="module")
def ctx2(hierarchy):
    return dg.DiagnosticContext(SolverKind.ldg(2, "1"), 3, hierarchy)


@pytest.mark.parametrize("injection", ["I0", "I1", "I2", "I3"])
def test_ritz_quasi_projection_definition(ctx2, injection):
    lam = np.random.default_rng(0).standard_normal(ctx2.level(2).space.n_dofs)
    P = dg.ritz_quasi_projection(ctx2, 2, injection, lam)
    I = ctx2.injection(2, injection)
    assert np.allclose(ctx2.level(1).A @ P, I.T @ (ctx2.level(2).A @ lam))


@pytest.mark.parametrize("injection", ["I0", "I1", "I2", "I3"])
def test_identities_hold(ctx2, injection):
    for ell in (1, 2):
        assert dg.check_identity_IA2(ctx2, ell, injection).passed
    assert dg.check_quasi_orthogonality(ctx2, 2, injection, trials=8).passed


def test_broken_injection_is_caught(ctx):
    assert not dg.check_identity_IA2(ctx, 2, "broken").passed
    qo = dg.check_quasi_orthogonality(ctx, 2, "broken", trials=8).rows[0]
    assert qo.constant > 1e-6


@pytest.mark.parametrize("kind", [SolverKind.ldg(1), SolverKind.ldg(3, "1"), SolverKind.rt(1),
                                  SolverKind.rt(2), SolverKind.bdm(2)],
                         ids=lambda k: f"{k.method}-p{k.p}")
def test_LS4_for_every_method(hierarchy, kind):
    c = dg.DiagnosticContext(kind, 1, hierarchy)
    row = dg.check_LS4(c, 1).rows[0]
    assert row.passed and row.constant < 1e-11


def test_energy_constants_dense_and_operator_paths_agree(ctx2, monkeypatch):
    dense = dg.energy_constants(ctx2, 2, "I3")
    monkeypatch.setattr(dg, "DENSE_LIMIT", 0)
    lanczos = dg.energy_constants(ctx2, 2, "I3")
    assert np.allclose(dense, lanczos, rtol=1e-6)


def test_ES_P_equals_ES_I(ctx):
    # P is the energy adjoint of I, so the two norms coincide
    es_i, es_p, _ = dg.energy_constants(ctx, 2, "I1")
    assert np.isclose(es_i, es_p, rtol=1e-8)


def test_sampled_A1_is_below_its_supremum(ctx):
    sampled, eig, dense = dg.a1_ratios(ctx, 2, "I2")
    assert 0 < sampled <= dense * (1 + 1e-10)
    assert eig > 0


def test_injection_stability_of_identity_part(ctx):
    # IA1 constants are O(1) and at least 1 (child edges copy the coarse trace)
    c = dg.injection_stability(ctx, 2, "I1")
    assert 0.5 < c < 3.0


def test_ls_constants_positive_and_bounded(ctx):
    consts = dg.ls_constants(ctx, 2)
    assert set(consts) == {"LS1", "LS2-q", "LS2-u", "LS3", "LS6-lower", "LS6-upper"}
    assert all(np.isfinite(v) and v > 0 for v in consts.values())


def test_convergence_study_orders(hierarchy):
    rows = dg.convergence_study(SolverKind.ldg(1), [2, 3, 4], hierarchy)
    assert rows[-1].trace_order > 1.9
    assert rows[-1].u_order > 1.8
    assert rows[-1].q_order > 0.9
    assert dg.check_LS5(SolverKind.ldg(1), [3, 4], hierarchy=hierarchy).passed


def test_suite_is_deterministic(hierarchy):
    kind = SolverKind.ldg(1)
    a = dg.run_suite(kind, 2, ["I1"], seed=5, hierarchy=hierarchy).to_csv()
    b = dg.run_suite(kind, 2, ["I1"], seed=5, hierarchy=hierarchy).to_csv()
    assert a == b
