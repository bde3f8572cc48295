import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hessquot.errors import DomainError, InvalidInputError
from hessquot.fields import (
    ScalarField,
    SymTensorField,
    bumps_family,
    constant_family,
    constant_tensor,
    cosine_family,
    torus_grid,
)
from hessquot.jacobi_harness import (
    absorption_margin,
    b_to_B,
    b_to_B_check,
    codazzi_defect,
    codazzi_defect_field,
    hessian_field,
    jacobi_residual_field,
    jb_implication_margin,
    lambda1_expansion_defect,
    min_constant_C,
    minimal_D,
    prejacobi_residual,
    refinement_order,
)


def cosine_w(dim, n, **kw):
    return hessian_field(*cosine_family(dim, n, **kw))


def test_hessian_field_examples():
    u, chi = constant_family(2, 8, c=2.0)
    w = hessian_field(u, chi)
    assert np.array_equal(w.values, chi.values)
    grid, spacing, (x, y) = torus_grid(2, 32)
    w = hessian_field(ScalarField(2, grid, spacing, np.cos(x)), constant_tensor(2, grid, spacing, 2 * np.eye(2)))
    assert np.abs(w.values[..., 0, 0] - (2 - np.cos(x))).max() < 1e-4
    with pytest.raises(InvalidInputError):
        hessian_field(ScalarField(2, (16, 16), (0.1, 0.1), np.zeros((16, 16))), constant_tensor(2, grid, spacing, np.eye(2)))


@pytest.mark.parametrize("dim,n", [(2, 24), (3, 16)])
def test_codazzi_fourth_order(dim, n):
    coarse = codazzi_defect(cosine_w(dim, n))
    fine = codazzi_defect(cosine_w(dim, 2 * n))
    assert coarse > 0.0
    assert refinement_order(coarse, fine) >= 3.5


def test_codazzi_constant_and_nonconstant_chi():
    u, chi = constant_family(3, 10)
    assert codazzi_defect(hessian_field(u, chi)) == 0.0
    grid, spacing, (x, y) = torus_grid(2, 32)
    vals = np.broadcast_to(np.eye(2), grid + (2, 2)).copy()
    vals[..., 0, 0] += 0.5 * np.sin(y)
    wf = SymTensorField(2, grid, spacing, vals)
    # D_2 w_11 - D_1 w_21 = 0.5 cos(y)
    assert codazzi_defect(wf) == pytest.approx(0.5, rel=1e-3)
    assert codazzi_defect_field(wf).max() == pytest.approx(0.5 * np.sqrt(2), rel=1e-3)


def test_constant_field_residual():
    u, chi = constant_family(2, 16, c=2.0)
    wf = hessian_field(u, chi)
    rep = jacobi_residual_field(wf, 1, 0.1, 1.0)
    assert len(rep) == wf.npoints and rep.excluded == 0
    np.testing.assert_allclose(rep.residual, rep.forcing, rtol=1e-12)
    assert rep.min_residual() > 0.0
    assert min_constant_C(wf, 1, 0.1) <= 1e-12
    pts = list(rep)
    assert pts[0].index == (0, 0) and pts[0].residual_at(0.1, 1.0) == pytest.approx(rep.residual[0])


def test_large_C_and_monotone_in_eps():
    wf = cosine_w(2, 24, a=0.5)
    rep = jacobi_residual_field(wf, 1, 0.0, 100.0)
    assert rep.min_residual() > 0.0
    c1 = min_constant_C(wf, 1, 0.1)
    c2 = min_constant_C(wf, 1, 0.2)
    assert c2 >= c1
    rep = jacobi_residual_field(wf, 1, 0.1, c1)
    assert rep.min_residual() >= -1e-12 * np.abs(rep.forcing).max()


def test_gap_filter_excludes_crossings():
    # u = a cos(x1), chi = (a+1) Id: w11 = 1 + a(1 - cos x1) crosses w22 = 1 + a
    grid, spacing, (x, y) = torus_grid(2, 32)
    a = 0.3
    wf = hessian_field(ScalarField(2, grid, spacing, a * np.cos(x)), constant_tensor(2, grid, spacing, (a + 1) * np.eye(2)))
    rep = jacobi_residual_field(wf, 1, 0.1, 0.0)
    assert 0 < rep.excluded < wf.npoints
    assert np.all(np.isfinite(rep.residual))
    assert np.all(rep.gap >= 1e-3 * rep.lambda1)


def test_gamma_n_violation_names_point():
    grid, spacing, _ = torus_grid(2, 8)
    vals = np.broadcast_to(np.eye(2), grid + (2, 2)).copy()
    vals[3, 5] = np.diag([1.0, -0.5])
    wf = SymTensorField(2, grid, spacing, vals)
    with pytest.raises(DomainError, match=r"\(3, 5\)"):
        jacobi_residual_field(wf, 1, 0.1, 0.0)


@pytest.mark.parametrize("dim", [2, 3])
def test_prejacobi_nonnegative(dim):
    wf = cosine_w(dim, 16)
    for k in range(1, dim):
        for dt, e0 in ((1.0, 0.0), (0.5, 0.05)):
            assert prejacobi_residual(wf, k, dt, e0).min() >= -1e-8
    with pytest.raises(InvalidInputError):
        prejacobi_residual(wf, dim)


@pytest.mark.parametrize("theta", [0.1, 0.5, 0.9])
def test_absorption(theta):
    wf = cosine_w(2, 16)
    assert absorption_margin(wf, theta) >= -1e-12
    grid, spacing, (x, y) = torus_grid(2, 16)
    bent = wf.values.copy()
    bent[..., 0, 0] += 0.3 * np.sin(y)
    assert absorption_margin(SymTensorField(2, grid, spacing, bent), theta) >= -1e-12
    with pytest.raises(InvalidInputError):
        absorption_margin(wf, 1.0)


def test_lambda1_expansion_is_third_order(rng):
    w = np.diag([3.0, 2.0, 1.0])
    xi = rng.standard_normal((3, 3))
    xi += xi.T
    d = [abs(lambda1_expansion_defect(w, xi, t)) for t in (1e-2, 5e-3)]
    assert np.log2(d[0] / d[1]) > 2.7
    with pytest.raises(DomainError):
        lambda1_expansion_defect(np.eye(2), xi[:2, :2], 1e-3)


def test_lambda_ratio_reported():
    rep = jacobi_residual_field(hessian_field(*bumps_family(2, 16)), 1, 0.1, 0.0)
    assert np.isfinite(rep.lambda_ratio_min()) and rep.lambda_ratio_min() > 0.0


# b -> B --------------------------------------------------------------------


def test_b_to_B_zero_gradient_and_limit():
    h = np.array([[1.0, 0.2], [0.2, -3.0]])
    bg, bh = b_to_B(2.0, 5.0, np.zeros(2), h)
    s = 5.0 + np.log1p(2.0)
    assert np.array_equal(bg, np.zeros(2))
    assert np.array_equal(bh, h / s)
    g = np.array([0.7, -1.1])
    for D in (1e4, 1e8):
        _, bh = b_to_B(2.0, D, g, h)
        s = D + np.log1p(2.0)
        np.testing.assert_allclose(bh * s, h, atol=2 * np.abs(g).max() ** 2 / s)
    with pytest.raises(DomainError):
        b_to_B(0.5, -1.0, g, h)


finite = st.floats(-50, 50)


@given(
    st.floats(0.0, 1e3),
    st.floats(0.0, 1e3),
    arrays(np.float64, 3, elements=finite),
    arrays(np.float64, (3, 3), elements=finite).map(lambda a: a + a.T),
)
def test_b_to_B_chain_rule(lam1, D, g, h):
    if D + np.log1p(lam1) <= 1e-6:
        return
    gd, hd = b_to_B_check(lam1, D, g, h)
    assert gd <= 1e-12 and hd <= 1e-12


@given(
    st.floats(0.05, 2.0),
    st.floats(0.0, 20.0),
    st.floats(0.0, 1e4),
    st.floats(0.0, 1e3),
    st.floats(0.0, 1e3),
    st.floats(0.0, 1e3),
    st.floats(0.0, 1e3),
    st.floats(1.0, 1e3),
)
def test_jb_implication(eps, C, extra, lam1, p, forcing, gf, hf):
    D = minimal_D(eps, C, lam1) + extra + 1e-9
    if D + np.log1p(lam1) <= 0.0:
        return
    margin = jb_implication_margin(eps, C, D, lam1, p, forcing, gf, hf)
    s = D + np.log1p(lam1)
    assert margin >= -1e-12 * (p / s + forcing + gf + hf)


def test_jb_can_fail_below_threshold():
    eps, C, lam1 = 0.5, 3.0, 1.0
    D = 1.0
    assert np.sqrt(D + np.log1p(lam1)) < 2 / eps + C
    assert jb_implication_margin(eps, C, D, lam1, 0.0, 1.0, 0.0, 0.0) < 0.0
