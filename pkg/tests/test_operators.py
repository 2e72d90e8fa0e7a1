import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from forms import random_form
from msem.basis import Axis, AxisRole, TensorBasis, tensor_basis
from msem.mapping import annulus_map, pulled_back_metric
from msem.mimetic import AnalyticForm, DiscreteForm, integrate, opposite_basis, project
from msem.operators import (
    OperatorKind,
    boundary_traces,
    codifferential,
    codifferential_matrix,
    derivative_matrix,
    exterior_derivative,
    hodge_matrix,
    hodge_star,
    inner,
    mass_matrix,
    star_d_star_matrix,
    trace_form,
    wedge_h,
)


def _random(basis, seed=0):
    return DiscreteForm(basis, np.random.default_rng(seed).normal(size=basis.size))


@given(st.integers(0, 10**6))
@settings(max_examples=30, deadline=None)
def test_derivative_commutes_with_projection(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 3))
    k = int(rng.integers(0, n))
    order = int(rng.integers(2, 7))
    b = TensorBasis(tuple(Axis.uniform(order, int(rng.integers(1, 3))) for _ in range(n)), k)
    a = random_form(rng, n, k)
    lhs = exterior_derivative(project(a, b, order + 4)).coefficients
    rhs = project(a.derivative, b.with_degree(k + 1), order + 4).coefficients
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def test_derivative_matrix_is_coboundary():
    b = tensor_basis(2, 1, "primal", 2)
    D = derivative_matrix(b)
    assert D.kind is OperatorKind.DERIVATIVE and D.shape == (4, 12)
    np.testing.assert_array_equal(D.toarray(), b.complex.incidence_matrix(2).T.toarray())
    with pytest.raises(ValueError):
        derivative_matrix(b.with_degree(2))
    with pytest.raises(ValueError):
        derivative_matrix(opposite_basis(b))


def test_exterior_derivative_on_open_dual_grid_is_exact():
    b = opposite_basis(tensor_basis(2, 2, "primal", 3))
    df = _random(b)
    d = exterior_derivative(df)
    pts = np.random.default_rng(1).uniform(-1, 1, (6, 2))
    np.testing.assert_allclose(d.evaluate(pts), df.analytic_derivative().evaluate(pts), atol=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_dd_vanishes_on_discrete_forms(n):
    for k in range(n - 1):
        b = tensor_basis(n, k, "primal", 3)
        df = DiscreteForm(b, np.random.default_rng(k).integers(-9, 10, b.size))
        assert not np.any(exterior_derivative(exterior_derivative(df)).coefficients)


@pytest.mark.parametrize("n,k", [(1, 0), (1, 1), (2, 0), (2, 1), (2, 2), (3, 1), (3, 2)])
def test_star_star_sign(n, k):
    df = _random(tensor_basis(n, k, "primal", 2), n + k)
    twice = hodge_star(hodge_star(df))
    np.testing.assert_allclose(twice.coefficients, (-1) ** (k * (n - k)) * df.coefficients, atol=1e-10)


def test_hodge_matrix_in_one_dimension_samples_edge_functions():
    b = TensorBasis((Axis(3),), 1)
    H = hodge_matrix(b).toarray()
    target = opposite_basis(b)
    nodes = target.axes[0].node_coordinates
    np.testing.assert_allclose(H, b.axes[0].edge_matrix(nodes), atol=1e-12)


def test_hodge_star_with_metric_projects():
    b = tensor_basis(2, 0, "primal", 3)
    df = _random(b)
    metric = pulled_back_metric(annulus_map())
    out = hodge_star(df, metric)
    assert out.degree == 2 and out.basis.role == AxisRole.DUAL_INTERIOR.value


@pytest.mark.parametrize("order", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("dual", ["dual_interior", "dual"])
def test_codifferential_matrix_equals_star_d_star(order, dual):
    S = star_d_star_matrix(TensorBasis((Axis(order),), 1), dual=dual).toarray()
    np.testing.assert_allclose(S, codifferential_matrix(order).toarray(), atol=1e-10)


def test_codifferential_matrix_low_order_columns():
    D = codifferential_matrix(2).toarray()
    assert D.shape == (3, 2)
    np.testing.assert_allclose(D, [[-1.0, 1.0]] * 3, atol=1e-14)


@pytest.mark.parametrize("n", [2, 3])
def test_codifferential_squares_to_zero(n):
    df = _random(tensor_basis(n, n, "primal", 3), 7)
    assert np.abs(codifferential(codifferential(df)).coefficients).max() < 1e-9
    with pytest.raises(ValueError):
        codifferential(_random(tensor_basis(n, 0, "primal", 2)))


def test_codifferential_is_adjoint_of_derivative_on_trace_free_fields():
    # in 1D: <d f, u> = -<f, codiff u> up to boundary terms, which vanish when f does at the ends
    b0 = TensorBasis((Axis(4),), 0)
    f = DiscreteForm(b0, [0.0, 0.3, -1.2, 0.7, 0.0])
    u = _random(b0.with_degree(1), 2)
    lhs = inner(exterior_derivative(f), u, quad_order=10)
    rhs = inner(f, codifferential(u), quad_order=10)
    assert lhs == pytest.approx(rhs, abs=1e-11)


def test_mass_matrices_symmetric_positive_definite():
    metric = pulled_back_metric(annulus_map())
    for k in range(3):
        for m in (None, metric):
            M = mass_matrix(tensor_basis(2, k, "primal", 3), m, 8).toarray()
            assert np.abs(M - M.T).max() < 1e-12
            assert np.linalg.eigvalsh(M).min() > 0


def test_one_dimensional_mass_matrix():
    np.testing.assert_allclose(mass_matrix(TensorBasis((Axis(1),), 0)).toarray(), [[2 / 3, 1 / 3], [1 / 3, 2 / 3]])


def test_inner_rejects_mixed_spaces():
    a = _random(tensor_basis(1, 0, "primal", 2))
    with pytest.raises(ValueError):
        inner(a, _random(tensor_basis(1, 0, "primal", 3)))


def test_wedge_leibniz_rule():
    for k, l in [(0, 0), (0, 1), (1, 0)]:
        a = _random(tensor_basis(2, k, "primal", 3), 1)
        b = _random(tensor_basis(2, l, "primal", 3), 2)
        lhs = exterior_derivative(wedge_h(a, b)).coefficients
        rhs = wedge_h(exterior_derivative(a), b).coefficients + (-1) ** k * wedge_h(a, exterior_derivative(b)).coefficients
        assert np.abs(lhs - rhs).max() < 1e-9


def test_wedge_preserves_integrals_of_top_forms():
    a = _random(tensor_basis(2, 1, "primal", 3), 3)
    b = _random(tensor_basis(2, 1, "primal", 3), 4)
    w = wedge_h(a, b)
    exact = integrate(a.as_form().wedge(b.as_form()), a.basis.axes, 10)
    assert integrate(w.as_form(), a.basis.axes, 10) == pytest.approx(exact, abs=1e-12)
    np.testing.assert_array_equal(w.coefficients, -wedge_h(b, a).coefficients)
    with pytest.raises(ValueError):
        wedge_h(w, a)


def test_trace_of_zero_form_and_signs():
    b = TensorBasis((Axis(2), Axis(2)), 0)
    f = project(AnalyticForm(2, 0, (lambda x, y: x + 2 * y,)), b)
    t = trace_form(f, 0, 1)
    np.testing.assert_allclose(t.coefficients, 1 + 2 * t.basis.axes[0].node_coordinates, atol=1e-14)
    one = TensorBasis((Axis(2),), 1)
    g = project(AnalyticForm(1, 1, (lambda x: 3.0 + 0 * x,)), one)
    assert trace_form(g, 0, 1).coefficients[0] == pytest.approx(3.0)
    assert trace_form(g, 0, -1).coefficients[0] == pytest.approx(-3.0)


def test_trace_commutes_with_derivative_on_the_square():
    b = tensor_basis(2, 0, "primal", 3)
    f = _random(b, 5)
    for axis, side, tr in boundary_traces(f):
        lhs = exterior_derivative(tr).coefficients
        rhs = trace_form(exterior_derivative(f), axis, side).coefficients
        sign = (-1) ** axis * side
        np.testing.assert_allclose(lhs, sign * rhs, atol=1e-12)


def test_trace_rejects_periodic_and_bad_arguments():
    f = _random(TensorBasis((Axis.uniform(2, 2, periodic=True), Axis(2)), 1))
    with pytest.raises(ValueError):
        trace_form(f, 0, 1)
    with pytest.raises(ValueError):
        trace_form(f, 1, 0)
    with pytest.raises(ValueError):
        trace_form(f, 2, 1)
    assert len(boundary_traces(f)) == 2


def test_operator_matrix_serialization():
    D = codifferential_matrix(2)
    rows = D.to_csv().strip().splitlines()
    assert len(rows) == 3 and len(rows[0].split(",")) == 2
    assert np.allclose(np.array([[float(v) for v in r.split(",")] for r in rows]), D.toarray(), rtol=0, atol=0)
    coo = derivative_matrix(tensor_basis(1, 0, "primal", 1)).to_coo_text()
    assert coo == "0 0 -1\n0 1 1\n"
