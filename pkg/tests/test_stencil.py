"""Core stencil algebra: apply/compose/adjoint/comparison."""

import numpy as np
import pytest

from lattice_darboux.stencil import (EqualityReport, StencilOperator,
                                     exponential_first_order, interior_equal)
from lattice_darboux.window import Field, LatticeError, Window


def rng():
    return np.random.default_rng(20240811)


def random_op(window, offsets, seed=0, complex_=False):
    r = np.random.default_rng(seed)
    terms = {}
    for s in offsets:
        vals = r.uniform(0.5, 2.0, size=window.shape)
        if complex_:
            vals = vals + 1j * r.uniform(-1, 1, size=window.shape)
        terms[s] = vals
    return StencilOperator(window, terms)


def test_apply_identity_returns_field():
    w = Window((-3, -2), (4, 5))
    f = Field.from_function(w, lambda n1, n2: n1 + 0.5 * n2)
    out = StencilOperator.identity(w).apply(f)
    assert out.window == w
    np.testing.assert_allclose(out.values, f.values)


def test_apply_central_difference_of_linear_is_constant():
    w = Window((-5, -5), (5, 5))
    op = StencilOperator.shift(w, (1, 0)) - StencilOperator.shift(w, (-1, 0))
    f = Field.from_function(w, lambda n1, n2: n1.astype(float))
    out = op.apply(f)
    np.testing.assert_allclose(out.values, 2.0)
    assert out.window == Window((-4, -5), (4, 5))


def test_apply_1d_laplacian_of_square_is_two():
    w = Window((-6,), (6,))
    op = (StencilOperator.shift(w, (1,)) + StencilOperator.shift(w, (-1,))
          - 2.0 * StencilOperator.identity(w))
    f = Field.from_function(w, lambda n: n.astype(float) ** 2)
    out = op.apply(f)
    # independent oracle: (n+1)^2 + (n-1)^2 - 2 n^2 = 2 exactly
    np.testing.assert_allclose(out.values, 2.0)


def test_apply_rejects_disjoint_windows():
    w = Window((0,), (5,))
    op = StencilOperator.identity(w)
    f = Field.constant(Window((10,), (14,)), 1.0)
    with pytest.raises(LatticeError):
        op.apply(f)


def test_apply_restricts_to_common_window():
    w = Window((0,), (5,))
    op = StencilOperator.shift(w, (1,))
    f = Field.from_function(Window((0,), (4,)), lambda n: n.astype(float))
    out = op.apply(f)
    assert out.window == Window((0,), (3,))
    np.testing.assert_allclose(out.values, np.arange(1.0, 5.0))


def test_compose_shift_with_inverse_is_identity():
    w = Window((0, 0), (6, 6))
    t = StencilOperator.shift(w, (1, 0))
    tinv = StencilOperator.shift(w, (-1, 0))
    prod = t @ tinv
    rep = interior_equal(prod, StencilOperator.identity(w), 1e-15)
    assert rep.equal and rep.max_dev == 0.0


def test_compose_shifts_coefficients_covariantly():
    w = Window((0,), (9,))
    b = np.arange(10.0) + 1.0
    c = np.arange(10.0) * 0.5 + 2.0
    bt = StencilOperator(w, {(1,): b})
    ct = StencilOperator(w, {(1,): c})
    prod = bt @ ct
    assert prod.offsets == [(2,)]
    # (b_n T)(c_n T) = b_n c_{n+1} T^2
    np.testing.assert_allclose(prod.terms[(2,)], (b * np.roll(c, -1))[:-1])


def test_compose_first_order_with_adjoint_expands_by_hand():
    w = Window((-4,), (4,))
    q = StencilOperator.identity(w) + StencilOperator.shift(w, (1,))
    prod = q @ q.adjoint()
    # (1+T)(1+T^-1) = 2 + T + T^-1
    expect = (2.0 * StencilOperator.identity(w)
              + StencilOperator.shift(w, (1,)) + StencilOperator.shift(w, (-1,)))
    assert interior_equal(prod, expect, 1e-15).equal


def test_adjoint_moves_and_conjugates_coefficients():
    w = Window((0,), (7,))
    b = np.arange(8.0) + 1.0
    op = StencilOperator(w, {(1,): b})
    adj = op.adjoint()
    assert adj.offsets == [(-1,)]
    # coefficient at n is b_{n-1}
    np.testing.assert_allclose(adj.terms[(-1,)], b[:-1])

    opc = StencilOperator(w, {(1,): b * 1j})
    np.testing.assert_allclose(opc.adjoint().terms[(-1,)], -1j * b[:-1])


def test_adjoint_is_involution_on_interior():
    w = Window((0, 0), (8, 8))
    op = random_op(w, [(0, 0), (1, 0), (0, 1), (1, -1)], seed=3, complex_=True)
    rep = interior_equal(op.adjoint().adjoint(), op, 1e-15)
    assert rep.equal


def test_adjoint_antihomomorphism():
    w = Window((0, 0), (10, 10))
    a = random_op(w, [(0, 0), (1, 0), (0, 1)], seed=1, complex_=True)
    b = random_op(w, [(0, 0), (-1, 0), (1, -1)], seed=2, complex_=True)
    lhs = (a @ b).adjoint()
    rhs = b.adjoint() @ a.adjoint()
    rep = interior_equal(lhs, rhs, 1e-13, relative=True)
    assert rep.equal, rep


def test_compose_associativity():
    w = Window((0, 0), (11, 11))
    a = random_op(w, [(0, 0), (1, 0)], seed=5)
    b = random_op(w, [(0, 1), (0, 0)], seed=6)
    c = random_op(w, [(1, -1), (0, 0)], seed=7)
    rep = interior_equal(a @ (b @ c), (a @ b) @ c, 1e-13, relative=True)
    assert rep.equal, rep


def test_compose_consistent_with_apply_on_random_fields():
    w = Window((-4, -4), (7, 7))
    a = random_op(w, [(0, 0), (1, 0), (0, 1)], seed=11)
    b = random_op(w, [(0, 0), (-1, 0), (0, -1)], seed=12)
    prod = a @ b
    r = rng()
    f = Field(w, r.normal(size=w.shape))
    via_prod = prod.apply(f)
    via_steps = a.apply(b.apply(f))
    # two-step application lives on a smaller interior; compare there
    w_common = via_prod.window.intersect(via_steps.window)
    np.testing.assert_allclose(via_prod.restrict(w_common).values,
                               via_steps.restrict(w_common).values,
                               rtol=1e-13, atol=1e-13)


def test_interior_equal_detects_perturbation():
    w = Window((0, 0), (5, 5))
    a = random_op(w, [(0, 0), (1, 0)], seed=8)
    assert interior_equal(a, a, 1e-15).max_dev == 0.0
    b = a + 1e-3 * StencilOperator.identity(w)
    rep = interior_equal(a, b, 1e-6)
    assert not rep.equal
    assert rep.max_dev == pytest.approx(1e-3)


def test_interior_equal_flags_unshared_offsets():
    w = Window((0,), (5,))
    a = StencilOperator.identity(w)
    b = a + 0.5 * StencilOperator.shift(w, (1,))
    rep = interior_equal(a, b, 1e-9)
    assert not rep.equal and rep.worst_offset == (1,)


def test_reflect_conjugation_squares_to_identity():
    w = Window((-3, -4), (5, 2))
    op = random_op(w, [(0, 0), (1, 0), (0, 1)], seed=9)
    back = op.reflect((True, True)).reflect((True, True))
    assert back.window == w
    rep = interior_equal(back, op, 0.0)
    assert rep.equal


def test_translate_offsets_matches_compose_with_shift():
    w = Window((0, 0), (6, 6))
    op = random_op(w, [(0, 0), (1, 0), (0, 1)], seed=10)
    t = StencilOperator.shift(w, (1, 1))
    rep = interior_equal(op.translate_offsets((1, 1)), op @ t, 1e-15)
    assert rep.equal


def test_json_round_trip_real_and_complex():
    w = Window((-1, 0), (2, 3))
    for complex_ in (False, True):
        op = random_op(w, [(0, 0), (1, 0), (0, -1)], seed=13, complex_=complex_)
        back = StencilOperator.from_json(op.to_json())
        assert back.window == op.window
        assert interior_equal(back, op, 0.0).equal
        assert back.is_complex == complex_


def test_json_rejects_malformed_payload():
    with pytest.raises(LatticeError):
        StencilOperator.from_json('{"dims": 2, "window": [[0, 3]], "terms": []}')
    with pytest.raises(LatticeError):
        StencilOperator.from_json('{"dims": 1, "window": [[0, 1]], "terms": [{"offset": [0]}]}')


def test_exponential_first_order_coefficients():
    w = Window((-2, -2), (2, 2))
    q = exponential_first_order(w, (0.5, 2.0), np.array([[0.1, -0.2], [0.3, 0.4]]))
    n1, n2 = w.grids()
    np.testing.assert_allclose(q.terms[(1, 0)], 0.5 * np.exp(0.1 * n1 - 0.2 * n2))
    np.testing.assert_allclose(q.terms[(0, 1)], 2.0 * np.exp(0.3 * n1 + 0.4 * n2))
    np.testing.assert_allclose(q.terms[(0, 0)], 1.0)


def test_empty_interior_raises():
    w = Window((0,), (1,))
    op = StencilOperator(w, {(3,): np.ones(2)})
    f = Field.constant(w, 1.0)
    with pytest.raises(LatticeError):
        op.apply(f)
