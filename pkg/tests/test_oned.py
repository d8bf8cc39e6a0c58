"""Tridiagonal factorization, Darboux transforms, oscillator families."""

import numpy as np
import pytest
from scipy.special import gammaln

from lattice_darboux.oned import (CharlierParams, ExpQ1D, FactorizationError,
                                  Jacobi1D, charlier_annihilation,
                                  charlier_creation, charlier_ground_state,
                                  charlier_hamiltonian, charlier_polynomials,
                                  darboux, heisenberg_residual,
                                  q_osc_levels, q_osc_operator,
                                  q_osc_relation_residual, riccati_factorize,
                                  riccati_factorize_b, tau_conjugate_residual)
from lattice_darboux.stencil import StencilOperator, interior_equal
from lattice_darboux.window import Field, LatticeError, Window


W = Window((0,), (19,))


def free_operator(window=W, c=1.0, v=0.0):
    n = window.shape[0]
    return Jacobi1D(window, np.full(n, c), np.full(n, v))


# ----------------------------------------------------------------- factorize
def test_riccati_constant_case_all_ones():
    # independent forward recursion: a_{n+1} = c_n/b_n, b_{n+1}^2 = v + alpha - a^2
    q = riccati_factorize(free_operator(), alpha=2.0, b0=1.0)
    np.testing.assert_allclose(q.a, 1.0)
    np.testing.assert_allclose(q.b, 1.0)


def test_riccati_failure_at_zero_pivot():
    with pytest.raises(FactorizationError) as err:
        riccati_factorize(free_operator(), alpha=1.0, b0=1.0)
    assert err.value.site == 1


def test_riccati_negative_discriminant_site_reported():
    n = W.shape[0]
    v = np.zeros(n)
    v[5] = -10.0
    L = Jacobi1D(W, np.ones(n), v)
    with pytest.raises(FactorizationError) as err:
        riccati_factorize(L, alpha=2.0, b0=1.0)
    assert err.value.site == 5


def test_riccati_postcondition_on_random_operator():
    r = np.random.default_rng(7)
    n = W.shape[0]
    L = Jacobi1D(W, r.uniform(0.5, 1.5, n), r.uniform(-0.2, 0.2, n))
    alpha = 4.0
    q = riccati_factorize(L, alpha, b0=1.2)
    prod = q.as_stencil() @ q.adjoint_stencil()
    target = L.as_stencil() + alpha * StencilOperator.identity(W)
    assert interior_equal(prod, target, 1e-12, relative=True).equal


def test_darboux_constant_factors_are_fixed_point():
    q = riccati_factorize(free_operator(), alpha=2.0, b0=1.0)
    Lt = darboux(q, alpha=2.0)
    np.testing.assert_allclose(Lt.c, 1.0)
    np.testing.assert_allclose(Lt.v, 0.0, atol=1e-15)


def test_darboux_product_identity():
    r = np.random.default_rng(17)
    n = W.shape[0]
    L = Jacobi1D(W, r.uniform(0.8, 1.2, n), r.uniform(-0.1, 0.1, n))
    alpha = 3.0
    q = riccati_factorize(L, alpha, b0=1.0)
    Lt = darboux(q, alpha)
    prod = q.adjoint_stencil() @ q.as_stencil()
    target = Lt.as_stencil() + alpha * StencilOperator.identity(Lt.window)
    assert interior_equal(prod, target, 1e-12, relative=True).equal


def test_darboux_twice_with_zero_shift_is_unit_translation():
    # for alpha = 0 two exchanges shift the operator by one lattice site
    # near the free operator the recursion has amplification ~1, so the exact
    # unit-shift identity survives in floating point on a generic instance
    r = np.random.default_rng(23)
    n = W.shape[0]
    L = Jacobi1D(W, r.uniform(0.95, 1.05, n), r.uniform(-0.05, 0.05, n))
    alpha = 2.0
    q = riccati_factorize(L, alpha, b0=1.0)
    Lt = darboux(q, alpha)
    # consistent second factorization: seed b~_lo = a_lo picks the inverse pair
    q2 = riccati_factorize(Lt, alpha, b0=q.a[1])
    np.testing.assert_allclose(q2.a, q.b[:-1], rtol=1e-9)
    np.testing.assert_allclose(q2.b, q.a[1:], rtol=1e-9)
    Ltt = darboux(q2, alpha)
    np.testing.assert_allclose(Ltt.c, L.c[1:-1], rtol=1e-8)
    np.testing.assert_allclose(Ltt.v, L.v[1:-1], rtol=1e-8, atol=1e-10)


def test_mirror_factorization_product():
    r = np.random.default_rng(29)
    n = W.shape[0]
    L = Jacobi1D(W, r.uniform(0.8, 1.2, n), r.uniform(-0.1, 0.1, n))
    alpha = 3.5
    q = riccati_factorize_b(L, alpha, b_seed=0.7)
    prod = q.adjoint_stencil() @ q.as_stencil()
    target = L.as_stencil() + alpha * StencilOperator.identity(W)
    # Q^+Q = a^2 + b_{n-1}^2 + ... ; seed only affects the edge site
    inner = Window((W.lo[0] + 1,), (W.hi[0],))
    assert interior_equal(prod.restrict(prod.window.intersect(inner)),
                          target.restrict(inner), 1e-12, relative=True).equal


# ------------------------------------------------------------------ Charlier
def test_ground_state_squares_follow_poisson_weight():
    # |psi|^2 = 1/(alpha^{k-1} (k-1)!) with alpha = b, normalized at k = 1
    for b in (0.5, 1.0, 2.0):
        p = CharlierParams(b=b, n0=0)
        w = Window((1,), (12,))
        psi = charlier_ground_state(p, w)
        k = np.arange(1, 13)
        expect = 1.0 / (b ** (k - 1.0) * np.exp(gammaln(k)))
        np.testing.assert_allclose(psi.values ** 2, expect, rtol=1e-12)


def test_ground_state_annihilated():
    p = CharlierParams(b=2.0, n0=0)
    w = Window((1,), (30,))
    psi = charlier_ground_state(p, w)
    out = charlier_annihilation(p, w).apply(psi)
    assert np.max(np.abs(out.values)) < 1e-13 * psi.max_abs()


def test_ground_state_recursion_sign():
    p = CharlierParams(b=2.0, n0=0)
    w = Window((1,), (10,))
    psi = charlier_ground_state(p, w).values
    k = np.arange(1, 10)
    np.testing.assert_allclose(psi[1:], -psi[:-1] / np.sqrt(2.0 * k), rtol=1e-13)


def test_window_outside_half_line_rejected():
    with pytest.raises(LatticeError):
        charlier_ground_state(CharlierParams(b=1.0, n0=0), Window((0,), (5,)))


def test_heisenberg_commutator_equals_slope():
    w = Window((1,), (60,))
    assert heisenberg_residual(CharlierParams(b=1.0), 1.0, w) < 1e-13
    assert heisenberg_residual(CharlierParams(b=0.5, n0=2), 0.5, w) < 1e-13
    # a broken value of the shift is detected at the same scale
    assert heisenberg_residual(CharlierParams(b=1.0), 1.0 + 1e-3, w) == pytest.approx(1e-3)


def test_polynomials_degree_and_orthogonality():
    p = CharlierParams(b=1.0, n0=0)
    w = Window((1,), (60,))
    polys = charlier_polynomials(p, 4, w)
    np.testing.assert_allclose(polys[0].values, 1.0)
    # degree: the (k+1)-st forward difference annihilates P_k
    for k, poly in enumerate(polys):
        vals = poly.values
        for _ in range(k + 1):
            vals = np.diff(vals)
        assert np.max(np.abs(vals)) < 1e-7 * max(1.0, np.max(np.abs(poly.values)))
    # weighted orthogonality against the squared ground state
    weight = charlier_ground_state(p, w).values ** 2
    for j in range(5):
        for k in range(j + 1, 5):
            wj, wk = polys[j].values, polys[k].values
            m = min(len(wj), len(wk))
            inner = np.sum(wj[:m] * wk[:m] * weight[:m])
            scale = np.sqrt(np.sum(wj[:m] ** 2 * weight[:m])
                            * np.sum(wk[:m] ** 2 * weight[:m]))
            assert abs(inner) < 1e-10 * scale


def test_charlier_ladder_eigen_residuals():
    p = CharlierParams(b=1.5, n0=0)
    w = Window((1,), (80,))
    ham = charlier_hamiltonian(p, w)
    cre = charlier_creation(p, w)
    psi = charlier_ground_state(p, w)
    for k in range(6):
        lam = k * p.b
        out = ham.apply(psi)
        dev = np.max(np.abs(out.values - lam * psi.restrict(out.window).values))
        assert dev < 1e-9 * psi.max_abs(), f"level {k}"
        psi = cre.apply(psi)


# -------------------------------------------------------------- q-oscillator
def test_q_relation_residual_examples():
    w = Window((-12,), (12,))
    assert q_osc_relation_residual(ExpQ1D(1.0, 2.0), w) < 1e-12
    assert q_osc_relation_residual(ExpQ1D(0.3, 0.5), w) < 1e-13


def test_q_relation_wrong_constant_fails():
    w = Window((-8,), (8,))
    q = ExpQ1D(1.0, 2.0)
    Q = q.stencil(w)
    Q1 = ExpQ1D(q.c * q.a, q.a).stencil(w)     # wrong shifted constant c*a
    one = StencilOperator.identity(w)
    rep = interior_equal(Q @ Q.adjoint() - one,
                         (q.a ** -2.0) * (Q1.adjoint() @ Q1 - one), 1e-6,
                         relative=True)
    assert not rep.equal and rep.rel_dev > 0.1


def test_tau_reflection_identity():
    w = Window((-9,), (10,))           # symmetric under n -> 1 - n
    assert tau_conjugate_residual(ExpQ1D(1.0, 2.0), w) < 1e-13
    assert tau_conjugate_residual(ExpQ1D(2.0, 1.0 / 3.0), w) < 1e-13


def test_tau_reflection_wrong_parameter_fails():
    w = Window((-7,), (8,))
    q = ExpQ1D(1.0, 2.0)
    reflected = q.stencil(w).reflect((True,)).conjugate_by_shift((-1,))
    wrong = ExpQ1D(q.c, q.a).stencil(w).adjoint()   # a instead of 1/a
    assert not interior_equal(reflected, wrong, 1e-6, relative=True).equal


def test_tau_requires_symmetric_window():
    with pytest.raises(LatticeError):
        tau_conjugate_residual(ExpQ1D(1.0, 2.0), Window((-5,), (5,)))


def test_q_relation_and_tau_hold_for_random_parameters():
    r = np.random.default_rng(2024)
    w = Window((-9,), (10,))
    count = 0
    while count < 50:
        a = r.uniform(0.2, 5.0)
        if abs(abs(a) - 1.0) < 0.05:
            continue
        c = r.uniform(0.2, 3.0) * (1 if r.random() < 0.5 else -1)
        q = ExpQ1D(c, a)
        assert q_osc_relation_residual(q, w) < 1e-12
        assert tau_conjugate_residual(q, w) < 1e-12
        count += 1


def test_level_predictions_branch_table():
    np.testing.assert_allclose(q_osc_levels(2.0, 4, "L"),
                               [0.0, 0.75, 0.9375, 0.984375])
    np.testing.assert_allclose(q_osc_levels(0.5, 3, "Ltilde"),
                               [0.0, 0.75, 0.9375])
    np.testing.assert_allclose(q_osc_levels(2.0, 2, "Ltilde"), [0.75, 0.9375])
    np.testing.assert_allclose(q_osc_levels(0.5, 2, "L"), [0.75, 0.9375])
    assert q_osc_levels(3.0, 1, "L")[0] == 0.0
    with pytest.raises(LatticeError):
        q_osc_levels(1.0, 3)


def test_branch_operators_have_matching_zero_modes():
    # the "L"-labeled branch at |a| > 1 carries the zero mode of Q psi = 0
    w = Window((-25,), (25,))
    q = ExpQ1D(1.0, 2.0)
    op = q_osc_operator(q, w, "L")
    n = w.axis_range(0).astype(float)
    logmag = -n * np.log(q.c) if q.c > 0 else 0.0
    logmag = -n * np.log(abs(q.c)) - n * (n - 1) / 2.0 * np.log(abs(q.a))
    psi = Field(w, (-1.0) ** np.mod(n, 2) * np.exp(logmag - logmag.max()))
    out = op.apply(psi)
    assert np.max(np.abs(out.values)) < 1e-12 * psi.max_abs()
