from fractions import Fraction

import numpy as np
import pytest

from opindex.errors import CorroborationError, NotTraceReadyError, SupportLeakError
from opindex.gamma import (EXPECTED_DELTA1, SeqOperator, cyclic_bandwidth, delta0_exponential,
                           delta1_table, exact_shift, gamma_generator, gamma_norm_diagnostic,
                           gamma_word, index_element, periodic_operator, quotient_unitaries,
                           rank_one_projection, seq_diag, seq_eps_index, seq_identity, trace_index,
                           w_conjugation_residual, w_grid, w_matrix, w_transform, y_op)
from opindex.symbols import (builtin, fourier_op, fourier_series, identity_word, modulation, mult_op,
                             standard_bc)

J = 16


def _interior(a, r=J - 4):
    return a[J - r:J + r + 1, J - r:J + r + 1]


def forward_shift_with_tail(J: int) -> SeqOperator:
    """``e_k -> e_{k+1}`` for ``k >= 0``, identity for ``k < 0``: index -1."""
    m = np.zeros((2 * J + 1, 2 * J + 1))
    for k in range(-J, J + 1):
        if k < 0:
            m[k + J, k + J] = 1
        elif k < J:
            m[k + 1 + J, k + J] = 1
    return SeqOperator(m, J, "shift")


def test_y_examples():
    assert np.array_equal(y_op(0, J).matrix, np.eye(2 * J + 1))
    u = np.arange(-J, J + 1).astype(complex)
    for k in (1, -2, 3):
        v = y_op(k, J).matrix @ u
        inner = np.abs(np.arange(-J, J + 1)) <= J - abs(k)
        assert np.array_equal(v[inner], (np.arange(-J, J + 1) + k)[inner])
    err = np.abs(y_op(0.3, J).matrix @ y_op(0.4, J).matrix - y_op(0.7, J).matrix).max()
    assert err < 1e-10
    with pytest.raises(ValueError):
        y_op(0.5, 4)
    with pytest.raises(ValueError):
        y_op(0.5, J, "sideways")


def test_y_is_unitary():
    for phi in (0.25, 1.7, -3.3):
        Y = y_op(phi, J).matrix
        assert np.abs(Y @ Y.conj().T - np.eye(2 * J + 1)).max() < 1e-10


def test_reversed_convention_flips_direction():
    assert np.array_equal(y_op(2, J, "reversed").matrix, y_op(-2, J).matrix)


def test_gamma_generator_examples():
    b, c = standard_bc()
    for j in (-1, 2):
        for phi, sign in ((0.3, 1), (1.0, -1)):
            g = gamma_generator(modulation(j), phi, sign, J)
            assert np.array_equal(g.operator.matrix, y_op(-j, J).matrix)
    g = gamma_generator(mult_op(b), 0.4, -1, J)
    assert not np.any(g.operator.matrix)
    g = gamma_generator(fourier_op(b), 0.0, 1, J)
    assert np.array_equal(g.operator.matrix, np.diag(b(np.arange(-J, J + 1))))
    with pytest.raises(ValueError):
        gamma_generator(fourier_op(b), 0.0, 0, J)


def test_gamma_of_a1():
    A = quotient_unitaries()
    b, c = standard_bc()
    assert np.array_equal(gamma_word(A["A1"], 1.0, -1, J).operator.matrix, np.eye(2 * J + 1))
    js = np.arange(-J, J + 1)
    Ym, Yp = exact_shift(-1, J), exact_shift(1, J)
    expected = np.diag(b(js - 1)) @ Ym + Yp @ np.diag(c(js - 1)) @ Ym
    got = gamma_word(A["A1"], 1.0, 1, J).operator.matrix
    assert np.abs(got - expected).max() < 1e-14
    ident = gamma_word(identity_word(), 0.37, -1, J).operator.matrix
    assert np.array_equal(ident, np.eye(2 * J + 1))


def test_gamma_of_a2_a4_at_plus_one():
    A = quotient_unitaries()
    for name in ("A2", "A4"):
        g = gamma_word(A[name], 1.0, 1, J)
        assert np.abs(g.operator.matrix - np.eye(2 * J + 1)).max() < 1e-14
        assert trace_index(g).exact == 0


def test_periodic_operator_matches_sampled_form():
    f = fourier_series({1: 0.5, -2: 1j})
    exact = periodic_operator(f, J)
    sampled = periodic_operator(builtin("exp_i_theta") * 0.5 + fourier_series({-2: 1j}), J)
    assert np.abs(exact - sampled).max() < 1e-12


def test_norm_diagnostic_examples():
    g = builtin("gauss")
    phis = (0.0, 0.3, 0.75)
    assert gamma_norm_diagnostic(mult_op(g) * fourier_op(builtin("b_std")), phis, J) < 1e-8
    assert gamma_norm_diagnostic(identity_word(), phis, J) == pytest.approx(1)
    assert gamma_norm_diagnostic(modulation(3), phis, J) == pytest.approx(1)


def test_trace_index_identity():
    t = trace_index(seq_identity(J), 1)
    assert t.value == 0 and t.exact == 0
    assert trace_index(seq_identity(J), 2).exact == 0
    with pytest.raises(NotTraceReadyError):
        trace_index(seq_identity(J), 3)


def test_trace_index_a1_exact():
    A = quotient_unitaries()
    lit = trace_index(gamma_word(A["A1"], 1.0, 1, J))
    assert (lit.exact_kernel, lit.exact_cokernel, lit.exact) == (Fraction(1, 2), Fraction(3, 2), -1)
    rev = trace_index(gamma_word(A["A1"], 1.0, 1, J, "reversed"))
    assert (rev.exact_kernel, rev.exact_cokernel, rev.exact) == (Fraction(1, 2), Fraction(-1, 2), 1)
    assert rev.certified


def test_reversed_deviation_matrices():
    A = quotient_unitaries()
    a = gamma_word(A["A1"], 1.0, 1, J, "reversed").operator.matrix
    d1 = np.eye(2 * J + 1) - a.conj().T @ a
    d2 = np.eye(2 * J + 1) - a @ a.conj().T
    r = J - 4
    # only the interior: the cyclic truncation leaves artifacts at the lattice ends
    nz1 = {tuple(int(v) for v in ij) for ij in np.argwhere(np.abs(_interior(d1, r)) > 1e-14) - r}
    nz2 = {tuple(int(v) for v in ij) for ij in np.argwhere(np.abs(_interior(d2, r)) > 1e-14) - r}
    # a tridiagonal cross around site 2 with diagonal 1/2, and a constant 2x2 block
    assert nz1 == {(1, 2), (2, 1), (2, 2), (2, 3), (3, 2)}
    assert d1[J + 2, J + 2] == 0.5
    assert all(d1[J + i, J + k] == -0.5 for i, k in nz1 - {(2, 2)})
    assert nz2 == {(1, 1), (1, 2), (2, 1), (2, 2)}
    assert np.all(d2[J + 1:J + 3, J + 1:J + 3] == -0.25)


def test_trace_index_shift_fixture():
    S = forward_shift_with_tail(J)
    t = trace_index(S)
    idx, gap = seq_eps_index(S)
    assert t.exact == -1 == idx and gap.reliable


def test_trace_index_guard():
    rng = np.random.default_rng(0)
    with pytest.raises(NotTraceReadyError):
        trace_index(SeqOperator(rng.normal(size=(2 * J + 1, 2 * J + 1)), J))
    # a deviation spread over the whole lattice is not confined to the block
    with pytest.raises(NotTraceReadyError):
        trace_index(seq_diag(np.full(2 * J + 1, 0.5), J))


def test_trace_index_float_path():
    # entries that are not dyadic: no certificate, float value still integral
    S = forward_shift_with_tail(J).matrix.astype(complex)
    U = np.eye(2 * J + 1, dtype=complex)
    U[J + 1, J + 1] = np.exp(0.3j)
    t = trace_index(SeqOperator(U @ S, J))
    assert t.exact is None and t.value == pytest.approx(-1, abs=1e-12)


def test_cyclic_bandwidth():
    assert cyclic_bandwidth(exact_shift(1, J)) == 1
    assert cyclic_bandwidth(np.zeros((5, 5))) == 0
    assert cyclic_bandwidth(rank_one_projection(J).matrix) == 0


def test_delta1_table_both_conventions():
    lit = delta1_table(J)
    assert lit.rows == tuple((-x, -y) for x, y in EXPECTED_DELTA1) and lit.global_sign == -1
    rev = delta1_table(J, "reversed")
    assert rev.rows == EXPECTED_DELTA1 and rev.global_sign == 1
    assert rev.traces["A1+"].exact_cokernel == Fraction(-1, 2)


def test_delta1_table_detects_wrong_words():
    A = dict(quotient_unitaries())
    A["A2"] = A["A1"]
    with pytest.raises(CorroborationError):
        delta1_table(J, words=A)


def test_delta0_examples():
    b, c = standard_bc()
    r = delta0_exponential(b)
    assert r.klass == (1, 1) and r.winding == -1 and r.rescaled
    assert r.max_leak < 1e-10 and len(r.loop) == 512
    assert delta0_exponential(c).klass == (-1, -1)
    z = delta0_exponential(builtin("zero"))
    assert z.klass == (0, 0) and np.all(z.loop.samples == 1)


def test_delta0_leak_detected():
    with pytest.raises((SupportLeakError, ValueError)):
        delta0_exponential(builtin("s"))


def test_index_element_examples():
    I = seq_identity(J)
    e = index_element(I, I)
    n = 2 * J + 1
    assert np.array_equal(e.w1, np.block([[np.eye(n), np.zeros((n, n))], [np.zeros((n, n)), np.zeros((n, n))]]))
    assert e.trace_difference == 0 and e.exact == 0
    a = gamma_word(quotient_unitaries()["A1"], 1.0, 1, J).operator
    e = index_element(a, a.adjoint())
    assert e.exact == trace_index(a).exact == -1
    S = forward_shift_with_tail(J)
    assert index_element(S, S.adjoint()).exact == seq_eps_index(S)[0]


def test_w_transform_bump():
    Jw, P = 8, 16
    x = w_grid(Jw, P)
    u = np.zeros(x.size, dtype=complex)
    u[np.argmin(np.abs(x))] = np.sqrt(P)
    Wu = w_transform(u, Jw, P)
    assert np.sum(np.abs(Wu) ** 2) / P == pytest.approx(1)
    # the mass sits at phi = 0, site 0
    assert abs(Wu[0, Jw]) == pytest.approx(np.sqrt(P))


def test_w_transform_norm_and_support_check(rng):
    Jw, P = 8, 16
    x = w_grid(Jw, P)
    u = np.where(np.abs(x) < 5, rng.normal(size=x.size) + 1j * rng.normal(size=x.size), 0)
    Wu = w_transform(u, Jw, P)
    assert np.sum(np.abs(Wu) ** 2) == pytest.approx(np.sum(np.abs(u) ** 2), rel=1e-12)
    W = w_matrix(Jw, P)
    assert np.abs(W @ W.conj().T - np.eye(W.shape[0])).max() < 1e-8
    with pytest.raises(ValueError):
        w_transform(np.ones(x.size), Jw, P)


def test_w_conjugation_residual():
    one = builtin("one")
    s = w_conjugation_residual(one, builtin("gauss"), 0, 8, 32)
    assert s[0] < 1e-10
    s = w_conjugation_residual(builtin("b_smooth"), builtin("gauss").dilate(0.5), 1, 8, 32)
    assert s[12] < 1e-3
