import numpy as np
import pytest

from opindex.discretize import (DiscreteOperator, GridSpec, assemble, compactness_profile,
                                fourier_multiplier_op, fredholm_index_estimate, identity_op,
                                modulation_op, multiplication_op, operator_summary, read_operator,
                                resolution_issues, translation_op, word_index, write_operator)
from opindex.errors import GridIncommensurableError
from opindex.report import b_exp_word, t_prime_word
from opindex.symbols import builtin, constant, fourier_op, identity_word, mult_op, standard_bc

G = GridSpec(256, 16.0)


def test_grid_parse_and_validation():
    g = GridSpec.parse("n=1024,L=50.27")
    assert (g.n, g.half_width) == (1024, 50.27)
    assert g.spacing == pytest.approx(2 * 50.27 / 1024)
    for n in (63, 100, 32):
        with pytest.raises(ValueError):
            GridSpec(n, 1.0)
    with pytest.raises(ValueError):
        GridSpec(128, 0.0)


def test_fourier_matrix_is_unitary():
    F = GridSpec(64, 5.0).fourier_matrix()
    assert np.max(np.abs(F @ F.conj().T - np.eye(64))) < 1e-12


def test_multiplication_examples():
    assert np.array_equal(multiplication_op(constant(1), G).matrix, np.eye(G.n))
    d = np.diag(multiplication_op(builtin("s"), G).matrix).real
    x = G.x
    # the grid has -L but not +L, so pair x_k with -x_k away from the endpoint
    assert np.allclose(d[1:], -d[1:][::-1], atol=1e-15)
    b = np.diag(multiplication_op(builtin("b_std"), G).matrix).real
    assert np.all((b >= 0) & (b <= 1))
    assert np.all(b[x >= 1] == 1)


def test_fourier_multiplier_examples():
    assert np.max(np.abs(fourier_multiplier_op(constant(1), G).matrix - np.eye(G.n))) < 1e-13
    b = builtin("b_std")
    B = fourier_multiplier_op(b, G).matrix
    assert np.max(np.abs(B - B.conj().T)) < 1e-10
    # B^2 - B is carried by the frequencies where 0 < b < 1
    F = G.fourier_matrix()
    R = F @ (B @ B - B) @ F.conj().T
    outside = np.abs(G.xi) >= 1
    mass = np.abs(R) ** 2
    assert mass[outside].sum() + mass[:, outside].sum() < 1e-20 * mass.sum()
    assert np.linalg.norm(B @ B - B, 2) == pytest.approx(0.25, abs=1e-12)


def test_modulation_and_translation():
    assert np.array_equal(modulation_op(0, G).matrix, np.eye(G.n))
    assert np.array_equal(translation_op(0, G).matrix, np.eye(G.n))
    with pytest.raises(GridIncommensurableError):
        translation_op(0.3, G)


def test_translation_of_gaussian():
    g = GridSpec(1024, 16.0)
    u = np.exp(-g.x ** 2)
    v = translation_op(1, g).matrix @ u
    interior = np.abs(g.x) < 12
    assert np.max(np.abs(v - np.exp(-(g.x + 1) ** 2))[interior]) < 1e-6


def test_conjugated_modulation_is_translation():
    # b(D) with b(xi) = e^{i j xi} translates by j
    g = GridSpec(1024, 16.0)
    for j in (1, -2):
        e = fourier_multiplier_op(lambda xi, j=j: np.exp(1j * j * xi), g).matrix
        u = np.exp(-(g.x - 0.3) ** 2)
        assert np.max(np.abs(e @ u - translation_op(j, g).matrix @ u)) < 1e-8


def test_assemble_orders_factors():
    a, b = builtin("gauss"), builtin("b_std")
    A = assemble(mult_op(a) * fourier_op(b), G).matrix
    expected = multiplication_op(a, G).matrix @ fourier_multiplier_op(b, G).matrix
    assert np.max(np.abs(A - expected)) < 1e-14
    assert np.max(np.abs(assemble(identity_word(), G).matrix - np.eye(G.n))) == 0


def test_compactness_examples():
    prof = compactness_profile(identity_op(G))
    assert np.allclose(prof.singular_values, 1)
    v = np.ones(8) / np.sqrt(8)
    prof = compactness_profile(np.outer(v, v))
    assert set(prof.effective_rank.values()) == {1}
    g = GridSpec(512, 16.0)
    s = assemble(mult_op(builtin("gauss")) * fourier_op(builtin("gauss")), g).singular_values
    assert np.all(s[20:] < 0.01 * s[0])
    a, b = builtin("gauss"), builtin("gauss").dilate(0.5)
    comm = assemble(mult_op(a) * fourier_op(b) - fourier_op(b) * mult_op(a), g)
    s = comm.singular_values
    assert s[0] > 1e-2
    assert np.all(s[20:] < 1e-6 * s[0])


def test_identity_index():
    idx, gap = fredholm_index_estimate(identity_op(G), 1e-6)
    assert idx == 0 and gap.reliable


def test_t_prime_index():
    res = word_index(t_prime_word(16 * np.pi), GridSpec(1024, 16 * np.pi), 1e-6)
    assert res.index == 1
    assert res.reliable


def test_b_exp_index():
    res = word_index(b_exp_word(), GridSpec(1024, 16 * np.pi), 1e-6)
    assert res.index == -1
    assert res.reliable


def test_coarse_grid_is_flagged():
    res = word_index(t_prime_word(16 * np.pi), GridSpec(64, 16 * np.pi), 1e-6)
    assert not res.reliable
    assert resolution_issues(t_prime_word(16 * np.pi), GridSpec(64, 16 * np.pi))


def test_operator_file_roundtrip(tmp_path):
    b, c = standard_bc()
    A = assemble(mult_op(builtin("gauss")) * fourier_op(b) + fourier_op(c), GridSpec(64, 8.0))
    path = tmp_path / "op.bin"
    write_operator(A, path)
    B = read_operator(path)
    assert np.array_equal(A.matrix, B.matrix)
    assert (B.grid.n, B.grid.half_width, B.provenance) == (64, 8.0, A.provenance)
    summ = operator_summary(B, 1e-6, top=5)
    assert len(summ["singular_values_top"]) == 5
    assert summ["norm"] == pytest.approx(np.linalg.norm(A.matrix, 2))


def test_read_operator_rejects_garbage(tmp_path):
    path = tmp_path / "x.bin"
    path.write_bytes(b"nope" * 10)
    with pytest.raises(ValueError):
        read_operator(path)


def test_operator_shape_check():
    with pytest.raises(ValueError):
        DiscreteOperator(np.eye(3), G)
