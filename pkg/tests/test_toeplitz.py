import numpy as np
import pytest

from opindex.discretize import localized_index
from opindex.errors import NotFredholmError
from opindex.toeplitz import (CircleSymbol, cayley_grid, cayley_transform, circle_norm_sq,
                              circle_winding, hankel_block, hardy_projection, inverse_cayley,
                              line_norm_sq, root_proximity, toeplitz_index, toeplitz_truncation,
                              trig_interpolate)


def _e(k, K=6):
    v = np.zeros(2 * K + 1, dtype=complex)
    v[K + k] = 1
    return v


def test_hardy_projection_examples():
    assert np.array_equal(hardy_projection(_e(5)), _e(5))
    assert np.array_equal(hardy_projection(_e(-3)), np.zeros(13))
    v = _e(-1) + 2 * _e(0) + 3 * _e(2)
    assert np.array_equal(hardy_projection(v), 2 * _e(0) + 3 * _e(2))
    with pytest.raises(ValueError):
        hardy_projection(np.zeros(4))


def test_toeplitz_index_examples():
    assert toeplitz_index(CircleSymbol.monomial(0)).index == 0
    assert toeplitz_index(CircleSymbol.monomial(1)).index == -1
    zbar2 = CircleSymbol.monomial(2).conj()
    res = toeplitz_index(zbar2)
    assert res.index == 2 and res.corroborated and res.truncation_index == 2


def test_zbar_squared_kernel_by_rank():
    # T_{z^-2} on the m-truncation: two null right vectors at the head, two null left ones at the tail
    m = 256
    mat = toeplitz_truncation(CircleSymbol.monomial(-2), m).matrix
    U, s, Vh = np.linalg.svd(mat)
    small = np.flatnonzero(s < 1e-8)
    assert len(small) == 2
    heads = {int(np.argmax(np.abs(Vh[i]))) for i in small}
    assert heads == {0, 1}


def test_truncation_entries():
    phi = CircleSymbol({1: 2.0, -1: 3.0, 0: 1.0})
    mat = toeplitz_truncation(phi, 4).matrix
    assert mat[1, 0] == 2 and mat[0, 1] == 3 and mat[2, 2] == 1
    assert not mat.flags.writeable


def test_not_fredholm():
    with pytest.raises(NotFredholmError):
        toeplitz_index(CircleSymbol({0: 1.0, 1: 1.0}))


def test_near_circle_roots_are_not_corroborated():
    # root at modulus 0.995: kernel vector decays too slowly for m = 64
    phi = CircleSymbol({0: -0.995, 1: 1.0})
    res = toeplitz_index(phi, 64)
    assert root_proximity(phi) == pytest.approx(0.995)
    assert res.index == -1
    assert not res.corroborated


def test_circle_winding_refines():
    phi = CircleSymbol({12: 1.0, 0: 0.1})
    assert circle_winding(phi, 8) == 12


def test_symbol_algebra():
    p = CircleSymbol({1: 1.0, 0: 2.0})
    q = CircleSymbol({-1: 1j})
    t = np.linspace(0, 6, 11)
    assert np.allclose((p * q)(t), p(t) * q(t))
    assert np.allclose((p + q)(t), p(t) + q(t))
    assert np.allclose((p - q)(t), p(t) - q(t))
    assert np.allclose(p.conj()(t), np.conj(p(t)))
    assert CircleSymbol.from_json(p.to_json()).fourier == p.fourier
    assert CircleSymbol.from_json({"fourier": {"2": [0, 1]}}).coef(2) == 1j


def test_hankel_examples():
    assert not np.any(hankel_block(CircleSymbol.monomial(0), 8))
    for n in (1, 3, 5):
        H = hankel_block(CircleSymbol.monomial(-n), 12)
        assert np.linalg.matrix_rank(H, tol=1e-10) == n
        # the range sits in frequencies -1..-n and the support in columns 0..n-1
        assert not np.any(H[n:]) and not np.any(H[:, n:])
    rng = np.random.default_rng(3)
    phi = CircleSymbol({k: complex(*rng.normal(size=2)) for k in range(-3, 4)})
    assert np.linalg.matrix_rank(hankel_block(phi, 16), tol=1e-10) <= 3


def test_trig_interpolation_is_exact_on_polynomials():
    theta = 2 * np.pi * np.arange(16) / 16
    f = lambda t: 1 + np.exp(2j * t) - 0.5 * np.exp(-3j * t)
    t = np.linspace(0, 2 * np.pi, 37)
    assert np.max(np.abs(trig_interpolate(f(theta), t) - f(t))) < 1e-13
    real = np.cos(8 * theta)
    assert np.max(np.abs(trig_interpolate(real, t).imag)) < 1e-13


def test_cayley_of_constant():
    t = np.linspace(-50, 50, 201)
    h = cayley_transform(np.ones(32), t)
    assert np.max(np.abs(h - 1 / (np.sqrt(np.pi) * (1 - 1j * t)))) < 1e-8


def test_cayley_norm_preservation():
    n = 64
    theta = 2 * np.pi * np.arange(n) / n
    g = 1 + 2 * np.exp(1j * theta) - 1j * np.exp(-2j * theta)
    t, w = cayley_grid(4096)
    assert line_norm_sq(cayley_transform(g, t), w) == pytest.approx(circle_norm_sq(g), abs=1e-6)
    assert circle_norm_sq(g) == pytest.approx(6.0)


def test_inverse_cayley_roundtrip():
    theta = 2 * np.pi * np.arange(16) / 16
    f = lambda th: np.exp(1j * th) + 0.25
    z = np.exp(1j * np.linspace(-3, 3, 25))
    back = inverse_cayley(lambda t: cayley_transform(f(theta), t), z)
    assert np.max(np.abs(back - f(np.angle(z)))) < 1e-12


def test_cayley_of_z_is_in_upper_hardy_space():
    # the line function has numerically no negative-frequency content
    T, n = 2.0e4, 1 << 19
    t = -T + 2 * T * np.arange(n) / n
    theta = 2 * np.pi * np.arange(8) / 8
    h = cayley_transform(np.exp(1j * theta), t)
    power = np.abs(np.fft.fft(h)) ** 2
    xi = np.fft.fftfreq(n)
    assert power[xi < 0].sum() < 1e-4 * power.sum()


def test_localized_index_on_shift():
    m = 32
    S = np.eye(m, k=-1)
    idx, gap = localized_index(S, 1e-8, lambda v: float(np.sum(np.abs(v[: m // 2]) ** 2)))
    assert idx == -1 and gap.reliable
