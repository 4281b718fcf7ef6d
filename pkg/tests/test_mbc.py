import numpy as np
import pytest
from hypothesis import given, strategies as st

from mbcoffset import mbc

angles = st.floats(-20.0, 20.0, allow_nan=False)
harmonics = st.integers(1, 8).filter(lambda n: n % 3)


@pytest.mark.parametrize("psi, expected", [
    (0.0, [0.0, 2 * np.pi / 3, 4 * np.pi / 3]),
    (np.pi, [np.pi, 5 * np.pi / 3, np.pi / 3]),
    (2 * np.pi, [0.0, 2 * np.pi / 3, 4 * np.pi / 3]),
])
def test_blade_azimuths(psi, expected):
    got = mbc.blade_azimuths(psi)
    assert np.allclose(got, np.mod(expected, 2 * np.pi), atol=1e-12)
    assert all(0.0 <= a < 2 * np.pi for a in got)


def test_blade_azimuths_rejects_zero_blades():
    with pytest.raises(ValueError):
        mbc.blade_azimuths(0.0, 0)


@pytest.mark.parametrize("psi, m, expected", [
    (0.0, [1, 1, 1], (2.0, 0.0, 0.0)),
    (0.0, [1, 0, 0], (2 / 3, 2 / 3, 0.0)),
    (np.pi / 2, [0, 1, 0], (2 / 3, 2 / 3 * np.cos(np.pi / 2 + 2 * np.pi / 3),
                            2 / 3 * np.sin(np.pi / 2 + 2 * np.pi / 3))),
])
def test_forward_examples(psi, m, expected):
    assert np.allclose(mbc.forward_mbc(1, psi, m), expected, atol=1e-14)


@pytest.mark.parametrize("psi_o, u, expected", [
    (0.0, (0, 1, 0), [1, -0.5, -0.5]),
    (0.0, (0, 0, 1), [0, np.sqrt(3) / 2, -np.sqrt(3) / 2]),
    (np.pi / 2, (0, 1, 0), np.cos(np.pi / 2 + np.arange(3) * 2 * np.pi / 3)),
])
def test_reverse_examples(psi_o, u, expected):
    assert np.allclose(mbc.reverse_mbc(1, 0.0, psi_o, u), expected, atol=1e-14)


@pytest.mark.parametrize("bad", [[1, 2], [1, np.nan, 0]])
def test_forward_rejects_bad_input(bad):
    with pytest.raises(ValueError):
        mbc.forward_mbc(1, 0.0, bad)


@pytest.mark.parametrize("n", [0, -1, 1.5])
def test_harmonic_validation(n):
    with pytest.raises(ValueError):
        mbc.forward_matrix(n, 0.0)


def test_verbatim_collective_gain_is_two():
    # the verbatim 2/3 row doubles the collective; the normalized option restores unity
    u = (0.7, 0.0, 0.0)
    theta = mbc.reverse_mbc(1, 0.3, 0.0, u)
    assert mbc.forward_mbc(1, 0.3, theta).collective == pytest.approx(1.4)
    assert mbc.forward_mbc(1, 0.3, theta, normalized_collective=True).collective == pytest.approx(0.7)


@given(angles, harmonics)
def test_normalized_forward_inverts_reverse(psi, n):
    prod = mbc.forward_matrix(n, psi, True) @ mbc.reverse_matrix(n, psi)
    assert np.allclose(prod, np.eye(3), atol=1e-12)


@given(angles, angles, harmonics, st.floats(-2, 2), st.floats(-2, 2))
def test_round_trip_rotates_cyclic(psi, psi_o, n, a, b):
    theta = mbc.reverse_mbc(n, psi, psi_o, (0.0, a, b))
    _, tilt, yaw = mbc.forward_mbc(n, psi, theta)
    assert np.allclose([tilt, yaw], mbc.rotation(n * psi_o) @ [a, b], atol=1e-11)


def test_vectorized_forward_matches_loop():
    psi = np.linspace(0, 7, 11)
    m = np.random.default_rng(0).normal(size=(3, 11))
    vec = np.array(mbc.forward_mbc(2, psi, m))
    loop = np.array([mbc.forward_matrix(2, p) @ m[:, k] for k, p in enumerate(psi)]).T
    assert np.allclose(vec, loop)


@pytest.mark.parametrize("n", [1, 2, 4, 5])
def test_partial_matrices_nilpotent(n):
    low, high = mbc.partial_matrices(n)
    assert np.abs(low @ low.T).max() < 1e-12
    assert np.abs(high @ high.T).max() < 1e-12
    assert np.allclose(high, low.conj())


def test_partial_sum_is_real_trig_block():
    low, high = mbc.partial_matrices(1)
    total = low + high
    ang = 2 * np.pi * np.arange(3) / 3
    assert np.allclose(total.imag, 0.0, atol=1e-15)
    assert np.allclose(total.real, np.vstack([np.cos(ang), np.sin(ang)]), atol=1e-15)


def test_partial_matrices_degenerate_for_n3():
    # all blade phase angles coincide modulo 2 pi, so the cyclic rows collapse
    low, _ = mbc.partial_matrices(3)
    assert np.linalg.matrix_rank(low) == 1
    assert np.abs(low @ low.T).max() > 0.5


@pytest.mark.parametrize("n, psi_o, expected", [
    (1, 0.0, np.eye(2)),
    (1, np.pi / 2, [[0, 1], [-1, 0]]),
    (2, np.pi / 4, mbc.rotation(np.pi / 2)),
])
def test_composite_rotation_examples(n, psi_o, expected):
    for psi in (0.0, 0.4, 2.5):
        assert np.allclose(mbc.composite_rotation(n, psi_o, psi), expected, atol=1e-12)


@given(angles, angles, harmonics)
def test_composite_rotation_property(psi, psi_o, n):
    assert np.allclose(mbc.composite_rotation(n, psi_o, psi), mbc.rotation(n * psi_o), atol=1e-12)


def test_composite_rotation_n3_not_rotation():
    R = mbc.composite_rotation(3, 0.3, 0.2)
    assert not np.allclose(R, mbc.rotation(0.9), atol=1e-3)


@given(st.floats(-1e3, 1e3))
def test_wrap_angle_range(x):
    w = mbc.wrap_angle(x)
    assert 0.0 <= w < 2 * np.pi
    assert np.isclose(np.cos(w), np.cos(x), atol=1e-9)
