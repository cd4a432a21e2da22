import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqec.codes import bitflip_code, toy_code
from cqec.control import ExponentialFilter, Switchboard, conditioning, filter_norm, filter_update
from cqec.errors import ConfigError, ContractViolation

KAPPA, R, T, DT = 150.0, 20.0, 0.15, 1e-4


def brute_force(history, r, dt, m, norm):
    """Direct evaluation of the windowed exponential sum over the newest m increments."""
    recent = history[::-1][:m]
    return sum(np.exp(-r * j * dt) * q for j, q in enumerate(recent)) / norm


def test_norm_fig2():
    assert filter_norm(KAPPA, R, T) == pytest.approx(14.2532, abs=5e-5)
    assert filter_norm(KAPPA, R, T) == pytest.approx(15 * (1 - np.exp(-3)), rel=1e-15)


def test_window_size():
    f = ExponentialFilter(R, T, DT, KAPPA)
    assert f.size == 1500
    assert f.warm


@pytest.mark.parametrize("sign", [1, -1])
def test_constant_record_centres_on_unit(sign):
    f = ExponentialFilter(R, T, DT, KAPPA)
    for _ in range(f.size):
        out = f.update(sign * 2 * KAPPA * DT)
    assert not f.warm
    # left Riemann sum of the convolution: relative error about r*dt/2
    assert out == pytest.approx(sign, abs=R * DT)


@pytest.mark.parametrize("r, dt", [(20.0, 1e-4), (1.0, 2e-3), (10.0, 1e-4)])
def test_steady_state_gain(r, dt):
    f = ExponentialFilter(r, T, dt, KAPPA)
    c = 0.37 * 2 * KAPPA * dt
    for _ in range(3 * f.size):
        out = f.update(c)
    assert r * dt <= 2e-3
    assert out == pytest.approx(c / (2 * KAPPA * dt), rel=0.02)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 60), st.integers(1, 200))
def test_recursive_matches_brute_force(seed, m, n):
    rng = np.random.default_rng(seed)
    dt, r = 1e-3, 7.0
    f = ExponentialFilter(r, m * dt, dt, 2.0)
    history = []
    for q in rng.normal(size=n):
        history.append(q)
        out = filter_update(f, q)
        expect = brute_force(history, r, dt, m, f.norm)
        assert out == pytest.approx(expect, rel=1e-9, abs=1e-12)
    assert f.warm == (n < m)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(2, 300))
    fx, fy, fz = (ExponentialFilter(5.0, 0.05, 1e-3, 1.0) for _ in range(3))
    for u, v in zip(x, y):
        rx, ry, rz = fx.update(u), fy.update(v), fz.update(a * u + b * v)
        assert rz == pytest.approx(a * rx + b * ry, abs=1e-12 * (1 + abs(a) + abs(b)) * 50)


def test_batched_filter_matches_scalar():
    rng = np.random.default_rng(0)
    data = rng.normal(size=(400, 3, 2))
    batch = ExponentialFilter(5.0, 0.1, 1e-3, 1.0, shape=(3, 2))
    single = ExponentialFilter(5.0, 0.1, 1e-3, 1.0)
    for step in data:
        out = batch.update(step)
        assert out[1, 0] == single.update(step[1, 0])


def test_zero_rate_is_box_window():
    f = ExponentialFilter(0.0, 0.01, 1e-3, 3.0)
    for _ in range(25):
        out = f.update(2 * 3.0 * 1e-3)
    assert out == pytest.approx(1.0, rel=1e-12)


def test_partial_output():
    f = ExponentialFilter(R, T, DT, KAPPA)
    assert f.partial_output == 0
    for _ in range(100):
        f.update(-2 * KAPPA * DT)
    assert f.warm
    assert f.partial_output == pytest.approx(-1, abs=R * DT)


def test_filter_validation():
    with pytest.raises(ConfigError):
        ExponentialFilter(-1, T, DT, KAPPA)
    with pytest.raises(ConfigError):
        ExponentialFilter(R, 0, DT, KAPPA)


def test_conditioning_examples():
    code = bitflip_code()
    np.testing.assert_array_equal(conditioning(code, [-0.8, 0.9]).G, [-0.8, 0, 0])
    np.testing.assert_array_equal(conditioning(code, [-0.6, -0.7]).G, [0, -0.6, 0])
    np.testing.assert_array_equal(conditioning(code, [0.6, -0.7]).G, [0, 0, -0.7])
    np.testing.assert_array_equal(conditioning(toy_code(), [0.4]).G, [0])
    np.testing.assert_array_equal(conditioning(toy_code(), [-0.4]).G, [-0.4])


def test_sign_of_zero_is_plus():
    code = bitflip_code()
    assert not conditioning(code, [0.0, 0.0]).active.any()
    np.testing.assert_array_equal(conditioning(code, [0.0, -0.5]).G, [0, 0, -0.5])


def test_warm_up_silences_feedback():
    s = conditioning(bitflip_code(), [-0.9, -0.9], warm=True)
    assert not s.G.any() and not s.active.any()


def test_length_mismatch():
    with pytest.raises(ContractViolation):
        conditioning(bitflip_code(), [0.1])


def test_threshold():
    code = bitflip_code()
    assert not conditioning(code, [-0.2, 0.5], threshold=0.3).active.any()
    np.testing.assert_array_equal(conditioning(code, [-0.4, 0.5], threshold=0.3).G, [-0.4, 0, 0])
    # a negative threshold triggers early, before the signal crosses zero
    np.testing.assert_array_equal(conditioning(code, [0.1, 0.5], threshold=-0.2).G, [0.1, 0, 0])
    with pytest.raises(ConfigError):
        Switchboard(code, 1.0)


@given(st.lists(st.floats(-1.5, 1.5), min_size=2, max_size=2))
def test_switching_matches_table(R):
    code = bitflip_code()
    s = conditioning(code, R)
    signs = tuple(-1 if x < 0 else 1 for x in R)
    entries = code.switch_table[signs]
    assert s.active.sum() == len(entries) <= 1
    for sw in entries:
        assert s.G[sw.channel] == R[sw.driver] < 0
    assert np.all(s.G[~s.active] == 0)
    again = conditioning(code, R)
    assert np.array_equal(again.G, s.G)


def test_vectorized_switchboard_matches_rowwise():
    code = bitflip_code()
    board = Switchboard(code)
    grid = np.array(list(itertools.product([-0.7, 0.0, 0.4], repeat=2)))
    batch = board(grid)
    for i, row in enumerate(grid):
        assert np.array_equal(batch.G[i], board(row).G)


def test_unmeasured_filter_is_silent():
    f = ExponentialFilter(R, T, DT, 0.0)
    for q in (0.1, -0.3, 0.2):
        assert f.update(q) == 0
    assert f.partial_output == 0
