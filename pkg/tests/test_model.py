import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brusselator.model import (
    Params,
    Stability,
    classify_equilibrium,
    diffusion,
    drift_deterministic,
    equilibrium,
    hopf_threshold,
    ito_drift,
    jacobian,
    wong_zakai_correction,
)

pos = st.floats(0.05, 10.0)
quad = st.floats(0.0, 10.0)
noise = st.floats(0.0, 2.0)


def test_drift_examples():
    p = Params(1, 2)
    assert np.array_equal(drift_deterministic(p, (0, 0)), [1, 0])
    assert np.array_equal(drift_deterministic(p, (1, 2)), [0, 0])
    assert np.array_equal(drift_deterministic(p, (1, 1)), [-1, 1])


def test_ito_drift_examples():
    assert np.array_equal(ito_drift(Params(1, 2, 0), (1, 2)), [0, 0])
    np.testing.assert_allclose(ito_drift(Params(1, 2, 0.1), (1, 2)), [0.005, -0.005], atol=1e-15)
    # a - 3x + x^2 y + x/2 at (2, 1): 1 - 6 + 4 + 1 = 0; 2x - x^2 y - x/2 = 4 - 4 - 1 = -1
    np.testing.assert_allclose(ito_drift(Params(1, 2, 1), (2, 1)), [0, -1], atol=1e-15)


def test_diffusion_examples():
    np.testing.assert_allclose(diffusion(Params(1, 2, 0.1), (1, 2)), [-0.1, 0.1])
    assert np.array_equal(diffusion(Params(1, 2, 0), (3, 5)), [0, 0])
    np.testing.assert_allclose(diffusion(Params(1, 2, 0.2), (3, 5)), [-0.6, 0.6])


def test_wong_zakai_examples():
    np.testing.assert_allclose(wong_zakai_correction(Params(1, 2, 0.1), (1, 0)), [0.005, -0.005])
    assert np.array_equal(wong_zakai_correction(Params(1, 2, 0), (7, 1)), [0, 0])
    assert np.array_equal(wong_zakai_correction(Params(1, 2, 2), (0.5, 1)), [1, -1])


def test_jacobian_examples():
    assert np.array_equal(jacobian(Params(1, 1), (1, 1)), [[0, 1], [-1, -1]])
    assert np.array_equal(jacobian(Params(1, 3), (0, 4)), [[-4, 0], [3, 0]])
    for a, b in [(1, 1), (0.5, 4), (2, 3)]:
        p = Params(a, b)
        assert np.trace(jacobian(p, equilibrium(p))) == pytest.approx(b - 1 - a * a, abs=1e-14)


def test_equilibrium_and_threshold():
    assert equilibrium(Params(1, 2)) == (1, 2)
    assert equilibrium(Params(2, 2)) == (2, 1)
    assert equilibrium(Params(0.5, 4)) == (0.5, 8)
    assert [hopf_threshold(a) for a in (1, 0, 2)] == [2, 1, 5]


def test_classify_examples():
    assert classify_equilibrium(Params(1, 1)) is Stability.STABLE
    assert classify_equilibrium(Params(1, 2)) is Stability.CRITICAL
    assert classify_equilibrium(Params(1, 4)) is Stability.UNSTABLE


def test_params_validation():
    for bad in [(0, 1, 0), (1, -1, 0), (1, 1, -0.1)]:
        with pytest.raises(ValueError):
            Params(*bad)
    assert Params(2, 3).b_crit == 5
    assert Params(1, 4).epsilon == 0.25


@settings(max_examples=300)
@given(pos, pos, noise, quad, quad)
def test_ito_minus_stratonovich_is_correction(a, b, sigma, x, y):
    p = Params(a, b, sigma)
    base = drift_deterministic(p, (x, y))
    corr = wong_zakai_correction(p, (x, y))
    assert np.array_equal(ito_drift(p, (x, y)), base + corr)
    np.testing.assert_allclose(corr, [sigma**2 * x / 2, -(sigma**2) * x / 2], rtol=1e-15, atol=1e-300)


@given(pos, pos, noise, quad, quad)
def test_sum_coordinate_has_no_noise(a, b, sigma, x, y):
    p = Params(a, b, sigma)
    g = diffusion(p, (x, y))
    assert g[0] + g[1] == 0
    f = ito_drift(p, (x, y))
    scale = abs(a) + (1 + b) * x + x * x * y + sigma**2 * x
    assert f[0] + f[1] == pytest.approx(a - x, abs=1e-14 * scale)


@settings(max_examples=200)
@given(pos, pos, st.floats(0.1, 5.0), st.floats(0.1, 5.0))
def test_jacobian_matches_finite_differences(a, b, x, y):
    p = Params(a, b)
    J = jacobian(p, (x, y))
    d = 1e-6
    fd = np.column_stack([
        (drift_deterministic(p, (x + d, y)) - drift_deterministic(p, (x - d, y))) / (2 * d),
        (drift_deterministic(p, (x, y + d)) - drift_deterministic(p, (x, y - d))) / (2 * d),
    ])
    scale = np.abs(J).max() + 1.0
    assert np.abs(fd - J).max() <= 1e-6 * scale


@given(pos, pos)
def test_equilibrium_is_root(a, b):
    p = Params(a, b)
    f = drift_deterministic(p, equilibrium(p))
    assert np.abs(f).max() <= 1e-13 * (1 + b + a * a)


def test_classification_agrees_with_eigenvalues():
    rng = np.random.default_rng(5)
    checked = 0
    while checked < 1000:
        a, b = rng.uniform(0.1, 3.0, 2)
        if abs(b - hopf_threshold(a)) < 1e-3:
            continue
        p = Params(a, b)
        growth = np.linalg.eigvals(jacobian(p, equilibrium(p))).real.max()
        expected = Stability.STABLE if growth < 0 else Stability.UNSTABLE
        assert classify_equilibrium(p) is expected
        checked += 1


def test_vectorized_evaluation():
    p = Params(1, 3, 0.2)
    xs, ys = np.array([0.5, 1.0, 2.0]), np.array([1.0, 3.0, 0.5])
    stacked = ito_drift(p, (xs, ys))
    for k in range(3):
        assert np.array_equal(stacked[:, k], ito_drift(p, (xs[k], ys[k])))
