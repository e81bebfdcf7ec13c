import numpy as np
import pytest
from scipy import stats

from brusselator.noise import (
    STREAM_VERSION,
    coarsen,
    dump,
    generate,
    generate_ensemble,
    increments,
    load,
    partial_sum,
    rescale,
    standard_normals,
    uniforms,
)

H = 1e-3


def test_sample_variance_near_h():
    dW = generate(42, H, 10**5).increments
    assert 0.95 * H <= dW.var() <= 1.05 * H
    assert abs(dW.mean()) < 4 * np.sqrt(H / 10**5)


def test_determinism_and_seed_sensitivity():
    a = generate(42, H, 1000).increments
    b = generate(42, H, 1000).increments
    c = generate(43, H, 1000).increments
    assert np.array_equal(a, b)
    assert np.all(a[:10] != c[:10])


def test_frozen_stream_values():
    # pins stream format version 1: Philox-4x64 keyed by (seed, stream), inverse-CDF normals
    assert STREAM_VERSION == 1
    z = standard_normals(0, 0, 4)
    np.testing.assert_array_equal(z, FROZEN_NORMALS)


FROZEN_NORMALS = np.array([float.fromhex(v) for v in (
    "-0x1.22cd198aad6edp+1",
    "-0x1.67147405be6f2p-1",
    "-0x1.380f15f728cdep+0",
    "0x1.4c209a0cbd7d0p-3",
)])


def test_uniforms_inside_open_interval():
    u = uniforms(1, 0, 10**5)
    assert u.min() > 0 and u.max() < 1


def test_chunked_access_matches_full_path():
    path = generate(9, H, 5000, stream=3)
    full = path.increments
    parts = np.concatenate([path.chunk(0, 1), path.chunk(1, 777), path.chunk(777, 5000)])
    assert np.array_equal(full, parts)
    assert np.array_equal(full[1234:1240], increments(9, H, 1234, 6, stream=3))


def test_ensemble_columns_are_streams():
    ens = generate_ensemble(4, H, 300, 5)
    for k in range(5):
        assert np.array_equal(ens[:, k], generate(4, H, 300, stream=k).increments)


def test_rejects_bad_step():
    with pytest.raises(ValueError):
        generate(0, 0.0, 10)
    with pytest.raises(ValueError):
        generate(0, -1e-3, 10)


def test_partial_sums():
    path = generate(1, H, 100)
    dW = path.increments
    assert partial_sum(path, 0) == 0
    assert partial_sum(path, 2) == dW[0] + dW[1]
    assert partial_sum(path, 100) == np.sum(dW)
    with pytest.raises(IndexError):
        partial_sum(path, 101)
    with pytest.raises(IndexError):
        partial_sum(path, -1)


@pytest.mark.parametrize("seed", range(10))
def test_ks_normality(seed):
    dW = generate(seed, H, 10**5).increments
    assert stats.kstest(dW, "norm", args=(0, np.sqrt(H))).pvalue > 0.001


def test_brownian_scaling_of_endpoints():
    n, m = 10**5, 2000
    W = np.array([increments(11, H, 0, n, stream=k).sum() for k in range(m)])
    t = n * H
    assert 0.9 <= W.var() / t <= 1.1


def test_rescale_examples():
    base = generate(3, H, 10**5)
    assert np.array_equal(rescale(base, 1.0).increments, base.increments)
    fast = rescale(base, 0.25)
    assert fast.h == pytest.approx(4 * H)
    v = fast.increments.var()
    assert 0.95 * 4 * H <= v <= 1.05 * 4 * H
    assert np.array_equal(rescale(generate(3, H, 100), 0.25).increments, fast.increments[:100])
    with pytest.raises(ValueError):
        rescale(base, 0.0)


@pytest.mark.parametrize("eps", [0.25, 0.3, 1e-2])
def test_rescaled_partial_sum_identity(eps):
    base = generate(8, H, 1000)
    fast = rescale(base, eps)
    for n in (0, 1, 17, 1000):
        assert partial_sum(fast, n) == eps**-0.5 * partial_sum(base, n)


def test_rescale_variance_matches_own_step():
    fast = rescale(generate(21, H, 10**5), 0.1)
    assert fast.increments.var() / fast.h == pytest.approx(1.0, abs=0.05)


def test_coarsen():
    dW = np.arange(12.0)
    assert np.array_equal(coarsen(dW, 3), [3, 12, 21, 30])
    two = np.stack([dW, -dW], axis=1)
    assert np.array_equal(coarsen(two, 4), [[6, -6], [22, -22], [38, -38]])


def test_dump_load_round_trip(tmp_path):
    path = generate(2**40 + 7, 5e-4, 1234, stream=9)
    f = tmp_path / "w.bin"
    dump(path, f)
    back = load(f)
    assert (back.seed, back.h, back.length, back.stream) == (path.seed, path.h, path.length, path.stream)
    assert np.array_equal(back.increments, path.increments)
    raw = f.read_bytes()
    assert raw[:4] == b"BRWN"
    assert len(raw) == 40 + 8 * 1234
    assert np.array_equal(np.frombuffer(raw[40:], "<f8"), path.increments)


def test_load_rejects_garbage(tmp_path):
    f = tmp_path / "bad.bin"
    f.write_bytes(b"XXXX" + bytes(40))
    with pytest.raises(ValueError):
        load(f)


def test_steps_for_rejects_short_path():
    path = generate(0, H, 100)
    assert path.steps_for(0.1) == 100
    with pytest.raises(ValueError):
        path.steps_for(0.2)
