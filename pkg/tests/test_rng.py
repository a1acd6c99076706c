import numpy as np
import pytest

from dirwalk.rng import RngStream, philox4x64, to_unit, uniforms_at


def test_philox_matches_numpy_reference():
    # numpy's bit generator increments its counter before each block
    key = (np.uint64(0x1234), np.uint64(99))
    ref = np.random.Philox(key=[int(key[0]), int(key[1])], counter=[0, 0, 0, 0]).random_raw(12)
    ours = []
    for c in range(1, 4):
        words = philox4x64(np.uint64(c), np.uint64(0), np.uint64(0), np.uint64(0), *key)
        ours.extend(int(w) for w in words)
    assert ours == [int(x) for x in ref]


def test_to_unit_open_interval():
    bits = np.array([0, 2**64 - 1], dtype=np.uint64)
    u = to_unit(bits)
    assert u[0] == 2.0**-53
    assert u[1] == 1.0 - 2.0**-53


def test_streams_are_reproducible():
    a, b = RngStream(7, 3), RngStream(7, 3)
    np.testing.assert_array_equal(a.uniforms(1000), b.uniforms(1000))
    np.testing.assert_array_equal(a.uniform_block(4, 5), b.uniform_block(4, 5))


def test_cursor_is_contiguous():
    a, b = RngStream(1), RngStream(1)
    first = np.concatenate([a.uniforms(3), a.uniforms(6)])
    np.testing.assert_array_equal(first, b.uniforms(9))


def test_random_access_matches_sequential():
    s = RngStream(11, 2)
    seq = s.uniforms(10)
    np.testing.assert_array_equal(uniforms_at(s.key, 0, 0, np.arange(10, dtype=np.uint64)), seq)


def test_distinct_streams_uncorrelated():
    n = 10_000
    for sid in range(1, 6):
        x = RngStream(5, 0).uniforms(n)
        y = RngStream(5, sid).uniforms(n)
        assert abs(np.corrcoef(x, y)[0, 1]) <= 4 / np.sqrt(n)


def test_uniform_moments():
    u = RngStream(123).uniforms(200_000)
    assert abs(u.mean() - 0.5) < 4 * np.sqrt(1 / 12 / u.size)
    assert u.min() > 0 and u.max() < 1


def test_seed_range_checked():
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        RngStream(2**64)


def test_copy_is_independent_cursor():
    a = RngStream(4)
    a.uniforms(5)
    b = a.copy()
    np.testing.assert_array_equal(a.uniforms(3), b.uniforms(3))
