import numpy as np
import pytest

from bosonbench.rng import RngStream, as_stream


def test_same_seed_and_stream_reproduce():
    a = RngStream(7, 3).normal(size=100)
    b = RngStream(7, 3).normal(size=100)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("other", [(7, 4), (8, 3)])
def test_different_keys_differ(other):
    a = RngStream(7, 3).random(50)
    b = RngStream(*other).random(50)
    assert not np.allclose(a, b)


def test_spawn_is_independent_of_parent_consumption():
    parent = RngStream(1)
    before = parent.spawn(5).random(10)
    parent.random(1000)
    after = parent.spawn(5).random(10)
    np.testing.assert_array_equal(before, after)


def test_spawned_children_are_distinct():
    kids = RngStream(1).spawn_many(4)
    draws = [k.random(8) for k in kids]
    for i in range(4):
        for j in range(i + 1, 4):
            assert not np.allclose(draws[i], draws[j])


def test_spawned_streams_look_uncorrelated():
    a = RngStream(2).spawn(0).normal(size=200_000)
    b = RngStream(2).spawn(1).normal(size=200_000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 3 / np.sqrt(200_000) * 2


def test_as_stream():
    s = RngStream(3)
    assert as_stream(s) is s
    assert as_stream(3).key == s.key
    assert as_stream(None).key == RngStream(0).key


def test_negative_seed_rejected():
    with pytest.raises(ValueError):
        RngStream(-1)
