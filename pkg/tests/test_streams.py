import numpy as np
from hypothesis import given, settings, strategies as st

from netbandit import streams


def mix_reference(z: int) -> int:
    mask = (1 << 64) - 1
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return z ^ (z >> 31)


@given(st.integers(0, 2**64 - 1))
@settings(max_examples=200, deadline=None)
def test_mix_matches_integer_reference(z):
    assert int(streams.mix64(np.uint64(z))) == mix_reference(z)


@given(st.integers(0, 2**31), st.integers(0, 4000), st.integers(1, 10**9))
@settings(max_examples=100, deadline=None)
def test_pure_function_of_arguments(seed, stream, t):
    key = streams.seed_key(seed)
    a = streams.uniforms(key, stream, t)
    b = streams.uniforms(key, stream, t)
    assert a == b and 0.0 <= a < 1.0


def test_broadcast_matches_scalar_calls():
    keys = streams.seed_key(np.arange(5))
    grid = streams.uniforms(keys[:, None], np.uint64(8), np.arange(1, 11, dtype=np.uint64)[None, :])
    for r in range(5):
        for t in range(1, 11):
            assert grid[r, t - 1] == streams.uniforms(keys[r], 8, t)


def test_roughly_uniform_and_decorrelated():
    u = streams.uniforms(streams.seed_key(3), np.uint64(4), np.arange(1, 200_001, dtype=np.uint64))
    assert abs(u.mean() - 0.5) < 0.005
    hist, _ = np.histogram(u, bins=10, range=(0, 1))
    assert np.all(np.abs(hist / u.size - 0.1) < 0.005)
    assert abs(np.corrcoef(u[:-1], u[1:])[0, 1]) < 0.01
    v = streams.uniforms(streams.seed_key(4), np.uint64(4), np.arange(1, 200_001, dtype=np.uint64))
    assert abs(np.corrcoef(u, v)[0, 1]) < 0.01


def test_counter_rng_channels_differ():
    rng = streams.CounterRNG(5)
    assert rng.outcome(7, [0, 1]).tolist() != rng.delivery(7, [0, 1]).tolist()
    assert rng.outcome(7, [2])[0] == streams.CounterRNG(5).outcome(7, [2])[0]
