import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from mcsbr import rng


@given(st.integers(0, 2**63), st.integers(0, 2**40), st.integers(0, 60), st.integers(0, 3))
def test_draws_are_pure_functions_of_the_key(seed, ray, bounce, purpose):
    a = rng.uniform(seed, ray, bounce, purpose)
    b = rng.uniform(seed, [ray, ray + 1], bounce, purpose)[:1]
    assert a[0] == b[0]
    assert 0.0 <= a[0] < 1.0


def test_uniformity_and_independence_of_purposes():
    ids = np.arange(200_000, dtype=np.uint64)
    u = rng.uniform(7, ids, 3, rng.BRANCH)
    v = rng.uniform(7, ids, 3, rng.ROULETTE)
    counts, _ = np.histogram(u, bins=20, range=(0, 1))
    expected = len(u) / 20
    chi2 = np.sum((counts - expected) ** 2 / expected)
    assert chi2 < 45  # 19 dof, p ~ 1e-3
    assert abs(np.corrcoef(u, v)[0, 1]) < 0.01
    assert abs(np.corrcoef(u[:-1], u[1:])[0, 1]) < 0.01


def test_seeds_give_different_streams():
    ids = np.arange(1000)
    assert not np.array_equal(rng.uniform(0, ids, 0, 0), rng.uniform(1, ids, 0, 0))
