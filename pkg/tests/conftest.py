import numpy as np
import pytest
from hypothesis import strategies as st

from smoothrenyi.prob import FiniteDist, JointDist, Kernel


def rand_masses(rng, shape, zero_prob=0.3, integer=False):
    """Random pmf with some exact zeros; integer weights produce exact ties."""
    while True:
        w = rng.integers(0, 6, size=shape).astype(float) if integer else rng.random(shape)
        w = w * (rng.random(shape) >= zero_prob)
        if w.sum() > 0:
            return w / w.sum()


def rand_dist(rng, n, **kw) -> FiniteDist:
    return FiniteDist(rand_masses(rng, (n,), **kw))


def rand_joint(rng, r, c, **kw) -> JointDist:
    return JointDist(rand_masses(rng, (r, c), **kw))


def rand_kernel(rng, r, c, zero_prob=0.3) -> Kernel:
    return Kernel.from_matrix(np.array([rand_masses(rng, (c,), zero_prob) for _ in range(r)]))


def full_support_pair(rng, n):
    """P with zeros allowed, Q strictly positive."""
    return rand_masses(rng, (n,)), rand_masses(rng, (n,), zero_prob=0.0) * 0.9 + 0.1 / n


@st.composite
def weights(draw, min_size=1, max_size=8):
    n = draw(st.integers(min_size, max_size))
    w = draw(st.lists(st.integers(0, 9), min_size=n, max_size=n).filter(lambda v: sum(v) > 0))
    return np.array(w, dtype=float) / sum(w)


@st.composite
def joint_weights(draw, max_rows=4, max_cols=4):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    w = draw(st.lists(st.integers(0, 9), min_size=r * c, max_size=r * c).filter(lambda v: sum(v) > 0))
    return np.array(w, dtype=float).reshape(r, c) / sum(w)


eps_values = st.sampled_from([0.0, 0.05, 0.1, 0.2, 0.25, 0.5, 0.9])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def correlated_bits():
    return JointDist(np.array([[0.45, 0.05], [0.05, 0.45]]))


@pytest.fixture
def perfect_bits():
    return JointDist(np.array([[0.5, 0.0], [0.0, 0.5]]))
