import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import joint_weights, rand_joint, weights
from smoothrenyi.errors import AlphabetMismatchError, ParameterError, SupportError, ValidationError
from smoothrenyi.prob import (
    FiniteDist,
    JointDist,
    Kernel,
    SubWeighting,
    dump_dist,
    entropy,
    kl_divergence,
    l1_distance,
    load_dist,
    load_kernel,
    load_table,
    marginals_and_conditional,
    require_eps,
    sample,
    sample_many,
    shannon_quantities,
)
from smoothrenyi.seeding import map_trials, stream


class TestConstruction:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValidationError):
            FiniteDist([0.5, 0.4])

    def test_rejects_negative(self):
        with pytest.raises(ValidationError):
            FiniteDist([1.2, -0.2])

    def test_rejects_nan_and_empty(self):
        with pytest.raises(ValidationError):
            FiniteDist([np.nan, 1.0])
        with pytest.raises(ValidationError):
            FiniteDist([])

    def test_masses_are_read_only(self):
        d = FiniteDist.uniform(3)
        with pytest.raises(ValueError):
            d.masses[0] = 1.0

    def test_joint_needs_matrix(self):
        with pytest.raises(ValidationError):
            JointDist([0.5, 0.5])

    def test_kernel_rows_must_be_stochastic(self):
        with pytest.raises(ValidationError):
            Kernel.from_matrix([[0.5, 0.4], [0.5, 0.5]])

    def test_absent_kernel_rows_are_free(self):
        k = Kernel([[0.0, 0.0], [0.3, 0.7]], [False, True])
        assert k.row(0) is None
        assert k.row(1).masses.tolist() == [0.3, 0.7]

    def test_subweighting_validity(self):
        p = np.array([0.5, 0.5])
        assert SubWeighting([0.5, 0.3], p, 0.2).is_valid()
        assert not SubWeighting([0.5, 0.3], p, 0.1).is_valid()
        assert not SubWeighting([0.6, 0.3], p, 0.5).is_valid()
        with pytest.raises(AlphabetMismatchError):
            SubWeighting([0.5], p, 0.1)

    def test_point_and_uniform(self):
        assert FiniteDist.point(3, 2).masses.tolist() == [0, 0, 1]
        assert np.allclose(FiniteDist.uniform(4).masses, 0.25)


class TestL1:
    def test_identity(self):
        assert l1_distance(FiniteDist.uniform(4), FiniteDist.uniform(4)) == 0

    def test_disjoint(self):
        assert l1_distance(FiniteDist([1, 0]), FiniteDist([0, 1])) == 2

    def test_hand_value(self):
        assert l1_distance(FiniteDist([0.7, 0.3]), FiniteDist([0.5, 0.5])) == pytest.approx(0.4, abs=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(AlphabetMismatchError):
            l1_distance(FiniteDist.uniform(2), FiniteDist.uniform(3))

    @given(weights(3, 3), weights(3, 3), weights(3, 3))
    def test_triangle_and_symmetry(self, a, b, c):
        assert l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c) + 1e-12
        assert l1_distance(a, b) == pytest.approx(l1_distance(b, a))


class TestMarginals:
    def test_product_kernel_rows_equal_q(self):
        p, q = FiniteDist([0.2, 0.8]), FiniteDist([0.1, 0.6, 0.3])
        _, col, k = marginals_and_conditional(JointDist.product(p, q))
        assert np.allclose(k.rows, q.masses[None, :])
        assert np.allclose(col.masses, q.masses)

    def test_zero_row_absent(self):
        _, _, k = marginals_and_conditional(JointDist([[0.0, 0.0], [0.4, 0.6]]))
        assert k.present.tolist() == [False, True]

    @given(joint_weights())
    def test_round_trip(self, m):
        j = JointDist(m)
        row, _, k = marginals_and_conditional(j)
        assert np.abs(JointDist.from_kernel(row, k).masses - m).max() < 1e-12

    def test_transpose_and_flatten(self, correlated_bits):
        assert np.array_equal(correlated_bits.T.masses, correlated_bits.masses.T)
        assert correlated_bits.flatten().alphabet_size == 4


class TestSampling:
    def test_point_mass(self, rng):
        d = FiniteDist.point(4, 2)
        assert set(sample_many(d, rng, 1000).tolist()) == {2}
        assert sample(d, rng) == 2

    def test_uniform_frequency(self):
        x = sample_many(FiniteDist.uniform(2), stream(7), 100_000)
        assert abs(x.mean() - 0.5) < 0.01

    def test_determinism(self):
        d = FiniteDist([0.1, 0.2, 0.7])
        assert np.array_equal(sample_many(d, stream(3, 1), 50), sample_many(d, stream(3, 1), 50))

    def test_never_samples_zero_mass(self):
        d = FiniteDist([0.5, 0.5, 0.0])
        assert sample_many(d, stream(0), 10_000).max() <= 1

    def test_map_trials_thread_invariant(self):
        fn = lambda t, r: (t, float(r.random()))
        assert map_trials(fn, 9, 20, threads=1) == map_trials(fn, 9, 20, threads=4)


class TestShannon:
    def test_independent_fair_bits(self):
        s = shannon_quantities(JointDist(np.full((2, 2), 0.25)))
        assert s.h_xy == pytest.approx(2)
        assert s.i_xy == pytest.approx(0, abs=1e-12)

    def test_perfect_correlation(self, perfect_bits):
        s = shannon_quantities(perfect_bits)
        assert s.h_x_given_y == pytest.approx(0, abs=1e-12)
        assert s.i_xy == pytest.approx(1)

    def test_kl(self):
        v = kl_divergence(FiniteDist([0.5, 0.5]), FiniteDist([0.25, 0.75]))
        assert v == pytest.approx(0.5 * np.log2(2) + 0.5 * np.log2(2 / 3))
        assert v == pytest.approx(0.2075, abs=1e-4)

    def test_kl_support_error(self):
        with pytest.raises(SupportError):
            kl_divergence(FiniteDist([0.5, 0.5]), FiniteDist([1.0, 0.0]))

    @given(joint_weights())
    def test_chain_rule(self, m):
        j = JointDist(m)
        s = shannon_quantities(j)
        assert s.h_xy == pytest.approx(s.h_y + s.h_x_given_y, abs=1e-9)
        assert entropy(j) == pytest.approx(s.h_xy)


class TestFiles:
    def test_round_trip(self, tmp_path, rng):
        j = rand_joint(rng, 3, 2)
        path = tmp_path / "j.json"
        dump_dist(j, path, (["a", "b", "c"], ["x", "y"]))
        back = load_dist(path)
        assert np.allclose(back.dist.masses, j.masses)
        assert back.labels == (["a", "b", "c"], ["x", "y"])

    def test_total_check(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text(json.dumps({"alphabet": ["a", "b"], "masses": [0.5, 0.4]}))
        with pytest.raises(ValidationError, match="renormalize"):
            load_dist(path)
        assert load_dist(path, renormalize=True).dist.masses[0] == pytest.approx(5 / 9)

    def test_tolerance_edge(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text(json.dumps({"alphabet": ["a", "b"], "masses": [0.5, 0.5 + 5e-10]}))
        assert load_dist(path).dist.masses.sum() == pytest.approx(1.0, abs=1e-15)

    def test_bad_json(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text("{nope")
        with pytest.raises(ValidationError):
            load_dist(path)
        path.write_text(json.dumps({"masses": [1.0]}))
        with pytest.raises(ValidationError):
            load_dist(path)

    def test_kernel_and_table(self, tmp_path):
        kp = tmp_path / "k.json"
        kp.write_text(json.dumps({"rows": ["0", "1"], "cols": ["a", "b"], "masses": [[1, 0], [0.5, 0.5]]}))
        assert load_kernel(kp).shape == (2, 2)
        tp = tmp_path / "t.json"
        tp.write_text(json.dumps({"rows": ["0"], "cols": ["a", "b"], "values": [[0, -1]]}))
        with pytest.raises(ValidationError):
            load_table(tp)


@given(st.floats(-2, 2))
@settings(max_examples=50)
def test_require_eps(e):
    if 0 <= e < 1:
        assert require_eps(e) == e
    else:
        with pytest.raises(ParameterError):
            require_eps(e)
    if e == 0:
        with pytest.raises(ParameterError):
            require_eps(e, lo_open=True)
