import math

import numpy as np
import pytest

from conftest import rand_joint
from smoothrenyi.errors import ParameterError, ValidationError
from smoothrenyi.prob import JointDist
from smoothrenyi.rate_distortion import (
    DistortionTable,
    RDCode,
    build_rd_code,
    max_distortion_quantile,
    rd_converse_audit,
    rd_encode_decode,
    rd_exact_excess_prob,
    rd_induced_joint,
    rd_rate_bound,
    rd_sweep,
    rd_zero_rate_check,
)
from smoothrenyi.seeding import stream
from smoothrenyi.smooth import smooth_i_inf

HAMMING = DistortionTable(1 - np.eye(2))
NEAR_INDEP = JointDist([[0.26, 0.24], [0.24, 0.26]])


class TestTable:
    def test_validation(self):
        with pytest.raises(ValidationError):
            DistortionTable([[0, -1]])
        with pytest.raises(ValidationError):
            DistortionTable([[0, np.inf]])
        assert HAMMING.bound == 1

    def test_shape_check(self, correlated_bits):
        with pytest.raises(ParameterError):
            rd_rate_bound(correlated_bits, DistortionTable(np.zeros((3, 2))), 0.3, 0.1)


class TestRateBound:
    def test_negative_information_gives_zero(self):
        rb = rd_rate_bound(NEAR_INDEP, HAMMING, 0.3, 0.1)
        assert rb.i_inf < 0 and rb.ell_a == 0 and rb.zero_rate_branch

    def test_perfect_bits(self, perfect_bits):
        eps, eps1 = 0.3, 1e-6
        i = smooth_i_inf(perfect_bits, eps1).value
        assert i == pytest.approx(1, abs=1e-5)
        assert rd_rate_bound(perfect_bits, HAMMING, eps, eps1).ell_a == math.ceil(i + math.log2(-math.log(eps - 2 * eps1)) - 1e-9)

    def test_monotone_in_eps1(self, rng):
        j = rand_joint(rng, 3, 3)
        dt = DistortionTable(rng.random((3, 3)))
        vals = [rd_rate_bound(j, dt, 0.5, e1).ell_a for e1 in (0.01, 0.05, 0.1, 0.2)]
        # the ln term grows with eps1, so only the information part is monotone
        infos = [rd_rate_bound(j, dt, 0.5, e1).i_inf for e1 in (0.01, 0.05, 0.1, 0.2)]
        assert all(b <= a + 1e-12 for a, b in zip(infos, infos[1:]))
        assert all(v >= 0 for v in vals)

    def test_parameter_error(self, correlated_bits):
        with pytest.raises(ParameterError):
            rd_rate_bound(correlated_bits, HAMMING, 0.2, 0.1)


class TestEncoder:
    def test_zero_distortion_partner(self):
        code = RDCode(np.array([1, 0]))
        assert rd_encode_decode(code, 0, HAMMING) == 0

    def test_tie_smallest_index(self):
        dt = DistortionTable(np.ones((2, 3)))
        assert rd_encode_decode(RDCode(np.array([2, 0, 1, 0])), 1, dt) == 2

    def test_matches_exhaustive_argmin(self, rng):
        for _ in range(50):
            dt = DistortionTable(rng.integers(0, 4, size=(4, 5)).astype(float))
            cb = rng.integers(0, 5, size=8)
            code = RDCode(cb)
            for x in range(4):
                best = min(range(cb.size), key=lambda i: (dt.values[x, cb[i]], i))
                assert rd_encode_decode(code, x, dt) == cb[best]


class TestExcess:
    def test_full_codebook(self, perfect_bits):
        code = RDCode(np.array([0, 1]))
        assert rd_exact_excess_prob(code, perfect_bits, HAMMING, 0.0) == 0

    def test_far_codebook(self):
        j = JointDist([[0.5, 0.0, 0.0], [0.0, 0.5, 0.0]])
        dt = DistortionTable([[0, 1, 5], [1, 0, 5]])
        assert rd_exact_excess_prob(RDCode(np.array([2])), j, dt, 1.0) == 1

    def test_average_at_rate_bound(self, correlated_bits):
        eps, eps1 = 0.3, 0.05
        rows = rd_sweep(correlated_bits, HAMMING, eps, eps1, 200, seed=2)
        mean = np.mean([r["excess_prob"] for r in rows])
        assert mean <= eps
        assert mean <= rows[0]["avg_bound"] + 1e-12


class TestZeroRate:
    def test_near_independent(self):
        v = rd_zero_rate_check(NEAR_INDEP, HAMMING, 0.3, 0.1)
        prod = NEAR_INDEP.marginal_product().masses
        gamma = max_distortion_quantile(NEAR_INDEP, HAMMING.values, 0.1)
        assert v == sum(prod[x, y] for x in range(2) for y in range(2) if HAMMING.values[x, y] > gamma)
        assert v <= 0.3

    def test_boundary_eps1(self):
        eps = 0.3
        for delta in (1e-3, 1e-6):
            assert rd_zero_rate_check(NEAR_INDEP, HAMMING, eps, eps / 2 - delta) <= eps

    def test_zero_distortion(self):
        j = JointDist(np.full((2, 2), 0.25))
        assert rd_zero_rate_check(j, DistortionTable(np.zeros((2, 2))), 0.3, 0.1) == 0

    def test_precondition(self, perfect_bits):
        with pytest.raises(ParameterError):
            rd_zero_rate_check(perfect_bits, HAMMING, 0.3, 0.1)


class TestConverse:
    def test_achievability_codes_pass(self, rng):
        for t in range(30):
            j = rand_joint(rng, 3, 3)
            dt = DistortionTable(rng.random((3, 3)))
            ell = int(rng.integers(0, 3))
            code = build_rd_code(j, ell, stream(t))
            gamma = max_distortion_quantile(j, dt.values, 0.1)
            e = rd_exact_excess_prob(code, j, dt, gamma)
            assert rd_converse_audit(ell, rd_induced_joint(code, j, dt=dt), e).passed

    def test_identity_code(self, rng):
        px = rng.dirichlet(np.ones(4))
        j = JointDist(np.diag(px))
        for eps in (0.01, 0.1, 0.5):
            rec = rd_converse_audit(2, rd_induced_joint(np.arange(4), j), eps)
            assert rec.passed and rec.margins["ellA"] >= -math.log2(eps) - 1e-9 + 2 - smooth_i_inf(j, eps).value - 2

    def test_constant_decoder(self, rng):
        j = rand_joint(rng, 3, 3)
        rec = rd_converse_audit(0, rd_induced_joint(np.zeros(3, dtype=int), j, n_repro=3), 0.2)
        assert rec.passed


def test_sweep_determinism(correlated_bits):
    a = rd_sweep(correlated_bits, HAMMING, 0.3, 0.05, 10, seed=1)
    assert a == rd_sweep(correlated_bits, HAMMING, 0.3, 0.05, 10, seed=1, threads=2)
