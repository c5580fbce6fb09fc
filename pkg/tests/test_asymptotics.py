import json
import math
from pathlib import Path

import numpy as np
import pytest

from smoothrenyi.asymptotics import (
    MAX_ATOMS,
    convergence_d_inf,
    convergence_h0_cond,
    info_spectrum_quantile,
    product_expand,
)
from smoothrenyi.errors import ResourceError, SupportError
from smoothrenyi.prob import FiniteDist, JointDist, entropy
from typeclass_oracle import d_inf_binary, h0_cond_bsc, tail_mass

FIXTURE = json.loads((Path(__file__).parent / "fixtures" / "convergence.json").read_text())
P, Q = FiniteDist([0.5, 0.5]), FiniteDist([0.25, 0.75])
BSC = JointDist([[0.45, 0.05], [0.05, 0.45]])


class TestExpand:
    def test_identity(self):
        assert np.array_equal(product_expand(P, 1).masses, P.masses)

    def test_fair_coin(self):
        assert np.allclose(product_expand(P, 3).masses, 1 / 8)

    def test_hand_product(self):
        assert product_expand(FiniteDist([0.3, 0.7]), 2).masses == pytest.approx([0.09, 0.21, 0.21, 0.49])

    def test_joint_blocks(self):
        e = product_expand(BSC, 2)
        assert e.shape == (4, 4)
        assert e.masses[1, 1] == pytest.approx(0.45 * 0.45)  # x=(0,1), y=(0,1)
        assert e.masses.sum() == pytest.approx(1, abs=1e-9)

    def test_budget(self):
        assert product_expand(P, 22).alphabet_size == MAX_ATOMS
        with pytest.raises(ResourceError):
            product_expand(P, 23)
        with pytest.raises(ResourceError):
            convergence_h0_cond(BSC, 0.01, 12)


class TestH0Cond:
    def test_matches_type_class_oracle(self):
        pts = convergence_h0_cond(BSC, 0.01, 10)
        for pt in pts:
            assert pt.value == pytest.approx(h0_cond_bsc(0.1, pt.n, 0.01), abs=1e-9)
        assert pts[0].reference == pytest.approx(entropy([0.1, 0.9]))

    def test_independent_base_eps_zero(self):
        pts = convergence_h0_cond(JointDist(np.full((2, 2), 0.25)), 0.0, 6)
        assert all(p.value == pytest.approx(1.0) for p in pts)

    def test_monotone_in_eps(self):
        a = convergence_h0_cond(BSC, 0.01, 8)
        b = convergence_h0_cond(BSC, 0.2, 8)
        assert all(y.value <= x.value for x, y in zip(a, b))

    def test_bounded_by_log_alphabet(self):
        assert all(p.value <= 1 for p in convergence_h0_cond(BSC, 0.0, 8))


class TestDInf:
    def test_p_equals_q(self):
        assert all(p.value == pytest.approx(0, abs=1e-12) for p in convergence_d_inf(P, P, 0.0, 6))

    def test_matches_type_class_oracle(self):
        for pt in convergence_d_inf(P, Q, 0.01, 12):
            v, classes = d_inf_binary(0.5, 0.25, pt.n, 0.01)
            assert pt.value == pytest.approx(v, abs=1e-9)
            assert pt.extra["mass_D"] == pytest.approx(tail_mass(classes, pt.n, pt.value + 0.1), abs=1e-12)

    def test_mass_inequality_every_n(self):
        for pt in convergence_d_inf(P, Q, 0.01, 16):
            assert pt.extra["mass_D"] <= pt.extra["mass_bound"]

    def test_truncated_set_mass_grows(self):
        ref = convergence_d_inf(P, Q, 0.01, 1)[0].reference
        pts = convergence_d_inf(P, Q, 0.01, 20, lam=ref + 0.5)
        even = [p.extra["mass_A"] for p in pts if p.n % 2 == 0]
        assert even[-1] > even[0]
        assert all(p.extra["trunc_value"] <= ref + 0.5 + 1e-12 for p in pts)

    def test_support_error(self):
        with pytest.raises(SupportError):
            convergence_d_inf(P, FiniteDist([1.0, 0.0]), 0.1, 2)

    def test_eps_zero_dominates(self):
        a = convergence_d_inf(P, Q, 0.0, 8)
        b = convergence_d_inf(P, Q, 0.1, 8)
        assert all(y.value <= x.value for x, y in zip(a, b))


class TestSpectrum:
    def test_p_equals_q(self):
        for alpha in (0.1, 0.5, 0.9):
            assert info_spectrum_quantile(P, P, alpha, 5) == 0

    def test_concentrates_near_divergence(self):
        d = FIXTURE["dinf"]["reference"]
        assert abs(info_spectrum_quantile(P, Q, 0.5, 20) - d) < 0.1

    def test_monotone_in_alpha(self):
        vals = [info_spectrum_quantile(P, Q, a, 8) for a in (0.05, 0.2, 0.5, 0.8)]
        assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_fixture_provenance():
    for key in ("h0cond", "dinf"):
        f = FIXTURE[key]
        assert f["tolerance"] == math.ceil(abs(f["oracle"][-1] - f["reference"]) * 100) / 100


def test_gap_shrinks_from_n1_to_nmax():
    h = convergence_h0_cond(BSC, FIXTURE["h0cond"]["eps"], FIXTURE["h0cond"]["n_max"])
    d = convergence_d_inf(P, Q, FIXTURE["dinf"]["eps"], FIXTURE["dinf"]["n_max"])
    for pts in (h, d):
        assert abs(pts[-1].gap) < abs(pts[0].gap)
