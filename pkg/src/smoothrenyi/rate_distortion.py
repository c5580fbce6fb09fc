"""One-shot lossy coding under the max-distortion criterion."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .binning import AuditRecord, ErrorReport, _audit, ceil_bits
from .errors import ParameterError, ValidationError
from .prob import JointDist, ln, load_table, log2, require_eps, sample_many
from .seeding import map_trials
from .smooth import max_distortion_quantile, smooth_i_inf

__all__ = [
    "DistortionTable",
    "RDCode",
    "RDRateBound",
    "build_rd_code",
    "max_distortion_quantile",
    "rd_converse_audit",
    "rd_encode_decode",
    "rd_exact_excess_prob",
    "rd_induced_joint",
    "rd_rate_bound",
    "rd_sweep",
    "rd_zero_rate_check",
]


@dataclass(frozen=True, eq=False)
class DistortionTable:
    """Bounded nonnegative distortion ``d(x, y)``; rows are source symbols."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValidationError("distortion table must be a matrix")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValidationError("distortion entries must be finite and nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def bound(self) -> float:
        return float(self.values.max())

    @property
    def shape(self):
        return self.values.shape

    @classmethod
    def load(cls, path) -> "DistortionTable":
        return cls(load_table(path))

    def check_joint(self, j: JointDist) -> None:
        if self.shape != j.shape:
            raise ParameterError(f"distortion table shape {self.shape} != joint shape {j.shape}")


@dataclass(frozen=True, eq=False)
class RDCode:
    """Codebook of reproduction symbols; the encoder sends a min-distortion index."""

    codebook: np.ndarray

    @property
    def ell_a(self) -> int:
        return int(round(math.log2(self.codebook.size)))

    def encoder(self, dt: DistortionTable) -> np.ndarray:
        """Index sent for each source symbol (ties to the smallest index)."""
        return np.argmin(dt.values[:, self.codebook], axis=1)

    def reproduction(self, dt: DistortionTable) -> np.ndarray:
        return self.codebook[self.encoder(dt)]


@dataclass(frozen=True)
class RDRateBound:
    ell_a: int
    i_inf: float
    zero_rate_branch: bool


def _check_eps(eps, eps1):
    eps = require_eps(eps, lo_open=True)
    eps1 = require_eps(eps1, lo_open=True, name="eps1")
    if 2 * eps1 >= eps:
        raise ParameterError(f"need 2 eps1 < eps, got eps1={eps1}, eps={eps}")
    return eps, eps1


def rd_rate_bound(j: JointDist, dt: DistortionTable, eps: float, eps1: float) -> RDRateBound:
    """``ell_A = ceil(max{0, I_inf^{eps1}[X;Y]} + log(-ln(eps - 2 eps1)))``, floored at 0.

    When the smoothed information is negative, zero rate already suffices.
    """
    eps, eps1 = _check_eps(eps, eps1)
    dt.check_joint(j)
    i = smooth_i_inf(j, eps1).value
    if i < 0:
        return RDRateBound(0, i, True)
    ell = ceil_bits(max(0.0, i) + float(log2(-ln(eps - 2 * eps1))))
    return RDRateBound(max(0, ell), i, False)


def build_rd_code(j: JointDist, ell_a: int, rng) -> RDCode:
    """``2^ell_a`` iid draws from the reproduction marginal ``p_Y``."""
    if ell_a < 0:
        raise ParameterError(f"ell_a must be nonnegative, got {ell_a}")
    return RDCode(sample_many(j.col_marginal(), rng, 2**ell_a))


def rd_encode_decode(code: RDCode, x: int, dt: DistortionTable) -> int:
    row = dt.values[int(x), code.codebook]
    return int(code.codebook[int(np.argmin(row))])


def rd_exact_excess_prob(code: RDCode, j: JointDist, dt: DistortionTable, gamma: float) -> float:
    """``sum_x p_X(x) 1[d(x, f(e(x))) > gamma]`` for a fixed codebook."""
    dt.check_joint(j)
    px = j.row_marginal().masses
    d = dt.values[np.arange(px.size), code.reproduction(dt)]
    return float(px[d > gamma].sum())


def rd_zero_rate_check(j: JointDist, dt: DistortionTable, eps: float, eps1: float) -> float:
    """``Pr{d(X, Y_1) > gamma}`` under ``p_X x p_Y`` with ``gamma`` the ``eps1``-quantile.

    Requires ``I_inf^{eps1}[X;Y] < 0``; the returned probability is then at most ``eps``.
    """
    eps, eps1 = _check_eps(eps, eps1)
    dt.check_joint(j)
    i = smooth_i_inf(j, eps1).value
    if not i < 0:
        raise ParameterError(f"zero-rate check needs I_inf^eps1 < 0, got {i}")
    gamma = max_distortion_quantile(j, dt.values, eps1)
    prod = j.marginal_product().masses
    return float(prod[dt.values > gamma].sum())


def rd_induced_joint(code_or_map, j: JointDist, n_repro: int | None = None, dt: DistortionTable | None = None) -> JointDist:
    """Joint of ``(X, f(e(X)))`` for an RDCode (needs ``dt``) or an explicit map x -> y."""
    if isinstance(code_or_map, RDCode):
        repro = code_or_map.reproduction(dt)
        ny = dt.shape[1]
    else:
        repro = np.asarray(code_or_map, dtype=np.int64)
        ny = int(n_repro if n_repro is not None else repro.max() + 1)
    px = j.row_marginal().masses
    out = np.zeros((px.size, ny))
    out[np.arange(px.size), repro] = px
    return JointDist(out)


def rd_converse_audit(ell_a: int, j_induced: JointDist, eps: float) -> AuditRecord:
    """Check ``ell_A >= I_inf^eps[X;Y] + log eps`` on the induced joint ``(X, f(e(X)))``."""
    if eps >= 1.0:
        return AuditRecord(True, float(eps), {})
    if eps <= 0:
        return _audit(0.0, {"ellA": math.inf})
    i = smooth_i_inf(j_induced, eps).value
    return _audit(eps, {"ellA": ell_a - (i + float(log2(eps)))})


def rd_sweep(j: JointDist, dt: DistortionTable, eps, eps1, trials, seed, ell_a=None, threads=1):
    """Exact excess probability for ``trials`` independent codebooks; one dict per trial."""
    rb = rd_rate_bound(j, dt, eps, eps1)
    ell = rb.ell_a if ell_a is None else int(ell_a)
    gamma = max_distortion_quantile(j, dt.values, eps1)
    if rb.zero_rate_branch:
        bound = eps
    else:
        bound = 2 * eps1 + math.exp(-(2.0**ell) * 2.0 ** (-rb.i_inf))

    def one(t, rng):
        code = build_rd_code(j, ell, rng)
        return {
            "seed": t,
            "ellA": ell,
            "gamma": gamma,
            "excess_prob": rd_exact_excess_prob(code, j, dt, gamma),
            "i_inf": rb.i_inf,
            "avg_bound": bound,
        }

    return map_trials(one, seed, trials, threads)


def rd_report(rows) -> ErrorReport:
    return ErrorReport.from_samples([r["excess_prob"] for r in rows])
