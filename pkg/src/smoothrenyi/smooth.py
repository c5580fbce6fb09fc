"""Exact smooth zeroth-order entropies and smooth max divergences, with witnesses.

Every smoothing operation searches the ball ``B^eps(p)`` of sub-weightings
dominated by ``p`` with total mass at least ``1 - eps``. The infimum is always
attained on finite alphabets, so each function returns the optimizer along
with the value.

Removals are compared against ``eps`` with an absolute slack of
:data:`REMOVAL_TOL` so that a removal which equals ``eps`` in exact arithmetic
is not rejected because of float summation order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .prob import (
    FiniteDist,
    JointDist,
    SubWeighting,
    check_support,
    log2,
    require_eps,
)

REMOVAL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SmoothResult:
    value: float
    witness: SubWeighting
    epsilon: float


def _array(d) -> np.ndarray:
    return d.masses if isinstance(d, (FiniteDist, JointDist)) else np.asarray(d, dtype=np.float64)


def _conditioned(masses: np.ndarray, given: str) -> np.ndarray:
    """Orient a joint so that rows are the conditioning symbols."""
    if given == "row":
        return masses
    if given == "col":
        return masses.T
    raise ParameterError(f"given must be 'row' or 'col', not {given!r}")


def h0(d) -> float:
    """``log2 |Supp(p)|``."""
    return float(log2(np.count_nonzero(_array(d) > 0)))


def h0_cond(j: JointDist, given: str = "col") -> float:
    """``log2`` of the largest conditional support size.

    ``given="col"`` computes ``H_0[row | col]`` (so ``H_0[X|Y]`` for ``p_{XY}``);
    ``given="row"`` computes ``H_0[col | row]``. Conditioning symbols of zero
    marginal mass are skipped.
    """
    c = _conditioned(j.masses, given)
    counts = np.count_nonzero(c > 0, axis=1)
    return float(log2(counts.max()))


def smooth_h0(d, eps: float) -> SmoothResult:
    """Smooth zeroth-order entropy ``H_0^eps``.

    Zeroes the lightest atoms while the removed mass stays within ``eps``;
    among equal masses the larger index goes first. Joints are treated as a
    distribution on pairs and get a witness of the same shape.
    """
    eps = require_eps(eps)
    masses = _array(d)
    flat = masses.ravel()
    pos = np.flatnonzero(flat > 0)
    order = pos[np.lexsort((-pos, flat[pos]))]
    cum = np.cumsum(flat[order])
    n_drop = int(np.searchsorted(cum, eps + REMOVAL_TOL, side="right"))
    n_drop = min(n_drop, pos.size - 1)
    w = flat.copy()
    w[order[:n_drop]] = 0.0
    witness = SubWeighting(w.reshape(masses.shape), masses, eps)
    return SmoothResult(float(log2(pos.size - n_drop)), witness, eps)


def _row_removal_table(c: np.ndarray):
    """Sort each row ascending (ties: larger column first) and prefix-sum it.

    Returns ``(order, prefix, zeros, support)`` where ``prefix[y, m]`` is the
    sum of the ``m`` smallest entries of row ``y`` (zeros sort first).
    """
    ncols = c.shape[1]
    rev = np.argsort(c[:, ::-1], axis=1, kind="stable")
    order = ncols - 1 - rev
    sorted_vals = np.take_along_axis(c, order, axis=1)
    prefix = np.zeros((c.shape[0], ncols + 1))
    np.cumsum(sorted_vals, axis=1, out=prefix[:, 1:])
    support = np.count_nonzero(c > 0, axis=1)
    return order, prefix, ncols - support, support


def _cond_cost(prefix, zeros, support, k: int) -> float:
    drop = np.maximum(support - k, 0)
    return float(prefix[np.arange(prefix.shape[0]), zeros + drop].sum())


def smooth_h0_cond(j: JointDist, eps: float, given: str = "col") -> SmoothResult:
    """Conditional smooth zeroth-order entropy.

    For a target support size ``k`` the cheapest sub-weighting trims each
    conditioning row to its ``k`` heaviest atoms. The removal cost is
    non-increasing in ``k``; the smallest ``k`` whose cost fits in ``eps`` is
    found by bisection. Conditionals use the original marginal as denominator,
    which leaves support sizes unchanged.
    """
    eps = require_eps(eps)
    c = _conditioned(j.masses, given)
    order, prefix, zeros, support = _row_removal_table(c)
    lo, hi = 1, int(support.max())
    while lo < hi:
        mid = (lo + hi) // 2
        if _cond_cost(prefix, zeros, support, mid) <= eps + REMOVAL_TOL:
            hi = mid
        else:
            lo = mid + 1
    k = lo
    drop = zeros + np.maximum(support - k, 0)
    rank = np.arange(c.shape[1])[None, :]
    zero_sorted = rank < drop[:, None]
    w = c.copy()
    rows = np.repeat(np.arange(c.shape[0]), c.shape[1]).reshape(c.shape)
    w[rows[zero_sorted], order[zero_sorted]] = 0.0
    w = w if given == "row" else w.T
    return SmoothResult(float(log2(k)), SubWeighting(w, j.masses, eps), eps)


def d_inf(p, q) -> float:
    """Max divergence ``log2 max_{p(x)>0} p(x)/q(x)``."""
    check_support(p, q)
    mp, mq = _array(p).ravel(), _array(q).ravel()
    s = mp > 0
    return float(log2(np.max(mp[s] / mq[s])))


def removal(p, q, lam: float) -> float:
    """Mass removed by capping ``p`` at ``lam * q``: ``sum max(0, p - lam q)``."""
    mp, mq = _array(p).ravel(), _array(q).ravel()
    return float(np.maximum(0.0, mp - lam * mq).sum())


def smooth_d_inf(p, q, eps: float) -> SmoothResult:
    """Smooth max divergence ``D_inf^eps(P||Q)`` by an exact waterfilling walk.

    ``removal(lam)`` is piecewise linear with breakpoints at the ratios
    ``p/q``. Walking the ratios in decreasing order, the first breakpoint whose
    removal exceeds ``eps`` brackets the optimum, where ``lam`` solves the
    linear segment equation exactly. The witness is ``min(p, lam q)``. The value
    can be negative.
    """
    eps = require_eps(eps)
    check_support(p, q)
    shape = _array(p).shape
    mp, mq = _array(p).ravel(), _array(q).ravel()
    s = np.flatnonzero(mp > 0)
    ratios = mp[s] / mq[s]
    order = np.argsort(-ratios, kind="stable")
    r = ratios[order]
    pc = np.cumsum(mp[s][order])
    qc = np.cumsum(mq[s][order])
    # removal just below each breakpoint r[k+1], with atoms 0..k above the cap
    at_bp = pc[:-1] - r[1:] * qc[:-1]
    over = np.flatnonzero(at_bp > eps + REMOVAL_TOL)
    k = int(over[0]) if over.size else r.size - 1
    lam = (pc[k] - eps) / qc[k]
    lower = r[k + 1] if k + 1 < r.size else 0.0
    lam = float(min(max(lam, lower), r[k]))
    if eps == 0:
        # tied top ratios would otherwise give (p0+p1)/(q0+q1), off by an ulp,
        # and lam * q can round below p at the top atom
        lam = float(r[0])
        w = mp.reshape(shape).copy()
    else:
        w = np.minimum(mp, lam * mq).reshape(shape)
    # lam underflows to 0 only when 1 - eps cancels to 0 in floating point
    value = float(log2(lam)) if lam > 0 else -np.inf
    return SmoothResult(value, SubWeighting(w, _array(p), eps), eps)


def smooth_i_inf(j: JointDist, eps: float) -> SmoothResult:
    """``I_inf^eps`` as the smooth max divergence from the product of marginals."""
    return smooth_d_inf(j, j.marginal_product(), eps)


def i_inf(j: JointDist) -> float:
    return d_inf(j, j.marginal_product())


def witness_objective_h0(witness: SubWeighting) -> float:
    return float(log2(np.count_nonzero(witness.weights > 0)))


def witness_objective_h0_cond(witness: SubWeighting, given: str = "col") -> float:
    c = _conditioned(witness.weights, given)
    return float(log2(np.count_nonzero(c > 0, axis=1).max()))


def witness_objective_d_inf(witness: SubWeighting, q) -> float:
    mp = witness.reference.ravel()
    mw = witness.weights.ravel()
    mq = _array(q).ravel()
    s = mp > 0
    return float(log2(np.max(mw[s] / mq[s])))


def sw_truncation(j: JointDist, eps: float) -> SubWeighting:
    """Common truncation used by the Slepian-Wolf decoder.

    Intersects the supports of the optimizers of ``H_0^{eps/6}[XY]``,
    ``H_0^{eps/6}[X|Y]`` and ``H_0^{eps/6}[Y|X]`` (rows are ``X``) and keeps
    ``p`` on that set. The result lies in ``B^{eps/2}(p)``.
    """
    eps = require_eps(eps, lo_open=True)
    e6 = eps / 6.0
    keep = smooth_h0(j, e6).witness.support
    keep &= smooth_h0_cond(j, e6, given="col").witness.support
    keep &= smooth_h0_cond(j, e6, given="row").witness.support
    return SubWeighting(np.where(keep, j.masses, 0.0), j.masses, eps / 2.0)


def max_distortion_quantile(j: JointDist, table, eps: float) -> float:
    """Smallest distortion value ``v`` with ``Pr{d(X,Y) <= v} > 1 - eps`` (strict)."""
    eps = require_eps(eps, lo_open=True)
    table = np.asarray(table, dtype=np.float64)
    if table.shape != j.shape:
        raise ParameterError(f"distortion table shape {table.shape} != joint shape {j.shape}")
    vals = table.ravel()
    levels, inv = np.unique(vals, return_inverse=True)
    cum = np.cumsum(np.bincount(inv, weights=j.masses.ravel(), minlength=levels.size))
    hit = np.flatnonzero(cum > 1.0 - eps)
    return float(levels[hit[0]] if hit.size else levels[-1])
