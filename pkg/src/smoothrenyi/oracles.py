"""Exhaustive oracles for the smoothing problems on small alphabets.

These enumerate the feasible set directly and share nothing with the fast
algorithms in :mod:`smoothrenyi.smooth` beyond the feasibility slack.
"""
from __future__ import annotations

import itertools

import numpy as np

from .smooth import REMOVAL_TOL

MAX_ORACLE_ATOMS = 16


def _subset_masks(m: int) -> np.ndarray:
    """All ``2^m`` subsets of ``m`` items as a boolean matrix."""
    if m > MAX_ORACLE_ATOMS:
        raise ValueError(f"oracle limited to {MAX_ORACLE_ATOMS} atoms, got {m}")
    codes = np.arange(2**m, dtype=np.int64)
    return ((codes[:, None] >> np.arange(m)) & 1).astype(bool)


def oracle_smooth_h0(masses, eps: float) -> float:
    """Try every subset of atoms to zero; keep the smallest feasible support."""
    flat = np.asarray(masses, dtype=np.float64).ravel()
    pos = flat[flat > 0]
    masks = _subset_masks(pos.size)
    removed = masks.astype(np.float64) @ pos
    kept = pos.size - masks.sum(axis=1)
    ok = (removed <= eps + REMOVAL_TOL) & (kept > 0)
    return float(np.log2(kept[ok].min()))


def oracle_smooth_h0_cond(masses, eps: float, given: str = "col") -> float:
    """Try every support pattern of the joint; minimize the worst row support."""
    m = np.asarray(masses, dtype=np.float64)
    c = m if given == "row" else m.T
    rows, cols = np.nonzero(c > 0)
    vals = c[rows, cols]
    masks = _subset_masks(vals.size)  # True = zeroed
    removed = masks.astype(np.float64) @ vals
    keep = ~masks
    per_row = np.zeros((masks.shape[0], c.shape[0]), dtype=np.int64)
    for r in range(c.shape[0]):
        per_row[:, r] = keep[:, rows == r].sum(axis=1)
    worst = per_row.max(axis=1)
    ok = (removed <= eps + REMOVAL_TOL) & (worst > 0)
    return float(np.log2(worst[ok].min()))


def oracle_smooth_d_inf(p, q, eps: float) -> float:
    """Minimize the cap ``lam`` over a finite candidate set.

    The optimal cap is either a ratio ``p/q`` or solves
    ``p(S) - lam q(S) = eps`` for the set ``S`` of atoms above the cap. Every
    subset ``S`` of the support is tried, and each candidate is checked
    against the definition of the ball directly.
    """
    mp = np.asarray(p, dtype=np.float64).ravel()
    mq = np.asarray(q, dtype=np.float64).ravel()
    s = mp > 0
    ps, qs = mp[s], mq[s]
    cands = list(ps / qs)
    for k in range(1, ps.size + 1):
        for sub in itertools.combinations(range(ps.size), k):
            idx = list(sub)
            cands.append((ps[idx].sum() - eps) / qs[idx].sum())
    best = np.inf
    for lam in cands:
        if lam <= 0:
            continue
        phi = np.minimum(ps, lam * qs)
        if phi.sum() >= 1.0 - eps - REMOVAL_TOL:
            best = min(best, float(np.max(phi / qs)))
    return float(np.log2(best))


def lp_smooth_d_inf(p, q, eps: float) -> float:
    """Linear-programming formulation (solver tolerance ~1e-9).

    minimize t subject to ``0 <= phi <= p``, ``sum phi >= 1 - eps`` and
    ``phi <= t q`` on the support of ``p``.
    """
    from scipy.optimize import linprog

    mp = np.asarray(p, dtype=np.float64).ravel()
    mq = np.asarray(q, dtype=np.float64).ravel()
    s = mp > 0
    ps, qs = mp[s], mq[s]
    n = ps.size
    c = np.zeros(n + 1)
    c[-1] = 1.0
    a_ub = np.zeros((n + 1, n + 1))
    a_ub[:n, :n] = np.eye(n)
    a_ub[:n, -1] = -qs
    a_ub[n, :n] = -1.0
    b_ub = np.zeros(n + 1)
    b_ub[n] = -(1.0 - eps)
    bounds = [(0.0, float(v)) for v in ps] + [(0.0, None)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        raise RuntimeError(res.message)
    return float(np.log2(res.x[-1]))
