"""Exact finite-n experiments on iid product distributions.

Products are expanded in full (lexicographic order, first coordinate most
significant), so every value here is exact up to float rounding. The expansion
is capped at :data:`MAX_ATOMS` atoms.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ResourceError
from .prob import FiniteDist, JointDist, check_support, kl_divergence, log2, require_eps, shannon_quantities
from .smooth import smooth_d_inf, smooth_h0_cond

MAX_ATOMS = 2**22


def _guard(size: int, n: int) -> None:
    if n < 1:
        raise ParameterError(f"n must be at least 1, got {n}")
    if size**n > MAX_ATOMS:
        raise ResourceError(f"{size}^{n} atoms exceeds the budget of {MAX_ATOMS}")


def product_expand(base, n: int):
    """``n``-fold iid product of a FiniteDist or JointDist (a JointDist stays a joint of blocks)."""
    n = int(n)
    if isinstance(base, JointDist):
        _guard(base.masses.size, n)
        out = base.masses
        for _ in range(n - 1):
            out = np.kron(out, base.masses)
        return JointDist(out)
    if isinstance(base, FiniteDist):
        _guard(base.alphabet_size, n)
        out = base.masses
        for _ in range(n - 1):
            out = np.outer(out, base.masses).ravel()
        return FiniteDist(out)
    raise ParameterError("base must be a FiniteDist or JointDist")


@dataclass(frozen=True)
class ConvergencePoint:
    n: int
    value: float
    reference: float
    extra: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return self.value - self.reference


def convergence_h0_cond(base: JointDist, eps: float, n_max: int, given: str = "col") -> list[ConvergencePoint]:
    """``H_0^eps[X^n|Y^n]/n`` for ``n = 1..n_max`` against the Shannon conditional entropy.

    With ``given="col"`` the reference is ``H[row|col]``.
    """
    eps = require_eps(eps)
    _guard(base.masses.size, n_max)
    sq = shannon_quantities(base)
    ref = sq.h_x_given_y if given == "col" else sq.h_y_given_x
    out = []
    cur = base.masses
    for n in range(1, n_max + 1):
        if n > 1:
            cur = np.kron(cur, base.masses)
        v = smooth_h0_cond(JointDist(cur), eps, given=given).value / n
        out.append(ConvergencePoint(n, v, ref))
    return out


def _llr(p: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-atom normalized-free log ratio and P mass on the support of ``p``."""
    s = p > 0
    return log2(p[s] / q[s]), p[s]


def convergence_d_inf(
    p: FiniteDist,
    q: FiniteDist,
    eps: float,
    n_max: int,
    lam: float | None = None,
    delta: float = 0.1,
) -> list[ConvergencePoint]:
    """``D_inf^eps(P_n||Q_n)/n`` for ``n = 1..n_max`` against ``D(P||Q)``.

    Each point also carries diagnostics in ``extra``:

    * ``mass_A`` and ``trunc_value``: ``P_n`` mass of ``{(1/n) log P_n/Q_n <= lam}``
      and ``(1/n) log max phi_n/Q_n`` for ``phi_n = P_n`` restricted to that set
      (``lam`` defaults to ``D(P||Q) + 0.05``).
    * ``mass_D`` and ``mass_bound``: ``P_n`` mass of
      ``{(1/n) log P_n/Q_n > value + delta}`` and ``eps + 2^{-n delta/2}``.
    """
    eps = require_eps(eps)
    check_support(p, q)
    _guard(p.alphabet_size, n_max)
    ref = kl_divergence(p, q)
    lam = ref + 0.05 if lam is None else float(lam)
    out = []
    pn, qn = p.masses, q.masses
    for n in range(1, n_max + 1):
        if n > 1:
            pn = np.outer(pn, p.masses).ravel()
            qn = np.outer(qn, q.masses).ravel()
        v = smooth_d_inf(pn, qn, eps).value / n
        z, w = _llr(pn, qn)
        z = z / n
        in_a = z <= lam
        trunc = float(z[in_a].max()) if in_a.any() else -np.inf
        extra = {
            "mass_A": float(w[in_a].sum()),
            "trunc_value": trunc,
            "mass_D": float(w[z > v + delta].sum()),
            "mass_bound": eps + 2.0 ** (-n * delta / 2.0),
        }
        out.append(ConvergencePoint(n, v, ref, extra))
    return out


def info_spectrum_quantile(p, q, alpha: float, n: int = 1) -> float:
    """Smallest ``t`` with ``P_n{(1/n) log P_n/Q_n <= t} > 1 - alpha``.

    ``p`` and ``q`` are base distributions (FiniteDist, JointDist or arrays of
    equal shape); they are expanded to ``n`` copies first.
    """
    alpha = require_eps(alpha, lo_open=True, name="alpha")
    mp = np.asarray(getattr(p, "masses", p), dtype=np.float64).ravel()
    mq = np.asarray(getattr(q, "masses", q), dtype=np.float64).ravel()
    check_support(mp, mq)
    pn = product_expand(FiniteDist(mp), n).masses
    qn = product_expand(FiniteDist(mq), n).masses
    z, w = _llr(pn, qn)
    z = z / n
    order = np.argsort(z, kind="stable")
    cum = np.cumsum(w[order])
    hit = np.flatnonzero(cum > 1.0 - alpha)
    return float(z[order][hit[0]] if hit.size else z[order][-1])
