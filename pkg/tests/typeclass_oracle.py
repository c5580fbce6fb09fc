"""Type-class oracles for iid product experiments.

Atoms of a product distribution with the same type share their mass, so the
smoothing problems reduce to a walk over ``n + 1`` binomial classes. Nothing
here calls into :mod:`smoothrenyi`.
"""
from math import comb, log2

SLACK = 1e-12


def h0_cond_bsc(a: float, n: int, eps: float) -> float:
    """``H_0^eps[X^n|Y^n] / n`` for ``X = Y xor N``, ``Y`` uniform bits, ``N ~ Bern(a)``, ``a < 1/2``.

    Every conditioning row holds ``C(n, w)`` atoms of mass ``2^-n a^w (1-a)^(n-w)``;
    all ``2^n`` rows are alike, so trimming one atom per row costs ``a^w (1-a)^(n-w)``.
    """
    removed, count = 0.0, 0
    for w in range(n, -1, -1):  # lightest class first
        m = a**w * (1 - a) ** (n - w)
        c = comb(n, w)
        room = int((eps + SLACK - removed) // m) if m > 0 else c
        t = max(0, min(c, room))
        removed += t * m
        count += t
        if t < c:
            break
    kept = 2**n - count
    return log2(max(kept, 1)) / n


def d_inf_binary(p0: float, q0: float, n: int, eps: float):
    """``D_inf^eps(P^n||Q^n) / n`` for binary ``P = (p0, 1-p0)``, ``Q = (q0, 1-q0)``.

    Returns ``(value, classes)`` where ``classes`` lists ``(count, P mass, Q mass)``
    per type for further tail sums.
    """
    classes = []
    for t in range(n + 1):
        pm = p0**t * (1 - p0) ** (n - t)
        qm = q0**t * (1 - q0) ** (n - t)
        if pm > 0:
            classes.append((comb(n, t), pm, qm))
    classes.sort(key=lambda c: -c[1] / c[2])
    pc = qc = 0.0
    lam = None
    for i, (c, pm, qm) in enumerate(classes):
        pc += c * pm
        qc += c * qm
        nxt = classes[i + 1][1] / classes[i + 1][2] if i + 1 < len(classes) else 0.0
        if pc - nxt * qc > eps + SLACK or i + 1 == len(classes):
            lam = max((pc - eps) / qc, nxt)
            break
    return log2(lam) / n, classes


def tail_mass(classes, n: int, threshold: float) -> float:
    """``P^n{(1/n) log P^n/Q^n > threshold}``."""
    return sum(c * pm for c, pm, qm in classes if log2(pm / qm) / n > threshold)
