"""Random-binning codes: Slepian-Wolf, compression with side information, converse audit.

Bins are numbered ``0 .. 2^ell - 1``. Errors are evaluated exactly for a
fixed code by enumerating the source alphabet; randomness only enters through
the choice of code.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .prob import JointDist, SubWeighting, log2, require_eps
from .seeding import map_trials
from .smooth import smooth_h0, smooth_h0_cond, sw_truncation

#: slack when rounding real-valued rate bounds up to integers
CEIL_SLACK = 1e-9


def ceil_bits(x: float) -> int:
    """Round a rate bound up to whole bits, ignoring float noise below 1e-9."""
    return int(math.ceil(x - CEIL_SLACK))


@dataclass(frozen=True, eq=False)
class BinAssignment:
    bins: np.ndarray
    ell: int

    def __post_init__(self):
        if self.ell < 0:
            raise ParameterError(f"ell must be nonnegative, got {self.ell}")
        bins = np.array(self.bins, dtype=np.int64)
        if bins.ndim != 1 or np.any(bins < 0) or np.any(bins >= 2**self.ell):
            raise ParameterError("bin indices must lie in [0, 2^ell)")
        bins.setflags(write=False)
        object.__setattr__(self, "bins", bins)

    @classmethod
    def random(cls, n: int, ell: int, rng: np.random.Generator) -> "BinAssignment":
        return cls(rng.integers(0, 2**ell, size=n), ell)

    @property
    def n_bins(self) -> int:
        return 2**self.ell

    def members(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.bins == i)

    def groups(self) -> tuple[np.ndarray, int]:
        """Compact group id per symbol (occupied bins only) and the group count."""
        _, inv = np.unique(self.bins, return_inverse=True)
        return inv, int(inv.max()) + 1


@dataclass(frozen=True)
class ErrorReport:
    error_prob: float
    method: str = "exact"
    trials: int = 1
    confidence_radius: float = 0.0
    events: dict = field(default_factory=dict)

    def __post_init__(self):
        if not -1e-12 <= self.error_prob <= 1 + 1e-12:
            raise ValueError(f"error probability {self.error_prob} outside [0, 1]")
        if self.method not in ("exact", "monte_carlo"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "exact" and self.confidence_radius != 0.0:
            raise ValueError("exact reports carry zero confidence radius")

    @classmethod
    def from_samples(cls, values, events=None) -> "ErrorReport":
        """Mean of per-trial errors with a 3-sigma radius."""
        v = np.asarray(values, dtype=np.float64)
        radius = 3.0 * float(v.std(ddof=1)) / math.sqrt(v.size) if v.size > 1 else 0.0
        return cls(float(v.mean()), "monte_carlo", int(v.size), radius, events or {})


# ----------------------------------------------------------------- Slepian-Wolf


@dataclass(frozen=True, eq=False)
class SWCode:
    bin_a: BinAssignment
    bin_b: BinAssignment
    q: SubWeighting

    @property
    def ell_a(self) -> int:
        return self.bin_a.ell

    @property
    def ell_b(self) -> int:
        return self.bin_b.ell


def build_sw_code(j: JointDist, ell_a: int, ell_b: int, eps: float, rng) -> SWCode:
    require_eps(eps, lo_open=True)
    nx, ny = j.shape
    bin_a = BinAssignment.random(nx, ell_a, rng)
    bin_b = BinAssignment.random(ny, ell_b, rng)
    return SWCode(bin_a, bin_b, sw_truncation(j, eps))


def sw_decode(code: SWCode, i: int, jdx: int):
    """The unique positive-``q`` pair in bin ``i`` x bin ``jdx``, or ``None``."""
    if not (0 <= i < code.bin_a.n_bins and 0 <= jdx < code.bin_b.n_bins):
        raise ParameterError("bin index out of range")
    xs = code.bin_a.members(i)
    ys = code.bin_b.members(jdx)
    block = code.q.weights[np.ix_(xs, ys)] > 0
    hits = np.argwhere(block)
    if hits.shape[0] != 1:
        return None
    return int(xs[hits[0, 0]]), int(ys[hits[0, 1]])


def sw_exact_error(code: SWCode, j: JointDist) -> ErrorReport:
    """Exact decoding error of a fixed code, plus the four error events.

    E1: the pair is outside ``Supp(q)``. E2: another ``x'`` in the same bin
    pairs with ``y`` inside ``Supp(q)``. E3: likewise for ``y'``. E4: some
    ``(x', y')`` with both coordinates different does. The decoding error is
    exactly the union.
    """
    pos = code.q.weights > 0
    posf = pos.astype(np.int64)
    ga, na = code.bin_a.groups()
    gb, nb = code.bin_b.groups()
    nx, ny = pos.shape
    # col_cnt[g, y]: positive pairs (x', y) with x' in group g
    col_cnt = np.zeros((na, ny), dtype=np.int64)
    np.add.at(col_cnt, ga, posf)
    row_cnt = np.zeros((nb, nx), dtype=np.int64)
    np.add.at(row_cnt, gb, posf.T)
    block = np.zeros((nb, na), dtype=np.int64)
    np.add.at(block, gb, col_cnt.T)
    same_x = col_cnt[ga, :]  # (nx, ny)
    same_y = row_cnt[gb, :].T  # (nx, ny)
    both = block[gb][:, ga].T  # (nx, ny)
    e1 = ~pos
    e2 = (same_x - posf) > 0
    e3 = (same_y - posf) > 0
    e4 = (both - same_x - same_y + posf) > 0
    wrong = e1 | e2 | e3 | e4
    p = j.masses
    events = {f"E{k}": float(p[e].sum()) for k, e in enumerate((e1, e2, e3, e4), start=1)}
    return ErrorReport(float(p[wrong].sum()), events=events)


@dataclass(frozen=True)
class SWRateBounds:
    ell_a_min: int
    ell_b_min: int
    sum_min: int
    h_x_given_y: float
    h_y_given_x: float
    h_xy: float

    def rates(self) -> tuple[int, int]:
        """Smallest corner meeting all three constraints, favouring A at its minimum."""
        ell_a = self.ell_a_min
        return ell_a, max(self.ell_b_min, self.sum_min - ell_a)


def sw_rate_bounds(j: JointDist, eps: float) -> SWRateBounds:
    """Achievability thresholds with smoothing ``eps/6``, rounded up to bits."""
    eps = require_eps(eps, lo_open=True)
    e6 = eps / 6.0
    hxy = smooth_h0(j, e6).value
    hxgy = smooth_h0_cond(j, e6, given="col").value
    hygx = smooth_h0_cond(j, e6, given="row").value
    pen = -float(log2(e6))
    return SWRateBounds(
        ell_a_min=ceil_bits(hxgy + pen),
        ell_b_min=ceil_bits(hygx + pen),
        sum_min=ceil_bits(hxy + pen),
        h_x_given_y=hxgy,
        h_y_given_x=hygx,
        h_xy=hxy,
    )


def sw_sweep(j: JointDist, eps: float, trials: int, seed: int, ell_a=None, ell_b=None, threads=1):
    """Exact errors of ``trials`` independent random codes; one dict per code."""
    if ell_a is None or ell_b is None:
        da, db = sw_rate_bounds(j, eps).rates()
        ell_a = da if ell_a is None else ell_a
        ell_b = db if ell_b is None else ell_b
    q = sw_truncation(j, eps)

    def one(t, rng):
        nx, ny = j.shape
        code = SWCode(BinAssignment.random(nx, ell_a, rng), BinAssignment.random(ny, ell_b, rng), q)
        rep = sw_exact_error(code, j)
        return {"seed": t, "ellA": ell_a, "ellB": ell_b, "exact_error": rep.error_prob, **rep.events}

    return map_trials(one, seed, trials, threads)


# ------------------------------------------------ compression with side information


@dataclass(frozen=True, eq=False)
class SideInfoCode:
    """Binning of ``X`` decoded against side information ``U``.

    The decoder returns the unique ``x'`` in the received bin with
    ``q(x', u) > 0``, where ``q`` is the optimizer of ``H_0^{eps_a}[X|U]``.
    """

    bins: BinAssignment
    q: SubWeighting

    @property
    def ell_a(self) -> int:
        return self.bins.ell

    def decode_table(self) -> np.ndarray:
        """``table[x, u]``: decoder output given bin of ``x`` and side info ``u`` (``-1`` = failure)."""
        pos = (self.q.weights > 0).astype(np.int64)
        g, ng = self.bins.groups()
        nx = pos.shape[0]
        cnt = np.zeros((ng, pos.shape[1]), dtype=np.int64)
        np.add.at(cnt, g, pos)
        xsum = np.zeros_like(cnt)
        np.add.at(xsum, g, pos * np.arange(nx)[:, None])
        out = np.where(cnt == 1, xsum, -1)
        return out[g, :]

    def decode(self, i: int, u: int) -> int | None:
        xs = self.bins.members(i)
        hits = xs[self.q.weights[xs, u] > 0]
        return int(hits[0]) if hits.size == 1 else None


def side_info_exact_error(code: SideInfoCode, j_xu: JointDist) -> ErrorReport:
    """Exact ``Pr{decode(bin(X), U) != X}`` under ``p_{XU}``."""
    table = code.decode_table()
    wrong = table != np.arange(j_xu.shape[0])[:, None]
    pos = code.q.weights > 0
    events = {"outside_support": float(j_xu.masses[~pos].sum())}
    return ErrorReport(float(j_xu.masses[wrong].sum()), events=events)


def rw_rate_bound(j_xu: JointDist, eps_a: float) -> int:
    """``ceil(H_0^{eps_a}[X|U] + log2(1/eps_a))``; the averaged error is then at most ``2 eps_a``."""
    eps_a = require_eps(eps_a, lo_open=True)
    return ceil_bits(smooth_h0_cond(j_xu, eps_a, given="col").value - float(log2(eps_a)))


def rw_side_info_code(j_xu: JointDist, ell_a: int, eps_a: float, rng) -> tuple[SideInfoCode, ErrorReport]:
    """Random binning of ``X`` (rows) decoded with side information ``U`` (columns)."""
    eps_a = require_eps(eps_a, lo_open=True)
    q = smooth_h0_cond(j_xu, eps_a, given="col").witness
    code = SideInfoCode(BinAssignment.random(j_xu.shape[0], ell_a, rng), q)
    return code, side_info_exact_error(code, j_xu)


# ---------------------------------------------------------------- converse audit


@dataclass(frozen=True)
class AuditRecord:
    passed: bool
    error_prob: float
    margins: dict

    @property
    def vacuous(self) -> bool:
        return self.error_prob >= 1.0


def _audit(error_prob: float, checks: dict) -> AuditRecord:
    ok = all(m >= -CEIL_SLACK for m in checks.values())
    return AuditRecord(ok, float(error_prob), checks)


def sw_converse_audit(j: JointDist, ell_a: int, ell_b: int, error_prob: float) -> AuditRecord:
    """Check ``ell_A >= H_0^e[X|Y]``, ``ell_B >= H_0^e[Y|X]``, ``ell_A + ell_B >= H_0^e[XY]``.

    ``error_prob`` is the code's measured error ``e``. At ``e >= 1`` the
    lower bounds are vacuous and the audit passes trivially.
    """
    if error_prob >= 1.0:
        return AuditRecord(True, float(error_prob), {})
    e = max(float(error_prob), 0.0)
    return _audit(
        e,
        {
            "ellA": ell_a - smooth_h0_cond(j, e, given="col").value,
            "ellB": ell_b - smooth_h0_cond(j, e, given="row").value,
            "sum": ell_a + ell_b - smooth_h0(j, e).value,
        },
    )


def deterministic_sw_error(j: JointDist, enc_a, enc_b, decoder) -> float:
    """Exact error of an arbitrary deterministic SW code.

    ``decoder`` is an array of shape ``(2^ell_A, 2^ell_B, 2)`` holding the
    reconstructed pair for each message pair.
    """
    enc_a = np.asarray(enc_a)
    enc_b = np.asarray(enc_b)
    dec = np.asarray(decoder)
    out = dec[enc_a[:, None], enc_b[None, :]]  # (nx, ny, 2)
    nx, ny = j.shape
    ok = (out[..., 0] == np.arange(nx)[:, None]) & (out[..., 1] == np.arange(ny)[None, :])
    return float(j.masses[~ok].sum())
