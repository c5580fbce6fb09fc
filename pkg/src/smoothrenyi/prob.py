"""Finite probability substrate: distributions, joints, kernels, sampling.

Symbols are dense integer ids ``0..n-1``. A :class:`JointDist` stores ``p(x, y)``
with the first variable on rows and the second on columns, so ``p_{XY}`` has
``X`` on rows. All information quantities are in bits.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AlphabetMismatchError, ParameterError, SupportError, ValidationError

#: normalization tolerance for in-memory objects
NORM_TOL = 1e-12
#: normalization tolerance accepted when reading files
FILE_TOL = 1e-9


def log2(x):
    """Base-2 logarithm. The single place where bits are defined."""
    return np.log2(x)


def ln(x):
    """Natural logarithm, only for bounds that are stated with ``ln``."""
    return np.log(x)


def _as_masses(values, ndim: int, what: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != ndim:
        raise ValidationError(f"{what} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValidationError(f"{what} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what} contains non-finite entries")
    if np.any(arr < 0):
        raise ValidationError(f"{what} contains negative masses")
    total = float(arr.sum())
    if abs(total - 1.0) > NORM_TOL:
        raise ValidationError(f"{what} sums to {total!r}, not 1")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FiniteDist:
    """Probability mass function on ``{0, ..., n-1}``."""

    masses: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "masses", _as_masses(self.masses, 1, "distribution"))

    @classmethod
    def normalized(cls, weights) -> "FiniteDist":
        w = np.asarray(weights, dtype=np.float64)
        return cls(w / w.sum())

    @classmethod
    def uniform(cls, n: int) -> "FiniteDist":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point(cls, n: int, symbol: int) -> "FiniteDist":
        m = np.zeros(n)
        m[symbol] = 1.0
        return cls(m)

    @property
    def alphabet_size(self) -> int:
        return self.masses.shape[0]

    def __len__(self) -> int:
        return self.alphabet_size

    @property
    def support(self) -> np.ndarray:
        return self.masses > 0


@dataclass(frozen=True, eq=False)
class JointDist:
    """Joint pmf ``p(r, c)`` on a product alphabet, rows first."""

    masses: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "masses", _as_masses(self.masses, 2, "joint distribution"))

    @classmethod
    def normalized(cls, weights) -> "JointDist":
        w = np.asarray(weights, dtype=np.float64)
        return cls(w / w.sum())

    @classmethod
    def product(cls, a: FiniteDist, b: FiniteDist) -> "JointDist":
        return cls(np.outer(a.masses, b.masses))

    @classmethod
    def from_kernel(cls, marginal: FiniteDist, kernel: "Kernel") -> "JointDist":
        """``p(r, c) = marginal(r) * kernel(c | r)``."""
        if kernel.rows.shape[0] != marginal.alphabet_size:
            raise AlphabetMismatchError("kernel conditioning alphabet does not match marginal")
        return cls(marginal.masses[:, None] * kernel.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return self.masses.shape

    @property
    def support(self) -> np.ndarray:
        return self.masses > 0

    def row_marginal(self) -> FiniteDist:
        return FiniteDist(self.masses.sum(axis=1))

    def col_marginal(self) -> FiniteDist:
        return FiniteDist(self.masses.sum(axis=0))

    def transpose(self) -> "JointDist":
        return JointDist(self.masses.T)

    @property
    def T(self) -> "JointDist":
        return self.transpose()

    def flatten(self) -> FiniteDist:
        """Row-major view of the joint as a distribution on pairs."""
        return FiniteDist(self.masses.ravel())

    def marginal_product(self) -> "JointDist":
        return JointDist.product(self.row_marginal(), self.col_marginal())


@dataclass(frozen=True, eq=False)
class Kernel:
    """Conditional pmf ``k(c | r)``; rows whose conditioning mass is zero are absent.

    Absent rows hold zeros and are skipped by every maximum over the
    conditioning symbol.
    """

    rows: np.ndarray
    present: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.float64)
        present = np.array(self.present, dtype=bool)
        if rows.ndim != 2 or present.shape != rows.shape[:1]:
            raise ValidationError("kernel rows must be a matrix with one presence flag per row")
        if np.any(rows < 0) or not np.all(np.isfinite(rows)):
            raise ValidationError("kernel has negative or non-finite entries")
        sums = rows.sum(axis=1)
        if np.any(np.abs(sums[present] - 1.0) > NORM_TOL):
            raise ValidationError("a present kernel row does not sum to 1")
        rows.setflags(write=False)
        present.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "present", present)

    @classmethod
    def from_matrix(cls, rows) -> "Kernel":
        """Every row present; rows must be stochastic."""
        rows = np.asarray(rows, dtype=np.float64)
        return cls(rows, np.ones(rows.shape[0], dtype=bool))

    def row(self, r: int) -> FiniteDist | None:
        return FiniteDist(self.rows[r]) if self.present[r] else None

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows.shape


@dataclass(frozen=True, eq=False)
class SubWeighting:
    """A member of the ball ``B^eps(p)``: ``0 <= w <= p`` and ``sum(w) >= 1 - eps``."""

    weights: np.ndarray
    reference: np.ndarray
    epsilon: float

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        ref = np.array(self.reference, dtype=np.float64)
        if w.shape != ref.shape:
            raise AlphabetMismatchError("sub-weighting and reference differ in shape")
        w.setflags(write=False)
        ref.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "reference", ref)

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    @property
    def support(self) -> np.ndarray:
        return self.weights > 0

    def is_valid(self, tol: float = NORM_TOL) -> bool:
        return bool(
            np.all(self.weights >= 0)
            and np.all(self.weights <= self.reference + tol)
            and self.total >= 1.0 - self.epsilon - tol
        )


def _masses(d) -> np.ndarray:
    return d.masses if isinstance(d, (FiniteDist, JointDist)) else np.asarray(d, dtype=np.float64)


def l1_distance(a, b) -> float:
    """``sum_i |a(i) - b(i)|`` on a shared alphabet (values in ``[0, 2]``)."""
    ma, mb = _masses(a), _masses(b)
    if ma.shape != mb.shape:
        raise AlphabetMismatchError(f"alphabet shapes differ: {ma.shape} vs {mb.shape}")
    return float(np.abs(ma - mb).sum())


def marginals_and_conditional(j: JointDist) -> tuple[FiniteDist, FiniteDist, Kernel]:
    """Row marginal, column marginal and the column-given-row kernel."""
    row = j.row_marginal()
    col = j.col_marginal()
    present = row.masses > 0
    rows = np.zeros_like(j.masses)
    rows[present] = j.masses[present] / row.masses[present, None]
    return row, col, Kernel(rows, present)


def sample(d: FiniteDist, rng: np.random.Generator) -> int:
    """One inverse-CDF draw."""
    return int(sample_many(d, rng, 1)[0])


def sample_many(d: FiniteDist, rng: np.random.Generator, size) -> np.ndarray:
    """Vectorized inverse-CDF draws; never returns a zero-mass symbol."""
    cdf = np.cumsum(d.masses)
    u = rng.random(size)
    idx = np.searchsorted(cdf, u, side="right")
    # u can exceed cdf[-1] by rounding; fall back to the last positive atom
    last = int(np.flatnonzero(d.masses > 0)[-1])
    return np.minimum(idx, last)


def entropy(d) -> float:
    """Shannon entropy in bits of a FiniteDist, JointDist or mass array."""
    m = _masses(d).ravel()
    m = m[m > 0]
    return float(-(m * log2(m)).sum())


@dataclass(frozen=True)
class ShannonQuantities:
    h_x: float
    h_y: float
    h_xy: float
    h_x_given_y: float
    h_y_given_x: float
    i_xy: float


def shannon_quantities(j: JointDist) -> ShannonQuantities:
    """Entropies of ``p_{XY}`` with ``X`` on rows; conditionals via the chain rule."""
    h_x = entropy(j.row_marginal())
    h_y = entropy(j.col_marginal())
    h_xy = entropy(j)
    return ShannonQuantities(
        h_x=h_x,
        h_y=h_y,
        h_xy=h_xy,
        h_x_given_y=h_xy - h_y,
        h_y_given_x=h_xy - h_x,
        i_xy=h_x + h_y - h_xy,
    )


def check_support(p, q) -> None:
    mp, mq = _masses(p), _masses(q)
    if mp.shape != mq.shape:
        raise AlphabetMismatchError(f"alphabet shapes differ: {mp.shape} vs {mq.shape}")
    if np.any((mp > 0) & (mq <= 0)):
        raise SupportError("Supp(P) is not contained in Supp(Q)")


def kl_divergence(p, q) -> float:
    """Relative entropy ``D(P||Q)`` in bits."""
    check_support(p, q)
    mp, mq = _masses(p).ravel(), _masses(q).ravel()
    s = mp > 0
    return float((mp[s] * (log2(mp[s]) - log2(mq[s]))).sum())


# --------------------------------------------------------------------------- files


def _check_total(arr: np.ndarray, renormalize: bool, path) -> np.ndarray:
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValidationError(f"{path}: masses must be finite and nonnegative")
    total = float(arr.sum())
    if total <= 0:
        raise ValidationError(f"{path}: masses sum to zero")
    if abs(total - 1.0) > FILE_TOL and not renormalize:
        raise ValidationError(
            f"{path}: masses sum to {total:.12g}; fix the file or pass --renormalize"
        )
    return arr / total


def _read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top-level value must be an object")
    return data


@dataclass(frozen=True, eq=False)
class LabeledDist:
    """A distribution read from disk plus its string labels."""

    dist: FiniteDist | JointDist
    labels: tuple[list[str], ...]


def parse_dist(data: dict, renormalize: bool = False, source="<data>") -> LabeledDist:
    """Decode the JSON schema for a FiniteDist or a JointDist."""
    if "alphabet" in data:
        arr = np.array(data.get("masses"), dtype=np.float64)
        labels = [str(a) for a in data["alphabet"]]
        if arr.ndim != 1 or arr.shape[0] != len(labels):
            raise ValidationError(f"{source}: 'masses' must be a list matching 'alphabet'")
        return LabeledDist(FiniteDist(_check_total(arr, renormalize, source)), (labels,))
    if "rows" in data and "cols" in data:
        arr = np.array(data.get("masses"), dtype=np.float64)
        rows = [str(a) for a in data["rows"]]
        cols = [str(a) for a in data["cols"]]
        if arr.ndim != 2 or arr.shape != (len(rows), len(cols)):
            raise ValidationError(f"{source}: 'masses' must be a rows x cols matrix")
        return LabeledDist(JointDist(_check_total(arr, renormalize, source)), (rows, cols))
    raise ValidationError(f"{source}: expected keys 'alphabet' or 'rows'/'cols'")


def load_dist(path, renormalize: bool = False) -> LabeledDist:
    return parse_dist(_read_json(path), renormalize, path)


def dump_dist(dist, path, labels=None) -> None:
    if isinstance(dist, FiniteDist):
        alphabet = labels[0] if labels else [str(i) for i in range(dist.alphabet_size)]
        data = {"alphabet": alphabet, "masses": dist.masses.tolist()}
    else:
        r, c = dist.shape
        rows, cols = labels if labels else ([str(i) for i in range(r)], [str(i) for i in range(c)])
        data = {"rows": rows, "cols": cols, "masses": dist.masses.tolist()}
    Path(path).write_text(json.dumps(data, indent=2), encoding="utf-8")


def load_kernel(path, renormalize: bool = False) -> Kernel:
    """Kernel file: same schema as a joint, each row a distribution over columns."""
    data = _read_json(path)
    arr = np.array(data.get("masses"), dtype=np.float64)
    if arr.ndim != 2 or "rows" not in data or "cols" not in data:
        raise ValidationError(f"{path}: kernel needs 'rows', 'cols' and a 'masses' matrix")
    rows = [_check_total(r, renormalize, f"{path} row {i}") for i, r in enumerate(arr)]
    return Kernel.from_matrix(np.array(rows))


def load_table(path) -> np.ndarray:
    """Distortion table file ``{"rows": [...], "cols": [...], "values": [[...]]}``."""
    data = _read_json(path)
    arr = np.array(data.get("values"), dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"{path}: 'values' must be a matrix")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValidationError(f"{path}: distortion values must be finite and nonnegative")
    return arr


def require_eps(eps: float, lo_open: bool = False, name: str = "eps") -> float:
    """Validate ``eps`` in ``[0, 1)`` (or ``(0, 1)`` when ``lo_open``)."""
    eps = float(eps)
    ok = (0.0 < eps < 1.0) if lo_open else (0.0 <= eps < 1.0)
    if not ok or math.isnan(eps):
        interval = "(0, 1)" if lo_open else "[0, 1)"
        raise ParameterError(f"{name}={eps!r} is outside {interval}")
    return eps
