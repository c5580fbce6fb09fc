"""Source coding with a helper: the decoder wants ``X`` and gets coded side information from ``Y``.

Two schemes are realized:

* **Scheme A** (covering): Bob quantizes ``y`` to the first codeword ``u(k)``
  of a random ``p_U`` codebook with ``(u(k), y)`` in the set ``F`` of pairs
  whose conditional "bad mass" is at most ``sqrt(eps_A)``; Alice bins ``x``;
  Charlie decodes ``x`` against ``u(k)``.
* **Scheme B** (simulation): ``U`` is replaced by a close surrogate ``U'`` of
  bounded max divergence, and Bob lets Charlie sample ``U'`` from shared
  randomness by rejection sampling; Alice's binning is decoded against the
  simulated value.

Joints built from a :class:`HelperInstance` keep the source first: ``p_{XU}``
has ``X`` on rows, ``p_{YU}`` has ``Y`` on rows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .binning import (
    AuditRecord,
    BinAssignment,
    ErrorReport,
    SideInfoCode,
    _audit,
    ceil_bits,
)
from .errors import AlphabetMismatchError, ParameterError, SupportError
from .prob import (
    FiniteDist,
    JointDist,
    Kernel,
    SubWeighting,
    l1_distance,
    ln,
    log2,
    require_eps,
    sample_many,
)
from .seeding import map_trials
from .smooth import d_inf, smooth_h0_cond, smooth_i_inf


@dataclass(frozen=True, eq=False)
class HelperInstance:
    """``p_{XY}`` together with an auxiliary channel ``p_{U|Y}`` (so X - Y - U)."""

    joint_xy: JointDist
    kernel_u_given_y: Kernel

    def __post_init__(self):
        if self.kernel_u_given_y.shape[0] != self.joint_xy.shape[1]:
            raise AlphabetMismatchError("kernel must have one row per Y symbol")

    @property
    def p_xyu(self) -> np.ndarray:
        return self.joint_xy.masses[:, :, None] * self.kernel_u_given_y.rows[None, :, :]

    @property
    def p_y(self) -> FiniteDist:
        return self.joint_xy.col_marginal()

    @property
    def p_u(self) -> FiniteDist:
        return FiniteDist(self.p_xyu.sum(axis=(0, 1)))

    def joint_xu(self) -> JointDist:
        return JointDist(self.p_xyu.sum(axis=1))

    def joint_yu(self) -> JointDist:
        return JointDist(self.p_xyu.sum(axis=0))

    def p_x_given_y(self) -> np.ndarray:
        """``p(x|y)`` as an ``(nx, ny)`` matrix; columns with ``p_Y(y) = 0`` are zero."""
        py = self.p_y.masses
        out = np.zeros_like(self.joint_xy.masses)
        s = py > 0
        out[:, s] = self.joint_xy.masses[:, s] / py[s]
        return out


# ------------------------------------------------------------------- scheme A


@dataclass(frozen=True, eq=False)
class FSet:
    g: np.ndarray  # (nu, ny)
    member: np.ndarray  # (nu, ny) bool
    threshold: float


def build_F_set(inst: HelperInstance, q_xu: SubWeighting, eps_a: float) -> FSet:
    """Pairs ``(u, y)`` whose conditional mass outside ``Supp(q)`` is at most ``sqrt(eps_a)``.

    ``g(u, y) = sum over x with q(x, u) = 0 of p(x | y)``.
    """
    eps_a = require_eps(eps_a, lo_open=True, name="eps_a")
    outside = (q_xu.weights <= 0).astype(np.float64)  # (nx, nu)
    g = outside.T @ inst.p_x_given_y()
    thr = math.sqrt(eps_a)
    return FSet(g, g <= thr, thr)


@dataclass(frozen=True)
class HelperRateBounds:
    ell_a_min: int
    ell_b_min: int
    h0_x_given_u: float
    i_inf_u_y: float
    i_inf_nonnegative: bool = True


def _check_scheme_a(eps, eps_a, eps_b, eps_b_bar):
    eps = require_eps(eps, lo_open=True)
    eps_a = require_eps(eps_a, lo_open=True, name="eps_a")
    eps_b = require_eps(eps_b, lo_open=True, name="eps_b")
    eps_b_bar = require_eps(eps_b_bar, name="eps_b_bar")
    if eps_a + eps_b > eps:
        raise ParameterError(f"need eps_a + eps_b <= eps, got {eps_a} + {eps_b} > {eps}")
    slack = eps_b - eps_b_bar - 2.0 * math.sqrt(eps_a)
    if not 0.0 < slack < 1.0:
        raise ParameterError(
            f"need 0 < eps_b - eps_b_bar - 2 sqrt(eps_a) < 1, got {slack!r}"
        )
    return eps, eps_a, eps_b, eps_b_bar, slack


def helper_a_rate_bounds(inst: HelperInstance, eps, eps_a, eps_b, eps_b_bar) -> HelperRateBounds:
    """Covering-scheme thresholds.

    ``ell_A >= H_0^{eps_a}[X|U] - log(eps - eps_b)`` and
    ``ell_B >= I_inf^{eps_b_bar}[U;Y] + log(-ln(eps_b - eps_b_bar - 2 sqrt(eps_a)))``.
    A negative smoothed information is reported through ``i_inf_nonnegative``;
    the error analysis does not use its sign, and ``ell_B`` is floored at 0.
    """
    eps, eps_a, eps_b, eps_b_bar, slack = _check_scheme_a(eps, eps_a, eps_b, eps_b_bar)
    h = smooth_h0_cond(inst.joint_xu(), eps_a, given="col").value
    i = smooth_i_inf(inst.joint_yu(), eps_b_bar).value
    ell_a = ceil_bits(h - float(log2(eps - eps_b)))
    ell_b = max(0, ceil_bits(i + float(log2(-ln(slack)))))
    return HelperRateBounds(ell_a, ell_b, h, i, i >= 0)


@dataclass(frozen=True, eq=False)
class HelperCodeA:
    bins: BinAssignment
    codebook: np.ndarray  # u(k), k = 0..2^ell_b - 1
    enc_b: np.ndarray  # message index per y
    q: SubWeighting
    F: FSet

    @property
    def ell_a(self) -> int:
        return self.bins.ell

    @property
    def ell_b(self) -> int:
        return int(round(math.log2(self.codebook.size)))

    def u_hat(self) -> np.ndarray:
        return self.codebook[self.enc_b]


def _cover_encoder(codebook: np.ndarray, member: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Smallest ``k`` with ``(u(k), y)`` in F for each y (0 if none) and the found flags."""
    hit = member[codebook, :]  # (K, ny)
    found = hit.any(axis=0)
    return np.where(found, hit.argmax(axis=0), 0), found


def helper_a_error(code: HelperCodeA, inst: HelperInstance) -> ErrorReport:
    """Exact error of a fixed covering code, with the three analysis terms.

    ``E1``: no codeword is F-compatible with ``y``. ``E1c_E2``: a codeword was
    found but ``(x, u(k))`` is outside ``Supp(q)``. ``E3``: another member of
    ``x``'s bin is compatible with ``u(k)``. The true error is bounded by the
    sum.
    """
    _, found = _cover_encoder(code.codebook, code.F.member)
    u_hat = code.u_hat()
    table = SideInfoCode(code.bins, code.q).decode_table()  # (nx, nu)
    nx, ny = inst.joint_xy.shape
    xs = np.arange(nx)[:, None]
    out = table[xs, u_hat[None, :]]  # (nx, ny)
    p = inst.joint_xy.masses
    wrong = out != xs
    qpos = code.q.weights > 0
    in_q = qpos[xs, u_hat[None, :]]
    pos = qpos.astype(np.int64)
    g, ng = code.bins.groups()
    cnt = np.zeros((ng, pos.shape[1]), dtype=np.int64)
    np.add.at(cnt, g, pos)
    others = cnt[g][:, u_hat] - in_q.astype(np.int64)
    events = {
        "E1": float(inst.p_y.masses[~found].sum()),
        "E1c_E2": float(p[found[None, :] & ~in_q].sum()),
        "E3": float(p[others > 0].sum()),
    }
    return ErrorReport(float(p[wrong].sum()), events=events)


def helper_scheme_A(
    inst: HelperInstance,
    ell_a: int,
    ell_b: int,
    eps: float,
    eps_a: float,
    eps_b: float,
    eps_b_bar: float,
    rng,
) -> tuple[HelperCodeA, ErrorReport]:
    """Draw one covering code and return it with its exact error."""
    _check_scheme_a(eps, eps_a, eps_b, eps_b_bar)
    q = smooth_h0_cond(inst.joint_xu(), eps_a, given="col").witness
    F = build_F_set(inst, q, eps_a)
    bins = BinAssignment.random(inst.joint_xy.shape[0], ell_a, rng)
    codebook = sample_many(inst.p_u, rng, 2**ell_b)
    enc_b, _ = _cover_encoder(codebook, F.member)
    code = HelperCodeA(bins, codebook, enc_b, q, F)
    return code, helper_a_error(code, inst)


# ------------------------------------------------------------- U' construction


@dataclass(frozen=True, eq=False)
class UPrime:
    kernel: Kernel  # p_{U'|Y}, rows = y
    alpha: np.ndarray  # per-y deficiency; nan where p_Y(y) = 0
    l1: float  # ||p_UY - p_U'Y||
    d_inf: float  # D_inf(p_U'Y || p_U x p_Y)
    i_inf: float  # I_inf^eps[U;Y] of the original pair
    joint_yu: JointDist  # p_{YU'}


def build_u_prime(inst: HelperInstance, eps: float) -> UPrime:
    """Surrogate channel built from the optimizer ``phi`` of ``I_inf^eps[U;Y]``.

    For each ``y`` with deficiency ``alpha_y <= 1/2`` the row is ``phi(., y)``
    renormalized; otherwise it falls back to ``p_U``.
    """
    eps = require_eps(eps)
    j_yu = inst.joint_yu()
    res = smooth_i_inf(j_yu, eps)
    phi = res.witness.weights  # (ny, nu)
    py = inst.p_y.masses
    pu = inst.p_u.masses
    present = py > 0
    alpha = np.full(py.shape, np.nan)
    alpha[present] = 1.0 - phi[present].sum(axis=1) / py[present]
    rows = np.zeros_like(phi)
    use_phi = present & (alpha <= 0.5)
    rows[use_phi] = phi[use_phi] / phi[use_phi].sum(axis=1, keepdims=True)
    # rows the smoothing left alone keep the original channel bit for bit
    untouched = use_phi & np.all(phi == j_yu.masses, axis=1)
    rows[untouched] = inst.kernel_u_given_y.rows[untouched]
    alpha[untouched] = 0.0
    fallback = present & ~use_phi
    rows[fallback] = pu
    kernel = Kernel(rows, present)
    j_new = JointDist(py[:, None] * rows)
    prod = np.outer(py, pu)
    return UPrime(
        kernel=kernel,
        alpha=alpha,
        l1=l1_distance(j_yu, j_new),
        d_inf=d_inf(j_new, prod),
        i_inf=res.value,
        joint_yu=j_new,
    )


# ---------------------------------------------------------- rejection sampling


@dataclass(frozen=True, eq=False)
class RejectionSampler:
    """Accept/reject chain simulating ``q`` from ``L`` shared draws of ``p_U``.

    A draw ``u`` paired with a uniform ``z`` is accepted iff
    ``z <= 2^{-D} q(u) / p_U(u)`` with ``D = D_inf(q || p_U)``; the message is
    the first accepted position.
    """

    base: FiniteDist
    L: int
    dinf_value: float

    def __post_init__(self):
        if self.L < 1:
            raise ParameterError(f"L must be a positive integer, got {self.L}")

    @classmethod
    def for_target(cls, base: FiniteDist, q: FiniteDist, L: int) -> "RejectionSampler":
        return cls(base, int(L), target_dinf(q, base))

    @property
    def acceptance_prob(self) -> float:
        return float(2.0 ** (-self.dinf_value))

    def thresholds(self, q: FiniteDist) -> np.ndarray:
        """Per-symbol acceptance probability ``2^{-D} q(u)/p_U(u)``."""
        pu = self.base.masses
        out = np.zeros_like(pu)
        s = pu > 0
        out[s] = self.acceptance_prob * q.masses[s] / pu[s]
        return np.minimum(out, 1.0)


def target_dinf(q: FiniteDist, base: FiniteDist) -> float:
    if np.any((q.masses > 0) & (base.masses <= 0)):
        raise SupportError("Supp(q) must be contained in Supp(p_U)")
    return max(0.0, d_inf(q, base))


@dataclass(frozen=True, eq=False)
class SharedRandomness:
    """One realization ``R = ((U_1, Z_1), ..., (U_L, Z_L))``."""

    u: np.ndarray
    z: np.ndarray

    @classmethod
    def draw(cls, base: FiniteDist, L: int, rng) -> "SharedRandomness":
        return cls(sample_many(base, rng, L), rng.random(L))


def rejection_index(thr: np.ndarray, shared: SharedRandomness) -> tuple[int, bool]:
    """Zero-based index of the first acceptance; ``(0, False)`` on total rejection."""
    acc = shared.z <= thr[shared.u]
    if not acc.any():
        return 0, False
    return int(acc.argmax()), True


@dataclass(frozen=True)
class RejectionOutcome:
    value: int
    index: int
    accepted: bool


def rejection_encode_decode(s: RejectionSampler, q: FiniteDist, rng) -> RejectionOutcome:
    """Run the chain once on fresh shared randomness and decode ``V = U_i``."""
    target_dinf(q, s.base)
    shared = SharedRandomness.draw(s.base, s.L, rng)
    idx, ok = rejection_index(s.thresholds(q), shared)
    return RejectionOutcome(int(shared.u[idx]), idx, ok)


def simulate_rejection(s: RejectionSampler, q: FiniteDist, rng, trials: int, chunk: int = 4096):
    """Vectorized repetition of :func:`rejection_encode_decode`.

    Returns ``(values, index)`` where ``index == L`` marks total rejection.
    """
    target_dinf(q, s.base)
    thr = s.thresholds(q)
    values = np.empty(trials, dtype=np.int64)
    index = np.empty(trials, dtype=np.int64)
    step = max(1, min(chunk, (1 << 22) // s.L))
    for start in range(0, trials, step):
        n = min(step, trials - start)
        u = sample_many(s.base, rng, (n, s.L))
        z = rng.random((n, s.L))
        acc = z <= thr[u]
        any_acc = acc.any(axis=1)
        first = np.where(any_acc, acc.argmax(axis=1), s.L)
        pick = np.where(any_acc, first, 0)
        values[start : start + n] = u[np.arange(n), pick]
        index[start : start + n] = first
    return values, index


@dataclass(frozen=True)
class ClaimFrequencies:
    """Empirical statistics of single ``(U, Z)`` draws and their exact counterparts."""

    trials: int
    u_counts: np.ndarray
    accept_given_u: np.ndarray  # empirical Pr[B=1 | U=u] (nan where u unseen)
    accept_rate: float  # empirical Pr[B=1]
    accepted_law: np.ndarray  # empirical Pr[U=u | B=1]
    exact_accept_given_u: np.ndarray
    exact_accept_rate: float


def rejection_claim_frequencies(s: RejectionSampler, q: FiniteDist, rng, trials: int) -> ClaimFrequencies:
    target_dinf(q, s.base)
    thr = s.thresholds(q)
    u = sample_many(s.base, rng, trials)
    b = rng.random(trials) <= thr[u]
    n = s.base.alphabet_size
    cnt = np.bincount(u, minlength=n)
    acc = np.bincount(u[b], minlength=n)
    with np.errstate(invalid="ignore", divide="ignore"):
        given_u = acc / cnt
    law = acc / max(1, int(b.sum()))
    return ClaimFrequencies(trials, cnt, given_u, float(b.mean()), law, thr, s.acceptance_prob)


def rejection_exact_law(s: RejectionSampler, q: FiniteDist) -> tuple[FiniteDist, float]:
    """Exact law of ``V`` and the total-rejection probability ``rho``.

    ``rho = (1 - 2^{-D})^L`` and on total rejection ``V = U_1`` follows the
    rejected law ``r(u) = p_U(u)(1 - thr(u)) / (1 - 2^{-D})``, so
    ``p_V = (1 - rho) q + rho r``.
    """
    target_dinf(q, s.base)
    a = s.acceptance_prob
    if a >= 1.0:
        return FiniteDist(q.masses), 0.0
    rho = float((1.0 - a) ** s.L)
    r = s.base.masses * (1.0 - s.thresholds(q)) / (1.0 - a)
    pv = (1.0 - rho) * q.masses + rho * r
    return FiniteDist(pv / pv.sum()), rho


def rejection_l1_bound(s: RejectionSampler) -> float:
    """``2 exp(-L 2^{-D})``."""
    return float(2.0 * math.exp(-s.L * s.acceptance_prob))


# ------------------------------------------------------------------- scheme B


@dataclass(frozen=True)
class HelperBRateBounds:
    ell_a_min: int
    ell_b_min: int
    h0_x_given_u: float
    i_inf_u_y: float


def _check_scheme_b(eps, eps_a, eps_b):
    eps = require_eps(eps, lo_open=True)
    eps_a = require_eps(eps_a, lo_open=True, name="eps_a")
    eps_b = require_eps(eps_b, lo_open=True, name="eps_b")
    if 2 * eps_a + 4 * eps_b > eps + 1e-15:
        raise ParameterError(f"need 2 eps_a + 4 eps_b <= eps, got {2 * eps_a + 4 * eps_b} > {eps}")
    return eps, eps_a, eps_b


def helper_b_rate_bounds(inst: HelperInstance, eps, eps_a, eps_b) -> HelperBRateBounds:
    """``ell_A >= H_0^{eps_a}[X|U] + log(1/eps_a)``, ``ell_B >= max{0, I_inf^{eps_b}[U;Y] + 1} + log ln(1/eps_b)``."""
    eps, eps_a, eps_b = _check_scheme_b(eps, eps_a, eps_b)
    h = smooth_h0_cond(inst.joint_xu(), eps_a, given="col").value
    i = smooth_i_inf(inst.joint_yu(), eps_b).value
    ell_a = ceil_bits(h - float(log2(eps_a)))
    ell_b = max(0, ceil_bits(max(0.0, i + 1.0) + float(log2(ln(1.0 / eps_b)))))
    return HelperBRateBounds(ell_a, ell_b, h, i)


@dataclass(frozen=True, eq=False)
class HelperCodeB:
    side: SideInfoCode  # Alice's binning and the X|U decoder
    u_prime: UPrime
    shared: SharedRandomness
    enc_b: np.ndarray  # message index per y for this realization of R
    v_of_y: np.ndarray  # Charlie's simulated U for each y
    accepted: np.ndarray  # per y, whether some draw was accepted

    @property
    def ell_a(self) -> int:
        return self.side.ell_a

    @property
    def ell_b(self) -> int:
        return int(round(math.log2(self.shared.u.size)))


def helper_b_error(code: HelperCodeB, inst: HelperInstance) -> ErrorReport:
    """Exact ``Pr{X != X'}`` for one fixed realization of bins and shared randomness."""
    table = code.side.decode_table()
    nx = inst.joint_xy.shape[0]
    xs = np.arange(nx)[:, None]
    wrong = table[xs, code.v_of_y[None, :]] != xs
    p = inst.joint_xy.masses
    rejected = float(inst.p_y.masses[~code.accepted].sum())
    return ErrorReport(float(p[wrong].sum()), events={"total_rejection": rejected})


def helper_scheme_B(
    inst: HelperInstance,
    ell_a: int,
    ell_b: int,
    eps: float,
    eps_a: float,
    eps_b: float,
    rng,
) -> tuple[HelperCodeB, ErrorReport]:
    """Draw bins and one shared-randomness realization; return the code and its exact error."""
    _check_scheme_b(eps, eps_a, eps_b)
    q = smooth_h0_cond(inst.joint_xu(), eps_a, given="col").witness
    side = SideInfoCode(BinAssignment.random(inst.joint_xy.shape[0], ell_a, rng), q)
    up = build_u_prime(inst, eps_b)
    base = inst.p_u
    L = 2**ell_b
    shared = SharedRandomness.draw(base, L, rng)
    ny = inst.joint_xy.shape[1]
    enc_b = np.zeros(ny, dtype=np.int64)
    accepted = np.zeros(ny, dtype=bool)
    for y in range(ny):
        if not up.kernel.present[y]:
            continue
        target = FiniteDist(up.kernel.rows[y])
        sampler = RejectionSampler.for_target(base, target, L)
        enc_b[y], accepted[y] = rejection_index(sampler.thresholds(target), shared)
    v_of_y = shared.u[enc_b]
    code = HelperCodeB(side, up, shared, enc_b, v_of_y, accepted)
    return code, helper_b_error(code, inst)


def helper_b_budget(eps_a: float, eps_b: float) -> dict:
    """Error budget terms: ``2 eps_a`` from binning, half of ``6 eps_b + 2 eps_b`` from simulation."""
    return {
        "binning": 2.0 * eps_a,
        "u_prime_l1": 6.0 * eps_b,
        "sampler_l1": 2.0 * eps_b,
        "total": 2.0 * eps_a + 0.5 * (6.0 * eps_b + 2.0 * eps_b),
    }


def helper_sweep(inst, scheme, eps, eps_a, eps_b, trials, seed, eps_b_bar=None, ell_a=None, ell_b=None, threads=1):
    """Per-trial exact errors for scheme ``"A"`` or ``"B"``; one dict per trial."""
    if scheme == "A":
        if eps_b_bar is None:
            raise ParameterError("scheme A needs eps_b_bar")
        rb = helper_a_rate_bounds(inst, eps, eps_a, eps_b, eps_b_bar)
    elif scheme == "B":
        rb = helper_b_rate_bounds(inst, eps, eps_a, eps_b)
    else:
        raise ParameterError(f"scheme must be 'A' or 'B', not {scheme!r}")
    la = rb.ell_a_min if ell_a is None else ell_a
    lb = rb.ell_b_min if ell_b is None else ell_b

    def one(t, rng):
        if scheme == "A":
            _, rep = helper_scheme_A(inst, la, lb, eps, eps_a, eps_b, eps_b_bar, rng)
        else:
            _, rep = helper_scheme_B(inst, la, lb, eps, eps_a, eps_b, rng)
        return {"seed": t, "scheme": scheme, "ellA": la, "ellB": lb, "measured_error": rep.error_prob, **rep.events}

    return map_trials(one, seed, trials, threads)


# -------------------------------------------------------------- converse audit


def helper_converse_audit(inst: HelperInstance, ell_a: int, ell_b: int, enc_b, error_prob: float) -> AuditRecord:
    """Check ``ell_A >= H_0^e[X|U]`` and ``ell_B >= I_inf^e[U;Y] + log e`` for ``U = e_B(Y)``.

    ``enc_b`` maps each ``y`` to its message; ``error_prob`` is the code's
    exact error ``e``.
    """
    if error_prob >= 1.0:
        return AuditRecord(True, float(error_prob), {})
    e = max(float(error_prob), 0.0)
    enc_b = np.asarray(enc_b)
    msgs, col = np.unique(enc_b, return_inverse=True)
    onehot = np.zeros((enc_b.size, msgs.size))
    onehot[np.arange(enc_b.size), col] = 1.0
    j_xu = JointDist(inst.joint_xy.masses @ onehot)
    j_uy = JointDist(onehot.T * inst.p_y.masses[None, :])
    h = smooth_h0_cond(j_xu, e, given="col").value
    margins = {"ellA": ell_a - h}
    if e > 0:
        margins["ellB"] = ell_b - (smooth_i_inf(j_uy, e).value + float(log2(e)))
    else:
        margins["ellB"] = math.inf
    return _audit(e, margins)
