"""Command-line front end.

Every subcommand is deterministic for a fixed ``--seed``: trial ``t`` draws
from the stream ``SeedSequence([seed, t])`` regardless of ``--threads``.
Numbers are written with 12 significant digits.

Exit codes: 0 success, 2 invalid input or parameters, 3 resource budget
exceeded, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

from . import asymptotics, binning, helper, rate_distortion, smooth
from .errors import AlphabetMismatchError, ResourceError, ValidationError
from .prob import FiniteDist, JointDist, kl_divergence, load_dist, load_kernel, load_table

EXIT_OK, EXIT_VALIDATION, EXIT_RESOURCE, EXIT_IO = 0, 2, 3, 4

SW_COLUMNS = ["seed", "ellA", "ellB", "exact_error", "E1", "E2", "E3", "E4"]
HELPER_COLUMNS = {
    "A": ["seed", "scheme", "ellA", "ellB", "measured_error", "E1", "E1c_E2", "E3"],
    "B": [
        "seed", "scheme", "ellA", "ellB", "measured_error", "total_rejection",
        "budget_binning", "budget_u_prime_l1", "budget_sampler_l1", "budget_total",
    ],
}
RD_COLUMNS = ["seed", "ellA", "gamma", "excess_prob", "i_inf", "avg_bound"]
CONVERGE_COLUMNS = ["n", "value", "reference", "gap"]


@dataclass
class ExperimentConfig:
    command: str
    seed: int = 0
    out: str | None = None
    renormalize: bool = False
    threads: int = 1
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.threads < 1:
            raise ValidationError("--threads must be at least 1")
        trials = self.params.get("trials")
        if trials is not None and trials < 1:
            raise ValidationError("--trials must be at least 1")


def fmt(v) -> str:
    if isinstance(v, (bool, str)) or v is None:
        return str(v)
    if isinstance(v, int):
        return str(v)
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".12g")


def _num(v):
    """Round to 12 significant digits for JSON output."""
    if v is None or isinstance(v, int) or not math.isfinite(v):
        return v
    return float(format(v, ".12g"))


def to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns])
    return buf.getvalue()


# ----------------------------------------------------------------- subcommands


def _load(cfg, key):
    return load_dist(cfg.params[key], cfg.renormalize).dist


def _joint(cfg, key="joint") -> JointDist:
    d = _load(cfg, key)
    if not isinstance(d, JointDist):
        raise ValidationError(f"{cfg.params[key]}: expected a joint distribution")
    return d


def _finite(cfg, key) -> FiniteDist:
    d = _load(cfg, key)
    if not isinstance(d, FiniteDist):
        raise ValidationError(f"{cfg.params[key]}: expected a single-variable distribution")
    return d


def cmd_smooth(cfg: ExperimentConfig) -> str:
    p = cfg.params
    eps, quantity = p["eps"], p["quantity"]
    d = _load(cfg, "dist")
    witness_mass = None
    if quantity == "h0":
        res = smooth.smooth_h0(d, eps)
    elif quantity == "h0cond":
        if not isinstance(d, JointDist):
            raise ValidationError("h0cond needs a joint distribution")
        res = smooth.smooth_h0_cond(d, eps, given=p["given"])
    elif quantity == "dinf":
        if not p.get("q"):
            raise ValidationError("dinf needs --q FILE")
        q = _load(cfg, "q")
        if q.masses.shape != d.masses.shape:
            raise AlphabetMismatchError(f"P has shape {d.masses.shape} but Q has {q.masses.shape}")
        res = smooth.smooth_d_inf(d, q, eps)
    elif quantity == "iinf":
        if not isinstance(d, JointDist):
            raise ValidationError("iinf needs a joint distribution")
        res = smooth.smooth_i_inf(d, eps)
    else:  # quantile
        if not isinstance(d, JointDist) or not p.get("distortion"):
            raise ValidationError("quantile needs a joint distribution and --distortion FILE")
        value = smooth.max_distortion_quantile(d, load_table(p["distortion"]), eps)
        return json.dumps({"value_bits": _num(value), "eps": eps, "witness_total_mass": None}, sort_keys=True) + "\n"
    value, witness_mass = res.value, res.witness.total
    out = {"value_bits": _num(value), "eps": eps, "witness_total_mass": _num(witness_mass)}
    return json.dumps(out, sort_keys=True) + "\n"


def cmd_sw(cfg: ExperimentConfig) -> str:
    p = cfg.params
    rows = binning.sw_sweep(
        _joint(cfg), p["eps"], p["trials"], cfg.seed, p.get("ellA"), p.get("ellB"), cfg.threads
    )
    return to_csv(rows, SW_COLUMNS)


def cmd_helper(cfg: ExperimentConfig) -> str:
    p = cfg.params
    inst = helper.HelperInstance(_joint(cfg), load_kernel(p["kernel"], cfg.renormalize))
    scheme, ea, eb = p["scheme"], p["epsA"], p["epsB"]
    eps = p.get("eps")
    if eps is None:
        eps = ea + eb if scheme == "A" else 2 * ea + 4 * eb
    rows = helper.helper_sweep(
        inst, scheme, eps, ea, eb, p["trials"], cfg.seed,
        eps_b_bar=p.get("epsBbar"), ell_a=p.get("ellA"), ell_b=p.get("ellB"), threads=cfg.threads,
    )
    if scheme == "B":
        budget = helper.helper_b_budget(ea, eb)
        for r in rows:
            r.update({f"budget_{k}": v for k, v in budget.items()})
    return to_csv(rows, HELPER_COLUMNS[scheme])


def cmd_rd(cfg: ExperimentConfig) -> str:
    p = cfg.params
    j = _joint(cfg)
    dt = rate_distortion.DistortionTable(load_table(p["distortion"]))
    rows = rate_distortion.rd_sweep(j, dt, p["eps"], p["eps1"], p["trials"], cfg.seed, p.get("ellA"), cfg.threads)
    return to_csv(rows, RD_COLUMNS)


def cmd_converge(cfg: ExperimentConfig) -> str:
    p = cfg.params
    q, eps, nmax = p["quantity"], p["eps"], p["nmax"]
    if q == "h0cond":
        pts = asymptotics.convergence_h0_cond(_joint(cfg, "base"), eps, nmax, given=p["given"])
        rows = [{"n": t.n, "value": t.value, "reference": t.reference, "gap": t.gap} for t in pts]
    else:
        if not p.get("base2"):
            raise ValidationError(f"{q} needs --base2 FILE (the reference distribution Q)")
        P, Q = _finite(cfg, "base"), _finite(cfg, "base2")
        if P.alphabet_size != Q.alphabet_size:
            raise AlphabetMismatchError("P and Q must share an alphabet")
        if q == "dinf":
            pts = asymptotics.convergence_d_inf(P, Q, eps, nmax)
            rows = [{"n": t.n, "value": t.value, "reference": t.reference, "gap": t.gap} for t in pts]
        else:
            ref = kl_divergence(P, Q)
            rows = []
            for n in range(1, nmax + 1):
                v = asymptotics.info_spectrum_quantile(P, Q, eps, n)
                rows.append({"n": n, "value": v, "reference": ref, "gap": v - ref})
    return to_csv(rows, CONVERGE_COLUMNS)


COMMANDS = {
    "smooth": cmd_smooth,
    "sw-sim": cmd_sw,
    "helper-sim": cmd_helper,
    "rd-sim": cmd_rd,
    "converge": cmd_converge,
}


def run(cfg: ExperimentConfig) -> str:
    """Execute one subcommand and return its output text."""
    return COMMANDS[cfg.command](cfg)


# ---------------------------------------------------------------------- parser


def _globals(parser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=d(0), help="master seed (default 0)")
    parser.add_argument("--out", default=d(None), help="output file (default stdout)")
    parser.add_argument("--renormalize", action="store_true", default=d(False),
                        help="divide input masses by their total instead of rejecting")
    parser.add_argument("--threads", type=int, default=d(1), help="worker threads for sweeps")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="smoothrenyi", description="Smooth Renyi quantities and one-shot source coding experiments.")
    _globals(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("smooth", help="compute one smoothed quantity")
    s.add_argument("--dist", required=True, help="distribution or joint file")
    s.add_argument("--quantity", required=True, choices=["h0", "h0cond", "dinf", "iinf", "quantile"])
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--q", help="reference distribution for dinf")
    s.add_argument("--given", choices=["col", "row"], default="col",
                   help="conditioning side for h0cond (col: H[rows|cols])")
    s.add_argument("--distortion", help="distortion table for quantile")

    s = sub.add_parser("sw-sim", help="Slepian-Wolf random binning sweep")
    s.add_argument("--joint", required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--ellA", type=int)
    s.add_argument("--ellB", type=int)

    s = sub.add_parser("helper-sim", help="coded side information schemes")
    s.add_argument("--joint", required=True)
    s.add_argument("--kernel", required=True, help="channel p(u|y), one row per y")
    s.add_argument("--scheme", choices=["A", "B"], required=True)
    s.add_argument("--epsA", type=float, required=True)
    s.add_argument("--epsB", type=float, required=True)
    s.add_argument("--epsBbar", type=float)
    s.add_argument("--eps", type=float, help="overall target (default: the scheme's error budget)")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--ellA", type=int)
    s.add_argument("--ellB", type=int)

    s = sub.add_parser("rd-sim", help="max-distortion lossy coding sweep")
    s.add_argument("--joint", required=True, help="test channel joint p(x, y)")
    s.add_argument("--distortion", required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--eps1", type=float, required=True)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--ellA", type=int)

    s = sub.add_parser("converge", help="finite-n convergence experiments")
    s.add_argument("--base", required=True)
    s.add_argument("--base2")
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--nmax", type=int, required=True)
    s.add_argument("--quantity", choices=["h0cond", "dinf", "spectrum"], required=True)
    s.add_argument("--given", choices=["col", "row"], default="col")

    for p in sub.choices.values():
        _globals(p, suppress=True)
    return ap


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    params = {k: v for k, v in vars(ns).items() if k not in ("command", "seed", "out", "renormalize", "threads")}
    return ExperimentConfig(ns.command, ns.seed, ns.out, ns.renormalize, ns.threads, params)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        text = run(cfg)
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
