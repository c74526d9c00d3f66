"""Command-line front end.

Exit codes: 0 bounded / saturating / no violations, 1 unbounded / growing /
violations, 2 inconclusive, 64 usage error, 65 data error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

from .conditions import bloom_kerman_check, corollary_s2_check, named_kernel, neugebauer_check, _num
from .errors import LGTError, WeightSyntaxError
from .io import (CHAIN_HEADER, CONDITION_HEADER, ESTIMATE_HEADER, NORM_HEADER, format_json,
                 format_step_function, format_table, read_sampled_kernel, read_step_function,
                 write_text)
from .operators import OperatorSpec
from .quadrature import GeometricGrid
from .rearrangement import rearrange
from .verification import estimate_norm_ratio, lg_norm, random_sampled_kernel, verify_theorem_chain
from .weights import LGSpaceSpec, WeightedLpSpec, associated_weight_q, parse_weight

EX_USAGE = 64
EX_DATAERR = 65
VERDICT_CODES = {"bounded": 0, "saturating": 0, "unbounded": 1, "growing": 1, "inconclusive": 2}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EX_USAGE)


@dataclass
class RunConfig:
    command: str
    args: dict = field(default_factory=dict)
    grid: GeometricGrid = field(default_factory=GeometricGrid)
    out: str | None = None
    fmt: str = "json"


def _exponents(p, q=None):
    if not p > 1:
        raise UsageError(f"p must exceed 1, got {p:g}")
    if q is not None and not (q > 1 and p <= q):
        raise UsageError(f"need 1 < p <= q, got p={p:g}, q={q:g}")


def _weight(text):
    try:
        return parse_weight(text)
    except WeightSyntaxError as exc:
        raise UsageError(str(exc)) from None


def _emit(cfg: RunConfig, payload: dict, header, rows) -> None:
    text = format_json(payload) if cfg.fmt == "json" else format_table(header, rows)
    write_text(text, cfg.out, sys.stdout)


def _condition_rows(report):
    return [[c["name"], c["sup"], c["argmax_t"], c["slope_lo"], c["slope_hi"]]
            for c in report.to_dict()["conditions"]]


def cmd_check(cfg: RunConfig) -> int:
    a = cfg.args
    which = a["which"]
    if which == "neugebauer":
        u = _weight(a["u"])
        if not 1 < a["q"]:
            raise UsageError(f"q must exceed 1, got {a['q']:g}")
        if a["v_from_u"]:
            v = associated_weight_q(u, a["q"], cfg.grid)
        elif a["v"]:
            v = _weight(a["v"])
        else:
            raise UsageError("neugebauer needs --v or --v-from-u")
        rep = neugebauer_check(u, v, a["q"], cfg.grid, a["tol"])
    elif which == "bloom-kerman":
        _exponents(a["p"], a["q"])
        ws = [_weight(a[k]) for k in ("t", "u", "v", "w")]
        rep = bloom_kerman_check(named_kernel(a["kernel"]), *ws, a["p"], a["q"], cfg.grid,
                                 form=a["form"])
    else:
        _exponents(a["p"], a["q"])
        rep = corollary_s2_check(_weight(a["phi1"]), _weight(a["phi2"]), a["p"], a["q"], cfg.grid,
                                 form=a["form"])
    _emit(cfg, rep.to_dict(), CONDITION_HEADER, _condition_rows(rep))
    return VERDICT_CODES[rep.verdict]


def cmd_norm(cfg: RunConfig) -> int:
    a = cfg.args
    _exponents(a["p"])
    phi = _weight(a["phi"])
    f = read_step_function(a["f"])
    value = lg_norm(f, LGSpaceSpec(a["p"], phi), cfg.grid)
    _emit(cfg, {"p": a["p"], "weight": str(phi), "norm": _num(value)}, NORM_HEADER,
          [[a["p"], str(phi), value]])
    return 0


def _operator(a) -> OperatorSpec:
    op = a["op"]
    if op == "stieltjes":
        return OperatorSpec("stieltjes")
    if op == "s2":
        return OperatorSpec("s2_exact")
    if op == "s2-logform":
        return OperatorSpec("s2_logform")
    if op == "zero":
        return OperatorSpec.zero()
    if op == "kernel":
        if not a["kernel"]:
            raise UsageError("--op kernel needs --kernel FILE")
        return OperatorSpec("sampled_kernel", read_sampled_kernel(a["kernel"]))
    raise UsageError(f"unknown operator {op!r}")


def cmd_estimate(cfg: RunConfig) -> int:
    a = cfg.args
    q = a["q"] if a["q"] is not None else a["p"]
    _exponents(a["p"], q)
    op = _operator(a)
    src_w, tgt_w = _weight(a["source_weight"]), _weight(a["target_weight"])
    ineq = a["inequality"]
    if a["space"] == "lg" or ineq == "I12":
        source, target = LGSpaceSpec(a["p"], src_w), LGSpaceSpec(q, tgt_w)
    else:
        source, target = WeightedLpSpec(a["p"], src_w), WeightedLpSpec(q, tgt_w)
    est = estimate_norm_ratio(op, source, target, ineq, a["samples"], cfg.grid, seed=a["seed"],
                              family=a["family"])
    payload = est.to_dict()
    payload["operator"] = op.label
    _emit(cfg, payload, ESTIMATE_HEADER, [[s, r] for s, r in est.ratio_by_scale])
    return VERDICT_CODES[est.verdict]


def cmd_rearrange(cfg: RunConfig) -> int:
    fs = rearrange(read_step_function(cfg.args["f"]))
    if cfg.fmt == "json":
        text = format_json({"knots": fs.knots.tolist(), "values": fs.values.tolist()})
    else:
        text = format_step_function(fs)
    write_text(text, cfg.out, sys.stdout)
    return 0


def cmd_chain(cfg: RunConfig) -> int:
    a = cfg.args
    _exponents(a["p"], a["q"])
    if a["kernel"] == "stieltjes":
        K = "stieltjes"
    elif a["kernel"] == "random":
        K = random_sampled_kernel(a["seed"], (8, 8))
    else:
        K = read_sampled_kernel(a["kernel"])
    rep = verify_theorem_chain(K, _weight(a["phi1"]), _weight(a["phi2"]), a["p"], a["q"],
                               a["samples"], cfg.grid, seed=a["seed"])
    d = rep.to_dict()
    row = [d["kernel"], rep.p, rep.q, rep.samples, len(rep.violations), d["max_a_over_b"],
           d["max_b_over_m"], d["m_over_c"]["min"], d["m_over_c"]["max"], d["c_over_d"]["min"],
           d["c_over_d"]["max"]]
    _emit(cfg, d, CHAIN_HEADER, [row])
    return 0 if rep.ok else 1


COMMANDS = {"check": cmd_check, "norm": cmd_norm, "estimate": cmd_estimate,
            "rearrange": cmd_rearrange, "chain": cmd_chain}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--grid", help="t_min,t_max,points_per_decade (default: $LGT_GRID)")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", dest="fmt", choices=["json", "csv"],
                        help="default: csv for rearrange, json otherwise")

    parser = _Parser(prog="lgt", description="Lorentz-Gamma weighted inequality toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    check = sub.add_parser("check", help="evaluate a condition set")
    csub = check.add_subparsers(dest="which", required=True, parser_class=_Parser)
    ng = csub.add_parser("neugebauer", parents=[common])
    ng.add_argument("--q", type=float, required=True)
    ng.add_argument("--u", required=True)
    ng.add_argument("--v")
    ng.add_argument("--v-from-u", action="store_true", help="use the minimal v = u^(q)")
    ng.add_argument("--tol", type=float, default=1e-6)
    bk = csub.add_parser("bloom-kerman", parents=[common])
    bk.add_argument("--kernel", choices=["one", "zero", "log"], default="one")
    for k in ("t", "u", "v", "w"):
        bk.add_argument(f"--{k}", default="pow(a0=0,ainf=0)")
    for s2 in (bk, csub.add_parser("s2-corollary", parents=[common])):
        s2.add_argument("--p", type=float, required=True)
        s2.add_argument("--q", type=float, required=True)
        s2.add_argument("--form", choices=["standard", "printed"], default="standard")
    s2.add_argument("--phi1", required=True)
    s2.add_argument("--phi2", required=True)

    norm = sub.add_parser("norm", parents=[common], help="Lorentz-Gamma norm of a step function")
    norm.add_argument("--p", type=float, required=True)
    norm.add_argument("--phi", default="pow(a0=0,ainf=0)")
    norm.add_argument("--f", required=True, help="step function CSV (knot,value)")

    est = sub.add_parser("estimate", parents=[common], help="empirical norm ratio sweep")
    est.add_argument("--op", choices=["stieltjes", "s2", "s2-logform", "kernel", "zero"],
                     default="stieltjes")
    est.add_argument("--kernel", help="sampled kernel CSV for --op kernel")
    est.add_argument("--p", type=float, required=True)
    est.add_argument("--q", type=float)
    est.add_argument("--source-weight", default="pow(a0=0,ainf=0)")
    est.add_argument("--target-weight", default="pow(a0=0,ainf=0)")
    est.add_argument("--space", choices=["lp", "lg"], default="lp")
    est.add_argument("--inequality", choices=["I11", "I12", "I34"], default="I11")
    est.add_argument("--family", choices=["random", "extremal"], default="random")
    est.add_argument("--samples", type=int, default=20)
    est.add_argument("--seed", type=int, default=0)

    rea = sub.add_parser("rearrange", parents=[common], help="nonincreasing rearrangement")
    rea.add_argument("--f", required=True)

    ch = sub.add_parser("chain", parents=[common], help="proof-chain property run")
    ch.add_argument("--kernel", default="stieltjes", help="stieltjes, random, or a kernel CSV")
    ch.add_argument("--p", type=float, required=True)
    ch.add_argument("--q", type=float, required=True)
    ch.add_argument("--phi1", default="pow(a0=0,ainf=0)")
    ch.add_argument("--phi2", default="pow(a0=0,ainf=0)")
    ch.add_argument("--samples", type=int, default=100)
    ch.add_argument("--seed", type=int, default=0)
    return parser


def _config(ns) -> RunConfig:
    try:
        grid = GeometricGrid.from_string(ns.grid) if ns.grid else GeometricGrid.from_env()
    except ValueError as exc:
        raise UsageError(f"bad grid: {exc}") from None
    args = {k: v for k, v in vars(ns).items() if k not in ("grid", "out", "fmt", "command")}
    if args.get("samples") is not None and args["samples"] < 1:
        raise UsageError("--samples must be at least 1")
    fmt = ns.fmt or ("csv" if ns.command == "rearrange" else "json")
    return RunConfig(ns.command, args, grid, ns.out, fmt)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = _config(ns)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"lgt: usage error: {exc}", file=sys.stderr)
        return EX_USAGE
    except (LGTError, OSError) as exc:
        print(f"lgt: data error: {exc}", file=sys.stderr)
        return EX_DATAERR


if __name__ == "__main__":
    sys.exit(main())
