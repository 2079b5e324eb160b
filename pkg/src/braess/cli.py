"""Command-line front end.

Exit codes:
  0  success
  1  unreadable input: malformed JSON, schema violation, I/O failure
  2  topology error in a network document
  3  math-domain error (0/0 in relaxed mode)
  4  verification failure (closed form and oracle disagree)
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from braess.core import FourNodeConfig, derive_quantities
from braess.equilibrium import (
    equilibrium_N,
    equilibrium_Nplus,
    n_thresholds,
    nplus_thresholds,
)
from braess.errors import (
    BraessError,
    InvalidConfig,
    InvalidQ,
    TopologyError,
    ZeroOverZero,
)
from braess.oracle import beckmann_solve_many
from braess.paradox import Interval, classify, paradox_region
from braess.reduction import network_from_links, reduce_network

log = logging.getLogger("braess")

EXIT_OK, EXIT_PARSE, EXIT_TOPOLOGY, EXIT_MATH, EXIT_VERIFY = 0, 1, 2, 3, 4
VERIFY_RTOL = 1e-6


class CLIError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _setup_logging() -> None:
    level = os.environ.get("BRAESS_LOG", "error").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


# ------------------------------------------------------------------- input


def parse_document(doc: dict, *, relaxed: bool = False) -> FourNodeConfig:
    """Turn a network document (already JSON-decoded) into a FourNodeConfig."""
    if not isinstance(doc, dict):
        raise InvalidConfig("document must be a JSON object")
    if "four_node" in doc:
        four = doc["four_node"]
        if not isinstance(four, dict) or "alpha" not in four or "beta" not in four:
            raise InvalidConfig('"four_node" needs "alpha" and "beta" arrays')
        alpha, beta = four["alpha"], four["beta"]
        if not isinstance(alpha, list) or not isinstance(beta, list):
            raise InvalidConfig('"alpha" and "beta" must be arrays')
        return FourNodeConfig(tuple(alpha), tuple(beta), relaxed=relaxed)
    for key in ("links", "origin", "destination"):
        if key not in doc:
            raise InvalidConfig(f"document lacks {key!r} (or a 'four_node' block)")
    if not isinstance(doc["links"], list):
        raise InvalidConfig('"links" must be an array')
    net = network_from_links(doc["links"], doc["origin"], doc["destination"], doc.get("nodes", ()))
    cfg, _ = reduce_network(net, relaxed=relaxed)
    return cfg


def load_config(path: str, *, relaxed: bool = False) -> FourNodeConfig:
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc}", EXIT_PARSE) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CLIError(f"malformed JSON in {path}: {exc}", EXIT_PARSE) from None
    return parse_document(doc, relaxed=relaxed)


def _enc(x):
    if x is None:
        return None
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _fmt(x: Optional[float], digits: int = 2) -> str:
    if x is None:
        return "n/a"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{digits}f}"


# --------------------------------------------------------------- commands


def cmd_reduce(args) -> int:
    cfg = load_config(args.input, relaxed=args.relaxed)
    out = {"alpha": list(cfg.alpha), "beta": list(cfg.beta), "has_bc": cfg.has_bc}
    print(json.dumps(out))
    return EXIT_OK


def cmd_eq(args) -> int:
    cfg = load_config(args.input, relaxed=args.relaxed)
    if args.no_bc or not cfg.has_bc:
        sol = equilibrium_N(cfg, args.Q)
    else:
        sol = equilibrium_Nplus(cfg, args.Q)
    print(json.dumps(sol.to_dict(), indent=2 if args.pretty else None))
    return EXIT_OK


def _regions_text(region: Sequence[Interval]) -> str:
    return " U ".join(iv.format(2) for iv in region) if region else "none"


def paradox_json(cfg: FourNodeConfig) -> dict:
    rep = paradox_region(cfg)
    return {
        "four_node": cfg.to_dict(),
        "derived": {k: _enc(v) for k, v in rep.derived.to_dict().items()},
        "theorems": [
            {
                "theorem": t.theorem,
                "braess_number": t.braess_number,
                "gate": t.gate,
                "mega_case": t.mega_case,
                "interval": t.interval.to_dict(),
            }
            for t in rep.per_theorem
        ],
        "paradox_region": [iv.to_dict() for iv in rep.region],
        "pseudo_paradox": [
            {"condition": p.condition, "interval": p.interval.to_dict()} for p in rep.pseudo
        ],
        "pseudo_paradox_region": [iv.to_dict() for iv in rep.pseudo_region],
    }


def paradox_text(cfg: FourNodeConfig) -> str:
    rep = paradox_region(cfg)
    d = rep.derived
    lines = [
        "derived quantities:",
        f"  alpha = {_fmt(d.al)}  alpha_bar = {_fmt(d.al_bar)}  alpha_hat = {_fmt(d.al_hat)}"
        f"  beta = {_fmt(d.beta_total)}",
        f"  B1 = {d.b1:.6g}  B2 = {d.b2:.6g}  B3 = {d.b3:.6g}  B4 = {d.b4:.6g}",
        f"  mu1 = {_fmt(d.mu1)}  mu2 = {_fmt(d.mu2)}",
        "theorem intervals:",
    ]
    for t in rep.per_theorem:
        gate = ">" if t.gate else "<="
        lines.append(
            f"  theorem {t.theorem} (B{t.theorem} = {t.braess_number:.6g} {gate} 0, case {t.mega_case}):"
            f" {t.interval.format(2) if not t.interval.is_empty else 'no interval'}"
        )
    lines.append(f"paradox region: {_regions_text(rep.region)}")
    lines.append(f"pseudo-paradox region: {_regions_text(rep.pseudo_region)}")
    everywhere = (
        len(rep.pseudo_region) == 1
        and rep.pseudo_region[0].lo == 0
        and math.isinf(rep.pseudo_region[0].hi)
    )
    if rep.is_empty:
        summary = "no paradox for any Q"
    else:
        summary = "Braess' paradox occurs iff Q in " + _regions_text(rep.region)
    if everywhere:
        summary += "; pseudo-paradox for all Q>0"
    lines.append(summary)
    return "\n".join(lines)


def cmd_paradox(args) -> int:
    cfg = load_config(args.input, relaxed=args.relaxed)
    if not cfg.has_bc:
        raise InvalidConfig("paradox analysis needs the bridge link (role BC / link 3)")
    if args.json:
        print(json.dumps(paradox_json(cfg), indent=2))
    else:
        print(paradox_text(cfg))
    return EXIT_OK


SWEEP_HEADER = ["Q", "T_N", "case_N", "T_Nplus", "case_Nplus", "delta", "classification"]


def sweep_rows(cfg: FourNodeConfig, qmin: float, qmax: float, steps: int) -> list[list[str]]:
    if not 0 < qmin < qmax:
        raise InvalidQ("need 0 < qmin < qmax")
    if steps < 2:
        raise InvalidQ("steps must be at least 2")
    d = derive_quantities(cfg)
    rows = []
    for q in np.linspace(qmin, qmax, steps):
        c = classify(cfg, float(q), d)
        rows.append(
            [
                f"{q:.9g}",
                f"{c.n.T:.9g}",
                c.n.case_label,
                f"{c.nplus.T:.9g}",
                c.nplus.case_label,
                f"{c.delta:.9g}",
                c.kind,
            ]
        )
    return rows


def cmd_sweep(args) -> int:
    cfg = load_config(args.input, relaxed=args.relaxed)
    if not cfg.has_bc:
        raise InvalidConfig("sweep compares both networks and needs the bridge link")
    rows = sweep_rows(cfg, args.qmin, args.qmax, args.steps)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    writer.writerows(rows)
    try:
        if args.out == "-":
            sys.stdout.write(buf.getvalue())
        else:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(buf.getvalue())
    except OSError as exc:
        raise CLIError(f"cannot write {args.out}: {exc}", EXIT_PARSE) from None
    return EXIT_OK


def verify_range(cfg: FourNodeConfig) -> tuple[float, float]:
    """0.1x the smallest to 10x the largest positive finite threshold."""
    d = derive_quantities(cfg)
    th = dict(n_thresholds(cfg, d))
    if cfg.has_bc:
        th.update(nplus_thresholds(cfg, d))
        if d.b1 != 0:
            # the f/g switch sits at K/B1 for either sign of B1
            th["K/B1"] = (d.al_hat * cfg.bsum("14") + d.al_bar * cfg.bsum("25")) / d.b1
    pos = [v for v in th.values() if v is not None and 0 < v < math.inf]
    if not pos:
        return 0.1, 10.0
    return 0.1 * min(pos), 10.0 * max(pos)


def run_verify(
    cfg: FourNodeConfig,
    samples: int,
    seed: int,
    *,
    n_solver=None,
    nplus_solver=None,
) -> tuple[float, Optional[float]]:
    """Compare closed-form and oracle times at log-uniform Q.

    Returns ``(max_residual, first_offending_Q or None)``.
    """
    n_solver = n_solver or equilibrium_N
    nplus_solver = nplus_solver or equilibrium_Nplus
    lo, hi = verify_range(cfg)
    rng = np.random.default_rng(seed)
    qs = np.exp(rng.uniform(math.log(lo), math.log(hi), size=samples))
    networks = [(False, n_solver)]
    if cfg.has_bc:
        networks.append((True, nplus_solver))
    worst, offender = 0.0, None
    d = derive_quantities(cfg)
    for with_bc, solver in networks:
        oracle = beckmann_solve_many(cfg, with_bc, qs)
        for q, o in zip(qs, oracle):
            t = solver(cfg, float(q), d).T
            r = abs(t - o.T) / (1.0 + abs(o.T))
            if r > worst:
                worst = r
            if r > VERIFY_RTOL and offender is None:
                offender = float(q)
    return worst, offender


def cmd_verify(args) -> int:
    cfg = load_config(args.input, relaxed=args.relaxed)
    worst, offender = run_verify(cfg, args.samples, args.seed)
    print(f"samples={args.samples} seed={args.seed} max_residual={worst:.3e}")
    if offender is not None:
        print(f"FAIL: closed form and oracle disagree at Q={offender!r}")
        return EXIT_VERIFY
    print("PASS")
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="braess",
        description="Braess paradox analysis for generalised four-node networks.",
        epilog=(
            "exit codes: 0 ok, 1 parse/IO error, 2 topology error, "
            "3 math-domain error (0/0), 4 verification failure. "
            "Set BRAESS_LOG=error|info|debug for diagnostics."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", help="network document (JSON file, or - for stdin)")
    common.add_argument(
        "--relaxed", action="store_true", help="allow zero delay parameters (x/0 = +-inf)"
    )

    p = sub.add_parser("reduce", parents=[common], help="reduce to the four-node configuration")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("eq", parents=[common], help="equilibrium at one total flow")
    p.add_argument("--Q", type=float, required=True, help="total flow Q > 0")
    p.add_argument("--no-bc", action="store_true", help="use the network without the bridge")
    p.add_argument("--pretty", action="store_true", help="indent the JSON output")
    p.set_defaults(func=cmd_eq)

    p = sub.add_parser("paradox", parents=[common], help="exact paradox and pseudo-paradox regions")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_paradox)

    p = sub.add_parser("sweep", parents=[common], help="tabulate both equilibria over Q as CSV")
    p.add_argument("--qmin", type=float, required=True)
    p.add_argument("--qmax", type=float, required=True)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--out", default="-", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", parents=[common], help="cross-check closed forms against the oracle")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except TopologyError as exc:
        print(f"topology error: {exc}", file=sys.stderr)
        return EXIT_TOPOLOGY
    except ZeroOverZero as exc:
        print(f"math-domain error: {exc}", file=sys.stderr)
        return EXIT_MATH
    except (InvalidConfig, InvalidQ) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BraessError as exc:
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
