"""Command-line entry point.

Exit codes: 0 success, 1 internal error, 2 unparseable input, 3 invalid input
or violated constraint, 4 size cap exceeded, 5 a check ran and found
violations (scan/verify).
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
import sys

import numpy as np

from . import io as nio
from .bounds import (
    base_point,
    e_from_q,
    lambda_grid,
    lambda_score,
    theta_bounds,
)
from .errors import ArgumentError, NissError
from .fourier import BinarySourceSpec, TruthTable, analyze, subset_label
from .oracle import (
    achievable_scan,
    function_count,
    sandwich_report,
    verify_correlation_formula,
)
from .ortho import GeneralSourceSpec, gram_residual, gram_schmidt
from .rounding import (
    generated_distribution_mc,
    preservation_check,
)

EXIT_OK, EXIT_INTERNAL, EXIT_PARSE, EXIT_INVALID, EXIT_SIZE, EXIT_VIOLATIONS = 0, 1, 2, 3, 4, 5
DEFAULT_SEED = 0
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class RunConfig:
    command: str
    output: str | None
    seed: int
    tol: float
    jobs: int
    format: str

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        if args.jobs < 1:
            raise ArgumentError("--jobs must be at least 1")
        if not 0 <= args.seed < 2**64:
            raise ArgumentError("--seed must be a 64-bit unsigned integer")
        if args.tol < 0:
            raise ArgumentError("--tol must be non-negative")
        return cls(args.command, args.output, args.seed, args.tol, args.jobs, args.format)

    def summary(self) -> dict:
        return {"seed": self.seed, "tol": self.tol, "jobs": self.jobs}


def _floats(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _source(args) -> BinarySourceSpec:
    if args.dsbs is not None:
        return BinarySourceSpec.dsbs(args.dsbs)
    return nio.read_source(args.source)


def _emit(cfg: RunConfig, doc: dict, csv_header=None, csv_rows=None) -> None:
    if cfg.format == "csv":
        if csv_header is None:
            raise ArgumentError(f"'{cfg.command}' has no CSV form; use --format json")
        text = nio.dump_csv(csv_header, csv_rows)
    else:
        text = nio.dump_json(doc)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _flat(a) -> str:
    return ";".join(nio.fmt17(x) for x in np.asarray(a, dtype=float).ravel())


def cmd_bound(args, cfg: RunConfig) -> int:
    src = _source(args)
    if args.target:
        target, qu, qv = nio.read_target(args.target)
    elif args.qu is not None and args.qv is not None:
        target, qu, qv = None, args.qu, args.qv
    else:
        raise ArgumentError("give --target FILE or both --qu and --qv")
    ku, kv = len(qu), len(qv)
    if args.lam:
        lambdas = [nio.read_lambda(args.lam)]
    else:
        lambdas = lambda_grid(ku, kv, args.grid)
    e = e_from_q(target) if target is not None else None
    reports = []
    for lam in lambdas:
        rep = theta_bounds(src.rho, qu, qv, lam).as_dict()
        entry = {"lambda": lam.lam, **rep}
        if e is not None:
            score = lambda_score(e, lam)
            entry["score"] = score
            entry["outer_ok"] = rep["theta_minus"] - cfg.tol <= score <= rep["theta_plus"] + cfg.tol
        reports.append(entry)
    doc = {
        "command": "bound",
        "config": cfg.summary(),
        "rho": src.rho,
        "qu": qu,
        "qv": qv,
        "base_point": base_point(qu, qv).e,
        "e": None if e is None else e.e,
        "reports": reports,
    }
    if e is not None:
        doc["all_outer_ok"] = all(r["outer_ok"] for r in reports)
    keys = ["theta_phi", "theta_rho", "theta_rho2_1", "theta_rho2_2", "theta_rho2_3", "theta_minus", "theta_plus"]
    header = ["lambda"] + keys + (["score", "outer_ok"] if e is not None else [])
    rows = [
        [_flat(r["lambda"])] + [r[k] for k in keys] + ([r["score"], r["outer_ok"]] if e is not None else [])
        for r in reports
    ]
    _emit(cfg, doc, header, rows)
    return EXIT_OK


def cmd_scan(args, cfg: RunConfig) -> int:
    src = _source(args)
    scan = achievable_scan(args.d, args.ku, args.kv, src, jobs=cfg.jobs)
    grid = lambda_grid(args.ku, args.kv, args.grid)
    rep = sandwich_report(scan, grid, cfg.tol)
    doc = {
        "command": "scan",
        "config": cfg.summary(),
        "rho": src.rho,
        "d": rep.d,
        "ku": rep.ku,
        "kv": rep.kv,
        "n_records": len(rep),
        "lambdas": [lam.lam for lam in rep.lambdas],
        "worst_margin": rep.worst_margin(),
        "n_violations": len(rep.violations),
        "violations": [
            {"f_index": int(rep.f_index[v.record]), "g_index": int(rep.g_index[v.record]),
             "lambda": v.lam, "side": v.side, "margin": v.margin}
            for v in rep.violations
        ],
    }
    if not args.no_records:
        doc["records"] = [
            {"f_index": int(rep.f_index[i]), "g_index": int(rep.g_index[i]), "q": rep.q[i],
             "e": rep.e[i], "scores": rep.lambda_scores[i]}
            for i in range(len(rep))
        ]
    L = len(grid)
    header = (
        ["f_index", "g_index"]
        + [f"q_{u}_{v}" for u in range(rep.ku) for v in range(rep.kv)]
        + [f"e_{u}_{v}" for u in range(1, rep.ku) for v in range(1, rep.kv)]
        + [f"score_{j}" for j in range(L)]
        + ["max_upper_margin", "max_lower_margin"]
    )
    rows = (
        [int(rep.f_index[i]), int(rep.g_index[i]), *rep.q[i].ravel(), *rep.e[i].ravel(),
         *rep.lambda_scores[i], rep.upper_margin[i].max(), rep.lower_margin[i].max()]
        for i in range(len(rep))
    )
    _emit(cfg, doc, header, rows)
    return EXIT_OK if not rep.violations else EXIT_VIOLATIONS


def cmd_round(args, cfg: RunConfig) -> int:
    src = _source(args)
    fam_f = nio.read_family(args.family[0])
    fam_g = nio.read_family(args.family[1]) if len(args.family) > 1 else fam_f
    pres = preservation_check(fam_f, fam_g, src)
    exact = pres.target
    doc = {
        "command": "round",
        "config": cfg.summary(),
        "rho": src.rho,
        "mode": "exact" if args.mc is None else "mc",
        "exact_q": exact.q,
        "exact_e": e_from_q(exact).e,
        "preservation": {
            "mean_f_error": pres.mean_f_error,
            "mean_g_error": pres.mean_g_error,
            "correlation_error": pres.correlation_error,
            "max_error": pres.max_error,
        },
    }
    if args.mc is not None:
        emp = generated_distribution_mc(fam_f, fam_g, src, args.mc, cfg.seed, cfg.jobs)
        doc.update(
            n_samples=emp.n_samples,
            q=emp.target.q,
            stderr=emp.stderr,
            e=e_from_q(emp.target).e,
        )
    rows = [[u, v, exact.q[u, v]] for u in range(exact.ku) for v in range(exact.kv)]
    header = ["u", "v", "exact_q"]
    if args.mc is not None:
        header += ["mc_q", "stderr"]
        rows = [r + [doc["q"][r[0], r[1]], doc["stderr"][r[0], r[1]]] for r in rows]
    _emit(cfg, doc, header, rows)
    return EXIT_OK


def cmd_fourier(args, cfg: RunConfig) -> int:
    table = nio.read_table(args.table)
    if args.p is not None:
        p = args.p
    else:
        src = _source(args)
        p = src.p_x if args.side == "x" else src.p_y
    spec = analyze(table, p)
    coeffs = [
        {"subset": subset_label(s), "mask": s, "coeff": c} for s, c in enumerate(spec.coeffs)
    ]
    doc = {
        "command": "fourier",
        "p": p,
        "d": spec.d,
        "coefficients": coeffs,
        "nonzero": [c["subset"] for c in coeffs if abs(c["coeff"]) > cfg.tol],
    }
    rows = [[c["mask"], c["subset"], c["coeff"]] for c in coeffs]
    _emit(cfg, doc, ["mask", "subset", "coeff"], rows)
    return EXIT_OK


def cmd_ortho(args, cfg: RunConfig) -> int:
    src = GeneralSourceSpec(nio.read_pmf(args.pmf))
    basis = gram_schmidt(src)
    doc = {
        "command": "ortho",
        "d": src.d,
        "mu": src.mu,
        "sigma": src.sigma,
        "support_size": int(np.count_nonzero(src.support)),
        "rank": basis.rank,
        "residual": gram_residual(basis, src),
        "basis": [
            {"subset": subset_label(s), "mask": s, "trivial": bool(basis.trivial_flags[s]),
             "values": basis.matrix[s]}
            for s in range(basis.matrix.shape[0])
        ],
    }
    _emit(cfg, doc)
    return EXIT_OK


def _function_from_index(i: int, d: int, k: int) -> TruthTable:
    n = 1 << d
    digits = np.zeros(n, dtype=np.int64)
    for pos in range(n - 1, -1, -1):
        i, digits[pos] = divmod(i, k)
    return TruthTable(digits)


def cmd_verify(args, cfg: RunConfig) -> int:
    src = _source(args)
    nf, ng = function_count(args.d, args.ku), function_count(args.d, args.kv)
    if args.pairs:
        rng = np.random.default_rng(cfg.seed)
        pairs = list(zip(rng.integers(0, nf, args.pairs).tolist(), rng.integers(0, ng, args.pairs).tolist()))
    else:
        scan = achievable_scan(args.d, args.ku, args.kv, src)  # enforces the pair cap
        pairs = list(zip(scan.f_index.tolist(), scan.g_index.tolist()))
    worst, worst_pair = 0.0, None
    for fi, gi in pairs:
        f = _function_from_index(fi, args.d, args.ku)
        g = _function_from_index(gi, args.d, args.kv)
        chk = verify_correlation_formula(f, g, src, args.ku, args.kv)
        if worst_pair is None or chk.max_discrepancy > worst:
            worst, worst_pair = chk.max_discrepancy, (fi, gi)
    ok = worst <= cfg.tol
    doc = {
        "command": "verify",
        "config": cfg.summary(),
        "rho": src.rho,
        "d": args.d,
        "ku": args.ku,
        "kv": args.kv,
        "pairs_checked": len(pairs),
        "max_discrepancy": worst,
        "worst_pair": worst_pair,
        "ok": ok,
    }
    _emit(cfg, doc)
    return EXIT_OK if ok else EXIT_VIOLATIONS


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--jobs", type=int, default=1)

    source = argparse.ArgumentParser(add_help=False)
    grp = source.add_mutually_exclusive_group(required=True)
    grp.add_argument("--source", help='JSON file {"pxy": [[..], [..]]}')
    grp.add_argument("--dsbs", type=float, metavar="EPS", help="doubly symmetric binary source")

    parser = argparse.ArgumentParser(prog="niss", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", parents=[common, source], help="closed-form outer-bound envelope")
    p.add_argument("--target", help='JSON {"q": ...} or {"qu": ..., "qv": ...}')
    p.add_argument("--qu", type=_floats, help="comma-separated Q_U")
    p.add_argument("--qv", type=_floats, help="comma-separated Q_V")
    lg = p.add_mutually_exclusive_group()
    lg.add_argument("--lambda", dest="lam", help='JSON {"lambda": [[...]]}')
    lg.add_argument("--grid", type=int, default=1, help="lambda-grid resolution (default 1)")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("scan", parents=[common, source], help="exhaustive scan with sandwich check")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--ku", type=int, default=2)
    p.add_argument("--kv", type=int, default=2)
    p.add_argument("--grid", type=int, default=1)
    p.add_argument("--no-records", action="store_true", help="omit per-pair records from JSON")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("round", parents=[common, source], help="distribution generated by rounding")
    p.add_argument("family", nargs="+", help="Alice's family file, then optionally Bob's")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="exact summation only (default)")
    mode.add_argument("--mc", type=int, metavar="N", help="also simulate N samples")
    p.set_defaults(func=cmd_round)

    p = sub.add_parser("fourier", parents=[common], help="Fourier spectrum of a table")
    p.add_argument("table")
    sp = p.add_mutually_exclusive_group(required=True)
    sp.add_argument("--p", type=float, help="P(X = +1)")
    sp.add_argument("--source")
    sp.add_argument("--dsbs", type=float, metavar="EPS")
    p.add_argument("--side", choices=("x", "y"), default="x")
    p.set_defaults(func=cmd_fourier)

    p = sub.add_parser("ortho", parents=[common], help="Gram-Schmidt basis for a correlated pmf")
    p.add_argument("pmf")
    p.set_defaults(func=cmd_ortho)

    p = sub.add_parser("verify", parents=[common, source], help="triple check of the correlation formula")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--ku", type=int, default=2)
    p.add_argument("--kv", type=int, default=2)
    p.add_argument("--pairs", type=int, default=0, help="random pairs to check (0 = all)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "round" and len(args.family) > 2:
        parser.error("round takes at most two family files")
    try:
        cfg = RunConfig.from_args(args)
        return args.func(args, cfg)
    except nio.ParseError as exc:
        print(f"niss: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NissError as exc:
        print(f"niss: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001
        print(f"niss: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
