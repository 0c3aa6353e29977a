"""Command line entry point: ``qfinite {compute,verify,series,guess}``.

Exit codes: 0 everything checked out, 1 a mathematical mismatch, 2 bad usage.
The default output format can be set with ``QFINITE_FORMAT``; ``--format``
wins over it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass, field

from .identities import (
    IdentityId,
    MAIN_IDENTITIES,
    arrf3_sides,
    epsilon_poly,
    lhs_poly,
    rhs_poly,
    verify_identity,
)
from .recurrence import BUILDERS, AnsatzSpec, certify, known_ansatz
from .series import (
    jtp_check,
    limit_check,
    product_side,
    rogers_ramanujan_products,
    rr_two_variable_lhs,
    rr_two_variable_rhs,
    series_side,
)

log = logging.getLogger("qfinite")

FORMATS = ("text", "json", "csv")
MAX_N_CAP = 200
MAX_N_WARN = 60
ENV_FORMAT = "QFINITE_FORMAT"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    identity: str | None = None
    n: int | None = None
    fmt: str = "text"
    output: str | None = None
    extra: dict = field(default_factory=dict)


# -- argument parsing -------------------------------------------------------


def _identity(value: str) -> IdentityId:
    try:
        return IdentityId.parse(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _identity_or_all(value: str):
    return "all" if value.strip().lower() == "all" else _identity(value)


def _inclusive_range(value: str) -> tuple[int, int]:
    try:
        a, b = (int(x) for x in value.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A:B, got {value!r}") from None
    if a > b:
        raise argparse.ArgumentTypeError(f"empty range {value!r}")
    return a, b


def _q_range(value: str) -> tuple[int, int]:
    if ":" in value:
        return _inclusive_range(value)
    try:
        hi = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected MAX or MIN:MAX, got {value!r}") from None
    if hi < 0:
        raise argparse.ArgumentTypeError("q degree bound must be nonnegative")
    return 0, hi


def _int_list(value: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in value.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}") from None


def _nonneg(value: str) -> int:
    try:
        v = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {value!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


class _Parser(argparse.ArgumentParser):
    # argparse already exits with 2 on errors; keep that, but let main() catch it
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    default_fmt = os.environ.get(ENV_FORMAT, "text")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default=None,
                        help=f"output format (default from ${ENV_FORMAT}, else text)")
    common.add_argument("--output", "-o", help="write to this file instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    p = _Parser(prog="qfinite", description="Exact checks of finite two-variable q-series identities.")
    p.set_defaults(default_format=default_fmt)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compute", parents=[common], help="print one side of an identity at a given n")
    c.add_argument("--identity", type=_identity, required=True)
    c.add_argument("--side", choices=("lhs", "rhs", "epsilon"), default="lhs")
    c.add_argument("--n", type=_nonneg, required=True)

    v = sub.add_parser("verify", parents=[common], help="check identities and recurrences for 0 <= n <= max-n")
    v.add_argument("--identity", type=_identity_or_all, default="all")
    v.add_argument("--max-n", type=_nonneg, default=40)

    s = sub.add_parser("series", parents=[common], help="truncated series checks")
    s.add_argument("--identity", type=_identity_or_all, default="all")
    s.add_argument("--order", type=_nonneg, default=30, help="truncation order N in q")
    s.add_argument("--check", choices=("jtp", "limit", "product", "rr"), default="jtp")
    s.add_argument("--n", type=_nonneg, default=30, help="polynomial index for --check limit")
    s.add_argument("--margin", type=_nonneg, default=0)

    g = sub.add_parser("guess", parents=[common], help="guess a recurrence and certify it on a holdout range")
    g.add_argument("--identity", type=_identity, required=True)
    g.add_argument("--builder", choices=BUILDERS, default="lhs")
    g.add_argument("--order", type=int, help="recurrence order (omit all ansatz flags for the known shape)")
    g.add_argument("--q-deg", type=_q_range, help="q exponents: MAX (means 0:MAX) or MIN:MAX")
    g.add_argument("--Q-deg", type=_nonneg, help="max exponent of Q = q^n")
    g.add_argument("--z-exps", type=_int_list, default=(-1, 0, 1))
    g.add_argument("--fit", type=_inclusive_range, required=True)
    g.add_argument("--holdout", type=_inclusive_range, required=True)
    g.add_argument("--seed", type=int, default=0)
    return p


# -- output helpers ---------------------------------------------------------


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def _json(obj, compact: bool = False) -> str:
    if compact:
        return json.dumps(obj, separators=(",", ":")) + "\n"
    return json.dumps(obj, indent=2) + "\n"


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- commands ---------------------------------------------------------------


def _cmd_compute(args, cfg: RunConfig) -> int:
    ident: IdentityId = args.identity
    n = args.n
    if ident.is_main:
        poly = {"lhs": lhs_poly, "rhs": rhs_poly, "epsilon": epsilon_poly}[args.side](ident, n)
    elif ident is IdentityId.ARRF3 and args.side != "epsilon":
        poly = arrf3_sides(n)[0 if args.side == "lhs" else 1]
    else:
        raise UsageError(f"compute supports lhs/rhs/epsilon of r1, r1partner, r2 and lhs/rhs of arrf3; "
                         f"{ident.value} {args.side} is not a polynomial")
    if cfg.fmt == "json":
        out = _json({"identity": ident.value, "n": n, "side": args.side, "terms": poly.to_term_list()}, compact=True)
    elif cfg.fmt == "csv":
        rows = [["identity", "n", "side", "z_exp", "q_exp", "coeff"]]
        rows += [[ident.value, n, args.side, a, b, c] for a, b, c in poly.to_term_list()]
        out = _csv(rows)
    else:
        out = poly.to_text() + "\n"
    _emit(out, cfg)
    return 0


def _cmd_verify(args, cfg: RunConfig) -> int:
    if args.max_n > MAX_N_CAP:
        raise UsageError(f"--max-n is capped at {MAX_N_CAP}")
    if args.max_n > MAX_N_WARN:
        print(f"warning: --max-n {args.max_n} above {MAX_N_WARN}; the r2 quadruple sum gets slow",
              file=sys.stderr)
    idents = list(IdentityId) if args.identity == "all" else [args.identity]
    reports = []
    for ident in idents:
        log.info("verifying %s up to n=%d", ident.value, args.max_n)
        reports.append(verify_identity(ident, args.max_n))
    dicts = [r.to_dict() for r in reports]
    if cfg.fmt == "json":
        out = _json(dicts)
    elif cfg.fmt == "csv":
        rows = [["identity", "n_min", "n_max", "status", "failure_n", "failure_kind", "difference"]]
        for d in dicts:
            f = d.get("first_failure", {})
            rows.append([d["identity"], d["n_min"], d["n_max"], d["status"],
                         f.get("n", ""), f.get("kind", ""), f.get("difference", "")])
        out = _csv(rows)
    else:
        lines = []
        for d in dicts:
            line = f"{d['identity']}: {d['status']} (n = {d['n_min']}..{d['n_max']})"
            if "rejected_points" in d:
                line += f", {len(d['rejected_points'])} sample point(s) rejected"
            lines.append(line)
            if "first_failure" in d:
                f = d["first_failure"]
                lines.append(f"  first failure at n={f['n']} ({f['kind']}): {f['difference']}")
        out = "\n".join(lines) + "\n"
    _emit(out, cfg)
    return 0 if all(r.passed for r in reports) else 1


def _series_one(ident: IdentityId, args) -> dict:
    if args.check == "jtp":
        ok = jtp_check(ident, args.order)
        return {"identity": ident.value, "check": "jtp", "order": args.order, "status": "pass" if ok else "fail"}
    if args.check == "product":
        a, b = series_side(ident, args.order), product_side(ident, args.order)
        d = {"identity": ident.value, "check": "product", "order": args.order,
             "status": "pass" if a == b else "fail"}
        if a != b:
            d["difference"] = (a - b).body.to_text()
        return d
    res = limit_check(ident, args.n, args.margin)
    d = res.to_dict()
    d["check"] = "limit"
    return d


def _cmd_series(args, cfg: RunConfig) -> int:
    if args.check == "rr":
        N = args.order
        lhs, rhs = rr_two_variable_lhs(N), rr_two_variable_rhs(N)
        g, h = rogers_ramanujan_products(N)
        results = [
            {"check": "rr two-variable", "order": N, "status": "pass" if lhs == rhs else "fail"},
            {"check": "rr z=1", "order": N, "status": "pass" if lhs.specialize_z(0) == g else "fail"},
            {"check": "rr z=q", "order": N, "status": "pass" if lhs.specialize_z(1) == h else "fail"},
        ]
    else:
        if args.check == "limit" and args.n < 4:
            raise UsageError("--check limit needs --n >= 4")
        idents = MAIN_IDENTITIES if args.identity == "all" else (args.identity,)
        for ident in idents:
            if not ident.is_main:
                raise UsageError(f"series checks apply to r1, r1partner, r2, not {ident.value}")
        results = [_series_one(ident, args) for ident in idents]
    if cfg.fmt == "json":
        out = _json(results)
    elif cfg.fmt == "csv":
        rows = [["identity", "check", "order", "status"]]
        rows += [[r.get("identity", ""), r["check"], r["order"], r["status"]] for r in results]
        out = _csv(rows)
    else:
        lines = []
        for r in results:
            who = f"{r['identity']} " if "identity" in r else ""
            line = f"{who}{r['check']}: {r['status']} (order {r['order']})"
            if r["check"] == "limit":
                line += f", n={r['n']}, valuations {r['valuations']}"
            lines.append(line)
            if "difference" in r:
                lines.append(f"  difference: {r['difference']}")
        out = "\n".join(lines) + "\n"
    _emit(out, cfg)
    return 0 if all(r["status"] == "pass" for r in results) else 1


def _cmd_guess(args, cfg: RunConfig) -> int:
    ident: IdentityId = args.identity
    given = [args.order, args.q_deg, args.Q_deg]
    if all(x is None for x in given):
        if not ident.is_main:
            raise UsageError("no known recurrence shape for this identity; pass --order, --q-deg, --Q-deg")
        ansatz = known_ansatz(ident)
    elif any(x is None for x in given):
        raise UsageError("pass all of --order, --q-deg, --Q-deg, or none of them")
    else:
        ansatz = AnsatzSpec(args.order, args.Q_deg, args.q_deg, args.z_exps)
    if not ident.is_main:
        raise UsageError("guess needs a sequence builder; only r1, r1partner, r2 have one")
    report = certify(ident, args.builder, ansatz, args.fit, args.holdout, seed=args.seed)
    if cfg.fmt == "json":
        out = _json(report.to_dict())
    elif cfg.fmt == "csv":
        rows = [["candidate", "lag", "z_exp", "q_exp", "Q_exp", "coeff"]]
        for idx, cand in enumerate(report.survivors):
            for lag, terms in enumerate(cand.to_dict()["terms"]):
                rows += [[idx, lag, *t] for t in terms]
        out = _csv(rows)
    else:
        out = report.to_text() + "\n"
    _emit(out, cfg)
    return 0 if report.survivors else 1


_COMMANDS = {"compute": _cmd_compute, "verify": _cmd_verify, "series": _cmd_series, "guess": _cmd_guess}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    fmt = args.format or args.default_format
    if fmt not in FORMATS:
        print(f"qfinite: error: ${ENV_FORMAT}={fmt!r} is not one of {', '.join(FORMATS)}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg = RunConfig(args.command, getattr(args, "identity", None), getattr(args, "n", None), fmt, args.output)
    try:
        return _COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"qfinite {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"qfinite {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
