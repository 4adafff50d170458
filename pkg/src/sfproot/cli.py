"""Command-line front end.

Exit codes: 0 verified, 1 counterexample (or a failing check), 2 operational
error. Config fields can be set with SFPR_<FIELD> environment variables or
repeated --set FIELD=VALUE flags; explicit flags win over both.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime as _dt
import io
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import __version__, bounds, ntcore
from .bounds import BoundConfig, SieveParams, coerce_field, parse_nat
from .prover import certify, tables
from .prover.tree import run_tree

EXIT_OK, EXIT_COUNTEREXAMPLE, EXIT_ERROR = 0, 1, 2
ENV_PREFIX = "SFPR_"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse already exits 2; keep the message terse
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclasses.dataclass
class RunManifest:
    command: str
    argv: list[str]
    config: dict
    started_at: str
    artifact_version: str = __version__

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sfproot", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, help="exponent in (log2/log3, 1)")
    common.add_argument("--set", action="append", default=[], metavar="FIELD=VALUE",
                        help="override a config field (repeatable)")
    common.add_argument("--manifest", type=Path, help="write the run manifest here")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("tables", parents=[common], help="residual omega values per criterion")
    t.add_argument("stage", choices=["unsieved", "sieved"])
    t.add_argument("--n-max", type=int, default=tables.DEFAULT_N_MAX)
    t.add_argument("--format", choices=["text", "csv"], default="text")
    t.add_argument("--no-thresholds", action="store_true", help="skip per-n threshold search")

    tr = sub.add_parser("tree", parents=[common], help="prime-divisor tree search")
    tr.add_argument("--n", required=True, type=_int_list, help="e.g. 13 or 11,12,13,14 or 11-14")
    tr.add_argument("--threads", type=int, default=1)
    tr.add_argument("--report", type=Path, help="JSON report path (default: stdout)")
    tr.add_argument("--resume", type=Path, help="checkpoint file; created if missing")
    tr.add_argument("--upper-cap", type=parse_nat, help="clamp node upper bounds (oracle runs only)")
    tr.add_argument("--format", choices=["text", "csv"], default="text")

    v = sub.add_parser("verify-small", parents=[common], help="check every prime up to a limit")
    v.add_argument("--limit", type=int, required=True)

    b = sub.add_parser("bounds", parents=[common], help="evaluate c, E, G or G_s at one p")
    b.add_argument("--p", required=True, type=parse_nat)
    b.add_argument("--omega", type=int, help="omega(p-1) for G")
    b.add_argument("--n", type=int, help="omega(p-1) for the worst-case sieve")
    b.add_argument("--s", type=int, help="number of sieving primes")
    b.add_argument("--core-omega", type=int, help="omega(k); default n - s")
    b.add_argument("--sieving-primes", type=_int_list, help="explicit sieving primes")
    b.add_argument("--term", choices=["all", "c", "E", "sf-lower", "G", "Gs"], default="all")

    r = sub.add_parser("replay", help="re-run a manifest (or a report with one embedded)")
    r.add_argument("path", type=Path)
    return p


def _config(args, forced: dict | None = None) -> BoundConfig:
    if forced is not None:
        cfg = BoundConfig.from_dict(forced)
    else:
        kw = {}
        for item in args.set:
            if "=" not in item:
                raise UsageError(f"--set expects FIELD=VALUE, got {item!r}")
            k, v = item.split("=", 1)
            kw[k.strip()] = v.strip()
        fields = {f.name: f for f in dataclasses.fields(BoundConfig)}
        unknown = set(kw) - set(fields)
        if unknown:
            raise UsageError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        base = BoundConfig.from_env(ENV_PREFIX)
        cfg = base.replace(**{k: coerce_field(fields[k], v) for k, v in kw.items()})
    # verify-small is pure arithmetic and accepts any alpha in (0, 1]
    if getattr(args, "alpha", None) is not None and args.command != "verify-small":
        cfg = cfg.replace(alpha=args.alpha)
    return cfg


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_tables(args, cfg: BoundConfig, out) -> int:
    thr = not args.no_thresholds
    if args.stage == "unsieved":
        rows = tables.unsieved_rows(cfg.alpha, cfg, args.n_max, thresholds=thr)
        if rows and not rows[-1].dispatched:
            raise ArithmeticError(f"n = {args.n_max} is still open; raise --n-max")
        open_rows = [r for r in rows if not r.dispatched]
        summary = (
            f"a={open_rows[0].n} b={open_rows[-1].n}" if open_rows else "none"
        )
    else:
        rows = tables.sieved_rows(cfg.alpha, cfg, args.n_max, thresholds=thr)
        open_rows = [r for r in rows if not r.dispatched]
        summary = "{" + ",".join(str(r.n) for r in open_rows) + "}" if open_rows else "none"

    if args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["alpha", "stage", "n", "lower", "dispatched", "s", "delta", "threshold"])
        for r in rows:
            w.writerow([cfg.alpha, args.stage, r.n, r.lower, int(r.dispatched),
                        "" if r.s is None else r.s,
                        "" if r.delta is None else f"{r.delta:.6f}", r.threshold])
        return EXIT_OK

    print(f"alpha={cfg.alpha} stage={args.stage}", file=out)
    print(summary, file=out)
    if open_rows and args.stage == "sieved":
        top = max(r.n for r in open_rows)
        print(f"largest open primorial+1: {bounds.format_log(bounds.log_nat(ntcore.primorial(top) + 1))}", file=out)
    for r in open_rows:
        extra = f" s={r.s} delta={r.delta:.6f}" if r.s is not None else ""
        t = f" threshold={r.threshold}" if r.threshold_log is not None else ""
        print(f"n={r.n} lower={bounds.format_log(bounds.log_nat(r.lower))}{extra}{t}", file=out)
    return EXIT_OK


def cmd_tree(args, cfg: BoundConfig, out, manifest: RunManifest) -> int:
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    report = run_tree(cfg.alpha, args.n, cfg, workers=args.threads,
                      upper_cap=args.upper_cap, checkpoint=args.resume)
    report.manifest = manifest.to_dict()
    text = report.to_json()
    if args.report is not None:
        args.report.parent.mkdir(parents=True, exist_ok=True)
        args.report.write_text(text)
    if args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["n", "nodes_created", "nodes_explored", "pr_checks", "counterexamples", "wall_seconds"])
        for r in report.runs:
            w.writerow([r.n, r.nodes_created, r.nodes_explored, r.pr_checks,
                        " ".join(map(str, r.counterexamples)), f"{r.wall_seconds:.3f}"])
    elif args.report is None:
        out.write(text)
    else:
        for r in report.runs:
            print(f"n={r.n} nodes_created={r.nodes_created} nodes_explored={r.nodes_explored} "
                  f"pr_checks={r.pr_checks} counterexamples={len(r.counterexamples)}", file=out)
    return EXIT_COUNTEREXAMPLE if report.counterexamples else EXIT_OK


def cmd_verify_small(args, cfg: BoundConfig, out) -> int:
    if args.limit < 2:
        raise UsageError("--limit must be >= 2")
    alpha = args.alpha if args.alpha is not None else cfg.alpha
    if not 0 < alpha <= 1:
        raise UsageError("--alpha must lie in (0, 1]")
    bad = []
    for p in ntcore.primes_upto(args.limit):
        g = certify.sfpr(p, alpha)
        if args.verbose:
            print(f"p={p} g={'none' if g is None else g}", file=out)
        if g is None:
            bad.append(p)
    if bad:
        print(f"FAIL: no square-free primitive root below p^{alpha} for p in {bad}", file=out)
        return EXIT_COUNTEREXAMPLE
    print(f"OK: every prime p <= {args.limit} has a square-free primitive root below p^{alpha}", file=out)
    return EXIT_OK


def cmd_bounds(args, cfg: BoundConfig, out) -> int:
    p = args.p
    if p <= 100:
        raise UsageError("--p must exceed 100")
    term = args.term
    c = bounds.pv_constant(p, cfg.pv_variant)
    sf = bounds.sf_lower_term(p, cfg)
    if term == "c":
        print(f"{c:.6f}", file=out)
        return EXIT_OK
    if term == "sf-lower":
        print(f"{sf:.7f}", file=out)
        return EXIT_OK
    E = bounds.error_term_E(p, cfg)
    if term == "E":
        print(f"{E:.10g}", file=out)
        return EXIT_OK
    lines = [f"alpha={cfg.alpha}", f"A={cfg.A}", f"pv_variant={cfg.pv_variant}", f"p={p}",
             f"log_p={bounds.log_nat(p):.10f}", f"c={c:.10f}", f"E={E:.10g}", f"sf_lower={sf:.10g}"]
    want_gs = args.n is not None or args.sieving_primes is not None
    if term in ("all", "G") and args.omega is not None:
        lines.append(f"omega={args.omega}")
        lines.append(f"G={bounds.G(p, args.omega, cfg):.10g}")
        lines.append(f"G_margin={bounds.G_margin(p, args.omega, cfg):.10g}")
    elif term == "G":
        raise UsageError("--term G needs --omega")
    if term in ("all", "Gs") and want_gs:
        if args.sieving_primes is not None:
            if args.core_omega is None:
                raise UsageError("--sieving-primes needs --core-omega")
            params = SieveParams.build(args.n or args.core_omega + len(args.sieving_primes),
                                       args.core_omega, args.sieving_primes)
        else:
            if args.s is None:
                raise UsageError("--n needs --s")
            params = SieveParams.worst_case(args.n, args.s)
        k = args.core_omega if args.core_omega is not None else params.core_omega
        lines += [f"s={params.s}", f"sieving_primes={','.join(map(str, params.sieving_primes))}",
                  f"core_omega={k}", f"delta={params.delta:.10f}", f"Delta={params.big_delta:.10f}",
                  f"G_s={bounds.G_s(p, k, params, cfg):.10g}",
                  f"G_s_margin={bounds.G_s_margin(p, k, params, cfg):.10g}"]
    elif term == "Gs":
        raise UsageError("--term Gs needs --n/--s or --sieving-primes")
    print("\n".join(lines), file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def _strip_manifest_flag(argv: Sequence[str]) -> list[str]:
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a == "--manifest":
            skip = True
            continue
        if a.startswith("--manifest="):
            continue
        out.append(a)
    return out


def _dispatch(argv: list[str], out, forced_config: dict | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "replay":
        data = json.loads(args.path.read_text())
        man = data.get("manifest", data)
        if "argv" not in man or "config" not in man:
            raise UsageError(f"{args.path} holds no manifest")
        return _dispatch(list(man["argv"]), out, forced_config=man["config"])
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s", stream=sys.stderr)
    cfg = _config(args, forced_config)
    manifest = RunManifest(
        command=args.command,
        argv=_strip_manifest_flag(argv),
        config=cfg.to_dict(),
        started_at=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    )
    if args.manifest is not None:
        args.manifest.write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n")
    if args.command == "tables":
        return cmd_tables(args, cfg, out)
    if args.command == "tree":
        return cmd_tree(args, cfg, out, manifest)
    if args.command == "verify-small":
        return cmd_verify_small(args, cfg, out)
    if args.command == "bounds":
        return cmd_bounds(args, cfg, out)
    raise UsageError(f"unknown command {args.command}")


def main(argv: Sequence[str] | None = None, out=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = out or sys.stdout
    try:
        return _dispatch(argv, out)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    except (ValueError, ArithmeticError, AssertionError, OSError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR


def run(argv: Sequence[str] | None = None) -> str:
    """main() with stdout captured; handy for tests."""
    buf = io.StringIO()
    main(argv, buf)
    return buf.getvalue()


if __name__ == "__main__":
    sys.exit(main())
