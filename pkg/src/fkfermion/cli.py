"""``fkf``: command-line access to domains, loops, windings, observables and checks.

Exit codes: 0 success, 1 a verification check failed, 2 usage error,
3 resource refusal (enumeration cap or spin-space limit).
"""

from __future__ import annotations

import argparse
import csv
from dataclasses import dataclass, field
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import checks
from .configuration import FkConfig, extract_loops
from .engines import DEFAULT_MAX_EDGES, EnumerationCapError
from .holomorphy import HolomorphyError
from .lattice import LatticeError, build_domain
from .measures import ParameterError, RoutingError, params_from
from .observables import InsertionSet, fermion_exact, fermion_mc
from .winding import WindingError, path_winding, winding_phase

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3
SUITES = ("lemma-loop", "winding", "equivalence", "sholo", "residue", "pfaffian",
          "exploration", "coupling")


class UsageError(ValueError):
    pass


# ----------------------------------------------------------------------
# output

def _encode(obj) -> str:
    """JSON with sorted keys and floats written with 17 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(obj, complex):
        return _encode({"re": obj.real, "im": obj.imag})
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ", ".join(f"{json.dumps(k)}: {_encode(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj) -> str:
    return _encode(obj)


def fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class RunReport:
    command: list
    domain: dict
    params: dict | None
    seed: int | None = None
    results: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def as_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "command": self.command, "domain": self.domain,
                "params": self.params, "seed": self.seed, "results": self.results,
                "checks": self.checks, "passed": self.passed, "wall_time": self.wall_time}

    def to_json(self) -> str:
        return dumps(self.as_dict())


TABLE_FIELDS = ("param", "re", "im", "stderr")


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_FIELDS)
    for r in rows:
        writer.writerow([fmt(r[k]) for k in TABLE_FIELDS])
    return buf.getvalue()


def csv_to_rows(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    return [{k: float(r[k]) for k in TABLE_FIELDS} for r in reader]


def rows_to_json(rows) -> str:
    return dumps({"schema_version": SCHEMA_VERSION, "rows": list(rows)})


def json_to_rows(text: str) -> list[dict]:
    return [{k: float(r[k]) for k in TABLE_FIELDS} for r in json.loads(text)["rows"]]


# ----------------------------------------------------------------------
# argument parsing

def default_threads() -> int:
    value = os.environ.get("FKF_THREADS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def _add_domain(p, width=3, height=3):
    p.add_argument("-w", "--width", type=int, default=width)
    p.add_argument("-h", "--height", type=int, default=height)
    p.add_argument("--help", action="help", help="show this help message and exit")


def _add_params(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--p", type=float, dest="p")
    g.add_argument("--beta", type=float)
    g.add_argument("--t", type=float, dest="t")
    g.add_argument("--critical", action="store_true")


def _add_engine(p):
    p.add_argument("--shards", type=int, default=1)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $FKF_THREADS or 1)")
    p.add_argument("--max-edges", type=int, default=DEFAULT_MAX_EDGES)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fkf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("domain", add_help=False, help="entity counts and adjacency")
    _add_domain(p)
    p.add_argument("--dump", action="store_true")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("loops", add_help=False, help="loops of one configuration")
    _add_domain(p)
    p.add_argument("--config", required=True, help="hex bitmask of open edges")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("winding", add_help=False, help="winding between two corners")
    _add_domain(p)
    p.add_argument("--config", required=True)
    p.add_argument("--from", dest="src", required=True)
    p.add_argument("--to", dest="dst", required=True)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("fermion", add_help=False, help="fermionic observable")
    _add_domain(p)
    _add_params(p)
    _add_engine(p)
    p.add_argument("--corners", required=True, help='"x,y,Q;x,y,Q[;...]"')
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--mc", action="store_true")
    p.add_argument("--sweeps", type=int, default=100_000)
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--allow-odd", action="store_true")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("verify", add_help=False, help="run a verification suite")
    p.add_argument("suite")
    _add_domain(p)
    _add_params(p)
    _add_engine(p)
    p.add_argument("--corners", default=None)
    p.add_argument("--sweeps", type=int, default=0, help="chain sweeps for the coupling suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("table", add_help=False, help="parameter or separation sweep as CSV")
    _add_domain(p, 2, 2)
    p.add_argument("--sweep", choices=("p", "separation"), default="p")
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--p-min", type=float, default=0.0)
    p.add_argument("--p-max", type=float, default=0.9)
    p.add_argument("--corners", default=None)
    _add_params(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def _params(args, default_critical=True):
    given = any(getattr(args, k, None) is not None for k in ("p", "beta", "t"))
    critical = getattr(args, "critical", False) or (default_critical and not given)
    return params_from(p=args.p, beta=args.beta, t=args.t, critical=critical)


# ----------------------------------------------------------------------
# commands

def cmd_domain(args, argv):
    d = build_domain(args.width, args.height)
    if args.dump:
        print(d.dumps())
        return EXIT_OK
    counts = d.to_dict()["counts"]
    if args.json:
        print(dumps({"width": d.width, "height": d.height, "counts": counts}))
    else:
        for k in sorted(counts):
            print(f"{k}: {counts[k]}")
    return EXIT_OK


def _config(d, text):
    try:
        return FkConfig.from_hex(d, text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_loops(args, argv):
    d = build_domain(args.width, args.height)
    loops = extract_loops(_config(d, args.config))
    if args.json:
        print(dumps({"config": args.config, "n_loops": len(loops.loops),
                     "loops": [list(L) for L in loops.loops],
                     "total_turns": [loops.total_turn(k) for k in range(len(loops.loops))]}))
    else:
        for k, L in enumerate(loops.loops):
            print(f"loop {k} ({loops.total_turn(k):+d} quarter turns): "
                  + " ".join(d.format_corner(c) for c in L))
    return EXIT_OK


def cmd_winding(args, argv):
    d = build_domain(args.width, args.height)
    loops = extract_loops(_config(d, args.config))
    z1, z2 = d.parse_corner(args.src), d.parse_corner(args.dst)
    try:
        q = path_winding(loops, z1, z2)
        phi = winding_phase(loops, z1, z2)
        out = {"connected": True, "q": q, "phi": phi}
    except WindingError:
        out = {"connected": False, "q": None, "phi": None}
    if args.json:
        print(dumps(out))
    elif out["connected"]:
        print(f"q = {q} quarter turns, phi = {phi:+d}")
    else:
        print("corners are not on a common loop")
    return EXIT_OK


def _threads(args):
    return args.threads if args.threads is not None else default_threads()


def cmd_fermion(args, argv):
    d = build_domain(args.width, args.height)
    params = _params(args)
    ins = InsertionSet.parse(d, args.corners)
    if len(ins) % 2 and not args.allow_odd:
        raise UsageError("an odd number of corners needs --allow-odd")
    if len(ins) == 0:
        raise UsageError("no corners given")
    t0 = time.perf_counter()
    if args.mc:
        value = fermion_mc(d, params, ins, args.sweeps, args.seed, burn_in=args.burn_in)
        seed = args.seed
    else:
        value = fermion_exact(d, params, ins, shards=args.shards, threads=_threads(args),
                              max_edges=args.max_edges)
        seed = None
    if args.json:
        report = RunReport(argv, {"width": d.width, "height": d.height}, params.as_dict(), seed,
                           [dict(value.as_dict(), corners=args.corners)], [],
                           time.perf_counter() - t0)
        print(report.to_json())
    else:
        v = value.as_dict()
        print(f"f = {fmt(v['value_re'])} ({v['mode']}, stderr {fmt(v['stderr'])}, "
              f"{v['n_samples']} samples)")
    return EXIT_OK


def _corner_sets(d, text, size, count):
    if text:
        return [InsertionSet.parse(d, chunk).corners for chunk in text.split("|")]
    return checks.well_separated_sets(d, size, count)


def run_suite(suite, d, params, args) -> list:
    if suite == "lemma-loop":
        return checks.check_loop_lemma(d) + checks.check_euler(d)
    if suite == "winding":
        return checks.check_winding(d)
    if suite == "coupling":
        return checks.check_coupling(d, params, n_sweeps=args.sweeps, seed=args.seed)
    if suite == "equivalence":
        sets = _corner_sets(d, args.corners, 2, 6) + _corner_sets(d, None, 4, 1)
        return checks.check_equivalence_sets(d, params, sets)
    if suite == "sholo":
        z = (InsertionSet.parse(d, args.corners).corners[0] if args.corners
             else checks.default_insertion(d))
        return checks.check_sholo(d, params, z)
    if suite == "residue":
        return checks.check_residue(d, params, _corner_sets(d, args.corners, 3, 2))
    if suite == "pfaffian":
        return checks.check_pfaffian(d, params, _corner_sets(d, args.corners, 4, 5))
    if suite == "exploration":
        sets = _corner_sets(d, args.corners, 2, 4) + _corner_sets(d, None, 4, 2)
        return checks.check_exploration(d, params, sets)
    raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")


def cmd_verify(args, argv):
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    d = build_domain(args.width, args.height)
    params = _params(args)
    t0 = time.perf_counter()
    results = run_suite(args.suite, d, params, args)
    report = RunReport(argv, {"width": d.width, "height": d.height}, params.as_dict(), args.seed,
                       [], [c.as_dict() for c in results], time.perf_counter() - t0)
    if args.json:
        print(report.to_json())
    else:
        for c in results:
            status = "PASS" if c.passed else "FAIL"
            print(f"{status}  {c.name}: {fmt(c.value)} (tolerance {fmt(c.tolerance)})"
                  + (f"  [{c.detail}]" if c.detail else ""))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_table(args, argv):
    d = build_domain(args.width, args.height)
    if args.points < 1:
        raise UsageError("the sweep needs at least one point")
    rows = []
    if args.sweep == "p":
        ins = (InsertionSet.parse(d, args.corners).corners if args.corners
               else (d.corner_by_spec(0, 0, "NE"), d.corner_by_spec(1, 1, "SW")))
        grid = np.linspace(args.p_min, args.p_max, args.points)
        for p in grid:
            v = fermion_exact(d, params_from(p=float(p)), ins)
            rows.append({"param": float(p), "re": v.real, "im": 0.0, "stderr": 0.0})
    else:
        params = _params(args)
        z1 = (InsertionSet.parse(d, args.corners).corners[0] if args.corners
              else d.corner_by_spec(0, 0, "NE"))
        x0, y0 = d.vertex_xy(z1 >> 2)
        for dx in range(1, d.width - x0):
            if len(rows) >= args.points:
                break
            z2 = d.corner_by_spec(x0 + dx, y0, "NE")
            v = fermion_exact(d, params, (z1, z2))
            rows.append({"param": float(dx), "re": v.real, "im": 0.0, "stderr": 0.0})
    if not rows:
        raise UsageError("the sweep is empty")
    sys.stdout.write(rows_to_csv(rows) if args.format == "csv" else rows_to_json(rows) + "\n")
    return EXIT_OK


COMMANDS = {"domain": cmd_domain, "loops": cmd_loops, "winding": cmd_winding,
            "fermion": cmd_fermion, "verify": cmd_verify, "table": cmd_table}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return COMMANDS[args.command](args, argv)
    except (EnumerationCapError, MemoryError) as exc:
        print(f"fkf: refused: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (UsageError, LatticeError, ParameterError, RoutingError, HolomorphyError,
            ValueError) as exc:
        print(f"fkf: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
