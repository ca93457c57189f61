"""Command-line front end: search, verify, simulate, export, table.

Exit codes: 0 lower bound found / tree accepted / Evasive safe,
1 algorithm wins / tree rejected / Evasive failed, 2 usage or I/O error
(and searches cut off by ``--timeout``).
"""
from __future__ import annotations

import argparse
import multiprocessing
import os
import queue
import sys
import time
from dataclasses import dataclass

from . import __version__
from .core import GameOutcome, SearchParams
from .hashing import DEFAULT_SEED

EXIT_OK, EXIT_NO, EXIT_ERROR = 0, 1, 2


@dataclass(frozen=True)
class TableRow:
    bins: int
    stretched: int
    opt: int
    expected: GameOutcome
    tag: str  # fast, slow or overnight

    @property
    def fraction(self) -> str:
        return f"{self.stretched}/{self.opt}"


ADV, ALG = GameOutcome.ADVERSARY_WINS, GameOutcome.ALGORITHM_WINS

TABLE = (
    TableRow(3, 19, 14, ADV, "fast"),
    TableRow(3, 22, 16, ALG, "fast"),
    TableRow(3, 26, 19, ALG, "fast"),
    TableRow(3, 30, 22, ALG, "fast"),
    TableRow(3, 33, 24, ALG, "fast"),
    TableRow(3, 34, 25, ADV, "slow"),
    TableRow(3, 37, 27, ALG, "slow"),
    TableRow(3, 41, 30, ALG, "overnight"),
    TableRow(3, 44, 32, ALG, "overnight"),
    TableRow(3, 45, 33, ADV, "slow"),
    TableRow(3, 48, 35, ALG, "overnight"),
    TableRow(3, 52, 38, ALG, "overnight"),
    TableRow(3, 55, 40, ALG, "overnight"),
    TableRow(3, 56, 41, ALG, "overnight"),
    TableRow(4, 19, 14, ADV, "slow"),
    TableRow(5, 19, 14, ADV, "overnight"),
)

TAGS = ("fast", "slow", "overnight")


def table_rows(budget: str = "fast") -> list[TableRow]:
    """Rows whose tag is within ``budget``: fast < slow < overnight."""
    limit = TAGS.index(budget)
    return [r for r in TABLE if TAGS.index(r.tag) <= limit]


def _outcome_word(outcome: GameOutcome) -> str:
    return "adversary" if outcome is ADV else "algorithm"


class Timeout(Exception):
    pass


def _child(q, fn, args):
    try:
        q.put(fn(*args))
    except BaseException as exc:  # forwarded to the parent
        q.put(exc)


def run_limited(fn, args, timeout: float | None):
    """Run ``fn(*args)``, in a child process when a timeout is given.

    The compiled search holds the interpreter for its whole run, so a
    separate process is the only reliable way to stop it.
    """
    if not timeout:
        return fn(*args)
    ctx = multiprocessing.get_context("fork")
    q = ctx.Queue()
    proc = ctx.Process(target=_child, args=(q, fn, args), daemon=True)
    proc.start()
    try:
        result = q.get(timeout=timeout)
    except queue.Empty:
        proc.kill()
        proc.join()
        raise Timeout(f"timed out after {timeout:g}s") from None
    proc.join()
    if isinstance(result, BaseException):
        raise result
    return result


def _params(args, bins, stretched, opt, **extra) -> SearchParams:
    return SearchParams(bins, stretched, opt, cache_bits=args.cache_bits,
                        chain_length=args.chain_length, hash_seed=args.hash_seed,
                        paranoid=args.paranoid, **extra)


def _search(params: SearchParams, backend: str):
    from .search import search_main
    return search_main(params, backend)


def cmd_search(args) -> int:
    from .treeio import emit_json
    params = _params(args, args.bins, args.stretched, args.opt, gs_pruning=not args.no_gs,
                     caching=not args.no_cache, record_tree=bool(args.emit_tree))
    try:
        result = run_limited(_search, (params, args.backend), args.timeout)
    except Timeout as exc:
        print(f"{params.bins} bins {params.stretched}/{params.opt}: indeterminate ({exc})")
        return EXIT_ERROR
    ratio = params.stretched / params.opt
    if result.outcome is ADV:
        print(f"{params.bins} bins {params.stretched}/{params.opt}: adversary wins "
              f"(lower bound {ratio:.4f})")
    else:
        print(f"{params.bins} bins {params.stretched}/{params.opt}: algorithm wins")
    if args.stats:
        print(f"backend={result.backend}")
        for line in result.stats.lines():
            print(line)
    if args.emit_tree and result.tree is not None:
        with open(args.emit_tree, "wb") as fh:
            fh.write(emit_json(result.tree))
        print(f"tree={args.emit_tree} nodes={result.tree.node_count()}")
    print(f"time={result.seconds:.2f}s", file=sys.stderr)
    return EXIT_OK if result.outcome is ADV else EXIT_NO


def cmd_verify(args) -> int:
    from .treeio import parse_json, verify_tree
    with open(args.file, "rb") as fh:
        tree = parse_json(fh.read())
    report = verify_tree(tree, args.bins, args.stretched, args.opt)
    lines = [str(v) for v in report.violations]
    if report.secondary:
        lines.append(f"{len(report.secondary)} nodes verified by the secondary method")
    lines.append(report.summary())
    for line in lines:
        print(line)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    return EXIT_OK if report.accepted else EXIT_NO


def cmd_export(args) -> int:
    from .treeio import emit_dot, parse_json
    with open(args.file, "rb") as fh:
        tree = parse_json(fh.read())
    data = emit_dot(tree, compact_form=args.compact)
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
    return EXIT_OK


def cmd_simulate(args) -> int:
    from . import evasive
    k = args.denominator
    if args.adversary == "exhaustive":
        report = evasive.exhaustive_check(k, args.assert_analysis, args.backend)
    elif args.adversary == "random":
        report = evasive.random_check(k, args.sequences, args.seed, args.assert_analysis,
                                       backend=args.backend)
    else:
        if not args.file:
            raise ValueError("--adversary file needs --file PATH")
        with open(args.file) as fh:
            items = evasive.read_sequence(fh, k, args.backend)
        state = evasive.Evasive(k)
        report = evasive.SimulationReport(k, sequences=1)
        trace = []
        try:
            for item in items:
                phase = state.phase
                index = state.step(item)
                gs = state.player.mode if state.player is not None else None
                trace.append(evasive.Placement(item, index, phase, tuple(state.loads),
                                               gs if isinstance(gs, evasive.GsId) else None))
                report.items += 1
        except evasive.EvasiveError as exc:
            report.overpacks.append((tuple(items), str(exc)))
        report.max_load = max(state.loads)
        if args.trace:
            for line in evasive.iter_trace(trace):
                print(line)
        if args.assert_analysis:
            bad = evasive.assert_analysis_invariants(state)
            if bad:
                report.analysis_violations.append((tuple(items), bad))
    for key, value in report.as_dict().items():
        print(f"{key}={value}")
    for seq, message in report.overpacks[:10]:
        print(f"overpack: {message} items={' '.join(map(str, seq))}")
    for seq, bad in report.analysis_violations[:10]:
        print(f"analysis: {'; '.join(bad)} items={' '.join(map(str, seq))}")
    if report.overpacks or report.analysis_violations:
        return EXIT_NO
    return EXIT_OK


def cmd_table(args) -> int:
    failures = 0
    print(f"{'m':>2} {'S/T':>6} {'ratio':>7} {'computed':>13} {'expected':>10}")
    for row in table_rows(args.filter):
        params = _params(args, row.bins, row.stretched, row.opt)
        start = time.perf_counter()
        try:
            result = run_limited(_search, (params, args.backend), args.timeout)
            computed = _outcome_word(result.outcome)
            status = "ok" if result.outcome is row.expected else "MISMATCH"
            failures += result.outcome is not row.expected
        except Timeout:
            computed, status = "INDETERMINATE", "timeout"
        elapsed = time.perf_counter() - start
        print(f"{row.bins:>2} {row.fraction:>6} {row.stretched / row.opt:>7.4f} "
              f"{computed:>13} {_outcome_word(row.expected):>10}  {status}", flush=True)
        print(f"{row.bins} {row.fraction} time={elapsed:.2f}s", file=sys.stderr, flush=True)
    return EXIT_NO if failures else EXIT_OK


def _int_auto(text: str) -> int:
    return int(text, 0)


def _default_cache_bits() -> int:
    raw = os.environ.get("BINSTRETCH_CACHE_BITS")
    if raw is None:
        return 25
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"BINSTRETCH_CACHE_BITS must be an integer, got {raw!r}")


def _add_globals(p: argparse.ArgumentParser, suppress: bool):
    def d(value):
        return argparse.SUPPRESS if suppress else value

    p.add_argument("--hash-seed", type=_int_auto, default=d(DEFAULT_SEED),
                   help="seed of the Zobrist tables")
    p.add_argument("--cache-bits", type=int, default=d(_default_cache_bits()),
                   help="log2 of the bucket count (env BINSTRETCH_CACHE_BITS)")
    p.add_argument("--chain-length", type=int, default=d(4))
    p.add_argument("--paranoid", action="store_true", default=d(False),
                   help="compare full configurations on cache hits")
    p.add_argument("--timeout", type=float, default=d(None), metavar="SECONDS")
    p.add_argument("--backend", choices=("auto", "python", "compiled"), default=d("auto"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="binstretch",
                                     description="Online bin stretching: lower-bound search "
                                                 "and the Evasive algorithm.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_globals(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_globals(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("search", parents=[common], help="solve one game instance")
    s.add_argument("--bins", "-m", type=int, required=True)
    s.add_argument("--stretched", "-S", type=int, required=True)
    s.add_argument("--opt", "-T", type=int, required=True)
    s.add_argument("--no-gs", action="store_true", help="disable good-situation pruning")
    s.add_argument("--no-cache", action="store_true")
    s.add_argument("--emit-tree", metavar="FILE", help="write the winning tree as JSON")
    s.add_argument("--stats", action="store_true")
    s.set_defaults(func=cmd_search)

    v = sub.add_parser("verify", parents=[common], help="check a strategy tree")
    v.add_argument("file")
    v.add_argument("--bins", "-m", type=int, required=True)
    v.add_argument("--stretched", "-S", type=int, required=True)
    v.add_argument("--opt", "-T", type=int, required=True)
    v.add_argument("--report", metavar="FILE")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("export", parents=[common], help="render a tree for graphviz")
    e.add_argument("file")
    e.add_argument("--format", choices=("dot",), default="dot")
    e.add_argument("--compact", action="store_true",
                   help="merge forced item sequences into one vertex")
    e.add_argument("--output", "-o", metavar="FILE")
    e.set_defaults(func=cmd_export)

    m = sub.add_parser("simulate", parents=[common], help="run Evasive against an adversary")
    m.add_argument("--denominator", "-k", type=int, default=1)
    m.add_argument("--adversary", choices=("exhaustive", "random", "file"), default="random")
    m.add_argument("--file", metavar="PATH", help="item sizes separated by whitespace")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--sequences", type=int, default=1000)
    m.add_argument("--trace", action="store_true")
    m.add_argument("--assert-analysis", action="store_true")
    m.set_defaults(func=cmd_simulate)

    t = sub.add_parser("table", parents=[common], help="reproduce the result tables")
    t.add_argument("--filter", choices=TAGS, default="fast")
    t.set_defaults(func=cmd_table)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"binstretch: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
