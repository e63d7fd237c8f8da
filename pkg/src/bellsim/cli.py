"""Command-line front end.

Every command reads a machine from a file path or from ``zoo:NAME`` and
prints a deterministic report to stdout.  ``--records`` switches the report
to bare ``key=value`` lines carrying the same numbers.  Exit codes: 0 on
success, 1 when validation or an assertion fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import sys

from . import mdf, zoo
from .belltest import (
    BellStats,
    ChshReport,
    as_machine_under_test,
    check_remote_independence,
    corner_oracle,
    default_inputs,
    empirical_chsh,
    exact_chsh,
    run_one,
    run_protocol,
    stats_from_records,
    theorem_witness,
)
from .compose import (
    CompoundFpsm,
    CompoundFqsm,
    EntangledAmplitude,
    HalfFpsm,
    IndependenceReport,
    Witness,
    compose_fpsm,
)
from .core import BellsimError, substream


def _fmt(x: float) -> str:
    # +0.0 folds a negative zero into "0.000000000000"
    return f"{x + 0.0:.12f}"


def _load(source: str) -> mdf.MdfDocument:
    if source.startswith("zoo:"):
        return zoo.builtin(source[len("zoo:"):]).document
    with open(source, "r", encoding="utf-8") as fh:
        return mdf.parse(fh.read())


def _print_chsh(rep: ChshReport, records: bool) -> None:
    cells = ((0, 0, rep.e00), (0, 1, rep.e01), (1, 0, rep.e10), (1, 1, rep.e11))
    for a, b, e in cells:
        if records:
            print(f"e{a}{b}={_fmt(e)}")
        else:
            print(f"e[{a},{b}] = {_fmt(e)}")
    if records:
        print(f"chsh={_fmt(rep.chsh)}")
        print(f"classification={rep.classification}")
    else:
        print(f"chsh = {_fmt(rep.chsh)}")
        print(f"classification = {rep.classification}")


def _print_half(label: str, rep: IndependenceReport, records: bool) -> None:
    if records:
        print(f"{label}_independent={1 if rep.independent else 0}")
    else:
        verdict = "independent of the remote selection" if rep.independent else "DEPENDENT on the remote selection"
        print(f"{label}: {verdict}")
    if rep.witness is not None:
        _print_witness(label, rep.witness, records)


def _print_witness(label: str, w: Witness, records: bool) -> None:
    if records:
        print(f"{label}_witness_output={w.output}")
        print(f"{label}_witness_next={w.next_state}")
        print(f"{label}_witness_own={w.own_input}")
        print(f"{label}_witness_lambda={w.lam}")
        print(f"{label}_witness_state={w.state}")
        print(f"{label}_witness_remote0={_fmt(w.value_remote0)}")
        print(f"{label}_witness_remote1={_fmt(w.value_remote1)}")
    else:
        print(
            f"witness[{label}]: p({w.output}, {w.next_state} | own={w.own_input}, "
            f"lambda={w.lam}, s={w.state}) = {_fmt(w.value_remote0)} at remote=0, "
            f"{_fmt(w.value_remote1)} at remote=1"
        )


def cmd_validate(args) -> int:
    doc = _load(args.source)
    if args.records:
        print(f"kind={doc.kind}")
        print(f"name={doc.name}")
        print("valid=1")
    else:
        print(f"{doc.kind} {doc.name}: valid")
    return 0


def cmd_exact(args) -> int:
    doc = _load(args.source)
    _print_chsh(exact_chsh(doc.machine), args.records)
    return 0


def _interactive_stats(mut, inputs, max_rounds: int, seed: int) -> BellStats:
    """Rounds where a human supplies the selections; everything else is drawn
    exactly as in batch mode and aggregated through the same tallies."""
    records = []
    r = 0
    while r < max_rounds:
        print(f"round {r}: a b (blank or EOF stops)> ", end="", file=sys.stderr, flush=True)
        line = sys.stdin.readline()
        if not line or not line.strip():
            break
        parts = line.split()
        if len(parts) != 2 or any(p not in ("0", "1") for p in parts):
            print("expected two bits, for example: 0 1", file=sys.stderr)
            continue
        rec = run_one(mut, inputs, substream(seed, r), a=int(parts[0]), b=int(parts[1]))
        print(f"A={rec.A} B={rec.B}", file=sys.stderr)
        records.append(rec)
        r += 1
    if not records:
        raise BellsimError("no rounds recorded")
    return stats_from_records(records)


def cmd_run(args) -> int:
    doc = _load(args.source)
    mut = as_machine_under_test(doc.machine)
    inputs = default_inputs(mut)
    if args.interactive:
        stats = _interactive_stats(mut, inputs, args.runs, args.seed)
    else:
        stats = run_protocol(mut, inputs, n_runs=args.runs, master_seed=args.seed)
    rep = empirical_chsh(stats)
    if args.records:
        print(f"runs={stats.total}")
        print(f"seed={args.seed}")
    else:
        print(f"runs = {stats.total}")
        print(f"seed = {args.seed}")
    for a in (0, 1):
        for b in (0, 1):
            n = int(stats.counts[a, b])
            mean = float(stats.sums[a, b]) / n
            if args.records:
                print(f"n{a}{b}={n}")
                print(f"mean{a}{b}={_fmt(mean)}")
            else:
                print(f"n[{a},{b}] = {n}")
                print(f"mean[{a},{b}] = {_fmt(mean)}")
    # no classification here: the estimate is noisy, and a sample mean a
    # fraction above an exact bound would mislabel the machine
    if args.records:
        print(f"chsh={_fmt(rep.chsh)}")
    else:
        print(f"chsh = {_fmt(rep.chsh)}")
    return 0


def _independence_halves(m):
    if isinstance(m, CompoundFpsm):
        return (
            ("left", check_remote_independence(m.left)),
            ("right", check_remote_independence(m.right)),
        )
    if isinstance(m, HalfFpsm):
        return ((f"half_{m.own_role}", check_remote_independence(m)),)
    if isinstance(m, CompoundFqsm):
        # quantum halves receive only their own selection, so there is no
        # remote column to compare
        return (
            ("left", IndependenceReport(True, None)),
            ("right", IndependenceReport(True, None)),
        )
    raise BellsimError("independence applies to half machines and pairs")


def cmd_independence(args) -> int:
    doc = _load(args.source)
    for label, rep in _independence_halves(doc.machine):
        _print_half(label, rep, args.records)
    return 0


def cmd_theorem(args) -> int:
    doc = _load(args.source)
    rep = theorem_witness(doc.machine)
    _print_chsh(rep.chsh, args.records)
    if args.records:
        print(f"violating={1 if rep.violating else 0}")
    else:
        print(f"violating = {'yes' if rep.violating else 'no'}")
    _print_half("left", rep.left, args.records)
    _print_half("right", rep.right, args.records)
    return 0


def cmd_corners(args) -> int:
    rep = corner_oracle()
    for a0, a1, b0, b1, v in rep.rows:
        if args.records:
            print(f"value[{a0},{a1},{b0},{b1}]={v}")
        else:
            print(f"A0={a0:2d} A1={a1:2d} B0={b0:2d} B1={b1:2d} value={v:2d}")
    if args.records:
        print(f"max={rep.max_abs}")
    else:
        print(f"max = {rep.max_abs}")
    return 0


def cmd_compose(args) -> int:
    doc_a = _load(args.left)
    doc_b = _load(args.right)
    ha, hb = doc_a.machine, doc_b.machine
    if not isinstance(ha, HalfFpsm) or not isinstance(hb, HalfFpsm):
        raise BellsimError("compose expects two half documents (kind fpsm with a role line)")
    init = None
    if args.init is not None:
        with open(args.init, "r", encoding="utf-8") as fh:
            init = mdf.parse_init_fragment(fh.read(), ha.fpsm.states, hb.fpsm.states)
        if isinstance(init, EntangledAmplitude):
            raise BellsimError("an entangled init fragment requires a quantum pair")
    compound = compose_fpsm(ha, hb, init)
    name = args.name if args.name is not None else f"{doc_a.name}_{doc_b.name}"
    text = mdf.serialize(compound, name=name)
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_zoo(args) -> int:
    if args.action == "list":
        for name in zoo.names():
            print(f"name={name}" if args.records else name)
        return 0
    if args.name is None:
        print("error: zoo export needs a machine name", file=sys.stderr)
        return 2
    sys.stdout.write(zoo.export(args.name))
    return 0


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _any_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellsim",
        description="Bell tests over finite probabilistic and quantum sequential machines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, func) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--records", action="store_true", help="print key=value lines")
        return p

    p = add("validate", "parse a machine file and run its validator", cmd_validate)
    p.add_argument("source", help="machine file or zoo:NAME")

    p = add("exact", "exact conditional expectations and CHSH value", cmd_exact)
    p.add_argument("source", help="machine file or zoo:NAME")

    p = add("run", "Monte Carlo protocol runs with per-cell tallies", cmd_run)
    p.add_argument("source", help="machine file or zoo:NAME")
    p.add_argument("--runs", type=_positive_int, default=100_000, help="number of runs (default 100000)")
    p.add_argument("--seed", type=_any_int, default=0, help="master seed (default 0)")
    p.add_argument(
        "--interactive",
        action="store_true",
        help="read the selections a b from stdin each round; EOF prints the report",
    )

    p = add("independence", "scan half tables for remote-selection dependence", cmd_independence)
    p.add_argument("source", help="half or pair file, or zoo:NAME")

    p = add("theorem", "exact CHSH plus dependence witnesses for a pair", cmd_theorem)
    p.add_argument("source", help="pair file or zoo:NAME")

    add("corners", "the sixteen corner values of the CHSH combination", cmd_corners)

    p = add("compose", "compose two halves into a pair document", cmd_compose)
    p.add_argument("left", help="role-a half (file or zoo:NAME)")
    p.add_argument("right", help="role-b half (file or zoo:NAME)")
    p.add_argument("--init", help="initial-condition fragment file (init_a/init_b or init_joint)")
    p.add_argument("--name", help="name for the composed machine")
    p.add_argument("-o", "--out", help="write the document here instead of stdout")

    p = add("zoo", "list built-in machines or export one", cmd_zoo)
    p.add_argument("action", choices=("list", "export"))
    p.add_argument("name", nargs="?", help="machine name (for export)")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (None, 0) else int(exc.code)
    try:
        return args.func(args)
    except BellsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
