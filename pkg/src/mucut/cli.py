"""Command-line front end.

Exit status: 0 on success, 1 when a proof has defects, is invalid or cannot
be simulated, 2 on usage and parse errors.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import InvalidInput, MucutError, ParseError, SemanticError, SimulationFailed
from .document import print_graph, print_prefix, read_document


def _load(path: str):
    return read_document(path).to_graph()


def cmd_check(args) -> int:
    from .proof import check_proofgraph
    p = _load(args.file)
    defects = check_proofgraph(p)
    for d in defects:
        print(d)
    if not defects:
        print(f"{p.name}: ok ({len(p)} nodes)")
    return 1 if defects else 0


def cmd_validate(args) -> int:
    from .proof import check_proofgraph
    from .validity import validity_check
    p = _load(args.file)
    defects = check_proofgraph(p)
    if defects:
        for d in defects:
            print(d)
        return 1
    v = validity_check(p, method=args.method)
    print(v.report())
    return 0 if v.valid else 1


def cmd_translate(args) -> int:
    from .translate import circ_proof, lin_proof, sk_proof
    p = _load(args.file)
    fn = {"skeleton": sk_proof, "circ": circ_proof, "linear": lin_proof}[args.to]
    sys.stdout.write(print_graph(fn(p)))
    return 0


def cmd_reduce(args) -> int:
    from .reduction import fair_reduce
    p = _load(args.file)
    try:
        prefix, trace, status = fair_reduce(p, args.fuel, args.depth, check_valid=not args.no_check)
    except InvalidInput as e:
        print(e, file=sys.stderr)
        return 1
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            for line in trace.lines():
                fh.write(line + "\n")
    print(f"# {status} after {len(trace)} steps")
    sys.stdout.write(print_prefix(prefix, p.system, p.name, p.abbrevs))
    return 0


def cmd_simulate(args) -> int:
    from .reduction import FairReducer, working_tree
    from .translate import TreeTranslator, lin_proof, simulate_step
    p = _load(args.file)
    if p.system is not None and p.system.classical:
        p = lin_proof(p)
    red = FairReducer(working_tree(p))
    out = None
    for _ in range(args.step + 1):
        out = red.step()
        if out is None:
            print(f"no redex left after {red.steps} steps", file=sys.stderr)
            return 1
    r, old, new = out
    try:
        res = simulate_step(old, r, new, TreeTranslator())
    except SimulationFailed as e:
        print(e)
        return 1
    print(r.line(args.step))
    print(f"simulated by {res.n} exponential step(s):")
    for k, s in enumerate(res.steps):
        print("  " + s.line(k))
    return 0


def cmd_gen_corpus(args) -> int:
    from .corpus import apply_double, numeral, example_corpus
    os.makedirs(args.dir, exist_ok=True)
    files = {
        "ex1": "example_circular", "inconsistent": "inconsistent_loop", "pi_inf": "pi_inf",
        "conat": "conat_inf", "double": "double",
    }
    corpus = example_corpus()
    written = []
    for fname, key in files.items():
        written.append((fname, corpus[key]))
    for n in range(args.max_n + 1):
        written.append((f"pi_{n}", numeral(n)))
    for n in range(min(args.max_n, 3) + 1):
        written.append((f"double_{n}", apply_double(n)))
    for fname, p in written:
        path = os.path.join(args.dir, fname + ".mulk")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(print_graph(p))
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mucut", description="Circular proofs: checking, validity, translation, reduction.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("check", help="report local defects of a proof file")
    s.add_argument("file")
    s.set_defaults(fn=cmd_check)

    s = sub.add_parser("validate", help="decide the validity condition")
    s.add_argument("file")
    s.add_argument("--method", choices=["auto", "rank", "ramsey"], default="auto")
    s.set_defaults(fn=cmd_validate)

    s = sub.add_parser("translate", help="translate a proof ('-' reads stdin)")
    s.add_argument("file")
    s.add_argument("--to", required=True, choices=["skeleton", "circ", "linear"])
    s.set_defaults(fn=cmd_translate)

    s = sub.add_parser("reduce", help="fair multicut reduction up to a depth")
    s.add_argument("file")
    s.add_argument("--fuel", type=int, default=1000)
    s.add_argument("--depth", type=int, default=4)
    s.add_argument("--trace", metavar="FILE")
    s.add_argument("--no-check", action="store_true", help="skip the validity check of the input")
    s.set_defaults(fn=cmd_reduce)

    s = sub.add_parser("simulate", help="replay one fair reduction step on the exponential translation")
    s.add_argument("file")
    s.add_argument("--step", type=int, default=0)
    s.set_defaults(fn=cmd_simulate)

    s = sub.add_parser("gen-corpus", help="write the example proofs")
    s.add_argument("dir")
    s.add_argument("--max-n", type=int, default=5)
    s.set_defaults(fn=cmd_gen_corpus)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, SemanticError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except MucutError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
