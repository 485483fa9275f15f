"""Command line for theory graphs.

Five commands over a graph (the bundled one, or a theory file given
with --graph):

    check       discharge the obligations of every morphism
    verify      model-check every axiom and meaning formula
    run         apply one transformer to terms given on the command line
    generate    materialize a derived theory and print the new graph
    export-dot  emit the graph as DOT, optionally colored by check status

check and verify emit a JSON report with a determinism hash: the same
graph, options, and seed produce byte-identical output. Exit codes:
0 when nothing failed (indeterminate results do not fail a run), 1 when
some obligation, claim, or run failed, 2 for unusable input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from typing import Optional

from .errors import BtgError, SortError, TransformerError
from .generate import (
    GenericTransformer,
    gen_evaluator,
    gen_homomorphism_theory,
    gen_term_language,
    power_template,
    specialize_generic,
)
from .graph import TheoryGraph, inclusion, register_transformer
from .prelude import standard_graph
from .semantics import (
    ExhaustiveDomain,
    ExhaustiveTerms,
    Interp,
    IntDomain,
    Model,
    RandomStrategy,
    ZpDomain,
    check_formula,
)
from .sexpr import parse_sexprs
from .textfmt import elaborate_file, parse_term, print_graph, print_term
from .transformers import apply_transformer
from .meaning import verify_all

REPORT_SCHEMA = "btg-report/1"

#: Templates available to `generate specialize` even when the source
#: node does not carry one.
DEFAULT_TEMPLATES = {"power": power_template}


def _load_graph(spec: str) -> TheoryGraph:
    if spec == "prelude":
        return standard_graph()
    return elaborate_file(spec)


def _emit(report: dict, args) -> None:
    """Stamp the determinism hash and write the report.

    The hash covers everything except itself and the timings block, so
    runs differing only in wall-clock time still hash identically.
    """
    payload = {k: v for k, v in report.items()
               if k not in ("determinism_hash", "timings")}
    report["determinism_hash"] = hashlib.sha256(
        json.dumps(payload, sort_keys=True).encode()).hexdigest()
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_text(text: str, args) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _strategy(args):
    if getattr(args, "depth", 0):
        return ExhaustiveTerms(args.depth)
    return RandomStrategy(args.samples, args.seed)


def _options(args, *names) -> dict:
    return {n: getattr(args, n) for n in names if getattr(args, n) is not None}


# --- check ------------------------------------------------------------------------------


def cmd_check(g: TheoryGraph, args) -> int:
    strategy = _strategy(args)
    names = args.edges or [m.name for m in g.edges]
    t0 = time.perf_counter()
    results = []
    counts = {"ok": 0, "evidence": 0, "failed": 0, "error": 0}
    for name in names:
        edge = g.edge(name)  # raises GraphError on unknown names
        entry = {"edge": name, "source": edge.source.name,
                 "target": edge.target.name}
        try:
            obs = g.check_edge(name, strategy)
        except BtgError as e:
            entry["status"] = "error"
            entry["error"] = f"{type(e).__name__}: {e}"
            counts["error"] += 1
            results.append(entry)
            continue
        entry["status"] = g.edge_status(name)
        entry["obligations"] = [ob.describe() for ob in obs]
        counts[entry["status"]] += 1
        results.append(entry)
    report = {
        "schema": REPORT_SCHEMA,
        "command": "check",
        "graph": args.graph,
        "options": {**_options(args, "samples", "seed"),
                    "depth": args.depth or None},
        "results": results,
        "summary": counts,
    }
    if args.timings:
        report["timings"] = {"seconds": round(time.perf_counter() - t0, 3)}
    _emit(report, args)
    return 1 if counts["failed"] or counts["error"] else 0


# --- verify -----------------------------------------------------------------------------


def _zp_model(model: Model, p: int) -> Optional[Model]:
    """The mod-p quotient of an integer model: every carrier becomes
    Z_p, descriptor interpretations carry over unchanged. Models with
    host-code interpretations or non-integer carriers do not quotient."""
    if not model.carriers:
        return None
    if not all(isinstance(d, IntDomain) for d in model.carriers.values()):
        return None
    if not all(isinstance(i, Interp) for i in model.interps.values()):
        return None
    return Model(model.name, model.signature,
                 {sn: ZpDomain(p) for sn in model.carriers},
                 dict(model.interps))


def _zp_claims(theory, p: int) -> list[dict]:
    """Exhaustive evidence for unconditional axioms in the mod-p
    quotient of each integer model. Conditional axioms are skipped: a
    hypothesis true mod p need not be true in the original model, so
    the quotient argument does not apply to them."""
    out = []
    for model in theory.models:
        zp = _zp_model(model, p)
        if zp is None:
            continue
        for i, ax in enumerate(theory.axioms):
            if ax.hypotheses:
                out.append({"kind": "axiom-zp", "name": f"axiom {i}",
                            "model": f"{model.name} mod {p}",
                            "status": "indeterminate",
                            "cases_run": 0,
                            "note": "conditional axiom; quotient evidence "
                                    "does not apply"})
                continue
            rep = check_formula(zp, ax, ExhaustiveDomain())
            out.append({"kind": "axiom-zp", "name": f"axiom {i}",
                        "model": f"{model.name} mod {p}",
                        **rep.describe()})
    return out


def cmd_verify(g: TheoryGraph, args) -> int:
    strategy = _strategy(args)
    nodes = [g.node(n) for n in args.nodes] if args.nodes else list(g.nodes)
    t0 = time.perf_counter()
    results = []
    counts = {"pass": 0, "fail": 0, "indeterminate": 0}
    for t in nodes:
        claims = [r.describe() for r in verify_all(t, strategy)]
        if args.zp:
            ZpDomain(args.zp)  # reject a composite modulus up front
            claims += _zp_claims(t, args.zp)
        for c in claims:
            counts[c["status"]] += 1
        results.append({"node": t.name, "claims": claims})
    report = {
        "schema": REPORT_SCHEMA,
        "command": "verify",
        "graph": args.graph,
        "options": {**_options(args, "samples", "seed"),
                    "depth": args.depth or None, "zp": args.zp},
        "results": results,
        "summary": counts,
    }
    if args.timings:
        report["timings"] = {"seconds": round(time.perf_counter() - t0, 3)}
    _emit(report, args)
    return 1 if counts["fail"] else 0


# --- run --------------------------------------------------------------------------------


def cmd_run(g: TheoryGraph, args) -> int:
    theory = g.node(args.node)
    tr = theory.transformer(args.transformer)
    if len(args.terms) != tr.arity:
        print(f"error: {tr.name} takes {tr.arity} argument(s), "
              f"got {len(args.terms)}", file=sys.stderr)
        return 2
    terms = []
    for text, sort in zip(args.terms, tr.arg_sorts):
        nodes = parse_sexprs(text)
        if len(nodes) != 1:
            print(f"error: expected one term, got {text!r}", file=sys.stderr)
            return 2
        terms.append(parse_term(nodes[0], theory.signature, sort,
                                allow_free=True))
    try:
        result = apply_transformer(theory, tr.name, terms)
    except (TransformerError, SortError) as e:
        if args.json:
            _emit({"schema": REPORT_SCHEMA, "command": "run",
                   "graph": args.graph, "node": args.node,
                   "transformer": tr.name, "arguments": args.terms,
                   "status": "fail",
                   "error": f"{type(e).__name__}: {e}"}, args)
        else:
            print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    rendered = print_term(result, factor_sugar=True)
    if args.json:
        _emit({"schema": REPORT_SCHEMA, "command": "run",
               "graph": args.graph, "node": args.node,
               "transformer": tr.name, "arguments": args.terms,
               "status": "pass", "result": rendered}, args)
    else:
        _write_text(rendered + "\n", args)
    return 0


# --- generate ---------------------------------------------------------------------------


def _pairs(option: str, items) -> dict[str, str]:
    out = {}
    for item in items:
        if "=" not in item:
            raise BtgError(f"--{option} takes NAME=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k] = v
    return out


def _find_template(theory, name: str) -> GenericTransformer:
    if theory.has_transformer(name):
        tr = theory.transformer(name)
        if isinstance(tr.body, GenericTransformer):
            return tr.body
    if name in DEFAULT_TEMPLATES:
        return DEFAULT_TEMPLATES[name]()
    raise BtgError(f"no template {name!r} on {theory.name!r} or built in")


def cmd_generate(g: TheoryGraph, args) -> int:
    if args.kind == "term-language":
        g.add_node(gen_term_language(g.node(args.source), args.sorts,
                                     args.new))
    elif args.kind == "evaluator":
        combined, _, _ = gen_evaluator(
            g.node(args.source), g.node(args.target),
            _pairs("ctor", args.ctor), args.name)
        g.add_node(combined)
    elif args.kind == "homomorphism":
        g.add_node(gen_homomorphism_theory(g.node(args.source), args.new))
    elif args.kind == "specialize":
        src = g.node(args.source)
        tr = specialize_generic(_find_template(src, args.template),
                                _pairs("bind", args.bind), src, args.name)
        new = register_transformer(src, tr).replace(name=args.new)
        g.add_node(new)
        g.add_edge(inclusion(f"inc:{src.name}->{args.new}", src, new))
    _write_text(print_graph(g), args)
    return 0


# --- export-dot -------------------------------------------------------------------------

_DOT_COLORS = {"ok": "green4", "evidence": "dodgerblue3", "failed": "red2",
               "unchecked": "gray50", "error": "orange3"}


def cmd_export_dot(g: TheoryGraph, args) -> int:
    errors = {}
    if args.check:
        strategy = _strategy(args)
        for m in g.edges:
            try:
                g.check_edge(m.name, strategy)
            except BtgError as e:
                errors[m.name] = f"{type(e).__name__}"
    lines = ["digraph theories {", "  rankdir=LR;",
             '  node [shape=box, fontname="Helvetica"];',
             '  edge [fontname="Helvetica", fontsize=10];']
    for t in g.nodes:
        label = (f"{t.name}\\n{len(t.axioms)} axioms, "
                 f"{len(t.transformers)} transformers, "
                 f"{len(t.meaning_formulas)} claims")
        lines.append(f'  "{t.name}" [label="{label}"];')
    for m in g.edges:
        status = "error" if m.name in errors else g.edge_status(m.name)
        color = _DOT_COLORS[status]
        label = f"{m.name}\\n{status}"
        lines.append(f'  "{m.source.name}" -> "{m.target.name}" '
                     f'[label="{label}", color={color}];')
    lines.append("}")
    _write_text("\n".join(lines) + "\n", args)
    return 0


# --- wiring -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", default="prelude", metavar="FILE",
                        help="theory file to load, or 'prelude' for the "
                             "bundled graph (default)")
    common.add_argument("--out", metavar="FILE",
                        help="write output here instead of stdout")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--samples", type=int, default=200,
                          help="random cases per claim (default 200)")
    sampling.add_argument("--seed", type=int, default=0,
                          help="seed for random strategies (default 0)")
    sampling.add_argument("--depth", type=int, default=0, metavar="D",
                          help="check by exhausting terms to depth D "
                               "instead of random sampling")
    sampling.add_argument("--timings", action="store_true",
                          help="include wall-clock timings in the report "
                               "(excluded from the determinism hash)")

    p = argparse.ArgumentParser(
        prog="btg",
        description="Check, verify, run, and grow graphs of theories "
                    "that combine axioms with computation.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common, sampling],
                       help="discharge the obligations of every morphism")
    c.add_argument("edges", nargs="*", metavar="EDGE",
                   help="edge names to check (default: all)")
    c.set_defaults(fn=cmd_check)

    v = sub.add_parser("verify", parents=[common, sampling],
                       help="model-check every axiom and meaning formula")
    v.add_argument("nodes", nargs="*", metavar="NODE",
                   help="theory names to verify (default: all)")
    v.add_argument("--zp", type=int, metavar="P",
                   help="also check unconditional axioms exhaustively in "
                        "the mod-P quotient of each integer model")
    v.set_defaults(fn=cmd_verify)

    r = sub.add_parser("run", parents=[common],
                       help="apply a transformer to terms")
    r.add_argument("node", help="theory carrying the transformer")
    r.add_argument("transformer")
    r.add_argument("terms", nargs="+", metavar="TERM",
                   help="arguments as terms, e.g. '(plus 1 2)' or '360'")
    r.add_argument("--json", action="store_true",
                   help="emit a JSON report instead of the bare term")
    r.set_defaults(fn=cmd_run)

    gen = sub.add_parser("generate",
                         help="materialize a derived theory and print "
                              "the grown graph's declarations")
    kinds = gen.add_subparsers(dest="kind", required=True)
    tl = kinds.add_parser("term-language", parents=[common])
    tl.add_argument("new", help="name for the generated theory")
    tl.add_argument("source")
    tl.add_argument("--sorts", nargs="+", required=True, metavar="SORT")
    ev = kinds.add_parser("evaluator", parents=[common])
    ev.add_argument("source", help="term-language node")
    ev.add_argument("target")
    ev.add_argument("--ctor", action="append", required=True,
                    metavar="CTOR=SYMBOL")
    ev.add_argument("--name", help="name for the combined theory")
    hm = kinds.add_parser("homomorphism", parents=[common])
    hm.add_argument("new")
    hm.add_argument("source")
    sp = kinds.add_parser("specialize", parents=[common])
    sp.add_argument("new", help="name for the widened theory")
    sp.add_argument("source")
    sp.add_argument("template", help="template on the source node, or a "
                                     "built-in one like 'power'")
    sp.add_argument("--bind", action="append", required=True,
                    metavar="ROLE=SYMBOL")
    sp.add_argument("--name", help="name for the specialized transformer")
    gen.set_defaults(fn=cmd_generate)

    d = sub.add_parser("export-dot", parents=[common, sampling],
                       help="emit the graph as DOT")
    d.add_argument("--check", action="store_true",
                   help="check all edges first and color them by status")
    d.set_defaults(fn=cmd_export_dot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        g = _load_graph(args.graph)
    except FileNotFoundError:
        print(f"error: no such file: {args.graph}", file=sys.stderr)
        return 2
    except BtgError as e:
        print(f"error loading {args.graph}: {type(e).__name__}: {e}",
              file=sys.stderr)
        return 2
    try:
        return args.fn(g, args)
    except BtgError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
