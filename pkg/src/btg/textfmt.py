"""Concrete syntax: reading theory files and printing engine values.

A theory file is a sequence of parenthesized declarations:

    (theory NAME (sorts ...) (literals ...) (ops ...) (axioms ...)
                 (transformers ...))
    (model NAME THEORY (carrier SORT DOMAIN) ... (interp SYMBOL SPEC) ...)
    (meaning NAME THEORY TRANSFORMER (vars (v CLASS) ...) (claim CLAIM))
    (morphism NAME SOURCE TARGET (sorts (a b) ...) (symbols (f g) ...)
              [(transformers (f g)) ...] [(model-preserving)])
    (generic NAME (params (role arity) ...) (args KIND ...) (rules RULE ...))
    (generate term-language NEW SOURCE (sorts S ...))
    (generate evaluator SOURCE TARGET (ctors (c f) ...) [(as NAME)])
    (generate homomorphism NEW SOURCE)
    (specialize NEW SOURCE TEMPLATE (bind (role symbol) ...) [(as NAME)])

Declarations may only refer to names introduced by earlier declarations;
elaborating a file yields one theory graph. Models and meanings attach
to a theory before any morphism uses it, so every edge sees the finished
node.
"""

from __future__ import annotations

from typing import Mapping, Optional, Sequence

from .errors import ParseError, TextError, UnknownReference
from .generate import (
    GenericTransformer,
    HOLE,
    gen_evaluator,
    gen_homomorphism_theory,
    gen_term_language,
    power_template,
    specialize_generic,
)
from .graph import (
    BiformTheory,
    Morphism,
    TheoryGraph,
    inclusion,
    make_theory,
    register_transformer,
    with_meaning,
)
from .kernel import (
    App,
    Eq,
    Formula,
    Lit,
    OpDecl,
    Quote,
    SYN,
    Signature,
    Sort,
    Term,
    Var,
)
from .meaning import (
    ClaimAnd,
    Den,
    Embed,
    MeaningFormula,
    SemEq,
    SemOp,
    SynVar,
    TermPred,
    TransApp,
)
from .rules import Rule
from .semantics import (
    Domain,
    IntDomain,
    Interp,
    Model,
    PolyDomain,
    SynDomain,
    ZpDomain,
)
from .sexpr import SAtom, SExpr, SList, parse_sexprs, pretty, write_sexpr
from .termclasses import (
    CLASS_PREDICATES,
    ClosedTerm,
    NumeralTerm,
    PolyTerm,
    RuleDefined,
    TermOfLanguage,
)
from .transformers import (
    BUILTIN_FACTORIES,
    FACTOR_LIST,
    FACTOR_PAIR,
    Opaque,
    Rules,
    Transformer,
)


def _loc(node: SExpr) -> str:
    return f"line {node.line}, col {node.col}"


def _fail(node: SExpr, msg: str):
    raise ParseError(f"{_loc(node)}: {msg}")


def _want_atom(node: SExpr, what: str) -> SAtom:
    if not isinstance(node, SAtom):
        _fail(node, f"expected {what}, found a list")
    return node


def _want_list(node: SExpr, what: str) -> SList:
    if not isinstance(node, SList):
        _fail(node, f"expected {what}, found {node.text!r}")
    return node


def _head(node: SList) -> str:
    if not node.items or not isinstance(node.items[0], SAtom):
        _fail(node, "expected a keyword-headed list")
    return node.items[0].text


# --- terms -----------------------------------------------------------------------------


def term_sexpr(t: Term) -> SExpr:
    if isinstance(t, Var):
        return SAtom(t.name)
    if isinstance(t, Lit):
        return SAtom(str(t.value))
    if isinstance(t, Quote):
        return SList((SAtom("quote"), term_sexpr(t.body)))
    if isinstance(t, App):
        return SList((SAtom(t.symbol),) + tuple(term_sexpr(a) for a in t.args))
    raise TypeError(f"not a term: {t!r}")


def factor_sugar_sexpr(t: Term) -> Optional[SExpr]:
    """Compact rendering of a factorization: (pair 1 ((2 1) (3 1)))."""
    if not (isinstance(t, App) and t.symbol == "pair" and len(t.args) == 2
            and isinstance(t.args[0], Lit)):
        return None
    entries = []
    lst = t.args[1]
    while isinstance(lst, App) and lst.symbol == "cons" and len(lst.args) == 2:
        entry, lst = lst.args
        if not (isinstance(entry, App) and entry.symbol == "unit"
                and len(entry.args) == 2
                and all(isinstance(x, Lit) for x in entry.args)):
            return None
        entries.append(SList((SAtom(str(entry.args[0].value)),
                              SAtom(str(entry.args[1].value)))))
    if not (isinstance(lst, App) and lst.symbol == "nil"):
        return None
    return SList((SAtom("pair"), SAtom(str(t.args[0].value)),
                  SList(tuple(entries))))


def print_term(t: Term, factor_sugar: bool = False) -> str:
    if factor_sugar:
        sugared = factor_sugar_sexpr(t)
        if sugared is not None:
            return write_sexpr(sugared)
    return write_sexpr(term_sexpr(t))


def parse_term(node: SExpr, sig: Signature, expected: Optional[Sort] = None,
               variables: Optional[Mapping[str, Sort]] = None,
               lit_vars: frozenset = frozenset(),
               allow_free: bool = False,
               allow_engine: bool = False) -> Term:
    """Elaborate surface syntax into a term.

    Integers become literals of the expected sort; bare names resolve to
    0-ary symbols, then to declared variables, then (with ``allow_free``)
    to fresh variables of the expected sort. A declared literal-crossing
    variable may stand at a different expected sort.
    """
    variables = variables or {}
    if isinstance(node, SAtom):
        if node.is_int:
            if expected is None:
                _fail(node, "a bare numeral needs a sort from context")
            if not sig.admits_literals(expected):
                _fail(node, f"sort {expected.name!r} admits no literals")
            return Lit(node.int_value, expected)
        name = node.text
        if sig.has_op(name) and sig.op(name).arity == 0:
            decl = sig.op(name)
            if expected is not None and decl.result != expected:
                _fail(node, f"{name} has sort {decl.result.name}, "
                            f"expected {expected.name}")
            return App(name, ())
        if name in variables:
            vsort = variables[name]
            if expected is not None and vsort != expected:
                if name in lit_vars and sig.admits_literals(expected):
                    return Var(name, expected)
                _fail(node, f"variable {name} has sort {vsort.name}, "
                            f"expected {expected.name}")
            return Var(name, vsort)
        if allow_free:
            if expected is None:
                _fail(node, f"cannot infer a sort for free variable {name!r}")
            return Var(name, expected)
        _fail(node, f"unknown name {name!r}")
    node = _want_list(node, "a term")
    head = _head(node)
    if head == "quote":
        if len(node.items) != 2:
            _fail(node, "quote takes exactly one term")
        if expected is not None and expected != SYN:
            _fail(node, f"a quotation has sort Syn, expected {expected.name}")
        body = parse_term(node.items[1], sig, None, variables, lit_vars,
                          allow_free, allow_engine)
        return Quote(body)
    if head.startswith("#"):
        if not allow_engine:
            _fail(node, f"engine primitive {head!r} outside a rewrite rule")
        args = tuple(parse_term(a, sig, expected, variables, lit_vars,
                                allow_free, allow_engine)
                     for a in node.items[1:])
        return App(head, args)
    if not sig.has_op(head):
        _fail(node, f"unknown symbol {head!r}")
    decl = sig.op(head)
    if len(node.items) - 1 != decl.arity:
        _fail(node, f"{head} takes {decl.arity} arguments, "
                    f"got {len(node.items) - 1}")
    if expected is not None and decl.result != expected:
        _fail(node, f"{head} has sort {decl.result.name}, "
                    f"expected {expected.name}")
    args = tuple(
        parse_term(a, sig, want, variables, lit_vars, allow_free, allow_engine)
        for a, want in zip(node.items[1:], decl.arg_sorts))
    return App(head, args)


# --- formulas ---------------------------------------------------------------------------


def parse_formula(node: SExpr, sig: Signature) -> Formula:
    """(forall ((x S) ...) (= L R)) or
    (forall ((x S) ...) (when (= L R) ...) (= L R))"""
    node = _want_list(node, "a formula")
    if _head(node) != "forall" or len(node.items) < 3:
        _fail(node, "expected (forall ((var SORT) ...) [(when EQ ...)] (= L R))")
    binders_node = _want_list(node.items[1], "a binder list")
    binders = []
    variables: dict[str, Sort] = {}
    for b in binders_node.items:
        b = _want_list(b, "a (var SORT) binder")
        if len(b.items) != 2:
            _fail(b, "a binder is (var SORT)")
        vn = _want_atom(b.items[0], "a variable name").text
        sn = _want_atom(b.items[1], "a sort name").text
        try:
            s = sig.sort(sn)
        except Exception:
            _fail(b, f"unknown sort {sn!r}")
        binders.append((vn, s))
        variables[vn] = s

    def parse_eq(n: SExpr) -> Eq:
        n = _want_list(n, "an equation")
        if _head(n) != "=" or len(n.items) != 3:
            _fail(n, "expected (= LHS RHS)")
        lhs = parse_term(n.items[1], sig, None, variables)
        rhs_expected = None
        try:
            from .kernel import well_sorted

            rhs_expected = well_sorted(sig, lhs)
        except Exception:
            pass
        rhs = parse_term(n.items[2], sig, rhs_expected, variables)
        return Eq(lhs, rhs)

    rest = list(node.items[2:])
    hypotheses: list[Eq] = []
    if len(rest) == 2:
        when = _want_list(rest[0], "a (when ...) clause")
        if _head(when) != "when":
            _fail(when, "expected (when EQ ...)")
        hypotheses = [parse_eq(e) for e in when.items[1:]]
        rest = rest[1:]
    if len(rest) != 1:
        _fail(node, "a formula has one conclusion")
    return Formula(tuple(binders), parse_eq(rest[0]), tuple(hypotheses))


def formula_sexpr(f: Formula) -> SExpr:
    binders = SList(tuple(
        SList((SAtom(n), SAtom(s.name))) for n, s in f.binders))
    eq = lambda e: SList((SAtom("="), term_sexpr(e.lhs), term_sexpr(e.rhs)))
    items = [SAtom("forall"), binders]
    if f.hypotheses:
        items.append(SList((SAtom("when"),) + tuple(eq(e) for e in f.hypotheses)))
    items.append(eq(f.conclusion))
    return SList(tuple(items))


# --- syntactic classes --------------------------------------------------------------------


def parse_class(node: SExpr, sig: Signature, nodes: Mapping[str, BiformTheory]):
    node = _want_list(node, "a syntactic class")
    head = _head(node)
    if head == "closed" and len(node.items) == 2:
        return ClosedTerm(sig.sort(_want_atom(node.items[1], "a sort").text))
    if head == "numeral" and len(node.items) == 2:
        return NumeralTerm(sig.sort(_want_atom(node.items[1], "a sort").text))
    if head == "poly" and len(node.items) == 3:
        s = sig.sort(_want_atom(node.items[1], "a sort").text)
        vs = _want_list(node.items[2], "a variable list")
        return PolyTerm(s, tuple(_want_atom(v, "a variable").text
                                 for v in vs.items))
    if head == "lang" and len(node.items) == 2:
        tn = _want_atom(node.items[1], "a theory name").text
        if tn not in nodes:
            _fail(node, f"unknown theory {tn!r}")
        return TermOfLanguage(nodes[tn])
    if head == "pred":
        if len(node.items) not in (2, 3):
            _fail(node, "expected (pred NAME [BASE])")
        pname = _want_atom(node.items[1], "a predicate name").text
        if pname not in CLASS_PREDICATES:
            _fail(node, f"unknown class predicate {pname!r} "
                        f"(have: {', '.join(sorted(CLASS_PREDICATES))})")
        base = (parse_class(node.items[2], sig, nodes)
                if len(node.items) == 3 else None)
        return RuleDefined(pname, CLASS_PREDICATES[pname], base)
    _fail(node, f"unknown class form {head!r}")


def class_sexpr(cls) -> SExpr:
    if isinstance(cls, ClosedTerm):
        return SList((SAtom("closed"), SAtom(cls.sort.name)))
    if isinstance(cls, NumeralTerm):
        return SList((SAtom("numeral"), SAtom(cls.sort.name)))
    if isinstance(cls, PolyTerm):
        return SList((SAtom("poly"), SAtom(cls.sort.name),
                      SList(tuple(SAtom(v) for v in cls.variables))))
    if isinstance(cls, TermOfLanguage):
        return SList((SAtom("lang"), SAtom(cls.theory.name)))
    if isinstance(cls, RuleDefined):
        if cls.base is not None:
            return SList((SAtom("pred"), SAtom(cls.name), class_sexpr(cls.base)))
        return SList((SAtom("pred"), SAtom(cls.name)))
    raise TypeError(f"cannot print class {cls!r}")


# --- claims -----------------------------------------------------------------------------


def parse_texpr(node: SExpr, sig: Signature, var_names: set[str]):
    if isinstance(node, SAtom):
        if node.text in var_names:
            return SynVar(node.text)
        _fail(node, f"unknown claim variable {node.text!r}")
    node = _want_list(node, "a term expression")
    head = _head(node)
    if head == "apply":
        if len(node.items) < 2:
            _fail(node, "expected (apply TRANSFORMER ARG ...)")
        tname = _want_atom(node.items[1], "a transformer name").text
        return TransApp(tname, tuple(
            parse_texpr(a, sig, var_names) for a in node.items[2:]))
    if head == "embed":
        if len(node.items) != 3:
            _fail(node, "expected (embed SORT TERM)")
        s = sig.sort(_want_atom(node.items[1], "a sort").text)
        t = parse_term(node.items[2], sig, s, allow_free=True)
        return Embed(t)
    _fail(node, f"unknown term-expression form {head!r}")


def texpr_sexpr(e) -> SExpr:
    if isinstance(e, SynVar):
        return SAtom(e.name)
    if isinstance(e, TransApp):
        return SList((SAtom("apply"), SAtom(e.transformer))
                     + tuple(texpr_sexpr(a) for a in e.args))
    if isinstance(e, Embed):
        from .kernel import free_vars

        sorts = set(free_vars(e.term).values())
        sname = sorts.pop().name if len(sorts) == 1 else _term_sort_name(e.term)
        return SList((SAtom("embed"), SAtom(sname), term_sexpr(e.term)))
    raise TypeError(f"cannot print {e!r}")


def _term_sort_name(t: Term) -> str:
    if isinstance(t, (Var, Lit)):
        return t.sort.name
    return "?"


def parse_sem(node: SExpr, sig: Signature, var_names: set[str]):
    node = _want_list(node, "a semantic expression")
    head = _head(node)
    if head == "den":
        if len(node.items) != 3:
            _fail(node, "expected (den MODEL TEXPR)")
        model = _want_atom(node.items[1], "a model name").text
        return Den(parse_texpr(node.items[2], sig, var_names), model)
    if head == "deriv":
        if len(node.items) != 3:
            _fail(node, "expected (deriv VAR SEM)")
        v = _want_atom(node.items[1], "a variable").text
        return SemOp("deriv", (parse_sem(node.items[2], sig, var_names),), (v,))
    if head in ("add", "mul", "powmod", "neg"):
        args = tuple(parse_sem(a, sig, var_names) for a in node.items[1:])
        return SemOp(head, args)
    _fail(node, f"unknown semantic operator {head!r}")


def sem_sexpr(e) -> SExpr:
    if isinstance(e, Den):
        return SList((SAtom("den"), SAtom(e.model), texpr_sexpr(e.expr)))
    if isinstance(e, SemOp):
        if e.op == "deriv":
            return SList((SAtom("deriv"), SAtom(e.params[0]),
                          sem_sexpr(e.args[0])))
        return SList((SAtom(e.op),) + tuple(sem_sexpr(a) for a in e.args))
    raise TypeError(f"cannot print {e!r}")


def parse_claim(node: SExpr, sig: Signature, var_names: set[str]):
    node = _want_list(node, "a claim")
    head = _head(node)
    if head == "=":
        if len(node.items) != 3:
            _fail(node, "expected (= SEM SEM)")
        return SemEq(parse_sem(node.items[1], sig, var_names),
                     parse_sem(node.items[2], sig, var_names))
    if head == "and":
        return ClaimAnd(tuple(parse_claim(p, sig, var_names)
                              for p in node.items[1:]))
    if head == "holds":
        if len(node.items) < 2:
            _fail(node, "expected (holds PREDICATE TEXPR ...)")
        pname = _want_atom(node.items[1], "a predicate name").text
        return TermPred(pname, tuple(
            parse_texpr(a, sig, var_names) for a in node.items[2:]))
    _fail(node, f"unknown claim form {head!r}")


def claim_sexpr(c) -> SExpr:
    if isinstance(c, SemEq):
        return SList((SAtom("="), sem_sexpr(c.lhs), sem_sexpr(c.rhs)))
    if isinstance(c, ClaimAnd):
        return SList((SAtom("and"),) + tuple(claim_sexpr(p) for p in c.parts))
    if isinstance(c, TermPred):
        return SList((SAtom("holds"), SAtom(c.name))
                     + tuple(texpr_sexpr(a) for a in c.args))
    raise TypeError(f"cannot print {c!r}")


# --- transformer declarations ----------------------------------------------------------


def _parse_op_decl(node: SExpr, sorts: Mapping[str, Sort]) -> OpDecl:
    node = _want_list(node, "an operation declaration")
    texts = []
    for item in node.items:
        texts.append(_want_atom(item, "a name or ->").text)
    if "->" not in texts or texts.index("->") != len(texts) - 2:
        _fail(node, "expected (name ARGSORT ... -> RESULT)")
    name = texts[0]
    args = texts[1:-2]
    result = texts[-1]
    for s in args + [result]:
        if s not in sorts and s != SYN.name:
            _fail(node, f"unknown sort {s!r}")

    def get(sn: str) -> Sort:
        return SYN if sn == SYN.name else sorts[sn]

    return OpDecl(name, tuple(get(s) for s in args), get(result))


def _parse_rule(node: SExpr, sig: Signature) -> Rule:
    node = _want_list(node, "a rule")
    if _head(node) != "rule" or len(node.items) not in (4, 5):
        _fail(node, "expected (rule ((v SORT [lit]) ...) [(guards (v P) ...)] LHS RHS)")
    vdecls = _want_list(node.items[1], "a variable list")
    variables: dict[str, Sort] = {}
    lit_vars = set()
    for vd in vdecls.items:
        vd = _want_list(vd, "a (var SORT [lit]) declaration")
        if len(vd.items) not in (2, 3):
            _fail(vd, "expected (var SORT [lit])")
        vn = _want_atom(vd.items[0], "a variable").text
        sn = _want_atom(vd.items[1], "a sort").text
        variables[vn] = sig.sort(sn)
        if len(vd.items) == 3:
            if _want_atom(vd.items[2], "lit").text != "lit":
                _fail(vd, "the third element of a variable declaration is 'lit'")
            lit_vars.add(vn)
    rest = node.items[2:]
    guards: list[tuple[str, str]] = []
    if len(rest) == 3:
        gnode = _want_list(rest[0], "a guards clause")
        if _head(gnode) != "guards":
            _fail(gnode, "expected (guards (v PRED) ...)")
        for g in gnode.items[1:]:
            g = _want_list(g, "a (v PRED) guard")
            if len(g.items) != 2:
                _fail(g, "a guard is (v PRED)")
            guards.append((_want_atom(g.items[0], "a variable").text,
                           _want_atom(g.items[1], "a predicate").text))
        rest = rest[1:]
    lhs = parse_term(rest[0], sig, None, variables, frozenset(lit_vars),
                     allow_engine=True)
    try:
        from .kernel import well_sorted

        expected = well_sorted(sig, lhs, allow_engine_ops=True)
    except Exception:
        expected = None
    rhs = parse_term(rest[1], sig, expected, variables, frozenset(lit_vars),
                     allow_engine=True)
    return Rule(tuple(variables.items()), lhs, rhs, frozenset(lit_vars),
                tuple(guards))


def rule_sexpr(r: Rule) -> SExpr:
    vdecls = []
    for n, s in r.vars:
        items = [SAtom(n), SAtom(s.name)]
        if n in r.lit_vars:
            items.append(SAtom("lit"))
        vdecls.append(SList(tuple(items)))
    parts = [SAtom("rule"), SList(tuple(vdecls))]
    if r.guards:
        parts.append(SList((SAtom("guards"),) + tuple(
            SList((SAtom(v), SAtom(g))) for v, g in r.guards)))
    parts.append(term_sexpr(r.lhs))
    parts.append(term_sexpr(r.rhs))
    return SList(tuple(parts))


# --- the elaborator -----------------------------------------------------------------------


class Elaborator:
    """Turns parsed declarations into one theory graph, in file order."""

    def __init__(self):
        self.graph = TheoryGraph()
        self.templates: dict[str, GenericTransformer] = {
            "power": power_template()}
        self._frozen: set[str] = set()  # theories referenced by an edge

    def _node(self, node: SExpr, name: str) -> BiformTheory:
        if not self.graph.has_node(name):
            raise UnknownReference(
                f"{_loc(node)}: no theory named {name!r} declared yet")
        return self.graph.node(name)

    def _replace_node(self, node: SExpr, name: str, new: BiformTheory):
        if name in self._frozen:
            raise UnknownReference(
                f"{_loc(node)}: theory {name!r} is already used by a "
                f"morphism; declare models and meanings before morphisms")
        self.graph._nodes[name] = new

    def run(self, text: str) -> TheoryGraph:
        for decl in parse_sexprs(text):
            decl = _want_list(decl, "a declaration")
            head = _head(decl)
            handler = getattr(self, f"_decl_{head.replace('-', '_')}", None)
            if handler is None:
                _fail(decl, f"unknown declaration {head!r}")
            handler(decl)
        return self.graph

    # -- (theory ...)

    def _decl_theory(self, decl: SList):
        if len(decl.items) < 2:
            _fail(decl, "expected (theory NAME sections...)")
        name = _want_atom(decl.items[1], "a theory name").text
        sections: dict[str, SList] = {}
        for sec in decl.items[2:]:
            sec = _want_list(sec, "a theory section")
            h = _head(sec)
            if h in sections:
                _fail(sec, f"duplicate section {h!r}")
            sections[h] = sec
        unknown = set(sections) - {"sorts", "literals", "ops", "axioms",
                                   "transformers"}
        if unknown:
            _fail(decl, f"unknown section(s) {sorted(unknown)}")

        sorts: dict[str, Sort] = {}
        for sn in sections.get("sorts", SList((SAtom("sorts"),))).items[1:]:
            n = _want_atom(sn, "a sort name").text
            if n in sorts or n == SYN.name:
                _fail(sn, f"duplicate or reserved sort {n!r}")
            sorts[n] = Sort(n)
        literals = []
        for sn in sections.get("literals", SList((SAtom("literals"),))).items[1:]:
            n = _want_atom(sn, "a sort name").text
            if n not in sorts:
                _fail(sn, f"unknown literal sort {n!r}")
            literals.append(sorts[n])
        ops = [
            _parse_op_decl(o, sorts)
            for o in sections.get("ops", SList((SAtom("ops"),))).items[1:]
        ]

        theory = make_theory(name, sorts=tuple(sorts.values()),
                             ops=tuple(ops), literal_sorts=tuple(literals))

        for tnode in sections.get(
                "transformers", SList((SAtom("transformers"),))).items[1:]:
            theory = self._install_transformer(theory, tnode)

        axioms = []
        for fnode in sections.get(
                "axioms", SList((SAtom("axioms"),))).items[1:]:
            axioms.append(parse_formula(fnode, theory.signature))
        if axioms:
            theory = theory.replace(axioms=tuple(axioms))

        self.graph.add_node(theory)

    def _install_transformer(self, theory: BiformTheory,
                             tnode: SExpr) -> BiformTheory:
        tnode = _want_list(tnode, "a transformer declaration")
        head = _head(tnode)
        if head == "builtin":
            if len(tnode.items) < 3:
                _fail(tnode, "expected (builtin NAME SORT [args...])")
            bname = _want_atom(tnode.items[1], "a builtin name").text
            if bname not in BUILTIN_FACTORIES:
                _fail(tnode, f"unknown builtin {bname!r} "
                             f"(have: {', '.join(sorted(BUILTIN_FACTORIES))})")
            sort = theory.signature.sort(
                _want_atom(tnode.items[2], "a sort").text)
            if bname in ("normalize_poly", "deriv"):
                if len(tnode.items) != 4:
                    _fail(tnode, f"(builtin {bname} SORT (vars...))")
                vs = _want_list(tnode.items[3], "a variable list")
                variables = tuple(_want_atom(v, "a variable").text
                                  for v in vs.items)
                tr, extra_sorts, extra_ops = BUILTIN_FACTORIES[bname](
                    sort, variables)
            else:
                if len(tnode.items) != 3:
                    _fail(tnode, f"(builtin {bname} SORT)")
                tr, extra_sorts, extra_ops = BUILTIN_FACTORIES[bname](sort)
            return register_transformer(theory, tr, sorts=extra_sorts,
                                        ops=extra_ops)
        if head == "rules":
            # (rules NAME (ARGSORT ... -> RESULT) [(classes C ...)] RULE ...)
            if len(tnode.items) < 4:
                _fail(tnode, "expected (rules NAME (A ... -> R) RULE ...)")
            tname = _want_atom(tnode.items[1], "a transformer name").text
            shape = _want_list(tnode.items[2], "a type")
            texts = [_want_atom(x, "a sort or ->").text for x in shape.items]
            if "->" not in texts or texts.index("->") != len(texts) - 2:
                _fail(shape, "expected (ARGSORT ... -> RESULT)")
            arg_sorts = tuple(theory.signature.sort(s) for s in texts[:-2])
            result = theory.signature.sort(texts[-1])
            rest = list(tnode.items[3:])
            classes = None
            if rest and isinstance(rest[0], SList) and _head(rest[0]) == "classes":
                cl = rest.pop(0)
                classes = tuple(
                    parse_class(c, theory.signature, self.graph._nodes)
                    for c in cl.items[1:])
            if classes is None:
                classes = tuple(self._default_class(s) for s in arg_sorts)
            if len(classes) != len(arg_sorts):
                _fail(tnode, f"{len(classes)} classes for "
                             f"{len(arg_sorts)} arguments")
            # rules mention the transformer's own head at object sorts
            rule_sig = theory.signature.extended(
                ops=(OpDecl(tname, arg_sorts, result),)) \
                if not theory.signature.has_op(tname) else theory.signature
            rules = tuple(_parse_rule(r, rule_sig) for r in rest)
            tr = Transformer(tname, arg_sorts, result, classes, Rules(rules))
            return register_transformer(theory, tr)
        if head == "template":
            if len(tnode.items) != 2:
                _fail(tnode, "expected (template NAME)")
            gname = _want_atom(tnode.items[1], "a template name").text
            if gname not in self.templates:
                _fail(tnode, f"unknown template {gname!r}")
            g = self.templates[gname]
            tr = Transformer(g.name, (SYN,) * g.arity, SYN, (), g)
            return register_transformer(theory, tr)
        _fail(tnode, f"unknown transformer form {head!r}")

    @staticmethod
    def _default_class(s: Sort):
        from .kernel import well_sorted

        def wf(term, sig):
            try:
                return well_sorted(sig, term) == s
            except Exception:
                return False

        return RuleDefined(f"term-of-{s.name}", wf)

    # -- (model ...)

    def _decl_model(self, decl: SList):
        if len(decl.items) < 3:
            _fail(decl, "expected (model NAME THEORY entries...)")
        mname = _want_atom(decl.items[1], "a model name").text
        tname = _want_atom(decl.items[2], "a theory name").text
        theory = self._node(decl, tname)
        carriers: dict[str, Domain] = {}
        interps: dict[str, Interp] = {}
        for entry in decl.items[3:]:
            entry = _want_list(entry, "a carrier or interp entry")
            h = _head(entry)
            if h == "carrier":
                if len(entry.items) != 3:
                    _fail(entry, "expected (carrier SORT DOMAIN)")
                sn = _want_atom(entry.items[1], "a sort").text
                theory.signature.sort(sn)
                carriers[sn] = _parse_domain(entry.items[2])
            elif h == "interp":
                if len(entry.items) != 3:
                    _fail(entry, "expected (interp SYMBOL SPEC)")
                fn = _want_atom(entry.items[1], "a symbol").text
                if not theory.signature.has_op(fn):
                    _fail(entry, f"unknown symbol {fn!r}")
                interps[fn] = _parse_interp(entry.items[2])
            else:
                _fail(entry, f"unknown model entry {h!r}")
        model = Model(mname, theory.signature, carriers, interps)
        self._replace_node(decl, tname,
                           theory.replace(models=theory.models + (model,)))

    # -- (meaning ...)

    def _decl_meaning(self, decl: SList):
        if len(decl.items) != 6:
            _fail(decl, "expected (meaning NAME THEORY TRANSFORMER "
                        "(vars ...) (claim ...))")
        mname = _want_atom(decl.items[1], "a name").text
        tname = _want_atom(decl.items[2], "a theory name").text
        trname = _want_atom(decl.items[3], "a transformer name").text
        theory = self._node(decl, tname)
        vars_node = _want_list(decl.items[4], "a vars section")
        if _head(vars_node) != "vars":
            _fail(vars_node, "expected (vars (v CLASS) ...)")
        mf_vars = []
        for v in vars_node.items[1:]:
            v = _want_list(v, "a (v CLASS) pair")
            if len(v.items) != 2:
                _fail(v, "expected (v CLASS)")
            vn = _want_atom(v.items[0], "a variable").text
            cls = parse_class(v.items[1], theory.signature, self.graph._nodes)
            mf_vars.append((vn, cls))
        claim_node = _want_list(decl.items[5], "a claim section")
        if _head(claim_node) != "claim" or len(claim_node.items) != 2:
            _fail(claim_node, "expected (claim CLAIM)")
        claim = parse_claim(claim_node.items[1], theory.signature,
                            {n for n, _ in mf_vars})
        mf = MeaningFormula(mname, trname, tuple(mf_vars), claim)
        self._replace_node(decl, tname, with_meaning(theory, mf))

    # -- (morphism ...)

    def _decl_morphism(self, decl: SList):
        if len(decl.items) < 4:
            _fail(decl, "expected (morphism NAME SOURCE TARGET maps...)")
        name = _want_atom(decl.items[1], "a morphism name").text
        src = self._node(decl, _want_atom(decl.items[2], "a theory").text)
        tgt = self._node(decl, _want_atom(decl.items[3], "a theory").text)
        sort_map: list[tuple[str, str]] = []
        symbol_map: list[tuple[str, str]] = []
        transformer_map: list[tuple[str, str]] = []
        preserving = False
        for sec in decl.items[4:]:
            sec = _want_list(sec, "a morphism section")
            h = _head(sec)
            if h == "model-preserving":
                preserving = True
                continue
            target_list = {"sorts": sort_map, "symbols": symbol_map,
                           "transformers": transformer_map}.get(h)
            if target_list is None:
                _fail(sec, f"unknown morphism section {h!r}")
            for pair in sec.items[1:]:
                pair = _want_list(pair, "an (old new) pair")
                if len(pair.items) != 2:
                    _fail(pair, "expected (old new)")
                target_list.append((
                    _want_atom(pair.items[0], "a name").text,
                    _want_atom(pair.items[1], "a name").text))
        try:
            m = Morphism(name, src, tgt, tuple(sort_map), tuple(symbol_map),
                         tuple(transformer_map), preserving)
        except Exception as e:
            raise UnknownReference(f"{_loc(decl)}: {e}") from e
        self._frozen.add(src.name)
        self._frozen.add(tgt.name)
        self.graph.add_edge(m)

    # -- (generic ...)

    def _decl_generic(self, decl: SList):
        if len(decl.items) < 5:
            _fail(decl, "expected (generic NAME (params ...) (args ...) "
                        "(rules ...))")
        name = _want_atom(decl.items[1], "a template name").text
        params_node = _want_list(decl.items[2], "a params section")
        if _head(params_node) != "params":
            _fail(params_node, "expected (params (role arity) ...)")
        params = []
        for p in params_node.items[1:]:
            p = _want_list(p, "a (role arity) pair")
            if len(p.items) != 2:
                _fail(p, "expected (role arity)")
            params.append((_want_atom(p.items[0], "a role").text,
                           _want_atom(p.items[1], "an arity").int_value))
        args_node = _want_list(decl.items[3], "an args section")
        if _head(args_node) != "args":
            _fail(args_node, "expected (args KIND ...)")
        kinds = tuple(_want_atom(k, "term or numeral").text
                      for k in args_node.items[1:])
        for k in kinds:
            if k not in ("term", "numeral"):
                _fail(args_node, f"argument kinds are term/numeral, not {k!r}")
        rules_node = _want_list(decl.items[4], "a rules section")
        if _head(rules_node) != "rules":
            _fail(rules_node, "expected (rules RULE ...)")
        hole_sig = Signature(
            sorts=(HOLE,),
            ops=tuple(OpDecl(f"?{r}", (HOLE,) * a, HOLE) for r, a in params)
            + (OpDecl("?self", (HOLE,) * len(kinds), HOLE),),
            literal_sorts=frozenset({HOLE}),
        )
        rules = tuple(_parse_rule(r, hole_sig) for r in rules_node.items[1:])
        needs_lits = "numeral" in kinds or any(
            r.lit_vars for r in rules)
        self.templates[name] = GenericTransformer(
            name=name, parameters=tuple(params),
            arg_sorts=(HOLE,) * len(kinds), result_sort=HOLE,
            template_rules=rules, arg_kinds=kinds, needs_literals=needs_lits)

    # -- (generate ...) and (specialize ...)

    def _decl_generate(self, decl: SList):
        if len(decl.items) < 3:
            _fail(decl, "expected (generate KIND ...)")
        kind = _want_atom(decl.items[1], "a generator kind").text
        if kind == "term-language":
            if len(decl.items) != 5:
                _fail(decl, "expected (generate term-language NEW SOURCE "
                            "(sorts S ...))")
            new_name = _want_atom(decl.items[2], "a name").text
            src = self._node(decl, _want_atom(decl.items[3], "a theory").text)
            sorts_node = _want_list(decl.items[4], "a sorts section")
            if _head(sorts_node) != "sorts":
                _fail(sorts_node, "expected (sorts S ...)")
            names = [_want_atom(s, "a sort").text for s in sorts_node.items[1:]]
            self.graph.add_node(gen_term_language(src, names, new_name))
            return
        if kind == "evaluator":
            if len(decl.items) not in (5, 6):
                _fail(decl, "expected (generate evaluator SOURCE TARGET "
                            "(ctors (c f) ...) [(as NAME)])")
            src = self._node(decl, _want_atom(decl.items[2], "a theory").text)
            tgt = self._node(decl, _want_atom(decl.items[3], "a theory").text)
            ctors_node = _want_list(decl.items[4], "a ctors section")
            if _head(ctors_node) != "ctors":
                _fail(ctors_node, "expected (ctors (c f) ...)")
            cmap = {}
            for pair in ctors_node.items[1:]:
                pair = _want_list(pair, "a (ctor image) pair")
                if len(pair.items) != 2:
                    _fail(pair, "expected (ctor image)")
                cmap[_want_atom(pair.items[0], "a ctor").text] = \
                    _want_atom(pair.items[1], "a symbol").text
            new_name = None
            if len(decl.items) == 6:
                as_node = _want_list(decl.items[5], "an (as NAME) clause")
                if _head(as_node) != "as" or len(as_node.items) != 2:
                    _fail(as_node, "expected (as NAME)")
                new_name = _want_atom(as_node.items[1], "a name").text
            combined, _, _ = gen_evaluator(src, tgt, cmap, new_name)
            self.graph.add_node(combined)
            return
        if kind == "homomorphism":
            if len(decl.items) != 4:
                _fail(decl, "expected (generate homomorphism NEW SOURCE)")
            new_name = _want_atom(decl.items[2], "a name").text
            src = self._node(decl, _want_atom(decl.items[3], "a theory").text)
            self.graph.add_node(gen_homomorphism_theory(src, new_name))
            return
        _fail(decl, f"unknown generator {kind!r}")

    def _decl_specialize(self, decl: SList):
        if len(decl.items) not in (5, 6):
            _fail(decl, "expected (specialize NEW SOURCE TEMPLATE "
                        "(bind (role symbol) ...) [(as NAME)])")
        new_name = _want_atom(decl.items[1], "a name").text
        src = self._node(decl, _want_atom(decl.items[2], "a theory").text)
        gname = _want_atom(decl.items[3], "a template name").text
        if gname not in self.templates:
            _fail(decl, f"unknown template {gname!r}")
        bind_node = _want_list(decl.items[4], "a bind section")
        if _head(bind_node) != "bind":
            _fail(bind_node, "expected (bind (role symbol) ...)")
        binding = {}
        for pair in bind_node.items[1:]:
            pair = _want_list(pair, "a (role symbol) pair")
            if len(pair.items) != 2:
                _fail(pair, "expected (role symbol)")
            binding[_want_atom(pair.items[0], "a role").text] = \
                _want_atom(pair.items[1], "a symbol").text
        trname = None
        if len(decl.items) == 6:
            as_node = _want_list(decl.items[5], "an (as NAME) clause")
            if _head(as_node) != "as" or len(as_node.items) != 2:
                _fail(as_node, "expected (as NAME)")
            trname = _want_atom(as_node.items[1], "a name").text
        tr = specialize_generic(self.templates[gname], binding, src, trname)
        new = register_transformer(src, tr).replace(name=new_name)
        self.graph.add_node(new)
        self._frozen.add(src.name)
        self._frozen.add(new_name)
        self.graph.add_edge(inclusion(f"inc:{src.name}->{new_name}", src, new))


def _parse_domain(node: SExpr) -> Domain:
    if isinstance(node, SAtom):
        if node.text == "int":
            return IntDomain()
        if node.text == "syn":
            return SynDomain()
        _fail(node, f"unknown domain {node.text!r}")
    node = _want_list(node, "a domain")
    head = _head(node)
    if head == "zp" and len(node.items) == 2:
        return ZpDomain(_want_atom(node.items[1], "a prime").int_value)
    if head == "poly":
        return PolyDomain(tuple(_want_atom(v, "a variable").text
                                for v in node.items[1:]))
    _fail(node, f"unknown domain form {head!r}")


def _parse_interp(node: SExpr) -> Interp:
    if isinstance(node, SAtom):
        if node.text in ("add", "mul", "neg", "sub", "identity"):
            return Interp(node.text)
        _fail(node, f"unknown interpretation {node.text!r}")
    node = _want_list(node, "an interpretation")
    if _head(node) == "const" and len(node.items) == 2:
        return Interp("const", (_want_atom(node.items[1], "an integer").int_value,))
    _fail(node, f"unknown interpretation form {_head(node)!r}")


def elaborate(text: str) -> TheoryGraph:
    """Parse a theory file and build its graph."""
    return Elaborator().run(text)


def elaborate_file(path: str) -> TheoryGraph:
    with open(path) as fh:
        return elaborate(fh.read())


# --- printing a graph back as declarations ---------------------------------------------


def domain_sexpr(d: Domain) -> SExpr:
    if isinstance(d, IntDomain):
        return SAtom("int")
    if isinstance(d, SynDomain):
        return SAtom("syn")
    if isinstance(d, ZpDomain):
        return SList((SAtom("zp"), SAtom(str(d.p))))
    if isinstance(d, PolyDomain):
        return SList((SAtom("poly"),) + tuple(SAtom(v) for v in d.variables))
    raise TypeError(f"cannot print domain {d!r}")


def interp_sexpr(i) -> SExpr:
    if isinstance(i, Interp):
        if i.op == "const":
            return SList((SAtom("const"), SAtom(str(i.params[0]))))
        return SAtom(i.op)
    raise TypeError("host-callable interpretations have no surface syntax")


def transformer_sexpr(tr: Transformer) -> SExpr:
    if isinstance(tr.body, Opaque):
        cfg = tr.body.config_dict()
        bname = tr.body.host_id.split(".", 1)[1]
        items = [SAtom("builtin"), SAtom(bname)]
        if bname in ("normalize_poly", "deriv"):
            items.append(SAtom(cfg["sort"]))
            items.append(SList(tuple(SAtom(v) for v in cfg["vars"])))
        elif bname in ("ifactors", "reconstruct_factors"):
            items.append(SAtom(cfg["numeral_sort"]))
        else:
            items.append(SAtom(tr.arg_sorts[0].name))
        return SList(tuple(items))
    if isinstance(tr.body, Rules):
        shape = SList(tuple(SAtom(s.name) for s in tr.arg_sorts)
                      + (SAtom("->"), SAtom(tr.result_sort.name)))
        classes = SList((SAtom("classes"),)
                        + tuple(class_sexpr(c) for c in tr.arg_classes))
        return SList((SAtom("rules"), SAtom(tr.name), shape, classes)
                     + tuple(rule_sexpr(r) for r in tr.body.rules))
    return SList((SAtom("template"), SAtom(tr.body.name)))


def theory_sexprs(t: BiformTheory) -> list[SExpr]:
    """The declarations that reconstruct a theory: one (theory ...) plus
    one (model ...) and (meaning ...) per attachment."""
    sections = []
    sorts = [s for s in t.signature.sorts if s != SYN]
    if sorts:
        sections.append(SList((SAtom("sorts"),)
                              + tuple(SAtom(s.name) for s in sorts)))
    lits = [s for s in sorts if t.signature.admits_literals(s)]
    if lits:
        sections.append(SList((SAtom("literals"),)
                              + tuple(SAtom(s.name) for s in lits)))
    tr_names = {tr.name for tr in t.transformers}
    # the factorization fragment and syntax symbols are reinstalled by
    # their transformer declarations; print only hand-declared ops
    skip_ops = set(tr_names)
    factor_installed = any(
        isinstance(tr.body, Opaque) and tr.body.host_id.endswith(
            ("ifactors", "reconstruct_factors"))
        for tr in t.transformers)
    if factor_installed:
        skip_ops |= {"pair", "unit", "cons", "nil"}
    ops = [o for o in t.signature.ops if o.name not in skip_ops]
    if ops:
        sections.append(SList((SAtom("ops"),) + tuple(
            SList(tuple(SAtom(s) for s in
                        [o.name] + [a.name for a in o.arg_sorts]
                        + ["->", o.result.name]))
            for o in ops)))
    if t.transformers:
        sections.append(SList((SAtom("transformers"),) + tuple(
            transformer_sexpr(tr) for tr in t.transformers)))
    if t.axioms:
        sections.append(SList((SAtom("axioms"),) + tuple(
            formula_sexpr(f) for f in t.axioms)))
    out = [SList((SAtom("theory"), SAtom(t.name)) + tuple(sections))]
    for m in t.models:
        entries: list[SExpr] = []
        for sn in m.carriers:
            entries.append(SList((SAtom("carrier"), SAtom(sn),
                                  domain_sexpr(m.carriers[sn]))))
        for fn in m.interps:
            entries.append(SList((SAtom("interp"), SAtom(fn),
                                  interp_sexpr(m.interps[fn]))))
        out.append(SList((SAtom("model"), SAtom(m.name), SAtom(t.name))
                         + tuple(entries)))
    for mf in t.meaning_formulas:
        out.append(SList((
            SAtom("meaning"), SAtom(mf.name), SAtom(t.name),
            SAtom(mf.transformer),
            SList((SAtom("vars"),) + tuple(
                SList((SAtom(n), class_sexpr(c))) for n, c in mf.vars)),
            SList((SAtom("claim"), claim_sexpr(mf.claim))),
        )))
    return out


def morphism_sexpr(m: Morphism) -> SExpr:
    items = [SAtom("morphism"), SAtom(m.name), SAtom(m.source.name),
             SAtom(m.target.name)]
    if m.sort_map:
        items.append(SList((SAtom("sorts"),) + tuple(
            SList((SAtom(a), SAtom(b))) for a, b in m.sort_map)))
    if m.symbol_map:
        items.append(SList((SAtom("symbols"),) + tuple(
            SList((SAtom(a), SAtom(b))) for a, b in m.symbol_map)))
    if m.transformer_map:
        items.append(SList((SAtom("transformers"),) + tuple(
            SList((SAtom(a), SAtom(b))) for a, b in m.transformer_map)))
    if m.model_preserving:
        items.append(SList((SAtom("model-preserving"),)))
    return SList(tuple(items))


def print_graph(g: TheoryGraph) -> str:
    """All declarations of a graph, nodes then edges, in insertion order."""
    chunks = []
    for t in g.nodes:
        for d in theory_sexprs(t):
            chunks.append(pretty(d))
    for m in g.edges:
        chunks.append(pretty(morphism_sexpr(m)))
    return "\n\n".join(chunks) + "\n"
