"""Theory generation: new nodes computed from existing ones.

Three generators and one template mechanism:

* ``gen_term_language`` reifies a fragment of a theory's syntax as the
  constructors of a fresh inductive language;
* ``gen_evaluator`` produces, for a term language and a target theory, a
  combined theory holding a rule-based evaluator that folds the language
  into the target, plus the meaning formula that says the fold preserves
  denotation;
* ``gen_homomorphism_theory`` builds, from a single-sorted theory, the
  theory of two tagged copies and a structure-preserving map between
  them;
* ``GenericTransformer`` is a transformer template over placeholder
  symbols, turned into a real rule-based transformer by
  ``specialize_generic``.

All generators are deterministic: the same inputs yield equal theories.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .errors import (
    MissingBinding,
    MultiSortedUnsupported,
    NameClash,
    ShapeMismatch,
)
from .graph import BiformTheory, Morphism, inclusion, make_theory
from .kernel import (
    App,
    Formula,
    Lit,
    OpDecl,
    Quote,
    SYN,
    Signature,
    Sort,
    Term,
    Var,
    forall,
)
from .meaning import ClaimAnd, Den, MeaningFormula, SemEq, SynVar, TransApp
from .rules import Rule
from .semantics import Model
from .termclasses import NumeralTerm, RuleDefined, TermOfLanguage
from .transformers import Rules, Transformer

# --- term languages -------------------------------------------------------------------


def gen_term_language(t: BiformTheory, sort_names: Sequence[str],
                      name: Optional[str] = None) -> BiformTheory:
    """The inductive language of a theory's terms over selected sorts.

    Each selected sort S becomes a fresh sort ``S#term``; each symbol
    whose argument and result sorts all lie in the selection becomes a
    constructor ``ctor_<symbol>``. Every generated sort admits literals,
    standing in for the literal constructor, so the generated language
    has one constructor per selected symbol plus one for literals.
    The result carries no axioms, transformers, or models: it is pure
    syntax, to be given meaning by an evaluator.
    """
    selected = []
    for sn in sort_names:
        s = t.signature.sort(sn)
        if s == SYN:
            raise ShapeMismatch("the syntax sort cannot join a term language")
        selected.append(s)
    if not selected:
        raise ShapeMismatch("no sorts selected")
    fresh = {s.name: Sort(f"{s.name}#term") for s in selected}
    chosen = set(fresh)

    ops = []
    for op in t.signature.ops:
        involved = set(s.name for s in op.arg_sorts) | {op.result.name}
        if not involved <= chosen:
            continue
        if t.has_transformer(op.name):
            continue  # syntax-level symbols are not object constructors
        ops.append(OpDecl(
            f"ctor_{op.name}",
            tuple(fresh[s.name] for s in op.arg_sorts),
            fresh[op.result.name],
        ))

    return make_theory(
        name or f"{t.name}#term",
        sorts=tuple(fresh[s.name] for s in selected),
        ops=tuple(ops),
        literal_sorts=tuple(fresh[s.name] for s in selected),
    )


# --- evaluators -----------------------------------------------------------------------


def _only_sort(t: BiformTheory) -> Sort:
    sorts = [s for s in t.signature.sorts if s != SYN]
    if len(sorts) != 1:
        raise MultiSortedUnsupported(
            f"theory {t.name!r} has {len(sorts)} sorts; need exactly one")
    return sorts[0]


def gen_evaluator(term_lang: BiformTheory, target: BiformTheory,
                  ctor_map: Mapping[str, str],
                  name: Optional[str] = None,
                  ) -> tuple[BiformTheory, Transformer, MeaningFormula]:
    """A combined theory in which the term language is evaluated into
    the target.

    ``ctor_map`` sends each constructor of the (single-sorted) term
    language to a target symbol of the same arity over one target sort.
    The evaluator is a rule-based fold: one rule per constructor, plus a
    literal-crossing rule when both sorts admit literals. Its meaning
    formula states that evaluation preserves denotation in each model
    shared by the combined theory.

    Models merge by name: the term language's designated model (if any)
    supplies the intended meaning of constructors, the target's supplies
    the meaning of its own symbols. A term language without models gets
    its constructors interpreted through ``ctor_map``, which makes the
    formula check the fold mechanics rather than an independent intent.
    """
    tl_sort = _only_sort(term_lang)
    ctors = [op for op in term_lang.signature.ops
             if not term_lang.has_transformer(op.name)]
    missing = [op.name for op in ctors if op.name not in ctor_map]
    if missing:
        raise ShapeMismatch(f"constructors {missing} have no image")
    extra = [c for c in ctor_map if not term_lang.signature.has_op(c)]
    if extra:
        raise ShapeMismatch(f"images given for unknown constructors {extra}")

    tgt_sort: Optional[Sort] = None
    for op in ctors:
        g = ctor_map[op.name]
        gd = target.signature.op(g)
        if gd.arity != op.arity:
            raise ShapeMismatch(
                f"{op.name} has arity {op.arity} but its image {g} has "
                f"arity {gd.arity}")
        here = set(gd.arg_sorts) | {gd.result}
        if len(here) != 1:
            raise ShapeMismatch(f"image {g} is not homogeneous in one sort")
        s = here.pop()
        if tgt_sort is None:
            tgt_sort = s
        elif tgt_sort != s:
            raise ShapeMismatch(
                f"images live at two sorts: {tgt_sort.name} and {s.name}")
    if tgt_sort is None:
        tgt_sort = _only_sort(target)

    lits = term_lang.signature.admits_literals(tl_sort)
    if lits and not target.signature.admits_literals(tgt_sort):
        raise ShapeMismatch(
            f"the language admits literals but target sort "
            f"{tgt_sort.name!r} does not")

    ev_name = f"eval_{target.name}"
    theory_name = name or f"{term_lang.name}+{target.name}"

    clash = ({s.name for s in term_lang.signature.sorts}
             & {s.name for s in target.signature.sorts})
    if clash:
        raise NameClash(f"sort names {sorted(clash)} appear on both sides")
    clash = ({o.name for o in term_lang.signature.ops}
             & {o.name for o in target.signature.ops})
    if clash:
        raise NameClash(f"symbol names {sorted(clash)} appear on both sides")
    if term_lang.signature.has_op(ev_name) or target.signature.has_op(ev_name):
        raise NameClash(f"the name {ev_name!r} is already taken")

    # evaluator rules: fold each constructor, cross literals over
    ev_rules = []
    for op in ctors:
        xs = [Var(f"x{i}", tl_sort) for i in range(op.arity)]
        lhs = App(ev_name, (App(op.name, tuple(xs)),))
        rhs = App(ctor_map[op.name],
                  tuple(App(ev_name, (x,)) for x in xs))
        ev_rules.append(Rule(
            vars=tuple((x.name, tl_sort) for x in xs), lhs=lhs, rhs=rhs))
    if lits:
        n = Var("n", tl_sort)
        ev_rules.append(Rule(
            vars=((n.name, tl_sort),),
            lhs=App(ev_name, (n,)),
            rhs=Var("n", tgt_sort),
            lit_vars=frozenset({"n"}),
        ))

    evaluator = Transformer(
        name=ev_name,
        arg_sorts=(tl_sort,),
        result_sort=tgt_sort,
        arg_classes=(TermOfLanguage(term_lang),),
        body=Rules(tuple(ev_rules)),
    )

    # combined signature: both sides plus the evaluator's syntax symbol
    transformers = term_lang.transformers + target.transformers + (evaluator,)
    sig = Signature(
        sorts=term_lang.signature.sorts + target.signature.sorts,
        ops=term_lang.signature.ops + target.signature.ops
        + (evaluator.syn_decl(),),
        literal_sorts=term_lang.signature.literal_sorts
        | target.signature.literal_sorts,
    )

    # merged models: target carriers and interpretations, the language's
    # own where designated, ctor_map images as the fallback intent
    models = []
    for mt in target.models:
        carriers = dict(mt.carriers)
        interps = dict(mt.interps)
        if not mt.carries(tgt_sort):
            continue
        carriers[tl_sort.name] = mt.carrier(tgt_sort)
        if term_lang.has_model(mt.name):
            ml = term_lang.model(mt.name)
            carriers.update(ml.carriers)
            interps.update(ml.interps)
        else:
            for op in ctors:
                img = ctor_map[op.name]
                if img in mt.interps:
                    interps[op.name] = mt.interps[img]
        models.append(Model(mt.name, sig, carriers, interps))

    mf = MeaningFormula(
        name=f"mf_{ev_name}",
        transformer=ev_name,
        vars=(("e", TermOfLanguage(term_lang)),),
        claim=_preservation_claim(ev_name, [mdl.name for mdl in models]),
    )

    combined = BiformTheory(
        name=theory_name,
        signature=sig,
        transformers=transformers,
        axioms=term_lang.axioms + target.axioms,
        meaning_formulas=term_lang.meaning_formulas + target.meaning_formulas
        + (mf,),
        models=tuple(models),
    )
    return combined, evaluator, mf


def _preservation_claim(ev_name: str, model_names: Sequence[str]):
    eqs = tuple(
        SemEq(Den(SynVar("e"), mn), Den(TransApp(ev_name, (SynVar("e"),)), mn))
        for mn in model_names)
    if len(eqs) == 1:
        return eqs[0]
    if not eqs:
        # no shared models: the claim still names the transformer so the
        # formula stays well-formed; verification reports indeterminate
        return SemEq(Den(SynVar("e"), "<none>"),
                     Den(TransApp(ev_name, (SynVar("e"),)), "<none>"))
    return ClaimAnd(eqs)


# --- homomorphism theories --------------------------------------------------------------


def gen_homomorphism_theory(t: BiformTheory,
                            name: Optional[str] = None) -> BiformTheory:
    """The theory of homomorphisms between two copies of a theory.

    For a single-sorted theory over S this builds sorts S1 and S2, two
    tagged copies f1, f2 of every symbol, a map ``hom : S1 -> S2``, both
    copies of every axiom, and one preservation axiom per symbol:
    ``hom(f1(x1..xk)) = f2(hom(x1)..hom(xk))``. The result is purely
    axiomatic; transformers do not carry over.
    """
    s = _only_sort(t)
    s1, s2 = Sort(f"{s.name}1"), Sort(f"{s.name}2")
    lits = t.signature.admits_literals(s)

    object_ops = [op for op in t.signature.ops if not t.has_transformer(op.name)]

    def copy_op(op: OpDecl, tag: str, ns: Sort) -> OpDecl:
        return OpDecl(f"{op.name}{tag}", tuple(ns for _ in op.arg_sorts), ns)

    ops = ([copy_op(op, "1", s1) for op in object_ops]
           + [copy_op(op, "2", s2) for op in object_ops]
           + [OpDecl("hom", (s1,), s2)])

    def retag(term: Term, tag: str, ns: Sort) -> Term:
        if isinstance(term, Var):
            return Var(term.name, ns)
        if isinstance(term, Lit):
            return Lit(term.value, ns)
        if isinstance(term, App):
            return App(f"{term.symbol}{tag}",
                       tuple(retag(a, tag, ns) for a in term.args))
        raise ShapeMismatch(f"cannot copy {term!r}")

    axioms: list[Formula] = []
    for tag, ns in (("1", s1), ("2", s2)):
        for ax in t.axioms:
            axioms.append(Formula(
                binders=tuple((n, ns) for n, _ in ax.binders),
                conclusion=type(ax.conclusion)(
                    retag(ax.conclusion.lhs, tag, ns),
                    retag(ax.conclusion.rhs, tag, ns)),
                hypotheses=tuple(
                    type(e)(retag(e.lhs, tag, ns), retag(e.rhs, tag, ns))
                    for e in ax.hypotheses),
            ))
    for op in object_ops:
        xs = [Var(f"x{i}", s1) for i in range(op.arity)]
        lhs = App("hom", (App(f"{op.name}1", tuple(xs)),))
        rhs = App(f"{op.name}2", tuple(App("hom", (x,)) for x in xs))
        axioms.append(forall([(x.name, s1) for x in xs], lhs, rhs))

    return make_theory(
        name or f"{t.name}#hom",
        sorts=(s1, s2),
        ops=tuple(ops),
        literal_sorts=(s1, s2) if lits else (),
        axioms=tuple(axioms),
    )


# --- generic transformers ----------------------------------------------------------------

#: The placeholder sort generic templates are written over.
HOLE = Sort("?S")


@dataclass(frozen=True)
class GenericTransformer:
    """A transformer template over placeholder symbols.

    ``parameters`` declares each placeholder role with its arity; rules
    mention them as ``?role`` applications over the placeholder sort,
    and the template's own recursion as ``?self``. Specializing binds
    every role to a concrete symbol of one sort in a target theory.
    """

    name: str
    parameters: tuple[tuple[str, int], ...]
    arg_sorts: tuple[Sort, ...]
    result_sort: Sort
    template_rules: tuple[Rule, ...]
    #: per argument: "term" (any term of the sort) or "numeral"
    arg_kinds: tuple[str, ...] = ()
    needs_literals: bool = False

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)


def specialize_generic(g: GenericTransformer, binding: Mapping[str, str],
                       target: BiformTheory,
                       name: Optional[str] = None) -> Transformer:
    """Instantiate a template in a target theory.

    Every parameter must be bound to a target symbol of the declared
    arity, and all the bound symbols must be homogeneous over a single
    sort, which replaces the placeholder everywhere. The caller
    registers the result (register_transformer) to obtain a theory that
    contains it.
    """
    missing = [r for r, _ in g.parameters if r not in binding]
    if missing:
        raise MissingBinding(f"no binding for parameter(s) {missing}")
    extra = [r for r in binding if all(r != p for p, _ in g.parameters)]
    if extra:
        raise MissingBinding(f"binding names unknown parameter(s) {extra}")

    concrete: Optional[Sort] = None
    for role, arity in g.parameters:
        symbol = binding[role]
        decl = target.signature.op(symbol)
        if decl.arity != arity:
            raise ShapeMismatch(
                f"parameter {role!r} needs arity {arity}, "
                f"{symbol!r} has {decl.arity}")
        here = set(decl.arg_sorts) | {decl.result}
        if len(here) != 1:
            raise ShapeMismatch(f"{symbol!r} is not homogeneous in one sort")
        s = here.pop()
        if concrete is None:
            concrete = s
        elif concrete != s:
            raise ShapeMismatch(
                f"bindings live at two sorts: {concrete.name} and {s.name}")
    if concrete is None:
        raise MissingBinding("the template has no parameters to anchor a sort")
    if g.needs_literals and not target.signature.admits_literals(concrete):
        raise ShapeMismatch(
            f"template {g.name!r} manipulates numerals but sort "
            f"{concrete.name!r} admits no literals")

    new_name = name or g.name
    role_map = {f"?{role}": binding[role] for role, _ in g.parameters}
    role_map["?self"] = new_name

    def st(t: Term) -> Term:
        if isinstance(t, Var):
            return Var(t.name, concrete if t.sort == HOLE else t.sort)
        if isinstance(t, Lit):
            return Lit(t.value, concrete if t.sort == HOLE else t.sort)
        if isinstance(t, Quote):
            return Quote(st(t.body))
        if isinstance(t, App):
            return App(role_map.get(t.symbol, t.symbol),
                       tuple(st(a) for a in t.args))
        raise ShapeMismatch(f"cannot specialize {t!r}")

    rules = tuple(
        Rule(vars=tuple((n, concrete if s == HOLE else s) for n, s in r.vars),
             lhs=st(r.lhs), rhs=st(r.rhs),
             lit_vars=r.lit_vars, guards=r.guards)
        for r in g.template_rules)

    def sclass(s: Sort):
        def wf(term, sig):
            from .kernel import well_sorted

            try:
                return well_sorted(sig, term) == s
            except Exception:
                return False

        return RuleDefined(f"term-of-{s.name}", wf)

    kinds = g.arg_kinds or ("term",) * g.arity
    arg_classes = tuple(
        NumeralTerm(concrete if s == HOLE else s) if kind == "numeral"
        else sclass(concrete if s == HOLE else s)
        for s, kind in zip(g.arg_sorts, kinds))

    return Transformer(
        name=new_name,
        arg_sorts=tuple(concrete if s == HOLE else s for s in g.arg_sorts),
        result_sort=concrete if g.result_sort == HOLE else g.result_sort,
        arg_classes=arg_classes,
        body=Rules(rules),
    )


def power_template() -> GenericTransformer:
    """Iterated application of a binary operation, by binary splitting:
    power(x, 0) is the unit, odd exponents peel one factor, even
    exponents square the base and halve the exponent."""
    x = Var("x", HOLE)
    n = Var("n", HOLE)
    return GenericTransformer(
        name="power",
        parameters=(("op", 2), ("unit", 0)),
        arg_sorts=(HOLE, HOLE),
        result_sort=HOLE,
        arg_kinds=("term", "numeral"),
        needs_literals=True,
        template_rules=(
            Rule(vars=(("x", HOLE), ("n", HOLE)),
                 lhs=App("?self", (x, Lit(0, HOLE))),
                 rhs=App("?unit", ())),
            Rule(vars=(("x", HOLE), ("n", HOLE)),
                 lhs=App("?self", (x, n)),
                 rhs=App("?op", (x, App("?self", (x, App("#sub1", (n,)))))),
                 lit_vars=frozenset({"n"}),
                 guards=(("n", "odd"),)),
            Rule(vars=(("x", HOLE), ("n", HOLE)),
                 lhs=App("?self", (x, n)),
                 rhs=App("?self", (App("?op", (x, x)), App("#half", (n,)))),
                 lit_vars=frozenset({"n"}),
                 guards=(("n", "pos"), ("n", "even"))),
        ),
    )
