"""Biform theories and the graphs that connect them.

A biform theory packages a signature with transformers (algorithms on
its syntax), axioms and meaning formulas (claims about them), and
designated models (where the claims are checked). A theory graph wires
such theories together with morphisms; checking a morphism turns each
source claim into a target obligation and discharges it by syntactic
matching where possible and by model evidence otherwise. Checked
morphisms transport formulas and rule-based transformers; the
combinators extend, rename and combine build new nodes from old ones
while recording the connecting edges.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

from .errors import (
    GraphError,
    IncompatibleModels,
    MorphismUnchecked,
    NameClash,
    NonTransportable,
    StrategyError,
    UncheckedInclusion,
    UnmappedSymbol,
)
from .kernel import (
    App,
    ENGINE_PREFIX,
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
    alpha_equal,
    alpha_key,
    check_formula_wf,
    enumerate_terms,
    is_closed,
    substitute,
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
    check_meaning_wf,
    verify_all,
    verify_meaning,
)
from .poly import poly_to_term, term_to_poly
from .rules import Rule
from .semantics import (
    CheckReport,
    CheckStrategy,
    ExhaustiveTerms,
    Model,
    RandomStrategy,
    check_formula,
    denote,
)
from .termclasses import (
    ClosedTerm,
    NumeralTerm,
    PolyTerm,
    RuleDefined,
    TermOfLanguage,
)
from .transformers import (
    Opaque,
    Rules,
    Transformer,
    validate_transformer,
)

# --- theories -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BiformTheory:
    """An immutable theory node: signature, transformers, claims, models.

    The signature carries one syntax-level symbol per transformer
    (``name : Syn^arity -> Syn``), added by the builders below, so a
    theory can talk about its own algorithms.
    """

    name: str
    signature: Signature
    transformers: tuple[Transformer, ...] = ()
    axioms: tuple[Formula, ...] = ()
    meaning_formulas: tuple[MeaningFormula, ...] = ()
    models: tuple[Model, ...] = ()

    def __post_init__(self):
        seen = set()
        for tr in self.transformers:
            if tr.name in seen:
                raise NameClash(f"two transformers named {tr.name!r}")
            seen.add(tr.name)
            decl = tr.syn_decl()
            if not self.signature.has_op(tr.name):
                raise GraphError(
                    f"transformer {tr.name!r} has no syntax-level symbol; "
                    f"build theories through make_theory or register_transformer")
            if self.signature.op(tr.name) != decl:
                raise GraphError(
                    f"symbol {tr.name!r} does not match its transformer "
                    f"(expected Syn^{tr.arity} -> Syn)")
            validate_transformer(self.signature, tr)
        for ax in self.axioms:
            check_formula_wf(self.signature, ax)
        for mf in self.meaning_formulas:
            check_meaning_wf(self, mf)
        names = [m.name for m in self.models]
        if len(set(names)) != len(names):
            raise NameClash(f"duplicate model names in {names}")

    def __eq__(self, other):
        return (isinstance(other, BiformTheory)
                and self.name == other.name
                and self.signature == other.signature
                and self.transformers == other.transformers
                and self.axioms == other.axioms
                and self.meaning_formulas == other.meaning_formulas
                and list(self.models) == list(other.models))

    @property
    def classification(self) -> str:
        has_alg = bool(self.transformers)
        has_ax = bool(self.axioms) or bool(self.meaning_formulas)
        if has_alg and has_ax:
            return "biform"
        if has_alg:
            return "algorithmic"
        if has_ax:
            return "axiomatic"
        return "empty"

    def transformer(self, name: str) -> Transformer:
        for tr in self.transformers:
            if tr.name == name:
                return tr
        from .errors import UnknownTransformer

        raise UnknownTransformer(f"theory {self.name!r} has no transformer {name!r}")

    def has_transformer(self, name: str) -> bool:
        return any(tr.name == name for tr in self.transformers)

    def model(self, name: str) -> Model:
        for m in self.models:
            if m.name == name:
                return m
        from .errors import ModelError

        raise ModelError(f"theory {self.name!r} designates no model {name!r}")

    def has_model(self, name: str) -> bool:
        return any(m.name == name for m in self.models)

    def replace(self, **kw) -> "BiformTheory":
        return dataclasses.replace(self, **kw)


def make_theory(name: str, *, sorts: Sequence[Sort] = (),
                ops: Sequence[OpDecl] = (),
                literal_sorts: Sequence[Sort] = (),
                axioms: Sequence[Formula] = (),
                transformers: Sequence[Transformer] = (),
                meaning_formulas: Sequence[MeaningFormula] = (),
                models: Sequence[Model] = ()) -> BiformTheory:
    """Assemble a theory, adding the syntax-level symbol each transformer
    requires. ``models`` may be given as (name, carriers, interps)
    triples to be built against the finished signature."""
    sig = Signature(tuple(sorts), tuple(ops), frozenset(literal_sorts))
    for tr in transformers:
        if sig.has_op(tr.name):
            raise NameClash(f"symbol {tr.name!r} already declared")
        sig = sig.extended(ops=(tr.syn_decl(),))
    built = []
    for m in models:
        if isinstance(m, Model):
            built.append(m.with_signature(sig))
        else:
            mname, carriers, interps = m
            built.append(Model(mname, sig, carriers, interps))
    return BiformTheory(name, sig, tuple(transformers), tuple(axioms),
                        tuple(meaning_formulas), tuple(built))


def register_transformer(t: BiformTheory, tr: Transformer, *,
                         sorts: Sequence[Sort] = (),
                         ops: Sequence[OpDecl] = (),
                         literal_sorts: Sequence[Sort] = ()) -> BiformTheory:
    """A new theory with one more transformer (plus its syntax-level
    symbol and any signature fragment the transformer needs). Extras
    already declared identically are tolerated; a clash is not."""
    if t.signature.has_op(tr.name) or t.has_transformer(tr.name):
        raise NameClash(f"name {tr.name!r} already taken in {t.name!r}")
    fresh_ops = []
    for o in ops:
        if t.signature.has_op(o.name):
            if t.signature.op(o.name) != o:
                raise NameClash(
                    f"symbol {o.name!r} already declared differently")
            continue
        fresh_ops.append(o)
    sig = t.signature.extended(sorts=sorts,
                               ops=tuple(fresh_ops) + (tr.syn_decl(),),
                               literal_sorts=literal_sorts)
    models = tuple(m.with_signature(sig) for m in t.models)
    return t.replace(signature=sig, transformers=t.transformers + (tr,),
                     models=models)


def with_meaning(t: BiformTheory, mf: MeaningFormula) -> BiformTheory:
    return t.replace(meaning_formulas=t.meaning_formulas + (mf,))


def with_model(t: BiformTheory, name: str, carriers: Mapping[str, object],
               interps: Mapping[str, object]) -> BiformTheory:
    m = Model(name, t.signature, carriers, interps)
    return t.replace(models=t.models + (m,))


# --- morphisms ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Morphism:
    """A theory morphism: sort and symbol renamings from source to
    target, with `Syn` fixed. Transformer names map separately. The maps
    are exactly what is written; a symbol outside them does not
    translate, by design."""

    name: str
    source: BiformTheory
    target: BiformTheory
    sort_map: tuple[tuple[str, str], ...] = ()
    symbol_map: tuple[tuple[str, str], ...] = ()
    transformer_map: tuple[tuple[str, str], ...] = ()
    model_preserving: bool = False

    def __post_init__(self):
        ssorts = dict(self.sort_map)
        for a, b in self.sort_map:
            if a == SYN.name or b == SYN.name:
                if a != b:
                    raise GraphError("Syn maps only to itself")
                continue
            self.source.signature.sort(a)
            self.target.signature.sort(b)
        for f, g in self.symbol_map:
            fd = self.source.signature.op(f)
            gd = self.target.signature.op(g)
            want_args = tuple(self._map_sort_dict(ssorts, s) for s in fd.arg_sorts)
            want_res = self._map_sort_dict(ssorts, fd.result)
            if gd.arg_sorts != want_args or gd.result != want_res:
                raise GraphError(
                    f"morphism {self.name!r}: {f} : "
                    f"{'x'.join(s.name for s in fd.arg_sorts)} -> {fd.result.name} "
                    f"cannot map to {g} : "
                    f"{'x'.join(s.name for s in gd.arg_sorts)} -> {gd.result.name}")
        for f, g in self.transformer_map:
            ft = self.source.transformer(f)
            gt = self.target.transformer(g)
            if ft.arity != gt.arity:
                raise GraphError(
                    f"transformer map {f} -> {g} changes arity "
                    f"{ft.arity} -> {gt.arity}")

    def _map_sort_dict(self, d: dict, s: Sort) -> Sort:
        if s == SYN:
            return SYN
        if s.name in d:
            return self.target.signature.sort(d[s.name])
        if self.target.signature.has_sort(s):
            return s
        raise UnmappedSymbol(
            f"morphism {self.name!r} leaves sort {s.name!r} unmapped")

    def map_sort(self, s: Sort) -> Sort:
        return self._map_sort_dict(dict(self.sort_map), s)

    def map_symbol(self, f: str) -> str:
        for a, b in self.symbol_map:
            if a == f:
                return b
        for a, b in self.transformer_map:
            if a == f:
                return b
        raise UnmappedSymbol(f"morphism {self.name!r} leaves symbol {f!r} unmapped")

    def map_transformer_name(self, f: str) -> str:
        for a, b in self.transformer_map:
            if a == f:
                return b
        return f


def inclusion(name: str, source: BiformTheory, target: BiformTheory) -> Morphism:
    """The identity-on-names morphism from a theory into one that
    contains it verbatim."""
    return Morphism(
        name=name,
        source=source,
        target=target,
        sort_map=tuple((s.name, s.name) for s in source.signature.sorts),
        symbol_map=tuple((o.name, o.name) for o in source.signature.ops),
        transformer_map=tuple((tr.name, tr.name) for tr in source.transformers),
    )


def translate_term(m: Morphism, t: Term) -> Term:
    if isinstance(t, Var):
        return Var(t.name, m.map_sort(t.sort))
    if isinstance(t, Lit):
        return Lit(t.value, m.map_sort(t.sort))
    if isinstance(t, Quote):
        return Quote(translate_term(m, t.body))
    if isinstance(t, App):
        if t.symbol.startswith(ENGINE_PREFIX):
            sym = t.symbol  # engine primitives are not theory symbols
        else:
            sym = m.map_symbol(t.symbol)
        return App(sym, tuple(translate_term(m, a) for a in t.args))
    raise TypeError(f"not a term: {t!r}")


def translate_formula(m: Morphism, f: Formula) -> Formula:
    return Formula(
        binders=tuple((n, m.map_sort(s)) for n, s in f.binders),
        conclusion=Eq(translate_term(m, f.conclusion.lhs),
                      translate_term(m, f.conclusion.rhs)),
        hypotheses=tuple(Eq(translate_term(m, e.lhs), translate_term(m, e.rhs))
                         for e in f.hypotheses),
    )


def translate_rule(m: Morphism, r: Rule, self_head: Optional[str] = None,
                   new_head: Optional[str] = None) -> Rule:
    """Translate a rewrite rule. The transformer's own head symbol (not
    a real source symbol) is carried to ``new_head``."""

    def tt(t: Term) -> Term:
        if isinstance(t, Var):
            return Var(t.name, m.map_sort(t.sort))
        if isinstance(t, Lit):
            return Lit(t.value, m.map_sort(t.sort))
        if isinstance(t, Quote):
            return Quote(tt(t.body))
        if isinstance(t, App):
            if t.symbol == self_head and self_head is not None:
                sym = new_head
            elif t.symbol.startswith(ENGINE_PREFIX):
                sym = t.symbol
            else:
                sym = m.map_symbol(t.symbol)
            return App(sym, tuple(tt(a) for a in t.args))
        raise TypeError(f"not a term: {t!r}")

    return Rule(
        vars=tuple((n, m.map_sort(s)) for n, s in r.vars),
        lhs=tt(r.lhs),
        rhs=tt(r.rhs),
        lit_vars=r.lit_vars,
        guards=r.guards,
    )


def translate_class(m: Morphism, cls):
    if isinstance(cls, ClosedTerm):
        return ClosedTerm(m.map_sort(cls.sort))
    if isinstance(cls, NumeralTerm):
        return NumeralTerm(m.map_sort(cls.sort))
    if isinstance(cls, PolyTerm):
        return PolyTerm(m.map_sort(cls.sort), cls.variables)
    if isinstance(cls, TermOfLanguage):
        return cls  # names another theory; unaffected by this morphism
    if isinstance(cls, RuleDefined):
        base = translate_class(m, cls.base) if cls.base is not None else None
        return RuleDefined(cls.name, cls.pred, base)
    raise NonTransportable(f"cannot translate class {cls!r}")


def translate_meaning(m: Morphism, mf: MeaningFormula) -> MeaningFormula:
    def texpr(e):
        if isinstance(e, SynVar):
            return e
        if isinstance(e, Embed):
            return Embed(translate_term(m, e.term))
        if isinstance(e, TransApp):
            return TransApp(m.map_transformer_name(e.transformer),
                            tuple(texpr(a) for a in e.args))
        raise NonTransportable(f"cannot translate {e!r}")

    def sem(e):
        if isinstance(e, Den):
            return Den(texpr(e.expr), e.model)
        if isinstance(e, SemOp):
            return SemOp(e.op, tuple(sem(a) for a in e.args), e.params)
        raise NonTransportable(f"cannot translate {e!r}")

    def claim(c):
        if isinstance(c, ClaimAnd):
            return ClaimAnd(tuple(claim(p) for p in c.parts))
        if isinstance(c, SemEq):
            return SemEq(sem(c.lhs), sem(c.rhs))
        if isinstance(c, TermPred):
            return TermPred(c.name, tuple(texpr(a) for a in c.args))
        raise NonTransportable(f"cannot translate {c!r}")

    return MeaningFormula(
        name=mf.name,
        transformer=m.map_transformer_name(mf.transformer),
        vars=tuple((n, translate_class(m, c)) for n, c in mf.vars),
        claim=claim(mf.claim),
    )


# --- obligations and morphism checking ------------------------------------------------


@dataclass(frozen=True)
class Obligation:
    """One checked requirement of a morphism. ``status`` is one of
    ``matched`` (discharged syntactically against a target axiom),
    ``evidence`` (discharged by model checking), ``failed``."""

    origin: str
    kind: str  # "axiom" | "meaning" | "model"
    status: str
    report: Optional[CheckReport] = None
    detail: str = ""

    def describe(self) -> dict:
        d = {"origin": self.origin, "kind": self.kind, "status": self.status}
        if self.detail:
            d["detail"] = self.detail
        if self.report is not None:
            d["report"] = self.report.describe()
        return d


def _alpha_rename(f: Formula) -> Formula:
    """Binders renamed positionally, for comparison up to alpha."""
    sub = {n: Var(f"_b{i}", s) for i, (n, s) in enumerate(f.binders)}
    return Formula(
        binders=tuple((f"_b{i}", s) for i, (_, s) in enumerate(f.binders)),
        conclusion=Eq(substitute(f.conclusion.lhs, sub),
                      substitute(f.conclusion.rhs, sub)),
        hypotheses=tuple(Eq(substitute(e.lhs, sub), substitute(e.rhs, sub))
                         for e in f.hypotheses),
    )


def _poly_axiom_key(sig: Signature, f: Formula):
    """A comparison key with every equation side put in polynomial
    normal form over the binders; None when the formula is not
    polynomial-shaped. Lets `x+y = y+x` match `y+x = x+y` written with
    the binders the other way around."""
    try:
        g = _alpha_rename(f)
        names = tuple(n for n, _ in g.binders)
        eqs = []
        for eq in g.equations():
            pl = term_to_poly(eq.lhs, names)
            pr = term_to_poly(eq.rhs, names)
            # orient each equation deterministically
            key = tuple(sorted((pl.terms, pr.terms)))
            eqs.append(key)
        return (tuple(s.name for _, s in g.binders), tuple(sorted(eqs)))
    except Exception:
        return None


def check_morphism(m: Morphism, strategy: CheckStrategy,
                   axiom_strategy: Optional[CheckStrategy] = None) -> list[Obligation]:
    """Produce and discharge the proof obligations of a morphism.

    Every source axiom and meaning formula is translated to the target.
    An axiom is first matched syntactically against the target's axioms
    (up to renaming of bound variables, then up to polynomial normal
    form); failing that it is checked against every designated target
    model. A meaning formula is matched structurally, else re-verified
    in the target. With ``model_preserving`` set, same-named designated
    models must agree on the denotation of translated closed terms.
    """
    obligations: list[Obligation] = []
    ax_strategy = axiom_strategy or strategy
    target = m.target

    target_alpha = [alpha_key(ax) for ax in target.axioms]
    target_poly = [_poly_axiom_key(target.signature, ax) for ax in target.axioms]

    for i, ax in enumerate(m.source.axioms):
        origin = f"axiom {i} of {m.source.name}"
        try:
            tx = translate_formula(m, ax)
            check_formula_wf(target.signature, tx)
        except Exception as e:
            obligations.append(Obligation(
                origin, "axiom", "failed",
                detail=f"translation failed: {type(e).__name__}: {e}"))
            continue
        k = alpha_key(tx)
        if k in target_alpha:
            obligations.append(Obligation(
                origin, "axiom", "matched",
                detail=f"axiom {target_alpha.index(k)} of {target.name}"))
            continue
        pk = _poly_axiom_key(target.signature, tx)
        if pk is not None and pk in target_poly:
            obligations.append(Obligation(
                origin, "axiom", "matched",
                detail=f"axiom {target_poly.index(pk)} of {target.name} "
                       f"(polynomial normal form)"))
            continue
        if not target.models:
            obligations.append(Obligation(
                origin, "axiom", "failed",
                report=CheckReport("indeterminate", 0, ax_strategy.describe(),
                                   note="no designated models to check against")))
            continue
        reports = []
        bad = None
        for model in target.models:
            try:
                rep = check_formula(model, tx, ax_strategy)
            except Exception as e:
                rep = CheckReport("indeterminate", 0, ax_strategy.describe(),
                                  note=f"{model.name}: {type(e).__name__}: {e}")
            reports.append((model.name, rep))
            if rep.status != "pass":
                bad = (model.name, rep)
                break
        if bad is None:
            total = sum(r.cases_run for _, r in reports)
            obligations.append(Obligation(
                origin, "axiom", "evidence",
                report=CheckReport("pass", total, ax_strategy.describe(),
                                   note="models: " + ", ".join(n for n, _ in reports))))
        else:
            obligations.append(Obligation(
                origin, "axiom", "failed", report=bad[1], detail=f"model {bad[0]}"))

    for mf in m.source.meaning_formulas:
        origin = f"meaning {mf.name} of {m.source.name}"
        try:
            tmf = translate_meaning(m, mf)
        except Exception as e:
            obligations.append(Obligation(
                origin, "meaning", "failed",
                detail=f"translation failed: {type(e).__name__}: {e}"))
            continue
        if any(_same_meaning(tmf, other) for other in target.meaning_formulas):
            obligations.append(Obligation(origin, "meaning", "matched",
                                          detail=f"declared by {target.name}"))
            continue
        if not target.has_transformer(tmf.transformer):
            obligations.append(Obligation(
                origin, "meaning", "failed",
                detail=f"target lacks transformer {tmf.transformer!r}"))
            continue
        rep = verify_meaning(target, tmf, strategy)
        status = "evidence" if rep.report.status == "pass" else "failed"
        obligations.append(Obligation(origin, "meaning", status, report=rep.report))

    if m.model_preserving:
        obligations.extend(_model_preservation(m, strategy))

    return obligations


def _same_meaning(a: MeaningFormula, b: MeaningFormula) -> bool:
    return (a.transformer == b.transformer and a.claim == b.claim
            and tuple((n, type(c).__name__) for n, c in a.vars)
            == tuple((n, type(c).__name__) for n, c in b.vars))


def _model_preservation(m: Morphism, strategy: CheckStrategy) -> list[Obligation]:
    from .textfmt import print_term

    pairs = []
    for ms in m.source.models:
        if m.target.has_model(ms.name):
            mt = m.target.model(ms.name)
            sorts = []
            for s in m.source.signature.sorts:
                if s == SYN or not ms.carries(s):
                    continue
                ts = m.map_sort(s)
                if mt.carries(ts) and ms.carrier(s) == mt.carrier(ts):
                    sorts.append(s)
            if sorts:
                pairs.append((ms, mt, sorts))
    if not pairs:
        raise IncompatibleModels(
            f"morphism {m.name!r} claims model preservation but no "
            f"designated models share a name and a comparable carrier")

    out = []
    for ms, mt, sorts in pairs:
        origin = f"model {ms.name}"
        failed = None
        run = 0
        for s in sorts:
            cases = _preservation_terms(m.source.signature, s, strategy)
            for t in cases:
                run += 1
                try:
                    v1 = denote(ms, t)
                    v2 = denote(mt, translate_term(m, t))
                except Exception as e:
                    failed = (t, f"denotation error: {type(e).__name__}: {e}", "")
                    break
                if v1 != v2:
                    failed = (t, str(v1), str(v2))
                    break
            if failed:
                break
        if failed is None:
            out.append(Obligation(
                origin, "model", "evidence",
                report=CheckReport("pass", run, strategy.describe())))
        else:
            t, a, b = failed
            case = (("term", print_term(t)), ("source value", a),
                    ("target value", b))
            out.append(Obligation(
                origin, "model", "failed",
                report=CheckReport("fail", run, strategy.describe(),
                                   counterexample=case)))
    return out


def _preservation_terms(sig: Signature, sort: Sort,
                        strategy: CheckStrategy) -> list[Term]:
    if isinstance(strategy, ExhaustiveTerms):
        out = enumerate_terms(sig, sort, strategy.max_depth, strategy.literal_pool)
        return [t for t in out if is_closed(t)]
    if isinstance(strategy, RandomStrategy):
        import random

        from .termclasses import _random_closed_term

        rng = random.Random(strategy.seed)
        out = []
        for _ in range(strategy.samples):
            try:
                out.append(_random_closed_term(sig, sort, rng))
            except Exception:
                return out
        return out
    raise StrategyError(
        "model preservation needs a term strategy (exhaustive-terms or random)")


# --- transport ------------------------------------------------------------------------

Transportable = Union[Formula, MeaningFormula, Transformer, Rule, Term]


def transport(m: Morphism, item: Transportable,
              obligations: Optional[list[Obligation]] = None):
    """Carry an item along a checked morphism.

    ``obligations`` must be the result of check_morphism on ``m``; a
    missing check refuses outright and a failed one refuses loudly.
    Rule-based transformers translate rule by rule; opaque ones only
    transport when the transformer map sends them to something the
    target already implements; generic templates pass through untouched
    (they mention no source symbols, only placeholders).
    """
    if obligations is None:
        raise MorphismUnchecked(
            f"morphism {m.name!r} has not been checked; run check_morphism first")
    bad = [ob for ob in obligations if ob.status == "failed"]
    if bad:
        raise NonTransportable(
            f"morphism {m.name!r} has {len(bad)} failed obligation(s); "
            f"first: {bad[0].origin}")
    if isinstance(item, Formula):
        return translate_formula(m, item)
    if isinstance(item, MeaningFormula):
        return translate_meaning(m, item)
    if isinstance(item, Rule):
        return translate_rule(m, item)
    if isinstance(item, Transformer):
        new_name = m.map_transformer_name(item.name)
        if isinstance(item.body, Rules):
            rules = tuple(
                translate_rule(m, r, self_head=item.name, new_head=new_name)
                for r in item.body.rules)
            return Transformer(
                name=new_name,
                arg_sorts=tuple(m.map_sort(s) for s in item.arg_sorts),
                result_sort=m.map_sort(item.result_sort),
                arg_classes=tuple(translate_class(m, c) for c in item.arg_classes),
                body=Rules(rules, item.body.fuel),
            )
        if isinstance(item.body, Opaque):
            if any(a == item.name for a, _ in m.transformer_map):
                return m.target.transformer(new_name)
            raise NonTransportable(
                f"transformer {item.name!r} is opaque (host code) and the "
                f"morphism names no target implementation for it")
        return dataclasses.replace(item, name=new_name)
    if isinstance(item, (Var, Lit, App, Quote)):
        return translate_term(m, item)
    raise NonTransportable(f"cannot transport {item!r}")


# --- the graph -----------------------------------------------------------------------


class TheoryGraph:
    """Named theories and named morphisms, with cached check results.

    Node and edge iteration order is insertion order, so every walk over
    the graph is deterministic.
    """

    def __init__(self):
        self._nodes: dict[str, BiformTheory] = {}
        self._edges: dict[str, Morphism] = {}
        self._checked: dict[str, list[Obligation]] = {}

    # -- access

    @property
    def nodes(self) -> list[BiformTheory]:
        return list(self._nodes.values())

    @property
    def edges(self) -> list[Morphism]:
        return list(self._edges.values())

    def node(self, name: str) -> BiformTheory:
        if name not in self._nodes:
            raise GraphError(f"no theory named {name!r} in the graph")
        return self._nodes[name]

    def has_node(self, name: str) -> bool:
        return name in self._nodes

    def edge(self, name: str) -> Morphism:
        if name not in self._edges:
            raise GraphError(f"no morphism named {name!r} in the graph")
        return self._edges[name]

    def obligations(self, edge_name: str) -> Optional[list[Obligation]]:
        return self._checked.get(edge_name)

    # -- construction

    def add_node(self, t: BiformTheory) -> BiformTheory:
        if t.name in self._nodes:
            raise NameClash(f"theory {t.name!r} already in the graph")
        self._nodes[t.name] = t
        return t

    def add_edge(self, m: Morphism) -> Morphism:
        if m.name in self._edges:
            raise NameClash(f"morphism {m.name!r} already in the graph")
        for end in (m.source, m.target):
            if self._nodes.get(end.name) is not end:
                raise GraphError(
                    f"morphism {m.name!r} endpoint {end.name!r} is not a "
                    f"node of this graph")
        self._edges[m.name] = m
        return m

    # -- checking

    def check_edge(self, name: str, strategy: CheckStrategy,
                   axiom_strategy: Optional[CheckStrategy] = None) -> list[Obligation]:
        m = self.edge(name)
        obs = check_morphism(m, strategy, axiom_strategy)
        self._checked[name] = obs
        return obs

    def edge_status(self, name: str) -> str:
        obs = self._checked.get(name)
        if obs is None:
            return "unchecked"
        if any(ob.status == "failed" for ob in obs):
            return "failed"
        if all(ob.status == "matched" for ob in obs):
            return "ok"
        return "evidence"

    def transport_over(self, edge_name: str, item: Transportable):
        m = self.edge(edge_name)
        return transport(m, item, self._checked.get(edge_name))

    # -- combinators

    def extend(self, base_name: str, new_name: str, **kw) -> BiformTheory:
        base = self.node(base_name)
        new, inc = extend_theory(base, new_name, **kw)
        self.add_node(new)
        self.add_edge(inc)
        return new

    def rename(self, base_name: str, new_name: str,
               sort_renames: Mapping[str, str] = (),
               symbol_renames: Mapping[str, str] = ()) -> BiformTheory:
        base = self.node(base_name)
        new, mor = rename_theory(base, new_name, dict(sort_renames),
                                 dict(symbol_renames))
        self.add_node(new)
        self.add_edge(mor)
        return new

    def combine(self, new_name: str, left_edge: str, right_edge: str) -> BiformTheory:
        """Combine the targets of two checked inclusions out of a shared
        base node. The edges' obligations gate the construction."""
        inc1 = self.edge(left_edge)
        inc2 = self.edge(right_edge)
        obs1 = self._checked.get(left_edge)
        obs2 = self._checked.get(right_edge)
        new, m1, m2 = combine_theories(new_name, inc1, inc2, obs1, obs2)
        self.add_node(new)
        self.add_edge(m1)
        self.add_edge(m2)
        return new


# --- combinators ------------------------------------------------------------------------


def extend_theory(t: BiformTheory, name: str, *,
                  sorts: Sequence[Sort] = (),
                  ops: Sequence[OpDecl] = (),
                  literal_sorts: Sequence[Sort] = (),
                  axioms: Sequence[Formula] = (),
                  transformers: Sequence[Transformer] = (),
                  meaning_formulas: Sequence[MeaningFormula] = (),
                  models: Sequence = ()) -> tuple[BiformTheory, Morphism]:
    """Conservatively grow a theory; returns the extension and the
    inclusion morphism into it. New names must be fresh."""
    for s in sorts:
        if t.signature.has_sort(s):
            raise NameClash(f"sort {s.name!r} already declared in {t.name!r}")
    for o in ops:
        if t.signature.has_op(o.name):
            raise NameClash(f"symbol {o.name!r} already declared in {t.name!r}")
    sig = t.signature.extended(sorts=sorts, ops=ops, literal_sorts=literal_sorts)
    for tr in transformers:
        if sig.has_op(tr.name):
            raise NameClash(f"name {tr.name!r} already taken in {t.name!r}")
        sig = sig.extended(ops=(tr.syn_decl(),))
    old_models = tuple(m.with_signature(sig) for m in t.models)
    new_models = []
    for m in models:
        if isinstance(m, Model):
            new_models.append(m.with_signature(sig))
        else:
            mname, carriers, interps = m
            new_models.append(Model(mname, sig, carriers, interps))
    merged_models = list(old_models)
    for nm in new_models:
        replaced = False
        for i, om in enumerate(merged_models):
            if om.name == nm.name:
                merged = Model(nm.name, sig,
                               {**om.carriers, **nm.carriers},
                               {**om.interps, **nm.interps})
                merged_models[i] = merged
                replaced = True
                break
        if not replaced:
            merged_models.append(nm)
    new = BiformTheory(
        name=name,
        signature=sig,
        transformers=t.transformers + tuple(transformers),
        axioms=t.axioms + tuple(axioms),
        meaning_formulas=t.meaning_formulas + tuple(meaning_formulas),
        models=tuple(merged_models),
    )
    return new, inclusion(f"inc:{t.name}->{name}", t, new)


def rename_theory(t: BiformTheory, name: str,
                  sort_renames: Mapping[str, str],
                  symbol_renames: Mapping[str, str]) -> tuple[BiformTheory, Morphism]:
    """A copy of a theory under new sort/symbol names, with the renaming
    morphism. Transformer names rename through ``symbol_renames`` too
    (a transformer and its syntax-level symbol share a name)."""
    for old in sort_renames:
        t.signature.sort(old)
    for old in symbol_renames:
        if not t.signature.has_op(old):
            raise UnmappedSymbol(f"no symbol {old!r} to rename")

    def rs(s: Sort) -> Sort:
        if s == SYN:
            return SYN
        return Sort(sort_renames.get(s.name, s.name))

    def rn(f: str) -> str:
        return symbol_renames.get(f, f)

    new_sorts = tuple(rs(s) for s in t.signature.sorts)
    if len({s.name for s in new_sorts}) != len(new_sorts):
        raise NameClash("sort renaming collides")
    new_ops = tuple(OpDecl(rn(o.name), tuple(rs(s) for s in o.arg_sorts), rs(o.result))
                    for o in t.signature.ops)
    if len({o.name for o in new_ops}) != len(new_ops):
        raise NameClash("symbol renaming collides")
    sig = Signature(new_sorts, new_ops,
                    frozenset(rs(s) for s in t.signature.literal_sorts))

    def rterm(u: Term) -> Term:
        if isinstance(u, Var):
            return Var(u.name, rs(u.sort))
        if isinstance(u, Lit):
            return Lit(u.value, rs(u.sort))
        if isinstance(u, Quote):
            return Quote(rterm(u.body))
        if isinstance(u, App):
            sym = u.symbol if u.symbol.startswith(ENGINE_PREFIX) else rn(u.symbol)
            return App(sym, tuple(rterm(a) for a in u.args))
        raise TypeError(f"not a term: {u!r}")

    def rformula(f: Formula) -> Formula:
        return Formula(
            binders=tuple((n, rs(s)) for n, s in f.binders),
            conclusion=Eq(rterm(f.conclusion.lhs), rterm(f.conclusion.rhs)),
            hypotheses=tuple(Eq(rterm(e.lhs), rterm(e.rhs)) for e in f.hypotheses),
        )

    def rrule(r: Rule) -> Rule:
        return Rule(vars=tuple((n, rs(s)) for n, s in r.vars),
                    lhs=rterm(r.lhs), rhs=rterm(r.rhs),
                    lit_vars=r.lit_vars, guards=r.guards)

    def rclass(c):
        if isinstance(c, ClosedTerm):
            return ClosedTerm(rs(c.sort))
        if isinstance(c, NumeralTerm):
            return NumeralTerm(rs(c.sort))
        if isinstance(c, PolyTerm):
            return PolyTerm(rs(c.sort), c.variables)
        if isinstance(c, RuleDefined):
            return RuleDefined(c.name, c.pred,
                               rclass(c.base) if c.base is not None else None)
        return c

    def rtransformer(tr: Transformer) -> Transformer:
        body = tr.body
        if isinstance(body, Rules):
            # rrule renames the transformer's own head too: rn is a plain
            # name lookup and the head shares the transformer's name
            body = Rules(tuple(rrule(r) for r in body.rules), body.fuel)
        elif isinstance(body, Opaque):
            cfg = []
            for k, v in body.config:
                if k in ("sort", "numeral_sort") and isinstance(v, str):
                    v = sort_renames.get(v, v)
                elif k in ("add", "mul") and isinstance(v, str):
                    v = symbol_renames.get(v, v)
                cfg.append((k, v))
            body = Opaque(body.host_id, tuple(cfg))
        return Transformer(
            name=rn(tr.name),
            arg_sorts=tuple(rs(s) for s in tr.arg_sorts),
            result_sort=rs(tr.result_sort),
            arg_classes=tuple(rclass(c) for c in tr.arg_classes),
            body=body,
        )

    def rmeaning(mf: MeaningFormula) -> MeaningFormula:
        def texpr(e):
            if isinstance(e, SynVar):
                return e
            if isinstance(e, Embed):
                return Embed(rterm(e.term))
            return TransApp(rn(e.transformer), tuple(texpr(a) for a in e.args))

        def sem(e):
            if isinstance(e, Den):
                return Den(texpr(e.expr), e.model)
            return SemOp(e.op, tuple(sem(a) for a in e.args), e.params)

        def claim(c):
            if isinstance(c, ClaimAnd):
                return ClaimAnd(tuple(claim(p) for p in c.parts))
            if isinstance(c, SemEq):
                return SemEq(sem(c.lhs), sem(c.rhs))
            return TermPred(c.name, tuple(texpr(a) for a in c.args))

        return MeaningFormula(mf.name, rn(mf.transformer),
                              tuple((n, rclass(c)) for n, c in mf.vars),
                              claim(mf.claim))

    new = BiformTheory(
        name=name,
        signature=sig,
        transformers=tuple(rtransformer(tr) for tr in t.transformers),
        axioms=tuple(rformula(f) for f in t.axioms),
        meaning_formulas=tuple(rmeaning(mf) for mf in t.meaning_formulas),
        models=tuple(
            Model(m.name, sig,
                  {sort_renames.get(sn, sn): d for sn, d in m.carriers.items()},
                  {rn(f): i for f, i in m.interps.items()})
            for m in t.models),
    )
    mor = Morphism(
        name=f"rename:{t.name}->{name}",
        source=t,
        target=new,
        sort_map=tuple((s.name, rs(s).name) for s in t.signature.sorts),
        symbol_map=tuple((o.name, rn(o.name)) for o in t.signature.ops),
        transformer_map=tuple((tr.name, rn(tr.name)) for tr in t.transformers),
    )
    return new, mor


def combine_theories(name: str, inc1: Morphism, inc2: Morphism,
                     obligations1: Optional[list[Obligation]],
                     obligations2: Optional[list[Obligation]],
                     ) -> tuple[BiformTheory, Morphism, Morphism]:
    """Glue two theories over a shared base along two checked inclusions.

    Both inclusions must start at the same base node, be previously
    checked, and agree on the names of every base image (so the shared
    part needs no renaming). The result holds the shared part once, each
    theory's proper part, and the union of the claims with base
    duplicates removed.
    """
    if inc1.source is not inc2.source and inc1.source != inc2.source:
        raise GraphError("the two inclusions start at different bases")
    base = inc1.source
    t1, t2 = inc1.target, inc2.target
    for label, obs in (("left", obligations1), ("right", obligations2)):
        if obs is None:
            raise UncheckedInclusion(
                f"the {label} inclusion has not been checked")
        failed = [ob for ob in obs if ob.status == "failed"]
        if failed:
            raise UncheckedInclusion(
                f"the {label} inclusion has failed obligations "
                f"({failed[0].origin})")
    for s in base.signature.sorts:
        if inc1.map_sort(s).name != inc2.map_sort(s).name:
            raise NameClash(
                f"base sort {s.name!r} lands on different names "
                f"({inc1.map_sort(s).name!r} vs {inc2.map_sort(s).name!r})")
    for o in base.signature.ops:
        if inc1.map_symbol(o.name) != inc2.map_symbol(o.name):
            raise NameClash(
                f"base symbol {o.name!r} lands on different names")

    image_sorts = {inc1.map_sort(s).name for s in base.signature.sorts}
    image_ops = {inc1.map_symbol(o.name) for o in base.signature.ops}

    def proper_sorts(t: BiformTheory):
        return [s for s in t.signature.sorts if s.name not in image_sorts]

    def proper_ops(t: BiformTheory):
        return [o for o in t.signature.ops if o.name not in image_ops]

    clash = ({s.name for s in proper_sorts(t1)} & {s.name for s in proper_sorts(t2)})
    if clash:
        raise NameClash(f"both sides declare sorts {sorted(clash)}; rename first")
    clash = ({o.name for o in proper_ops(t1)} & {o.name for o in proper_ops(t2)})
    if clash:
        raise NameClash(
            f"both sides declare symbols {sorted(clash)} outside the base; "
            f"route them through the base or rename")

    sorts = tuple(inc1.map_sort(s) for s in base.signature.sorts) \
        + tuple(proper_sorts(t1)) + tuple(proper_sorts(t2))
    ops = tuple(t1.signature.op(inc1.map_symbol(o.name)) for o in base.signature.ops) \
        + tuple(proper_ops(t1)) + tuple(proper_ops(t2))
    literal_sorts = frozenset(
        s for s in t1.signature.literal_sorts | t2.signature.literal_sorts)
    sig = Signature(sorts, ops, literal_sorts)

    base_axioms = tuple(translate_formula(inc1, ax) for ax in base.axioms)
    base_keys = {alpha_key(ax) for ax in base_axioms}
    axioms = list(base_axioms)
    for t in (t1, t2):
        for ax in t.axioms:
            if alpha_key(ax) not in base_keys:
                axioms.append(ax)

    transformers: list[Transformer] = []
    for t in (t1, t2):
        for tr in t.transformers:
            existing = next((x for x in transformers if x.name == tr.name), None)
            if existing is None:
                transformers.append(tr)
            elif existing != tr:
                raise NameClash(
                    f"both sides carry a transformer {tr.name!r} and they differ")

    meanings: list[MeaningFormula] = []
    for t in (t1, t2):
        for mf in t.meaning_formulas:
            if not any(_same_meaning(mf, other) for other in meanings):
                meanings.append(mf)

    merged: dict[str, tuple[dict, dict]] = {}
    order: list[str] = []
    for t in (t1, t2):
        for mdl in t.models:
            if mdl.name not in merged:
                merged[mdl.name] = (dict(mdl.carriers), dict(mdl.interps))
                order.append(mdl.name)
            else:
                carriers, interps = merged[mdl.name]
                for sn, d in mdl.carriers.items():
                    if sn in carriers and carriers[sn] != d:
                        raise NameClash(
                            f"model {mdl.name!r}: carriers for {sn!r} disagree")
                    carriers[sn] = d
                for fn, i in mdl.interps.items():
                    if fn in interps and interps[fn] != i:
                        raise NameClash(
                            f"model {mdl.name!r}: interpretations of {fn!r} disagree")
                    interps[fn] = i
    models = tuple(Model(n, sig, *merged[n]) for n in order)

    new = BiformTheory(
        name=name,
        signature=sig,
        transformers=tuple(transformers),
        axioms=tuple(axioms),
        meaning_formulas=tuple(meanings),
        models=models,
    )
    m1 = inclusion(f"inc:{t1.name}->{name}", t1, new)
    m2 = inclusion(f"inc:{t2.name}->{name}", t2, new)
    return new, m1, m2
