"""Many-sorted first-order terms with literals and reified syntax.

Terms are the expressions every other part of the engine manipulates:
transformers rewrite them, models give them meaning, and morphisms
translate them. A `Quote` node reifies a term as a syntactic value of
the built-in sort `Syn`, which is how algorithms that *talk about*
syntax stay inside the term language itself.

All values here are immutable; operations are pure functions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence, Union

from .errors import (
    ArityMismatch,
    LiteralNotAdmitted,
    NotAQuotation,
    OpenBody,
    SortMismatch,
    UnknownSort,
    UnknownSymbol,
)


@dataclass(frozen=True)
class Sort:
    name: str

    def __repr__(self):
        return f"Sort({self.name!r})"


#: The sort of reified syntax. Implicitly present in every signature.
SYN = Sort("Syn")


@dataclass(frozen=True)
class OpDecl:
    """A function-symbol declaration: ``name : arg_sorts -> result``."""

    name: str
    arg_sorts: tuple[Sort, ...]
    result: Sort

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)


@dataclass(frozen=True)
class Signature:
    """Sorts, symbol declarations and literal admissions of a language.

    Symbol declaration order is significant: term enumeration and
    anything else that must be deterministic follows it.
    """

    sorts: tuple[Sort, ...] = ()
    ops: tuple[OpDecl, ...] = ()
    literal_sorts: frozenset[Sort] = frozenset()

    def __post_init__(self):
        names = [s.name for s in self.sorts]
        if len(set(names)) != len(names):
            raise UnknownSort(f"duplicate sort names in {names}")
        if SYN in self.literal_sorts:
            raise LiteralNotAdmitted("Syn admits no literals")
        declared = set(self.sorts) | {SYN}
        seen = set()
        for op in self.ops:
            if op.name in seen:
                raise UnknownSymbol(f"duplicate symbol {op.name!r}")
            seen.add(op.name)
            for s in op.arg_sorts + (op.result,):
                if s not in declared:
                    raise UnknownSort(f"symbol {op.name!r} mentions undeclared sort {s.name!r}")
        for s in self.literal_sorts:
            if s not in declared:
                raise UnknownSort(f"literal sort {s.name!r} not declared")

    # `sorts` excludes SYN unless explicitly declared; all_sorts includes it.
    @property
    def all_sorts(self) -> tuple[Sort, ...]:
        if SYN in self.sorts:
            return self.sorts
        return self.sorts + (SYN,)

    def op(self, name: str) -> OpDecl:
        for o in self.ops:
            if o.name == name:
                return o
        raise UnknownSymbol(f"unknown symbol {name!r}")

    def has_op(self, name: str) -> bool:
        return any(o.name == name for o in self.ops)

    def sort(self, name: str) -> Sort:
        if name == SYN.name:
            return SYN
        for s in self.sorts:
            if s.name == name:
                return s
        raise UnknownSort(f"unknown sort {name!r}")

    def has_sort(self, sort: Sort) -> bool:
        return sort == SYN or sort in self.sorts

    def admits_literals(self, sort: Sort) -> bool:
        return sort in self.literal_sorts

    def extended(self, sorts: Sequence[Sort] = (), ops: Sequence[OpDecl] = (),
                 literal_sorts: Sequence[Sort] = ()) -> "Signature":
        """A new signature with the given declarations appended."""
        new_sorts = self.sorts + tuple(s for s in sorts if s not in self.sorts)
        return Signature(
            sorts=new_sorts,
            ops=self.ops + tuple(ops),
            literal_sorts=self.literal_sorts | frozenset(literal_sorts),
        )


# --- terms --------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort


@dataclass(frozen=True)
class Lit:
    value: int
    sort: Sort


@dataclass(frozen=True)
class App:
    symbol: str
    args: tuple["Term", ...] = ()


@dataclass(frozen=True)
class Quote:
    """A term reified as a syntactic value; always of sort `Syn`."""

    body: "Term"


Term = Union[Var, Lit, App, Quote]

#: A substitution: variable name -> replacement term.
Valuation = Mapping[str, Term]

# Symbols whose name starts with this prefix are engine-level literal
# primitives usable in rewrite rules (evaluated eagerly on literal
# arguments, never declared in signatures, never translated by morphisms).
ENGINE_PREFIX = "#"

_ENGINE_UNARY = {
    "#add1": lambda v: v + 1,
    "#sub1": lambda v: v - 1,
    "#half": lambda v: v // 2,
    "#double": lambda v: 2 * v,
    "#neg": lambda v: -v,
}
_ENGINE_BINARY = {
    "#add": lambda a, b: a + b,
    "#sub": lambda a, b: a - b,
    "#mul": lambda a, b: a * b,
}


def engine_op_arity(symbol: str) -> int:
    if symbol in _ENGINE_UNARY:
        return 1
    if symbol in _ENGINE_BINARY:
        return 2
    raise UnknownSymbol(f"unknown engine primitive {symbol!r}")


def eval_engine_op(symbol: str, values: Sequence[int]) -> int:
    if symbol in _ENGINE_UNARY:
        return _ENGINE_UNARY[symbol](values[0])
    return _ENGINE_BINARY[symbol](*values)


def well_sorted(sig: Signature, t: Term, *, allow_engine_ops: bool = False) -> Sort:
    """The unique sort of ``t`` under ``sig``; raises on any violation.

    With ``allow_engine_ops`` set, ``#``-prefixed applications are sorted
    polymorphically (all arguments share one literal-admitting sort, which
    is also the result); this is only used to validate rewrite rules.
    """
    if isinstance(t, Var):
        if not sig.has_sort(t.sort):
            raise UnknownSort(f"variable {t.name!r} has undeclared sort {t.sort.name!r}")
        return t.sort
    if isinstance(t, Lit):
        if not sig.admits_literals(t.sort):
            raise LiteralNotAdmitted(f"sort {t.sort.name!r} admits no literals")
        return t.sort
    if isinstance(t, Quote):
        well_sorted(sig, t.body, allow_engine_ops=allow_engine_ops)
        return SYN
    if isinstance(t, App):
        if t.symbol.startswith(ENGINE_PREFIX):
            if not allow_engine_ops:
                raise UnknownSymbol(f"engine primitive {t.symbol!r} outside a rewrite rule")
            if engine_op_arity(t.symbol) != len(t.args):
                raise ArityMismatch(f"{t.symbol} expects {engine_op_arity(t.symbol)} args")
            sorts = {well_sorted(sig, a, allow_engine_ops=True) for a in t.args}
            if len(sorts) != 1:
                raise SortMismatch(f"{t.symbol} arguments must share a sort")
            s = sorts.pop()
            if not sig.admits_literals(s):
                raise LiteralNotAdmitted(f"{t.symbol} needs a literal-admitting sort, got {s.name!r}")
            return s
        decl = sig.op(t.symbol)
        if len(t.args) != decl.arity:
            raise ArityMismatch(
                f"{t.symbol} expects {decl.arity} arguments, got {len(t.args)}")
        for i, (a, want) in enumerate(zip(t.args, decl.arg_sorts)):
            got = well_sorted(sig, a, allow_engine_ops=allow_engine_ops)
            if got != want:
                raise SortMismatch(
                    f"argument {i} of {t.symbol} has sort {got.name}, expected {want.name}")
        return decl.result
    raise TypeError(f"not a term: {t!r}")


def free_vars(t: Term) -> dict[str, Sort]:
    """Free variables of ``t`` (terms are binder-free, so all variables)."""
    out: dict[str, Sort] = {}

    def walk(u: Term):
        if isinstance(u, Var):
            prev = out.get(u.name)
            if prev is not None and prev != u.sort:
                raise SortMismatch(f"variable {u.name!r} used at two sorts")
            out[u.name] = u.sort
        elif isinstance(u, App):
            for a in u.args:
                walk(a)
        elif isinstance(u, Quote):
            walk(u.body)

    walk(t)
    return out


def is_closed(t: Term) -> bool:
    return not free_vars(t)


def substitute(t: Term, v: Valuation, sig: Optional[Signature] = None) -> Term:
    """Simultaneous substitution of free variables, including under Quote.

    When ``sig`` is given, every replacement actually used is checked to
    have the sort of the variable it replaces.
    """
    if isinstance(t, Var):
        if t.name in v:
            rep = v[t.name]
            if sig is not None:
                got = well_sorted(sig, rep, allow_engine_ops=True)
                if got != t.sort:
                    raise SortMismatch(
                        f"cannot substitute {got.name}-term for {t.name}:{t.sort.name}")
            elif isinstance(rep, (Var, Lit)) and rep.sort != t.sort:
                raise SortMismatch(
                    f"cannot substitute {rep.sort.name}-term for {t.name}:{t.sort.name}")
            elif isinstance(rep, Quote) and t.sort != SYN:
                raise SortMismatch(f"cannot substitute Syn-term for {t.name}:{t.sort.name}")
            return rep
        return t
    if isinstance(t, Lit):
        return t
    if isinstance(t, App):
        return App(t.symbol, tuple(substitute(a, v, sig) for a in t.args))
    if isinstance(t, Quote):
        return Quote(substitute(t.body, v, sig))
    raise TypeError(f"not a term: {t!r}")


def unquote(t: Term) -> Term:
    """Disquotation: ``Quote(b) -> b`` for closed ``b``."""
    if not isinstance(t, Quote):
        raise NotAQuotation(f"cannot evaluate non-quotation {t!r}")
    if not is_closed(t.body):
        raise OpenBody("evaluation of open syntax is rejected")
    return t.body


def depth(t: Term) -> int:
    """Leaf depth 0; an application is one deeper than its deepest child."""
    if isinstance(t, (Var, Lit)):
        return 0
    if isinstance(t, Quote):
        return 1 + depth(t.body)
    if isinstance(t, App):
        if not t.args:
            return 0
        return 1 + max(depth(a) for a in t.args)
    raise TypeError(f"not a term: {t!r}")


def enumerate_terms(
    sig: Signature,
    sort: Sort,
    max_depth: int,
    literal_pool: Sequence[int],
    extra_leaves: Mapping[Sort, Sequence[Term]] | None = None,
) -> list[Term]:
    """All closed well-sorted terms of ``sort`` with depth <= ``max_depth``.

    Deterministic order: depth-major, then symbol declaration order, then
    lexicographic in the children (by their position in the shallower
    enumeration). Literal leaves come from ``literal_pool`` in pool order.
    ``extra_leaves`` adds fixed leaf terms per sort after the literals;
    syntactic-class generators use it to include free variables.

    Terms of sort `Syn` include the quotations of every enumerable term
    (bodies ordered by sort declaration order, then their own order) and
    applications of Syn-valued symbols.
    """
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    extra_leaves = extra_leaves or {}

    # layers[s][d] = terms of sort s with depth exactly d
    layers: dict[Sort, list[list[Term]]] = {}
    body_sorts = [s for s in sig.all_sorts if s != SYN] + [SYN]

    def leaf_layer(s: Sort) -> list[Term]:
        out: list[Term] = []
        if sig.admits_literals(s):
            out.extend(Lit(v, s) for v in literal_pool)
        out.extend(extra_leaves.get(s, ()))
        for op in sig.ops:
            if op.arity == 0 and op.result == s:
                out.append(App(op.name, ()))
        return out

    for s in sig.all_sorts:
        layers[s] = [leaf_layer(s)]

    def upto(s: Sort, d: int) -> list[Term]:
        return [t for layer in layers[s][: d + 1] for t in layer]

    for d in range(1, max_depth + 1):
        new: dict[Sort, list[Term]] = {s: [] for s in sig.all_sorts}
        # Quotations: bodies of depth exactly d-1, across sorts in declaration order.
        for bs in body_sorts:
            if bs == SYN and len(layers[SYN]) < d:
                continue
            for body in layers[bs][d - 1]:
                new[SYN].append(Quote(body))
        for op in sig.ops:
            if op.arity == 0:
                continue
            pools = [upto(a, d - 1) for a in op.arg_sorts]
            if any(not p for p in pools):
                continue
            for combo in itertools.product(*pools):
                if max(depth(c) for c in combo) == d - 1:
                    new[op.result].append(App(op.name, combo))
        for s in sig.all_sorts:
            layers[s].append(new[s])

    return upto(sort, max_depth)


def iter_all_closed_terms(
    sig: Signature, max_depth: int, literal_pool: Sequence[int]
) -> Iterator[tuple[Sort, Term]]:
    """Closed terms of every non-Syn sort, tagged with their sort."""
    for s in sig.all_sorts:
        if s == SYN:
            continue
        for t in enumerate_terms(sig, s, max_depth, literal_pool):
            yield s, t


# --- formulas -------------------------------------------------------------------

@dataclass(frozen=True)
class Eq:
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Formula:
    """A closed universally-quantified equation or conditional equation.

    ``binders`` bind every free variable of the body; with hypotheses the
    formula reads: whenever all hypothesis equations hold, the conclusion
    does.
    """

    binders: tuple[tuple[str, Sort], ...]
    conclusion: Eq
    hypotheses: tuple[Eq, ...] = ()

    def equations(self) -> tuple[Eq, ...]:
        return self.hypotheses + (self.conclusion,)


def forall(binders: Sequence[tuple[str, Sort]], lhs: Term, rhs: Term,
           hypotheses: Sequence[tuple[Term, Term]] = ()) -> Formula:
    return Formula(
        binders=tuple(binders),
        conclusion=Eq(lhs, rhs),
        hypotheses=tuple(Eq(l, r) for l, r in hypotheses),
    )


def check_formula_wf(sig: Signature, f: Formula) -> None:
    """Validate sorts, closedness and binder coverage of a formula."""
    bound = {}
    for name, sort in f.binders:
        if name in bound:
            raise SortMismatch(f"duplicate binder {name!r}")
        if not sig.has_sort(sort):
            raise UnknownSort(f"binder {name!r} has undeclared sort {sort.name!r}")
        bound[name] = sort
    for eq in f.equations():
        ls = well_sorted(sig, eq.lhs)
        rs = well_sorted(sig, eq.rhs)
        if ls != rs:
            raise SortMismatch(f"equation sides have sorts {ls.name} and {rs.name}")
        for side in (eq.lhs, eq.rhs):
            for name, sort in free_vars(side).items():
                if name not in bound:
                    raise SortMismatch(f"unbound variable {name!r} in formula")
                if bound[name] != sort:
                    raise SortMismatch(f"binder {name!r} used at wrong sort")


def alpha_key(f: Formula):
    """A key identical for formulas equal up to bound-variable renaming."""
    renaming = {name: f"_b{i}" for i, (name, _) in enumerate(f.binders)}

    def walk(t: Term):
        if isinstance(t, Var):
            return ("v", renaming.get(t.name, t.name), t.sort.name)
        if isinstance(t, Lit):
            return ("l", t.value, t.sort.name)
        if isinstance(t, Quote):
            return ("q", walk(t.body))
        return ("a", t.symbol, tuple(walk(a) for a in t.args))

    return (
        tuple(s.name for _, s in f.binders),
        tuple((walk(eq.lhs), walk(eq.rhs)) for eq in f.equations()),
    )


def alpha_equal(f: Formula, g: Formula) -> bool:
    return alpha_key(f) == alpha_key(g)
