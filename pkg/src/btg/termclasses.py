"""Syntactic classes: decidable sets of terms.

A class plays two roles. As a predicate it gates transformer arguments;
as a generator it supplies the instances over which a meaning formula is
verified. Generation is deterministic for the exhaustive form and
seed-reproducible for the random form.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .errors import GeneratorEmpty, NotPolynomial, StrategyError
from .kernel import (
    App,
    Lit,
    Signature,
    Sort,
    Term,
    Var,
    enumerate_terms,
    free_vars,
    is_closed,
    well_sorted,
)
from .poly import DEFAULT_ROLES, term_to_poly


@dataclass(frozen=True)
class ClosedTerm:
    """All closed well-sorted terms of a sort."""

    sort: Sort

    def member(self, t: Term, sig: Signature) -> bool:
        try:
            return well_sorted(sig, t) == self.sort and is_closed(t)
        except Exception:
            return False

    def enumerate(self, sig: Signature, max_depth: int,
                  literal_pool: tuple[int, ...]) -> list[Term]:
        out = enumerate_terms(sig, self.sort, max_depth, literal_pool)
        return [t for t in out if is_closed(t)]

    def random_member(self, sig: Signature, rng: random.Random) -> Term:
        return _random_closed_term(sig, self.sort, rng)

    def describe(self) -> str:
        return f"(closed {self.sort.name})"


@dataclass(frozen=True)
class NumeralTerm:
    """Literal terms of a literal-admitting sort."""

    sort: Sort

    def member(self, t: Term, sig: Signature) -> bool:
        return isinstance(t, Lit) and t.sort == self.sort and sig.admits_literals(self.sort)

    def enumerate(self, sig: Signature, max_depth: int,
                  literal_pool: tuple[int, ...]) -> list[Term]:
        return [Lit(v, self.sort) for v in literal_pool]

    def random_member(self, sig: Signature, rng: random.Random) -> Term:
        return Lit(rng.randint(-(2 ** 16), 2 ** 16), self.sort)

    def describe(self) -> str:
        return f"(numeral {self.sort.name})"


@dataclass(frozen=True)
class PolyTerm:
    """Polynomial-shaped terms over a fixed variable set.

    Membership is structural: sums, products, negations, differences,
    literals, and the listed variables, nothing else. Terms may be open
    in exactly those variables.
    """

    sort: Sort
    variables: tuple[str, ...]

    def member(self, t: Term, sig: Signature) -> bool:
        try:
            if well_sorted(sig, t) != self.sort:
                return False
            term_to_poly(t, self.variables)
            return True
        except Exception:
            return False

    def enumerate(self, sig: Signature, max_depth: int,
                  literal_pool: tuple[int, ...]) -> list[Term]:
        leaves = [Var(v, self.sort) for v in self.variables]
        out = enumerate_terms(sig, self.sort, max_depth, literal_pool,
                              extra_leaves={self.sort: leaves})
        keep = []
        for t in out:
            try:
                term_to_poly(t, self.variables)
            except NotPolynomial:
                continue
            keep.append(t)
        return keep

    def random_member(self, sig: Signature, rng: random.Random) -> Term:
        return self.random_member_depth(sig, rng, 4)

    def random_member_depth(self, sig: Signature, rng: random.Random,
                            max_depth: int) -> Term:
        roles = {r: s for s, r in DEFAULT_ROLES.items()}

        def gen(depth: int) -> Term:
            if depth == 0 or rng.random() < 0.3:
                if self.variables and rng.random() < 0.6:
                    return Var(rng.choice(list(self.variables)), self.sort)
                return Lit(rng.randint(-9, 9), self.sort)
            arms = []
            if "add" in roles and sig.has_op(roles["add"]):
                arms.append(roles["add"])
            if "mul" in roles and sig.has_op(roles["mul"]):
                arms.append(roles["mul"])
            if "neg" in roles and sig.has_op(roles["neg"]):
                arms.append(roles["neg"])
            if not arms:
                return Lit(rng.randint(-9, 9), self.sort)
            op = rng.choice(arms)
            if sig.op(op).arity == 1:
                return App(op, (gen(depth - 1),))
            return App(op, (gen(depth - 1), gen(depth - 1)))

        return gen(max_depth)

    def describe(self) -> str:
        return f"(poly {self.sort.name} ({' '.join(self.variables)}))"


@dataclass(frozen=True)
class TermOfLanguage:
    """Closed terms of a single-sorted term-language theory."""

    theory: object  # duck-typed: needs .name and .signature

    def _sort(self) -> Sort:
        from .kernel import SYN

        sorts = [s for s in self.theory.signature.all_sorts if s != SYN]
        if len(sorts) != 1:
            raise StrategyError(
                f"theory {self.theory.name!r} is not single-sorted")
        return sorts[0]

    def member(self, t: Term, sig: Signature) -> bool:
        try:
            return (well_sorted(self.theory.signature, t) == self._sort()
                    and is_closed(t))
        except Exception:
            return False

    def enumerate(self, sig: Signature, max_depth: int,
                  literal_pool: tuple[int, ...]) -> list[Term]:
        out = enumerate_terms(self.theory.signature, self._sort(), max_depth,
                              literal_pool)
        return [t for t in out if is_closed(t)]

    def random_member(self, sig: Signature, rng: random.Random) -> Term:
        return _random_closed_term(self.theory.signature, self._sort(), rng)

    def describe(self) -> str:
        return f"(lang {self.theory.name})"


@dataclass(frozen=True)
class RuleDefined:
    """A named predicate, optionally refining a base class.

    Generation enumerates or samples the base and filters; without a
    base the class can only test membership.
    """

    name: str
    pred: Callable[[Term, Signature], bool]
    base: Optional[object] = None

    def member(self, t: Term, sig: Signature) -> bool:
        if self.base is not None and not self.base.member(t, sig):
            return False
        return self.pred(t, sig)

    def enumerate(self, sig: Signature, max_depth: int,
                  literal_pool: tuple[int, ...]) -> list[Term]:
        if self.base is None:
            raise GeneratorEmpty(f"class {self.name!r} has no generator")
        out = self.base.enumerate(sig, max_depth, literal_pool)
        return [t for t in out if self.pred(t, sig)]

    def random_member(self, sig: Signature, rng: random.Random) -> Term:
        if self.base is None:
            raise GeneratorEmpty(f"class {self.name!r} has no generator")
        for _ in range(10_000):
            t = self.base.random_member(sig, rng)
            if self.pred(t, sig):
                return t
        raise GeneratorEmpty(f"class {self.name!r} rejected 10000 draws")

    def describe(self) -> str:
        return f"(pred {self.name})"


SyntacticClass = object  # any of the above; duck-typed by member/enumerate


def class_member(cls, t: Term, sig: Signature) -> bool:
    return cls.member(t, sig)


#: Named predicates for RuleDefined classes built from surface syntax.
#: Each takes (term, signature) and answers membership.
CLASS_PREDICATES: dict[str, Callable[[Term, Signature], bool]] = {
    "nonzero": lambda t, sig: not (isinstance(t, Lit) and t.value == 0),
    "nonneg": lambda t, sig: not (isinstance(t, Lit) and t.value < 0),
    "ge2": lambda t, sig: isinstance(t, Lit) and t.value >= 2,
    "var": lambda t, sig: isinstance(t, Var),
}


def _random_closed_term(sig: Signature, sort: Sort, rng: random.Random,
                        max_depth: int = 4) -> Term:
    """A random closed term, built top-down with depth-bounded retries."""
    has_lit = sig.admits_literals(sort)
    constants = [op for op in sig.ops if not op.arg_sorts and op.result == sort]
    builders = [op for op in sig.ops if op.arg_sorts and op.result == sort
                and all(_reachable(sig, s) for s in op.arg_sorts)]

    def leaf() -> Term:
        choices = (1 if has_lit else 0) + len(constants)
        if not choices:
            raise GeneratorEmpty(f"no closed leaves at sort {sort.name!r}")
        i = rng.randrange(choices)
        if has_lit and i == 0:
            return Lit(rng.randint(-64, 64), sort)
        return App(constants[i - (1 if has_lit else 0)].name, ())

    def gen(s: Sort, depth: int) -> Term:
        if s != sort:
            # other sorts: recurse with the same machinery
            return _random_closed_term(sig, s, rng, depth)
        if depth == 0 or not builders or rng.random() < 0.35:
            return leaf()
        op = rng.choice(builders)
        return App(op.name, tuple(gen(a, depth - 1) for a in op.arg_sorts))

    return gen(sort, max_depth)


def _reachable(sig: Signature, sort: Sort) -> bool:
    """Whether any closed term exists at this sort (literal, constant, or
    constructor over reachable sorts), by fixpoint."""
    known: set[str] = set()
    for s in sig.all_sorts:
        if sig.admits_literals(s):
            known.add(s.name)
    changed = True
    while changed:
        changed = False
        for op in sig.ops:
            if op.result.name in known:
                continue
            if all(a.name in known for a in op.arg_sorts):
                known.add(op.result.name)
                changed = True
    return sort.name in known
