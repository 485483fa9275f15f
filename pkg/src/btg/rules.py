"""A small first-order rewrite engine.

Rules are data, so rule-based transformers can travel along morphisms:
both sides are ordinary terms over the signature, pattern variables are
declared per rule, and anything not declared matches only itself.
Rewriting is innermost-leftmost with rules tried in declaration order,
and every step burns one unit of fuel.

Two escape hatches keep the rule language expressive enough for
algorithms over numerals without growing the object language:

* guards restrict a pattern variable to literals satisfying a fixed
  named predicate (even, odd, pos, neg, nonzero, ge2);
* engine primitives (#add1, #sub1, #half, #double, #neg, #add, #sub,
  #mul) may appear on right-hand sides and reduce eagerly once all their
  arguments are literals.

A pattern variable listed as literal-only binds only literals and may
reappear on the right-hand side at a different literal-admitting sort;
the bound value crosses over. That is how an evaluator folds numerals of
one language into numerals of another.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

from .errors import BadRule, FuelExhausted
from .kernel import (
    App,
    ENGINE_PREFIX,
    Lit,
    Quote,
    Signature,
    Sort,
    Term,
    Var,
    engine_op_arity,
    eval_engine_op,
    free_vars,
    well_sorted,
)

GUARDS: dict[str, Callable[[int], bool]] = {
    "even": lambda v: v % 2 == 0,
    "odd": lambda v: v % 2 == 1,
    "pos": lambda v: v > 0,
    "neg": lambda v: v < 0,
    "nonzero": lambda v: v != 0,
    "ge2": lambda v: v >= 2,
}

DEFAULT_FUEL = 10_000


@dataclass(frozen=True)
class Rule:
    """One oriented equation. ``vars`` declares the pattern variables
    with their sorts; ``lit_vars`` restricts some of them to literals;
    ``guards`` pairs a literal-only variable with a predicate name."""

    vars: tuple[tuple[str, Sort], ...]
    lhs: Term
    rhs: Term
    lit_vars: frozenset = frozenset()
    guards: tuple[tuple[str, str], ...] = ()

    def var_sorts(self) -> dict[str, Sort]:
        return dict(self.vars)


def validate_rule(sig: Signature, rule: Rule) -> None:
    if isinstance(rule.lhs, Var):
        raise BadRule("left-hand side is a bare variable")
    declared = rule.var_sorts()
    lhs_vars = free_vars(rule.lhs)
    for name in lhs_vars:
        if name in declared and lhs_vars[name] != declared[name]:
            raise BadRule(f"pattern variable {name!r} used at the wrong sort")
    rhs_vars = _rhs_free_vars(rule.rhs)
    for name, sorts in rhs_vars.items():
        if name not in lhs_vars:
            raise BadRule(f"right-hand variable {name!r} does not occur on the left")
        for s in sorts:
            if s != lhs_vars[name]:
                if name not in rule.lit_vars:
                    raise BadRule(
                        f"variable {name!r} changes sort on the right but is "
                        f"not literal-only")
                if not sig.admits_literals(s):
                    raise BadRule(
                        f"variable {name!r} crosses to sort {s.name!r}, which "
                        f"admits no literals")
    for v, g in rule.guards:
        if g not in GUARDS:
            raise BadRule(f"unknown guard {g!r}")
        if v not in rule.lit_vars:
            raise BadRule(f"guarded variable {v!r} must be literal-only")
    for v in rule.lit_vars:
        if v not in declared:
            raise BadRule(f"literal-only variable {v!r} is not declared")
        if not sig.admits_literals(declared[v]):
            raise BadRule(f"literal-only variable {v!r} has a literal-free sort")
    well_sorted(sig, rule.lhs, allow_engine_ops=True)
    _check_rhs_sorts(sig, rule)


def _rhs_free_vars(t: Term) -> dict[str, set]:
    out: dict[str, set] = {}

    def walk(u: Term):
        if isinstance(u, Var):
            out.setdefault(u.name, set()).add(u.sort)
        elif isinstance(u, App):
            for a in u.args:
                walk(a)
        elif isinstance(u, Quote):
            walk(u.body)

    walk(t)
    return out


def _check_rhs_sorts(sig: Signature, rule: Rule) -> None:
    """Right-hand sides sort-check like ordinary terms, except that
    literal-only variables may stand at any literal-admitting sort."""
    try:
        rhs_sort = well_sorted(sig, rule.rhs, allow_engine_ops=True)
        lhs_sort = well_sorted(sig, rule.lhs, allow_engine_ops=True)
        if rhs_sort != lhs_sort:
            raise BadRule(
                f"sides disagree: {lhs_sort.name} versus {rhs_sort.name}")
    except BadRule:
        raise
    except Exception as e:
        # cross-sort literal variables make the plain check fail; redo it
        # with those variables treated as wildcards of their local sort
        if not rule.lit_vars:
            raise BadRule(str(e)) from e
        masked = _mask_lit_vars(rule.rhs, rule.lit_vars)
        rhs_sort = well_sorted(sig, masked, allow_engine_ops=True)
        lhs_sort = well_sorted(sig, rule.lhs, allow_engine_ops=True)
        if rhs_sort != lhs_sort:
            raise BadRule(
                f"sides disagree: {lhs_sort.name} versus {rhs_sort.name}") from e


def _mask_lit_vars(t: Term, lit_vars) -> Term:
    if isinstance(t, Var) and t.name in lit_vars:
        return Lit(0, t.sort)
    if isinstance(t, App):
        return App(t.symbol, tuple(_mask_lit_vars(a, lit_vars) for a in t.args))
    if isinstance(t, Quote):
        return Quote(_mask_lit_vars(t.body, lit_vars))
    return t


# --- matching and instantiation ---------------------------------------------------

Binding = dict[str, Term]


def match(pattern: Term, subject: Term, rule: Rule) -> Optional[Binding]:
    """Structural first-order matching. Declared variables bind (the
    same variable twice requires equal subterms); undeclared variables
    and literals match only themselves."""
    declared = rule.var_sorts()
    binding: Binding = {}

    def go(p: Term, s: Term) -> bool:
        if isinstance(p, Var) and p.name in declared:
            if p.name in rule.lit_vars and not isinstance(s, Lit):
                return False
            if p.name in binding:
                return binding[p.name] == s
            binding[p.name] = s
            return True
        if isinstance(p, Var):
            return p == s
        if isinstance(p, Lit):
            return p == s
        if isinstance(p, App):
            return (isinstance(s, App) and s.symbol == p.symbol
                    and len(s.args) == len(p.args)
                    and all(go(a, b) for a, b in zip(p.args, s.args)))
        if isinstance(p, Quote):
            return isinstance(s, Quote) and go(p.body, s.body)
        return False

    if not go(pattern, subject):
        return None
    for v, g in rule.guards:
        bound = binding.get(v)
        if not isinstance(bound, Lit) or not GUARDS[g](bound.value):
            return None
    return binding


def instantiate(rhs: Term, binding: Binding, lit_vars) -> Term:
    """Substitute a match into the right-hand side. A literal-only
    variable standing at a foreign sort re-sorts the literal it carries."""

    def go(t: Term) -> Term:
        if isinstance(t, Var):
            if t.name not in binding:
                return t
            bound = binding[t.name]
            if (t.name in lit_vars and isinstance(bound, Lit)
                    and bound.sort != t.sort):
                return Lit(bound.value, t.sort)
            return bound
        if isinstance(t, App):
            return App(t.symbol, tuple(go(a) for a in t.args))
        if isinstance(t, Quote):
            return Quote(go(t.body))
        return t

    return go(rhs)


# --- normalization -----------------------------------------------------------------


class _Fuel:
    def __init__(self, amount: int):
        self.left = amount

    def burn(self):
        self.left -= 1
        if self.left < 0:
            raise FuelExhausted("rewrite step budget exhausted")


def rewrite_step(rules: tuple[Rule, ...], t: Term, fuel: _Fuel) -> Optional[Term]:
    """One innermost-leftmost step, or None at a normal form. Children
    are tried before their parent, left to right; at a node the first
    matching rule in declaration order fires. Engine primitives with
    all-literal arguments reduce before user rules. Quotation bodies are
    data and are not rewritten."""
    if isinstance(t, App):
        for i, a in enumerate(t.args):
            r = rewrite_step(rules, a, fuel)
            if r is not None:
                return App(t.symbol, t.args[:i] + (r,) + t.args[i + 1:])
        if t.symbol.startswith(ENGINE_PREFIX):
            if all(isinstance(a, Lit) for a in t.args):
                fuel.burn()
                return eval_engine_op(t.symbol, t.args)
            return None
    for rule in rules:
        b = match(rule.lhs, t, rule)
        if b is not None:
            fuel.burn()
            return instantiate(rule.rhs, b, rule.lit_vars)
    return None


def normal_form(rules: tuple[Rule, ...], t: Term,
                fuel: int = DEFAULT_FUEL) -> Term:
    tank = _Fuel(fuel)
    while True:
        r = rewrite_step(rules, t, tank)
        if r is None:
            return t
        t = r
