"""Meaning formulas: specifications for transformers, checked by testing.

A meaning formula quantifies variables over syntactic classes (never
over the object domain; these variables range over terms) and makes a
claim relating denotations of those terms and of transformer outputs.
Verification instantiates the variables from the classes' generators and
evaluates the claim case by case. A pass is evidence, not proof; a fail
carries a concrete witness, shrunk to a small enumerated instance when
one exists.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence, Union

from .errors import GeneratorEmpty, MeaningError, StrategyError
from .kernel import Term
from .poly import PolyValue
from .semantics import (
    CheckReport,
    CheckStrategy,
    ExhaustiveTerms,
    IntVal,
    RandomStrategy,
    Value,
    denote,
)
from .termclasses import SyntacticClass
from .transformers import apply_transformer

# --- expression layer -------------------------------------------------------------


@dataclass(frozen=True)
class SynVar:
    """A variable ranging over a syntactic class."""

    name: str


@dataclass(frozen=True)
class TransApp:
    """The result of running a transformer on term expressions."""

    transformer: str
    args: tuple = ()


@dataclass(frozen=True)
class Embed:
    """A fixed term spliced into a claim."""

    term: Term


TermExpr = Union[SynVar, TransApp, Embed]


@dataclass(frozen=True)
class Den:
    """The denotation of a term expression in a named model."""

    expr: TermExpr
    model: str


@dataclass(frozen=True)
class SemOp:
    """A semantic operator applied to denotations: an operation on
    values, not on syntax. ``params`` carries static data such as the
    variable of differentiation."""

    op: str
    args: tuple = ()
    params: tuple = ()


SemExpr = Union[Den, SemOp]


@dataclass(frozen=True)
class SemEq:
    lhs: SemExpr
    rhs: SemExpr


@dataclass(frozen=True)
class TermPred:
    """A named host predicate applied to term expressions; used for
    claims about the shape of an output rather than its denotation."""

    name: str
    args: tuple = ()


@dataclass(frozen=True)
class ClaimAnd:
    parts: tuple = ()


Claim = Union[SemEq, TermPred, ClaimAnd]


@dataclass(frozen=True)
class MeaningFormula:
    name: str
    transformer: str
    vars: tuple[tuple[str, SyntacticClass], ...]
    claim: Claim


# --- registries --------------------------------------------------------------------

HOST_PREDICATES: dict[str, Callable[[Sequence[Term]], bool]] = {}


def register_host_predicate(name: str, fn: Callable[[Sequence[Term]], bool]) -> None:
    HOST_PREDICATES[name] = fn


def _factorization_wellformed(terms: Sequence[Term]) -> bool:
    """The output contract of integer factorization: a unit of 1 or -1
    and strictly ascending prime entries with positive multiplicities."""
    from .errors import HostError
    from .transformers import read_factor_pair, trial_division

    (t,) = terms
    try:
        unit, factors = read_factor_pair(t)
    except HostError:
        return False
    if unit not in (1, -1):
        return False
    last = 1
    for p, m in factors:
        if p <= last or m < 1 or trial_division(p) != [(p, 1)]:
            return False
        last = p
    return True


register_host_predicate("builtin.factorization_wellformed",
                        _factorization_wellformed)


def _sem_deriv(params, vals):
    (var,) = params
    (v,) = vals
    if not isinstance(v, PolyValue):
        raise MeaningError(f"derivative needs a polynomial value, got {v}")
    return v.derivative(var)


def _sem_powmod(params, vals):
    b, e, m = vals
    if not all(isinstance(x, IntVal) for x in (b, e, m)):
        raise MeaningError("powmod needs integer values")
    if m.value < 2 or e.value < 0:
        raise MeaningError("powmod needs modulus >= 2 and exponent >= 0")
    return IntVal(pow(b.value, e.value, m.value))


def _sem_binop(fn):
    def go(params, vals):
        from .semantics import _add, _mul, _neg

        table = {"add": _add, "mul": _mul}
        if fn == "neg":
            return _neg(vals[0])
        return table[fn](vals[0], vals[1])

    return go


SEM_OPS: dict[str, Callable] = {
    "deriv": _sem_deriv,
    "powmod": _sem_powmod,
    "add": _sem_binop("add"),
    "mul": _sem_binop("mul"),
    "neg": _sem_binop("neg"),
}


# --- validation and evaluation ------------------------------------------------------


def _mentions(claim, name: str) -> bool:
    if isinstance(claim, (ClaimAnd,)):
        return any(_mentions(p, name) for p in claim.parts)
    if isinstance(claim, SemEq):
        return _sem_mentions(claim.lhs, name) or _sem_mentions(claim.rhs, name)
    if isinstance(claim, TermPred):
        return any(_texpr_mentions(a, name) for a in claim.args)
    return False


def _sem_mentions(e, name: str) -> bool:
    if isinstance(e, Den):
        return _texpr_mentions(e.expr, name)
    if isinstance(e, SemOp):
        return any(_sem_mentions(a, name) for a in e.args)
    return False


def _texpr_mentions(e, name: str) -> bool:
    if isinstance(e, TransApp):
        return e.transformer == name or any(_texpr_mentions(a, name) for a in e.args)
    return False


def check_meaning_wf(theory, mf: MeaningFormula) -> None:
    if all(t.name != mf.transformer for t in theory.transformers):
        raise MeaningError(
            f"meaning formula {mf.name!r} names missing transformer "
            f"{mf.transformer!r}")
    if not _mentions(mf.claim, mf.transformer):
        raise MeaningError(
            f"meaning formula {mf.name!r} never applies {mf.transformer!r}")


def _claim_models(claim) -> set[str]:
    out: set[str] = set()

    def sem(e):
        if isinstance(e, Den):
            out.add(e.model)
            texpr(e.expr)
        elif isinstance(e, SemOp):
            for a in e.args:
                sem(a)

    def texpr(e):
        if isinstance(e, TransApp):
            for a in e.args:
                texpr(a)

    def walk(c):
        if isinstance(c, ClaimAnd):
            for p in c.parts:
                walk(p)
        elif isinstance(c, SemEq):
            sem(c.lhs)
            sem(c.rhs)
        elif isinstance(c, TermPred):
            for a in c.args:
                texpr(a)

    walk(claim)
    return out


def eval_term_expr(theory, e: TermExpr, env: Mapping[str, Term]) -> Term:
    if isinstance(e, SynVar):
        if e.name not in env:
            raise MeaningError(f"unbound syntactic variable {e.name!r}")
        return env[e.name]
    if isinstance(e, Embed):
        return e.term
    if isinstance(e, TransApp):
        args = [eval_term_expr(theory, a, env) for a in e.args]
        return apply_transformer(theory, e.transformer, args)
    raise MeaningError(f"not a term expression: {e!r}")


def eval_sem_expr(theory, e: SemExpr, env: Mapping[str, Term]) -> Value:
    if isinstance(e, Den):
        model = theory.model(e.model)
        return denote(model, eval_term_expr(theory, e.expr, env))
    if isinstance(e, SemOp):
        fn = SEM_OPS.get(e.op)
        if fn is None:
            raise MeaningError(f"unknown semantic operator {e.op!r}")
        vals = [eval_sem_expr(theory, a, env) for a in e.args]
        return fn(e.params, vals)
    raise MeaningError(f"not a semantic expression: {e!r}")


def eval_claim(theory, claim: Claim, env: Mapping[str, Term]) -> bool:
    if isinstance(claim, ClaimAnd):
        return all(eval_claim(theory, p, env) for p in claim.parts)
    if isinstance(claim, SemEq):
        return eval_sem_expr(theory, claim.lhs, env) == eval_sem_expr(theory, claim.rhs, env)
    if isinstance(claim, TermPred):
        fn = HOST_PREDICATES.get(claim.name)
        if fn is None:
            raise MeaningError(f"unknown host predicate {claim.name!r}")
        terms = [eval_term_expr(theory, a, env) for a in claim.args]
        return fn(terms)
    raise MeaningError(f"not a claim: {claim!r}")


# --- verification -------------------------------------------------------------------


@dataclass(frozen=True)
class VerificationReport:
    """One verified item: an axiom against a model, or a meaning formula."""

    kind: str  # "axiom" | "meaning"
    name: str
    report: CheckReport
    model: str = ""
    transformer: str = ""
    provenance: str = ""  # body kind of the transformer under test

    def describe(self) -> dict:
        d = {"kind": self.kind, "name": self.name, **self.report.describe()}
        if self.model:
            d["model"] = self.model
        if self.transformer:
            d["transformer"] = self.transformer
        if self.provenance:
            d["provenance"] = self.provenance
        return d


def _case_env(names: Sequence[str], terms: Sequence[Term]) -> dict[str, Term]:
    return {n: t for n, t in zip(names, terms)}


def _print_case(names, terms) -> tuple[tuple[str, str], ...]:
    from .textfmt import print_term

    return tuple((n, print_term(t)) for n, t in zip(names, terms))


def verify_meaning(theory, mf: MeaningFormula,
                   strategy: CheckStrategy) -> VerificationReport:
    """Check a meaning formula by instantiating its variables from their
    classes under the given strategy. Exhaustive strategies take the
    cross product of enumerations; the random strategy draws each
    variable per case from one shared seeded stream."""
    check_meaning_wf(theory, mf)
    tr = next(t for t in theory.transformers if t.name == mf.transformer)
    desc = strategy.describe()
    names = [n for n, _ in mf.vars]
    classes = [c for _, c in mf.vars]

    missing = [m for m in sorted(_claim_models(mf.claim))
               if not theory.has_model(m)]
    if missing:
        return VerificationReport(
            "meaning", mf.name,
            CheckReport("indeterminate", 0, desc,
                        note=f"no designated model named {missing[0]!r}"),
            transformer=mf.transformer, provenance=tr.kind)

    def run_case(terms: Sequence[Term]) -> bool:
        return eval_claim(theory, mf.claim, _case_env(names, terms))

    if isinstance(strategy, ExhaustiveTerms):
        try:
            pools = [c.enumerate(theory.signature, strategy.max_depth,
                                 strategy.literal_pool) for c in classes]
        except GeneratorEmpty as e:
            return VerificationReport(
                "meaning", mf.name,
                CheckReport("indeterminate", 0, desc, note=f"generator empty: {e}"),
                transformer=mf.transformer, provenance=tr.kind)
        if any(not p for p in pools):
            return VerificationReport(
                "meaning", mf.name,
                CheckReport("indeterminate", 0, desc,
                            note="generator produced no members"),
                transformer=mf.transformer, provenance=tr.kind)
        run = 0
        for combo in _product(pools):
            run += 1
            if not run_case(combo):
                small = _shrink(theory, mf, names, classes, strategy)
                case = small if small else _print_case(names, combo)
                return VerificationReport(
                    "meaning", mf.name,
                    CheckReport("fail", run, desc, counterexample=case),
                    transformer=mf.transformer, provenance=tr.kind)
        return VerificationReport(
            "meaning", mf.name, CheckReport("pass", run, desc),
            transformer=mf.transformer, provenance=tr.kind)

    if isinstance(strategy, RandomStrategy):
        rng = random.Random(strategy.seed)
        for i in range(strategy.samples):
            try:
                combo = [c.random_member(theory.signature, rng) for c in classes]
            except GeneratorEmpty as e:
                return VerificationReport(
                    "meaning", mf.name,
                    CheckReport("indeterminate", i, desc,
                                note=f"generator empty: {e}"),
                    transformer=mf.transformer, provenance=tr.kind)
            if not run_case(combo):
                small = _shrink(theory, mf, names, classes, strategy)
                case = small if small else _print_case(names, combo)
                return VerificationReport(
                    "meaning", mf.name,
                    CheckReport("fail", i + 1, desc, counterexample=case),
                    transformer=mf.transformer, provenance=tr.kind)
        return VerificationReport(
            "meaning", mf.name,
            CheckReport("pass", strategy.samples, desc),
            transformer=mf.transformer, provenance=tr.kind)

    raise StrategyError(
        f"meaning formulas need a term-producing strategy, not {desc['kind']}")


def _product(pools):
    import itertools

    return itertools.product(*pools)


def _shrink(theory, mf, names, classes, strategy,
            max_depth: int = 3, cap: int = 50_000) -> tuple:
    """Search enumerated members depth-first for a small failing case.
    Deterministic: the first failure in enumeration order wins."""
    pool = strategy.literal_pool if isinstance(strategy, ExhaustiveTerms) else (0, 1, 2)
    for depth in range(1, max_depth + 1):
        try:
            pools = [c.enumerate(theory.signature, depth, pool) for c in classes]
        except GeneratorEmpty:
            return ()
        total = 1
        for p in pools:
            total *= max(len(p), 1)
        if total > cap:
            return ()
        if any(not p for p in pools):
            continue
        for combo in _product(pools):
            try:
                ok = eval_claim(theory, mf.claim, _case_env(names, combo))
            except Exception:
                continue
            if not ok:
                return _print_case(names, combo)
    return ()


def verify_all(theory, strategy: CheckStrategy,
               axiom_strategy: Optional[CheckStrategy] = None) -> list[VerificationReport]:
    """Verify everything a theory claims: each axiom against each
    designated model, then each meaning formula. Axioms may use their
    own strategy (finite carriers invite exhaustion); a theory with no
    models yields indeterminate axiom entries rather than silence."""
    from .semantics import check_formula

    out: list[VerificationReport] = []
    ax_strategy = axiom_strategy or strategy
    for i, ax in enumerate(theory.axioms):
        name = f"axiom {i}"
        if not theory.models:
            out.append(VerificationReport(
                "axiom", name,
                CheckReport("indeterminate", 0, ax_strategy.describe(),
                            note="no designated models")))
            continue
        for model in theory.models:
            try:
                rep = check_formula(model, ax, ax_strategy)
            except Exception as e:
                rep = CheckReport("indeterminate", 0, ax_strategy.describe(),
                                  note=f"{type(e).__name__}: {e}")
            out.append(VerificationReport("axiom", name, rep, model=model.name))
    for mf in theory.meaning_formulas:
        out.append(verify_meaning(theory, mf, strategy))
    return out
