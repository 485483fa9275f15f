"""Models and evidence-producing checks.

A model assigns a semantic domain to some of a signature's sorts and an
interpretation to some of its symbols. Checking a universally quantified
equation against a model produces a report, never a proof: pass means
every tested instantiation held, fail carries a replayable
counterexample, indeterminate means nothing could be tested.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Union

from .errors import (
    BadModulus,
    DegreeTooHigh,
    InfiniteCarrier,
    ModelError,
    StrategyError,
    UnboundVariable,
    UninterpretedSymbol,
)
from .kernel import (
    App,
    Formula,
    Lit,
    Quote,
    SYN,
    Signature,
    Sort,
    Term,
    Var,
    enumerate_terms,
    is_closed,
)
from .poly import PolyValue, term_to_poly

# --- values ---------------------------------------------------------------------


@dataclass(frozen=True)
class IntVal:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Residue:
    value: int
    modulus: int

    def __post_init__(self):
        if not (0 <= self.value < self.modulus):
            raise ValueError(f"residue {self.value} out of range mod {self.modulus}")

    def __str__(self):
        return f"{self.value} (mod {self.modulus})"


@dataclass(frozen=True)
class SynVal:
    """A piece of syntax as a semantic value; quotations denote these."""

    term: Term

    def __str__(self):
        from .textfmt import print_term

        return f"<syntax {print_term(self.term)}>"


Value = Union[IntVal, Residue, PolyValue, SynVal]

# --- domains --------------------------------------------------------------------


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class IntDomain:
    def __str__(self):
        return "int"


@dataclass(frozen=True)
class ZpDomain:
    p: int

    def __post_init__(self):
        if not _is_prime(self.p):
            raise BadModulus(f"{self.p} is not prime")

    def __str__(self):
        return f"zp {self.p}"


@dataclass(frozen=True)
class PolyDomain:
    variables: tuple[str, ...]

    def __str__(self):
        return "poly " + " ".join(self.variables)


@dataclass(frozen=True)
class SynDomain:
    def __str__(self):
        return "syn"


Domain = Union[IntDomain, ZpDomain, PolyDomain, SynDomain]


def inject_literal(dom: Domain, v: int) -> Value:
    if isinstance(dom, IntDomain):
        return IntVal(v)
    if isinstance(dom, ZpDomain):
        return Residue(v % dom.p, dom.p)
    if isinstance(dom, PolyDomain):
        return PolyValue.const(v)
    raise ModelError(f"cannot inject a literal into {dom}")


def domain_elements(dom: Domain) -> list[Value]:
    """Every element of a finite carrier, in a fixed order."""
    if isinstance(dom, ZpDomain):
        return [Residue(i, dom.p) for i in range(dom.p)]
    raise InfiniteCarrier(f"carrier {dom} cannot be enumerated")


def sample_value(dom: Domain, rng: random.Random) -> Value:
    if isinstance(dom, IntDomain):
        return IntVal(rng.randint(-(2 ** 16), 2 ** 16))
    if isinstance(dom, ZpDomain):
        return Residue(rng.randrange(dom.p), dom.p)
    if isinstance(dom, PolyDomain):
        coeffs = {}
        for _ in range(rng.randint(1, 4)):
            mono = []
            for v in dom.variables:
                e = rng.randint(0, 2)
                if e:
                    mono.append((v, e))
            c = rng.randint(-9, 9)
            key = tuple(sorted(mono))
            coeffs[key] = coeffs.get(key, 0) + c
        return PolyValue.from_dict(coeffs)
    raise StrategyError(f"cannot sample from carrier {dom}")


# --- interpretations ------------------------------------------------------------


@dataclass(frozen=True)
class Interp:
    """A printable interpretation descriptor.

    ``op`` is one of: add, mul, neg, sub, identity, const (params carry
    the constant). Descriptors keep models serializable; host callables
    are accepted in their place for ad hoc models in tests.
    """

    op: str
    params: tuple = ()

    def __str__(self):
        if self.op == "const":
            return f"(const {self.params[0]})"
        return self.op


InterpLike = Union[Interp, Callable[..., Value]]


def _add(a: Value, b: Value) -> Value:
    if isinstance(a, IntVal) and isinstance(b, IntVal):
        return IntVal(a.value + b.value)
    if isinstance(a, Residue) and isinstance(b, Residue) and a.modulus == b.modulus:
        return Residue((a.value + b.value) % a.modulus, a.modulus)
    if isinstance(a, PolyValue) and isinstance(b, PolyValue):
        return a.add(b)
    raise ModelError(f"cannot add {a} and {b}")


def _mul(a: Value, b: Value) -> Value:
    if isinstance(a, IntVal) and isinstance(b, IntVal):
        return IntVal(a.value * b.value)
    if isinstance(a, Residue) and isinstance(b, Residue) and a.modulus == b.modulus:
        return Residue((a.value * b.value) % a.modulus, a.modulus)
    if isinstance(a, PolyValue) and isinstance(b, PolyValue):
        return a.mul(b)
    raise ModelError(f"cannot multiply {a} and {b}")


def _neg(a: Value) -> Value:
    if isinstance(a, IntVal):
        return IntVal(-a.value)
    if isinstance(a, Residue):
        return Residue((-a.value) % a.modulus, a.modulus)
    if isinstance(a, PolyValue):
        return a.neg()
    raise ModelError(f"cannot negate {a}")


def _sub(a: Value, b: Value) -> Value:
    return _add(a, _neg(b))


class Model:
    """A semantic model over a signature.

    Carriers may be partial: a symbol needs an interpretation only if it
    is applied during a check, and denotation of a symbol without one
    raises. Free variables of polynomial-carried sorts denote themselves
    as indeterminates, so open terms can be checked pointwise against
    polynomial identities.
    """

    def __init__(self, name: str, sig: Signature,
                 carriers: Mapping[str, Domain],
                 interps: Mapping[str, InterpLike]):
        for s in carriers:
            if s == SYN.name:
                raise ModelError("the syntax sort has a fixed carrier")
            if not any(s == declared.name for declared in sig.sorts):
                raise ModelError(f"carrier for undeclared sort {s!r}")
        for f in interps:
            if not sig.has_op(f):
                raise ModelError(f"interpretation for undeclared symbol {f!r}")
        self.name = name
        self.sig = sig
        self.carriers = dict(carriers)
        self.interps = dict(interps)

    def __eq__(self, other):
        return (isinstance(other, Model) and self.name == other.name
                and self.sig == other.sig and self.carriers == other.carriers
                and self.interps == other.interps)

    def __repr__(self):
        return f"Model({self.name!r})"

    def carrier(self, sort: Sort) -> Domain:
        if sort == SYN:
            return SynDomain()
        dom = self.carriers.get(sort.name)
        if dom is None:
            raise ModelError(f"model {self.name!r} does not carry sort {sort.name!r}")
        return dom

    def carries(self, sort: Sort) -> bool:
        return sort == SYN or sort.name in self.carriers

    def with_signature(self, sig: Signature) -> "Model":
        return Model(self.name, sig, self.carriers, self.interps)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "carriers": {s: str(d) for s, d in sorted(self.carriers.items())},
            "interps": {f: str(i) if isinstance(i, Interp) else "<host>"
                        for f, i in sorted(self.interps.items())},
        }


def apply_interp(model: Model, symbol: str, vals: list[Value]) -> Value:
    interp = model.interps.get(symbol)
    if interp is None:
        raise UninterpretedSymbol(f"model {model.name!r} gives no meaning to {symbol!r}")
    if callable(interp) and not isinstance(interp, Interp):
        return interp(*vals)
    if interp.op == "add":
        return _add(vals[0], vals[1])
    if interp.op == "mul":
        return _mul(vals[0], vals[1])
    if interp.op == "neg":
        return _neg(vals[0])
    if interp.op == "sub":
        return _sub(vals[0], vals[1])
    if interp.op == "identity":
        return vals[0]
    if interp.op == "const":
        decl = model.sig.op(symbol)
        return inject_literal(model.carrier(decl.result), interp.params[0])
    raise ModelError(f"unknown interpretation {interp.op!r} for {symbol!r}")


def denote(model: Model, t: Term, env: Optional[Mapping[str, Value]] = None) -> Value:
    env = env or {}
    if isinstance(t, Var):
        if t.name in env:
            return env[t.name]
        dom = model.carrier(t.sort)
        if isinstance(dom, PolyDomain) and t.name in dom.variables:
            return PolyValue.variable(t.name)
        raise UnboundVariable(f"variable {t.name!r} has no value")
    if isinstance(t, Lit):
        return inject_literal(model.carrier(t.sort), t.value)
    if isinstance(t, Quote):
        return SynVal(t.body)
    if isinstance(t, App):
        vals = [denote(model, a, env) for a in t.args]
        return apply_interp(model, t.symbol, vals)
    raise ModelError(f"not a term: {t!r}")


# --- checking strategies --------------------------------------------------------


@dataclass(frozen=True)
class ExhaustiveDomain:
    """Every tuple of carrier elements; requires finite carriers."""

    def describe(self) -> dict:
        return {"kind": "exhaustive-domain"}


@dataclass(frozen=True)
class ExhaustiveTerms:
    """Every closed term up to a depth, denoted and substituted."""

    max_depth: int
    literal_pool: tuple[int, ...] = (0, 1, 2)

    def describe(self) -> dict:
        return {"kind": "exhaustive-terms", "max_depth": self.max_depth,
                "literal_pool": list(self.literal_pool)}


@dataclass(frozen=True)
class RandomStrategy:
    """Seeded random instantiations; integer draws land in [-2^16, 2^16]."""

    samples: int
    seed: int

    def describe(self) -> dict:
        return {"kind": "random", "samples": self.samples, "seed": self.seed}


CheckStrategy = Union[ExhaustiveDomain, ExhaustiveTerms, RandomStrategy]


@dataclass(frozen=True)
class CheckReport:
    """Outcome of checking one formula against one model.

    ``counterexample`` pairs each binder with a printable rendering of
    the offending value or term, in binder order, so a failure can be
    replayed independently of this run.
    """

    status: str  # "pass" | "fail" | "indeterminate"
    cases_run: int
    strategy: dict = field(default_factory=dict)
    counterexample: tuple[tuple[str, str], ...] = ()
    note: str = ""

    def describe(self) -> dict:
        d = {"status": self.status, "cases_run": self.cases_run,
             "strategy": dict(self.strategy)}
        if self.counterexample:
            d["counterexample"] = [[n, v] for n, v in self.counterexample]
        if self.note:
            d["note"] = self.note
        return d


def _holds(model: Model, f: Formula, env: Mapping[str, Value]) -> bool:
    for eq in f.hypotheses:
        if denote(model, eq.lhs, env) != denote(model, eq.rhs, env):
            return True  # hypothesis fails, instance holds vacuously
    return denote(model, f.conclusion.lhs, env) == denote(model, f.conclusion.rhs, env)


def _value_case(binders, values) -> tuple[tuple[str, str], ...]:
    return tuple((n, str(v)) for (n, _), v in zip(binders, values))


def check_formula(model: Model, f: Formula, strategy: CheckStrategy) -> CheckReport:
    """Model-check a universally quantified equation.

    Deterministic: the same model, formula, and strategy (seed included)
    always yield the same report, byte for byte.
    """
    binders = f.binders
    desc = strategy.describe()

    if not binders:
        ok = _holds(model, f, {})
        if ok:
            return CheckReport("pass", 1, desc)
        return CheckReport("fail", 1, desc, counterexample=())

    if isinstance(strategy, ExhaustiveDomain):
        pools = [domain_elements(model.carrier(s)) for _, s in binders]
        total = 1
        for p in pools:
            total *= len(p)
        run = 0
        indices = [0] * len(pools)
        while True:
            values = [pools[i][indices[i]] for i in range(len(pools))]
            env = {n: v for (n, _), v in zip(binders, values)}
            run += 1
            if not _holds(model, f, env):
                return CheckReport("fail", run, desc,
                                   counterexample=_value_case(binders, values))
            # odometer increment, last binder fastest
            i = len(pools) - 1
            while i >= 0:
                indices[i] += 1
                if indices[i] < len(pools[i]):
                    break
                indices[i] = 0
                i -= 1
            if i < 0:
                break
        return CheckReport("pass", total, desc)

    if isinstance(strategy, ExhaustiveTerms):
        from .textfmt import print_term

        pools_t: list[list[Term]] = []
        for _, s in binders:
            terms = enumerate_terms(model.sig, s, strategy.max_depth,
                                    strategy.literal_pool)
            pools_t.append([t for t in terms if is_closed(t)])
        if any(not p for p in pools_t):
            return CheckReport("indeterminate", 0, desc,
                               note="no closed terms for some binder sort")
        run = 0
        indices = [0] * len(pools_t)
        while True:
            terms = [pools_t[i][indices[i]] for i in range(len(pools_t))]
            env = {n: denote(model, t) for (n, _), t in zip(binders, terms)}
            run += 1
            if not _holds(model, f, env):
                case = tuple((n, print_term(t)) for (n, _), t in zip(binders, terms))
                return CheckReport("fail", run, desc, counterexample=case)
            i = len(pools_t) - 1
            while i >= 0:
                indices[i] += 1
                if indices[i] < len(pools_t[i]):
                    break
                indices[i] = 0
                i -= 1
            if i < 0:
                break
        return CheckReport("pass", run, desc)

    if isinstance(strategy, RandomStrategy):
        rng = random.Random(strategy.seed)
        for i in range(strategy.samples):
            values = [sample_value(model.carrier(s), rng) for _, s in binders]
            env = {n: v for (n, _), v in zip(binders, values)}
            if not _holds(model, f, env):
                return CheckReport("fail", i + 1, desc,
                                   counterexample=_value_case(binders, values))
        return CheckReport("pass", strategy.samples, desc)

    raise StrategyError(f"unknown strategy {strategy!r}")


# --- polynomial identity over Z_p ------------------------------------------------


def poly_equal_on_zp(sig: Signature, t1: Term, t2: Term,
                     variables: tuple[str, ...], p: int) -> bool:
    """Decide whether two polynomial-shaped terms agree on all of Z_p.

    Sound and complete while every per-variable degree stays below p:
    distinct reduced coefficient maps mod p then disagree at some point
    of the full grid, and equal maps agree everywhere. Beyond that bound
    (where x^p collapses onto x) the question is refused rather than
    answered wrongly.
    """
    if not _is_prime(p):
        raise BadModulus(f"{p} is not prime")
    p1 = term_to_poly(t1, variables)
    p2 = term_to_poly(t2, variables)
    for q in (p1, p2):
        for v in q.variables():
            if q.degree(v) >= p:
                raise DegreeTooHigh(
                    f"degree of {v!r} reaches {q.degree(v)}, not below p={p}")
    return p1.reduce_mod(p) == p2.reduce_mod(p)
