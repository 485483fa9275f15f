"""Transformers: algorithms from syntax to syntax.

A transformer takes terms to a term. Its body is one of three kinds:

* ``Opaque`` names a host function from a process-wide registry; such a
  transformer runs here but cannot travel along a morphism.
* ``Rules`` is a rewrite system, pure data, and transportable.
* a generic template (built elsewhere) that must be specialized before
  it can run at all.

Arguments are gated by syntactic classes, and outputs are checked
against the signature, so a transformer either returns a well-sorted
term of its result sort or raises.

Rule-based transformers follow one of two shapes. If some rule's
left-hand head is the transformer's own name, application wraps the
arguments in that head and normalizes (a recursive fold, like an
evaluator); the head symbol is typed at the transformer's object-level
sorts for rule purposes, while the signature registers the transformer
under the same name as a syntax-level symbol. Otherwise the transformer
must be unary and its rules rewrite the argument directly (a
simplifier).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

from .errors import (
    BadModulus,
    ClassViolation,
    HostError,
    NegativeExponent,
    NotAQuotation,
    TransformerError,
    UnknownTransformer,
    ZeroInput,
)
from .kernel import (
    App,
    ENGINE_PREFIX,
    Lit,
    OpDecl,
    Quote,
    SYN,
    Signature,
    Sort,
    Term,
    Var,
    well_sorted,
)
from .poly import DEFAULT_ROLES, poly_to_term, term_to_poly
from .rules import DEFAULT_FUEL, Rule, normal_form, validate_rule


@dataclass(frozen=True)
class Opaque:
    """A host-function body. ``config`` is a frozen key/value list made
    available to the function; it keeps registrations printable."""

    host_id: str
    config: tuple[tuple[str, object], ...] = ()

    def config_dict(self) -> dict:
        return dict(self.config)


@dataclass(frozen=True)
class Rules:
    rules: tuple[Rule, ...]
    fuel: int = DEFAULT_FUEL


@dataclass(frozen=True)
class Transformer:
    """A named n-ary transformer with object-level typing.

    ``arg_sorts``/``result_sort`` give the sorts of the terms consumed
    and produced; ``arg_classes`` refine each argument position to a
    syntactic class. ``body`` is an Opaque, a Rules, or a generic
    template object exposing ``template_rules``.
    """

    name: str
    arg_sorts: tuple[Sort, ...]
    result_sort: Sort
    arg_classes: tuple = ()
    body: object = None

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)

    @property
    def kind(self) -> str:
        if isinstance(self.body, Opaque):
            return "opaque"
        if isinstance(self.body, Rules):
            return "rules"
        return "generic"

    def syn_decl(self) -> OpDecl:
        return OpDecl(self.name, (SYN,) * self.arity, SYN)


# --- host registry ------------------------------------------------------------------

HostFn = Callable[[Signature, Sequence[Term], dict], Term]

HOST_FUNCTIONS: dict[str, HostFn] = {}


def register_host_function(host_id: str, fn: HostFn) -> None:
    HOST_FUNCTIONS[host_id] = fn


def _rule_signature(sig: Signature, tr: Transformer) -> Signature:
    """The signature rules are checked and run against: the
    transformer's syntax-level symbol is swapped for its object-level
    declaration so recursive heads sort-check."""
    decl = OpDecl(tr.name, tr.arg_sorts, tr.result_sort)
    ops = tuple(decl if op.name == tr.name else op for op in sig.ops)
    if all(op.name != tr.name for op in sig.ops):
        ops = ops + (decl,)
    return Signature(sig.sorts, ops, sig.literal_sorts)


def validate_transformer(sig: Signature, tr: Transformer) -> None:
    if isinstance(tr.body, Rules):
        rsig = _rule_signature(sig, tr)
        for rule in tr.body.rules:
            validate_rule(rsig, rule)
        if not _is_fold(tr) and tr.arity != 1:
            raise TransformerError(
                f"transformer {tr.name!r} rewrites its argument in place "
                f"and must be unary")
    if tr.arg_classes and len(tr.arg_classes) != tr.arity:
        raise TransformerError(
            f"transformer {tr.name!r} declares {len(tr.arg_classes)} classes "
            f"for {tr.arity} arguments")


def _is_fold(tr: Transformer) -> bool:
    return isinstance(tr.body, Rules) and any(
        isinstance(r.lhs, App) and r.lhs.symbol == tr.name
        for r in tr.body.rules)


def apply_transformer(theory, name: str, args: Sequence[Term]) -> Term:
    """Run a theory's transformer on object-level terms.

    The pipeline: find the transformer, gate each argument by its class,
    dispatch on the body kind, then insist the output is a well-sorted
    engine-free term of the result sort.
    """
    tr = None
    for cand in theory.transformers:
        if cand.name == name:
            tr = cand
            break
    if tr is None:
        raise UnknownTransformer(f"theory {theory.name!r} has no transformer {name!r}")
    sig = theory.signature
    if len(args) != tr.arity:
        raise ClassViolation(
            f"{name!r} takes {tr.arity} arguments, got {len(args)}")
    for i, (a, cls) in enumerate(zip(args, tr.arg_classes or ())):
        if not cls.member(a, sig):
            raise ClassViolation(
                f"argument {i} of {name!r} is outside {cls.describe()}")

    if isinstance(tr.body, Opaque):
        fn = HOST_FUNCTIONS.get(tr.body.host_id)
        if fn is None:
            raise UnknownTransformer(
                f"no host function registered as {tr.body.host_id!r}")
        out = fn(sig, list(args), tr.body.config_dict())
    elif isinstance(tr.body, Rules):
        rsig = _rule_signature(sig, tr)
        if _is_fold(tr):
            subject = App(tr.name, tuple(args))
        else:
            subject = args[0]
        out = normal_form(tr.body.rules, subject, tr.body.fuel)
        _reject_residue(out, tr.name)
        if _is_fold(tr) and _contains_symbol(out, tr.name):
            raise HostError(
                f"{tr.name!r} left its own head in the output; "
                f"the rule set does not cover some constructor")
    else:
        raise TransformerError(
            f"transformer {name!r} is a generic template; specialize it first")

    try:
        got = well_sorted(sig, out)
    except Exception as e:
        raise HostError(f"{name!r} produced an ill-sorted term: {e}") from e
    if got != tr.result_sort:
        raise HostError(
            f"{name!r} produced a term of sort {got.name!r}, "
            f"expected {tr.result_sort.name!r}")
    return out


def _reject_residue(t: Term, name: str) -> None:
    if isinstance(t, App):
        if t.symbol.startswith(ENGINE_PREFIX):
            raise HostError(
                f"{name!r} got stuck on engine primitive {t.symbol!r}")
        for a in t.args:
            _reject_residue(a, name)
    elif isinstance(t, Quote):
        _reject_residue(t.body, name)


def _contains_symbol(t: Term, name: str) -> bool:
    if isinstance(t, App):
        return t.symbol == name or any(_contains_symbol(a, name) for a in t.args)
    if isinstance(t, Quote):
        return _contains_symbol(t.body, name)
    return False


def quote_apply(theory, name: str, quoted_args: Sequence[Term]) -> Term:
    """Apply a transformer at the level of quotations: unwrap each
    Quote, run the transformer, and requote the result. This is the
    semantics of the transformer's syntax-level symbol."""
    bodies = []
    for a in quoted_args:
        if not isinstance(a, Quote):
            raise NotAQuotation(f"expected a quotation, got {a!r}")
        bodies.append(a.body)
    return Quote(apply_transformer(theory, name, bodies))


# --- built-in algorithms --------------------------------------------------------------


def _want_lit(t: Term, who: str) -> Lit:
    if not isinstance(t, Lit):
        raise ClassViolation(f"{who} expects a numeral, got {t!r}")
    return t


def _host_numeral_add(sig, args, config):
    a, b = (_want_lit(t, "numeral_add") for t in args)
    return Lit(a.value + b.value, a.sort)


def _host_numeral_mul(sig, args, config):
    a, b = (_want_lit(t, "numeral_mul") for t in args)
    return Lit(a.value * b.value, a.sort)


def trial_division(n: int) -> list[tuple[int, int]]:
    """Prime factorization of n >= 1 as ascending (prime, multiplicity)
    pairs, by trial division."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            m = 0
            while n % d == 0:
                n //= d
                m += 1
            out.append((d, m))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def factor_pair_term(unit: int, factors: list[tuple[int, int]], nsort: Sort) -> Term:
    lst: Term = App("nil", ())
    for p, m in reversed(factors):
        entry = App("unit", (Lit(p, nsort), Lit(m, nsort)))
        lst = App("cons", (entry, lst))
    return App("pair", (Lit(unit, nsort), lst))


def read_factor_pair(t: Term) -> tuple[int, list[tuple[int, int]]]:
    """Inverse of factor_pair_term; raises HostError on malformed shapes."""
    if not (isinstance(t, App) and t.symbol == "pair" and len(t.args) == 2):
        raise HostError(f"not a factorization pair: {t!r}")
    unit_t, lst = t.args
    if not isinstance(unit_t, Lit):
        raise HostError("factorization unit must be a numeral")
    factors = []
    while True:
        if isinstance(lst, App) and lst.symbol == "nil":
            break
        if not (isinstance(lst, App) and lst.symbol == "cons" and len(lst.args) == 2):
            raise HostError(f"not a factor list: {lst!r}")
        entry, lst = lst.args
        if not (isinstance(entry, App) and entry.symbol == "unit"
                and len(entry.args) == 2
                and all(isinstance(x, Lit) for x in entry.args)):
            raise HostError(f"not a factor entry: {entry!r}")
        factors.append((entry.args[0].value, entry.args[1].value))
    return unit_t.value, factors


def _host_ifactors(sig, args, config):
    n = _want_lit(args[0], "ifactors")
    if n.value == 0:
        raise ZeroInput("0 has no prime factorization")
    unit = 1 if n.value > 0 else -1
    return factor_pair_term(unit, trial_division(abs(n.value)), n.sort)


def _host_reconstruct_factors(sig, args, config):
    nsort = sig.sort(config["numeral_sort"])
    unit, factors = read_factor_pair(args[0])
    n = unit
    for p, m in factors:
        n *= p ** m
    return Lit(n, nsort)


def _host_modpow(sig, args, config):
    base, exp, mod = (_want_lit(t, "modpow") for t in args)
    if mod.value < 2:
        raise BadModulus(f"modulus must be at least 2, got {mod.value}")
    if exp.value < 0:
        raise NegativeExponent(f"exponent must be nonnegative, got {exp.value}")
    # binary square-and-multiply, least significant bit first
    result = 1 % mod.value
    b = base.value % mod.value
    e = exp.value
    while e:
        if e & 1:
            result = (result * b) % mod.value
        b = (b * b) % mod.value
        e >>= 1
    return Lit(result, base.sort)


def _host_normalize_poly(sig, args, config):
    sort = sig.sort(config["sort"])
    variables = tuple(config["vars"])
    p = term_to_poly(args[0], variables)
    return poly_to_term(p, variables, sort,
                        add_symbol=config.get("add", "plus"),
                        mul_symbol=config.get("mul", "times"))


def structural_derivative(t: Term, x: str, sort: Sort,
                          roles: Mapping[str, str] = DEFAULT_ROLES) -> Term:
    """Symbolic differentiation by the textbook rules: sums split,
    products obey Leibniz, literals drop to 0, the variable of interest
    drops to 1 and every other variable to 0. No simplification here;
    the caller normalizes."""
    inv = {r: s for s, r in roles.items()}

    def d(u: Term) -> Term:
        if isinstance(u, Lit):
            return Lit(0, sort)
        if isinstance(u, Var):
            return Lit(1 if u.name == x else 0, sort)
        if isinstance(u, App):
            role = roles.get(u.symbol)
            if role == "add":
                return App(inv["add"], (d(u.args[0]), d(u.args[1])))
            if role == "mul":
                return App(inv["add"], (
                    App(inv["mul"], (d(u.args[0]), u.args[1])),
                    App(inv["mul"], (u.args[0], d(u.args[1])))))
            if role == "neg":
                return App(inv["neg"], (d(u.args[0]),))
            if role == "sub":
                return App(inv["sub"], (d(u.args[0]), d(u.args[1])))
            if role in ("zero", "one"):
                return Lit(0, sort)
        raise ClassViolation(f"cannot differentiate {u!r}")

    return d(t)


def _host_deriv(sig, args, config):
    sort = sig.sort(config["sort"])
    variables = tuple(config["vars"])
    t, xt = args
    if not isinstance(xt, Var):
        raise ClassViolation(f"the second argument names a variable, got {xt!r}")
    raw = structural_derivative(t, xt.name, sort)
    p = term_to_poly(raw, variables)
    return poly_to_term(p, variables, sort,
                        add_symbol=config.get("add", "plus"),
                        mul_symbol=config.get("mul", "times"))


register_host_function("builtin.numeral_add", _host_numeral_add)
register_host_function("builtin.numeral_mul", _host_numeral_mul)
register_host_function("builtin.ifactors", _host_ifactors)
register_host_function("builtin.reconstruct_factors", _host_reconstruct_factors)
register_host_function("builtin.modpow", _host_modpow)
register_host_function("builtin.normalize_poly", _host_normalize_poly)
register_host_function("builtin.deriv", _host_deriv)


# --- factorization signature fragment ----------------------------------------------

FACTOR_PAIR = Sort("FactorPair")
FACTOR_LIST = Sort("FactorList")


def factor_signature_fragment(nsort: Sort) -> tuple[tuple[Sort, ...], tuple[OpDecl, ...]]:
    """Sorts and symbols for factorization results: the outer ``pair``
    couples a unit with a factor list; each list entry is a ``unit``
    coupling a prime with its multiplicity."""
    sorts = (FACTOR_PAIR, FACTOR_LIST)
    ops = (
        OpDecl("pair", (nsort, FACTOR_LIST), FACTOR_PAIR),
        OpDecl("unit", (nsort, nsort), FACTOR_PAIR),
        OpDecl("cons", (FACTOR_PAIR, FACTOR_LIST), FACTOR_LIST),
        OpDecl("nil", (), FACTOR_LIST),
    )
    return sorts, ops


# --- ready-made builtin transformers --------------------------------------------------
#
# Each factory returns (transformer, extra_sorts, extra_ops): feed all
# three to graph.register_transformer. Keeping the factories here lets
# the prelude and the file reader install identical registrations.


def _numeral(sort: Sort):
    from .termclasses import NumeralTerm

    return NumeralTerm(sort)


def builtin_numeral_add(sort: Sort):
    tr = Transformer("numeral_add", (sort, sort), sort,
                     (_numeral(sort), _numeral(sort)),
                     Opaque("builtin.numeral_add"))
    return tr, (), ()


def builtin_numeral_mul(sort: Sort):
    tr = Transformer("numeral_mul", (sort, sort), sort,
                     (_numeral(sort), _numeral(sort)),
                     Opaque("builtin.numeral_mul"))
    return tr, (), ()


def builtin_ifactors(sort: Sort):
    sorts, ops = factor_signature_fragment(sort)
    tr = Transformer("ifactors", (sort,), FACTOR_PAIR,
                     (_numeral(sort),),
                     Opaque("builtin.ifactors", (("numeral_sort", sort.name),)))
    return tr, sorts, ops


def builtin_reconstruct_factors(sort: Sort):
    from .termclasses import ClosedTerm

    tr = Transformer(
        "reconstruct_factors", (FACTOR_PAIR,), sort,
        (ClosedTerm(FACTOR_PAIR),),
        Opaque("builtin.reconstruct_factors", (("numeral_sort", sort.name),)))
    # the fragment may already be installed by ifactors; callers pass
    # these extras through register_transformer, which tolerates repeats
    sorts, ops = factor_signature_fragment(sort)
    return tr, sorts, ops


def builtin_modpow(sort: Sort):
    tr = Transformer("modpow", (sort, sort, sort), sort,
                     (_numeral(sort), _numeral(sort), _numeral(sort)),
                     Opaque("builtin.modpow"))
    return tr, (), ()


def builtin_normalize_poly(sort: Sort, variables: Sequence[str],
                           add: str = "plus", mul: str = "times"):
    from .termclasses import PolyTerm

    tr = Transformer(
        "normalize_poly", (sort,), sort,
        (PolyTerm(sort, tuple(variables)),),
        Opaque("builtin.normalize_poly",
               (("sort", sort.name), ("vars", tuple(variables)),
                ("add", add), ("mul", mul))))
    return tr, (), ()


def builtin_deriv(sort: Sort, variables: Sequence[str],
                  add: str = "plus", mul: str = "times"):
    from .termclasses import PolyTerm, RuleDefined, CLASS_PREDICATES

    tr = Transformer(
        "deriv", (sort, sort), sort,
        (PolyTerm(sort, tuple(variables)),
         RuleDefined("var", CLASS_PREDICATES["var"])),
        Opaque("builtin.deriv",
               (("sort", sort.name), ("vars", tuple(variables)),
                ("add", add), ("mul", mul))))
    return tr, (), ()


BUILTIN_FACTORIES = {
    "numeral_add": builtin_numeral_add,
    "numeral_mul": builtin_numeral_mul,
    "ifactors": builtin_ifactors,
    "reconstruct_factors": builtin_reconstruct_factors,
    "modpow": builtin_modpow,
    "normalize_poly": builtin_normalize_poly,
    "deriv": builtin_deriv,
}
