"""Exact multivariate polynomials as coefficient maps.

A monomial is a sorted tuple of (variable, positive exponent) pairs; a
polynomial maps monomials to nonzero integer coefficients. The zero
polynomial is the empty map. These values are both the carrier of the
polynomial semantic domain and the backbone of the polynomial
normalizer, with graded-lexicographic rendering fixing one canonical
term per polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import NotPolynomial
from .kernel import App, Lit, Quote, Sort, Term, Var

Monomial = tuple[tuple[str, int], ...]


def _mono(pairs: Iterable[tuple[str, int]]) -> Monomial:
    d: dict[str, int] = {}
    for v, e in pairs:
        if e < 0:
            raise ValueError("negative exponent")
        if e:
            d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return _mono(list(a) + list(b))


@dataclass(frozen=True)
class PolyValue:
    """Immutable polynomial; ``terms`` is sorted by monomial for hashing."""

    terms: tuple[tuple[Monomial, int], ...] = ()

    @staticmethod
    def from_dict(coeffs: Mapping[Monomial, int]) -> "PolyValue":
        return PolyValue(tuple(sorted((m, c) for m, c in coeffs.items() if c != 0)))

    @staticmethod
    def const(c: int) -> "PolyValue":
        return PolyValue.from_dict({(): c})

    @staticmethod
    def variable(name: str) -> "PolyValue":
        return PolyValue.from_dict({((name, 1),): 1})

    def as_dict(self) -> dict[Monomial, int]:
        return dict(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def add(self, other: "PolyValue") -> "PolyValue":
        out = self.as_dict()
        for m, c in other.terms:
            out[m] = out.get(m, 0) + c
        return PolyValue.from_dict(out)

    def neg(self) -> "PolyValue":
        return PolyValue(tuple((m, -c) for m, c in self.terms))

    def sub(self, other: "PolyValue") -> "PolyValue":
        return self.add(other.neg())

    def mul(self, other: "PolyValue") -> "PolyValue":
        out: dict[Monomial, int] = {}
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return PolyValue.from_dict(out)

    def scale(self, k: int) -> "PolyValue":
        return PolyValue.from_dict({m: k * c for m, c in self.terms})

    def derivative(self, var: str) -> "PolyValue":
        out: dict[Monomial, int] = {}
        for m, c in self.terms:
            d = dict(m)
            e = d.get(var, 0)
            if not e:
                continue
            if e == 1:
                del d[var]
            else:
                d[var] = e - 1
            mm = tuple(sorted(d.items()))
            out[mm] = out.get(mm, 0) + c * e
        return PolyValue.from_dict(out)

    def eval_at(self, point: Mapping[str, int]) -> int:
        """Evaluate by direct substitution; independent of any term machinery."""
        total = 0
        for m, c in self.terms:
            prod = c
            for v, e in m:
                prod *= point[v] ** e
            total += prod
        return total

    def degree(self, var: str) -> int:
        return max((dict(m).get(var, 0) for m, _ in self.terms), default=0)

    def variables(self) -> set[str]:
        return {v for m, _ in self.terms for v, _ in m}

    def reduce_mod(self, p: int) -> "PolyValue":
        return PolyValue.from_dict({m: c % p for m, c in self.terms})

    def coefficient(self, m: Monomial) -> int:
        return dict(self.terms).get(m, 0)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms, key=lambda mc: grlex_key(mc[0], sorted(self.variables())), reverse=True):
            body = "*".join(f"{v}^{e}" if e > 1 else v for v, e in m)
            parts.append(f"{c}*{body}" if body else str(c))
        return " + ".join(parts)


def grlex_key(m: Monomial, var_order: Sequence[str]) -> tuple:
    """Graded-lexicographic key: total degree first, then the exponent
    vector in variable order. Sorting descending puts leading monomials
    first (x^2 > x*y > y^2 > x > y > 1 for order [x, y])."""
    d = dict(m)
    extra = set(d) - set(var_order)
    if extra:
        raise NotPolynomial(f"variables {sorted(extra)} not in the declared order")
    vec = tuple(d.get(v, 0) for v in var_order)
    return (sum(vec), vec)


# --- conversion between terms and polynomials ----------------------------------

#: symbol-name -> role. Terms built from symbols outside this table (or
#: variables outside the allowed set) are not polynomial-shaped.
DEFAULT_ROLES: dict[str, str] = {
    "plus": "add",
    "times": "mul",
    "neg": "neg",
    "minus": "sub",
    "zero": "zero",
    "one": "one",
}


def term_to_poly(t: Term, variables: Iterable[str],
                 roles: Mapping[str, str] = DEFAULT_ROLES) -> PolyValue:
    allowed = set(variables)

    def walk(u: Term) -> PolyValue:
        if isinstance(u, Lit):
            return PolyValue.const(u.value)
        if isinstance(u, Var):
            if u.name not in allowed:
                raise NotPolynomial(f"variable {u.name!r} not among {sorted(allowed)}")
            return PolyValue.variable(u.name)
        if isinstance(u, Quote):
            raise NotPolynomial("quotation is not polynomial-shaped")
        if isinstance(u, App):
            role = roles.get(u.symbol)
            if role is None:
                raise NotPolynomial(f"symbol {u.symbol!r} is not a polynomial operation")
            if role == "add":
                return walk(u.args[0]).add(walk(u.args[1]))
            if role == "mul":
                return walk(u.args[0]).mul(walk(u.args[1]))
            if role == "neg":
                return walk(u.args[0]).neg()
            if role == "sub":
                return walk(u.args[0]).sub(walk(u.args[1]))
            if role == "zero":
                return PolyValue()
            if role == "one":
                return PolyValue.const(1)
            raise NotPolynomial(f"unknown role {role!r}")
        raise NotPolynomial(f"not a term: {u!r}")

    return walk(t)


def poly_to_term(p: PolyValue, var_order: Sequence[str], sort: Sort,
                 add_symbol: str = "plus", mul_symbol: str = "times") -> Term:
    """The canonical term of a polynomial.

    A right-nested sum of monomials in descending graded-lexicographic
    order; each monomial is ``times(coefficient, right-nested variable
    product)`` with variables in declared order, repeated per exponent.
    The coefficient literal stays explicit even when it is 1; a constant
    monomial is a bare literal; the zero polynomial is the literal 0.
    """
    if p.is_zero:
        return Lit(0, sort)
    monos = sorted(p.terms, key=lambda mc: grlex_key(mc[0], var_order), reverse=True)

    def render(m: Monomial, c: int) -> Term:
        d = dict(m)
        factors: list[Term] = []
        for v in var_order:
            factors.extend([Var(v, sort)] * d.get(v, 0))
        if not factors:
            return Lit(c, sort)
        prod = factors[-1]
        for f in reversed(factors[:-1]):
            prod = App(mul_symbol, (f, prod))
        return App(mul_symbol, (Lit(c, sort), prod))

    rendered = [render(m, c) for m, c in monos]
    out = rendered[-1]
    for r in reversed(rendered[:-1]):
        out = App(add_symbol, (r, out))
    return out
