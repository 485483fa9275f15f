"""The bundled theory graph.

An algebra ladder from magma to abelian group, integer arithmetic with
computational content (numeral arithmetic, factorization, modular
power), a polynomial ring with normalization and differentiation, and a
pair of isomorphic toy languages wired to generated evaluators.
Everything is built through the public construction API, so this module
doubles as a worked example and as the fixture the command line ships
with.
"""

from __future__ import annotations

from .generate import gen_evaluator, gen_homomorphism_theory, \
    gen_term_language, power_template
from .graph import Morphism, TheoryGraph, inclusion, make_theory, \
    register_transformer, with_meaning
from .kernel import App, OpDecl, SYN, Sort, Var, forall
from .meaning import ClaimAnd, Den, Embed, MeaningFormula, SemEq, SemOp, \
    SynVar, TermPred, TransApp
from .semantics import IntDomain, Interp, Model, PolyDomain, RandomStrategy
from .termclasses import CLASS_PREDICATES, NumeralTerm, PolyTerm, RuleDefined
from .transformers import BUILTIN_FACTORIES, Transformer

#: Variables the polynomial transformers in Ring are configured over.
POLY_VARS = ("x", "y", "z")


def _assoc(op: str, s: Sort):
    x, y, z = Var("x", s), Var("y", s), Var("z", s)
    return forall([("x", s), ("y", s), ("z", s)],
                  App(op, (App(op, (x, y)), z)),
                  App(op, (x, App(op, (y, z)))))


def _comm(op: str, s: Sort):
    x, y = Var("x", s), Var("y", s)
    return forall([("x", s), ("y", s)], App(op, (x, y)), App(op, (y, x)))


def _unit_laws(op: str, unit: str, s: Sort):
    x = Var("x", s)
    u = App(unit, ())
    return (forall([("x", s)], App(op, (u, x)), x),
            forall([("x", s)], App(op, (x, u)), x))


def _numeral_meanings(sort: Sort, model: str) -> tuple[MeaningFormula, ...]:
    """Claims for the numeral transformers over one literal sort: the
    arithmetic ones commute with denotation, factoring round-trips and
    yields a well-formed factorization, modular power matches the
    mathematical power residue."""
    num = NumeralTerm(sort)
    a, b, n = SynVar("a"), SynVar("b"), SynVar("n")

    def den(e):
        return Den(e, model)

    facts = TransApp("ifactors", (n,))
    return (
        MeaningFormula(
            "mf_numeral_add", "numeral_add", (("a", num), ("b", num)),
            SemEq(den(TransApp("numeral_add", (a, b))),
                  SemOp("add", (den(a), den(b))))),
        MeaningFormula(
            "mf_numeral_mul", "numeral_mul", (("a", num), ("b", num)),
            SemEq(den(TransApp("numeral_mul", (a, b))),
                  SemOp("mul", (den(a), den(b))))),
        MeaningFormula(
            "mf_ifactors", "ifactors",
            (("n", RuleDefined("nonzero", CLASS_PREDICATES["nonzero"], num)),),
            ClaimAnd((
                SemEq(den(TransApp("reconstruct_factors", (facts,))), den(n)),
                TermPred("builtin.factorization_wellformed", (facts,)),
            ))),
        MeaningFormula(
            "mf_modpow", "modpow",
            (("b", num),
             ("e", RuleDefined("nonneg", CLASS_PREDICATES["nonneg"], num)),
             ("m", RuleDefined("ge2", CLASS_PREDICATES["ge2"], num))),
            SemEq(den(TransApp("modpow", (SynVar("b"), SynVar("e"),
                                          SynVar("m")))),
                  SemOp("powmod", (den(SynVar("b")), den(SynVar("e")),
                                   den(SynVar("m")))))),
    )


def _poly_meanings(sort: Sort, variables: tuple[str, ...],
                   model: str) -> tuple[MeaningFormula, ...]:
    """Claims for the polynomial transformers: normalization preserves
    the denoted polynomial, differentiation matches the derivative of
    the denotation."""
    cls = PolyTerm(sort, variables)
    p = SynVar("p")
    x = variables[0]

    def den(e):
        return Den(e, model)

    return (
        MeaningFormula(
            "mf_normalize_poly", "normalize_poly", (("p", cls),),
            SemEq(den(TransApp("normalize_poly", (p,))), den(p))),
        MeaningFormula(
            "mf_deriv", "deriv", (("p", cls),),
            SemEq(den(TransApp("deriv", (p, Embed(Var(x, sort))))),
                  SemOp("deriv", (den(p),), (x,)))),
    )


def _install_builtins(theory, names, sort: Sort, variables=POLY_VARS):
    for b in names:
        factory = BUILTIN_FACTORIES[b]
        if b in ("normalize_poly", "deriv"):
            tr, extra_sorts, extra_ops = factory(sort, variables)
        else:
            tr, extra_sorts, extra_ops = factory(sort)
        theory = register_transformer(theory, tr, sorts=extra_sorts,
                                      ops=extra_ops)
    return theory


NUMERAL_BUILTINS = ("numeral_add", "numeral_mul", "ifactors",
                    "reconstruct_factors", "modpow")


def standard_graph() -> TheoryGraph:
    """Build the bundled graph fresh. Sixteen nodes, eighteen edges."""
    g = TheoryGraph()

    # -- the algebra ladder
    M = Sort("M")
    x = Var("x", M)
    e = App("e", ())
    magma = g.add_node(make_theory(
        "Magma", sorts=(M,), ops=(OpDecl("bop", (M, M), M),)))
    g.extend("Magma", "Semigroup", axioms=(_assoc("bop", M),))
    power = Transformer("power", (SYN, SYN), SYN, (), power_template())
    monoid = g.extend("Semigroup", "Monoid",
                      ops=(OpDecl("e", (), M),),
                      axioms=_unit_laws("bop", "e", M),
                      transformers=(power,))
    g.extend("Monoid", "CommutativeMonoid", axioms=(_comm("bop", M),))
    g.extend("Monoid", "Group",
             ops=(OpDecl("inv", (M,), M),),
             axioms=(forall([("x", M)], App("bop", (App("inv", (x,)), x)), e),
                     forall([("x", M)], App("bop", (x, App("inv", (x,)))), e)))

    # glue the two monoid extensions back together over their base; the
    # inclusions carry only alpha-matched axioms, so any strategy does
    seal = RandomStrategy(1, 0)
    g.check_edge("inc:Monoid->CommutativeMonoid", seal)
    g.check_edge("inc:Monoid->Group", seal)
    g.combine("AbelianGroup", "inc:Monoid->CommutativeMonoid",
              "inc:Monoid->Group")

    # -- natural-number arithmetic with computational content
    N = Sort("N")
    xn, yn, zn = Var("x", N), Var("y", N), Var("z", N)
    zero = App("zero", ())

    def plus(a, b):
        return App("plus", (a, b))

    def times(a, b):
        return App("times", (a, b))

    nat = make_theory(
        "NatArith",
        sorts=(N,), literal_sorts=(N,),
        ops=(OpDecl("plus", (N, N), N), OpDecl("times", (N, N), N),
             OpDecl("zero", (), N), OpDecl("one", (), N)),
        axioms=(_assoc("plus", N), _comm("plus", N))
        + _unit_laws("plus", "zero", N)
        + (_assoc("times", N), _comm("times", N))
        + _unit_laws("times", "one", N)
        + (forall([("x", N), ("y", N), ("z", N)],
                  times(xn, plus(yn, zn)),
                  plus(times(xn, yn), times(xn, zn))),
           forall([("x", N), ("y", N), ("z", N)],
                  times(plus(xn, yn), zn),
                  plus(times(xn, zn), times(yn, zn))),
           forall([("x", N)], times(zero, xn), zero)),
        models=(("standard", {"N": IntDomain()},
                 {"plus": Interp("add"), "times": Interp("mul"),
                  "zero": Interp("const", (0,)),
                  "one": Interp("const", (1,))}),),
    )
    nat = _install_builtins(nat, NUMERAL_BUILTINS, N)
    for mf in _numeral_meanings(N, "standard"):
        nat = with_meaning(nat, mf)
    g.add_node(nat)

    g.add_edge(Morphism(
        "add_monoid_in_nat", monoid, nat,
        sort_map=(("M", "N"),),
        symbol_map=(("bop", "plus"), ("e", "zero"))))

    # -- the ring of integer polynomials
    R = Sort("R")
    xr, yr, zr = Var("x", R), Var("y", R), Var("z", R)
    rzero = App("zero", ())

    def radd(a, b):
        return App("plus", (a, b))

    def rmul(a, b):
        return App("times", (a, b))

    ring = make_theory(
        "Ring",
        sorts=(R,), literal_sorts=(R,),
        ops=(OpDecl("plus", (R, R), R), OpDecl("times", (R, R), R),
             OpDecl("neg", (R,), R),
             OpDecl("zero", (), R), OpDecl("one", (), R)),
        axioms=(_assoc("plus", R), _comm("plus", R))
        + _unit_laws("plus", "zero", R)
        + (forall([("x", R)], radd(App("neg", (xr,)), xr), rzero),
           forall([("x", R)], radd(xr, App("neg", (xr,))), rzero),
           _assoc("times", R))
        + _unit_laws("times", "one", R)
        + (forall([("x", R), ("y", R), ("z", R)],
                  rmul(xr, radd(yr, zr)),
                  radd(rmul(xr, yr), rmul(xr, zr))),
           forall([("x", R), ("y", R), ("z", R)],
                  rmul(radd(xr, yr), zr),
                  radd(rmul(xr, zr), rmul(yr, zr)))),
        models=(("standard", {"R": IntDomain()},
                 {"plus": Interp("add"), "times": Interp("mul"),
                  "neg": Interp("neg"),
                  "zero": Interp("const", (0,)),
                  "one": Interp("const", (1,))}),
                ("poly3", {"R": PolyDomain(POLY_VARS)},
                 {"plus": Interp("add"), "times": Interp("mul"),
                  "neg": Interp("neg"),
                  "zero": Interp("const", (0,)),
                  "one": Interp("const", (1,))})),
    )
    ring = _install_builtins(ring, NUMERAL_BUILTINS
                             + ("normalize_poly", "deriv"), R)
    for mf in _numeral_meanings(R, "standard"):
        ring = with_meaning(ring, mf)
    for mf in _poly_meanings(R, POLY_VARS, "poly3"):
        ring = with_meaning(ring, mf)
    g.add_node(ring)
    g.extend("Ring", "CommutativeRing", axioms=(_comm("times", R),))

    g.add_edge(Morphism(
        "nat_in_ring", nat, ring,
        sort_map=(("N", "R"),),
        symbol_map=(("plus", "plus"), ("times", "times"),
                    ("zero", "zero"), ("one", "one")),
        transformer_map=tuple((b, b) for b in NUMERAL_BUILTINS)))
    g.add_edge(Morphism(
        "add_group_in_ring", g.node("Group"), ring,
        sort_map=(("M", "R"),),
        symbol_map=(("bop", "plus"), ("e", "zero"), ("inv", "neg"))))
    g.add_edge(Morphism(
        "mul_monoid_in_ring", g.node("CommutativeMonoid"),
        g.node("CommutativeRing"),
        sort_map=(("M", "R"),),
        symbol_map=(("bop", "times"), ("e", "one"))))

    # -- two isomorphic toy languages over the integers
    A, B = Sort("A"), Sort("B")
    arith = g.add_node(make_theory(
        "Arith",
        sorts=(A,), literal_sorts=(A,),
        ops=(OpDecl("Plus", (A, A), A), OpDecl("Times", (A, A), A)),
        axioms=(_assoc("Plus", A), _comm("Plus", A),
                _assoc("Times", A), _comm("Times", A)),
        models=(("standard", {"A": IntDomain()},
                 {"Plus": Interp("add"), "Times": Interp("mul")}),),
    ))
    aa = g.add_node(make_theory(
        "AA",
        sorts=(B,), literal_sorts=(B,),
        ops=(OpDecl("XXX", (B, B), B), OpDecl("YYY", (B, B), B)),
        axioms=(_assoc("XXX", B), _comm("XXX", B),
                _assoc("YYY", B), _comm("YYY", B)),
        models=(("standard", {"B": IntDomain()},
                 {"XXX": Interp("mul"), "YYY": Interp("add")}),),
    ))
    g.add_edge(Morphism(
        "arith_to_aa", arith, aa,
        sort_map=(("A", "B"),),
        symbol_map=(("Plus", "YYY"), ("Times", "XXX")),
        model_preserving=True))

    # -- term languages and their generated evaluators; each language
    # node designates its intended reading of the constructors, which is
    # what the evaluator's meaning formula is checked against
    arith_tl = gen_term_language(arith, ("A",))
    arith_tl = arith_tl.replace(models=(Model(
        "standard", arith_tl.signature,
        {"A#term": IntDomain()},
        {"ctor_Plus": Interp("add"), "ctor_Times": Interp("mul")}),))
    g.add_node(arith_tl)
    arith_ev, _, _ = gen_evaluator(
        arith_tl, arith, {"ctor_Plus": "Plus", "ctor_Times": "Times"},
        "ArithEval")
    g.add_node(arith_ev)
    g.add_edge(inclusion("inc:Arith#term->ArithEval", arith_tl, arith_ev))
    g.add_edge(inclusion("inc:Arith->ArithEval", arith, arith_ev))

    aa_tl = gen_term_language(aa, ("B",))
    aa_tl = aa_tl.replace(models=(Model(
        "standard", aa_tl.signature,
        {"B#term": IntDomain()},
        {"ctor_XXX": Interp("mul"), "ctor_YYY": Interp("add")}),))
    g.add_node(aa_tl)
    aa_ev, _, _ = gen_evaluator(
        aa_tl, aa, {"ctor_XXX": "XXX", "ctor_YYY": "YYY"}, "AAEval")
    g.add_node(aa_ev)
    g.add_edge(inclusion("inc:AA#term->AAEval", aa_tl, aa_ev))
    g.add_edge(inclusion("inc:AA->AAEval", aa, aa_ev))

    # -- the theory of monoid homomorphisms, with both sides of the
    # source embedded into it
    hom = g.add_node(gen_homomorphism_theory(monoid))
    g.add_edge(Morphism(
        "monoid_in_hom_dom", monoid, hom,
        sort_map=(("M", "M1"),),
        symbol_map=(("bop", "bop1"), ("e", "e1"))))
    g.add_edge(Morphism(
        "monoid_in_hom_cod", monoid, hom,
        sort_map=(("M", "M2"),),
        symbol_map=(("bop", "bop2"), ("e", "e2"))))
    return g


def swapped_arith_morphism(g: TheoryGraph) -> Morphism:
    """The plausible-but-wrong reading of Arith inside AA: it sends the
    sum to the product. Both readings satisfy every axiom (each symbol
    denotes a commutative associative operation either way), so only
    model preservation can tell them apart. Not part of the bundled
    graph; add it to a fresh copy to demonstrate a failing edge."""
    return Morphism(
        "arith_to_aa_swapped", g.node("Arith"), g.node("AA"),
        sort_map=(("A", "B"),),
        symbol_map=(("Plus", "XXX"), ("Times", "YYY")),
        model_preserving=True)
