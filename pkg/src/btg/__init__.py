"""Theories that pair axioms with computation, arranged in graphs.

A theory here has three faces: a signature of sorts and symbols, axioms
about them, and transformers, which are algorithms on the terms
themselves. Meaning formulas tie the two sides together by saying what
a transformer's output denotes, and model checking turns those claims
(and the axioms, and the morphisms between theories) into evidence.
"""

from .errors import BtgError
from .generate import (
    GenericTransformer,
    HOLE,
    gen_evaluator,
    gen_homomorphism_theory,
    gen_term_language,
    power_template,
    specialize_generic,
)
from .graph import (
    BiformTheory,
    Morphism,
    Obligation,
    TheoryGraph,
    check_morphism,
    combine_theories,
    extend_theory,
    inclusion,
    make_theory,
    register_transformer,
    rename_theory,
    transport,
    with_meaning,
    with_model,
)
from .kernel import (
    App,
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
    depth,
    enumerate_terms,
    forall,
    free_vars,
    is_closed,
    substitute,
    unquote,
    well_sorted,
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
    VerificationReport,
    register_host_predicate,
    verify_all,
    verify_meaning,
)
from .poly import PolyValue, poly_to_term, term_to_poly
from .prelude import standard_graph
from .rules import Rule, normal_form, rewrite_step
from .semantics import (
    CheckReport,
    ExhaustiveDomain,
    ExhaustiveTerms,
    IntDomain,
    IntVal,
    Interp,
    Model,
    PolyDomain,
    RandomStrategy,
    Residue,
    SynDomain,
    SynVal,
    ZpDomain,
    check_formula,
    denote,
    poly_equal_on_zp,
)
from .termclasses import (
    CLASS_PREDICATES,
    ClosedTerm,
    NumeralTerm,
    PolyTerm,
    RuleDefined,
    TermOfLanguage,
)
from .textfmt import elaborate, elaborate_file, parse_term, print_graph, \
    print_term
from .transformers import (
    BUILTIN_FACTORIES,
    Opaque,
    Rules,
    Transformer,
    apply_transformer,
    quote_apply,
    register_host_function,
)

__version__ = "0.1.0"

__all__ = [
    "App", "BUILTIN_FACTORIES", "BiformTheory", "BtgError", "CLASS_PREDICATES",
    "CheckReport", "ClaimAnd", "ClosedTerm", "Den", "Embed", "Eq",
    "ExhaustiveDomain", "ExhaustiveTerms", "Formula", "GenericTransformer",
    "HOLE", "IntDomain", "IntVal", "Interp", "Lit", "MeaningFormula", "Model",
    "Morphism", "NumeralTerm", "Obligation", "OpDecl", "Opaque", "PolyDomain",
    "PolyTerm", "PolyValue", "Quote", "RandomStrategy", "Residue", "Rule",
    "RuleDefined", "Rules", "SYN", "SemEq", "SemOp", "Signature", "Sort",
    "SynDomain", "SynVal", "SynVar", "Term", "TermOfLanguage", "TermPred",
    "TheoryGraph", "TransApp", "Transformer", "Var", "VerificationReport",
    "ZpDomain", "alpha_equal", "apply_transformer", "check_formula",
    "check_morphism", "combine_theories", "denote", "depth", "elaborate",
    "elaborate_file", "enumerate_terms", "extend_theory", "forall",
    "free_vars", "gen_evaluator", "gen_homomorphism_theory",
    "gen_term_language", "inclusion", "is_closed", "make_theory",
    "normal_form", "parse_term", "poly_equal_on_zp", "poly_to_term",
    "power_template", "print_graph", "print_term", "quote_apply",
    "register_host_function", "register_host_predicate",
    "register_transformer", "rename_theory", "rewrite_step",
    "specialize_generic", "standard_graph", "substitute", "term_to_poly",
    "transport", "unquote", "verify_all", "verify_meaning", "well_sorted",
    "with_meaning", "with_model",
]
