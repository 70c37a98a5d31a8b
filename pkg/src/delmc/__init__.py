"""Finite-model library for modal and dynamic epistemic logic.

Relations form a dagger category with meets; Kripke frames and their
monotone and bounded maps are built on top of it via initial lifts; models
evaluate propositional, announcement, and event-update operators through
the relation/powerset-map duality; Kripke sheaves carry the first-order
layer, where updates pull the whole interpretation back along the event
projection.  Everything is checkable: law suites verify the algebra on
random structures, and reduction traces re-verify every rewrite step
against a model.
"""

from .errors import (
    AgentMismatch,
    ArityMismatch,
    CapExceeded,
    CarrierMismatch,
    CodomainMismatch,
    DelmcError,
    EmptyGroup,
    InvariantViolation,
    NotAFunction,
    NotAPullback,
    NotMonotone,
    NotReducible,
    OpenPrecondition,
    ParseError,
    SchemaError,
    UnknownAgent,
    UnknownAtom,
    UnknownEvent,
    UnknownSymbol,
    UnresolvedEventModel,
    VariableCapture,
)
from .rel import (
    FiniteSet,
    Rel,
    Tabulation,
    apply_function,
    check_modularity,
    closure_reflexive_transitive,
    compose,
    dagger,
    empty,
    function_from_mapping,
    identity,
    is_function,
    is_injective,
    is_jointly_monic,
    is_reflexive,
    is_surjective,
    is_symmetric,
    is_transitive,
    join,
    leq,
    meet,
    rel,
    tabulate,
    total,
)
from .powerset import (
    PowersetMap,
    Subset,
    all_subsets,
    apply,
    beck_chevalley_equation,
    check_adjunction,
    check_beck_chevalley,
    check_biduality_laws,
    compose_maps,
    empty_subset,
    exists_map,
    forall_map,
    full_subset,
    map_leq,
    maps_equal,
    preimage_map,
    relation_from_join_map,
    relation_from_meet_map,
    verify_preserves_all_joins,
    verify_preserves_all_meets,
)
from .frames import (
    AgentSet,
    FrameMap,
    KripkeFrame,
    check_pullback_preserves_bounded,
    common_knowledge_relation,
    frame_map,
    identity_map,
    initial_lift,
    is_bisimulation,
    is_bounded,
    is_monotone,
    largest_preserved_check,
    product,
    pullback,
    subframe,
)
from .formulas import (
    And,
    Atom,
    Bot,
    Box,
    DelBox,
    DelDia,
    Dia,
    Exists,
    Forall,
    Formula,
    FormulaInContext,
    Fun,
    Imp,
    Not,
    Or,
    PalBox,
    PalDia,
    Pred,
    Term,
    TermInContext,
    Top,
    Var,
    as_sentence,
    free_vars,
    substitute,
)
from .models import (
    EventModel,
    KripkeModel,
    LawCheck,
    LawReport,
    NoLearningReport,
    UpdateResult,
    extension,
    no_learning_check,
    pal_update,
    product_update,
    static_precondition_modalities,
    verify_del_reductions,
    verify_pal_reductions,
)
from .sheaves import (
    FiberedPower,
    KripkeSheaf,
    SheafCheck,
    SheafModel,
    SheafUpdate,
    Signature,
    check_substitution_box_commutation,
    check_substitution_functoriality,
    check_transition_commutation,
    del_in_context,
    fibered_power,
    interp_formula,
    interp_term,
    is_kripke_sheaf,
    pullback_update,
    verify_quantifier_reduction,
)
from .parser import parse_formula, parse_term, print_formula
from .reduction import (
    ReductionResult,
    ReductionStep,
    first_order_node,
    is_static,
    reduce_formula,
)
from .modelio import dump_file, dump_model, load_file, load_model, load_sheaf_frames
from .laws import (
    DEFAULT_CASES,
    SUITES,
    Report,
    SelfTestReport,
    run_all,
    run_suite,
    self_test,
)

__version__ = "0.1.0"
