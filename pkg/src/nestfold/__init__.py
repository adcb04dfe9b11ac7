"""nestfold: derive and execute dependently typed folds for nested data types."""

from .analysis import (
    GroupContext,
    IndexTypeSpec,
    MutualGroup,
    analyze,
    bush_shape,
    classify,
    enumerate_indices,
    render_index,
    well_formed,
)
from .cli import main
from .derivation import (
    DerivedDef,
    DerivedGroup,
    derive_group,
    ind_erases_to_nfold,
    nat_index_eligible,
    recursion_witnesses,
)
from .diagnostics import (
    AnalysisError,
    DerivationError,
    Diagnostic,
    EmitError,
    EvalError,
    GuardExceeded,
    NestfoldError,
    ParseError,
    PsBridgeError,
)
from .emitter import EmitModule, emit_agda, module_for_group
from .parser import (
    Atom,
    Constructor,
    Program,
    TypeDecl,
    VBase,
    VCon,
    parse_program,
    parse_type_context,
    parse_value_literal,
    render_program,
    render_value,
)
from .properties import Counterexample, PropertyResult, SuiteReport, run_suite
from .runtime import (
    Algebra,
    CallCounter,
    DepAlgebra,
    HAlgebra,
    RFun,
    RNat,
    RTree,
    catalogue,
    enumerate_values,
    eval_ind,
    eval_map,
    eval_nfold,
    eval_nfold_prime,
    halg_catalogue,
    typecheck_value,
)

__all__ = [
    "Algebra",
    "AnalysisError",
    "Atom",
    "CallCounter",
    "Constructor",
    "Counterexample",
    "DepAlgebra",
    "DerivationError",
    "DerivedDef",
    "DerivedGroup",
    "Diagnostic",
    "EmitError",
    "EmitModule",
    "EvalError",
    "GroupContext",
    "GuardExceeded",
    "HAlgebra",
    "IndexTypeSpec",
    "MutualGroup",
    "NestfoldError",
    "ParseError",
    "Program",
    "PropertyResult",
    "PsBridgeError",
    "RFun",
    "RNat",
    "RTree",
    "SuiteReport",
    "TypeDecl",
    "VBase",
    "VCon",
    "analyze",
    "bush_shape",
    "catalogue",
    "classify",
    "derive_group",
    "emit_agda",
    "enumerate_indices",
    "enumerate_values",
    "eval_ind",
    "eval_map",
    "eval_nfold",
    "eval_nfold_prime",
    "halg_catalogue",
    "ind_erases_to_nfold",
    "main",
    "module_for_group",
    "nat_index_eligible",
    "parse_program",
    "parse_type_context",
    "parse_value_literal",
    "recursion_witnesses",
    "render_index",
    "render_program",
    "render_value",
    "run_suite",
    "typecheck_value",
    "well_formed",
]
