"""Workbench for processes that synchronise through chains of links:
parsing, symbolic transition systems, bisimilarity checking and routing
infrastructure analysis."""

__version__ = "0.1.0"

from .chains import (
    TAU,
    VIRTUAL,
    AllVirtual,
    Block,
    ChainError,
    ChainSyntaxError,
    EssentialLabel,
    InvalidAdjacency,
    InvalidLink,
    InvalidRenaming,
    Link,
    LinkChain,
    NormalLabel,
    Renaming,
    format_chain,
    is_matched,
    merge_concrete,
    merge_symbolic,
    normalize,
    parse_chain,
    reduce_chain,
    rename_chain,
    restrict_concrete,
    restrict_symbolic,
    subst_chain,
)
from .process import (
    NIL,
    ArityError,
    Call,
    Definition,
    Definitions,
    Nil,
    NonEssentialPrefix,
    Par,
    ParseError,
    Prefix,
    Process,
    Program,
    ProgramError,
    Rename,
    Restrict,
    Sum,
    UnboundChannel,
    UndefinedConstant,
    alpha_equivalent,
    format_process,
    format_program,
    free_names,
    parse_process,
    parse_program,
    struct_normalize,
    subst_process,
)
from .semantics import (
    Bounds,
    LtsTransition,
    SymbolicLts,
    SymbolicTransition,
    UnguardedRecursion,
    build_lts,
    canonical_state,
    concrete_step_oracle,
    symbolic_step,
)
from .equivalence import (
    NETWORK,
    STRONG,
    LawReport,
    Verdict,
    check_bisim,
    law_harness,
)
from .routing import (
    Basic,
    Compose,
    InfraGraph,
    basic_equivalent,
    boundary_paths,
    build_dynamic_infra,
    infra_graph,
    infra_to_process,
    parse_infra,
    verify_paths,
)
