"""Computational toolkit for key relations on finite domains.

Modules:
  relcore   relations, essential tuples, patterns, blocks
  preserve  preservation searches, key decision, polymorphism shapes
  structure richness, group extraction, GF(2) decomposition, witnesses
  corpus    worked examples and relation generators
  cli       the `keyrel` command-line front end
"""

from .relcore import (
    Block,
    GuardError,
    InputError,
    PatternReport,
    Relation,
    blocks,
    connected_components,
    cylindrify,
    dummy_variables,
    essential_fill,
    essential_witness,
    is_essential_relation,
    pattern,
    pattern_given_key_tuple,
    projection,
    restrict,
)
from .preserve import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    KeyReport,
    OperationTable,
    SearchBudget,
    UnaryVectorFunction,
    WnuPower,
    apply_vf,
    find_mapping_vf,
    is_key_tuple,
    key_fill,
    key_report,
    preserves_op,
    preserves_vf,
    search_polymorphism,
    solve_vector_function,
    wnu_power,
)
from .structure import (
    BlockStructure,
    CorePropertyReport,
    CoreResult,
    GroupStructure,
    LinearDisjunctionGF2,
    MainTheoremWitness,
    PerfectPair,
    WitnessNotFound,
    compute_core,
    decompose_gf2,
    extract_group_structure,
    find_almost_perfect_pair,
    find_perfect_pair,
    full_pattern_block_report,
    is_rich,
    is_strongly_rich,
    key_blocks,
    main_theorem_witness,
    verify_core_properties,
    verify_pattern_theorem,
    verify_witness,
)
from .corpus import (
    CorpusEntry,
    corpus_get,
    generate,
    linear_relation,
    punctured_cube,
    quasigroup5,
    random_relation,
    verify_known_facts,
)

__version__ = "0.1.0"
