"""Elicitation engine for belief-network probabilities.

Statements about a network's probabilities, qualitative and quantitative
alike, compile into polynomial (in)equalities over the constituent
probabilities of the joint distribution. From there the package computes
sound per-constituent bounds, samples the compatible distributions to get
second-order distributions over any query probability, decomposes the
network into cliques for focused elicitation, and diagnoses inconsistent
statement sets with robustness-ranked revision suggestions.
"""

from .bounds import BoundsBox, BoundsResult, extract_linear, preprocess, probe_strict, solve_bounds
from .canonical import (
    Constraint,
    ConstraintSystem,
    Polynomial,
    Tolerances,
    compile_axioms,
    compile_statement,
    compile_system,
    eval_constraint,
    normalize,
)
from .consistency import (
    ConsistencyReport,
    diagnose,
    rank_robustness,
    suggest_revision,
)
from .focus import (
    CliqueSet,
    UndirectedGraph,
    decompose,
    extract_cliques,
    family_check,
    moralize,
    triangulate,
)
from .model import (
    Event,
    Network,
    NetworkError,
    UndefinedConditional,
    Variable,
    build_network,
    evaluate_conditional,
    evaluate_prior,
    index_set,
)
from .sampler import (
    SampleSet,
    SecondOrderDistribution,
    draw_simplex,
    expected_value,
    reduce_equalities,
    run_rejection,
    second_order,
)
from .session import (
    RunParams,
    Session,
    SessionStore,
    create_session,
    get_results,
    load_session,
    run_pipeline,
    save_session,
)
from .statements import (
    ParseError,
    Statement,
    format_statement,
    parse_query,
    parse_statements,
    validate,
)

__version__ = "0.1.0"
