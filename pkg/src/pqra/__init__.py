"""Resource-bounded circuit description: type checker, interpreter, metrics.

The package type-checks a linear, index-polymorphic circuit language against
pluggable size metrics (width, gate counts, depth, ...), producing parametric
upper bounds, and can then execute programs to concrete circuits whose
measured sizes are compared against those bounds.
"""

from .checker import CheckStrategy, Checker, TypeCheckError, check_program
from .circuits import (
    Circuit,
    GATES,
    oracle_depth,
    oracle_gatecount,
    oracle_gatecount_all,
    oracle_tcount,
    oracle_width,
    serialize,
)
from .indices import check_entailment, evaluate, pretty_index, simplify
from .profiles import (
    MetricProfile,
    builtin_profiles,
    get_profile,
    validate_cmi_sound,
    validate_local_coherence,
    validate_well_behaved,
)
from .runner import (
    BoundCheck,
    BoundReport,
    RunError,
    RunOutcome,
    builtin_corpus,
    check,
    measure,
    run,
    verify_bounds,
)
from .signatures import Signature, infer_signature
from .surface import Program, SurfaceSyntaxError, parse, parse_term, parse_type, pretty

__all__ = [
    "BoundCheck",
    "BoundReport",
    "CheckStrategy",
    "Checker",
    "Circuit",
    "GATES",
    "MetricProfile",
    "Program",
    "RunError",
    "RunOutcome",
    "Signature",
    "SurfaceSyntaxError",
    "TypeCheckError",
    "builtin_corpus",
    "builtin_profiles",
    "check",
    "check_entailment",
    "check_program",
    "evaluate",
    "get_profile",
    "infer_signature",
    "measure",
    "oracle_depth",
    "oracle_gatecount",
    "oracle_gatecount_all",
    "oracle_tcount",
    "oracle_width",
    "parse",
    "parse_term",
    "parse_type",
    "pretty",
    "pretty_index",
    "run",
    "serialize",
    "simplify",
    "validate_cmi_sound",
    "validate_local_coherence",
    "validate_well_behaved",
    "verify_bounds",
]

__version__ = "0.1.0"
