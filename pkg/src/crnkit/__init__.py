"""crnkit: exact classification, Birch points, mass-action dynamics, and
jet-frame diagnostics for chemical reaction networks."""

__version__ = "0.1.0"
SCHEMA_VERSION = 1

from .network import (
    ParseError,
    Species,
    Complex,
    Reaction,
    Tempering,
    ReactionNetwork,
    StoichiometryInfo,
    InvariantPolyhedron,
    LinkageInfo,
    parse_network,
    serialize_network,
    stoichiometric_subspace,
    linkage_classes,
    reactant_polytope_vertices,
)
from .geometry import (
    ArrangementFace,
    LimitExceeded,
    enumerate_faces,
    lp_strict_feasible,
    max_subset,
    super_chain,
    realize_iterated_max,
)
from .classify import (
    ClassificationReport,
    arrangement_normals,
    classify,
    fast_paths,
    is_endotactic,
    is_strongly_endotactic,
    is_w_endotactic,
    sample_classify,
)
from .birch import (
    BirchSolution,
    NoConvergence,
    ToricRay,
    birch_point,
    estimate_mu,
    g_alpha,
    grad_g_alpha,
    verify_birch_boundary,
)
from .dynamics import (
    RatePolicy,
    SteadyState,
    Trajectory,
    conservation_residual,
    find_steady_state,
    g_along,
    mass_action_rhs,
    simulate,
)
from .jets import (
    Frame,
    JetSchedule,
    ReactionJetClass,
    cutoff_scan,
    domination_monitor,
    extract_unit_jet,
    jets_fundamental_check,
    level_and_type,
    make_frame,
    pull,
)

__all__ = [
    "__version__",
    "SCHEMA_VERSION",
    "ParseError",
    "Species",
    "Complex",
    "Reaction",
    "Tempering",
    "ReactionNetwork",
    "StoichiometryInfo",
    "InvariantPolyhedron",
    "LinkageInfo",
    "parse_network",
    "serialize_network",
    "stoichiometric_subspace",
    "linkage_classes",
    "reactant_polytope_vertices",
    "ArrangementFace",
    "LimitExceeded",
    "enumerate_faces",
    "lp_strict_feasible",
    "max_subset",
    "super_chain",
    "realize_iterated_max",
    "ClassificationReport",
    "arrangement_normals",
    "classify",
    "fast_paths",
    "is_endotactic",
    "is_strongly_endotactic",
    "is_w_endotactic",
    "sample_classify",
    "BirchSolution",
    "NoConvergence",
    "ToricRay",
    "birch_point",
    "estimate_mu",
    "g_alpha",
    "grad_g_alpha",
    "verify_birch_boundary",
    "RatePolicy",
    "SteadyState",
    "Trajectory",
    "conservation_residual",
    "find_steady_state",
    "g_along",
    "mass_action_rhs",
    "simulate",
    "Frame",
    "JetSchedule",
    "ReactionJetClass",
    "cutoff_scan",
    "domination_monitor",
    "extract_unit_jet",
    "jets_fundamental_check",
    "level_and_type",
    "make_frame",
    "pull",
]
