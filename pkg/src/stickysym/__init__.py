"""Sticky symmetry groups of flexible hard-sphere clusters.

A cluster of spheres held together by distance constraints can often deform
without breaking any contact.  Two embeddings that differ by a permutation of
identical spheres (possibly composed with an inversion) count as the same
physical state exactly when a path on the constraint manifold connects them.
This package computes the group of such motions, the symmetry number it
implies, and the resulting counting number for distinguishable copies, and
carries out an exhaustive survey of six-sphere clusters built by deleting
bonds from the octahedron and the polytetrahedron.
"""

from .builders import (
    BUILTIN_NAMES,
    builtin_cluster,
    canonical_chain,
    canonical_loop,
    octahedron,
    polytetrahedron,
    toy_region,
    toy_region_endpoints,
)
from .enumeration import (
    SurveyEntry,
    SurveyResult,
    canonical_form,
    enumerate_graphs,
    load_survey,
    relax_off_boundary,
    save_survey,
    survey,
    write_survey_csv,
)
from .errors import (
    ColorRadiiConflictError,
    ConstructionFailedError,
    InfeasibleEndpointError,
    NewtonDivergedError,
    NotAGroupError,
    NotDivisibleError,
    OverlapError,
    RadiiMismatchError,
    RankDeficientError,
    RelaxationFailedError,
    StickySymError,
    TooLargeError,
)
from .geometry import (
    Cluster,
    ClusterConstraints,
    ConstraintSystem,
    Partition,
    apply_pi,
    build_constraint_system,
    detect_contacts,
    distance_matrix,
    load_cluster,
    save_cluster,
)
from .groups import (
    PIGroup,
    PIOperation,
    automorphism_group,
    closure,
    counting_number,
    format_pi,
    parse_pi,
    point_group,
    procrustes_fit,
)
from .manifold import (
    PathConfig,
    PathResult,
    dump_path_csv,
    find_path,
    project_to_manifold,
    sample_configuration,
    tangent_basis,
)
from .symmetry import (
    SymmetryReport,
    colored_symmetry,
    derived_seed,
    load_report,
    radii_symmetry,
    report_from_json,
    report_to_json,
    save_report,
    sticky_symmetry_group,
)

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_NAMES",
    "Cluster",
    "ClusterConstraints",
    "ColorRadiiConflictError",
    "ConstraintSystem",
    "ConstructionFailedError",
    "InfeasibleEndpointError",
    "NewtonDivergedError",
    "NotAGroupError",
    "NotDivisibleError",
    "OverlapError",
    "PIGroup",
    "PIOperation",
    "Partition",
    "PathConfig",
    "PathResult",
    "RadiiMismatchError",
    "RankDeficientError",
    "RelaxationFailedError",
    "StickySymError",
    "SurveyEntry",
    "SurveyResult",
    "SymmetryReport",
    "TooLargeError",
    "apply_pi",
    "automorphism_group",
    "build_constraint_system",
    "builtin_cluster",
    "canonical_chain",
    "canonical_form",
    "canonical_loop",
    "closure",
    "colored_symmetry",
    "counting_number",
    "derived_seed",
    "detect_contacts",
    "distance_matrix",
    "dump_path_csv",
    "enumerate_graphs",
    "find_path",
    "format_pi",
    "load_cluster",
    "load_report",
    "load_survey",
    "octahedron",
    "parse_pi",
    "point_group",
    "polytetrahedron",
    "procrustes_fit",
    "project_to_manifold",
    "radii_symmetry",
    "relax_off_boundary",
    "report_from_json",
    "report_to_json",
    "sample_configuration",
    "save_cluster",
    "save_report",
    "save_survey",
    "sticky_symmetry_group",
    "survey",
    "tangent_basis",
    "toy_region",
    "toy_region_endpoints",
    "write_survey_csv",
]
