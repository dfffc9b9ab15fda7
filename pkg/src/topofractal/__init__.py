"""Exact verification of topological fractals on computable model spaces."""
from .attractor import AttractorRun, invariance_residual, iterate_to_attractor
from .contractivity import (
    ContractionCertificate,
    antipodal_witness,
    check_covering,
    fractalmaps_certificate,
    min_contraction_depth,
    regroup_three_to_two,
    verify_topological_fractal,
)
from .denjoy import (
    BlownUpCircle,
    LiftedSystem,
    build_blowup,
    degenerate_ends_check,
    lift_maps,
    project_p,
    small_preimage_partition,
)
from .errors import ConstructionError, DomainError, InconsistencyError, UsageError
from .maps import (
    Composite,
    Constant,
    CubeAffine,
    CubeHomothety,
    FunctionSystem,
    Piecewise,
    Word,
    check_gluing,
    check_weak_contraction,
    evaluate,
    word_image_diameter,
)
from .spaces import (
    CantorAddress,
    Circle,
    Cube,
    EpsilonNet,
    Interval,
    StructuredInterval,
    build_net,
    cantor_coordinate,
    cantor_stairs,
    distance,
    hausdorff_distance,
    set_diameter,
)
from .systems import (
    build_cantor_interval_system,
    build_circle_system,
    build_cube_system,
    check_circle_claims,
    derived_nine_maps,
    orbit_Q,
)

__version__ = "0.1.0"
