"""Exact-arithmetic cylinder charts and replayable fiber-move certificates
on quadrics, their complements, and smooth intersections of two quadrics."""

from .charts import (
    Chart,
    build_complement_charts,
    complement_cylinder,
    ctsq_normalize,
    hyperbolic_normalize,
    hyperbolic_target,
    quadric_chart,
)
from .errors import (
    EndpointError,
    InputFormatError,
    OutOfDomainError,
    QuadcylError,
    RankTooLowError,
    RetryLimitError,
    SingularPointError,
    TowerError,
    TowerLimitError,
    ZeroDivisorError,
)
from .navigate import (
    MovePath,
    MoveStep,
    VerifyReport,
    connect_complement,
    connect_on_quadric,
    expand_to_unipotent_steps,
    verify_path,
)
from .pencils import (
    Line,
    LineChart,
    Pencil,
    XPath,
    XSegment,
    chart_from_line,
    connect_on_X,
    eacx_build,
    find_line,
    find_line_through,
    pencil_smoothness,
    point_on_intersection,
    polar_degree_audit,
    span_in_X,
    verify_on_X,
)
from .projective import (
    LinearSubspace,
    ProjPoint,
    QuadForm,
    point_on_quadric,
    proj,
    quadform_from_terms,
)
from .tower import Tower, as_scalar, scalar

__all__ = [
    "Chart",
    "EndpointError",
    "InputFormatError",
    "Line",
    "LineChart",
    "LinearSubspace",
    "MovePath",
    "MoveStep",
    "OutOfDomainError",
    "Pencil",
    "ProjPoint",
    "QuadForm",
    "QuadcylError",
    "RankTooLowError",
    "RetryLimitError",
    "SingularPointError",
    "Tower",
    "TowerError",
    "TowerLimitError",
    "VerifyReport",
    "XPath",
    "XSegment",
    "ZeroDivisorError",
    "as_scalar",
    "build_complement_charts",
    "chart_from_line",
    "complement_cylinder",
    "connect_complement",
    "connect_on_X",
    "connect_on_quadric",
    "ctsq_normalize",
    "eacx_build",
    "expand_to_unipotent_steps",
    "find_line",
    "find_line_through",
    "hyperbolic_normalize",
    "hyperbolic_target",
    "pencil_smoothness",
    "point_on_intersection",
    "point_on_quadric",
    "polar_degree_audit",
    "proj",
    "quadform_from_terms",
    "quadric_chart",
    "scalar",
    "span_in_X",
    "verify_on_X",
    "verify_path",
]
