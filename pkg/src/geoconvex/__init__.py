"""Numerical convexity audits for hypersurfaces in semi-Riemannian charts."""

__version__ = "0.1.0"

from .charts import (  # noqa: F401
    Box,
    CausalClass,
    ExprRegion,
    MetricChart,
    causal_class,
    chart_from_config,
    christoffel_at,
    euclidean_chart,
    metric_at,
    minkowski_chart,
    polar_euclidean_chart,
    reissner_nordstrom_chart,
    schwarzschild_chart,
)
from .geodesics import (  # noqa: F401
    BVPSolution,
    GeodesicState,
    Trajectory,
    exp_map,
    integrate_geodesic,
    solve_bvp,
)
from .surfaces import (  # noqa: F401
    LevelSetHypersurface,
    TangentSample,
    grad_phi,
    hessian_phi,
    second_fundamental_form,
    tangent_sample,
)
from .audit import (  # noqa: F401
    ConvexityVerdict,
    ProbeReport,
    geometric_convexity_check,
    infinitesimal_audit,
    local_convexity_probe,
    quasiconv_witness,
)
from .causal import (  # noqa: F401
    CausalSearchParams,
    CausalSearchResult,
    causal_relation,
    lorentzian_length,
    max_causal_geodesic,
)
from .catalog import CatalogEntry, catalog_ids, load_catalog_entry  # noqa: F401
