from .space import (
    DIST_DTYPE,
    FiniteMetricSpace,
    check_metric_axioms,
    graph_space,
    grid_space,
    matrix_space,
    path_space,
    product_space,
)
from .families import (
    MetricFamily,
    SubsetRef,
    is_r_disjoint,
    mesh,
    min_separation,
    family_union,
    restrict_family,
    separations,
    set_distance,
)
from .decomposition import (
    ChainReport,
    Decomposition,
    DecompositionChain,
    DecompositionReport,
    verify_chain,
    verify_decomposition,
)
