from .strategies import (
    DecompositionStrategy,
    MeshRule,
    carve_pieces,
    conflict_graph,
    greedy_decompose,
    grid_decompose,
)
from .oracle import exact_decompose, exact_min_families
from .chains import (
    SFDCResult,
    build_chain,
    sfdc_chain,
    sfdc_growth,
    single_stage_chain,
)
from .profile import ProfileRow, ProfileTable, dimension_profile, heuristic_width
