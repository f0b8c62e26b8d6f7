from .growth import (
    GrowthFunction,
    HeuristicResult,
    classify_samples,
    compose_affine,
    growth_equivalent,
    is_subexponential,
    product_growth,
)
from .embedding import (
    PullbackResult,
    PulledChain,
    QIEmbedding,
    actual_radius,
    embedding_from_function,
    identity_embedding,
    is_quasi_isometry,
    pullback_chain,
    pullback_decomposition,
    pullback_family,
    pulled_radius,
)
from .product import ProductChain, product_chain
from .fibering import (
    FiberChain,
    GroupAction,
    StabilizerChain,
    extension_action,
    fiber_chain,
    lamp_window_chain,
    lamplighter_head_action,
    piece_base,
    point_action,
    self_action,
    stabilizer,
)
