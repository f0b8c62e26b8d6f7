from .model import GroupModel, check_group_axioms
from .basic import (
    CyclicGroup,
    DirectProduct,
    FreeAbelianGroup,
    FreeGroup,
    cyclic,
    direct_product,
    free,
    free_abelian,
)
from .wreath import WreathProduct, wreath
from .grigorchuk import GrigorchukGroup, default_depth, grigorchuk
from .ball import (
    BallSpec,
    GroupBall,
    ball,
    check_left_invariance,
    check_subadditivity,
    enumerate_ball,
    growth_series,
)
from .factory import lattice_coordinates, parse_group, parse_space
