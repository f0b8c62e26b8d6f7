from .sparse import SparseL1Vector, point_mass, xi
from .cover import Cover, LebesgueProfile, effective_parameter, lebesgue_number, multiplicity
from .ozawa import OzawaMap, bound_term, ozawa_map
from .construction import (
    Cell,
    StageRecord,
    ThickenedChain,
    WitnessFamily,
    close_pairs,
    thicken_chain,
    thicken_stage,
    witness_from_chain,
    witness_sequence,
)
from .verify import VariationTable, WitnessReport, sup_variation, variation_table, verify_witness
