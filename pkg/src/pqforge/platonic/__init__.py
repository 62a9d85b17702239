"""Types on Platonic vertices, preforbidders and their enumeration."""

from .enumerate import MuTable, PrefbdTriple, cached_mu_table, enumerate_prefbd, equivalence_count, mu_table, mu_table_for_palette
from .preforb import PredecessorSet, PreforbidderWitness, is_preforbidder, predecessors
from .types import (
    COL,
    UNC,
    UNC_ANY,
    UNC_ANY_LABEL,
    WILD,
    WILD_LABEL,
    Label,
    PartialEmbedding,
    PlatonicType,
    coi,
    col,
    colored_portion,
    compatible,
    edgcoi,
    is_legal,
    maxpow,
    nu,
    pow_,
    restriction,
    unc,
    union_types,
)
