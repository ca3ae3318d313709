"""Alignment-free DNA sequence comparison via prime-product
neighborhood vectors.

Each sequence maps to a 24-component integer vector: nucleotide counts
in sliding windows become exponents of the primes 2, 3, 5, 7 under all
24 prime-to-base assignments, and the per-window products are summed.
Distances between vectors feed UPGMA tree building, and trees can be
compared with normalized Robinson-Foulds and quartet distances.
"""

from .core import (
    BASES,
    MAX_RADIUS,
    PERMUTATIONS,
    PRIMES,
    EncodedSequence,
    Metric,
    PpnParams,
    PpnVector,
    count_histogram,
    distance,
    encode,
    factor_prime_product,
    ppn_vector,
    prime_product,
    window_centers,
    window_count,
    window_counts_at,
    window_product_sum,
    window_products,
)
from .errors import (
    DuplicateIdError,
    DuplicateLeafError,
    EmptySequenceError,
    InputError,
    InvalidCharacterError,
    LeafSetMismatchError,
    MalformedFastaError,
    NewickParseError,
    NonFiniteDistanceError,
    NotSmoothError,
    OutOfRangeError,
    ParamsMismatchError,
    PpnError,
    TooFewLeavesError,
    ValidationError,
)
from .phylo import (
    DistanceMatrix,
    PhyloTree,
    TreeNode,
    from_newick,
    nqd,
    nrf,
    pairwise_matrix,
    read_phylip,
    to_newick,
    upgma,
    write_phylip,
)
from .seqio import SimulationSpec, read_fasta, simulate, write_fasta

__version__ = "0.1.0"

__all__ = [
    "BASES",
    "MAX_RADIUS",
    "PERMUTATIONS",
    "PRIMES",
    "DistanceMatrix",
    "DuplicateIdError",
    "DuplicateLeafError",
    "EmptySequenceError",
    "EncodedSequence",
    "InputError",
    "InvalidCharacterError",
    "LeafSetMismatchError",
    "MalformedFastaError",
    "Metric",
    "NewickParseError",
    "NonFiniteDistanceError",
    "NotSmoothError",
    "OutOfRangeError",
    "ParamsMismatchError",
    "PhyloTree",
    "PpnError",
    "PpnParams",
    "PpnVector",
    "SimulationSpec",
    "TooFewLeavesError",
    "TreeNode",
    "ValidationError",
    "count_histogram",
    "distance",
    "encode",
    "factor_prime_product",
    "from_newick",
    "nqd",
    "nrf",
    "pairwise_matrix",
    "ppn_vector",
    "prime_product",
    "read_fasta",
    "read_phylip",
    "simulate",
    "to_newick",
    "upgma",
    "window_centers",
    "window_count",
    "window_counts_at",
    "window_product_sum",
    "window_products",
    "write_fasta",
    "write_phylip",
]
