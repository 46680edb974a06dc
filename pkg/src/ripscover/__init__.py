"""Vietoris-Rips cover complexes, their persistent homology and interleaving bounds."""
from .bounds import (
    InterleavingReport,
    SparseCertificate,
    ThresholdReport,
    alpha_for_c,
    c_for_alpha,
    compute_R1,
    compute_R2_R3,
    interleaving_check,
    sparse_certify,
    thresholds,
    witness_sets,
)
from .carriers import (
    FilteredCarrier,
    ShiftChainMap,
    check_carrier_acyclic,
    extend_chain_map,
    homology_maps_equal,
    verify_chain_map,
    vertex_map,
    witness_carrier,
)
from .complex import FilteredComplex, restrict_to, rips, rips_cover, subcomplex_at
from .covers import (
    Cover,
    NerveComplex,
    RefinedCover,
    circular_pullback_cover,
    interval_cover,
    knn_cover,
    landmark_cover,
    nerve,
    pullback_cover,
    refine,
    trivial_cover,
)
from .errors import (
    AcyclicityViolation,
    CoverageError,
    DimensionError,
    IntegrityError,
    ResourceCapError,
    RipsCoverError,
)
from .generators import KleinPatchConfig, TorusSpiralConfig, expected_homology, flat_torus_spiral, klein_patches
from .homology import Barcode, PersistenceDiagram, barcode, bottleneck, reduced_betti
from .metric import (
    DissimilaritySpace,
    LandmarkSequence,
    PointCloud,
    euclidean_dissimilarity,
    greedy_landmarks,
    hausdorff,
    tuple_diameter,
)

__version__ = "0.1.0"
