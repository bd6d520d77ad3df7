"""Stability, Einstein-Hermitian metrics and moduli computations for quiver representations."""

from .errors import QmodError
from .facets import enumerate_S_d, facet_invariance_audit, facet_signature, integral_weight_in_facet, same_facet
from .filtrations import Filtration, graded_object, hn_filtration, jh_filtration, s_equivalent
from .io import Instance, emit_instance, parse_instance
from .kempf_ness import FlowReport, deviation, kempf_ness_flow, moment_map_L, moment_identity_residual
from .line_bundle import LineBundleData, character_chi
from .moduli import OrbitOperator, kronecker_moduli_report, moduli_metric
from .quiver import (
    Quiver,
    Representation,
    SubrepWitness,
    build_quiver,
    dim_end,
    dim_hom,
    direct_sum,
    is_isomorphic,
    kronecker_quiver,
    loop_quiver,
    random_representation,
)
from .stability import StabilityOptions, StabilityVerdict, classify_stability
from .weight import Weight, slope

__version__ = "0.1.0"
