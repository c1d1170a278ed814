"""희소 상태벡터 엔진 패키지"""

from src.engine.measurement import (
    BranchMeasurer,
    Measurer,
    OutcomePath,
    SampleMeasurer,
    enumerate_outcome_paths,
)
from src.engine.state import (
    BranchMode,
    MeasurementOutcome,
    SampleMode,
    SiteOperator,
    SparseState,
    apply_group_controlled,
    apply_left_mul,
    apply_linear,
    apply_operator,
    apply_right_mul,
    apply_site_unitary,
    dump_state,
    inner_product,
    measure,
    product_state,
    projector_expectation,
    prune,
)

__all__ = [
    "BranchMeasurer",
    "BranchMode",
    "MeasurementOutcome",
    "Measurer",
    "OutcomePath",
    "SampleMeasurer",
    "SampleMode",
    "SiteOperator",
    "SparseState",
    "apply_group_controlled",
    "apply_left_mul",
    "apply_linear",
    "apply_operator",
    "apply_right_mul",
    "apply_site_unitary",
    "dump_state",
    "enumerate_outcome_paths",
    "inner_product",
    "measure",
    "product_state",
    "projector_expectation",
    "prune",
]
