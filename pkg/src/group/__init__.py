"""유한군 연산 및 표현론 패키지"""

from src.group.core import (
    FiniteGroup,
    GroupValidationReport,
    Irrep,
    build_group,
    complete_orthonormal_basis,
    s3,
    validate_group,
    z2,
)

__all__ = [
    "FiniteGroup",
    "GroupValidationReport",
    "Irrep",
    "build_group",
    "complete_orthonormal_basis",
    "s3",
    "validate_group",
    "z2",
]
