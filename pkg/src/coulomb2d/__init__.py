"""Two-dimensional unilateral contact with Coulomb friction in linear elasticity."""

from ._accel import BACKEND
from .elasticity import (
    ElasticModulus,
    InvalidModulus,
    ellipticity_constant,
    isotropic_modulus,
    modulus_from_json,
    rotate_modulus,
)
from .halfspace import (
    HalfSpaceConstants,
    NonInvertibleSystem,
    boundary_alpha,
    char_poly,
    isotropic_constants,
    moment_integrals,
    n2d_constants,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ElasticModulus",
    "HalfSpaceConstants",
    "InvalidModulus",
    "NonInvertibleSystem",
    "boundary_alpha",
    "char_poly",
    "ellipticity_constant",
    "isotropic_constants",
    "isotropic_modulus",
    "moment_integrals",
    "modulus_from_json",
    "n2d_constants",
    "rotate_modulus",
]
