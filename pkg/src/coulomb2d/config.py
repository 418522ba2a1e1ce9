"""Validated run configurations for the command-line front end.

Every model rejects unknown keys.  Physical inputs are nondimensional.
"""

from __future__ import annotations

import math
from typing import Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class IsoModulus(Strict):
    E: float = Field(gt=0)
    nu: float = Field(gt=-1, lt=0.5)
    plane: Literal["strain"] = "strain"


class MandelModulus(Strict):
    mandel: list[float] = Field(min_length=6, max_length=6)
    plane: Literal["strain"] = "strain"


class VoigtModulus(Strict):
    voigt: list[list[float]]
    plane: Literal["strain"] = "strain"

    @field_validator("voigt")
    @classmethod
    def _square(cls, v):
        if len(v) != 3 or any(len(r) != 3 for r in v):
            raise ValueError("voigt stiffness must be 3x3")
        return v


ModulusSpec = Union[IsoModulus, MandelModulus, VoigtModulus]


def modulus_dict(spec) -> dict:
    return spec.model_dump(exclude={"plane"})


class ConstantsSpec(Strict):
    C1: float = Field(gt=0)
    C2: float = 0.0
    C3: float = 0.0
    C4: float = Field(gt=0, default=1.0)


class AngleSweep(Strict):
    n: int = Field(default=13, ge=1, le=100_000)
    start: float = 0.0
    stop: float = math.pi


class NuSweep(Strict):
    E: float = Field(gt=0, default=1.0)
    nu: list[float] = Field(min_length=1)


class ConstantsConfig(Strict):
    modulus: ModulusSpec
    sweep: AngleSweep | None = AngleSweep()
    nu_sweep: NuSweep | None = None
    smoothness: bool = False
    seed: int | None = None


class KernelsConfig(Strict):
    n: list[int] = Field(default=[16, 64, 256, 1024], min_length=1)
    mesh: Literal["uniform", "graded"] = "uniform"
    potential_n: int = Field(default=2000, ge=2)
    potential_mesh: Literal["uniform", "graded"] = "graded"
    potential_sampling: Literal["midpoint", "average"] = "average"
    seed: int | None = None


class GapSpec(Strict):
    kind: Literal["flat", "parabola", "table"]
    params: dict = {}


class SteadySlideConfig(Strict):
    modulus: ModulusSpec | None = None
    constants: ConstantsSpec | None = None
    f: float = Field(ge=0)
    w_sign: Literal[-1, 1] = 1
    gap: GapSpec
    n: int = Field(default=128, ge=1, le=4096)
    mesh: Literal["uniform", "graded"] = "uniform"
    solver: Literal["auto", "psor", "lemke"] = "auto"
    omega: float = Field(default=1.3, gt=0, lt=2)
    tol: float = Field(default=1e-10, gt=0)
    refine: bool = False
    seed: int | None = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.modulus is None) == (self.constants is None):
            raise ValueError("give exactly one of 'modulus' or 'constants'")
        return self


class RectangleSpec(Strict):
    width: float = Field(gt=0, default=2.0)
    height: float = Field(gt=0, default=1.0)
    nx: int = Field(ge=1, default=20)
    ny: int = Field(ge=1, default=10)
    tags: dict[Literal["bottom", "right", "top", "left"], Literal["U", "T", "C"]] = {
        "bottom": "C", "top": "U", "left": "T", "right": "T",
    }


class MeshSpec(Strict):
    file: str | None = None
    rectangle: RectangleSpec | None = None
    tag_map: dict[str, Literal["U", "T", "C"]] | None = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.file is None) == (self.rectangle is None):
            raise ValueError("give exactly one of 'file' or 'rectangle'")
        return self


class LoadSpec(Strict):
    body_force: list[float] = Field(default=[0.0, 0.0], min_length=2, max_length=2)
    traction: list[float] = Field(default=[0.0, 0.0], min_length=2, max_length=2)


class NodalGap(Strict):
    """Gap on contact nodes: ``flat`` value, ``parabola`` in x, or ``table`` over arc length."""

    kind: Literal["flat", "parabola", "table"]
    params: dict = {}


class ContactSpec(Strict):
    gap: float | NodalGap = 0.0
    friction: float = Field(ge=0, default=0.0)
    w_t: float = 0.0


class SolverSpec(Strict):
    tol: float = Field(gt=0, default=1e-12)
    max_iter: int = Field(ge=1, default=500)
    theta: float = Field(gt=0, le=1, default=1.0)


class ContactStepConfig(Strict):
    mesh: MeshSpec
    modulus: ModulusSpec
    loads: LoadSpec = LoadSpec()
    contact: ContactSpec = ContactSpec()
    mode: Literal["isotropic", "oblique"] = "isotropic"
    alpha_override: float | None = None
    solver: SolverSpec = SolverSpec()
    seed: int | None = None


class LoadPath(Strict):
    kind: Literal["constant", "ramp", "cyclic", "table"] = "constant"
    period: int = Field(ge=1, default=10)
    scales: list[float] | None = None


class EvolveConfig(ContactStepConfig):
    steps: int = Field(ge=1, default=2)
    load_path: LoadPath = LoadPath()
    continue_on_failure: bool = False


class OperatorProbeSpec(Strict):
    n_contact: int = Field(ge=3, default=30)
    friction: float = Field(ge=0, default=0.3)
    modulus: ModulusSpec | None = None
    n_pairs: int = Field(ge=1, default=100)
    scale: float = Field(gt=0, default=0.1)
    levels: int = Field(ge=2, default=9)
    oblique: bool = False


class NonexistenceProbeSpec(Strict):
    constants: ConstantsSpec | None = None
    modulus: ModulusSpec | None = None
    f: float = Field(ge=0)
    w_sign: Literal[-1, 1] = 1
    n: int = Field(ge=2, default=64, le=4096)


class ProbeConfig(Strict):
    kind: Literal["operator", "nonexistence"]
    operator: OperatorProbeSpec | None = None
    nonexistence: NonexistenceProbeSpec | None = None
    seed: int | None = None

    @model_validator(mode="after")
    def _section(self):
        if self.kind == "nonexistence" and self.nonexistence is None:
            raise ValueError("kind 'nonexistence' needs a 'nonexistence' section")
        return self


CONFIGS = {
    "constants": ConstantsConfig,
    "kernels": KernelsConfig,
    "steady-slide": SteadySlideConfig,
    "contact-step": ContactStepConfig,
    "evolve": EvolveConfig,
    "probe": ProbeConfig,
}


def json_schema(command: str) -> dict:
    return CONFIGS[command].model_json_schema()
