"""
The scenario file: one JSON document describing a system, an initial
condition and what to report about it. Unknown keys are rejected everywhere.
"""
import json
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, ValidationError, model_validator

from .constants import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    MIN_THETA_SAMPLES,
    AuditCondition,
    PrimeReading,
    ReducedForm,
    SystemClass,
)
from .exceptions import ScenarioError
from .generators import CATALOGUE_NAMES
from .symflow import ReferenceSolution
from .systems import CartState, SystemSpec


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)


class SpecModel(StrictModel):
    system_class: SystemClass = Field(alias="class")
    w: str = "0"
    f: Optional[str] = None
    g: Optional[str] = None
    h: Optional[str] = None
    C: Optional[float] = None

    def build(self) -> SystemSpec:
        return SystemSpec.from_strings(
            self.system_class, w=self.w, f=self.f, g=self.g, h=self.h, C=self.C
        )


class InitialCondition(StrictModel):
    x: float
    y: float
    vx: float
    vy: float


class ReportModel(StrictModel):
    forms: List[ReducedForm] = Field(default_factory=lambda: list(ReducedForm))
    # built-in condition names or L^2 profiles in th
    conditions: List[str] = Field(
        default_factory=lambda: list(AuditCondition)
    )
    audit_range: Tuple[float, float] = (math.pi / 6, math.pi / 3)
    audit_samples: int = Field(25, ge=2)
    prime_reading: PrimeReading = PrimeReading.AS_PRINTED


class AnsatzModel(StrictModel):
    expression: str
    unknowns: List[str] = Field(default_factory=list)


class ReferenceModel(StrictModel):
    A: float = ReferenceSolution.A
    B: float = ReferenceSolution.B
    u2: float = ReferenceSolution.u2
    theta_max: float = Field(ReferenceSolution.theta_max, gt=0)
    samples: int = Field(ReferenceSolution.samples, ge=9)

    def build(self) -> ReferenceSolution:
        return ReferenceSolution(self.A, self.B, self.u2, self.theta_max, self.samples)


class SymmetryModel(StrictModel):
    # extra generators by name, in the generator language
    generators: Dict[str, str] = Field(default_factory=dict)
    ansatz: Optional[AnsatzModel] = None
    epsilons: List[float] = Field(default_factory=lambda: [0.01, 0.1])
    tol: float = Field(1e-6, gt=0)
    reference: ReferenceModel = Field(default_factory=ReferenceModel)
    flow_generators: List[str] = Field(default_factory=lambda: list(CATALOGUE_NAMES))
    # a generator name, suffixed ":im" for the imaginary part
    pullback_generator: str = "G3"


class Scenario(StrictModel):
    spec: SpecModel
    ic: InitialCondition
    t_span: Tuple[float, float]
    rtol: float = Field(DEFAULT_RTOL, gt=0)
    atol: float = Field(DEFAULT_ATOL, gt=0)
    theta_ref: Optional[float] = None
    theta_samples: int = Field(201, ge=MIN_THETA_SAMPLES)
    report: ReportModel = Field(default_factory=ReportModel)
    symmetry: SymmetryModel = Field(default_factory=SymmetryModel)

    _system: SystemSpec = PrivateAttr()

    @model_validator(mode="after")
    def check_consistency(self) -> "Scenario":
        if not self.t_span[1] > self.t_span[0]:
            raise ValueError("t_span must be increasing")
        lo, hi = self.report.audit_range
        if not hi > lo:
            raise ValueError("report.audit_range must be increasing")
        # SystemSpec rules raise SpecValidationError, which pydantic passes on
        self._system = self.spec.build()
        return self

    @property
    def system(self) -> SystemSpec:
        return self._system

    @property
    def initial_state(self) -> CartState:
        return CartState(self.t_span[0], self.ic.x, self.ic.y, self.ic.vx, self.ic.vy)


def load_scenario(path: Union[str, Path]) -> Scenario:
    """
    Reads and validates the scenario at ``path``. Malformed JSON and schema
    violations raise ``ScenarioError``; shape-function and class-rule
    failures raise their own configuration errors.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ScenarioError(f"cannot read scenario {str(path)!r}: {e.strerror}")
    except json.JSONDecodeError as e:
        raise ScenarioError(
            f"scenario {str(path)!r} is not valid JSON: {e.msg}", line=e.lineno
        )
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        errors = [
            {"location": ".".join(str(p) for p in error["loc"]), "message": error["msg"]}
            for error in e.errors()
        ]
        raise ScenarioError(
            f"scenario {str(path)!r} failed validation: {errors[0]['message']}",
            errors=errors,
        )
