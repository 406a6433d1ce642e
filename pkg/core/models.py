"""
Pydantic models for run configuration and the reports the pipeline emits.
"""
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.settings import LOG_LEVELS, OUTPUT_FORMATS, VERIFY_LEVELS

SIGN_POLICIES = ["auto", "local", "anchored", "tree"]


class RunConfig(BaseModel):
    """Resolved run options: CLI flag > environment > config.yaml > default."""
    threads: int = Field(default=1, ge=1, description="Worker threads for per-vertex and per-slice work")
    level: str = Field(default="full", description="Verification depth")
    output_format: str = Field(default="text", description="Report format")
    json_indent: int = Field(default=2, ge=0)
    log_level: str = Field(default="INFO")
    sign_policy: str = Field(default="auto")
    memoize: bool = True
    corpus_path: str = Field(default="data/corpus.yaml")
    outer_face: Optional[int] = Field(default=None, ge=0)

    model_config = ConfigDict(str_strip_whitespace=True)

    @field_validator("level")
    @classmethod
    def validate_level(cls, v):
        if v.lower() not in VERIFY_LEVELS:
            raise ValueError(f"Level must be one of: {VERIFY_LEVELS}")
        return v.lower()

    @field_validator("output_format")
    @classmethod
    def validate_format(cls, v):
        if v.lower() not in OUTPUT_FORMATS:
            raise ValueError(f"Format must be one of: {OUTPUT_FORMATS}")
        return v.lower()

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v):
        if v.upper() not in LOG_LEVELS:
            raise ValueError(f"Log level must be one of: {LOG_LEVELS}")
        return v.upper()

    @field_validator("sign_policy")
    @classmethod
    def validate_sign_policy(cls, v):
        if v not in SIGN_POLICIES:
            raise ValueError(f"Sign policy must be one of: {SIGN_POLICIES}")
        return v


class CheckResult(BaseModel):
    """One named certification check."""
    name: str
    passed: bool = True
    checked: int = 0
    failures: List[str] = Field(default_factory=list)

    def fail(self, message: str):
        self.passed = False
        self.failures.append(message)


class VerificationReport(BaseModel):
    """Outcome of certifying one complex (C1-C5)."""
    digest: str
    sign_source: str
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


class HomologyRow(BaseModel):
    h: int
    q: int
    free_rank: int = Field(ge=0)
    torsion: List[int] = Field(default_factory=list)


class FaceStatus(BaseModel):
    """Burnside data for one square of the cube."""
    vertex: List[int]
    directions: List[int]
    ladybug: bool = False
    size: int = 0
    ok: bool = True
    message: Optional[str] = None


class HexagonStatus(BaseModel):
    vertex: List[int]
    directions: List[int]
    ok: bool = True
    message: Optional[str] = None


class BurnsideReport(BaseModel):
    digest: str
    faces: List[FaceStatus] = Field(default_factory=list)
    hexagons: List[HexagonStatus] = Field(default_factory=list)
    inverse_pairs_ok: bool = True
    ladybug_composites_ok: bool = True
    phi: Optional[Dict[str, int]] = None
    phi_error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return (all(f.ok for f in self.faces) and all(h.ok for h in self.hexagons)
                and self.inverse_pairs_ok and self.ladybug_composites_ok and self.phi_error is None)


class DiagramReport(BaseModel):
    """Everything verify records about one corpus entry."""
    name: str
    crossings: int
    poincare: str
    expected: Optional[str] = None
    matches_expected: Optional[bool] = None
    matches_plain: bool = True
    determinant: Optional[int] = None
    matches_determinant: Optional[bool] = None
    # set only for entries declared thin
    thin: Optional[bool] = None
    verification: Optional[VerificationReport] = None
    burnside: Optional[BurnsideReport] = None
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        if self.error or not self.matches_plain:
            return False
        if False in (self.matches_expected, self.matches_determinant, self.thin):
            return False
        if self.verification is not None and not self.verification.passed:
            return False
        return self.burnside is None or self.burnside.passed


class CorpusReport(BaseModel):
    level: str
    diagrams: List[DiagramReport] = Field(default_factory=list)
    metrics: Dict[str, Any] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(d.passed for d in self.diagrams)


class CompareReport(BaseModel):
    digest: str
    phi_found: bool
    entrywise_ok: bool
    homology_equal: bool
    outer_faces_checked: List[int] = Field(default_factory=list)
    outer_face_independent: bool = True
    message: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.phi_found and self.entrywise_ok and self.homology_equal and self.outer_face_independent


class MovieStepReport(BaseModel):
    index: int
    step: str
    source_crossings: int
    target_crossings: int
    induced: Dict[str, List[List[int]]] = Field(default_factory=dict)
