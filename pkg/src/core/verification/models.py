import math
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.errors import ConfigError

TOOL_VERSION = "0.1.0"

CHECK_ORDER: Tuple[str, ...] = (
    "potential_offset",
    "ground_annihilation",
    "ground_energy",
    "structure_function",
    "coherent_closed_form",
)

Command = Literal["catalog", "derive", "coherent", "spectrum", "swanson", "verify"]
OutputFormat = Literal["json", "csv", "table"]


class CheckRecord(BaseModel):
    """Outcome of one crosscheck against its tolerance."""

    check: str = Field(..., description="Check id, one of the crosscheck ids")
    entry: str = Field(..., description="Catalog entry the check ran on")
    tolerance: float = Field(..., description="Accepted upper bound for ``measured``")
    measured: Optional[float] = Field(
        default=None, description="Measured deviation; null when the check could not run"
    )
    passed: bool = Field(default=False, alias="pass")
    notes: List[str] = Field(default_factory=list)

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    @field_validator("measured")
    @classmethod
    def _finite_or_none(cls, value: Optional[float]) -> Optional[float]:
        if value is None or not math.isfinite(value):
            return None
        return value

    @classmethod
    def measure(
        cls, check: str, entry: str, tolerance: float, measured: float, notes: Sequence[str] = ()
    ) -> "CheckRecord":
        passed = math.isfinite(measured) and measured <= tolerance
        return cls(
            check=check,
            entry=entry,
            tolerance=tolerance,
            measured=measured,
            passed=passed,
            notes=list(notes),
        )

    def sort_key(self) -> Tuple[str, int]:
        order = CHECK_ORDER.index(self.check) if self.check in CHECK_ORDER else len(CHECK_ORDER)
        return self.entry, order


class ReportSummary(BaseModel):
    total: int = 0
    passed: int = 0
    failed: int = 0

    model_config = ConfigDict(populate_by_name=True, frozen=True)


class VerificationReport(BaseModel):
    """Versioned crosscheck report; byte-stable for a fixed config and tool version."""

    schema_version: int = Field(default=1, alias="schema")
    tool_version: str = Field(default=TOOL_VERSION)
    config: Dict[str, Any] = Field(default_factory=dict, description="Echo of the run config")
    checks: List[CheckRecord] = Field(default_factory=list)
    summary: ReportSummary = Field(default_factory=ReportSummary)

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    @classmethod
    def from_checks(
        cls, checks: Sequence[CheckRecord], config: Optional[Dict[str, Any]] = None
    ) -> "VerificationReport":
        ordered = sorted(checks, key=CheckRecord.sort_key)
        passed = sum(record.passed for record in ordered)
        return cls(
            config=dict(config or {}),
            checks=ordered,
            summary=ReportSummary(total=len(ordered), passed=passed, failed=len(ordered) - passed),
        )

    @classmethod
    def merged(
        cls, reports: Sequence["VerificationReport"], config: Optional[Dict[str, Any]] = None
    ) -> "VerificationReport":
        checks = [record for report in reports for record in report.checks]
        return cls.from_checks(checks, config)

    @property
    def all_passed(self) -> bool:
        return self.summary.failed == 0 and self.summary.total > 0

    def to_json_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)


class DefaultTolerancesModel(BaseModel):
    """Per-check tolerances; the ground-energy entry is the floor below any fixture value."""

    potential_offset: float = Field(default=1e-9)
    ground_annihilation: float = Field(default=5e-5)
    ground_energy: float = Field(default=1e-3)
    structure_function: float = Field(default=1e-10)
    coherent_closed_form: float = Field(default=1e-9)

    model_config = ConfigDict(populate_by_name=True, frozen=True)


class GridSpec(BaseModel):
    x_lo: Optional[float] = Field(default=None, alias="xmin")
    x_hi: Optional[float] = Field(default=None, alias="xmax")
    n: int = Field(default=4097, ge=64, description="Number of grid points, endpoints included")

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    @model_validator(mode="after")
    def _ordered(self) -> "GridSpec":
        if (self.x_lo is None) != (self.x_hi is None):
            raise ConfigError("the grid needs both xmin and xmax, or neither")
        if self.x_lo is not None and not self.x_lo < self.x_hi:
            raise ConfigError(f"empty grid [{self.x_lo}, {self.x_hi}]")
        return self


class RunConfig(BaseModel):
    """One CLI invocation, from flags or a JSON run-config file."""

    command: Command
    entry: str = Field(default="all", description="Catalog entry name, or 'all' for verify")
    kappa: Optional[float] = None
    k0: Optional[float] = None
    k1: Optional[float] = None
    a: Optional[float] = None
    b: Optional[float] = None
    c: Optional[float] = None
    d: Optional[float] = None
    mass: str = Field(default="constant", description="Bundled mass profile id")
    mass_expr: Optional[str] = Field(default=None, description="m(x) as an expression")
    xi_im: Optional[float] = Field(default=None, description="Im(xi); coherent only")
    grid: GridSpec = Field(default_factory=GridSpec)
    output: Optional[str] = None
    format: OutputFormat = "json"
    eigen_count: int = Field(default=5, ge=1, alias="k")
    alpha: float = 0.0
    beta: float = 0.0
    w_spec: Dict[str, Any] = Field(
        default_factory=lambda: {"class": 1, "c": 1.0, "k0": 1.0}, description="ClassSpec JSON"
    )
    phi0: Tuple[float, float] = Field(default=(0.0, 0.0), description="phi anchor (mu0, phi0)")

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    @model_validator(mode="after")
    def _xi_only_for_coherent(self) -> "RunConfig":
        if self.xi_im is not None and self.command != "coherent":
            raise ConfigError(f"xi is accepted only by 'coherent', not by {self.command!r}")
        return self

    def parameter_overrides(self) -> Dict[str, float]:
        names = ("kappa", "k0", "k1", "a", "b", "c", "d")
        return {name: getattr(self, name) for name in names if getattr(self, name) is not None}

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True, exclude_none=True)
