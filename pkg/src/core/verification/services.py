import abc
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Mapping, Optional, Sequence

from core.catalog.models import CatalogDefinition, Fixture
from core.mass_geometry.models import MassProfile
from core.verification.models import DefaultTolerancesModel, VerificationReport

VerifierFactory = Callable[[Mapping[str, float]], "EntryVerifier"]


@dataclass(frozen=True)
class VerificationJob:
    """One catalog fixture to crosscheck on one mass profile."""

    definition: CatalogDefinition
    fixture: Fixture
    profile: MassProfile = field(repr=False)
    n: int = 4097
    xi_im: float = 0.3

    @property
    def name(self) -> str:
        return self.definition.name


def effective_tolerances(
    tolerances: Mapping[str, float], fixture: Fixture
) -> DefaultTolerancesModel:
    """Configured tolerances; the ground-energy one is raised to the fixture's when larger."""
    merged = DefaultTolerancesModel(**dict(tolerances))
    ground_energy = max(merged.ground_energy, fixture.eigen_tolerance)
    return merged.model_copy(update={"ground_energy": ground_energy})


class EntryVerifier(abc.ABC):
    """Abstract base for verifiers that crosscheck one catalog fixture."""

    def __init__(self, tolerances: Mapping[str, float]) -> None:
        self._tolerances: Dict[str, float] = dict(tolerances)

    @property
    def tolerances(self) -> Mapping[str, float]:
        return self._tolerances

    @abc.abstractmethod
    async def verify(self, job: VerificationJob) -> VerificationReport | Exception:
        """Run every crosscheck of the job's fixture."""


class CrosscheckBuilder:
    """Builder that merges configured tolerances and delegates to an EntryVerifier."""

    DEFAULT_TOLERANCES_MODEL = DefaultTolerancesModel()

    def __init__(
        self,
        tolerances: Optional[Mapping[str, float] | DefaultTolerancesModel] = None,
        verifier_factory: VerifierFactory | None = None,
    ) -> None:
        defaults = self.DEFAULT_TOLERANCES_MODEL.model_dump(mode="python")
        if tolerances is None:
            self.tolerances = defaults
        elif isinstance(tolerances, DefaultTolerancesModel):
            self.tolerances = tolerances.model_dump(mode="python")
        else:
            self.tolerances = {**defaults, **dict(tolerances)}

        self._verifier_factory = verifier_factory

    def build_verifier(self) -> EntryVerifier:
        return self._verifier_factory(tolerances=self.tolerances)

    async def verify(self, job: VerificationJob) -> VerificationReport | Exception:
        verifier = self.build_verifier()
        return await verifier.verify(job)


class ReportWriter(abc.ABC):
    """Renders reports and sample tables in the CLI output formats."""

    @abc.abstractmethod
    def render_report(self, report: VerificationReport, fmt: str) -> str:
        """Render a verification report as json, csv or table text."""

    @abc.abstractmethod
    def render_rows(
        self,
        rows: Sequence[Mapping[str, Any]] | Mapping[str, Sequence[Any]],
        fmt: str,
        header: Sequence[str] = (),
    ) -> str:
        """Render sample columns or listing rows; ``header`` lines become leading comments."""

    @abc.abstractmethod
    def render_json(self, payload: Mapping[str, Any]) -> str:
        """Deterministic JSON rendering of a payload."""
