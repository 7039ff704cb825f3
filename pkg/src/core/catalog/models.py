import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.errors import ConfigError
from core.superpotentials.models import ClassSpec, MuMap

SQRT2 = math.sqrt(2.0)

DomainKind = Literal["full-line", "half-line", "interval"]


class EntryParameters(BaseModel):
    """kappa plus the superpotential and ODE parameters as printed for a catalog entry."""

    kappa: float = Field(default=1.0, description="kappa of the reduction, p = kappa + 1")
    k0: float = Field(default=0.0, description="Superpotential parameter k0")
    k1: float = Field(default=0.0, description="Superpotential parameter k1")
    a: float = Field(default=0.0, description="ODE or scale parameter a")
    b: float = Field(default=0.0, description="ODE or scale parameter b")
    c: float = Field(default=0.0, description="ODE or scale parameter c")
    d: float = Field(default=0.0, description="ODE parameter d")
    mu_window: Optional[Tuple[float, float]] = Field(
        default=None, description="mu-interval the entry is evaluated on; entry default if unset"
    )

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    @property
    def p(self) -> float:
        return self.kappa + 1.0


class Fixture(BaseModel):
    """Canonical desk-scale instantiation with the expected ground energy."""

    parameters: EntryParameters
    eps0: float = Field(..., description="Expected ground energy epsilon_0")
    eigen_tolerance: float = Field(
        default=1e-3, description="Accepted gap between the lowest eigenvalue and eps0"
    )

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    @property
    def kappa(self) -> float:
        return self.parameters.kappa


@dataclass(frozen=True)
class CatalogEntry:
    """A catalog system instantiated at concrete parameters, with its closed forms in mu.

    ``spec`` carries the effective (k0, k1) that make the generic class formula
    reproduce the printed W; ``walls`` are the mu locations where W is singular.
    """

    name: str
    class_id: int
    constraint: str
    kappa: float
    spec: ClassSpec
    phi_anchor: Tuple[float, float]
    derived: Dict[str, float]
    phi: MuMap = field(repr=False)
    w: MuMap = field(repr=False)
    potential: MuMap = field(repr=False)
    structure: MuMap = field(repr=False)
    ground_log: MuMap = field(repr=False)
    eps0: float = 0.0
    mu_window: Tuple[float, float] = (-math.inf, math.inf)
    walls: Tuple[float, ...] = ()
    notes: Tuple[str, ...] = ()

    @property
    def p(self) -> float:
        return self.kappa + 1.0

    def modified(self, mu):
        """W~ = (kappa + 1) W."""
        return self.p * self.w(np.asarray(mu, dtype=float))

    def hcs_log(self, mu, xi_kappa: complex) -> np.ndarray:
        """log of e^(sqrt2 xi_kappa W~) times the closed ground factor, without m^(1/4)."""
        values = np.asarray(mu, dtype=float)
        with np.errstate(all="ignore"):
            return SQRT2 * xi_kappa * self.modified(values) + self.ground_log(values)

    def hcs_closed(self, mu, xi_kappa: complex) -> np.ndarray:
        with np.errstate(all="ignore"):
            return np.exp(self.hcs_log(mu, xi_kappa))


@dataclass(frozen=True)
class CatalogDefinition:
    """A named family of the catalog: how to instantiate it and its canonical fixtures."""

    name: str
    title: str
    class_id: int
    constraint: str
    domain_kind: DomainKind
    derive: Callable[[EntryParameters], CatalogEntry] = field(repr=False)
    fixtures: Tuple[Fixture, ...] = ()

    @property
    def canonical(self) -> Fixture:
        return self.fixtures[0]

    def fixture_for(self, kappa: float) -> Fixture:
        for fixture in self.fixtures:
            if fixture.kappa == kappa:
                return fixture
        raise ConfigError(f"catalog entry {self.name!r} has no fixture at kappa={kappa}")

    def listing(self) -> Dict[str, object]:
        canonical = self.canonical.parameters
        return {
            "name": self.name,
            "title": self.title,
            "class": self.class_id,
            "constraint": self.constraint,
            "mu_domain": self.domain_kind,
            "mu_window": list(self.derive(canonical).mu_window),
            "canonical": canonical.model_dump(mode="json", exclude={"mu_window"}),
            "eps0": self.canonical.eps0,
        }
