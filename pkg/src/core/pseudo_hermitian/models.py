import logging
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from core.mass_geometry.models import MassProfile
from core.numeric_kernel.models import Grid
from core.superpotentials.models import Superpotential

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SwansonSystem:
    """omega (eta^dagger eta + 1/2) + alpha eta^2 + beta eta^dagger^2 with omega = alpha + beta + 1."""

    profile: MassProfile
    superpotential: Superpotential
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if self.discriminant < 0.0:
            logger.warning(
                "omega^2 - 4 alpha beta = %.6g < 0 for alpha=%s, beta=%s: "
                "the hermitized potential is inverted and its spectrum is unbounded below",
                self.discriminant,
                self.alpha,
                self.beta,
            )

    @property
    def omega(self) -> float:
        return self.alpha + self.beta + 1.0

    @property
    def omega_plus(self) -> float:
        return self.omega + self.alpha + self.beta

    @property
    def discriminant(self) -> float:
        return self.omega**2 - 4.0 * self.alpha * self.beta

    @property
    def bounded_below(self) -> bool:
        return self.discriminant >= 0.0


@dataclass(frozen=True)
class SimilarityMap:
    """rho(x) = exp(-exponent * int W dmu) for a fixed profile and superpotential."""

    profile: MassProfile
    superpotential: Superpotential
    exponent: float
    kind: Literal["alpha_beta", "kappa"]
    f_kappa: Optional[float] = None

    def inverse(self) -> "SimilarityMap":
        return SimilarityMap(
            profile=self.profile,
            superpotential=self.superpotential,
            exponent=-self.exponent,
            kind=self.kind,
            f_kappa=None if self.f_kappa is None else -self.f_kappa,
        )

    def log_sample(self, grid: Grid) -> np.ndarray:
        """log rho on the grid; NaN at singular walls."""
        from core.pseudo_hermitian.services import similarity_log

        return similarity_log(self, grid)

    def sample(self, grid: Grid) -> np.ndarray:
        with np.errstate(all="ignore"):
            return np.exp(self.log_sample(grid))


@dataclass(frozen=True)
class Metric:
    """zeta = rho^2 = exp(-2 (alpha - beta) int W dmu)."""

    rho: SimilarityMap

    def sample(self, grid: Grid) -> np.ndarray:
        with np.errstate(all="ignore"):
            return np.exp(2.0 * self.rho.log_sample(grid))

    def minimum(self, grid: Grid) -> float:
        values = self.sample(grid)
        return float(np.min(values[np.isfinite(values)]))


@dataclass(frozen=True)
class SwansonCoefficients:
    """-1/2 U^4 d2/dx2 + K d/dx + R sampled on a set of points."""

    u4: np.ndarray
    drift: np.ndarray
    remainder: np.ndarray
