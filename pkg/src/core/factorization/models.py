from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from core.errors import ParameterError
from core.mass_geometry.models import MassProfile
from core.numeric_kernel.models import SampledFunction
from core.superpotentials.models import Superpotential


@dataclass(frozen=True)
class FactorizedSystem:
    """kappa-reduced PDM system with modified superpotential (kappa + 1) W.

    ``walls`` are mu locations where W is singular; a grid end on one of them is a
    Dirichlet end that carries no samples of W or of the operators.
    """

    profile: MassProfile
    superpotential: Superpotential
    kappa: float
    q1: float = 0.0
    energy: Optional[float] = None
    walls: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kappa == -1.0:
            raise ParameterError(
                "kappa = -1 makes the effective potential vanish identically"
            )

    @property
    def p(self) -> float:
        return self.kappa + 1.0

    @property
    def q(self) -> float:
        # p * q1 + q = 0; q and q1 never reach the operators
        return -self.p * self.q1

    @property
    def delta_kappa(self) -> float:
        return 0.5 * (self.kappa + 1.0)

    def w_mod(self, mu):
        return self.p * self.superpotential(mu)

    def w_mod_mu(self, mu):
        return self.p * self.superpotential.derivative(np.asarray(mu, dtype=float))


@dataclass(frozen=True)
class SystemSamples:
    """A factorized system sampled on a grid; wall samples where W is singular hold NaN."""

    x: np.ndarray
    mu: np.ndarray
    m: np.ndarray
    u: np.ndarray
    w_mod: np.ndarray
    structure: np.ndarray
    effective_potential: np.ndarray
    mass_potential: np.ndarray

    @property
    def u4(self) -> np.ndarray:
        return self.u**4

    @property
    def wall(self) -> np.ndarray:
        return ~np.isfinite(self.w_mod)


@dataclass(frozen=True)
class GroundState:
    psi0: SampledFunction
    norm_constant: float
    energy: Optional[float] = None
    log_shift: float = field(default=0.0, repr=False)
