from dataclasses import dataclass
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.errors import ParameterError
from core.factorization.models import FactorizedSystem
from core.factorization.services import SQRT2, system_samples
from core.numeric_kernel.models import Grid, SampledFunction


@dataclass(frozen=True)
class CoherentParams:
    """Displacement xi on the imaginary axis together with gamma(kappa) and f(kappa).

    ``f_kappa`` is None for the Hermitian-only construction, which leaves gamma
    free and has no pseudo-Hermitian counterpart.
    """

    xi: complex
    kappa: float
    gamma: float
    f_kappa: Optional[float] = None

    def __post_init__(self) -> None:
        if complex(self.xi).real != 0.0:
            raise ParameterError(
                f"xi must lie on the imaginary axis (Re xi = 0), got {self.xi}"
            )
        object.__setattr__(self, "xi", complex(self.xi))

    @classmethod
    def for_kappa(cls, kappa: float, xi_im: float) -> "CoherentParams":
        from core.coherent_states.services import gamma_f

        gamma, f_kappa = gamma_f(kappa)
        return cls(xi=complex(0.0, xi_im), kappa=kappa, gamma=gamma, f_kappa=f_kappa)

    @classmethod
    def hermitian(cls, kappa: float, xi_im: float, gamma: float = 1.0) -> "CoherentParams":
        return cls(xi=complex(0.0, xi_im), kappa=kappa, gamma=gamma)

    @property
    def xi_kappa(self) -> complex:
        return self.gamma * self.xi

    @property
    def pseudo_hermitian(self) -> bool:
        return self.f_kappa is not None


@dataclass(frozen=True)
class DisplacementOperator:
    """Multiplication by exp(sqrt2 xi_kappa W~(x)), unitary for imaginary xi_kappa."""

    system: FactorizedSystem
    xi_kappa: complex

    def phase(self, grid: Grid) -> np.ndarray:
        w_mod = system_samples(self.system, grid).w_mod
        with np.errstate(all="ignore"):
            phase = np.exp(SQRT2 * self.xi_kappa * w_mod)
        # walls where W~ is singular: the states vanish there anyway
        return np.where(np.isfinite(w_mod), phase, 1.0)

    def apply(self, f: SampledFunction) -> SampledFunction:
        return f.with_values(self.phase(f.grid) * f.values)

    def apply_inverse(self, f: SampledFunction) -> SampledFunction:
        return f.with_values(f.values / self.phase(f.grid))


@dataclass(frozen=True)
class AnnihilationReport:
    identity_residual: float
    constant_eigenvalue: complex
    constant_residual: float


class UncertaintyReport(BaseModel):
    """Generalized position-momentum uncertainty product in a coherent state."""

    lhs: float = Field(..., description="Var(W~) * Var(Pi_kappa)")
    rhs: float = Field(..., description="<F>^2 / 4")
    ratio: float = Field(..., description="lhs / rhs")
    mean_w: float = Field(default=0.0, description="<W~>")
    mean_pi: float = Field(default=0.0, description="<Pi_kappa>")
    mean_f: float = Field(default=0.0, description="<F>, signed")

    model_config = ConfigDict(populate_by_name=True, frozen=True)
