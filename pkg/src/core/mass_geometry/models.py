import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from core.errors import InputError

RealMap = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class MuImage:
    """Image of a profile's domain under mu; either end may be infinite."""

    mu_lo: float
    mu_hi: float

    def __post_init__(self) -> None:
        if not self.mu_lo < self.mu_hi:
            raise InputError(f"degenerate mu-image ({self.mu_lo}, {self.mu_hi})")

    def contains(self, lo: float, hi: float) -> bool:
        return self.mu_lo <= lo and hi <= self.mu_hi

    def as_tuple(self) -> Tuple[float, float]:
        return self.mu_lo, self.mu_hi


@dataclass(frozen=True)
class MassProfile:
    """A positive mass function m(x) with U = m^(-1/4) and mu(x) = int sqrt(m) dx.

    Finite domain endpoints are treated as walls and may be sampled; the optional
    closed forms short-circuit quadrature, root finding and finite differences.
    """

    id: str
    m: RealMap
    domain: Tuple[float, float] = (-math.inf, math.inf)
    mu_anchor: float = 0.0
    mu_closed: Optional[RealMap] = field(default=None, repr=False)
    x_of_mu_closed: Optional[RealMap] = field(default=None, repr=False)
    u_prime: Optional[RealMap] = field(default=None, repr=False)
    u_second: Optional[RealMap] = field(default=None, repr=False)
    mu_limits: Optional[Tuple[float, float]] = None
    expression: Optional[str] = None
    uniform: bool = False

    def __post_init__(self) -> None:
        lo, hi = self.domain
        if not lo < hi:
            raise InputError(f"profile {self.id!r} has an empty domain {self.domain}")
        if not lo <= self.mu_anchor <= hi or not math.isfinite(self.mu_anchor):
            raise InputError(
                f"mu anchor {self.mu_anchor} of profile {self.id!r} lies outside {self.domain}"
            )

    def describe(self) -> str:
        if self.expression is not None:
            return f"{self.id} (m(x) = {self.expression})"
        return self.id


@dataclass(frozen=True)
class ProfileSamples:
    """Mass-profile data sampled on the points of a grid."""

    x: np.ndarray
    m: np.ndarray
    u: np.ndarray
    mu: np.ndarray
    u_prime: np.ndarray
    u_second: np.ndarray

    @property
    def mass_potential(self) -> np.ndarray:
        return -(self.u**2) * self.u_prime**2 - 0.5 * self.u**3 * self.u_second
