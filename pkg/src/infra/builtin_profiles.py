import logging
import math
from typing import Dict, Sequence, Tuple

import numpy as np

from core.errors import ConfigError
from core.mass_geometry.models import MassProfile
from core.mass_geometry.repository import MassProfileRepository
from core.mass_geometry.services import ExpressionCompiler

logger = logging.getLogger(__name__)


def _ones(x):
    return np.ones_like(np.asarray(x, dtype=float))


def _zeros(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _identity(x):
    return np.asarray(x, dtype=float)


def _quartic_growth_inverse(mu):
    # real root of x^3 + 3x - 3mu = 0, evaluated on |mu| to avoid cancellation
    magnitude = np.abs(mu)
    a = np.cbrt(1.5 * magnitude + np.sqrt(2.25 * magnitude**2 + 1.0))
    return np.sign(mu) * (a - 1.0 / a)


CONSTANT = MassProfile(
    id="constant",
    m=_ones,
    mu_closed=_identity,
    x_of_mu_closed=_identity,
    u_prime=_zeros,
    u_second=_zeros,
    mu_limits=(-math.inf, math.inf),
    uniform=True,
)

CAUCHY_SQUARED_INVERSE = MassProfile(
    id="cauchy-squared-inverse",
    m=lambda x: 1.0 / (1.0 + x**2) ** 2,
    mu_closed=np.arctan,
    x_of_mu_closed=np.tan,
    u_prime=lambda x: x / np.sqrt(1.0 + x**2),
    u_second=lambda x: (1.0 + x**2) ** -1.5,
    mu_limits=(-0.5 * math.pi, 0.5 * math.pi),
)

QUARTIC_GROWTH = MassProfile(
    id="quartic-growth",
    m=lambda x: (1.0 + x**2) ** 2,
    mu_closed=lambda x: x + x**3 / 3.0,
    x_of_mu_closed=_quartic_growth_inverse,
    u_prime=lambda x: -x * (1.0 + x**2) ** -1.5,
    u_second=lambda x: (2.0 * x**2 - 1.0) * (1.0 + x**2) ** -2.5,
    mu_limits=(-math.inf, math.inf),
)

HALF_LINE_CONSTANT = MassProfile(
    id="half-line-constant",
    m=_ones,
    domain=(0.0, math.inf),
    mu_anchor=0.0,
    mu_closed=_identity,
    x_of_mu_closed=_identity,
    u_prime=_zeros,
    u_second=_zeros,
    mu_limits=(0.0, math.inf),
    uniform=True,
)

BUILTIN_PROFILES: Dict[str, MassProfile] = {
    profile.id: profile
    for profile in (CONSTANT, CAUCHY_SQUARED_INVERSE, QUARTIC_GROWTH, HALF_LINE_CONSTANT)
}


class BuiltinProfileRepository(MassProfileRepository):
    """The four bundled profiles plus expression profiles compiled on demand."""

    def __init__(self, expression_compiler: ExpressionCompiler) -> None:
        self._compiler = expression_compiler

    def get(self, profile_id: str) -> MassProfile:
        try:
            return BUILTIN_PROFILES[profile_id]
        except KeyError:
            raise ConfigError(
                f"unknown mass profile {profile_id!r}; "
                f"expected one of {', '.join(BUILTIN_PROFILES)}"
            ) from None

    def ids(self) -> Sequence[str]:
        return tuple(BUILTIN_PROFILES)

    def from_expression(
        self,
        source: str,
        domain: Tuple[float, float] | None = None,
        mu_anchor: float | None = None,
    ) -> MassProfile:
        domain = domain or (-math.inf, math.inf)
        if mu_anchor is None:
            mu_anchor = 0.0 if domain[0] <= 0.0 <= domain[1] else domain[0]

        mass = self._compiler.compile(source)
        sample = np.asarray(mass(np.array([mu_anchor])), dtype=float)
        if sample.shape != (1,) or not np.isfinite(sample[0]) or sample[0] <= 0.0:
            raise ConfigError(
                f"mass expression {source!r} is not positive at x={mu_anchor}"
            )
        logger.info("using expression mass profile m(x) = %s on %s", source, domain)
        return MassProfile(
            id="expression",
            m=mass,
            domain=domain,
            mu_anchor=mu_anchor,
            expression=source,
        )
