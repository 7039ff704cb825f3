import abc
import logging
import math

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq

from core.errors import DomainError, InputError, NumericError
from core.mass_geometry.models import MassProfile, MuImage, ProfileSamples, RealMap
from core.numeric_kernel.models import Grid
from core.numeric_kernel.services import cumulative_integral

logger = logging.getLogger(__name__)

QUADRATURE_TOLERANCE = 1e-10
MAX_HALVINGS = 16
MAX_DOUBLINGS = 64
DIFFERENCE_STEP = 1e-4
NEWTON_POLISH_STEPS = 4


class ExpressionCompiler(abc.ABC):
    @abc.abstractmethod
    def compile(self, source: str) -> RealMap:
        """Turn an expression in ``x`` into a vectorized callable."""


def _check_domain(profile: MassProfile, x) -> np.ndarray:
    values = np.asarray(x, dtype=float)
    lo, hi = profile.domain
    if not np.all(np.isfinite(values)) or np.any(values < lo) or np.any(values > hi):
        raise DomainError(
            f"x outside the domain {profile.domain} of profile {profile.id!r}"
        )
    return values


def _shaped(values: np.ndarray, like):
    return float(values) if np.ndim(like) == 0 else values


def _sqrt_mass(profile: MassProfile) -> RealMap:
    return lambda y: np.sqrt(profile.m(y))


def u_of_x(profile: MassProfile, x):
    """U(x) = m(x)^(-1/4)."""
    values = _check_domain(profile, x)
    mass = np.asarray(profile.m(values), dtype=float)
    if not np.all(mass > 0.0):
        raise InputError(f"profile {profile.id!r} has a non-positive mass sample")
    return _shaped(mass**-0.25, x)


def simpson_to_tolerance(
    fn: RealMap, lo: float, hi: float, tolerance: float = QUADRATURE_TOLERANCE
) -> float:
    """Composite Simpson with interval halving until the relative change drops below ``tolerance``."""
    if lo == hi:
        return 0.0
    panels = 16
    previous = float(simpson(fn(np.linspace(lo, hi, panels + 1)), dx=(hi - lo) / panels))
    change = math.inf
    for _ in range(MAX_HALVINGS):
        panels *= 2
        current = float(
            simpson(fn(np.linspace(lo, hi, panels + 1)), dx=(hi - lo) / panels)
        )
        change = abs(current - previous) / max(abs(current), np.finfo(float).tiny)
        if change <= tolerance:
            return current
        previous = current
    raise NumericError(
        f"quadrature on [{lo}, {hi}] stalled at relative change {change:.3e}",
        achieved_tolerance=change,
    )


def mu_of_x(profile: MassProfile, x):
    """mu(x) = int_{anchor}^{x} sqrt(m(y)) dy."""
    values = _check_domain(profile, x)
    if profile.mu_closed is not None:
        return _shaped(np.asarray(profile.mu_closed(values), dtype=float), x)
    if np.ndim(x) != 0:
        return mu_values(profile, values)
    anchor = profile.mu_anchor
    point = float(values)
    integral = simpson_to_tolerance(
        _sqrt_mass(profile), min(anchor, point), max(anchor, point)
    )
    return integral if point >= anchor else -integral


def mu_values(profile: MassProfile, points: np.ndarray) -> np.ndarray:
    """Vectorized mu over many points; Gauss-Legendre panels when no closed form exists."""
    values = _check_domain(profile, points)
    if profile.mu_closed is not None:
        return np.asarray(profile.mu_closed(values), dtype=float)
    return cumulative_integral(_sqrt_mass(profile), values, anchor=profile.mu_anchor)


def _mu_limit(profile: MassProfile, end: float, direction: int) -> float:
    if math.isfinite(end):
        return mu_of_x(profile, end)

    # Sum dyadic pieces; a piece that stops contributing marks a finite limit.
    integrand = _sqrt_mass(profile)
    anchor = profile.mu_anchor
    total = 0.0
    inner = anchor
    for k in range(MAX_DOUBLINGS):
        outer = anchor + direction * 2.0**k
        piece = simpson_to_tolerance(integrand, min(inner, outer), max(inner, outer))
        total += direction * piece
        if k > 4 and piece <= QUADRATURE_TOLERANCE * (1.0 + abs(total)):
            logger.debug("mu-image end of %s converged to %.12g", profile.id, total)
            return total
        inner = outer
    return direction * math.inf


def mu_image(profile: MassProfile) -> MuImage:
    if profile.mu_limits is not None:
        return MuImage(*profile.mu_limits)
    lo, hi = profile.domain
    return MuImage(_mu_limit(profile, lo, -1), _mu_limit(profile, hi, 1))


def x_of_mu(profile: MassProfile, mu: float) -> float:
    """Inverse coordinate by Brent's method, bracketing outward from the anchor."""
    if profile.x_of_mu_closed is not None:
        return float(profile.x_of_mu_closed(np.asarray(mu, dtype=float)))

    image = mu_image(profile)
    if not image.mu_lo <= mu <= image.mu_hi:
        raise DomainError(f"mu={mu} outside the image {image.as_tuple()} of {profile.id!r}")

    lo, hi = profile.domain
    anchor = profile.mu_anchor
    direction = 1.0 if mu >= 0.0 else -1.0
    limit = hi if direction > 0 else lo
    near, step = anchor, 1.0
    while True:
        far = anchor + direction * step
        if (far - limit) * direction >= 0.0:
            far = limit
        if (mu_of_x(profile, far) - mu) * direction >= 0.0:
            break
        if far == limit:
            return float(limit)
        near, step = far, 2.0 * step

    a, b = sorted((near, far))
    return float(brentq(lambda y: mu_of_x(profile, y) - mu, a, b, xtol=1e-14, rtol=1e-15))


def x_values_of_mu(profile: MassProfile, mus: np.ndarray) -> np.ndarray:
    """Vectorized inverse: table interpolation polished by Newton steps on dmu/dx = sqrt(m)."""
    targets = np.asarray(mus, dtype=float)
    if profile.x_of_mu_closed is not None:
        return np.asarray(profile.x_of_mu_closed(targets), dtype=float)

    x_lo = x_of_mu(profile, float(np.min(targets)))
    x_hi = x_of_mu(profile, float(np.max(targets)))
    if x_lo == x_hi:
        return np.full_like(targets, x_lo)
    table_x = np.linspace(x_lo, x_hi, 8 * targets.size + 1)
    table_mu = mu_values(profile, table_x)
    x = np.interp(targets, table_mu, table_x)
    for _ in range(NEWTON_POLISH_STEPS):
        x = np.clip(x - (mu_values(profile, x) - targets) / np.sqrt(profile.m(x)), x_lo, x_hi)
    return x


def u_derivatives(profile: MassProfile, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """U'(x) and U''(x), closed form when the profile carries them, central differences otherwise."""
    values = np.asarray(x, dtype=float)
    if profile.u_prime is not None and profile.u_second is not None:
        return (
            np.asarray(profile.u_prime(values), dtype=float),
            np.asarray(profile.u_second(values), dtype=float),
        )

    def u(y):
        return np.asarray(profile.m(y), dtype=float) ** -0.25

    step = DIFFERENCE_STEP * np.maximum(1.0, np.abs(values))
    ahead, here, behind = u(values + step), u(values), u(values - step)
    return (ahead - behind) / (2.0 * step), (ahead - 2.0 * here + behind) / step**2


def mass_potential(profile: MassProfile, x):
    """-U^2 U'^2 - U^3 U''/2."""
    u = np.asarray(u_of_x(profile, x), dtype=float)
    u1, u2 = u_derivatives(profile, x)
    return _shaped(-(u**2) * u1**2 - 0.5 * u**3 * u2, x)


def sample_profile(profile: MassProfile, grid: Grid) -> ProfileSamples:
    x = _check_domain(profile, grid.points)
    mass = np.asarray(profile.m(x), dtype=float)
    if not np.all(np.isfinite(mass)) or not np.all(mass > 0.0):
        raise InputError(
            f"profile {profile.id!r} is not strictly positive on [{grid.x_lo}, {grid.x_hi}]"
        )
    u1, u2 = u_derivatives(profile, x)
    return ProfileSamples(
        x=x,
        m=mass,
        u=mass**-0.25,
        mu=mu_values(profile, x),
        u_prime=u1,
        u_second=u2,
    )
