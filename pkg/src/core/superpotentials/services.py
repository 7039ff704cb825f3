import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from core.errors import InputError, SingularityError
from core.numeric_kernel.models import Grid, SampledFunction
from core.numeric_kernel.services import cumulative_integral, derivative
from core.superpotentials.models import ClassSpec, MuMap, PhiFunction, Superpotential

logger = logging.getLogger(__name__)

ODE_RTOL = 1e-12
ODE_ATOL = 1e-12
BLOW_UP = 1e8
DEFAULT_HALF_RANGE = 10.0

LOG2 = math.log(2.0)

WorkingRange = Tuple[float, float]


def _log_cosh(z: np.ndarray) -> np.ndarray:
    return np.logaddexp(z, -z) - LOG2


def _log_abs_sinh(z: np.ndarray) -> np.ndarray:
    magnitude = np.abs(z)
    with np.errstate(divide="ignore"):
        return magnitude + np.log(-np.expm1(-2.0 * magnitude)) - LOG2


def _log_abs(values: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(values))


def _pole_margin(working_range: WorkingRange) -> float:
    lo, hi = working_range
    return 1e-9 * (1.0 + hi - lo)


def _reject_pole(location: float, working_range: Optional[WorkingRange]) -> None:
    if working_range is None:
        return
    lo, hi = working_range
    margin = _pole_margin(working_range)
    if lo + margin < location < hi - margin:
        raise SingularityError("phi blows up inside the working range", location)


def _snap_to_end(location: float, working_range: Optional[WorkingRange]) -> float:
    """A pole within rounding of a range end is placed exactly on that end."""
    if working_range is None:
        return location
    margin = _pole_margin(working_range)
    for end in working_range:
        if abs(location - end) <= margin:
            return float(end)
    return location


def _fixed_point(mu0: float, phi0: float) -> PhiFunction:
    return PhiFunction(
        lambda mu: np.full_like(mu, phi0),
        "fixed-point",
        mu0,
        phi0,
        integral=lambda mu: phi0 * (mu - mu0),
        reciprocal_integral=(lambda mu: (mu - mu0) / phi0) if phi0 != 0.0 else None,
    )


def _tan_pole_at_end(
    a: float, q: float, centre: float, working_range: Optional[WorkingRange]
) -> Optional[float]:
    if working_range is None:
        return None
    for end in working_range:
        n = round((a * q * (end - centre) - 0.5 * math.pi) / math.pi)
        pole = centre + (0.5 * math.pi + n * math.pi) / (a * q)
        if _snap_to_end(pole, working_range) == end:
            return float(end)
    return None


def _riccati_branch(
    a: float,
    b: float,
    c: float,
    mu0: float,
    phi0: float,
    working_range: Optional[WorkingRange],
) -> PhiFunction:
    """Closed-form solution of d(phi)/d(mu) = a phi^2 + b phi + c through (mu0, phi0).

    Every branch carries int phi dmu, and int dmu/phi when b = 0. Poles on a
    working-range end are evaluated relative to that end.
    """
    if a == 0.0 and b == 0.0:
        if c == 0.0:
            return _fixed_point(mu0, phi0)
        return PhiFunction(
            lambda mu: phi0 + c * (mu - mu0),
            "linear",
            mu0,
            phi0,
            integral=lambda mu: phi0 * (mu - mu0) + 0.5 * c * (mu - mu0) ** 2,
            reciprocal_integral=lambda mu: _log_abs(phi0 + c * (mu - mu0)) / c,
        )

    if a == 0.0:
        offset = c / b
        return PhiFunction(
            lambda mu: -offset + (phi0 + offset) * np.exp(b * (mu - mu0)),
            "exponential",
            mu0,
            phi0,
            integral=lambda mu: -offset * (mu - mu0)
            + (phi0 + offset) * np.expm1(b * (mu - mu0)) / b,
        )

    # psi = phi + b/(2a) obeys psi' = a psi^2 - discriminant/(4a)
    shift = b / (2.0 * a)
    psi0 = phi0 + shift
    discriminant = b * b - 4.0 * a * c
    even = shift == 0.0

    if discriminant == 0.0:
        if psi0 == 0.0:
            return _fixed_point(mu0, phi0)
        pole = mu0 + 1.0 / (a * psi0)
        _reject_pole(pole, working_range)
        pole = _snap_to_end(pole, working_range)
        return PhiFunction(
            lambda mu: -1.0 / (a * (mu - pole)) - shift,
            "rational",
            mu0,
            phi0,
            integral=lambda mu: -_log_abs(mu - pole) / a - shift * mu,
            reciprocal_integral=(lambda mu: -0.5 * a * (mu - pole) ** 2) if even else None,
        )

    if discriminant > 0.0:
        r = math.sqrt(discriminant) / (2.0 * abs(a))
        if abs(psi0) == r:
            return _fixed_point(mu0, phi0)
        if abs(psi0) < r:
            centre = mu0 + math.atanh(psi0 / r) / (a * r)
            return PhiFunction(
                lambda mu: -r * np.tanh(a * r * (mu - centre)) - shift,
                "tanh",
                mu0,
                phi0,
                integral=lambda mu: -_log_cosh(a * r * (mu - centre)) / a - shift * mu,
                reciprocal_integral=(
                    lambda mu: -_log_abs_sinh(a * r * (mu - centre)) / (a * r * r)
                )
                if even
                else None,
            )
        centre = mu0 + math.atanh(r / psi0) / (a * r)
        _reject_pole(centre, working_range)
        centre = _snap_to_end(centre, working_range)
        return PhiFunction(
            lambda mu: -r / np.tanh(a * r * (mu - centre)) - shift,
            "coth",
            mu0,
            phi0,
            integral=lambda mu: -_log_abs_sinh(a * r * (mu - centre)) / a - shift * mu,
            reciprocal_integral=(lambda mu: -_log_cosh(a * r * (mu - centre)) / (a * r * r))
            if even
            else None,
        )

    q = math.sqrt(-discriminant) / (2.0 * abs(a))
    centre = mu0 - math.atan(psi0 / q) / (a * q)
    if working_range is not None:
        lo, hi = working_range
        z_lo, z_hi = sorted((a * q * (lo - centre), a * q * (hi - centre)))
        first = math.ceil((z_lo - 0.5 * math.pi) / math.pi)
        for n in (first - 1, first, first + 1):
            pole = 0.5 * math.pi + n * math.pi
            if z_lo < pole < z_hi:
                _reject_pole(centre + pole / (a * q), working_range)

    end_pole = _tan_pole_at_end(a, q, centre, working_range)
    if end_pole is not None:
        # tan(theta) = -cot(theta - pi/2) around the pole on the range end
        return PhiFunction(
            lambda mu: -q / np.tan(a * q * (mu - end_pole)) - shift,
            "tan",
            mu0,
            phi0,
            integral=lambda mu: -_log_abs(np.sin(a * q * (mu - end_pole))) / a - shift * mu,
            reciprocal_integral=(
                lambda mu: _log_abs(np.cos(a * q * (mu - end_pole))) / (a * q * q)
            )
            if even
            else None,
        )
    return PhiFunction(
        lambda mu: q * np.tan(a * q * (mu - centre)) - shift,
        "tan",
        mu0,
        phi0,
        integral=lambda mu: -_log_abs(np.cos(a * q * (mu - centre))) / a - shift * mu,
        reciprocal_integral=(lambda mu: _log_abs(np.sin(a * q * (mu - centre))) / (a * q * q))
        if even
        else None,
    )


def _sinh_parameters(spec: ClassSpec, phi0: float) -> Tuple[float, float, float]:
    """ratio, rate and phase of phi = ratio sinh(rate (mu - mu0) + phase)."""
    ratio = abs(spec.b) / abs(spec.a)
    return ratio, spec.d * abs(spec.a), math.asinh(phi0 / ratio)


def _radical_branch(spec: ClassSpec, mu0: float, phi0: float) -> PhiFunction | None:
    if spec.c != 0.0 or spec.a == 0.0 or spec.b == 0.0:
        return None
    ratio, rate, phase = _sinh_parameters(spec, phi0)

    def integral(mu):
        if rate == 0.0:
            return ratio * math.sinh(phase) * (mu - mu0)
        return ratio / rate * np.cosh(rate * (mu - mu0) + phase)

    return PhiFunction(
        lambda mu: ratio * np.sinh(rate * (mu - mu0) + phase),
        "sinh",
        mu0,
        phi0,
        integral=integral,
    )


def _numeric_branch(
    spec: ClassSpec, mu0: float, phi0: float, working_range: WorkingRange
) -> PhiFunction:
    lo, hi = working_range

    def rhs(_mu, y):
        return spec.rhs(y)

    def blow_up(_mu, y):
        return BLOW_UP - abs(y[0])

    blow_up.terminal = True

    pieces = []
    for end in (lo, hi):
        if end == mu0:
            continue
        solution = solve_ivp(
            rhs,
            (mu0, end),
            [phi0],
            method="RK45",
            rtol=ODE_RTOL,
            atol=ODE_ATOL,
            dense_output=True,
            events=blow_up,
        )
        if solution.status == 1:
            location = float(solution.t_events[0][0])
            _reject_pole(location, working_range)
        if not solution.success and solution.status != 1:
            raise SingularityError(f"ODE integration failed: {solution.message}", end)
        pieces.append((min(mu0, end), max(mu0, end), solution.sol))

    def evaluate(mu):
        values = np.asarray(mu, dtype=float)
        out = np.full_like(values, phi0)
        for piece_lo, piece_hi, dense in pieces:
            mask = (values >= piece_lo) & (values <= piece_hi)
            if np.any(mask):
                out[mask] = dense(values[mask])[0]
        return out

    return PhiFunction(evaluate, "numeric", mu0, phi0)


def solve_phi(
    spec: ClassSpec,
    mu0: float,
    phi0: float,
    working_range: Optional[WorkingRange] = None,
    numeric: bool = False,
) -> PhiFunction:
    """phi through (mu0, phi0); closed form whenever the family admits one.

    ``numeric=True`` forces RK45 integration over ``working_range``.
    """
    if working_range is not None and not working_range[0] < working_range[1]:
        raise InputError(f"empty working range {working_range}")

    if not numeric:
        coefficients = spec.riccati_coefficients()
        if coefficients is not None:
            return _riccati_branch(*coefficients, mu0, phi0, working_range)
        radical = _radical_branch(spec, mu0, phi0)
        if radical is not None:
            return radical

    if working_range is None:
        working_range = (mu0 - DEFAULT_HALF_RANGE, mu0 + DEFAULT_HALF_RANGE)
    logger.debug("integrating class %d ODE numerically over %s", spec.class_id, working_range)
    return _numeric_branch(spec, mu0, phi0, working_range)


def numeric_counterpart(
    spec: ClassSpec, phi: PhiFunction, working_range: WorkingRange
) -> PhiFunction:
    """Numeric solution started from ``phi`` at the midpoint of the working range."""
    mid = 0.5 * (working_range[0] + working_range[1])
    return solve_phi(spec, mid, float(phi(mid)), working_range, numeric=True)


def _first_zero(mu: np.ndarray, mask: np.ndarray) -> float:
    flat_mu = np.broadcast_to(mu, mask.shape).ravel()
    return float(flat_mu[np.argmax(mask.ravel())])


def w_from_phi(spec: ClassSpec, phi: PhiFunction) -> MuMap:
    """W as a function of mu for the family of ``spec``."""

    def class_1(mu):
        return spec.k0 * phi(mu) + spec.k1

    def class_2(mu):
        values = phi(mu)
        zero = values == 0.0
        if np.any(zero):
            raise SingularityError("class 2 superpotential divides by phi = 0", _first_zero(mu, zero))
        return spec.k0 * values + spec.k1 / values

    def class_3(mu):
        values = phi(mu)
        radicand = spec.a**2 * values**2 + spec.b**2
        bad = radicand <= 0.0
        if np.any(bad):
            raise SingularityError("class 3 radicand vanishes", _first_zero(mu, bad))
        return (spec.k0 * values + spec.k1) / np.sqrt(radicand)

    return {1: class_1, 2: class_2, 3: class_3}[spec.class_id]


def w_derivative(spec: ClassSpec, phi: PhiFunction) -> MuMap:
    """dW/dmu through the chain rule and the family ODE, with no differencing."""

    def evaluate(mu):
        values = phi(mu)
        slope = spec.rhs(values)
        if spec.class_id == 1:
            return spec.k0 * slope
        if spec.class_id == 2:
            return (spec.k0 - spec.k1 / values**2) * slope
        radical = np.sqrt(spec.a**2 * values**2 + spec.b**2)
        return (
            spec.k0 / radical - (spec.k0 * values + spec.k1) * spec.a**2 * values / radical**3
        ) * slope

    return evaluate


def class_antiderivative(spec: ClassSpec, phi: PhiFunction) -> Optional[MuMap]:
    """int W dmu from the branch integrals of phi; None when the branch has none."""
    k0, k1 = spec.k0, spec.k1

    if spec.class_id == 1:
        if phi.integral is None:
            return None
        integral = phi.integral
        return lambda mu: k0 * integral(mu) + k1 * mu

    if spec.class_id == 2:
        parts = []
        if k0 != 0.0:
            parts.append((k0, phi.integral))
        if k1 != 0.0:
            parts.append((k1, phi.reciprocal_integral))
        if any(part is None for _, part in parts):
            return None
        return lambda mu: sum((weight * part(mu) for weight, part in parts), np.zeros_like(mu))

    if phi.branch != "sinh":
        return None
    # a^2 phi^2 + b^2 = b^2 cosh^2 on the sinh branch
    ratio, rate, phase = _sinh_parameters(spec, phi.phi0)
    scale = abs(spec.b)
    mu0 = phi.mu0

    def evaluate(mu):
        z = rate * (mu - mu0) + phase
        if rate == 0.0:
            return (k0 * ratio * math.sinh(phase) + k1) / (scale * math.cosh(phase)) * (mu - mu0)
        return (k0 * ratio * _log_cosh(z) + k1 * np.arctan(np.sinh(z))) / (scale * rate)

    return evaluate


def build_superpotential(
    spec: ClassSpec, phi: PhiFunction, antiderivative: Optional[MuMap] = None
) -> Superpotential:
    """W for ``spec`` and ``phi``; the antiderivative defaults to the class-level one."""
    if antiderivative is None:
        antiderivative = class_antiderivative(spec, phi)
    return Superpotential(
        spec=spec,
        phi=phi,
        value=w_from_phi(spec, phi),
        derivative=w_derivative(spec, phi),
        antiderivative=antiderivative,
    )


def integral_in_mu(w: Superpotential, mu: np.ndarray) -> np.ndarray:
    """int W dmu at each entry of ``mu``, up to one additive constant.

    Without a closed antiderivative the integral is anchored at the middle entry.
    """
    if w.antiderivative is not None:
        with np.errstate(all="ignore"):
            return np.asarray(w.antiderivative(mu), dtype=float)
    anchor = float(mu[mu.size // 2])
    return cumulative_integral(w, mu, anchor=anchor)


def ode_residual(spec: ClassSpec, phi: PhiFunction, mu_grid: Grid) -> float:
    """max |d(phi)/d(mu) - RHS(phi)| over the grid with the second-order stencil."""
    samples = SampledFunction.from_callable(mu_grid, phi)
    slope = derivative(samples).real
    return float(np.max(np.abs(slope - spec.rhs(samples.real))))
