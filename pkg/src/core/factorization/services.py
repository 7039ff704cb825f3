import logging
import math
from functools import lru_cache
from typing import Callable, Sequence, Tuple

import numpy as np

from core.errors import (
    NormalizabilityError,
    NumericError,
    SingularityError,
    UnsupportedReductionError,
)
from core.factorization.models import FactorizedSystem, GroundState, SystemSamples
from core.mass_geometry.services import mu_values, sample_profile
from core.numeric_kernel.models import Grid, SampledFunction
from core.numeric_kernel.services import (
    build_divergence_hamiltonian,
    derivative,
    integrate,
    inner,
    lowest_eigenpairs,
    norm,
)
from core.superpotentials.models import Superpotential
from core.superpotentials.services import integral_in_mu

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
NORMALIZABILITY_RATIO = 1e-6
WALL_TOLERANCE = 1e-9


def kappa_reduce(alpha: float, beta: float) -> Tuple[float, float]:
    """kappa and p = kappa + 1 for a Swanson pair with one vanishing coupling."""
    if alpha != 0.0 and beta != 0.0:
        raise UnsupportedReductionError(
            f"kappa-reduction needs beta = 0 or alpha = 0, got alpha={alpha}, beta={beta}"
        )
    kappa = alpha if alpha != 0.0 else beta
    return kappa, kappa + 1.0


def wall_mask(mu: np.ndarray, walls: Sequence[float]) -> np.ndarray:
    """End samples of ``mu`` that sit on one of the declared walls."""
    wall = np.zeros(mu.shape, dtype=bool)
    for index in (0, -1):
        wall[index] = any(
            abs(mu[index] - location) <= WALL_TOLERANCE * (1.0 + abs(location))
            for location in walls
        )
    return wall


def evaluate_with_walls(
    fn: Callable[[np.ndarray], np.ndarray], mu: np.ndarray, walls: Sequence[float] = ()
) -> np.ndarray:
    """Evaluate ``fn`` on the interior, and on the two end samples only where it is finite.

    End samples on a declared wall are NaN without evaluating ``fn`` there.
    """
    declared = wall_mask(mu, walls)
    out = np.empty(mu.shape, dtype=float)
    with np.errstate(all="ignore"):
        out[1:-1] = fn(mu[1:-1])
        for index, edge in ((0, mu[:1]), (-1, mu[-1:])):
            if declared[index]:
                out[index] = math.nan
                continue
            try:
                out[index] = fn(edge)[0]
            except SingularityError:
                out[index] = math.nan
    out[~np.isfinite(out)] = math.nan
    return out


def safe_product(weight: np.ndarray, values: np.ndarray) -> np.ndarray:
    """weight * values with singular wall weights contributing nothing."""
    with np.errstate(all="ignore"):
        return np.where(np.isfinite(weight), weight * values, 0.0)


@lru_cache(maxsize=64)
def system_samples(sys: FactorizedSystem, grid: Grid) -> SystemSamples:
    profile = sample_profile(sys.profile, grid)
    mu = profile.mu
    w_mod = evaluate_with_walls(sys.w_mod, mu, sys.walls)
    structure = evaluate_with_walls(sys.w_mod_mu, mu, sys.walls)
    structure[~np.isfinite(w_mod)] = math.nan
    with np.errstate(all="ignore"):
        effective = 0.5 * w_mod**2 - 0.5 * structure + sys.delta_kappa
    samples = SystemSamples(
        x=profile.x,
        mu=mu,
        m=profile.m,
        u=profile.u,
        w_mod=w_mod,
        structure=structure,
        effective_potential=effective,
        mass_potential=profile.mass_potential,
    )
    for array in vars(samples).values():
        array.setflags(write=False)
    return samples


def _ladder(sys: FactorizedSystem, f: SampledFunction, sign: float) -> SampledFunction:
    samples = system_samples(sys, f.grid)
    flux = derivative(f.with_values(samples.u * f.values)).values
    image = (sign * samples.u * flux + safe_product(samples.w_mod, f.values)) / SQRT2
    # wall samples are Dirichlet ends
    return f.with_values(np.where(samples.wall, 0.0, image))


def apply_annihilation(sys: FactorizedSystem, f: SampledFunction) -> SampledFunction:
    """(1/sqrt2)(U d/dx U + W~) f."""
    return _ladder(sys, f, 1.0)


def apply_creation(sys: FactorizedSystem, f: SampledFunction) -> SampledFunction:
    """(1/sqrt2)(-U d/dx U + W~) f."""
    return _ladder(sys, f, -1.0)


def structure_function(sys: FactorizedSystem) -> Callable:
    """F[x] = (kappa + 1) U^2 W'(x), evaluated as (kappa + 1) dW/dmu at mu(x)."""

    def evaluate(x):
        return sys.w_mod_mu(mu_values(sys.profile, np.atleast_1d(x)))

    return evaluate


def effective_potential(sys: FactorizedSystem) -> Callable:
    """(kappa+1)^2 W^2/2 - (kappa+1) U^2 W'/2 + delta_kappa as a function of x."""

    def evaluate(x):
        mu = mu_values(sys.profile, np.atleast_1d(x))
        g = sys.w_mod(mu)
        return 0.5 * g**2 - 0.5 * sys.w_mod_mu(mu) + sys.delta_kappa

    return evaluate


def _integral_off_walls(w: Superpotential, mu: np.ndarray, wall: np.ndarray) -> np.ndarray:
    integral = np.full(mu.shape, math.nan)
    integral[~wall] = integral_in_mu(w, mu[~wall])
    if not np.all(np.isfinite(integral[~wall])):
        raise NumericError("int W dmu is not finite inside the grid")
    return integral


def integral_with_walls(
    w: Superpotential, mu: np.ndarray, walls: Sequence[float] = ()
) -> np.ndarray:
    """int W dmu on sampled mu, NaN at the end samples where W is singular."""
    return _integral_off_walls(w, mu, ~np.isfinite(evaluate_with_walls(w, mu, walls)))


def integral_on_grid(sys: FactorizedSystem, grid: Grid) -> np.ndarray:
    """int W dmu on the grid, NaN at singular walls."""
    samples = system_samples(sys, grid)
    return _integral_off_walls(sys.superpotential, samples.mu, samples.wall)


def ground_log_profile(sys: FactorizedSystem, grid: Grid) -> np.ndarray:
    """log of m^(1/4) exp(-(kappa+1) int W dmu) on the grid; singular walls carry -inf."""
    samples = system_samples(sys, grid)
    with np.errstate(invalid="ignore"):
        log_psi = 0.25 * np.log(samples.m) - sys.p * integral_on_grid(sys, grid)
    return np.where(np.isnan(log_psi), -math.inf, log_psi)


def _check_walls(grid: Grid, modulus: np.ndarray, vanishing: np.ndarray) -> None:
    # next to a wall the state has to decay into it
    for end, first, second in ((0, 1, 2), (-1, -2, -3)):
        if vanishing[end] and modulus[first] > modulus[second]:
            if modulus[first] >= NORMALIZABILITY_RATIO:
                raise NormalizabilityError(
                    f"state grows into the wall at x = {grid.points[end]}",
                    achieved_tolerance=float(modulus[first]),
                )


def normalized_from_log(
    grid: Grid, log_modulus: np.ndarray, phase_arg: np.ndarray | None = None
) -> Tuple[SampledFunction, float, float]:
    """exp(log_modulus + phase_arg) scaled to unit norm, with the boundary dominance check.

    An end with log modulus -inf is a wall the state vanishes on; the boundary/peak
    ratio is taken over the remaining ends. Returns the state, the log shift taken
    out before exponentiating and the norm of the shifted samples.
    """
    log_modulus = np.where(np.isnan(log_modulus), -math.inf, log_modulus)
    if np.any(np.isposinf(log_modulus)):
        raise NormalizabilityError(f"state diverges on [{grid.x_lo}, {grid.x_hi}]")
    vanishing = np.isneginf(log_modulus)
    shift = float(np.max(log_modulus))
    if not math.isfinite(shift):
        raise NormalizabilityError(f"state vanishes everywhere on [{grid.x_lo}, {grid.x_hi}]")
    modulus = np.exp(log_modulus - shift)

    open_ends = [index for index in (0, -1) if not vanishing[index]]
    edge_ratio = float(np.max(modulus[open_ends])) if open_ends else 0.0
    if edge_ratio >= NORMALIZABILITY_RATIO:
        raise NormalizabilityError(
            f"state is not normalizable on [{grid.x_lo}, {grid.x_hi}]: "
            f"boundary/peak ratio {edge_ratio:.3e}",
            achieved_tolerance=edge_ratio,
        )
    _check_walls(grid, modulus, vanishing)

    values = modulus.astype(complex)
    if phase_arg is not None:
        with np.errstate(all="ignore"):
            phase = np.exp(np.where(vanishing, 0.0, phase_arg))
        values = np.where(vanishing, 0.0, modulus * phase)
    unnormalized = SampledFunction(grid, values)
    size = norm(unnormalized)
    return unnormalized.scaled(1.0 / size), shift, size


def ground_state(sys: FactorizedSystem, grid: Grid) -> GroundState:
    """Normalized m^(1/4) exp(-(kappa+1) int W dmu), nodeless and positive inside the grid."""
    psi0, shift, size = normalized_from_log(grid, ground_log_profile(sys, grid))
    return GroundState(
        psi0=psi0,
        norm_constant=math.exp(-shift) / size,
        energy=sys.energy,
        log_shift=shift,
    )


def hamiltonian_apply_factorized(sys: FactorizedSystem, f: SampledFunction) -> SampledFunction:
    """eta~^dagger eta~ f + delta_kappa f."""
    return apply_creation(sys, apply_annihilation(sys, f)) + f.scaled(sys.delta_kappa)


def hamiltonian_apply_direct(sys: FactorizedSystem, f: SampledFunction) -> SampledFunction:
    """-1/2 (U^4 f')' + (V~ + mass potential) f, with two stencil passes."""
    samples = system_samples(sys, f.grid)
    flux = derivative(f).values * samples.u4
    kinetic = -0.5 * derivative(f.with_values(flux)).values
    potential = safe_product(samples.effective_potential + samples.mass_potential, f.values)
    return f.with_values(np.where(samples.wall, 0.0, kinetic + potential))


def commutator_residual(sys: FactorizedSystem, f: SampledFunction) -> float:
    """||[eta~, eta~^dagger] f - F f|| / ||f||."""
    samples = system_samples(sys, f.grid)
    forward = apply_annihilation(sys, apply_creation(sys, f))
    backward = apply_creation(sys, apply_annihilation(sys, f))
    expected = f.with_values(safe_product(samples.structure, f.values))
    return norm(forward - backward - expected) / norm(f)


def adjointness_defect(sys: FactorizedSystem, f: SampledFunction, g: SampledFunction) -> float:
    """|<g, eta~ f> - <eta~^dagger g, f>| / (||f|| ||g||)."""
    left = inner(g, apply_annihilation(sys, f))
    right = inner(apply_creation(sys, g), f)
    return abs(left - right) / (norm(f) * norm(g))


def factorization_defect(sys: FactorizedSystem, f: SampledFunction) -> float:
    """Relative gap between the factorized and divergence-form Hamiltonians on ``f``."""
    gap = hamiltonian_apply_factorized(sys, f) - hamiltonian_apply_direct(sys, f)
    return norm(gap) / norm(f)


def annihilation_residual(sys: FactorizedSystem, ground: GroundState) -> float:
    """||eta~ psi0|| / ||psi0||."""
    return norm(apply_annihilation(sys, ground.psi0)) / norm(ground.psi0)


def ground_moment(sys: FactorizedSystem, ground: GroundState) -> float:
    """int W~ psi0^2 dx, which vanishes for a normalizable ground state."""
    samples = system_samples(sys, ground.psi0.grid)
    density = np.abs(ground.psi0.values) ** 2
    return integrate(ground.psi0.with_values(safe_product(samples.w_mod, density))).real


def divergence_operator(sys: FactorizedSystem, grid: Grid, potential: np.ndarray | None = None):
    """Symmetric tridiagonal -1/2 d/dx U^4 d/dx + V + mass potential on the grid interior.

    ``potential`` defaults to the effective potential of the system.
    """
    samples = system_samples(sys, grid)
    v = samples.effective_potential if potential is None else potential
    total = SampledFunction(grid, np.nan_to_num(v + samples.mass_potential))
    return build_divergence_hamiltonian(SampledFunction(grid, samples.u4), total)


def positivity_margin(sys: FactorizedSystem, grid: Grid) -> float:
    """Lowest eigenvalue of the discretized eta~^dagger eta~; non-negative up to O(h^2)."""
    lowest = lowest_eigenpairs(divergence_operator(sys, grid), 1)[0]
    return lowest.value - sys.delta_kappa


def ladder_commutator_residuals(sys: FactorizedSystem, f: SampledFunction) -> Tuple[float, float]:
    """Residuals of [h~, eta~^dagger] = eta~^dagger F and [h~, eta~] = -F eta~ on ``f``."""
    samples = system_samples(sys, f.grid)

    def h(g):
        return hamiltonian_apply_factorized(sys, g)

    def times_f(g):
        return g.with_values(safe_product(samples.structure, g.values))

    raising = h(apply_creation(sys, f)) - apply_creation(sys, h(f))
    raising_gap = raising - apply_creation(sys, times_f(f))
    lowering = h(apply_annihilation(sys, f)) - apply_annihilation(sys, h(f))
    lowering_gap = lowering + times_f(apply_annihilation(sys, f))
    size = norm(f)
    return norm(raising_gap) / size, norm(lowering_gap) / size
