import logging
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Callable, Sequence

import numpy as np

from core.coherent_states.services import gamma_f
from core.factorization.services import evaluate_with_walls, integral_with_walls, safe_product
from core.mass_geometry.models import MassProfile
from core.mass_geometry.services import (
    mass_potential,
    mu_values,
    sample_profile,
    u_derivatives,
    u_of_x,
)
from core.numeric_kernel.models import Eigenpair, Grid, SampledFunction, TridiagonalSymmetric
from core.numeric_kernel.services import (
    build_divergence_hamiltonian,
    derivative,
    inner,
    lowest_eigenpairs,
    norm,
    second_derivative,
    smooth_test_functions,
)
from core.pseudo_hermitian.models import (
    Metric,
    SimilarityMap,
    SwansonCoefficients,
    SwansonSystem,
)
from core.superpotentials.models import Superpotential

logger = logging.getLogger(__name__)

Operator = Callable[[SampledFunction], SampledFunction]


def _coefficients(
    sys: SwansonSystem,
    u: np.ndarray,
    u1: np.ndarray,
    u2: np.ndarray,
    mu: np.ndarray,
) -> SwansonCoefficients:
    w = evaluate_with_walls(sys.superpotential, mu)
    w_mu = evaluate_with_walls(sys.superpotential.derivative, mu)
    split = sys.alpha - sys.beta
    with np.errstate(all="ignore"):
        drift = split * u**2 * w - 2.0 * u**3 * u1
        remainder = 0.5 * (
            sys.omega * (1.0 - w_mu)
            + sys.omega_plus * w**2
            + split * (2.0 * u * u1 * w + w_mu)
        ) - 0.5 * u**2 * (2.0 * u1**2 + u * u2)
    return SwansonCoefficients(u4=u**4, drift=drift, remainder=remainder)


@lru_cache(maxsize=32)
def swanson_coefficients(sys: SwansonSystem, grid: Grid) -> SwansonCoefficients:
    profile = sample_profile(sys.profile, grid)
    return _coefficients(sys, profile.u, profile.u_prime, profile.u_second, profile.mu)


def drift_coefficient(sys: SwansonSystem, x: np.ndarray) -> np.ndarray:
    """K(x) = (alpha - beta) U^2 W - 2 U^3 U'."""
    return _coefficients_at(sys, x).drift


def remainder_potential(sys: SwansonSystem, x: np.ndarray) -> np.ndarray:
    """R(x), the multiplicative part of the Swanson operator."""
    return _coefficients_at(sys, x).remainder


def _coefficients_at(sys: SwansonSystem, x: np.ndarray) -> SwansonCoefficients:
    points = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.asarray(u_of_x(sys.profile, points), dtype=float)
    u1, u2 = u_derivatives(sys.profile, points)
    return _coefficients(sys, u, u1, u2, mu_values(sys.profile, points))


def swanson_apply(sys: SwansonSystem, f: SampledFunction) -> SampledFunction:
    """H f = -1/2 U^4 f'' + K f' + R f with second-order stencils."""
    coefficients = swanson_coefficients(sys, f.grid)
    kinetic = -0.5 * coefficients.u4 * second_derivative(f).values
    drift = safe_product(coefficients.drift, derivative(f).values)
    return f.with_values(kinetic + drift + safe_product(coefficients.remainder, f.values))


def similarity_map(sys: SwansonSystem) -> SimilarityMap:
    """rho_{alpha,beta} = exp(-(alpha - beta) int W dmu)."""
    return SimilarityMap(
        profile=sys.profile,
        superpotential=sys.superpotential,
        exponent=sys.alpha - sys.beta,
        kind="alpha_beta",
    )


def metric(sys: SwansonSystem) -> Metric:
    return Metric(rho=similarity_map(sys))


def rho_kappa(kappa: float, superpotential: Superpotential, profile: MassProfile) -> SimilarityMap:
    """rho_kappa = exp(-f(kappa) int W dmu) with f(kappa) = kappa - 1/kappa."""
    _, f_kappa = gamma_f(kappa)
    return SimilarityMap(
        profile=profile,
        superpotential=superpotential,
        exponent=f_kappa,
        kind="kappa",
        f_kappa=f_kappa,
    )


def similarity_log(rho: SimilarityMap, grid: Grid) -> np.ndarray:
    mu = mu_values(rho.profile, grid.points)
    return -rho.exponent * integral_with_walls(rho.superpotential, mu)


def _weighted(weight: np.ndarray, f: SampledFunction) -> SampledFunction:
    return f.with_values(safe_product(weight, f.values))


def hermitized_apply(sys: SwansonSystem, g: SampledFunction) -> SampledFunction:
    """h g = rho H (rho^-1 g)."""
    rho = similarity_map(sys).sample(g.grid)
    with np.errstate(divide="ignore"):
        rho_inverse = 1.0 / rho
    return _weighted(rho, swanson_apply(sys, _weighted(rho_inverse, g)))


def _pair_defect(
    operator: Operator,
    testset: Sequence[SampledFunction],
    weight: np.ndarray | None = None,
) -> float:
    def weigh(f):
        return f if weight is None else _weighted(weight, f)

    images = [operator(g) for g in testset]
    worst = 0.0
    for i, j in combinations_with_replacement(range(len(testset)), 2):
        g1, g2 = testset[i], testset[j]
        left = inner(g2, weigh(images[i]))
        right = inner(images[j], weigh(g1))
        worst = max(worst, abs(left - right) / (norm(g1) * norm(g2)))
    return worst


def symmetry_defect(sys: SwansonSystem, testset: Sequence[SampledFunction]) -> float:
    """max |<g2, H g1> - <H g2, g1>| / (||g1|| ||g2||) for H itself."""
    return _pair_defect(lambda g: swanson_apply(sys, g), testset)


def hermitize_check(sys: SwansonSystem, grid: Grid, testset: Sequence[SampledFunction]) -> float:
    """Symmetry defect of rho H rho^-1 over the test pairs."""
    testset = list(testset) or smooth_test_functions(grid)
    return _pair_defect(lambda g: hermitized_apply(sys, g), testset)


def pseudo_hermiticity_check(
    sys: SwansonSystem, grid: Grid, testset: Sequence[SampledFunction]
) -> float:
    """Weak form of H^dagger zeta = zeta H: max |<g2, zeta H g1> - <H g2, zeta g1>|."""
    testset = list(testset) or smooth_test_functions(grid)
    zeta = metric(sys).sample(grid)
    return _pair_defect(lambda g: swanson_apply(sys, g), testset, weight=zeta)


def _effective(sys: SwansonSystem, w, w_mu, mass_term):
    with np.errstate(all="ignore"):
        return (
            0.5 * sys.discriminant * w**2
            - 0.5 * sys.omega * w_mu
            + 0.5 * sys.omega
            + mass_term
        )


def hermitized_potential(sys: SwansonSystem) -> Callable[[np.ndarray], np.ndarray]:
    """V_eff = ((omega^2 - 4 alpha beta)/2) W^2 - (omega/2) W_mu + omega/2 + mass potential."""

    def evaluate(x):
        points = np.atleast_1d(np.asarray(x, dtype=float))
        mu = mu_values(sys.profile, points)
        mass_term = np.asarray(mass_potential(sys.profile, points), dtype=float)
        return _effective(
            sys, sys.superpotential(mu), sys.superpotential.derivative(mu), mass_term
        )

    return evaluate


def hermitized_hamiltonian(sys: SwansonSystem, grid: Grid) -> TridiagonalSymmetric:
    """Divergence-form -1/2 d/dx U^4 d/dx + V_eff on the grid interior."""
    profile = sample_profile(sys.profile, grid)
    potential = _effective(
        sys,
        evaluate_with_walls(sys.superpotential, profile.mu),
        evaluate_with_walls(sys.superpotential.derivative, profile.mu),
        profile.mass_potential,
    )
    return build_divergence_hamiltonian(
        SampledFunction(grid, profile.u**4),
        SampledFunction(grid, np.nan_to_num(potential)),
    )


def hermitized_spectrum(sys: SwansonSystem, grid: Grid, k: int = 1) -> list[Eigenpair]:
    """k lowest eigenpairs of the hermitized operator, real by construction."""
    if not sys.bounded_below:
        logger.warning(
            "spectrum of the inverted hermitized potential is truncation dependent"
        )
    return lowest_eigenpairs(hermitized_hamiltonian(sys, grid), k)


def to_swanson_eigenfunction(sys: SwansonSystem, chi: SampledFunction) -> SampledFunction:
    """psi = rho^-1 chi, an eigenfunction of H for every eigenfunction chi of h."""
    rho = similarity_map(sys).sample(chi.grid)
    with np.errstate(divide="ignore"):
        return _weighted(1.0 / rho, chi)
