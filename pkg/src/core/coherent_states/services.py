import logging
from typing import Iterable, Tuple

import numpy as np

from core.coherent_states.models import (
    AnnihilationReport,
    CoherentParams,
    DisplacementOperator,
    UncertaintyReport,
)
from core.errors import ParameterError
from core.factorization.models import FactorizedSystem
from core.factorization.services import (
    SQRT2,
    apply_annihilation,
    integral_on_grid,
    normalized_from_log,
    safe_product,
    system_samples,
)
from core.numeric_kernel.models import Grid, SampledFunction
from core.numeric_kernel.services import derivative, inner, integrate, norm

logger = logging.getLogger(__name__)


def gamma_f(kappa: float) -> Tuple[float, float]:
    """gamma(kappa) = 1/kappa and f(kappa) = kappa - 1/kappa."""
    if kappa in (0.0, 1.0, -1.0):
        raise ParameterError(
            f"gamma(kappa) = 1/kappa is defined only for κ≠0,±1 (got kappa={kappa})"
        )
    return 1.0 / kappa, kappa - 1.0 / kappa


def _check_kappa(params: CoherentParams, sys: FactorizedSystem) -> None:
    if params.kappa != sys.kappa:
        raise ParameterError(
            f"coherent parameters carry kappa={params.kappa} but the system has kappa={sys.kappa}"
        )


def w_bar(params: CoherentParams, sys: FactorizedSystem):
    """W-bar = W~ / kappa as a function of mu."""
    _check_kappa(params, sys)
    if params.kappa == 0.0:
        raise ParameterError("W-bar needs kappa != 0")
    return lambda mu: sys.w_mod(mu) / params.kappa


def displacement(params: CoherentParams, sys: FactorizedSystem) -> DisplacementOperator:
    _check_kappa(params, sys)
    return DisplacementOperator(system=sys, xi_kappa=params.xi_kappa)


def _log_m(sys: FactorizedSystem, grid: Grid) -> np.ndarray:
    return 0.25 * np.log(system_samples(sys, grid).m)


def ground_exponents(
    params: CoherentParams, sys: FactorizedSystem, grid: Grid
) -> Tuple[np.ndarray, np.ndarray]:
    """Exponents -kappa int W-bar and -int W-bar of the two ground factors."""
    _check_kappa(params, sys)
    if not params.pseudo_hermitian:
        raise ParameterError("pseudo-Hermitian coherent states need gamma = 1/kappa")
    bar_integral = (sys.p / params.kappa) * integral_on_grid(sys, grid)
    return -params.kappa * bar_integral, -bar_integral


def _bar_phase(params: CoherentParams, sys: FactorizedSystem, grid: Grid) -> np.ndarray:
    w_mod = system_samples(sys, grid).w_mod
    return SQRT2 * params.xi * (w_mod / params.kappa)


def hcs_unnormalized(params: CoherentParams, sys: FactorizedSystem, grid: Grid) -> np.ndarray:
    """m^(1/4) e^(sqrt2 xi W-bar) exp(-kappa int W-bar dmu) without normalization."""
    hcs_exponent, _ = ground_exponents(params, sys, grid)
    log_psi = _log_m(sys, grid) + hcs_exponent
    with np.errstate(all="ignore"):
        values = np.exp(log_psi + _bar_phase(params, sys, grid))
    return np.nan_to_num(values, nan=0.0)


def phcs_unnormalized(params: CoherentParams, sys: FactorizedSystem, grid: Grid) -> np.ndarray:
    """m^(1/4) e^(sqrt2 xi W-bar) exp(-int W-bar dmu) without normalization."""
    _, phcs_exponent = ground_exponents(params, sys, grid)
    log_psi = _log_m(sys, grid) + phcs_exponent
    with np.errstate(all="ignore"):
        values = np.exp(log_psi + _bar_phase(params, sys, grid))
    return np.nan_to_num(values, nan=0.0)


def _normalized(
    grid: Grid, log_modulus: np.ndarray, phase_arg: np.ndarray | None
) -> SampledFunction:
    state, _, _ = normalized_from_log(grid, log_modulus, phase_arg)
    return state


def hcs_evaluate_general(
    params: CoherentParams, sys: FactorizedSystem, grid: Grid
) -> SampledFunction:
    """m^(1/4) e^(sqrt2 (kappa+1) gamma xi W) e^(-(kappa+1) int W dmu), normalized."""
    _check_kappa(params, sys)
    w = system_samples(sys, grid).w_mod / sys.p
    log_modulus = _log_m(sys, grid) - sys.p * integral_on_grid(sys, grid)
    phase_arg = SQRT2 * sys.p * params.gamma * params.xi * w
    return _normalized(grid, log_modulus, phase_arg)


def hcs_evaluate(params: CoherentParams, sys: FactorizedSystem, grid: Grid) -> SampledFunction:
    """Normalized Hermitian coherent state.

    Uses the W-bar encoding when gamma = 1/kappa and the general-gamma form for
    Hermitian-only parameters.
    """
    if not params.pseudo_hermitian:
        return hcs_evaluate_general(params, sys, grid)
    hcs_exponent, _ = ground_exponents(params, sys, grid)
    return _normalized(grid, _log_m(sys, grid) + hcs_exponent, _bar_phase(params, sys, grid))


def phcs_evaluate(params: CoherentParams, sys: FactorizedSystem, grid: Grid) -> SampledFunction:
    """Normalized pseudo-Hermitian coherent state rho_kappa^(-1) |xi>."""
    _, phcs_exponent = ground_exponents(params, sys, grid)
    return _normalized(grid, _log_m(sys, grid) + phcs_exponent, _bar_phase(params, sys, grid))


def _structure_times(sys: FactorizedSystem, f: SampledFunction) -> SampledFunction:
    return f.with_values(safe_product(system_samples(sys, f.grid).structure, f.values))


def phase_rate(params: CoherentParams) -> float:
    """c in |xi> = e^(i c W~) A with A real: sqrt2 Im(xi_kappa) in either encoding."""
    return SQRT2 * params.xi_kappa.imag


def hcs_envelope(params: CoherentParams, sys: FactorizedSystem, grid: Grid) -> SampledFunction:
    """The real envelope A of |xi>, normalized; it is the ground factor for imaginary xi."""
    _check_kappa(params, sys)
    log_modulus = _log_m(sys, grid) - sys.p * integral_on_grid(sys, grid)
    return _normalized(grid, log_modulus, None)


def displacement_identity_check(
    params: CoherentParams, sys: FactorizedSystem, testset: Iterable[SampledFunction]
) -> float:
    """max ||D^-1 eta~ D f - eta~ f - xi_kappa F f|| / ||f|| over the test functions."""
    operator = displacement(params, sys)
    worst = 0.0
    for f in testset:
        conjugated = operator.apply_inverse(apply_annihilation(sys, operator.apply(f)))
        gap = conjugated - apply_annihilation(sys, f) - _structure_times(sys, f).scaled(
            params.xi_kappa
        )
        worst = max(worst, norm(gap) / norm(f))
    return worst


def annihilation_action_check(
    params: CoherentParams, sys: FactorizedSystem, grid: Grid
) -> AnnihilationReport:
    """eta~ |xi> against xi_kappa F |xi>, plus the best constant eigenvalue.

    Everything is taken in the frame of the phase e^(i c W~): the stencil acts on
    the envelope A and the phase is differentiated exactly, U^2 d(c W~)/dx = c F.
    Near a wall with W~ ~ 1/mu the phase oscillates faster than any grid resolves.
    """
    envelope = hcs_envelope(params, sys, grid)
    rate = phase_rate(params)
    lowered = apply_annihilation(sys, envelope) + _structure_times(sys, envelope).scaled(
        1j * rate / SQRT2
    )
    size = norm(envelope)

    expected = _structure_times(sys, envelope).scaled(params.xi_kappa)
    eigenvalue = inner(envelope, lowered) / inner(envelope, envelope)
    return AnnihilationReport(
        identity_residual=norm(lowered - expected) / size,
        constant_eigenvalue=complex(eigenvalue),
        constant_residual=norm(lowered - envelope.scaled(eigenvalue)) / size,
    )


def apply_momentum(sys: FactorizedSystem, f: SampledFunction) -> SampledFunction:
    """Pi_kappa f = -i U d/dx (U f)."""
    u = system_samples(sys, f.grid).u
    return f.with_values(-1j * u * derivative(f.with_values(u * f.values)).values)


def _moments(sys: FactorizedSystem, envelope: SampledFunction, rate: float) -> dict:
    samples = system_samples(sys, envelope.grid)
    density = envelope.with_values(np.abs(envelope.values) ** 2)

    def expectation(weight):
        return integrate(density.with_values(safe_product(weight, density.values))).real

    mean_w = expectation(samples.w_mod)
    var_w = expectation(samples.w_mod**2) - mean_w**2
    # e^(-i c W~) Pi e^(i c W~) A = Pi A + c F A
    moved = apply_momentum(sys, envelope) + _structure_times(sys, envelope).scaled(rate)
    mean_pi = inner(envelope, moved).real
    var_pi = inner(moved, moved).real - mean_pi**2
    return {
        "product": var_w * var_pi,
        "mean_w": mean_w,
        "mean_pi": mean_pi,
        "mean_f": expectation(samples.structure),
    }


def uncertainty_product(
    params: CoherentParams, sys: FactorizedSystem, grid: Grid, extrapolate: bool = True
) -> UncertaintyReport:
    """Var(W~) Var(Pi_kappa) against <F>^2/4.

    With ``extrapolate`` the product is Richardson-extrapolated from this grid
    and its coarsening, removing the h^2 stencil error.
    """
    rate = phase_rate(params)
    fine = _moments(sys, hcs_envelope(params, sys, grid), rate)
    lhs = fine["product"]
    if extrapolate and (grid.n - 1) % 2 == 0 and (grid.n + 1) // 2 >= grid.MIN_POINTS:
        coarse_grid = grid.coarsened()
        coarse = _moments(sys, hcs_envelope(params, sys, coarse_grid), rate)
        lhs = (4.0 * lhs - coarse["product"]) / 3.0

    rhs = 0.25 * fine["mean_f"] ** 2
    ratio = lhs / rhs if rhs != 0.0 else float("inf")
    logger.debug("uncertainty product %.12g vs bound %.12g", lhs, rhs)
    return UncertaintyReport(
        lhs=lhs,
        rhs=rhs,
        ratio=ratio,
        mean_w=fine["mean_w"],
        mean_pi=fine["mean_pi"],
        mean_f=fine["mean_f"],
    )
