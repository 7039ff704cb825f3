import numpy as np
import pytest

from core.coherent_states.models import CoherentParams
from core.coherent_states.services import (
    annihilation_action_check,
    displacement_identity_check,
    gamma_f,
    ground_exponents,
    hcs_evaluate,
    hcs_unnormalized,
    phcs_evaluate,
    phcs_unnormalized,
    uncertainty_product,
    w_bar,
)
from core.catalog.services import canonical_grid, coherent_params_for, instantiate
from core.errors import ParameterError
from core.factorization.models import FactorizedSystem
from core.factorization.services import ground_state
from core.numeric_kernel.models import Grid
from core.numeric_kernel.services import norm, observed_order, smooth_test_functions
from core.superpotentials.models import ClassSpec
from core.superpotentials.services import build_superpotential, solve_phi
from infra.builtin_catalog import BUILTIN_CATALOG
from infra.builtin_profiles import CONSTANT, QUARTIC_GROWTH

LINE = Grid(-8.0, 8.0, 2001)


def linear_system(kappa: float, profile=CONSTANT) -> FactorizedSystem:
    spec = ClassSpec(class_id=1, c=1.0, k0=1.0)
    w = build_superpotential(spec, solve_phi(spec, 0.0, 0.0), antiderivative=lambda mu: 0.5 * mu**2)
    return FactorizedSystem(profile=profile, superpotential=w, kappa=kappa)


def test_gamma_f():
    assert gamma_f(2.0) == pytest.approx((0.5, 1.5))
    assert gamma_f(-0.5) == pytest.approx((-2.0, 1.5))


@pytest.mark.parametrize("kappa", [0.0, 1.0, -1.0])
def test_gamma_f_undefined_at_degenerate_kappa(kappa):
    with pytest.raises(ParameterError, match="κ≠0,±1"):
        gamma_f(kappa)


@pytest.mark.parametrize("kappa", [2.0, -3.0, 0.5, 4.25])
def test_gamma_f_balance(kappa):
    gamma, f_kappa = gamma_f(kappa)

    assert (kappa + 1.0) * gamma + f_kappa == pytest.approx(kappa + 1.0)


def test_params_need_imaginary_xi():
    with pytest.raises(ParameterError):
        CoherentParams(xi=0.2 + 0.3j, kappa=2.0, gamma=0.5)


def test_params_for_kappa():
    params = CoherentParams.for_kappa(2.0, 0.3)

    assert params.pseudo_hermitian
    assert params.xi == 0.3j
    assert params.xi_kappa == pytest.approx(0.15j)
    assert not CoherentParams.hermitian(1.0, 0.3).pseudo_hermitian


def test_mismatched_kappa_is_rejected():
    with pytest.raises(ParameterError):
        hcs_evaluate(CoherentParams.for_kappa(3.0, 0.3), linear_system(2.0), LINE)


def test_hermitian_only_params_have_no_pseudo_hermitian_side():
    params = CoherentParams.hermitian(1.0, 0.3)

    with pytest.raises(ParameterError):
        ground_exponents(params, linear_system(1.0), LINE)


def test_w_bar_divides_by_kappa():
    system = linear_system(2.0)

    bar = w_bar(CoherentParams.for_kappa(2.0, 0.3), system)

    np.testing.assert_allclose(bar(np.array([1.0, -2.0])), [1.5, -3.0])


def test_oscillator_coherent_moduli():
    system = linear_system(2.0)
    params = CoherentParams.for_kappa(2.0, 0.3)
    x = LINE.points

    hcs = hcs_evaluate(params, system, LINE)
    phcs = phcs_evaluate(params, system, LINE)

    np.testing.assert_allclose(np.abs(hcs.values), (3.0 / np.pi) ** 0.25 * np.exp(-1.5 * x**2), atol=1e-6)
    np.testing.assert_allclose(np.abs(phcs.values), (1.5 / np.pi) ** 0.25 * np.exp(-0.75 * x**2), atol=1e-6)


def test_pseudo_state_is_rho_inverse_of_hermitian_state():
    kappa = 2.0
    system = linear_system(kappa, profile=QUARTIC_GROWTH)
    params = CoherentParams.for_kappa(kappa, 0.3)
    grid = Grid(-2.0, 2.0, 801)
    mu = grid.points + grid.points**3 / 3.0

    ratio = phcs_unnormalized(params, system, grid) / hcs_unnormalized(params, system, grid)

    expected = np.exp((kappa - 1.0) * (system.p / kappa) * 0.5 * mu**2)
    np.testing.assert_allclose(ratio.real, expected, rtol=1e-10)
    np.testing.assert_allclose(ratio.imag, 0.0, atol=1e-10)


def test_general_gamma_matches_w_bar_encoding():
    system = linear_system(2.0)

    encoded = hcs_evaluate(CoherentParams.for_kappa(2.0, 0.3), system, LINE)
    general = hcs_evaluate(CoherentParams.hermitian(2.0, 0.3, gamma=0.5), system, LINE)

    np.testing.assert_allclose(general.values, encoded.values, atol=1e-12)


def test_displacement_leaves_modulus_alone():
    system = linear_system(2.0)

    displaced = hcs_evaluate(CoherentParams.for_kappa(2.0, 0.7), system, LINE)
    ground = hcs_evaluate(CoherentParams.for_kappa(2.0, 0.0), system, LINE)

    np.testing.assert_allclose(np.abs(displaced.values), np.abs(ground.values), atol=1e-12)
    assert norm(displaced) == pytest.approx(1.0)


def test_displacement_identity():
    system = linear_system(2.0, profile=QUARTIC_GROWTH)
    grid = Grid(-2.0, 2.0, 4001)

    residual = displacement_identity_check(
        CoherentParams.for_kappa(2.0, 0.3), system, smooth_test_functions(grid)
    )

    assert residual < 1e-3


def test_coherent_state_is_an_annihilation_eigenstate():
    system = linear_system(2.0)
    params = CoherentParams.for_kappa(2.0, 0.3)

    report = annihilation_action_check(params, system, LINE)

    assert report.identity_residual < 1e-3
    # F = 3 on the oscillator, so eta |xi> = 3 xi_kappa |xi>
    assert report.constant_eigenvalue == pytest.approx(0.45j, abs=1e-3)
    assert report.constant_residual < 1e-3


def test_oscillator_saturates_uncertainty_bound():
    report = uncertainty_product(CoherentParams.hermitian(1.0, 0.3), linear_system(1.0), LINE)

    assert report.rhs == pytest.approx(1.0)
    assert report.ratio == pytest.approx(1.0, rel=1e-5)
    assert report.mean_w == pytest.approx(0.0, abs=1e-10)
    assert report.mean_f == pytest.approx(2.0)


def catalog_system(name: str, kappa: float, n: int = 4097):
    definition = BUILTIN_CATALOG[name]
    system, entry = instantiate(definition, definition.fixture_for(kappa).parameters, CONSTANT)
    return system, canonical_grid(entry, CONSTANT, n)


@pytest.mark.parametrize("name", list(BUILTIN_CATALOG))
def test_catalog_coherent_states_are_annihilation_eigenstates(name):
    system, grid = catalog_system(name, 2.0)

    report = annihilation_action_check(coherent_params_for(2.0), system, grid)

    assert report.identity_residual <= 5e-5


@pytest.mark.parametrize("name", list(BUILTIN_CATALOG))
def test_catalog_coherent_modulus_is_the_ground_state(name):
    system, grid = catalog_system(name, 2.0)

    state = hcs_evaluate(coherent_params_for(2.0), system, grid)

    np.testing.assert_allclose(np.abs(state.values), ground_state(system, grid).psi0.values.real, atol=1e-12)


def test_displacement_identity_converges_at_second_order():
    params = coherent_params_for(2.0)
    residuals = []
    for n in (1025, 2049, 4097):
        system, grid = catalog_system("morse", 2.0, n)
        residuals.append(displacement_identity_check(params, system, smooth_test_functions(grid)))

    assert residuals[0] > residuals[1] > residuals[2]
    for order in observed_order(residuals):
        assert 1.7 < order < 2.3


def test_oscillator_uncertainty_ratio_on_the_catalog_grid():
    system, grid = catalog_system("shifted-ho", 1.0)

    report = uncertainty_product(coherent_params_for(1.0), system, grid)

    assert report.ratio == pytest.approx(1.0, rel=1e-6)
