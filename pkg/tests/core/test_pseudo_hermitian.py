import logging
import math

import numpy as np
import pytest

from core.errors import ParameterError
from core.numeric_kernel.models import Grid
from core.numeric_kernel.services import norm, smooth_test_functions
from core.pseudo_hermitian.models import SwansonSystem
from core.pseudo_hermitian.services import (
    drift_coefficient,
    hermitize_check,
    hermitized_potential,
    hermitized_spectrum,
    metric,
    pseudo_hermiticity_check,
    remainder_potential,
    rho_kappa,
    similarity_map,
    swanson_apply,
    symmetry_defect,
    to_swanson_eigenfunction,
)
from core.superpotentials.models import ClassSpec
from core.superpotentials.services import build_superpotential, solve_phi
from infra.builtin_profiles import CONSTANT, QUARTIC_GROWTH

LINE = Grid(-8.0, 8.0, 2001)
SPEC = ClassSpec(class_id=1, c=1.0, k0=1.0)
LINEAR_W = build_superpotential(SPEC, solve_phi(SPEC, 0.0, 0.0), antiderivative=lambda mu: 0.5 * mu**2)


def swanson(alpha=0.3, beta=0.1, profile=CONSTANT) -> SwansonSystem:
    return SwansonSystem(profile=profile, superpotential=LINEAR_W, alpha=alpha, beta=beta)


def test_couplings():
    system = swanson()

    assert system.omega == pytest.approx(1.4)
    assert system.omega_plus == pytest.approx(1.8)
    assert system.discriminant == pytest.approx(1.84)
    assert system.bounded_below


def test_inverted_potential_is_reported(caplog):
    with caplog.at_level(logging.WARNING):
        system = swanson(alpha=-1.0, beta=-0.5)

    assert not system.bounded_below
    assert "unbounded below" in caplog.text


def test_constant_mass_coefficients():
    x = np.linspace(-3.0, 3.0, 7)
    system = swanson()

    np.testing.assert_allclose(drift_coefficient(system, x), 0.2 * x, atol=1e-15)
    np.testing.assert_allclose(remainder_potential(system, x), 0.9 * x**2 + 0.1, atol=1e-14)
    np.testing.assert_allclose(hermitized_potential(system)(x), 0.92 * x**2, atol=1e-14)


def test_hermitized_spectrum_is_a_scaled_ladder():
    pairs = hermitized_spectrum(swanson(), LINE, k=3)

    spacing = math.sqrt(1.84)
    values = [pair.value for pair in pairs]
    assert values == pytest.approx([0.5 * spacing, 1.5 * spacing, 2.5 * spacing], abs=1e-3)
    assert values[0] == pytest.approx(0.678233, abs=1e-3)


def test_metric_is_positive():
    zeta = metric(swanson())

    assert zeta.minimum(LINE) > 0.0
    np.testing.assert_allclose(zeta.sample(LINE), np.exp(-0.2 * LINE.points**2), rtol=1e-12)


def test_similarity_map_inverse():
    rho = similarity_map(swanson())

    product = rho.sample(LINE) * rho.inverse().sample(LINE)

    np.testing.assert_allclose(product, 1.0, rtol=1e-12)


@pytest.mark.parametrize("kappa", [2.0, -3.0, 0.5])
def test_rho_kappa_and_rho_minus_kappa_cancel(kappa):
    forward = rho_kappa(kappa, LINEAR_W, CONSTANT)
    backward = rho_kappa(-kappa, LINEAR_W, CONSTANT)

    assert backward.f_kappa == pytest.approx(-forward.f_kappa)
    np.testing.assert_allclose(forward.sample(LINE) * backward.sample(LINE), 1.0, rtol=1e-12)


def test_rho_kappa_needs_a_defined_gamma():
    with pytest.raises(ParameterError):
        rho_kappa(1.0, LINEAR_W, CONSTANT)


def test_hermitization_removes_the_asymmetry():
    system = swanson()
    testset = smooth_test_functions(LINE)

    raw = symmetry_defect(system, testset)
    hermitized = hermitize_check(system, LINE, testset)

    assert hermitized < 1e-3
    assert raw > 100.0 * hermitized


def test_pseudo_hermiticity_with_variable_mass():
    system = swanson(profile=QUARTIC_GROWTH)
    grid = Grid(-2.5, 2.5, 4001)

    assert pseudo_hermiticity_check(system, grid, smooth_test_functions(grid)) < 1e-3


def test_hermitized_eigenfunction_maps_back_to_swanson_eigenfunction():
    system = swanson()
    pair = hermitized_spectrum(system, LINE, k=1)[0]

    psi = to_swanson_eigenfunction(system, pair.state)

    residual = swanson_apply(system, psi) - psi.scaled(pair.value)
    assert norm(residual) / norm(psi) < 5e-3
