import math

import numpy as np
import pytest

from core.catalog.services import canonical_grid, instantiate
from core.errors import NormalizabilityError, ParameterError, UnsupportedReductionError
from core.factorization.models import FactorizedSystem
from core.factorization.services import (
    adjointness_defect,
    annihilation_residual,
    apply_annihilation,
    apply_creation,
    commutator_residual,
    effective_potential,
    factorization_defect,
    ground_moment,
    ground_state,
    hamiltonian_apply_direct,
    kappa_reduce,
    ladder_commutator_residuals,
    normalized_from_log,
    positivity_margin,
    structure_function,
    system_samples,
    wall_mask,
)
from core.numeric_kernel.models import Grid, SampledFunction
from core.numeric_kernel.services import norm, observed_order
from core.superpotentials.models import ClassSpec
from core.superpotentials.services import build_superpotential, solve_phi
from infra.builtin_profiles import CONSTANT, QUARTIC_GROWTH

LINE = Grid(-8.0, 8.0, 2001)


def linear_system(profile=CONSTANT, kappa=0.0) -> FactorizedSystem:
    spec = ClassSpec(class_id=1, c=1.0, k0=1.0)
    w = build_superpotential(spec, solve_phi(spec, 0.0, 0.0), antiderivative=lambda mu: 0.5 * mu**2)
    return FactorizedSystem(profile=profile, superpotential=w, kappa=kappa)


def bump(grid: Grid, centre: float = 0.3) -> SampledFunction:
    return SampledFunction.from_callable(grid, lambda x: np.exp(-((x - centre) ** 2)))


@pytest.mark.parametrize(
    "alpha, beta, expected",
    [(0.3, 0.0, (0.3, 1.3)), (0.0, 0.5, (0.5, 1.5)), (0.0, 0.0, (0.0, 1.0))],
)
def test_kappa_reduce(alpha, beta, expected):
    assert kappa_reduce(alpha, beta) == pytest.approx(expected)


def test_kappa_reduce_needs_a_vanishing_coupling():
    with pytest.raises(UnsupportedReductionError):
        kappa_reduce(0.3, 0.1)


def test_kappa_minus_one_is_rejected():
    with pytest.raises(ParameterError):
        linear_system(kappa=-1.0)


def test_modified_superpotential_scales_with_kappa():
    system = linear_system(kappa=1.0)

    assert system.p == 2.0
    assert system.delta_kappa == 1.0
    assert system.q == 0.0
    np.testing.assert_allclose(system.w_mod(np.array([1.5])), [3.0])


@pytest.mark.parametrize("kappa, expected", [(0.0, 0.5), (1.0, 2.0), (2.0, 4.5)])
def test_oscillator_effective_potential(kappa, expected):
    system = linear_system(kappa=kappa)
    x = np.linspace(-3.0, 3.0, 13)

    np.testing.assert_allclose(effective_potential(system)(x), expected * x**2, atol=1e-12)
    np.testing.assert_allclose(system_samples(system, LINE).effective_potential, expected * LINE.points**2, atol=1e-12)
    np.testing.assert_allclose(structure_function(system)(x), kappa + 1.0)


def test_oscillator_ground_state_is_gaussian():
    system = linear_system()

    ground = ground_state(system, LINE)

    expected = math.pi**-0.25 * np.exp(-0.5 * LINE.points**2)
    np.testing.assert_allclose(ground.psi0.real, expected, atol=1e-6)
    assert ground.norm_constant == pytest.approx(math.pi**-0.25, rel=1e-6)
    assert annihilation_residual(system, ground) < 1e-4
    assert abs(ground_moment(system, ground)) < 1e-10


def test_variable_mass_ground_state_is_annihilated():
    system = linear_system(profile=QUARTIC_GROWTH, kappa=1.0)
    grid = Grid(-3.0, 3.0, 4001)

    ground = ground_state(system, grid)

    assert np.all(ground.psi0.real[1:-1] > 0.0)
    assert annihilation_residual(system, ground) < 1e-3


def test_commutator_is_the_structure_function():
    system = linear_system(kappa=1.0)

    assert commutator_residual(system, bump(LINE)) < 1e-3


def test_creation_is_adjoint_of_annihilation():
    system = linear_system(profile=QUARTIC_GROWTH)
    grid = Grid(-5.0, 5.0, 2001)

    assert adjointness_defect(system, bump(grid), bump(grid, centre=-0.4)) < 1e-4


def test_factorized_and_direct_hamiltonians_agree():
    assert factorization_defect(linear_system(kappa=2.0), bump(LINE)) < 1e-3


def test_variable_mass_factorization_converges_at_second_order():
    system = linear_system(profile=QUARTIC_GROWTH)
    coarse = Grid(-5.0, 5.0, 801)
    grids = [coarse, coarse.refined(), coarse.refined().refined()]

    defects = [factorization_defect(system, bump(grid)) for grid in grids]

    assert defects[0] > defects[1] > defects[2]
    for order in observed_order(defects):
        assert 1.7 < order < 2.3


def test_oscillator_ladder_commutators():
    raising, lowering = ladder_commutator_residuals(linear_system(), bump(LINE))

    assert raising < 1e-3
    assert lowering < 1e-3


@pytest.mark.parametrize("kappa", [0.0, 1.0])
def test_positivity_margin_of_oscillator(kappa):
    assert abs(positivity_margin(linear_system(kappa=kappa), LINE)) < 1e-3


def test_wall_mask_marks_declared_ends_only():
    mu = np.linspace(0.0, math.pi, 11)

    np.testing.assert_array_equal(wall_mask(mu, (0.0,)), [True] + [False] * 10)
    np.testing.assert_array_equal(wall_mask(mu, (0.0, math.pi)), [True] + [False] * 9 + [True])
    assert not wall_mask(mu, (0.5,)).any()


@pytest.mark.parametrize("name", ["eckart", "rosen-morse", "coulomb"])
def test_ladders_vanish_on_wall_samples(catalog, name):
    definition = catalog.get(name)
    system, entry = instantiate(definition, definition.canonical.parameters, CONSTANT)
    grid = canonical_grid(entry, CONSTANT, 1025)
    wall = system_samples(system, grid).wall

    ground = ground_state(system, grid)

    assert wall[0]
    assert ground.psi0.values[0] == 0.0
    assert np.all(apply_annihilation(system, ground.psi0).values[wall] == 0.0)
    assert np.all(apply_creation(system, ground.psi0).values[wall] == 0.0)
    assert np.all(hamiltonian_apply_direct(system, ground.psi0).values[wall] == 0.0)


def test_state_vanishing_on_a_wall_normalizes():
    grid = Grid(0.0, 10.0, 1025)
    x = grid.points
    with np.errstate(divide="ignore"):
        log_modulus = 3.0 * np.log(x) - 3.0 * x

    state, _, _ = normalized_from_log(grid, log_modulus)

    assert state.values[0] == 0.0
    assert norm(state) == pytest.approx(1.0)


def test_state_growing_into_a_wall_is_rejected():
    grid = Grid(0.0, 10.0, 1025)
    x = grid.points
    with np.errstate(divide="ignore"):
        log_modulus = np.where(x == 0.0, -math.inf, -0.5 * np.log(x) - x)

    with pytest.raises(NormalizabilityError):
        normalized_from_log(grid, log_modulus)
