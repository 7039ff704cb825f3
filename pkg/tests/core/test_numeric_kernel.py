import math

import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

from core.errors import InputError, NumericError
from core.numeric_kernel.models import Grid, SampledFunction, TridiagonalSymmetric
from core.numeric_kernel.services import (
    build_divergence_hamiltonian,
    cumulative_integral,
    derivative,
    inner,
    integrate,
    lowest_eigenpairs,
    norm,
    normalized,
    observed_order,
    second_derivative,
    smooth_test_functions,
    sturm_count,
)


def _random_tridiagonal(size: int = 200, seed: int = 7) -> TridiagonalSymmetric:
    rng = np.random.default_rng(seed)
    return TridiagonalSymmetric(diag=rng.normal(size=size), offdiag=rng.normal(size=size - 1))


def test_grid_rejects_too_few_points():
    with pytest.raises(InputError):
        Grid(0.0, 1.0, 8)


def test_grid_coarsening_keeps_every_other_point():
    grid = Grid(-1.0, 1.0, 65)

    coarse = grid.coarsened()

    assert coarse.n == 33
    np.testing.assert_allclose(coarse.points, grid.points[::2])
    assert grid.refined().n == 129


def test_derivative_stencils_converge_at_second_order():
    errors_first, errors_second = [], []
    for n in (65, 129, 257):
        f = SampledFunction.from_callable(Grid(0.0, 2.0, n), np.sin)
        errors_first.append(float(np.max(np.abs(derivative(f).real - np.cos(f.x)))))
        errors_second.append(float(np.max(np.abs(second_derivative(f).real + np.sin(f.x)))))

    for order in observed_order(errors_first) + observed_order(errors_second):
        assert order == pytest.approx(2.0, abs=0.2)


def test_integrate_handles_odd_and_even_sample_counts():
    odd = SampledFunction.from_callable(Grid(0.0, 1.0, 257), np.exp)
    even = SampledFunction.from_callable(Grid(0.0, 1.0, 256), np.exp)

    assert integrate(odd).real == pytest.approx(math.e - 1.0, abs=1e-11)
    assert integrate(even).real == pytest.approx(math.e - 1.0, abs=1e-6)


def test_inner_conjugates_the_left_argument():
    f = SampledFunction.from_callable(Grid(-5.0, 5.0, 513), lambda x: np.exp(-(x**2)))

    value = inner(f.scaled(1j), f)

    assert value.real == pytest.approx(0.0, abs=1e-14)
    assert value.imag == pytest.approx(-norm(f) ** 2, rel=1e-12)


def test_normalized_rejects_zero_function():
    with pytest.raises(NumericError):
        normalized(SampledFunction(Grid(0.0, 1.0, 33), np.zeros(33)))


def test_cumulative_integral_reproduces_antiderivative():
    points = np.linspace(-3.0, 4.0, 41)

    values = cumulative_integral(np.cos, points, anchor=0.5)

    np.testing.assert_allclose(values, np.sin(points) - np.sin(0.5), atol=1e-13)


def test_observed_order_of_exact_quarterings():
    assert observed_order([4e-2, 1e-2, 2.5e-3]) == pytest.approx([2.0, 2.0])


def test_smooth_test_functions_vanish_at_grid_ends():
    grid = Grid(-10.0, 10.0, 1025)

    functions = smooth_test_functions(grid)

    assert len(functions) == 5
    for f in functions:
        assert abs(f.values[0]) < 1e-12
        assert abs(f.values[-1]) < 1e-12


def test_lowest_eigenpairs_match_lapack_oracle():
    mat = _random_tridiagonal()
    expected = eigh_tridiagonal(mat.diag, mat.offdiag, eigvals_only=True)[:5]

    pairs = lowest_eigenpairs(mat, 5)

    np.testing.assert_allclose([pair.value for pair in pairs], expected, atol=1e-9)
    for pair in pairs:
        assert pair.residual < 1e-8


def test_sturm_count_matches_lapack_oracle():
    mat = _random_tridiagonal(seed=11)
    eigenvalues = eigh_tridiagonal(mat.diag, mat.offdiag, eigvals_only=True)

    for shift in (-2.0, 0.0, 1.5):
        assert sturm_count(mat, shift) == int(np.sum(eigenvalues < shift))


def test_lowest_eigenpairs_rejects_bad_count():
    with pytest.raises(InputError):
        lowest_eigenpairs(_random_tridiagonal(size=20), 0)


def test_divergence_hamiltonian_reproduces_oscillator_ladder():
    grid = Grid(-8.0, 8.0, 2049)
    u4 = SampledFunction(grid, np.ones(grid.n))
    potential = SampledFunction.from_callable(grid, lambda x: 0.5 * x**2)

    pairs = lowest_eigenpairs(build_divergence_hamiltonian(u4, potential), 4)

    np.testing.assert_allclose([pair.value for pair in pairs], [0.5, 1.5, 2.5, 3.5], atol=1e-4)
    assert pairs[0].state is not None
    assert pairs[0].state.values[0] == 0.0


def test_divergence_hamiltonian_requires_positive_weight():
    grid = Grid(0.0, 1.0, 33)
    u4 = SampledFunction(grid, np.zeros(grid.n))

    with pytest.raises(InputError):
        build_divergence_hamiltonian(u4, u4)
