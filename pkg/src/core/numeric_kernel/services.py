import logging
import math
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import simpson
from scipy.special import roots_legendre

from core.errors import InputError, NumericError
from core.numeric_kernel.models import (
    Eigenpair,
    Grid,
    SampledFunction,
    TridiagonalSymmetric,
)

logger = logging.getLogger(__name__)

MAX_EIGENPAIRS = 10
BISECTION_TOLERANCE = 1e-12
RESIDUAL_TOLERANCE = 1e-8
INVERSE_ITERATION_STEPS = 6
INVERSE_ITERATION_SEED = 20240917


def derivative(f: SampledFunction) -> SampledFunction:
    """Central second-order stencil inside, one-sided second order at both ends."""
    return f.with_values(np.gradient(f.values, f.grid.h, edge_order=2))


def second_derivative(f: SampledFunction) -> SampledFunction:
    y = f.values
    h2 = f.grid.h**2
    out = np.empty_like(y)
    out[1:-1] = (y[2:] - 2.0 * y[1:-1] + y[:-2]) / h2
    out[0] = (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) / h2
    out[-1] = (2.0 * y[-1] - 5.0 * y[-2] + 4.0 * y[-3] - y[-4]) / h2
    return f.with_values(out)


def _integrate_real(y: np.ndarray, h: float) -> float:
    if y.size % 2:
        return float(simpson(y, dx=h))
    head = float(simpson(y[:-1], dx=h))
    return head + 0.5 * h * float(y[-2] + y[-1])


def integrate(f: SampledFunction) -> complex:
    """Composite Simpson; an even sample count closes with one trapezoid panel."""
    h = f.grid.h
    return complex(
        _integrate_real(f.values.real, h), _integrate_real(f.values.imag, h)
    )


def inner(f: SampledFunction, g: SampledFunction) -> complex:
    """<f, g> with the conjugate on the left argument."""
    return integrate(f.with_values(np.conj(f.values) * g.values))


def norm(f: SampledFunction) -> float:
    return math.sqrt(max(inner(f, f).real, 0.0))


def normalized(f: SampledFunction) -> SampledFunction:
    size = norm(f)
    if size == 0.0 or not math.isfinite(size):
        raise NumericError(f"cannot normalize a function of norm {size}")
    return f.scaled(1.0 / size)


def cumulative_integral(
    fn: Callable[[np.ndarray], np.ndarray],
    points: np.ndarray,
    anchor: float = 0.0,
    nodes: int = 8,
    max_panel: float = 0.05,
) -> np.ndarray:
    """Integral of ``fn`` from ``anchor`` to every entry of ``points``.

    The span between consecutive breakpoints is cut into panels no wider than
    ``max_panel`` and each panel gets a Gauss-Legendre rule.
    """
    pts = np.asarray(points, dtype=float)
    knots = np.unique(np.concatenate([pts.ravel(), [anchor]]))
    widths = np.diff(knots)
    counts = np.maximum(1, np.ceil(widths / max_panel).astype(int))

    pieces = [knots[:1]]
    for lo, hi, count in zip(knots[:-1], knots[1:], counts):
        pieces.append(np.linspace(lo, hi, count + 1)[1:])
    edges = np.concatenate(pieces)

    abscissae, weights = roots_legendre(nodes)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    samples = fn(mid[:, None] + half[:, None] * abscissae[None, :])
    running = np.concatenate([[0.0], np.cumsum(half * (samples @ weights))])
    running = running - running[np.searchsorted(edges, anchor)]
    return running[np.searchsorted(edges, pts)]


def observed_order(errors: Sequence[float]) -> list[float]:
    """Convergence orders between successive halvings of the grid spacing."""
    return [
        math.log2(coarse / fine)
        for coarse, fine in zip(errors[:-1], errors[1:])
    ]


def smooth_test_functions(grid: Grid, count: int = 5) -> list[SampledFunction]:
    """Gaussian-windowed bumps centred in the middle of the grid, negligible at both ends."""
    x = grid.points
    span = grid.x_hi - grid.x_lo
    functions = []
    for k in range(count):
        centre = grid.x_lo + span * (0.3 + 0.1 * k)
        width = span * (0.04 + 0.01 * k)
        t = (x - centre) / width
        envelope = np.exp(-(t**2)) * (1.0 + 0.5 * t - 0.25 * k * t**2)
        functions.append(SampledFunction(grid, envelope * np.exp(0.5j * k * t)))
    return functions


def build_divergence_hamiltonian(
    u4: SampledFunction, v: SampledFunction
) -> TridiagonalSymmetric:
    """Flux-form discretization of -1/2 d/dx U^4 d/dx + V on the grid interior.

    Endpoints carry the Dirichlet conditions, so ``v`` is only read at the
    interior samples.
    """
    weights = u4.values.real
    if not np.all(weights > 0.0):
        raise InputError("U^4 must be strictly positive on every grid sample")

    grid = u4.grid
    scale = 1.0 / (2.0 * grid.h**2)
    half_points = 0.5 * (weights[:-1] + weights[1:])
    diag = (half_points[:-1] + half_points[1:]) * scale + v.values.real[1:-1]
    offdiag = -half_points[1:-1] * scale
    return TridiagonalSymmetric(diag=diag, offdiag=offdiag, grid=grid)


def sturm_count(mat: TridiagonalSymmetric, x: float) -> int:
    """Number of eigenvalues strictly below ``x``."""
    off2 = (mat.offdiag**2).tolist()
    return _count_below(mat.diag.tolist(), off2, x, _pivot_floor(off2))


def _pivot_floor(off2: list[float]) -> float:
    return np.finfo(float).tiny * max([1.0, *off2])


def _count_below(diag: list[float], off2: list[float], x: float, pivmin: float) -> int:
    q = diag[0] - x
    if abs(q) <= pivmin:
        q = -pivmin
    count = 1 if q < 0.0 else 0
    for d, e2 in zip(diag[1:], off2):
        q = d - x - e2 / q
        if abs(q) <= pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


def _solve_shifted(
    diag: list[float], off: list[float], shift: float, rhs: list[float], tiny: float
) -> list[float]:
    n = len(diag)
    upper = [0.0] * n
    work = [0.0] * n

    pivot = diag[0] - shift
    if abs(pivot) < tiny:
        pivot = tiny
    if n > 1:
        upper[0] = off[0] / pivot
    work[0] = rhs[0] / pivot

    for i in range(1, n):
        pivot = diag[i] - shift - off[i - 1] * upper[i - 1]
        if abs(pivot) < tiny:
            pivot = tiny
        if i < n - 1:
            upper[i] = off[i] / pivot
        work[i] = (rhs[i] - off[i - 1] * work[i - 1]) / pivot

    solution = [0.0] * n
    solution[-1] = work[-1]
    for i in range(n - 2, -1, -1):
        solution[i] = work[i] - upper[i] * solution[i + 1]
    return solution


def _fix_sign(v: np.ndarray) -> np.ndarray:
    total = float(np.sum(v))
    if abs(total) > 1e-8 * float(np.sum(np.abs(v))):
        return v if total > 0.0 else -v
    first = int(np.argmax(np.abs(v) > 1e-3 * np.max(np.abs(v))))
    return v if v[first] > 0.0 else -v


def _bisect_eigenvalues(
    mat: TridiagonalSymmetric, k: int, tolerance: float
) -> list[float]:
    diag = mat.diag.tolist()
    off2 = (mat.offdiag**2).tolist()
    pivmin = _pivot_floor(off2)
    lower, upper = mat.gershgorin()

    values = []
    for index in range(k):
        lo, hi = lower, upper
        while hi - lo > tolerance:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if _count_below(diag, off2, mid, pivmin) > index:
                hi = mid
            else:
                lo = mid
        values.append(0.5 * (lo + hi))
        lower = lo
    return values


def _inverse_iteration(
    mat: TridiagonalSymmetric,
    value: float,
    index: int,
    previous: list[np.ndarray],
) -> tuple[np.ndarray, float]:
    diag = mat.diag.tolist()
    off = mat.offdiag.tolist()
    lo, hi = mat.gershgorin()
    tiny = np.finfo(float).eps * max(abs(lo), abs(hi), 1.0)

    rng = np.random.default_rng(INVERSE_ITERATION_SEED + index)
    v = rng.standard_normal(mat.size)
    v /= np.linalg.norm(v)
    residual = math.inf
    for _ in range(INVERSE_ITERATION_STEPS):
        x = np.array(_solve_shifted(diag, off, value, v.tolist(), tiny))
        for other in previous:
            x -= np.dot(other, x) * other
        size = np.linalg.norm(x)
        if size == 0.0 or not np.isfinite(size):
            break
        v = x / size
        residual = float(np.linalg.norm(mat.matvec(v) - value * v))
        if residual <= RESIDUAL_TOLERANCE:
            return v, residual

    raise NumericError(
        f"inverse iteration stagnated for eigenvalue index {index} "
        f"(residual {residual:.3e})",
        achieved_tolerance=residual,
        eigenvalue_index=index,
    )


def lowest_eigenpairs(
    mat: TridiagonalSymmetric, k: int, tolerance: float = BISECTION_TOLERANCE
) -> list[Eigenpair]:
    """k smallest eigenpairs by Sturm bisection and inverse iteration.

    Vectors are normalized with the grid weight h; when the matrix is tied to a
    grid the Dirichlet zeros are restored in ``Eigenpair.state``.
    """
    if not 1 <= k <= min(MAX_EIGENPAIRS, mat.size):
        raise InputError(
            f"k must lie in [1, {min(MAX_EIGENPAIRS, mat.size)}], got {k}"
        )

    values = _bisect_eigenvalues(mat, k, tolerance)
    pairs: list[Eigenpair] = []
    unit_vectors: list[np.ndarray] = []
    for index, value in enumerate(values):
        unit, residual = _inverse_iteration(mat, value, index, unit_vectors)
        unit_vectors.append(unit)
        vector = _fix_sign(unit) / math.sqrt(mat.h)

        state = None
        if mat.grid is not None and mat.grid.n == mat.size + 2:
            padded = np.zeros(mat.grid.n)
            padded[1:-1] = vector
            state = SampledFunction(mat.grid, padded)
        pairs.append(
            Eigenpair(value=value, vector=vector, residual=residual, state=state)
        )
        logger.debug("eigenpair %d: value=%.15g residual=%.3e", index, value, residual)
    return pairs
