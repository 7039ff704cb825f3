import logging
import math
from typing import Callable, List, Tuple

import numpy as np

from core.catalog.models import SQRT2, CatalogDefinition, CatalogEntry, EntryParameters
from core.coherent_states.models import CoherentParams
from core.coherent_states.services import hcs_evaluate
from core.errors import AdmissibilityError, PdmError
from core.factorization.models import FactorizedSystem, SystemSamples
from core.factorization.services import (
    annihilation_residual,
    divergence_operator,
    ground_state,
    normalized_from_log,
    system_samples,
)
from core.mass_geometry.models import MassProfile
from core.mass_geometry.services import mu_image, x_of_mu
from core.numeric_kernel.models import Grid, SampledFunction
from core.numeric_kernel.services import inner, lowest_eigenpairs, norm
from core.superpotentials.services import build_superpotential, solve_phi
from core.verification.models import CheckRecord, DefaultTolerancesModel, VerificationReport

logger = logging.getLogger(__name__)

CANONICAL_POINTS = 4097
DEFAULT_XI_IM = 0.3
# potential terms above this next to a wall are left out of the offset
OFFSET_TERM_CEILING = 1e3


def instantiate(
    definition: CatalogDefinition, parameters: EntryParameters, profile: MassProfile
) -> Tuple[FactorizedSystem, CatalogEntry]:
    """Concrete system and closed forms of ``definition`` at ``parameters`` on ``profile``."""
    entry = definition.derive(parameters)

    image = mu_image(profile)
    if not image.contains(*entry.mu_window):
        raise AdmissibilityError(
            f"{entry.name} needs mu in {entry.mu_window}, "
            f"but {profile.describe()} covers only {image.as_tuple()}"
        )

    phi = solve_phi(entry.spec, *entry.phi_anchor, working_range=entry.mu_window)
    superpotential = build_superpotential(entry.spec, phi)
    system = FactorizedSystem(
        profile=profile,
        superpotential=superpotential,
        kappa=parameters.kappa,
        energy=entry.eps0,
        walls=entry.walls,
    )
    for note in entry.notes:
        logger.warning("%s: %s", entry.name, note)
    logger.debug("instantiated %s with %s", entry.name, entry.derived)
    return system, entry


def canonical_grid(entry: CatalogEntry, profile: MassProfile, n: int = CANONICAL_POINTS) -> Grid:
    """Grid in x whose ends map onto the entry's mu-window."""
    lo, hi = entry.mu_window
    return Grid(x_of_mu(profile, lo), x_of_mu(profile, hi), n)


def _interior(mu: np.ndarray, *arrays: np.ndarray) -> np.ndarray:
    keep = np.ones(mu.shape, dtype=bool)
    keep[[0, -1]] = False
    for array in arrays:
        keep &= np.isfinite(array)
    return keep


def _wall_adjacent(samples: SystemSamples, closed: np.ndarray) -> np.ndarray:
    """The runs of samples next to a wall end where a potential term exceeds the ceiling."""
    with np.errstate(all="ignore"):
        terms = np.maximum.reduce(
            [0.5 * samples.w_mod**2, 0.5 * np.abs(samples.structure), np.abs(closed)]
        )
    loud = ~np.isfinite(terms) | (terms > OFFSET_TERM_CEILING)
    adjacent = np.zeros(loud.shape, dtype=bool)
    for end, run in ((0, loud), (-1, loud[::-1])):
        if not samples.wall[end]:
            continue
        length = run.size if np.all(run) else int(np.argmin(run))
        if end == 0:
            adjacent[:length] = True
        else:
            adjacent[run.size - length :] = True
    return adjacent


def _offsets(
    entry: CatalogEntry, system: FactorizedSystem, grid: Grid
) -> Tuple[np.ndarray, int]:
    samples = system_samples(system, grid)
    with np.errstate(all="ignore"):
        closed = np.asarray(entry.potential(samples.mu), dtype=float)
    keep = _interior(samples.mu, samples.effective_potential, closed)
    adjacent = _wall_adjacent(samples, closed) & keep
    keep &= ~adjacent
    return samples.effective_potential[keep] - closed[keep], int(np.count_nonzero(adjacent))


def potential_offset(entry: CatalogEntry, system: FactorizedSystem, grid: Grid) -> float:
    """C* = mean of V~ - V_closed over the interior samples away from the walls."""
    offset, _ = _offsets(entry, system, grid)
    return float(np.mean(offset))


def potential_offset_deviation(entry: CatalogEntry, system: FactorizedSystem, grid: Grid) -> float:
    """max |V~ - V_closed - C*| with C* the mean offset.

    Interior samples next to a wall where |W~|^2/2, |F|/2 or |V_closed| exceeds
    ``OFFSET_TERM_CEILING`` are left out; ``wall_adjacent_count`` reports how many.
    """
    offset, _ = _offsets(entry, system, grid)
    return float(np.max(np.abs(offset - np.mean(offset))))


def wall_adjacent_count(entry: CatalogEntry, system: FactorizedSystem, grid: Grid) -> int:
    """Number of samples the potential offset leaves out next to the walls."""
    _, excluded = _offsets(entry, system, grid)
    return excluded


def ground_energy_gap(entry: CatalogEntry, system: FactorizedSystem, grid: Grid) -> float:
    """|lowest eigenvalue of -1/2 d/dx U^4 d/dx + V_closed + mass potential - eps0|."""
    samples = system_samples(system, grid)
    with np.errstate(all="ignore"):
        closed = np.asarray(entry.potential(samples.mu), dtype=float)
    lowest = lowest_eigenpairs(divergence_operator(system, grid, potential=closed), 1)[0]
    logger.debug("%s: lowest eigenvalue %.12g, eps0 %.12g", entry.name, lowest.value, entry.eps0)
    return abs(lowest.value - entry.eps0)


def structure_deviation(entry: CatalogEntry, system: FactorizedSystem, grid: Grid) -> float:
    samples = system_samples(system, grid)
    with np.errstate(all="ignore"):
        closed = np.asarray(entry.structure(samples.mu), dtype=float)
    keep = _interior(samples.mu, samples.structure, closed)
    gap = np.abs(closed[keep] - samples.structure[keep])
    return float(np.max(gap / (1.0 + np.abs(closed[keep]))))


def coherent_params_for(kappa: float, xi_im: float = DEFAULT_XI_IM) -> CoherentParams:
    """gamma = 1/kappa where the pseudo-Hermitian side exists, gamma = 1 otherwise."""
    if kappa in (0.0, 1.0, -1.0):
        return CoherentParams.hermitian(kappa, xi_im, gamma=1.0)
    return CoherentParams.for_kappa(kappa, xi_im)


def closed_coherent_state(
    entry: CatalogEntry, system: FactorizedSystem, grid: Grid, params: CoherentParams
) -> SampledFunction:
    samples = system_samples(system, grid)
    with np.errstate(all="ignore"):
        log_modulus = 0.25 * np.log(samples.m) + np.asarray(entry.ground_log(samples.mu), dtype=float)
        phase_arg = SQRT2 * params.xi_kappa * entry.modified(samples.mu)
    log_modulus = np.where(np.isnan(log_modulus) | samples.wall, -math.inf, log_modulus)
    state, _, _ = normalized_from_log(grid, log_modulus, phase_arg)
    return state


def coherent_distance(
    entry: CatalogEntry,
    system: FactorizedSystem,
    grid: Grid,
    xi_im: float = DEFAULT_XI_IM,
) -> float:
    """L2 distance between the sampled and closed coherent states after phase alignment."""
    params = coherent_params_for(system.kappa, xi_im)
    sampled = hcs_evaluate(params, system, grid)
    closed = closed_coherent_state(entry, system, grid, params)
    overlap = inner(closed, sampled)
    phase = overlap / abs(overlap) if overlap != 0.0 else 1.0
    return norm(sampled - closed.scaled(phase))


def _guarded(check: str, entry: CatalogEntry, tolerance: float, measure: Callable[[], float]):
    try:
        measured = measure()
    except PdmError as exc:
        logger.warning("%s/%s could not run: %s", entry.name, check, exc)
        return CheckRecord(
            check=check, entry=entry.name, tolerance=tolerance, passed=False, notes=[str(exc)]
        )
    record = CheckRecord.measure(check, entry.name, tolerance, measured)
    logger.debug("%s/%s measured %.3e (tolerance %.1e)", entry.name, check, measured, tolerance)
    return record


def crosscheck(
    entry: CatalogEntry,
    system: FactorizedSystem,
    grid: Grid,
    tolerances: DefaultTolerancesModel | None = None,
    xi_im: float = DEFAULT_XI_IM,
) -> VerificationReport:
    """The five closed-form against generic-pipeline checks; failures are records, not errors."""
    tolerances = tolerances or DefaultTolerancesModel()

    records: List[CheckRecord] = [
        _guarded(
            "potential_offset",
            entry,
            tolerances.potential_offset,
            lambda: potential_offset_deviation(entry, system, grid),
        ),
        _guarded(
            "ground_annihilation",
            entry,
            tolerances.ground_annihilation,
            lambda: annihilation_residual(system, ground_state(system, grid)),
        ),
        _guarded(
            "ground_energy",
            entry,
            tolerances.ground_energy,
            lambda: ground_energy_gap(entry, system, grid),
        ),
        _guarded(
            "structure_function",
            entry,
            tolerances.structure_function,
            lambda: structure_deviation(entry, system, grid),
        ),
        _guarded(
            "coherent_closed_form",
            entry,
            tolerances.coherent_closed_form,
            lambda: coherent_distance(entry, system, grid, xi_im),
        ),
    ]
    notes = list(entry.notes)
    if records[0].measured is not None:
        excluded = wall_adjacent_count(entry, system, grid)
        if excluded:
            notes.append(f"potential offset leaves out {excluded} wall-adjacent samples")
    if notes:
        first = records[0]
        records[0] = first.model_copy(update={"notes": [*first.notes, *notes]})
    return VerificationReport.from_checks(records)
