import asyncio
import logging
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from app.container import AppContainer
from core.catalog.models import CatalogDefinition, CatalogEntry, EntryParameters, Fixture
from core.catalog.services import (
    DEFAULT_XI_IM,
    canonical_grid,
    coherent_params_for,
    instantiate,
    potential_offset,
)
from core.coherent_states.models import CoherentParams
from core.coherent_states.services import hcs_evaluate, phcs_evaluate, uncertainty_product
from core.errors import ConfigError, VerificationFailure
from core.factorization.models import FactorizedSystem
from core.factorization.services import divergence_operator, ground_state, system_samples
from core.mass_geometry.models import MassProfile
from core.numeric_kernel.models import Grid, SampledFunction
from core.numeric_kernel.services import lowest_eigenpairs, smooth_test_functions
from core.pseudo_hermitian.models import SwansonSystem
from core.pseudo_hermitian.services import (
    hermitize_check,
    hermitized_spectrum,
    metric,
    pseudo_hermiticity_check,
    symmetry_defect,
)
from core.superpotentials.models import ClassSpec
from core.superpotentials.services import build_superpotential, solve_phi
from core.verification.models import RunConfig
from core.verification.services import VerificationJob

logger = logging.getLogger(__name__)

SAMPLE_COLUMNS = ("x", "mu", "m", "V", "psi0", "re_psi_xi", "im_psi_xi", "F")
SWANSON_WINDOW = (-8.0, 8.0)


def emit(text: str, output: str | None) -> None:
    if output is None:
        print(text, end="")
        return
    Path(output).write_text(text, encoding="utf-8")
    logger.info("wrote %s", output)


def resolve_profile(config: RunConfig, container: AppContainer) -> MassProfile:
    profiles = container.profile_repository()
    if config.mass_expr is not None:
        return profiles.from_expression(config.mass_expr)
    return profiles.get(config.mass)


def resolve_fixture(definition: CatalogDefinition, config: RunConfig, kappa: float | None) -> Fixture:
    """The fixture at ``kappa`` (canonical if unset) with any explicit parameter flags applied."""
    base = definition.canonical
    if kappa is not None:
        matching = [fixture for fixture in definition.fixtures if fixture.kappa == kappa]
        base = matching[0] if matching else base

    overrides = config.parameter_overrides()
    if kappa is not None:
        overrides["kappa"] = kappa
    if not overrides or all(getattr(base.parameters, k) == v for k, v in overrides.items()):
        return base

    parameters = EntryParameters(**{**base.parameters.model_dump(), **overrides})
    return Fixture(
        parameters=parameters,
        eps0=definition.derive(parameters).eps0,
        eigen_tolerance=base.eigen_tolerance,
    )


def _default_xi(container: AppContainer) -> float:
    configured = container.config.verification.xi_im()
    return DEFAULT_XI_IM if configured is None else float(configured)


def _grid(config: RunConfig, entry: CatalogEntry, profile: MassProfile) -> Grid:
    if config.grid.x_lo is not None:
        return Grid(config.grid.x_lo, config.grid.x_hi, config.grid.n)
    return canonical_grid(entry, profile, config.grid.n)


def _instantiated(
    config: RunConfig, container: AppContainer, kappa: float | None
) -> Tuple[FactorizedSystem, CatalogEntry, Grid]:
    definition = container.catalog_repository().get(config.entry)
    profile = resolve_profile(config, container)
    fixture = resolve_fixture(definition, config, kappa)
    system, entry = instantiate(definition, fixture.parameters, profile)
    return system, entry, _grid(config, entry, profile)


def _sample_columns(
    system: FactorizedSystem, grid: Grid, coherent: SampledFunction
) -> Dict[str, np.ndarray]:
    samples = system_samples(system, grid)
    psi0 = ground_state(system, grid).psi0
    return dict(
        zip(
            SAMPLE_COLUMNS,
            (
                samples.x,
                samples.mu,
                samples.m,
                samples.effective_potential,
                psi0.real,
                coherent.real,
                coherent.imag,
                samples.structure,
            ),
        )
    )


def _header(entry: CatalogEntry, system: FactorizedSystem, grid: Grid) -> List[str]:
    offset = potential_offset(entry, system, grid)
    derived = ", ".join(f"{name}={value:.17g}" for name, value in entry.derived.items())
    return [
        f"entry={entry.name} kappa={entry.kappa:.17g} eps0={entry.eps0:.17g} {derived}",
        f"V offset: V = V_closed + {offset:.17g}",
        f"grid: [{grid.x_lo:.17g}, {grid.x_hi:.17g}] n={grid.n}",
        *(f"note: {note}" for note in entry.notes),
    ]


def catalog_list(config: RunConfig, container: AppContainer) -> int:
    repository = container.catalog_repository()
    writer = container.report_writer()
    rows = [repository.get(name).listing() for name in repository.names()]
    if config.format == "json":
        emit(writer.render_json({"entries": rows}), config.output)
        return 0
    flat = [
        {**row, "mu_window": str(row["mu_window"]), "canonical": str(row["canonical"])}
        for row in rows
    ]
    emit(writer.render_rows(flat, config.format), config.output)
    return 0


def derive(config: RunConfig, container: AppContainer) -> int:
    system, entry, grid = _instantiated(config, container, config.kappa)
    xi_im = _default_xi(container)
    coherent = hcs_evaluate(coherent_params_for(system.kappa, xi_im), system, grid)
    text = container.report_writer().render_rows(
        _sample_columns(system, grid, coherent), "csv", header=_header(entry, system, grid)
    )
    emit(text, config.output)
    return 0


def coherent(config: RunConfig, container: AppContainer) -> int:
    kappa = config.kappa if config.kappa is not None else 2.0
    xi_im = config.xi_im if config.xi_im is not None else _default_xi(container)
    params = CoherentParams.for_kappa(kappa, xi_im)
    system, entry, grid = _instantiated(config, container, kappa)
    writer = container.report_writer()

    hcs = hcs_evaluate(params, system, grid)
    header = _header(entry, system, grid) + [f"xi={params.xi}"]
    emit(writer.render_rows(_sample_columns(system, grid, hcs), "csv", header=header), config.output)

    if config.output is None:
        logger.info("no --output given; PHCS samples and the uncertainty report are skipped")
        return 0
    stem = Path(config.output).with_suffix("")
    phcs = phcs_evaluate(params, system, grid)
    columns = {
        "x": grid.points,
        "mu": system_samples(system, grid).mu,
        "re_psi": phcs.real,
        "im_psi": phcs.imag,
        "abs_psi": np.abs(phcs.values),
    }
    emit(writer.render_rows(columns, "csv", header=header), f"{stem}.phcs.csv")
    report = uncertainty_product(params, system, grid)
    emit(writer.render_json(report.model_dump(mode="json")), f"{stem}.uncertainty.json")
    return 0


def spectrum(config: RunConfig, container: AppContainer) -> int:
    system, entry, grid = _instantiated(config, container, config.kappa)
    pairs = lowest_eigenpairs(divergence_operator(system, grid), config.eigen_count)
    rows = [{"index": index, "eigenvalue": pair.value} for index, pair in enumerate(pairs)]
    writer = container.report_writer()
    if config.format == "json":
        payload = {"entry": entry.name, "eps0": entry.eps0, "eigenvalues": [p.value for p in pairs]}
        emit(writer.render_json(payload), config.output)
    else:
        emit(writer.render_rows(rows, config.format, header=_header(entry, system, grid)), config.output)
    return 0


def swanson(config: RunConfig, container: AppContainer) -> int:
    profile = resolve_profile(config, container)
    spec = ClassSpec.model_validate(config.w_spec)
    phi = solve_phi(spec, *config.phi0)
    system = SwansonSystem(
        profile=profile,
        superpotential=build_superpotential(spec, phi),
        alpha=config.alpha,
        beta=config.beta,
    )
    x_lo, x_hi = SWANSON_WINDOW
    if config.grid.x_lo is not None:
        x_lo, x_hi = config.grid.x_lo, config.grid.x_hi
    grid = Grid(x_lo, x_hi, config.grid.n)
    testset = smooth_test_functions(grid)

    pairs = hermitized_spectrum(system, grid, config.eigen_count)
    payload = {
        "alpha": system.alpha,
        "beta": system.beta,
        "omega": system.omega,
        "bounded_below": system.bounded_below,
        "symmetry_defect": symmetry_defect(system, testset),
        "hermitized_defect": hermitize_check(system, grid, testset),
        "pseudo_defect": pseudo_hermiticity_check(system, grid, testset),
        "zeta_min": metric(system).minimum(grid),
        "eigenvalues": [pair.value for pair in pairs],
    }
    emit(container.report_writer().render_json(payload), config.output)
    return 0


def verify(config: RunConfig, container: AppContainer) -> int:
    catalog = container.catalog_repository()
    profile = resolve_profile(config, container)
    names = list(catalog.names()) if config.entry == "all" else [catalog.get(config.entry).name]
    xi_im = _default_xi(container)

    jobs = []
    for name in names:
        definition = catalog.get(name)
        jobs.append(
            VerificationJob(
                definition=definition,
                fixture=resolve_fixture(definition, config, config.kappa),
                profile=profile,
                n=config.grid.n,
                xi_im=xi_im,
            )
        )

    runner = container.crosscheck_runner()
    results = asyncio.run(runner.run(jobs))
    if len(jobs) == 1 and isinstance(results[0], Exception):
        raise results[0]
    report = runner.merge(jobs, results, config=config.echo())
    emit(container.report_writer().render_report(report, config.format), config.output)
    if not report.all_passed:
        raise VerificationFailure(
            f"{report.summary.failed} of {report.summary.total} checks failed",
            failed=report.summary.failed,
        )
    return 0


COMMANDS = {
    "catalog": catalog_list,
    "derive": derive,
    "coherent": coherent,
    "spectrum": spectrum,
    "swanson": swanson,
    "verify": verify,
}


def run_command(config: RunConfig, container: AppContainer) -> int:
    try:
        command = COMMANDS[config.command]
    except KeyError:
        raise ConfigError(f"unknown command {config.command!r}") from None
    if config.command in ("derive", "coherent", "spectrum") and config.entry == "all":
        raise ConfigError(f"'{config.command}' needs a single --entry")
    return command(config, container)

