from dependency_injector import containers, providers

from core.verification.services import CrosscheckBuilder
from infra.builtin_catalog import BuiltinCatalogRepository
from infra.builtin_profiles import BuiltinProfileRepository
from infra.expression_parser import PyparsingExpressionCompiler
from infra.numeric_verifier import EntryVerifier as NumericEntryVerifier
from infra.parallel_runner import ParallelCrosscheckRunner
from infra.report_writers import PandasReportWriter


class AppContainer(containers.DeclarativeContainer):
    """Dependency injection container wiring infrastructure and core services."""

    config = providers.Configuration()

    expression_compiler = providers.Singleton(PyparsingExpressionCompiler)

    profile_repository = providers.Singleton(
        BuiltinProfileRepository,
        expression_compiler=expression_compiler,
    )

    catalog_repository = providers.Singleton(BuiltinCatalogRepository)

    entry_verifier_factory = providers.DelegatedFactory(NumericEntryVerifier)

    crosscheck_builder = providers.Factory(
        CrosscheckBuilder,
        tolerances=config.verification.tolerances.optional(None),
        verifier_factory=entry_verifier_factory,
    )

    crosscheck_runner = providers.Factory(
        ParallelCrosscheckRunner,
        verify=crosscheck_builder.provided.verify,
        max_workers=config.runtime.threads.as_int(),
    )

    report_writer = providers.Singleton(PandasReportWriter)
