import logging

import pytest

from core.errors import AdmissibilityError
from core.verification.models import CHECK_ORDER, DefaultTolerancesModel
from core.verification.services import VerificationJob
from infra.builtin_profiles import CAUCHY_SQUARED_INVERSE, CONSTANT
from infra.numeric_verifier import EntryVerifier


@pytest.fixture
def verifier() -> EntryVerifier:
    return EntryVerifier(tolerances=DefaultTolerancesModel().model_dump())


@pytest.mark.asyncio
async def test_verifier_crosschecks_the_oscillator(catalog, verifier):
    definition = catalog.get("shifted-ho")
    job = VerificationJob(definition=definition, fixture=definition.canonical, profile=CONSTANT)

    report = await verifier.verify(job)

    assert [record.check for record in report.checks] == list(CHECK_ORDER)
    assert report.all_passed


@pytest.mark.asyncio
async def test_verifier_widens_ground_energy_tolerance_to_the_fixture(catalog, verifier):
    definition = catalog.get("coulomb")
    job = VerificationJob(definition=definition, fixture=definition.canonical, profile=CONSTANT)

    report = await verifier.verify(job)

    energy = next(record for record in report.checks if record.check == "ground_energy")
    assert energy.tolerance == 1e-2
    assert energy.passed


@pytest.mark.asyncio
async def test_verifier_returns_library_errors(catalog, verifier, caplog):
    definition = catalog.get("coulomb")
    job = VerificationJob(
        definition=definition, fixture=definition.canonical, profile=CAUCHY_SQUARED_INVERSE
    )

    with caplog.at_level(logging.ERROR):
        result = await verifier.verify(job)

    assert isinstance(result, AdmissibilityError)
    assert "Crosscheck of coulomb failed" in caplog.text
