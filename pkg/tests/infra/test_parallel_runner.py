import asyncio

import pytest

from core.errors import AdmissibilityError
from core.verification.models import CheckRecord, VerificationReport
from core.verification.services import VerificationJob
from infra.builtin_profiles import CONSTANT
from infra.parallel_runner import ParallelCrosscheckRunner


def jobs_for(catalog, *names):
    return [
        VerificationJob(definition=catalog.get(name), fixture=catalog.get(name).canonical, profile=CONSTANT)
        for name in names
    ]


def report_for(job: VerificationJob) -> VerificationReport:
    return VerificationReport.from_checks([CheckRecord.measure("potential_offset", job.name, 1e-9, 0.0)])


def test_runner_needs_a_worker():
    with pytest.raises(ValueError):
        ParallelCrosscheckRunner(verify=None, max_workers=0)


def test_container_runner_uses_configured_threads(app_container):
    assert app_container.crosscheck_runner().max_workers == 2


@pytest.mark.asyncio
async def test_results_keep_job_order_and_respect_the_limit(catalog):
    jobs = jobs_for(catalog, "morse", "scarf", "eckart", "coulomb")
    delays = {"morse": 0.03, "scarf": 0.0, "eckart": 0.02, "coulomb": 0.01}
    active = {"now": 0, "peak": 0}

    async def verify(job):
        active["now"] += 1
        active["peak"] = max(active["peak"], active["now"])
        await asyncio.sleep(delays[job.name])
        active["now"] -= 1
        return report_for(job)

    runner = ParallelCrosscheckRunner(verify=verify, max_workers=2)

    results = await runner.run(jobs)

    assert [result.checks[0].entry for result in results] == ["morse", "scarf", "eckart", "coulomb"]
    assert active["peak"] == 2


def test_failed_job_becomes_an_instantiate_record(catalog):
    jobs = jobs_for(catalog, "morse", "coulomb")
    results = [report_for(jobs[0]), AdmissibilityError("coulomb needs mu in (0, 10)")]

    report = ParallelCrosscheckRunner(verify=None).merge(jobs, results, config={"entry": "all"})

    failed = [record for record in report.checks if not record.passed]
    assert [(record.entry, record.check) for record in failed] == [("coulomb", "instantiate")]
    assert failed[0].notes == ["AdmissibilityError: coulomb needs mu in (0, 10)"]
    assert report.config == {"entry": "all"}
    assert not report.all_passed


@pytest.mark.asyncio
async def test_run_merged(catalog):
    async def verify(job):
        return report_for(job)

    runner = ParallelCrosscheckRunner(verify=verify, max_workers=3)

    report = await runner.run_merged(jobs_for(catalog, "scarf", "morse"))

    assert [record.entry for record in report.checks] == ["morse", "scarf"]
    assert report.all_passed
