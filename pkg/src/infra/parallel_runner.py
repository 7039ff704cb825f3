import asyncio
import logging
from typing import Any, Awaitable, Callable, Dict, List, Optional, Sequence

from core.verification.models import CheckRecord, VerificationReport
from core.verification.services import VerificationJob

logger = logging.getLogger(__name__)

Verify = Callable[[VerificationJob], Awaitable[VerificationReport | Exception]]


class ParallelCrosscheckRunner:
    """Runs entry crosschecks concurrently, at most ``max_workers`` at a time."""

    def __init__(self, verify: Verify, max_workers: int = 4) -> None:
        if max_workers < 1:
            raise ValueError(f"max_workers must be positive, got {max_workers}")
        self._verify = verify
        self._max_workers = max_workers

    @property
    def max_workers(self) -> int:
        return self._max_workers

    async def run(self, jobs: Sequence[VerificationJob]) -> List[VerificationReport | Exception]:
        """Results in job order, whatever order the workers finish in."""
        semaphore = asyncio.Semaphore(self._max_workers)

        async def guarded(job: VerificationJob) -> VerificationReport | Exception:
            async with semaphore:
                return await self._verify(job)

        return list(await asyncio.gather(*(guarded(job) for job in jobs)))

    def merge(
        self,
        jobs: Sequence[VerificationJob],
        results: Sequence[VerificationReport | Exception],
        config: Optional[Dict[str, Any]] = None,
    ) -> VerificationReport:
        """One report for all jobs; a job that raised becomes a failed 'instantiate' record."""
        reports: List[VerificationReport] = []
        for job, result in zip(jobs, results):
            if isinstance(result, Exception):
                failure = CheckRecord(
                    check="instantiate",
                    entry=job.name,
                    tolerance=0.0,
                    passed=False,
                    notes=[f"{type(result).__name__}: {result}"],
                )
                reports.append(VerificationReport.from_checks([failure]))
            else:
                reports.append(result)
        merged = VerificationReport.merged(reports, config)
        logger.info(
            "verified %d entries: %d/%d checks passed",
            len(jobs),
            merged.summary.passed,
            merged.summary.total,
        )
        return merged

    async def run_merged(
        self, jobs: Sequence[VerificationJob], config: Optional[Dict[str, Any]] = None
    ) -> VerificationReport:
        return self.merge(jobs, await self.run(jobs), config)
