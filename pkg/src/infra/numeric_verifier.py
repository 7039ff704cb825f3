import asyncio
import logging
from typing import Mapping

from core.catalog.services import canonical_grid, crosscheck, instantiate
from core.errors import PdmError
from core.verification.models import VerificationReport
from core.verification.services import (
    EntryVerifier as BaseEntryVerifier,
    VerificationJob,
    effective_tolerances,
)

logger = logging.getLogger(__name__)


class EntryVerifier(BaseEntryVerifier):
    """Crosschecks a fixture with the numeric pipeline on a worker thread."""

    def __init__(self, tolerances: Mapping[str, float]) -> None:
        super().__init__(tolerances=tolerances)

    async def verify(self, job: VerificationJob) -> VerificationReport | Exception:
        try:
            return await asyncio.to_thread(self._run, job)
        except PdmError as exc:
            logger.exception("Crosscheck of %s failed: %s", job.name, exc)
            return exc

    def _run(self, job: VerificationJob) -> VerificationReport:
        system, entry = instantiate(job.definition, job.fixture.parameters, job.profile)
        grid = canonical_grid(entry, job.profile, job.n)
        logger.debug("crosschecking %s on %s with n=%d", job.name, job.profile.id, job.n)
        return crosscheck(
            entry,
            system,
            grid,
            tolerances=effective_tolerances(self.tolerances, job.fixture),
            xi_im=job.xi_im,
        )
