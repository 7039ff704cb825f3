import abc
from typing import Sequence, Tuple

from core.mass_geometry.models import MassProfile


class MassProfileRepository(abc.ABC):
    """Repository contract for looking up mass profiles by id."""

    @abc.abstractmethod
    def get(self, profile_id: str) -> MassProfile:
        """Return the profile registered under ``profile_id``."""

    @abc.abstractmethod
    def ids(self) -> Sequence[str]:
        """Ids of every registered profile, in a stable order."""

    @abc.abstractmethod
    def from_expression(
        self,
        source: str,
        domain: Tuple[float, float] | None = None,
        mu_anchor: float | None = None,
    ) -> MassProfile:
        """Build a profile from a closed-form expression for m(x)."""
