import abc
from typing import Sequence

from core.catalog.models import CatalogDefinition


class CatalogRepository(abc.ABC):
    """Repository contract for the catalog of exactly solvable systems."""

    @abc.abstractmethod
    def get(self, name: str) -> CatalogDefinition:
        """Return the definition registered under ``name``."""

    @abc.abstractmethod
    def names(self) -> Sequence[str]:
        """Names of every registered entry, in a stable order."""
