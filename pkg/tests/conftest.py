import pytest

from app.container import AppContainer
from app.main import CONFIG_PATH
from infra.builtin_catalog import BuiltinCatalogRepository
from infra.builtin_profiles import CONSTANT


@pytest.fixture(scope="session", autouse=True)
def app_container() -> AppContainer:
    container = AppContainer()
    container.config.from_yaml(CONFIG_PATH)
    container.config.runtime.threads.from_value(2)

    yield container

    container.unwire()


@pytest.fixture(scope="session")
def catalog() -> BuiltinCatalogRepository:
    return BuiltinCatalogRepository()


@pytest.fixture
def constant_profile():
    return CONSTANT
