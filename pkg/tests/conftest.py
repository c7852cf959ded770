import pathlib

import pytest

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_dir() -> pathlib.Path:
    return FIXTURES


@pytest.fixture(scope="session")
def model_dir() -> pathlib.Path:
    return FIXTURES / "models"


@pytest.fixture(scope="session")
def hardware_dir() -> pathlib.Path:
    return FIXTURES / "hardware"
