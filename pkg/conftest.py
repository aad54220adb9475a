from pathlib import Path

import pytest
from loguru import logger

from repairforge.config import RepairConfig
from repairforge.utils.file_utils import load_program, load_suite

CORPUS_DIR = Path(__file__).parent / "corpus"
CORPUS_NAMES = ["triangle", "square", "sum_to", "withdraw", "max_of", "abs_value"]


def corpus_path(name: str, suffix: str = ".mlg") -> Path:
    return CORPUS_DIR / f"{name}{suffix}"


def load_corpus(name: str):
    program = load_program(corpus_path(name))
    return program, load_suite(corpus_path(name, ".tests.json"), program)


@pytest.fixture(autouse=True)
def _quiet_logs():
    logger.remove()
    yield


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS_DIR


@pytest.fixture
def triangle():
    return load_corpus("triangle")


@pytest.fixture
def square():
    return load_corpus("square")


@pytest.fixture
def sum_to():
    return load_corpus("sum_to")


@pytest.fixture
def withdraw():
    return load_corpus("withdraw")


@pytest.fixture
def fast_config() -> RepairConfig:
    """Small budgets; the triangle's line 8 is unsatisfiable and burns its whole allowance."""
    return RepairConfig(location_budget_secs=2, budget_secs=30)


@pytest.fixture
def corpus():
    """Loader for any corpus program: `corpus("square")` -> (program, suite)."""
    return load_corpus
