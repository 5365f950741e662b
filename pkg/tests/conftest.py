import numpy as np
import pytest

from fraudwood import _backend
from fraudwood.dataset import FeatureSchema, FeatureSpec, LabeledTable

ACCEPTANCE_LINES = []


@pytest.fixture(params=_backend.available())
def backend(request):
    """Run a test once per available kernel backend."""
    with _backend.using(request.param):
        yield request.param


@pytest.fixture
def small_schema():
    return FeatureSchema(
        (
            FeatureSpec("income", "financial", "numeric"),
            FeatureSpec("employment", "work", "categorical", ("employed", "self_employed")),
            FeatureSpec("loan_amount", "transaction", "numeric"),
            FeatureSpec("family_size", "demographic", "categorical", ("one", "two", "many")),
        ),
        "label",
    )


@pytest.fixture
def small_table(small_schema):
    rows = [
        (12500.0, "employed", 3000.0, "one"),
        (8000.5, "self_employed", 150.25, "many"),
        (0.1, "employed", -2.5, "two"),
        (43000.0, "self_employed", 1e-7, "one"),
    ]
    return LabeledTable.from_rows(small_schema, rows, [0, 1, 1, 0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
