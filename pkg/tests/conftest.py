import pytest

from hmhdim.formula import MassTable


@pytest.fixture(scope="session")
def mass_table():
    return MassTable.default()
