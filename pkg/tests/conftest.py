import pytest

from rollupsim.kzg import kzg_setup


@pytest.fixture(scope="session")
def setup255():
    """One shared degree-255 ceremony for every test that needs it."""
    return kzg_setup(255, b"shared-test-ceremony")
