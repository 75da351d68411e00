import pytest

from primechain import verify


@pytest.fixture(scope="session")
def vctx():
    """Shared lazy context so the 1e6 factor table is built once."""
    return verify.VerifyContext()


@pytest.fixture(scope="session")
def table(vctx):
    return vctx.table


@pytest.fixture(scope="session")
def dag(vctx):
    return vctx.dag
