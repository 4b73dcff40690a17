import mpmath
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    # never touch the user's cache file from the test suite
    monkeypatch.setenv("ALTMZV_CACHE", str(tmp_path / "constants.tsv"))
    yield


@pytest.fixture(autouse=True)
def _reset_mp():
    saved = mpmath.mp.prec
    yield
    mpmath.mp.prec = saved

