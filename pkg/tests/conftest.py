import json

import pytest

from community_explore.core.model import RngHandle, make_instance
from community_explore.services.config import ARGS_JSON_ENV, CONFIG_ENV


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    monkeypatch.delenv(ARGS_JSON_ENV, raising=False)


@pytest.fixture
def rng():
    return RngHandle(12345)


@pytest.fixture
def two_four():
    """d=(2,4): small enough to enumerate by hand."""
    return make_instance([2, 4])


@pytest.fixture
def six_communities():
    return make_instance([2, 3, 5, 6, 8, 10])


@pytest.fixture
def write_config(tmp_path):
    def _write(data, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return _write
