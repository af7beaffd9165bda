import os

import numpy as np
import pytest


def pytest_collection_modifyitems(config: pytest.Config, items: list) -> None:
    if os.getenv("RENYI_SHARP_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="slow; set RENYI_SHARP_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(autouse=True)
def quiet_logs(monkeypatch: pytest.MonkeyPatch) -> None:
    """Keep CLI stdout free of log records."""
    monkeypatch.setenv("RENYI_SHARP_LOG", "error")
