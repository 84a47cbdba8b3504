from __future__ import annotations

import pytest
from hypothesis import settings

from hyperstate import PAPER_STATE_NAMES, paper_state

settings.register_profile("suite", deadline=None, derandomize=True)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def corpus():
    return {name: paper_state(name) for name in PAPER_STATE_NAMES}
