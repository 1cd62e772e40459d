from __future__ import annotations

import pytest

from beliefhtn import builtin_bundle


@pytest.fixture(scope="session")
def cooking():
    return builtin_bundle("cooking")


@pytest.fixture(scope="session")
def box():
    return builtin_bundle("box")
