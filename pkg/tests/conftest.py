from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ptwell.actions import ActionEvaluator  # noqa: E402
from ptwell.potential import PerturbedPotential, classify_wells  # noqa: E402


@pytest.fixture(scope="session")
def quartic():
    return PerturbedPotential.quartic()


@pytest.fixture(scope="session")
def well(quartic):
    return classify_wells(quartic, -1.0)


@pytest.fixture(scope="session")
def ev(quartic, well):
    return ActionEvaluator(quartic, well)
