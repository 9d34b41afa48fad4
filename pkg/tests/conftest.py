import asyncio
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rhizome.fixturekit import build_demo_scenario


def run(coro):
    return asyncio.run(coro)


@pytest.fixture(scope="session")
def demo_scenario(tmp_path_factory):
    """Full offline scenario with a citation hub: triggers two P4 re-entries."""
    root = tmp_path_factory.mktemp("scenario_hub")
    return build_demo_scenario(root)


@pytest.fixture(scope="session")
def calm_scenario(tmp_path_factory):
    """No citation shadow: the first centralization trigger comes from the
    phase-5 relation graph."""
    root = tmp_path_factory.mktemp("scenario_calm")
    return build_demo_scenario(root, hub_refs=False)
