import os
import sys

import pytest

# Add src to Python path
ROOT_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(ROOT_DIR, "src"))

from scenario.corpus import corpus_path, load_scenario  # noqa: E402


@pytest.fixture
def load():
    """Parse a shipped scenario by name."""
    return lambda name: load_scenario(corpus_path(name))


@pytest.fixture(scope="session")
def scenario_text():
    def read(name):
        return corpus_path(name).read_text(encoding="utf-8")
    return read
