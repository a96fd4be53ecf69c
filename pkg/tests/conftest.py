import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tdlab import boyan_chain, induce_chain


@pytest.fixture(scope="session")
def boyan():
    """(mdp, policy, features, chain) of the built-in benchmark."""
    mdp, policy, features = boyan_chain()
    return mdp, policy, features, induce_chain(mdp, policy)
