import pytest

from seqnash.games import prune_pins
from seqnash.generators import generate_kuhn2, generate_kuhn3


@pytest.fixture(scope="session")
def kuhn3_full():
    return generate_kuhn3()


@pytest.fixture(scope="session")
def kuhn3_reduced(kuhn3_full):
    game, pins = kuhn3_full
    return prune_pins(game, pins)


@pytest.fixture(scope="session")
def kuhn2():
    return generate_kuhn2()
