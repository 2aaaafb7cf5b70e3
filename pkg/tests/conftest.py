import pathlib

import pytest

from galcheck.extensive import ExtensiveGame, decision, terminal, to_gal_structure

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def example_game() -> ExtensiveGame:
    """The two-player reference game: 1 picks A or B; after A, 2 picks L or R.
    Payoffs: B -> (1,2), (A,L) -> (0,0), (A,R) -> (2,1)."""
    return ExtensiveGame(
        ("1", "2"),
        decision(
            "1",
            {
                "A": decision(
                    "2",
                    {
                        "L": terminal({"1": 0, "2": 0}),
                        "R": terminal({"1": 2, "2": 1}),
                    },
                ),
                "B": terminal({"1": 1, "2": 2}),
            },
        ),
    )


@pytest.fixture(scope="session")
def example_structure(example_game):
    return to_gal_structure(example_game)


@pytest.fixture(scope="session")
def example_game_path() -> pathlib.Path:
    return FIXTURES / "example1.game.json"


@pytest.fixture(scope="session")
def example_structure_path() -> pathlib.Path:
    return FIXTURES / "example2.structure.json"
