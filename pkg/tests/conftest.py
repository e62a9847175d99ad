from pathlib import Path

import pytest

from fobn.logic import Predicate, Vocabulary
from fobn.spec import parse_spec

SAMPLES = Path(__file__).resolve().parent.parent / "samples"

FRIENDS = """
root fan/1 = 0.2.
define friends(x, y) <=> x = y | (fan(x) & fan(y)) | other(x, y).
root other/2 = 0.1.
"""


@pytest.fixture
def friends():
    return parse_spec(FRIENDS)


@pytest.fixture
def mark_sigma():
    return Vocabulary([Predicate("mark", 1)])


@pytest.fixture
def samples():
    return SAMPLES
