"""
Shared fixtures for the WildQuery test suite.
"""

import pytest

from wildquery.modules.lexicon import load_lexicon, lexicon_from_tables
from wildquery.modules.rewrite_engine import builtin_rules
from wildquery.modules.synthetic import build_states_corpus, states_corpus


@pytest.fixture(scope="session")
def lex():
    """The bundled lexicon"""
    return load_lexicon()


@pytest.fixture(scope="session")
def rules():
    return builtin_rules()


@pytest.fixture
def tiny_lex():
    return lexicon_from_tables(
        similar={"movie": ["film"], "country": ["nation"]},
        inflections={"movie": "movies", "film": "films", "country": "countries", "nation": "nations"},
        nouns=["singer", "light bulb"],
        adjectives=["popular"],
        proper_stoplist=["the", "many"],
        verbs=[("invent", "invented", "invented", "invents")],
    )


@pytest.fixture(scope="session")
def states():
    """The synthetic US-states corpus, in memory"""
    return states_corpus()


@pytest.fixture(scope="session")
def states_dir(tmp_path_factory):
    """(docs directory, truth file) of the synthetic corpus on disk"""
    return build_states_corpus(tmp_path_factory.mktemp("states"))
