"""
Tests for tagging, noun phrase chunking, slot binding and graph building
"""

import itertools

import pytest

from wildquery.modules.corpus import LocalScanBackend, corpus_from_texts, retrieve
from wildquery.modules.extract import (
    CandidateTuple,
    Evidence,
    TupleTable,
    chunk_noun_phrases,
    extract_all,
    match_pattern,
    tag_sentence,
)
from wildquery.modules.lexicon import lexicon_from_tables
from wildquery.modules.query_model import parse_query
from wildquery.modules.rewrite_engine import Pattern, expand_all

MOVIES = "Popular summer movies such as Harry Potter, Shrek and Spiderman appeal to audience of all ages."
EDISON = (
    "Thomas Edison is often said to have invented the light bulb. "
    "We all learned in our history classes that Thomas Edison invented the light bulb in 1879."
)


def pattern(text):
    return Pattern(text, parse_query(text).arity)


def values(matches):
    return [candidate.values for candidate, _ in matches]


def one_sentence(text):
    return corpus_from_texts([text]).documents[0].sentences[0]


# ============================================================================
# TAGGING AND CHUNKING
# ============================================================================

def test_tagger_marks_proper_and_common_nouns(lex):
    tags = tag_sentence(one_sentence("In 2006 Google acquired YouTube."), lex)
    assert tags == ["O", "O", "NNP", "O", "NNP", "O"]


def test_multiword_noun_is_one_chunk(lex):
    phrases = [np.text for np in chunk_noun_phrases(one_sentence("Edison invented the light bulb."), lex)]
    assert "the light bulb" in phrases


def test_sentence_initial_adjective_is_not_a_name(lex):
    phrases = [np.text for np in chunk_noun_phrases(one_sentence(MOVIES), lex)]
    assert phrases[0] == "Popular summer movies"
    assert "Harry Potter" in phrases


def test_unknown_sentence_initial_word_is_not_a_name(lex):
    phrases = [np.text for np in chunk_noun_phrases(one_sentence("Joe is a country singer."), lex)]
    assert phrases == ["a country singer"]


# ============================================================================
# SLOT BINDING
# ============================================================================

def test_such_as_list(lex):
    matches = match_pattern(pattern("summer movies such as %"), one_sentence(MOVIES), lex)
    assert values(matches) == [("Harry Potter",), ("Shrek",), ("Spiderman",)]


def test_edison_snippets(lex):
    corpus = corpus_from_texts([EDISON])
    found = []
    for sentence in retrieve("% invented the light bulb", corpus, cap=10):
        found.extend(values(match_pattern(pattern("% invented the light bulb"), sentence, lex)))
    assert found == [("Thomas Edison",)]


def test_leading_list(lex):
    sentence = one_sentence("Officials said Texas, Ohio and Maine and other US states reported growth.")
    assert values(match_pattern(pattern("% and other US states"), sentence, lex)) == [
        ("Texas",), ("Ohio",), ("Maine",)]


def test_two_slot_pattern(lex):
    sentence = one_sentence("In 2006 Google acquired YouTube.")
    assert values(match_pattern(pattern("% acquired %"), sentence, lex)) == [("Google", "YouTube")]


def test_two_slot_pattern_sentence_initial_subject(lex):
    sentence = one_sentence("Google acquired YouTube.")
    # an unknown capitalized first word before a lowercase word is not a name
    assert match_pattern(pattern("% acquired %"), sentence, lex) == []
    known = lexicon_from_tables(nouns=["Google"])
    assert values(match_pattern(pattern("% acquired %"), sentence, known)) == [("Google", "YouTube")]


def test_middle_slot_must_fill_the_gap(lex):
    sentence = one_sentence("We know Boston and Denver are cities.")
    assert values(match_pattern(pattern("% and % are cities"), sentence, lex)) == [("Boston", "Denver")]
    busy = one_sentence("We know Boston and the old bridge over Denver are cities.")
    assert match_pattern(pattern("% and % are cities"), busy, lex) == []


def test_slot_without_noun_phrase_binds_nothing(lex):
    assert match_pattern(pattern("US states such as %"), one_sentence("US states such as these."), lex) == []


def test_tuple_cap_per_sentence(lex):
    sentence = one_sentence("Cities such as Austin, Boston, Denver, Miami and Dallas grew.")
    assert len(match_pattern(pattern("cities such as %"), sentence, lex, max_tuples=3)) == 3


def test_evidence_points_at_sentence(lex):
    corpus = corpus_from_texts(["Nothing here. Cities such as Boston grew."])
    sentence = corpus.documents[0].sentences[1]
    [(candidate, evidence)] = match_pattern(pattern("cities such as %"), sentence, lex)
    assert candidate.key == ("boston",)
    assert evidence == Evidence("cities such as %", ("boston",), 0, sentence.offset)


# ============================================================================
# TUPLE TABLE AND GRAPH
# ============================================================================

def test_table_merges_surface_variants():
    table = TupleTable()
    table.add(CandidateTuple.from_values(["New York"]), Evidence("p", ("new york",), 0, 0))
    table.add(CandidateTuple.from_values(["NEW YORK"]), Evidence("p", ("new york",), 1, 0))
    table.add(CandidateTuple.from_values(["New York"]), Evidence("q", ("new york",), 2, 5))
    assert table.add(CandidateTuple.from_values(["New York"]), Evidence("q", ("new york",), 2, 5)) is False
    record = table[("new york",)]
    assert len(table) == 1
    assert record.display == ("New York",)
    assert record.documents("p") == {0, 1}


def test_graph_weights_count_documents(lex):
    corpus = corpus_from_texts([
        "Cities such as Boston grew. Cities such as Boston shrank.",
        "Cities such as Boston and Denver boomed. Officials in Denver and other cities voted.",
    ])
    patterns = [pattern("cities such as %"), pattern("% and other cities")]
    table, graph = extract_all(patterns, corpus, cap=200, lex=lex, workers=2)
    assert graph.tuples == (("boston",), ("denver",))
    assert graph.edges == {(0, 0): 2, (0, 1): 1, (1, 1): 1}


def test_extract_all_uses_given_backend(lex):
    corpus = corpus_from_texts(["Cities such as Boston grew. Cities such as Denver grew."])

    class Recording(LocalScanBackend):
        def __init__(self, corpus):
            super().__init__(corpus)
            self.calls = []

        def search(self, pattern_text, cap):
            self.calls.append((pattern_text, cap))
            return super().search(pattern_text, cap)[:1]

    backend = Recording(corpus)
    _, graph = extract_all([pattern("cities such as %")], corpus, cap=7, lex=lex, backend=backend)
    assert backend.calls == [("cities such as %", 7)]
    assert graph.tuples == (("boston",),)


def brute_force_edges(patterns, corpus, lex):
    docs = {}
    tuples = []
    for p_index, p in enumerate(patterns):
        for sentence in corpus.sentences():
            for candidate, _ in match_pattern(p, sentence, lex):
                if candidate.key not in tuples:
                    tuples.append(candidate.key)
                docs.setdefault((p_index, tuples.index(candidate.key)), set()).add(sentence.doc_id)
    return tuples, {edge: len(ids) for edge, ids in docs.items()}


def test_extract_all_matches_brute_force(lex, rules, states):
    small = corpus_from_texts([d.text for d in states.documents[:25]])
    patterns = expand_all(parse_query("US states such as %"), rules, lex)
    _, graph = extract_all(patterns, small, cap=200, lex=lex)
    tuples, edges = brute_force_edges(patterns, small, lex)
    assert list(graph.tuples) == tuples
    assert graph.edges == edges


def test_extract_all_needs_patterns(lex):
    with pytest.raises(ValueError):
        extract_all([], corpus_from_texts(["x."]), cap=1, lex=lex)


def test_extract_all_is_deterministic_across_worker_counts(lex, rules, states):
    patterns = expand_all(parse_query("US states such as %"), rules, lex)
    runs = [extract_all(patterns, states, cap=200, lex=lex, workers=w)[1] for w in (1, 4)]
    assert runs[0].tuples == runs[1].tuples
    assert runs[0].edges == runs[1].edges


def test_duplicate_patterns_are_ignored(lex):
    corpus = corpus_from_texts(["Cities such as Boston grew."])
    p = pattern("cities such as %")
    _, graph = extract_all([p, p], corpus, cap=5, lex=lex)
    assert graph.m == 1


@pytest.mark.parametrize("text", ["Cities such as Boston grew.", "We know Boston is a city."])
def test_keys_are_normalized(lex, text):
    table, _ = extract_all([pattern("cities such as %"), pattern("% is a city")],
                           corpus_from_texts([text]), cap=5, lex=lex)
    assert table.keys() == [("boston",)]


def test_cartesian_product_of_lists(lex):
    sentence = one_sentence("In 2007 Google and Yahoo acquired YouTube and Flickr.")
    found = set(values(match_pattern(pattern("% acquired %"), sentence, lex)))
    assert found == set(itertools.product(["Google", "Yahoo"], ["YouTube", "Flickr"]))
