#!/usr/bin/env python3
"""
SYNTHETIC CORPUS - US STATES
Builds a small seeded corpus in which the 50 US states appear across the
hyponym templates with decreasing frequency, mixed with distractor
sentences and a few traps (non-states in state templates).
"""

import logging
import random
import shutil
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

from .. import config
from .corpus import Corpus, corpus_from_texts

logger = logging.getLogger(__name__)

TRUTH_FILE = "us_states.truth"
SENTENCES_PER_DOCUMENT = 4
NOISE_SENTENCES = 220

# template name -> (number of states, sentence, list-valued)
STATE_TEMPLATES: Dict[str, Tuple[int, str, bool]] = {
    "including": (50, "Several US states, including {}, expanded their highway budgets.", True),
    "such-as": (36, "Tourists often visit US states such as {} during the summer.", True),
    "and-other": (35, "Officials said {} and other US states reported strong growth.", True),
    "is-a": (20, "Everyone knows that {} is a US state.", False),
    "such-x-as": (19, "The program covers such US states as {} in its pilot phase.", True),
    "especially": (16, "Drought hit several US states, especially {}.", True),
    "or-other": (13, "Residents of {} or other US states may apply for the grant.", True),
    "is-the": (9, "Many guides claim that {} is the US state with the best parks.", False),
    "compound": (2, "The chart compares US states {} in detail.", True),
}

TRAP_SENTENCES = (
    "Many tourists believe that Ontario is a US state.",
    "Many tourists believe that Quebec is a US state.",
    "Many tourists believe that Bermuda is a US state.",
    "Many tourists believe that Greenland is a US state.",
    "Many tourists believe that Guam is a US state.",
    "Many tourists believe that Puerto Rico is a US state.",
    "Some visitors think that Toronto is the US state with the most lakes.",
    "Several US states, including the District of Columbia, raised their sales tax.",
)

CITIES = (
    "Chicago", "Boston", "Denver", "Seattle", "Atlanta", "Phoenix", "Portland",
    "Miami", "Dallas", "Houston", "Nashville", "Detroit", "Toronto", "Montreal",
)

NOISE_TEMPLATES = (
    "The governor of {state} signed a new budget law.",
    "Heavy snow closed several roads in {state} last winter.",
    "The city of {city} hosted a large music festival this summer.",
    "Farmers in {state} reported a strong harvest this year.",
    "A new museum opened in {city} last month.",
    "The river flows through {state} and {state2}.",
    "Visitors to {city} often praise its restaurants.",
    "The team from {state} won the championship game.",
    "Local officials in {state} expanded the public transit network.",
    "Researchers at a university in {state} studied the climate of the region.",
    "A long train trip from {city} to {city2} takes two days.",
    "The population of {city} grew quickly during the last decade.",
    "Tourism in {state} depends on its parks and lakes.",
    "Everyone agrees that Joe is a country singer.",
    "Joe is a country singer.",
    "The weather in {city} was warm and dry.",
)


def state_names(truth_path: Union[str, Path, None] = None) -> List[str]:
    """Canonical state names (first alternate of every truth line)"""
    path = Path(truth_path or config.DATA_DIR / TRUTH_FILE)
    names = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip() and not line.startswith("#"):
            names.append(line.split("|")[0].strip())
    return names


def _english_list(items: Sequence[str]) -> str:
    if len(items) == 1:
        return items[0]
    return ", ".join(items[:-1]) + " and " + items[-1]


def _assign_states(states: Sequence[str], rng: random.Random) -> Dict[str, List[str]]:
    """States per template; every state lands in "including" and at least one other template"""
    order = list(states)
    rng.shuffle(order)
    assignment: Dict[str, List[str]] = {}
    uncovered = order[:]
    for name, (count, _, _) in STATE_TEMPLATES.items():
        if name == "including":
            assignment[name] = order[:]
            continue
        picked = uncovered[:count]
        rest = [s for s in order if s not in picked]
        rng.shuffle(rest)
        picked += rest[:count - len(picked)]
        uncovered = [s for s in uncovered if s not in picked]
        assignment[name] = picked
    if uncovered:
        raise RuntimeError(f"states without a second template: {uncovered}")
    return assignment


def _pattern_sentences(assignment: Dict[str, List[str]], rng: random.Random) -> List[str]:
    sentences = []
    for name, (_, template, listed) in STATE_TEMPLATES.items():
        pool = assignment[name][:]
        rng.shuffle(pool)
        while pool:
            size = rng.randint(1, 3) if listed else 1
            group, pool = pool[:size], pool[size:]
            sentences.append(template.format(_english_list(group)))
    return sentences


def _noise_sentences(states: Sequence[str], rng: random.Random, count: int) -> List[str]:
    sentences = []
    for _ in range(count):
        template = rng.choice(NOISE_TEMPLATES)
        state, state2 = rng.sample(list(states), 2)
        city, city2 = rng.sample(CITIES, 2)
        sentences.append(template.format(state=state, state2=state2, city=city, city2=city2))
    return sentences


def states_documents(seed: int = config.DEFAULT_SEED, noise: int = NOISE_SENTENCES) -> List[str]:
    """Document texts of the synthetic corpus"""
    rng = random.Random(seed)
    states = state_names()
    sentences = _pattern_sentences(_assign_states(states, rng), rng)
    sentences += list(TRAP_SENTENCES)
    sentences += _noise_sentences(states, rng, noise)
    rng.shuffle(sentences)
    return [" ".join(sentences[i:i + SENTENCES_PER_DOCUMENT])
            for i in range(0, len(sentences), SENTENCES_PER_DOCUMENT)]


def states_corpus(seed: int = config.DEFAULT_SEED) -> Corpus:
    """The synthetic corpus, in memory"""
    return corpus_from_texts(states_documents(seed), source_prefix="states")


def build_states_corpus(out_dir: Union[str, Path], seed: int = config.DEFAULT_SEED) -> Tuple[Path, Path]:
    """
    Write the synthetic corpus as text files plus its truth file.

    Returns:
        (directory of .txt documents, truth file path)
    """
    out_dir = Path(out_dir)
    docs_dir = out_dir / "docs"
    docs_dir.mkdir(parents=True, exist_ok=True)
    texts = states_documents(seed)
    for i, text in enumerate(texts):
        (docs_dir / f"doc_{i:04d}.txt").write_text(text + "\n", encoding="utf-8")
    truth_path = out_dir / TRUTH_FILE
    shutil.copyfile(config.DATA_DIR / TRUTH_FILE, truth_path)
    logger.info("[SYNTH] wrote %d documents to %s", len(texts), docs_dir)
    return docs_dir, truth_path
