"""
Tokenization helpers shared by queries, corpus sentences and tuple keys.
"""

import re
from typing import List, Sequence

# Initialisms ("U.S.") stay whole; words keep inner hyphens/apostrophes;
# every other non-space character is its own token.
TOKEN_RE = re.compile(r"(?:[^\W\d_]\.){2,}|\w+(?:['’\-]\w+)*|[^\w\s]")
_SPACE_RE = re.compile(r"\s+")


def tokenize(text: str) -> List[str]:
    """Split running text into surface tokens"""
    return TOKEN_RE.findall(text)


def fold(word: str) -> str:
    return word.casefold()


def normalize_phrase(text: str) -> str:
    """Case-folded, whitespace-collapsed form used as a dedup identity"""
    return _SPACE_RE.sub(" ", text.casefold()).strip()


def join_words(words: Sequence[str]) -> str:
    """Join tokens with single spaces, attaching commas to the left word"""
    out = ""
    for word in words:
        if word == "," and out:
            out += ","
        elif out:
            out += " " + word
        else:
            out = word
    return out


def has_alpha(word: str) -> bool:
    return any(ch.isalpha() for ch in word)


def is_capitalized(word: str) -> bool:
    return bool(word) and word[0].isupper() and has_alpha(word)
