"""Text handling: normalization, readability, lexicon matching, language detection."""

from __future__ import annotations

import json
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Protocol, Sequence, Tuple

log = logging.getLogger(__name__)

_WS = re.compile(r"\s+")


def normalize(text: str) -> str:
    """Lowercase, collapse whitespace runs, trim. Punctuation is kept."""
    return _WS.sub(" ", text.lower()).strip()


# -- readability --------------------------------------------------------------

_SENTENCE_END = re.compile(r"[.!?]+")
_HAS_LETTER = re.compile(r"[^\W\d_]")
_VOWEL_GROUP = re.compile(r"[aeiouy]+")
_VOWELS = set("aeiouy")

FLESCH_BASE = Fraction("206.835")
FLESCH_SENTENCE_WEIGHT = Fraction("1.015")
FLESCH_SYLLABLE_WEIGHT = Fraction("84.6")


def count_syllables(word: str) -> int:
    w = "".join(ch for ch in word.lower() if ch.isalpha())
    if not w:
        return 1
    count = len(_VOWEL_GROUP.findall(w))
    if w.endswith("e") and len(w) >= 2 and w[-2] not in _VOWELS:
        consonant_le = w.endswith("le") and len(w) >= 3 and w[-3] not in _VOWELS
        if not consonant_le:
            count -= 1
    return max(count, 1)


def split_words(text: str) -> List[str]:
    return [tok for tok in text.split() if _HAS_LETTER.search(tok)]


def count_sentences(text: str) -> int:
    return max(len(_SENTENCE_END.findall(text)), 1)


@dataclass(frozen=True)
class Readability:
    words: int
    sentences: int
    syllables: int
    exact: Fraction

    @property
    def score(self) -> float:
        return float(self.exact)


def flesch_formula(words: int, sentences: int, syllables: int) -> Fraction:
    return (
        FLESCH_BASE
        - FLESCH_SENTENCE_WEIGHT * Fraction(words, sentences)
        - FLESCH_SYLLABLE_WEIGHT * Fraction(syllables, words)
    )


def readability(text: str) -> Readability:
    words = split_words(text)
    if not words:
        raise ValueError("text contains no words")
    sentences = count_sentences(text)
    syllables = sum(count_syllables(w) for w in words)
    return Readability(len(words), sentences, syllables, flesch_formula(len(words), sentences, syllables))


def flesch_reading_ease(text: str) -> float:
    return readability(text).score


# -- lexicons -----------------------------------------------------------------


class MatchMode(str, Enum):
    EXACT = "exact"
    FUZZY = "fuzzy"


@dataclass(frozen=True)
class LexiconSet:
    name: str
    entries: Tuple[Tuple[str, str], ...]

    def __post_init__(self) -> None:
        seen = []
        for phrase, category in self.entries:
            pair = (normalize(phrase), category)
            if pair[0] and pair not in seen:
                seen.append(pair)
        object.__setattr__(self, "entries", tuple(seen))

    @classmethod
    def from_mapping(cls, name: str, mapping: Dict[str, Iterable[str]]) -> "LexiconSet":
        return cls(name, tuple((p, cat) for cat, phrases in mapping.items() for p in phrases))

    @classmethod
    def from_json(cls, doc: dict) -> "LexiconSet":
        return cls(doc["name"], tuple((e["phrase"], e["category"]) for e in doc["entries"]))

    @classmethod
    def load(cls, path: Path) -> "LexiconSet":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_json(self) -> dict:
        return {"name": self.name, "entries": [{"phrase": p, "category": c} for p, c in self.entries]}

    def phrases(self, category: Optional[str] = None) -> List[str]:
        return [p for p, c in self.entries if category is None or c == category]

    def categories(self) -> List[str]:
        return list(dict.fromkeys(c for _, c in self.entries))

    def merged(self, other: "LexiconSet") -> "LexiconSet":
        return LexiconSet(self.name, self.entries + other.entries)


def _data_text(name: str) -> str:
    return resources.files("consentlens.data").joinpath(name).read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def shipped_lexicon(name: str) -> LexiconSet:
    """One of dp11_definitions, dp12_purposes, dp13_pricing, dp17_legal."""
    return LexiconSet.from_json(json.loads(_data_text(f"{name}.json")))


@dataclass(frozen=True)
class LexiconMatch:
    phrase: str
    category: str
    position: int
    mode: MatchMode
    similarity: float = 1.0
    matched_text: str = ""

    @property
    def end(self) -> int:
        return self.position + len(self.matched_text)


@lru_cache(maxsize=4096)
def phrase_pattern(phrase: str) -> "re.Pattern[str]":
    """Word-boundary guards only where the phrase edge is a word character,
    so symbols like the euro sign still match inside tokens such as "4€"."""
    left = r"(?<!\w)" if re.match(r"\w", phrase[0]) else ""
    right = r"(?!\w)" if re.match(r"\w", phrase[-1]) else ""
    return re.compile(left + re.escape(phrase) + right)


def exact_matches(text: str, lexicon: LexiconSet) -> List[LexiconMatch]:
    out = []
    for phrase, category in lexicon.entries:
        for m in phrase_pattern(phrase).finditer(text):
            out.append(LexiconMatch(phrase, category, m.start(), MatchMode.EXACT, 1.0, m.group(0)))
    return out


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def token_dice(a_tokens: Sequence[str], b_tokens: Sequence[str]) -> float:
    total = len(a_tokens) + len(b_tokens)
    if total == 0:
        return 1.0
    shared = sum((Counter(a_tokens) & Counter(b_tokens)).values())
    return 2.0 * shared / total


def edit_similarity(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def fuzzy_similarity(a: str, b: str) -> float:
    """Mean of token-multiset Dice and normalized edit similarity."""
    return 0.5 * token_dice(a.split(), b.split()) + 0.5 * edit_similarity(a, b)


# Windows span word runs so punctuation glued to a word does not block a match.
_TOKEN = re.compile(r"\w+(?:['’-]\w+)*")


def fuzzy_matches(text: str, lexicon: LexiconSet, threshold: float) -> List[LexiconMatch]:
    spans = [(m.start(), m.end(), m.group(0)) for m in _TOKEN.finditer(text)]
    tokens = [s[2] for s in spans]
    # Blended score is at most (dice + 1) / 2, so windows below this dice cannot qualify.
    dice_floor = 2.0 * threshold - 1.0
    out: List[LexiconMatch] = []
    for phrase, category in lexicon.entries:
        p_tokens = phrase.split()
        n = len(p_tokens)
        lo = max(1, math.ceil(0.6 * n))
        hi = max(lo, math.floor(1.4 * n))
        found: List[LexiconMatch] = []
        for size in range(lo, hi + 1):
            for i in range(0, len(tokens) - size + 1):
                if token_dice(tokens[i : i + size], p_tokens) < dice_floor:
                    continue
                start, end = spans[i][0], spans[i + size - 1][1]
                window = text[start:end]
                sim = fuzzy_similarity(window, phrase)
                if sim >= threshold:
                    found.append(LexiconMatch(phrase, category, start, MatchMode.FUZZY, sim, window))
        # keep the best window among overlapping ones for this phrase
        found.sort(key=lambda m: (-m.similarity, m.position, len(m.matched_text)))
        kept: List[LexiconMatch] = []
        for m in found:
            if all(m.end <= k.position or k.end <= m.position for k in kept):
                kept.append(m)
        out.extend(kept)
    return out


def match_lexicon(text: str, lexicon: LexiconSet, mode: str = "exact", fuzzy_threshold: float = 0.85) -> List[LexiconMatch]:
    """``mode`` is "exact" or "exact+fuzzy"."""
    if not (0.0 < fuzzy_threshold <= 1.0):
        raise ValueError(f"fuzzy_threshold must be in (0, 1], got {fuzzy_threshold}")
    if mode not in ("exact", "exact+fuzzy"):
        raise ValueError(f"unknown match mode {mode!r}")
    if not text:
        return []
    matches = exact_matches(text, lexicon)
    if mode == "exact+fuzzy":
        matches.extend(fuzzy_matches(text, lexicon, fuzzy_threshold))
    matches.sort(key=lambda m: (m.position, m.mode.value, m.phrase))
    return matches


# -- language detection -------------------------------------------------------


@dataclass(frozen=True)
class LanguageGuess:
    lang: str
    confidence: float
    reliable: bool = True

    def __iter__(self):
        yield self.lang
        yield self.confidence


MIN_RELIABLE_CHARS = 20


@lru_cache(maxsize=1)
def _profiles() -> Dict[str, Tuple[List[int], Dict[str, int]]]:
    raw = json.loads(_data_text("langprofiles.json"))
    return {lang: (p["n_words"], p["freq"]) for lang, p in raw.items()}


def _ngrams(text: str) -> List[str]:
    grams: List[str] = []
    for word in re.findall(r"[^\W\d_]+", text.lower()):
        padded = f" {word} "
        for n in (1, 2, 3):
            for i in range(len(padded) - n + 1):
                g = padded[i : i + n]
                if g.strip():
                    grams.append(g)
    return grams


def detect_language(text: str) -> LanguageGuess:
    """Naive Bayes over character 1-3-gram profiles.

    Confidence is the gap between the two highest posteriors.
    """
    stripped = text.strip()
    if not stripped:
        raise ValueError("detect_language needs non-empty text")
    profiles = _profiles()
    grams = [g for g in _ngrams(stripped) if any(g in f for _, f in profiles.values())]
    langs = sorted(profiles)
    if not grams:
        return LanguageGuess("en", 0.0, False)
    scores = []
    for lang in langs:
        n_words, freq = profiles[lang]
        s = 0.0
        for g in grams:
            s += math.log((freq.get(g, 0) + 0.5) / (n_words[len(g) - 1] + 1.0))
        scores.append(s)
    top = max(scores)
    weights = [math.exp(s - top) for s in scores]
    total = sum(weights)
    post = sorted(((w / total, lang) for w, lang in zip(weights, langs)), reverse=True)
    margin = post[0][0] - (post[1][0] if len(post) > 1 else 0.0)
    reliable = len(stripped) >= MIN_RELIABLE_CHARS
    return LanguageGuess(post[0][1], margin, reliable)


# -- translation --------------------------------------------------------------


class TranslationPort(Protocol):
    def translate(self, text: str, src: str, dst: str) -> str: ...


@dataclass(frozen=True)
class Translation:
    text: str
    applied: bool
    warning: Optional[str] = None


def translate(text: str, src: str, dst: str = "en", port: Optional[TranslationPort] = None) -> Translation:
    if src == dst:
        return Translation(text, False)
    if port is None:
        msg = f"no translator configured for {src}->{dst}; using original text"
        log.warning(msg)
        return Translation(text, False, msg)
    try:
        return Translation(port.translate(text, src, dst), True)
    except Exception as exc:  # the port is foreign code; any failure falls back
        msg = f"translation {src}->{dst} failed: {exc}"
        log.warning(msg)
        return Translation(text, False, msg)
