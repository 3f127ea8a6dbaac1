"""Reference-block splitting and cited-surname extraction.

Handles the bibliography conventions of APA, MLA, Chicago, Angewandte
Chemie, IEEE and ACL styles with rule-based heuristics. The parser is
fail-fast at the block level (no plausible split drops the paper) and
lenient at the entry level (an unparseable author zone yields an empty
surname list).
"""

from __future__ import annotations

import re
import statistics
from dataclasses import dataclass
from enum import Enum

from .errors import DropPaper

# Plausibility bounds for one split reference, in characters.
MIN_REF_LEN = 40
MAX_REF_LEN = 2000
MIN_REFS = 3
# parse_block soundness: at least this fraction of entries must yield names.
MIN_NAMED_FRACTION = 0.5


class Separator(Enum):
    BRACKET_INDEX = "bracket_index"
    DOT_END_OF_LINE = "dot_end_of_line"
    YEAR_PATTERN = "year_pattern"
    SEMICOLON_BLOCK = "semicolon_block"


@dataclass(frozen=True)
class SplitReport:
    separator_used: Separator
    n_refs: int
    plausible: bool


@dataclass(frozen=True)
class CitedReference:
    raw: str
    surnames: tuple[str, ...]


_YEAR_RE = re.compile(r"\b(19|20)\d\d[a-z]?\b")
_BRACKET_SPLIT_RE = re.compile(r"^[ \t]*\[\d+\][ \t]*", re.MULTILINE)
_LEADING_INDEX_RE = re.compile(r"^\s*(?:\[\d+\]|\(\d+\)|\d+[.)])\s+")
_INITIAL_RE = re.compile(r"^[A-Za-z]\.?$")
# Dots attached to a letter (initials "J.", abbreviations "Angew.", sentence
# ends "Jones.") are masked before inferring the name delimiter; otherwise
# initials-heavy and abbreviated-journal styles would always elect the dot.
_LETTER_DOT_RE = re.compile(r"(?<=[A-Za-z])\.")
_ET_AL_RE = re.compile(r"\bet\.?\s+al\.?,?", re.IGNORECASE)
_AND_SPLIT_RE = re.compile(r"\s+(?:and|&)\s+|^(?:and|&)\s+", re.IGNORECASE)
# Sentence dot that starts a title ("Austen, Jane. Pride and ...") ends the
# author zone. The next word must not look like a journal abbreviation
# ("Angew. Chem."), i.e. short and dot-terminated; a long dot-terminated
# word is a one-word title ("Frankenstein.").
_SENTENCE_DOT_RE = re.compile(
    r"(?<=[A-Za-z][a-z])\.(?=\s+(?:[A-Z][a-z]+(?![\w.])|[A-Z][a-z]{6,}\.))"
)
_NAME_SUFFIXES = {"jr", "sr", "jnr", "snr", "ii", "iii", "iv"}

# Ties in the delimiter frequency count are broken in this order.
_DELIM_PRIORITY = [",", ";", "&", "/", "."]
# Intra-name characters: never author separators.
_NON_DELIMITERS = {"'", "’", "-", "‐", "‑"}


def _split_bracket_index(block: str) -> list[str]:
    parts = _BRACKET_SPLIT_RE.split(block)
    return [p.strip() for p in parts if p.strip()]


def _split_dot_end_of_line(block: str) -> list[str]:
    refs = []
    buf: list[str] = []
    for line in block.split("\n"):
        buf.append(line)
        if line.rstrip().endswith("."):
            refs.append(" ".join(buf).strip())
            buf = []
    if buf:
        tail = " ".join(buf).strip()
        if tail:
            refs.append(tail)
    return [r for r in refs if r]


def _split_year_pattern(block: str) -> list[str]:
    # A line containing a year closes the current entry.
    refs = []
    buf: list[str] = []
    for line in block.split("\n"):
        buf.append(line)
        if _YEAR_RE.search(line):
            refs.append(" ".join(buf).strip())
            buf = []
    if buf:
        tail = " ".join(buf).strip()
        if tail:
            refs.append(tail)
    return [r for r in refs if r]


def _split_semicolon(block: str) -> list[str]:
    flat = " ".join(block.split("\n"))
    return [p.strip() for p in flat.split(";") if p.strip()]


_SPLITTERS = [
    (Separator.BRACKET_INDEX, _split_bracket_index),
    (Separator.DOT_END_OF_LINE, _split_dot_end_of_line),
    (Separator.YEAR_PATTERN, _split_year_pattern),
    (Separator.SEMICOLON_BLOCK, _split_semicolon),
]


def _plausible(refs: list[str]) -> bool:
    if len(refs) < MIN_REFS:
        return False
    median_len = statistics.median(len(r) for r in refs)
    return MIN_REF_LEN <= median_len <= MAX_REF_LEN


def split_references(block: str) -> tuple[list[str], SplitReport]:
    """Split a references block into individual citation strings.

    Separators are tried in a fixed priority order; the first one producing
    a plausible split (enough entries, sane median length) wins. No
    plausible split drops the paper.
    """
    if not block.strip():
        raise DropPaper("refsplit", "empty references block")
    for sep, splitter in _SPLITTERS:
        refs = splitter(block)
        if _plausible(refs):
            return refs, SplitReport(sep, len(refs), True)
    raise DropPaper("refsplit", "no separator produced a plausible split")


def _author_zone(reference: str) -> str:
    """Prefix of a reference up to the first quote, opening bracket, year,
    or title-opening sentence dot."""
    cut = len(reference)
    for ch in ('"', "“", "”", "(", "["):
        pos = reference.find(ch)
        if pos != -1:
            cut = min(cut, pos)
    m = _YEAR_RE.search(reference)
    if m:
        cut = min(cut, m.start())
    m = _SENTENCE_DOT_RE.search(reference)
    if m:
        cut = min(cut, m.end())
    return reference[:cut]


def _infer_delimiter(zone: str) -> str | None:
    """Most frequent non-alphanumeric, non-whitespace character in the zone,
    after masking letter-attached dots and 'et al.'. Frequency ties fall
    back to a fixed priority list."""
    masked = _ET_AL_RE.sub(" ", zone)
    masked = _LETTER_DOT_RE.sub(" ", masked)
    counts: dict[str, int] = {}
    for ch in masked:
        if not ch.isalnum() and not ch.isspace() and ch not in _NON_DELIMITERS:
            counts[ch] = counts.get(ch, 0) + 1
    if not counts:
        return None
    best = max(counts.values())
    candidates = [ch for ch, n in counts.items() if n == best]
    for ch in _DELIM_PRIORITY:
        if ch in candidates:
            return ch
    return sorted(candidates)[0]


def _split_on_delimiter(zone: str, delim: str) -> list[str]:
    if delim == ".":
        # Do not split at initials' dots: require two word characters before
        # the dot so "J. K. Rowling" stays intact.
        return re.split(r"(?<=\w\w)\.", zone)
    return zone.split(delim)


def _is_initials_only(tokens: list[str]) -> bool:
    return bool(tokens) and all(_INITIAL_RE.match(t) for t in tokens)


def _is_abbreviation_run(tokens: list[str]) -> bool:
    # "Angew. Chem. Int. Ed." style venue runs: several tokens, every one
    # dot-terminated. A single dotted token is a sentence-final name.
    return len(tokens) >= 2 and all(t.endswith(".") for t in tokens)


def _surname_from_part(part: str) -> str | None:
    tokens = [
        t
        for t in part.split()
        if not _ET_AL_RE.fullmatch(t) and t.lower() not in ("and", "&", "with")
    ]
    if not tokens:
        return None
    if _is_initials_only(tokens):
        # "J." or "A. B." alone: the initials of the preceding surname.
        return None
    if _is_abbreviation_run(tokens):
        return None
    # The surname is the last token; trailing initials ("Smith J") and name
    # suffixes ("Jr.") are skipped so the actual family name resolves.
    last = next(
        (
            t
            for t in reversed(tokens)
            if not _INITIAL_RE.match(t)
            and t.rstrip(".,").lower() not in _NAME_SUFFIXES
        ),
        None,
    )
    if last is None:
        return None
    surname = last.strip(".,;:'\"“”").strip()
    if not surname or not any(c.isalpha() for c in surname):
        return None
    return surname.lower()


def extract_surnames(reference: str) -> CitedReference:
    """Extract the cited authors' surnames from one reference string.

    Trims a leading index token, cuts the author zone at the first quote,
    bracket or year, infers the name delimiter by character frequency,
    splits, and keeps the last token of each name. 'et al.' is ignored.
    An unparseable author zone yields an empty surname tuple.
    """
    body = _LEADING_INDEX_RE.sub("", reference.strip())
    zone = _author_zone(body)
    zone = _ET_AL_RE.sub(" ", zone).strip()
    if not zone:
        return CitedReference(reference, ())

    delim = _infer_delimiter(zone)
    parts = _split_on_delimiter(zone, delim) if delim else [zone]
    parts = [p.strip() for p in parts if p.strip()]

    # Inverted first author with a spelled-out given name ("Smith, John,
    # and Alice Jones" / "Gates, Henry Louis, Jr."): drop the given-name
    # part following the lone surname. A two-token given-name part is only
    # dropped when what follows cannot be another author.
    if delim == "," and len(parts) >= 2:
        given = parts[1].split()
        if given and all(not _INITIAL_RE.match(t) for t in given):
            rest_is_tail = len(parts) == 2 or re.match(
                r"(?:and\b|&|et\s+al|jr\b|sr\b)", parts[2], re.IGNORECASE
            )
            if len(parts[0].split()) == 1 and (
                len(given) == 1 or (len(given) == 2 and rest_is_tail)
            ):
                parts = [parts[0]] + parts[2:]

    # Secondary split: "A and B" / "A & B" inside a comma part.
    flat: list[str] = []
    for part in parts:
        flat.extend(p.strip() for p in _AND_SPLIT_RE.split(part) if p and p.strip())

    surnames: list[str] = []
    for part in flat:
        name = _surname_from_part(part)
        if name is None:
            continue
        if surnames and surnames[-1] == name:
            continue  # collapse consecutive duplicates
        surnames.append(name)
    return CitedReference(reference, tuple(surnames))


def parse_block(block: str) -> list[CitedReference]:
    """Split a references block and extract surnames per entry.

    Propagates the fail-fast split; additionally drops the paper when fewer
    than half of the entries yield any surname, since that indicates a
    mis-detected separator rather than a few odd entries.
    """
    refs, _report = split_references(block)
    cited = [extract_surnames(r) for r in refs]
    named = sum(1 for c in cited if c.surnames)
    if named < MIN_NAMED_FRACTION * len(cited):
        raise DropPaper("refparse", "most entries yielded no author names")
    return cited
