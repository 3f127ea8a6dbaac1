"""Fail-fast segmentation of raw manuscript text and content chunking.

A manuscript either segments cleanly into (content, references_block) or is
dropped via :class:`~authattr.errors.DropPaper`; there is no partially
trusted result.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import DropPaper

# Average-word-length cutoff separating prose chunks from equation/table
# debris. Applies to every chunk except the first one of a paper.
MIN_AVG_WORD_LEN = 4.22

DEFAULT_SUPPLEMENT_KEYWORDS = (
    "Supplement",
    "Supplementary",
    "Appendix",
    "Discussion",
    "Acknowledgements",
)

# A token with "@", a non-empty local part and a dotted domain. Deliberately
# loose: a line that merely looks like contact info should go.
_EMAIL_RE = re.compile(r"[^\s@]+@[^\s@]+\.[^\s@]+")

_FIRST_REF_RE = re.compile(r"^[ \t]*\[1\]")


@dataclass(frozen=True)
class SegmentedText:
    """Main content and reference block of one manuscript."""

    content: str
    references_block: str
    discarded_supplement: str = ""


@dataclass(frozen=True)
class ContentChunk:
    """Up to 512 whitespace-delimited words of main content."""

    words: tuple[str, ...]
    index: int

    @property
    def avg_word_len(self) -> float:
        if not self.words:
            return 0.0
        return sum(len(w) for w in self.words) / len(self.words)

    @property
    def text(self) -> str:
        return " ".join(self.words)


def _keyword_re(word: str) -> re.Pattern[str]:
    """A section keyword: starts the line (whitespace aside) and its first
    letter is capitalized in the source; remaining letters match any case."""
    head = re.escape(word[0].upper())
    tail = re.escape(word[1:])
    return re.compile(rf"^[ \t]*{head}(?i:{tail})\b")


_ABSTRACT_RE = _keyword_re("abstract")
_REFERENCES_RE = _keyword_re("references")


def clean_lines(raw: str) -> str:
    """Drop blank lines, lines with an email address, and digit-only lines."""
    kept = []
    for line in raw.split("\n"):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.isdigit():
            continue
        if _EMAIL_RE.search(line):
            continue
        kept.append(line)
    return "\n".join(kept)


def segment(
    cleaned: str,
    supplement_keywords: tuple[str, ...] = DEFAULT_SUPPLEMENT_KEYWORDS,
) -> SegmentedText:
    """Split cleaned text into content and reference block.

    The header before the first "Abstract" keyword line is discarded.
    Content ends at the first "References" keyword line or a line starting
    with "[1]", whichever comes first. Supplement sections after the
    references (keyword list above) are excluded from both outputs.

    Raises DropPaper when either anchor is missing or an output would be
    empty.
    """
    lines = cleaned.split("\n")

    abstract_idx = None
    for i, line in enumerate(lines):
        if _ABSTRACT_RE.match(line):
            abstract_idx = i
            break
    if abstract_idx is None:
        raise DropPaper("segment", "no abstract anchor")

    ref_idx = None
    ref_by_keyword = False
    for i in range(abstract_idx + 1, len(lines)):
        if _REFERENCES_RE.match(lines[i]):
            ref_idx = i
            ref_by_keyword = True
            break
        if _FIRST_REF_RE.match(lines[i]):
            ref_idx = i
            ref_by_keyword = False
            break
    if ref_idx is None:
        raise DropPaper("segment", "no references anchor")

    content_lines = lines[abstract_idx:ref_idx]

    if ref_by_keyword:
        # The heading itself is not a reference; keep any trailing text on
        # the heading line ("References [1] ..." squeezed onto one line).
        m = _REFERENCES_RE.match(lines[ref_idx])
        remainder = lines[ref_idx][m.end() :].strip()
        ref_lines = ([remainder] if remainder else []) + lines[ref_idx + 1 :]
    else:
        ref_lines = lines[ref_idx:]

    supplement_res = [_keyword_re(k) for k in supplement_keywords]
    supp_lines: list[str] = []
    for i, line in enumerate(ref_lines):
        if any(r.match(line) for r in supplement_res):
            supp_lines = ref_lines[i:]
            ref_lines = ref_lines[:i]
            break

    content = "\n".join(content_lines)
    references_block = "\n".join(ref_lines)
    if not content.strip():
        raise DropPaper("segment", "empty content")
    if not references_block.strip():
        raise DropPaper("segment", "empty references block")
    return SegmentedText(content, references_block, "\n".join(supp_lines))


def chunk(content: str, chunk_len: int = 512) -> list[ContentChunk]:
    """Greedy whitespace-token chunking; the final chunk may be shorter."""
    if chunk_len < 1:
        raise ValueError("chunk_len must be >= 1")
    words = content.split()
    return [
        ContentChunk(tuple(words[i : i + chunk_len]), index=i // chunk_len)
        for i in range(0, len(words), chunk_len)
    ]


def filter_chunks(
    chunks: list[ContentChunk], min_avg_len: float = MIN_AVG_WORD_LEN
) -> list[ContentChunk]:
    """Keep exactly the chunks whose average word length is >= the cutoff."""
    return [c for c in chunks if c.avg_word_len >= min_avg_len]


def first_chunk_mode(chunks: list[ContentChunk]) -> ContentChunk:
    """The first chunk of a paper, exempt from the word-length filter."""
    if not chunks:
        raise DropPaper("chunk", "no content chunks")
    return chunks[0]


def select_chunks(
    chunks: list[ContentChunk], min_avg_len: float = MIN_AVG_WORD_LEN
) -> list[ContentChunk]:
    """Pipeline composition: the first chunk is always kept, later chunks
    must pass the average-word-length filter."""
    if not chunks:
        raise DropPaper("chunk", "no content chunks")
    return [chunks[0]] + filter_chunks(chunks[1:], min_avg_len)
