"""Corpus records and on-disk artifact formats.

A corpus is a JSONL file with one manuscript record per line (id, title,
abstract, authors, text path). Parsed papers are stored one file per paper:
content chunks (tokens space-joined, one per line) followed by a reference
section with one space-joined surname list per cited reference.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .preprocess import ContentChunk
from .refparse import CitedReference

_CHUNKS_HEADER = "# chunks"
_REFS_HEADER = "# references"


@dataclass(frozen=True)
class Manuscript:
    """One raw corpus entry: metadata plus the plain-text body."""

    id: str
    title: str
    abstract: str
    authors: tuple[str, ...]
    raw_text: str

    def __post_init__(self):
        if not self.authors:
            raise ValueError(f"manuscript {self.id!r} has no authors")


@dataclass(frozen=True)
class ParsedPaper:
    """Pipeline output for one manuscript: surviving chunks + references."""

    id: str
    chunks: tuple[ContentChunk, ...]
    references: tuple[CitedReference, ...] = field(default_factory=tuple)


def load_corpus(path: str | Path) -> list[Manuscript]:
    """Read a corpus JSONL file; text bodies are loaded from the referenced
    files, resolved relative to the corpus file's directory."""
    path = Path(path)
    base = path.parent
    manuscripts = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            for key in ("id", "title", "abstract", "authors", "text_path"):
                if key not in rec:
                    raise ValueError(f"{path}:{lineno}: missing field {key!r}")
            text_path = Path(rec["text_path"])
            if not text_path.is_absolute():
                text_path = base / text_path
            manuscripts.append(
                Manuscript(
                    id=str(rec["id"]),
                    title=rec["title"],
                    abstract=rec["abstract"],
                    authors=tuple(rec["authors"]),
                    raw_text=text_path.read_text(encoding="utf-8"),
                )
            )
    seen: set[str] = set()
    for m in manuscripts:
        if m.id in seen:
            raise ValueError(f"duplicate manuscript id {m.id!r}")
        seen.add(m.id)
    return manuscripts


def save_paper(paper: ParsedPaper, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = [_CHUNKS_HEADER]
    lines.extend(c.text for c in paper.chunks)
    lines.append(_REFS_HEADER)
    lines.extend(" ".join(r.surnames) for r in paper.references)
    out = directory / f"{paper.id}.txt"
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out


def load_paper(path: str | Path) -> ParsedPaper:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != _CHUNKS_HEADER:
        raise ValueError(f"{path}: not a parsed-paper artifact")
    try:
        refs_at = lines.index(_REFS_HEADER)
    except ValueError:
        raise ValueError(f"{path}: missing reference section") from None
    chunks = tuple(
        ContentChunk(tuple(line.split()), index=i)
        for i, line in enumerate(lines[1:refs_at])
    )
    references = tuple(
        CitedReference(raw="", surnames=tuple(line.split()))
        for line in lines[refs_at + 1 :]
    )
    return ParsedPaper(id=path.stem, chunks=chunks, references=references)
