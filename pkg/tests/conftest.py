import json
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


def load_manuscript_fixtures() -> list[dict]:
    return json.loads((DATA / "manuscripts.json").read_text(encoding="utf-8"))


def assemble_manuscript(f: dict) -> str:
    """Raw text of a segmentation fixture from its labeled pieces."""
    lines = list(f["header"])
    lines += f["dirty_content"] if f["dirty_content"] else f["content"]
    refs = list(f["refs"])
    if f["refs_heading"] is not None:
        if f["inline_heading"]:
            lines.append(f["refs_heading"] + " " + refs[0])
            lines += refs[1:]
        else:
            lines.append(f["refs_heading"])
            lines += refs
    else:
        lines += refs
    lines += f["supplement"]
    return "\n".join(lines)


def load_refblock_fixtures() -> list[dict]:
    records = []
    for path in sorted((DATA / "refblocks").glob("*.json")):
        records.extend(json.loads(path.read_text(encoding="utf-8")))
    return records


def load_malformed_refblocks() -> list[dict]:
    return json.loads((DATA / "malformed_refblocks.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def small_corpus_dir(tmp_path_factory):
    """A parseable 5-author corpus, shared by CLI and pipeline tests."""
    from authattr.synth import make_corpus

    root = tmp_path_factory.mktemp("smallcorpus")
    make_corpus(root, n_authors=5, papers_per_author=12, seed=42)
    return root
