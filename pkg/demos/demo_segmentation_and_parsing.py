"""Walk one synthetic manuscript through the text pipeline.

Shows each stage: line cleaning, header/content/reference segmentation,
chunking with the average-word-length filter, and cited-surname extraction.
"""

import random

from authattr.preprocess import chunk, clean_lines, segment, select_chunks
from authattr.refparse import parse_block, split_references
from authattr.synth import make_authors, make_paper_text

rng = random.Random(7)
authors = make_authors(2, rng)
raw, abstract = make_paper_text(rng, authors, words_per_paper=1200, equation_rate=1.0)

print("=== raw manuscript (first 8 lines) ===")
for line in raw.split("\n")[:8]:
    print(" ", line[:100])

cleaned = clean_lines(raw)
removed = len(raw.split("\n")) - len(cleaned.split("\n"))
print(f"\nclean_lines removed {removed} lines (blank, email, digit-only)")

seg = segment(cleaned)
print(f"content: {len(seg.content.split())} words")
print(f"references block: {len(seg.references_block.splitlines())} lines")
if seg.discarded_supplement:
    print(f"supplement discarded: {seg.discarded_supplement.splitlines()[0]!r} ...")

chunks = chunk(seg.content)
kept = select_chunks(chunks)
print(f"\nchunking: {len(chunks)} chunks of up to 512 words")
for c in chunks:
    mark = "kept" if c in kept else "dropped (avg word length below 4.22)"
    print(f"  chunk {c.index}: {len(c.words)} words, avg {c.avg_word_len:.2f} -> {mark}")
print("(the first chunk is exempt from the filter)")

refs, report = split_references(seg.references_block)
print(f"\nreference splitting: {report.n_refs} entries via {report.separator_used.value}")
for cited in parse_block(seg.references_block)[:5]:
    print(f"  {cited.raw[:64]!r:68s} -> {list(cited.surnames)}")
