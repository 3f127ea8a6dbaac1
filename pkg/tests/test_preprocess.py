import pytest
from hypothesis import given, strategies as st

from authattr.errors import DropPaper
from authattr.preprocess import (
    ContentChunk,
    chunk,
    clean_lines,
    filter_chunks,
    first_chunk_mode,
    segment,
    select_chunks,
)

from conftest import assemble_manuscript, load_manuscript_fixtures


class TestCleanLines:
    def test_blank_lines_removed(self):
        assert clean_lines("a\n\nb") == "a\nb"

    def test_email_line_removed(self):
        assert clean_lines("contact me@x.org\nbody") == "body"

    def test_digit_only_line_removed(self):
        assert clean_lines("Results\n3\nshown") == "Results\nshown"

    def test_multidigit_page_number_removed(self):
        assert clean_lines("text\n1234\nmore") == "text\nmore"

    def test_numbers_inside_text_kept(self):
        assert clean_lines("we used 512 tokens") == "we used 512 tokens"

    def test_email_requires_dotted_domain(self):
        assert clean_lines("user@host without dot") == "user@host without dot"

    def test_idempotent(self):
        raw = "a\n\nme@x.org\n7\nkeep this\n  \nend"
        once = clean_lines(raw)
        assert clean_lines(once) == once

    @given(st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=300))
    def test_output_has_no_blank_or_digit_lines(self, raw):
        cleaned = clean_lines(raw)
        if cleaned == "":
            return  # every line was removable
        for line in cleaned.split("\n"):
            assert line.strip() != ""
            assert not line.strip().isdigit()


class TestSegment:
    @pytest.mark.parametrize(
        "fixture",
        [f for f in load_manuscript_fixtures() if not f["drop"]],
        ids=lambda f: f["name"],
    )
    def test_boundaries_match_labels(self, fixture):
        seg = segment(clean_lines(assemble_manuscript(fixture)))
        assert seg.content == "\n".join(fixture["content"])
        assert seg.references_block == "\n".join(fixture["refs"])

    @pytest.mark.parametrize(
        "fixture",
        [f for f in load_manuscript_fixtures() if f["drop"]],
        ids=lambda f: f["name"],
    )
    def test_anchor_free_fixtures_drop(self, fixture):
        with pytest.raises(DropPaper) as err:
            segment(clean_lines(assemble_manuscript(fixture)))
        assert err.value.stage == fixture["drop"]

    def test_supplement_absent_from_both_blocks(self):
        fixture = next(
            f for f in load_manuscript_fixtures() if f["name"] == "supplement-appendix"
        )
        seg = segment(clean_lines(assemble_manuscript(fixture)))
        assert "Extra material" not in seg.content
        assert "Extra material" not in seg.references_block
        assert "Extra material" in seg.discarded_supplement

    def test_success_implies_nonempty_blocks(self):
        for fixture in load_manuscript_fixtures():
            if fixture["drop"]:
                continue
            seg = segment(clean_lines(assemble_manuscript(fixture)))
            assert seg.content.strip()
            assert seg.references_block.strip()

    def test_recleaning_content_is_identity(self):
        for fixture in load_manuscript_fixtures():
            if fixture["drop"]:
                continue
            seg = segment(clean_lines(assemble_manuscript(fixture)))
            assert clean_lines(seg.content) == seg.content


class TestChunk:
    def test_1024_words_two_full_chunks(self):
        chunks = chunk(" ".join(["word"] * 1024))
        assert [len(c.words) for c in chunks] == [512, 512]
        assert [c.index for c in chunks] == [0, 1]

    def test_100_words_single_chunk(self):
        chunks = chunk(" ".join(["word"] * 100))
        assert [len(c.words) for c in chunks] == [100]

    def test_1100_words_round_trip(self):
        words = [f"w{i}" for i in range(1100)]
        chunks = chunk(" ".join(words))
        assert [len(c.words) for c in chunks] == [512, 512, 76]
        flattened = [w for c in chunks for w in c.words]
        assert flattened == words

    def test_empty_content(self):
        assert chunk("") == []

    @given(st.text(alphabet="ab \n\t", max_size=500), st.integers(1, 17))
    def test_round_trip_property(self, text, chunk_len):
        chunks = chunk(text, chunk_len)
        assert [w for c in chunks for w in c.words] == text.split()
        assert all(1 <= len(c.words) <= chunk_len for c in chunks)


class TestFilterChunks:
    def _chunk(self, words):
        return ContentChunk(tuple(words), index=0)

    def test_long_words_kept(self):
        c = self._chunk(["algorithm"] * 512)
        assert filter_chunks([c]) == [c]

    def test_symbol_chunk_dropped(self):
        c = self._chunk(["x", "+", "y", "=", "z"] * 100)
        assert c.avg_word_len < 4.22
        assert filter_chunks([c]) == []

    def test_straddles_threshold(self):
        # 79*4 + 21*5 = 421 chars over 100 words -> 4.21; 77*4 + 23*5 -> 4.23
        below = self._chunk(["aaaa"] * 79 + ["bbbbb"] * 21)
        above = self._chunk(["aaaa"] * 77 + ["bbbbb"] * 23)
        assert below.avg_word_len == pytest.approx(4.21)
        assert above.avg_word_len == pytest.approx(4.23)
        assert filter_chunks([below, above]) == [above]

    def test_exact_threshold_kept(self):
        # 78*4 + 22*5 = 422 chars over 100 words -> exactly 4.22
        at = self._chunk(["aaaa"] * 78 + ["bbbbb"] * 22)
        assert filter_chunks([at]) == [at]

    def test_output_is_subsequence(self):
        chunks = [
            self._chunk(["aaaa"] * 10),
            self._chunk(["abcdefgh"] * 10),
            self._chunk(["xy"] * 10),
            self._chunk(["abcdef"] * 10),
        ]
        kept = filter_chunks(chunks)
        it = iter(chunks)
        assert all(any(c is k for c in it) for k in kept)


class TestFirstChunkMode:
    def test_returns_first(self):
        chunks = chunk(" ".join(["word"] * 1200))
        assert first_chunk_mode(chunks) is chunks[0]

    def test_single_chunk(self):
        chunks = chunk("one two three")
        assert first_chunk_mode(chunks) is chunks[0]

    def test_first_chunk_exempt_from_filter(self):
        short = ContentChunk(tuple(["xy"] * 100), index=0)
        long = ContentChunk(tuple(["abcdefgh"] * 100), index=1)
        assert short.avg_word_len < 4.22
        assert first_chunk_mode([short, long]) is short
        assert select_chunks([short, long]) == [short, long]

    def test_later_chunks_filtered_in_selection(self):
        c0 = ContentChunk(tuple(["abcdefgh"] * 100), index=0)
        bad = ContentChunk(tuple(["xy"] * 100), index=1)
        good = ContentChunk(tuple(["abcdefgh"] * 100), index=2)
        assert select_chunks([c0, bad, good]) == [c0, good]

    def test_empty_raises(self):
        with pytest.raises(DropPaper):
            first_chunk_mode([])
        with pytest.raises(DropPaper):
            select_chunks([])
