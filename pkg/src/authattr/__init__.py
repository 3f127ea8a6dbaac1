"""Authorship attribution for research manuscripts.

Builds labeled datasets from plain-text paper corpora, extracts cited-author
histograms and text embeddings, and trains a fusion classifier that ranks
candidate authors for an anonymous manuscript.
"""

from .corpus import Manuscript, ParsedPaper, load_corpus
from .disambig import AbstractEmbedding, ClusterVerdict, dbscan, verdict
from .errors import (
    ConfigError,
    DropPaper,
    NumericError,
    SidecarEncoderError,
    SidecarTransportError,
)
from .evaluate import (
    MetricReport,
    PaperPrediction,
    estimate_author_count,
    metric1,
    metric2,
    metric3,
    metric4,
    predict_paper,
    report,
)
from .features import (
    CitationVocab,
    NativeEncoder,
    TextEmbedding,
    build_vocab,
    histogram,
    rhe_forward,
    strip_self_citations,
)
from .ingest import (
    AuthorLabel,
    DatasetBundle,
    filter_full_names,
    load_bundle,
    save_bundle,
    select_authors,
    split_dataset,
    trim_dataset,
)
from .model import FusionModel, TrainConfig, forward, gradients, loss, train
from .pipeline import build_dataset, process_manuscript
from .preprocess import (
    ContentChunk,
    SegmentedText,
    chunk,
    clean_lines,
    filter_chunks,
    first_chunk_mode,
    segment,
)
from .refparse import CitedReference, SplitReport, extract_surnames, parse_block, split_references

__version__ = "0.1.0"

__all__ = [
    "AbstractEmbedding",
    "AuthorLabel",
    "CitationVocab",
    "CitedReference",
    "ClusterVerdict",
    "ConfigError",
    "ContentChunk",
    "DatasetBundle",
    "DropPaper",
    "FusionModel",
    "Manuscript",
    "MetricReport",
    "NativeEncoder",
    "NumericError",
    "PaperPrediction",
    "ParsedPaper",
    "SegmentedText",
    "SidecarEncoderError",
    "SidecarTransportError",
    "SplitReport",
    "TextEmbedding",
    "TrainConfig",
    "build_dataset",
    "build_vocab",
    "chunk",
    "clean_lines",
    "dbscan",
    "estimate_author_count",
    "extract_surnames",
    "filter_chunks",
    "filter_full_names",
    "first_chunk_mode",
    "forward",
    "gradients",
    "histogram",
    "load_bundle",
    "load_corpus",
    "loss",
    "metric1",
    "metric2",
    "metric3",
    "metric4",
    "parse_block",
    "predict_paper",
    "process_manuscript",
    "report",
    "rhe_forward",
    "save_bundle",
    "segment",
    "select_authors",
    "split_dataset",
    "split_references",
    "strip_self_citations",
    "train",
    "trim_dataset",
    "verdict",
]
