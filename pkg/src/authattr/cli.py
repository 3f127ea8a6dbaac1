"""Command-line entry point: build, train, eval, predict, tune-disambig.

Exit codes: 0 success, 1 usage or bad path, 2 data/parse failure, 3 numeric
failure. With --workers 1 every subcommand writes byte-identical artifacts
when re-run with the same inputs and seed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import evaluate, model as model_mod
from .corpus import ParsedPaper, load_corpus
from .disambig import DEFAULT_EPS, DEFAULT_MIN_PTS, tune_params
from .errors import ConfigError, DropPaper, NumericError, SidecarError
from .features import NativeEncoder, save_vocab
from .ingest import load_bundle, save_bundle
from .pipeline import build_dataset
from .preprocess import chunk, clean_lines, segment, select_chunks
from .refparse import parse_block
from .synth import calibration_authors

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

MODE_CHOICES = {
    "content": "content",
    "references": "references",
    "ref-no-self": "ref_no_self",
    "ref-cont": "ref_cont",
}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _read_config_file(path: str) -> dict[str, str]:
    """KEY=VALUE per line; '#' starts a comment. Keys match long flag names
    with dashes or underscores."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected KEY=VALUE, got {line!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config_defaults(sub: argparse.ArgumentParser, values: dict[str, str]) -> None:
    """Install config-file values as subparser defaults, honoring each
    option's type so '--config' and flags behave identically."""
    overrides = {}
    for action in sub._actions:
        if action.dest not in values:
            continue
        raw = values[action.dest]
        if isinstance(action, argparse._StoreTrueAction):
            overrides[action.dest] = raw.lower() in ("1", "true", "yes")
        elif action.type is not None:
            try:
                overrides[action.dest] = action.type(raw)
            except ValueError as exc:
                raise ConfigError(f"config value {action.dest}={raw!r}: {exc}") from exc
        else:
            overrides[action.dest] = raw
    sub.set_defaults(**overrides)


def _make_encoder(args) -> object:
    if args.encoder == "native":
        return NativeEncoder()
    if args.encoder == "sidecar":
        if not args.sidecar_endpoint:
            raise ConfigError("--sidecar-endpoint is required with --encoder sidecar")
        from .sidecar_client import SidecarEncoder

        enc = SidecarEncoder(args.sidecar_endpoint)
        enc.connect()
        return enc
    raise ConfigError(f"unknown encoder {args.encoder!r}")


def build_parser() -> _Parser:
    parser = _Parser(prog="authattr", description=__doc__)
    parser.add_argument("--config", help="key=value config file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[], help="build a dataset from a corpus")
    p.add_argument("--corpus", required=True, help="corpus JSONL file")
    p.add_argument("--min-papers", type=int, required=True, help="author threshold P")
    p.add_argument("--trim", type=int, default=None, help="cap papers per author")
    p.add_argument("--chunked", action="store_true", help="use all chunks (-C dataset)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ratio", type=float, default=0.2)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--encoder", choices=["native", "sidecar"], default="native")
    p.add_argument("--sidecar-endpoint", default=None)
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p.add_argument("--min-pts", type=int, default=DEFAULT_MIN_PTS)
    p.add_argument("--out", default=".", help="parent directory for the dataset")

    p = sub.add_parser("train", help="train a fusion model on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--mode", choices=sorted(MODE_CHOICES), required=True)
    p.add_argument("--lr", type=float, default=None, help="default depends on mode")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=model_mod.DEFAULT_BATCH_SIZE)
    p.add_argument("--hidden", type=int, default=model_mod.DEFAULT_HIDDEN)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--encoder", choices=["native", "sidecar"], default="native")
    p.add_argument("--sidecar-endpoint", default=None)
    p.add_argument("--resume", default=None, help="checkpoint to continue from")
    p.add_argument("--vocab-min-count", type=int, default=None,
                   help="citation vocabulary cutoff (default 50)")
    p.add_argument("--normalize-hist", action="store_true",
                   help="L1-normalize reference histograms before the MLP")
    p.add_argument("--embedding-cache", default=None,
                   help="path stem for the on-disk chunk-embedding cache")
    p.add_argument("--out", default=None, help="checkpoint path")

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--first-chunk-only", action="store_true")
    p.add_argument("--ratio-threshold", type=float, default=evaluate.AUTHOR_COUNT_RATIO)
    p.add_argument("--top-k", type=int, default=evaluate.TOP_K)
    p.add_argument("--out", default=None, help="report directory")

    p = sub.add_parser("predict", help="rank authors for one manuscript")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manuscript", required=True, help="plain-text file")
    p.add_argument("--top-k", type=int, default=evaluate.TOP_K)
    p.add_argument("--ratio-threshold", type=float, default=evaluate.AUTHOR_COUNT_RATIO)

    p = sub.add_parser("tune-disambig", help="tune clustering on synthetic authors")
    p.add_argument("--seed", type=int, default=0)

    return parser


def cmd_build(args) -> int:
    if args.min_papers < 1:
        raise ConfigError("--min-papers must be >= 1")
    if not 0.0 < args.ratio < 1.0:
        raise ConfigError("--ratio must be in (0, 1)")
    if args.trim is not None and args.trim < 2:
        raise ConfigError("--trim must be >= 2")
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    corpus = load_corpus(args.corpus)
    encoder = _make_encoder(args)
    bundle, extras = build_dataset(
        corpus,
        min_papers=args.min_papers,
        encoder=encoder,
        seed=args.seed,
        chunked=args.chunked,
        trim=args.trim,
        ratio=args.ratio,
        workers=args.workers,
        eps=args.eps,
        min_pts=args.min_pts,
    )
    out_dir = Path(args.out) / bundle.name
    save_bundle(bundle, out_dir, extras)
    print(f"dataset {bundle.name}: {len(bundle.labels)} authors, "
          f"{len(bundle.train)} train / {len(bundle.test)} test papers")
    print(f"dropped {len(extras['drops'])} manuscripts; wrote {out_dir}")
    return EXIT_OK


def cmd_train(args) -> int:
    bundle = load_bundle(args.dataset)
    mode = MODE_CHOICES[args.mode]
    lr = args.lr if args.lr is not None else model_mod.default_learning_rate(mode, bundle.chunked)
    epochs = args.epochs if args.epochs is not None else model_mod.DEFAULT_EPOCHS
    cfg = model_mod.TrainConfig(
        learning_rate=lr, epochs=epochs, mode=mode, seed=args.seed,
        batch_size=args.batch_size, normalize_hist=args.normalize_hist,
    )
    encoder = _make_encoder(args)
    init_from = model_mod.load_checkpoint(args.resume) if args.resume else None
    cache = None
    if args.embedding_cache:
        from .features import EmbeddingCache

        stem = Path(args.embedding_cache)
        cache = (
            EmbeddingCache.load(stem)
            if stem.with_suffix(".npy").exists()
            else EmbeddingCache()
        )
    model = model_mod.train(
        bundle, cfg, encoder=encoder, hidden=args.hidden, init_from=init_from,
        vocab_min_count=args.vocab_min_count, cache=cache,
    )
    if cache is not None:
        cache.save(Path(args.embedding_cache))
    out = Path(args.out) if args.out else Path(args.dataset) / f"model-{args.mode}.ckpt"
    out.parent.mkdir(parents=True, exist_ok=True)
    model_mod.save_checkpoint(model, out)
    save_vocab(model.vocab, out.with_suffix(".vocab.txt"))
    losses = ", ".join(f"{l:.4f}" for l in model.history)
    print(f"trained {args.mode} for {epochs} epochs (lr={lr:g}); loss per epoch: {losses}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    model = model_mod.load_checkpoint(args.checkpoint)
    bundle = load_bundle(args.dataset)
    model_names = [l.canonical_name for l in model.labels]
    bundle_names = [l.canonical_name for l in bundle.labels]
    if model_names != bundle_names:
        raise DropPaper(
            "eval",
            f"label space mismatch: checkpoint has {len(model_names)} labels, "
            f"dataset has {len(bundle_names)}",
        )
    first = True if args.first_chunk_only else None
    rep = evaluate.report(
        model, bundle, first_chunk_only=first,
        ratio=args.ratio_threshold, k=args.top_k,
    )
    out = Path(args.out) if args.out else Path(args.dataset) / "reports" / model.mode
    evaluate.write_report(rep, out, title=f"{bundle.name} / {model.mode}")
    print(evaluate.render_report(rep, title=f"{bundle.name} / {model.mode}"))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    model = model_mod.load_checkpoint(args.checkpoint)
    raw = Path(args.manuscript).read_text(encoding="utf-8")
    seg = segment(clean_lines(raw))
    paper = ParsedPaper(
        id=Path(args.manuscript).stem,
        chunks=tuple(select_chunks(chunk(seg.content))),
        references=tuple(parse_block(seg.references_block)),
    )
    pred = evaluate.predict_paper(model, paper)
    n_hat = evaluate.estimate_author_count(pred, args.ratio_threshold)
    k = min(args.top_k, model.n_labels)
    print(f"estimated number of authors: {n_hat}")
    for rank, idx in enumerate(pred.ranked[:k], start=1):
        name = model.labels[idx].canonical_name
        print(f"{rank:2d}. {name:30s} {pred.probabilities[idx]:.4f}")
    return EXIT_OK


def cmd_tune_disambig(args) -> int:
    encoder = NativeEncoder()
    authors = calibration_authors(encoder, seed=args.seed)
    eps, min_pts, acc = tune_params(
        authors,
        eps_grid=[round(0.5 + 0.05 * i, 2) for i in range(16)],
        min_pts_grid=[2, 3, 4, 5],
    )
    print(f"best eps={eps:.2f} min_pts={min_pts} accuracy={acc:.2%} "
          f"on {len(authors)} synthetic authors")
    return EXIT_OK


_COMMANDS = {
    "build": cmd_build,
    "train": cmd_train,
    "eval": cmd_eval,
    "predict": cmd_predict,
    "tune-disambig": cmd_tune_disambig,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)

    # Config file values act as defaults; explicit flags override them.
    if "--config" in argv:
        at = argv.index("--config")
        try:
            values = _read_config_file(argv[at + 1])
        except (IndexError, OSError) as exc:
            print(f"authattr: cannot read config file: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except ConfigError as exc:
            print(f"authattr: {exc}", file=sys.stderr)
            return EXIT_USAGE
        for sub_action in parser._subparsers._group_actions:
            for sub in sub_action.choices.values():
                _apply_config_defaults(sub, values)

    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"authattr: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"authattr: file not found: {exc.filename or exc}", file=sys.stderr)
        return EXIT_USAGE
    except IsADirectoryError as exc:
        print(f"authattr: expected a file: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DropPaper as exc:
        print(f"authattr: {exc.stage} failed: {exc.reason}", file=sys.stderr)
        return EXIT_DATA
    except SidecarError as exc:
        print(f"authattr: sidecar: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"authattr: bad input data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"authattr: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
