"""CLI: serve embeddings on a local socket or over standard streams."""

import argparse
import sys

from .server import serve, serve_stdio


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="embed-sidecar", description=__doc__)
    parser.add_argument(
        "--endpoint", default="127.0.0.1:7700", help="host:port to listen on"
    )
    parser.add_argument(
        "--model",
        default="distilbert-base-uncased",
        help="transformer checkpoint name, or 'mock' for the model-free backend",
    )
    parser.add_argument(
        "--stdio", action="store_true", help="serve one session over stdin/stdout"
    )
    args = parser.parse_args(argv)
    if args.stdio:
        serve_stdio(args.model)
    else:
        serve(args.endpoint, args.model)
    return 0


if __name__ == "__main__":
    sys.exit(main())
