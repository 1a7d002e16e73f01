"""Command-line wrapper around :class:`gpocr.ocr_eval.PsnrProxyEngine`.

Usable as an engine template, e.g.::

    python -m gpocr.mock_engine --manifest corpus/manifest.tsv {input} {output}
"""

import argparse
import sys
from pathlib import Path

from .ocr_eval import EngineFailure, PsnrProxyEngine, load_manifest


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="python -m gpocr.mock_engine", description=__doc__.splitlines()[0])
    ap.add_argument("--manifest", required=True, type=Path, help="corpus manifest with the clean originals")
    ap.add_argument("input", type=Path)
    ap.add_argument("output", type=Path, nargs="?", help="text file to write (default: stdout)")
    args = ap.parse_args(argv)
    engine = PsnrProxyEngine(load_manifest(args.manifest))
    try:
        text = engine.recognize(args.input)
    except EngineFailure as exc:
        print(exc, file=sys.stderr)
        return 1
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.write_text(text, encoding="utf-8")
    return 0


if __name__ == "__main__":
    sys.exit(main())
