"""Regenerate the bundled synthetic text corpus."""

import argparse
from pathlib import Path

from gpocr.synthetic import write_corpus

DEFAULT_OUT = Path(__file__).resolve().parent.parent / "src" / "gpocr" / "data" / "synthetic"

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    ap.add_argument("--pages", type=int, default=12)
    args = ap.parse_args()
    print(write_corpus(args.out, args.pages))
