"""Machine-rendered text pages with known transcripts.

These stand in for a real scanned corpus in tests and smoke runs. Pages are
rendered with Pillow's built-in bitmap font, magnified by pixel replication,
so they are strictly black-on-white.
"""

from __future__ import annotations

import textwrap
from importlib import resources
from pathlib import Path

import numpy as np

from .image_core import GrayImage, save_image

# Opening of "Alice's Adventures in Wonderland" (Lewis Carroll, 1865; public domain).
SOURCE_TEXT = """\
Alice was beginning to get very tired of sitting by her sister on the bank,
and of having nothing to do: once or twice she had peeped into the book her
sister was reading, but it had no pictures or conversations in it, and what
is the use of a book, thought Alice, without pictures or conversations? So
she was considering in her own mind, as well as she could, for the hot day
made her feel very sleepy and stupid, whether the pleasure of making a
daisy chain would be worth the trouble of getting up and picking the
daisies, when suddenly a White Rabbit with pink eyes ran close by her.
There was nothing so very remarkable in that; nor did Alice think it so very
much out of the way to hear the Rabbit say to itself, Oh dear! Oh dear! I
shall be late! But when the Rabbit actually took a watch out of its
waistcoat pocket, and looked at it, and then hurried on, Alice started to
her feet, for it flashed across her mind that she had never before seen a
rabbit with either a waistcoat pocket, or a watch to take out of it, and
burning with curiosity, she ran across the field after it, and fortunately
was just in time to see it pop down a large rabbit hole under the hedge. In
another moment down went Alice after it, never once considering how in the
world she was to get out again. The rabbit hole went straight on like a
tunnel for some way, and then dipped suddenly down, so suddenly that Alice
had not a moment to think about stopping herself before she found herself
falling down a very deep well. Either the well was very deep, or she fell
very slowly, for she had plenty of time as she went down to look about her
and to wonder what was going to happen next. First, she tried to look down
and make out what she was coming to, but it was too dark to see anything;
then she looked at the sides of the well, and noticed that they were filled
with cupboards and book shelves; here and there she saw maps and pictures
hung upon pegs. She took down a jar from one of the shelves as she passed;
it was labelled ORANGE MARMALADE, but to her great disappointment it was
empty: she did not like to drop the jar for fear of killing somebody, so
managed to put it into one of the cupboards as she fell past it.
"""

CHARS_PER_LINE = 26
LINES_PER_PAGE = 5
MAGNIFY = 3
MARGIN = 24
LINE_GAP = 12


def page_texts(n_pages: int = 12, chars_per_line: int = CHARS_PER_LINE,
               lines_per_page: int = LINES_PER_PAGE) -> list[list[str]]:
    words = " ".join(SOURCE_TEXT.split())
    lines = textwrap.wrap(words, chars_per_line)
    pages = [lines[i:i + lines_per_page] for i in range(0, len(lines), lines_per_page)]
    pages = [p for p in pages if len(p) == lines_per_page]
    if len(pages) < n_pages:
        raise ValueError(f"source text only fills {len(pages)} pages")
    return pages[:n_pages]


def render_lines(lines: list[str], magnify: int = MAGNIFY) -> GrayImage:
    """Render text lines black on white; output dimensions are multiples of 4."""
    from PIL import Image, ImageDraw, ImageFont

    font = ImageFont.load_default_imagefont()
    cell_w = max(font.getbbox(ch)[2] for ch in "MW@")
    cell_h = font.getbbox("Mg")[3]
    width = max(len(s) for s in lines) * cell_w
    height = len(lines) * cell_h + (len(lines) - 1) * (LINE_GAP // magnify)
    canvas = Image.new("L", (width, height), 255)
    draw = ImageDraw.Draw(canvas)
    for i, line in enumerate(lines):
        draw.text((0, i * (cell_h + LINE_GAP // magnify)), line, fill=0, font=font)
    arr = np.asarray(canvas)
    arr = np.repeat(np.repeat(arr, magnify, axis=0), magnify, axis=1)
    h, w = arr.shape
    full_h = -(-(h + 2 * MARGIN) // 4) * 4
    full_w = -(-(w + 2 * MARGIN) // 4) * 4
    page = np.full((full_h, full_w), 255, dtype=np.uint8)
    page[MARGIN:MARGIN + h, MARGIN:MARGIN + w] = np.where(arr < 128, 0, 255)
    return GrayImage(page)


def write_corpus(out_dir, n_pages: int = 12) -> Path:
    """Render ``n_pages`` pages plus transcripts and a tab-separated manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = []
    for i, lines in enumerate(page_texts(n_pages)):
        stem = f"page{i:02d}"
        save_image(render_lines(lines), out_dir / f"{stem}.png")
        (out_dir / f"{stem}.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
        manifest.append(f"{stem}.png\t{stem}.txt")
    path = out_dir / "manifest.tsv"
    path.write_text("\n".join(manifest) + "\n", encoding="utf-8")
    return path


def bundled_manifest() -> Path:
    """Manifest of the synthetic corpus shipped with the package."""
    return Path(str(resources.files("gpocr") / "data" / "synthetic" / "manifest.tsv"))
