#!/usr/bin/env python3
# Produces normalize_paragraph.txt from paragraph.txt; run once, output is committed.
import pathlib

here = pathlib.Path(__file__).resolve().parent
root = here.parent.parent


def fold(s):
    s = s.replace("‘", "'").replace("’", "'")
    s = s.replace("“", '"').replace("”", '"')
    s = s.replace("–", " ").replace("—", " ")
    return "".join(chr(ord(c) + 32) if "A" <= c <= "Z" else c for c in s)


def is_token_char(c):
    return c.isascii() and (c in "abcdefghijklmnopqrstuvwxyz0123456789'-") or not c.isascii()


stop = set()
for line in (root / "lexicon" / "stopwords.txt").read_text(encoding="utf-8").splitlines():
    line = line.strip()
    if line and not line.startswith("#"):
        stop.add(fold(line))

out_lines = []
for line in (here / "paragraph.txt").read_text(encoding="utf-8").splitlines():
    text = fold(line)
    tokens, cur = [], ""
    for c in text + " ":
        if is_token_char(c):
            cur += c
            continue
        if cur:
            tok = cur.lstrip("'-").rstrip("-")
            if tok and tok not in stop:
                tokens.append(tok)
        cur = ""
    out_lines.append(" ".join(tokens))

(here / "normalize_paragraph.txt").write_text("\n".join(out_lines) + "\n", encoding="utf-8")
