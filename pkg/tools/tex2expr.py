#!/usr/bin/env python3
"""Convert TeX math fragments into the corpus expression grammar.

Handles the constructs that occur in the transcribed displays: \\frac,
braced subscripts/superscripts, \\left ... \\right fences, alignment and
spacing junk, and implicit multiplication.  Output is meant to be fed to
wdvvlab.exprio.parse and audited by the verification suite.

Usage: tex2expr.py [file]   (reads stdin by default, one fragment)
"""

import re
import sys


def _strip_frac(s):
    out = []
    i = 0
    while i < len(s):
        if s.startswith(r"\frac", i):
            i += 5
            a, i = _read_group(s, i)
            b, i = _read_group(s, i)
            out.append("((%s)/(%s))" % (_strip_frac(a), _strip_frac(b)))
        else:
            out.append(s[i])
            i += 1
    return "".join(out)


def _read_group(s, i):
    while i < len(s) and s[i].isspace():
        i += 1
    if i >= len(s) or s[i] != "{":
        raise ValueError("expected { at %d: %r" % (i, s[i:i + 20]))
    depth = 0
    j = i
    while j < len(s):
        if s[j] == "{":
            depth += 1
        elif s[j] == "}":
            depth -= 1
            if depth == 0:
                return s[i + 1:j], j + 1
        j += 1
    raise ValueError("unbalanced group")


def _splice_style_groups(s):
    """Drop presentation-only \\displaystyle{...} braces: their contents
    concatenate (the next chunk carries its own +/-), they do not group."""
    pat = re.compile(r"\\(?:displaystyle|scriptstyle|textstyle)\s*")
    while True:
        m = pat.search(s)
        if not m:
            return s
        i = m.end()
        if i < len(s) and s[i] == "{":
            body, j = _read_group(s, i)
            s = s[:m.start()] + " " + body + " " + s[j:]
        else:
            s = s[:m.start()] + " " + s[i:]


def tex_to_expr(s, split_letters=""):
    s = s.replace("\n", " ")
    # alignment/spacing noise
    s = re.sub(r"\\(?:hspace|vspace)\*?\{[^}]*\}", " ", s)
    s = _splice_style_groups(s)
    s = re.sub(r"\\(?:footnotesize|small)", " ", s)
    s = re.sub(r"\\(?:left|right|bigl|bigr|Bigl|Bigr)", "", s)
    s = s.replace(r"\\", " ")  # row separators, before \<space> handling
    s = s.replace(r"\{", "(").replace(r"\}", ")")
    s = s.replace(r"\(", "(").replace(r"\)", ")")
    s = s.replace(r"\,", " ").replace(r"\;", " ").replace(r"\!", " ")
    s = s.replace(r"\>", " ").replace(r"\ ", " ").replace("~", " ")
    s = s.replace(r"\cdot", "*").replace(r"\times", "*")
    s = re.sub(r"\\gamma\b", " gam ", s)
    s = s.replace("&", " ")
    s = s.replace("$", " ")
    # sentence punctuation (the displays carry no decimal literals)
    s = s.replace(",", " ").replace(".", " ")
    s = _strip_frac(s)
    # subscripts: x_{12} / x_1  ->  x12 / x1 (with a separator so that
    # adjacent subscripted names do not merge into one identifier)
    s = re.sub(r"([A-Za-z])_\{(\w+)\}", r"\1\2 ", s)
    s = re.sub(r"([A-Za-z])_(\w)", r"\1\2 ", s)
    # braced names and exponents
    s = re.sub(r"\{\s*([A-Za-z][A-Za-z0-9]*)\s*\}", r" \1 ", s)
    s = re.sub(r"\^\{\s*(\d+)\s*\}", r"^\1 ", s)
    s = re.sub(r"\{\s*(\d+)\s*\}", r" \1 ", s)
    # leftover lone braces act as parentheses
    s = s.replace("{", "(").replace("}", ")")
    s = _implicit_mul(s, split_letters)
    s = re.sub(r"\s+", " ", s).strip()
    return s


_TOK = re.compile(r"\d+|[A-Za-z][A-Za-z0-9]*|[-+*/^()]|\S")


def _implicit_mul(s, split_letters=""):
    toks = _TOK.findall(s)
    if split_letters:
        allowed = set(split_letters)
        expanded = []
        for t in toks:
            if len(t) >= 2 and all(c in allowed for c in t):
                expanded.extend(t)
            else:
                expanded.append(t)
        toks = expanded
    out = []
    prev = None
    for t in toks:
        if prev is not None:
            left = prev[-1].isalnum() or prev == ")"
            right = t[0].isalnum() or t == "("
            if left and right:
                # never glue exponent digits: those follow '^' directly
                out.append("*")
        out.append(t)
        prev = t
    merged = []
    i = 0
    while i < len(out):
        # a^b stays tight; undo the '*' we never inserted there anyway
        merged.append(out[i])
        i += 1
    return " ".join(merged).replace("^ ", "^").replace(" ^", "^")


def main():
    data = (open(sys.argv[1]).read() if len(sys.argv) > 1
            else sys.stdin.read())
    print(tex_to_expr(data))


if __name__ == "__main__":
    main()
