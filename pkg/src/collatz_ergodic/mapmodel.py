"""Residue-class affine branch maps on the positive integers.

A branch map is given by a modulus ``m`` and, for every residue ``r`` in
``0..m-1``, a triple ``(a, b, d)`` acting as ``n -> (a*n + b) / d`` on
``n = r (mod m)``.  The text format is::

    mod 2 { 0: (1n+0)/2; 1: (3n+1)/2 }
"""
from __future__ import annotations

import os
import re
from importlib import resources
from dataclasses import dataclass, field
from typing import NamedTuple


class Branch(NamedTuple):
    a: int
    b: int
    d: int


class Violation(NamedTuple):
    residue: int
    condition: str
    message: str

    def __str__(self) -> str:
        return f"residue {self.residue}: {self.condition}: {self.message}"


class MapSpecError(ValueError):
    """Raised for malformed map-spec text or a map that fails validation."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 violations: tuple[Violation, ...] = ()):
        self.line = line
        self.column = column
        self.violations = violations
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


@dataclass(frozen=True)
class BranchMap:
    modulus: int
    branches: tuple[Branch, ...]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(Branch(*map(int, br)) for br in self.branches))
        if self.modulus < 2:
            raise MapSpecError(f"modulus must be >= 2, got {self.modulus}")
        if len(self.branches) != self.modulus:
            raise MapSpecError(
                f"expected {self.modulus} branches, got {len(self.branches)}")

    def __call__(self, n: int) -> int:
        a, b, d = self.branches[n % self.modulus]
        return (a * n + b) // d

    def render(self) -> str:
        parts = [f"{r}: ({br.a}n{'+' if br.b >= 0 else '-'}{abs(br.b)})/{br.d}"
                 for r, br in enumerate(self.branches)]
        return f"mod {self.modulus} {{ " + "; ".join(parts) + " }"

    def __str__(self) -> str:
        return self.name or self.render()

    @property
    def max_a(self) -> int:
        return max(br.a for br in self.branches)

    @property
    def max_abs_b(self) -> int:
        return max(abs(br.b) for br in self.branches)

    @property
    def max_d(self) -> int:
        return max(br.d for br in self.branches)


def validate(bmap: BranchMap) -> list[Violation]:
    """Return the list of well-definedness violations; empty means the map is valid.

    Positivity is checked exactly: each branch is nondecreasing in ``n`` (``a >= 0``),
    so it suffices to evaluate the smallest positive member of the residue class.
    """
    out = []
    m = bmap.modulus
    for r, (a, b, d) in enumerate(bmap.branches):
        if d < 1:
            out.append(Violation(r, "d >= 1", f"divisor is {d}"))
            continue
        if a < 0:
            out.append(Violation(r, "a >= 0", f"multiplier is {a}"))
            continue
        if (a * r + b) % d != 0:
            out.append(Violation(r, "(a*r + b) mod d == 0",
                                 f"({a}*{r} + {b}) mod {d} = {(a * r + b) % d}"))
        if (a * m) % d != 0:
            out.append(Violation(r, "(a*m) mod d == 0",
                                 f"({a}*{m}) mod {d} = {(a * m) % d}"))
        n0 = r if r >= 1 else m
        if a * n0 + b < d:
            out.append(Violation(r, "image >= 1",
                                 f"n = {n0} maps to ({a}*{n0} + {b})/{d} < 1"))
    return out


def require_valid(bmap: BranchMap) -> BranchMap:
    violations = validate(bmap)
    if violations:
        raise MapSpecError("invalid branch map: " + "; ".join(map(str, violations)),
                           violations=tuple(violations))
    return bmap


_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<word>[A-Za-z]+)|(?P<sym>[{}();:/+\-]))")


def _tokenize(text: str):
    pos = 0
    toks = []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        mo = _TOKEN.match(text, pos)
        if mo is None or mo.end() == pos:
            toks.append(("bad", text[pos], pos))
            break
        kind = mo.lastgroup
        toks.append((kind, mo.group(kind), mo.start(kind)))
        pos = mo.end()
    return toks


def _linecol(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def parse_mapspec(text: str, name: str | None = None) -> BranchMap:
    """Parse map-spec text into a validated :class:`BranchMap`."""
    toks = _tokenize(text)
    i = 0

    def fail(msg, tok=None):
        pos = tok[2] if tok is not None else len(text)
        raise MapSpecError(msg, *_linecol(text, pos))

    def peek():
        return toks[i] if i < len(toks) else None

    def take(kind, value=None):
        nonlocal i
        tok = peek()
        if tok is None:
            fail(f"unexpected end of input, expected {value or kind}")
        if tok[0] == "bad":
            fail(f"unexpected character {tok[1]!r}", tok)
        if tok[0] != kind or (value is not None and tok[1] != value):
            fail(f"expected {value or kind}, found {tok[1]!r}", tok)
        i += 1
        return tok

    if take("word")[1] != "mod":
        fail("map spec must start with 'mod'", toks[0])
    mtok = take("int")
    modulus = int(mtok[1])
    if modulus < 2:
        fail("modulus must be >= 2", mtok)
    take("sym", "{")
    table: dict[int, Branch] = {}
    while True:
        rtok = take("int")
        r = int(rtok[1])
        take("sym", ":")
        take("sym", "(")
        a = int(take("int")[1])
        ntok = take("word")
        if ntok[1] != "n":
            fail("expected 'n'", ntok)
        sign = peek()
        if sign is None or sign[1] not in "+-":
            fail("expected '+' or '-'", sign)
        i += 1
        b = int(take("int")[1])
        if sign[1] == "-":
            b = -b
        take("sym", ")")
        take("sym", "/")
        d = int(take("int")[1])
        if r >= modulus:
            fail(f"residue {r} out of range for modulus {modulus}", rtok)
        if r in table:
            fail(f"duplicate residue {r}", rtok)
        table[r] = Branch(a, b, d)
        tok = peek()
        if tok is not None and tok[1] == ";":
            i += 1
            tok = peek()
        if tok is not None and tok[1] == "}":
            i += 1
            break
        if tok is None or tok[0] != "int":
            if tok is None:
                fail("unexpected end of input, expected '}'")
            fail(f"expected residue or '}}', found {tok[1]!r}", tok)
    if i != len(toks):
        fail(f"trailing input {toks[i][1]!r}", toks[i])
    missing = [r for r in range(modulus) if r not in table]
    if missing:
        raise MapSpecError("missing residue " + ", ".join(map(str, missing)),
                           *_linecol(text, len(text)))
    bmap = BranchMap(modulus, tuple(table[r] for r in range(modulus)), name=name)
    return require_valid(bmap)


COLLATZ_T = BranchMap(2, ((1, 0, 2), (3, 1, 2)), name="collatz-t")
COLLATZ_S = BranchMap(2, ((1, 0, 2), (3, 1, 1)), name="collatz-s")
THREE_N_MINUS_ONE = BranchMap(2, ((1, 0, 2), (3, -1, 2)), name="3n-minus-1")

BUILTIN_MAPS = {bm.name: bm for bm in (COLLATZ_T, COLLATZ_S, THREE_N_MINUS_ONE)}


def load_map(source: str) -> BranchMap:
    """Resolve a built-in map name or read a map-spec file."""
    if source in BUILTIN_MAPS:
        return BUILTIN_MAPS[source]
    if os.path.exists(source):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        # bare file names fall back to the map-specs shipped with the package
        bundled = resources.files("collatz_ergodic").joinpath("mapspecs", os.path.basename(source))
        if os.path.basename(source) != source or not bundled.is_file():
            raise FileNotFoundError(f"no built-in map or map-spec file named {source!r}")
        text = bundled.read_text("utf-8")
    return parse_mapspec(text, name=source)
