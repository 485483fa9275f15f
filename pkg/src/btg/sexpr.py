"""Parenthesized surface syntax: a reader and writer for S-expressions.

Atoms are symbols or integers; ``;`` starts a comment running to end of
line. Every node remembers its line and column (1-based) so later
elaboration stages can point at the source of a problem.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import ParseError


@dataclass(frozen=True)
class SAtom:
    text: str
    line: int = 0
    col: int = 0

    @property
    def is_int(self) -> bool:
        t = self.text
        if t and t[0] in "+-":
            t = t[1:]
        return t.isdigit()

    @property
    def int_value(self) -> int:
        if not self.is_int:
            raise ParseError(f"line {self.line}, col {self.col}: "
                             f"{self.text!r} is not an integer")
        return int(self.text)


@dataclass(frozen=True)
class SList:
    items: tuple["SExpr", ...]
    line: int = 0
    col: int = 0

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]


SExpr = Union[SAtom, SList]


def _tokens(text: str):
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            col += 1
            i += 1
            continue
        if c == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c in "()":
            yield (c, line, col)
            col += 1
            i += 1
            continue
        start = i
        start_col = col
        while i < n and text[i] not in "() \t\r\n;":
            i += 1
            col += 1
        yield (text[start:i], line, start_col)


def parse_sexprs(text: str) -> list[SExpr]:
    """Every top-level S-expression in the text, in order."""
    out: list[SExpr] = []
    stack: list[tuple[list, int, int]] = []
    for tok, line, col in _tokens(text):
        if tok == "(":
            stack.append(([], line, col))
        elif tok == ")":
            if not stack:
                raise ParseError(f"line {line}, col {col}: unmatched ')'")
            items, oline, ocol = stack.pop()
            node = SList(tuple(items), oline, ocol)
            if stack:
                stack[-1][0].append(node)
            else:
                out.append(node)
        else:
            node = SAtom(tok, line, col)
            if stack:
                stack[-1][0].append(node)
            else:
                out.append(node)
    if stack:
        _, line, col = stack[-1]
        raise ParseError(f"line {line}, col {col}: unclosed '('")
    return out


def write_sexpr(node: SExpr) -> str:
    if isinstance(node, SAtom):
        return node.text
    return "(" + " ".join(write_sexpr(x) for x in node.items) + ")"


def atom(text) -> SAtom:
    return SAtom(str(text))


def slist(*items) -> SList:
    return SList(tuple(items))


def pretty(node: SExpr, indent: int = 0, width: int = 78) -> str:
    """Readable multi-line rendering: short lists stay on one line,
    long ones break after the head."""
    flat = write_sexpr(node)
    if len(flat) + indent <= width or isinstance(node, SAtom):
        return flat
    head = node.items[0] if len(node.items) else None
    pad = " " * (indent + 2)
    if head is not None and isinstance(head, SAtom):
        lines = [f"({head.text}"]
        for item in node.items[1:]:
            lines.append(pad + pretty(item, indent + 2, width))
        return "\n".join(lines) + ")"
    return "\n".join(
        ("(" if i == 0 else pad) + pretty(item, indent + 2, width)
        for i, item in enumerate(node.items)) + ")"
