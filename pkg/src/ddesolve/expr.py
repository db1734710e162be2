"""Tokenizer and recursive-descent parser for polynomial expressions.

The grammar is shared by the polynomial text format and by the DDE input
language::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom (("^" | "**") INT)?
    atom   := NUMBER | NAME | NAME "[" NAME "]" | NAME "(" expr ")" | "(" expr ")"

Parsing produces a small tuple-based AST which callers evaluate with their
own leaf semantics (see :func:`evaluate`).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from gmpy2 import mpq


class ParseError(ValueError):
    """Syntax or semantic error with a 1-based line/column position."""

    def __init__(self, message: str, line: int = 1, col: int = 1):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\*\*|[-+*/^()\[\]]))"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    col: int


def tokenize(text: str, line: int = 1) -> list[Token]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[col - 1]!r}", line, col)
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    tokens.append(Token("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, line: int):
        self.tokens = tokenize(text, line)
        self.i = 0
        self.line = line

    def peek(self) -> Token:
        return self.tokens[self.i]

    def take(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.take()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}", self.line, tok.col)
        return tok

    def error(self, msg: str, tok: Token):
        raise ParseError(msg, self.line, tok.col)

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            self.error(f"unexpected {tok.text!r}", tok)
        return node

    def expr(self):
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            node = ("add" if op == "+" else "sub", node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek().text in ("*", "/"):
            tok = self.take()
            rhs = self.unary()
            node = ("mul", node, rhs) if tok.text == "*" else ("div", node, rhs, tok.col)
        return node

    def unary(self):
        if self.peek().text == "-":
            self.take()
            return ("neg", self.unary())
        if self.peek().text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek().text in ("^", "**"):
            self.take()
            tok = self.take()
            if tok.kind != "num" or "." in tok.text:
                self.error("exponent must be a nonnegative integer", tok)
            return ("pow", base, int(tok.text))
        return base

    def atom(self):
        tok = self.take()
        if tok.kind == "num":
            if "." in tok.text:
                whole, frac = tok.text.split(".")
                return ("num", mpq(int(whole + frac), 10 ** len(frac)))
            return ("num", mpq(int(tok.text)))
        if tok.kind == "name":
            if self.peek().text == "[":
                self.take()
                arg = self.take()
                if arg.kind != "name":
                    self.error("expected a name inside brackets", arg)
                self.expect("]")
                return ("app", tok.text, arg.text, tok.col)
            if self.peek().text == "(":
                self.take()
                arg = self.expr()
                self.expect(")")
                return ("call", tok.text, arg, tok.col)
            return ("sym", tok.text, tok.col)
        if tok.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        self.error(f"unexpected {tok.text or 'end of input'!r}", tok)


def parse(text: str, line: int = 1):
    """Parse ``text`` into an AST."""
    return _Parser(text, line).parse()


def evaluate(node, leaf, one, line: int = 1):
    """Evaluate an AST bottom-up.

    ``leaf(node)`` maps ``sym``/``app``/``call`` nodes to ring elements and
    ``one`` is the ring's unit (used to lift numbers).  Division is only
    allowed by nonzero numeric constants.
    """
    kind = node[0]
    if kind == "num":
        return one * node[1]
    if kind in ("sym", "app", "call"):
        return leaf(node)
    if kind == "neg":
        return -evaluate(node[1], leaf, one, line)
    if kind == "pow":
        return evaluate(node[1], leaf, one, line) ** node[2]
    a = evaluate(node[1], leaf, one, line)
    if kind == "add":
        return a + evaluate(node[2], leaf, one, line)
    if kind == "sub":
        return a - evaluate(node[2], leaf, one, line)
    if kind == "mul":
        return a * evaluate(node[2], leaf, one, line)
    if kind == "div":
        divisor = _constant(node[2])
        if divisor is None or divisor == 0:
            raise ParseError("division is only allowed by a nonzero constant", line, node[3])
        return a * (1 / divisor)
    raise AssertionError(kind)


def _constant(node):
    kind = node[0]
    if kind == "num":
        return node[1]
    if kind == "neg":
        c = _constant(node[1])
        return None if c is None else -c
    if kind == "pow":
        c = _constant(node[1])
        return None if c is None else c ** node[2]
    if kind in ("add", "sub", "mul", "div"):
        a, b = _constant(node[1]), _constant(node[2])
        if a is None or b is None:
            return None
        if kind == "add":
            return a + b
        if kind == "sub":
            return a - b
        if kind == "mul":
            return a * b
        return None if b == 0 else a / b
    return None


def symbols(node, out=None) -> list[str]:
    """Plain symbol names in order of first appearance."""
    if out is None:
        out = []
    kind = node[0]
    if kind == "sym":
        if node[1] not in out:
            out.append(node[1])
    elif kind in ("add", "sub", "mul", "div"):
        symbols(node[1], out)
        symbols(node[2], out)
    elif kind in ("neg", "pow"):
        symbols(node[1], out)
    elif kind == "call":
        symbols(node[2], out)
    return out
