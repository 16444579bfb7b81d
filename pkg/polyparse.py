"""
Recursive descent parser for polynomial input.

GRAMMAR

  expression
    term ( ('+' | '-') term )...

  term
    unary ( '*' unary )...

  unary
    ('+' | '-') unary
    power

  power
    atom [ '^' integer ]

  atom
    integer
    variable
    '(' expression ')'

Multiplication must be explicit: "2x" and "(x)(y)" are rejected.
"""
import logging
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from errors import ParseError, SpecValidationError
from polyring import IntegerPolynomial, PolyMapping

logger = logging.getLogger(__name__)

IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
NUMBER = re.compile(r"[0-9]+")


@dataclass(frozen=True)
class Token:
    kind: str  # "number", "name", "op", "lparen", "rparen", "end"
    text: str
    position: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    position = 0
    while position < len(text):
        char = text[position]
        if char.isspace():
            position += 1
            continue
        if char.isdigit():
            match = NUMBER.match(text, position)
            tokens.append(Token("number", match.group(), position))
            position = match.end()
        elif char.isalpha() or char == "_":
            match = IDENTIFIER.match(text, position)
            tokens.append(Token("name", match.group(), position))
            position = match.end()
        elif char in "+-*^":
            if text.startswith("**", position):
                raise ParseError("use '^' for powers", position, text)
            tokens.append(Token("op", char, position))
            position += 1
        elif char == "(":
            tokens.append(Token("lparen", char, position))
            position += 1
        elif char == ")":
            tokens.append(Token("rparen", char, position))
            position += 1
        else:
            raise ParseError(f"unexpected character {char!r}", position, text)
    tokens.append(Token("end", "", len(text)))
    return tokens


class PolynomialParser:
    """Parses one expression in a fixed, ordered set of variables."""

    def __init__(self, text: str, variables: Sequence[str]):
        self.text = text
        self.variables = list(variables)
        self.index_of = {name: i for i, name in enumerate(self.variables)}
        self.tokens = tokenize(text)
        self.cursor = 0

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def peek(self) -> Token:
        return self.tokens[self.cursor]

    def advance(self) -> Token:
        token = self.tokens[self.cursor]
        self.cursor += 1
        return token

    def fail(self, message: str, token: Token):
        raise ParseError(message, token.position, self.text)

    def parse(self) -> IntegerPolynomial:
        if self.peek().kind == "end":
            self.fail("empty expression", self.peek())
        result = self.expression()
        token = self.peek()
        if token.kind != "end":
            if token.kind in ("name", "number", "lparen"):
                self.fail("implicit multiplication is not supported; use '*'", token)
            self.fail(f"unexpected {token.text!r}", token)
        return result

    def expression(self) -> IntegerPolynomial:
        result = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            operator = self.advance().text
            right = self.term()
            result = result + right if operator == "+" else result - right
        return result

    def term(self) -> IntegerPolynomial:
        result = self.unary()
        while self.peek().kind == "op" and self.peek().text == "*":
            self.advance()
            result = result * self.unary()
        return result

    def unary(self) -> IntegerPolynomial:
        token = self.peek()
        if token.kind == "op" and token.text in "+-":
            self.advance()
            operand = self.unary()
            return -operand if token.text == "-" else operand
        return self.power()

    def power(self) -> IntegerPolynomial:
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            token = self.peek()
            if token.kind != "number":
                self.fail("exponent must be a nonnegative integer", token)
            self.advance()
            base = base ** int(token.text)
            if self.peek().kind == "op" and self.peek().text == "^":
                self.fail("chained exponents need parentheses", self.peek())
        return base

    def atom(self) -> IntegerPolynomial:
        token = self.advance()
        if token.kind == "number":
            return IntegerPolynomial.constant(self.nvars, int(token.text))
        if token.kind == "name":
            if token.text not in self.index_of:
                self.fail(f"unknown variable {token.text!r}", token)
            return IntegerPolynomial.variable(self.nvars, self.index_of[token.text])
        if token.kind == "lparen":
            inner = self.expression()
            closing = self.peek()
            if closing.kind != "rparen":
                self.fail("expected ')'", closing)
            self.advance()
            return inner
        if token.kind == "end":
            self.fail("unexpected end of input", token)
        self.fail(f"unexpected {token.text!r}", token)


def validate_variables(variables: Sequence[str]) -> None:
    if not variables:
        raise SpecValidationError("at least one variable must be declared")
    seen = set()
    for name in variables:
        if not IDENTIFIER.fullmatch(name):
            raise SpecValidationError(f"{name!r} is not a valid variable name")
        if name in seen:
            raise SpecValidationError(f"variable {name!r} declared twice")
        seen.add(name)


def parse_polynomial(text: str, variables: Sequence[str]) -> IntegerPolynomial:
    """Parse text into the expanded canonical polynomial in the given variable order."""
    validate_variables(variables)
    return PolynomialParser(text, variables).parse()


def parse_mapping(texts: Iterable[str], variables: Sequence[str]) -> PolyMapping:
    return PolyMapping(tuple(parse_polynomial(text, variables) for text in texts))
