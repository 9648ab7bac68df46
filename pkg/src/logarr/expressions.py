"""Expression grammar for polynomials, rational functions and vector fields.

Scalar expressions use integers, rationals a/b, variables, + - * / ^ and
parentheses; whitespace is ignored.  Vector fields are sums of terms
``<coefficient> @<variable>`` where ``@v`` stands for the partial
derivative in v, e.g. ``(1/x)@x + ((x)/(x-y))@x - ((y)/(x-y))@y``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .poly import Poly, RatFn, grlex_key


class ParseError(ValueError):
    """Raised on malformed expressions; carries the text offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


_SYMBOLS = "+-*/^()@"


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _SYMBOLS:
            tokens.append(("sym", ch, i))
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("int", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("ident", text[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.text = text
        self.variables = tuple(variables)
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_sym(self, sym: str):
        kind, value, offset = self.next()
        if kind != "sym" or value != sym:
            raise ParseError(f"expected {sym!r}", offset)

    def fail_here(self, message: str):
        raise ParseError(message, self.peek()[2])

    # scalar grammar: sum -> product (('+'|'-') product)*
    #                 product -> unary (('*'|'/') unary)*
    #                 unary -> '-'* power
    #                 power -> atom ('^' int)?
    #                 atom -> int | ident | '(' sum ')'

    def parse_sum(self) -> RatFn:
        value = self.parse_product()
        while True:
            kind, tok, _ = self.peek()
            if kind == "sym" and tok in "+-":
                self.next()
                rhs = self.parse_product()
                value = value + rhs if tok == "+" else value - rhs
            else:
                return value

    def parse_product(self) -> RatFn:
        value = self.parse_unary()
        while True:
            kind, tok, offset = self.peek()
            if kind == "sym" and tok in "*/":
                self.next()
                rhs = self.parse_unary()
                if tok == "*":
                    value = value * rhs
                else:
                    if rhs.is_zero():
                        raise ParseError("division by zero", offset)
                    value = value / rhs
            else:
                return value

    def parse_unary(self) -> RatFn:
        negate = False
        while True:
            kind, tok, _ = self.peek()
            if kind == "sym" and tok == "-":
                self.next()
                negate = not negate
            else:
                break
        value = self.parse_power()
        return -value if negate else value

    def parse_power(self) -> RatFn:
        value = self.parse_atom()
        kind, tok, _ = self.peek()
        if kind == "sym" and tok == "^":
            self.next()
            kind, exp, offset = self.next()
            if kind != "int":
                raise ParseError("exponent must be a nonnegative integer", offset)
            value = value ** int(exp)
        return value

    def parse_atom(self) -> RatFn:
        kind, tok, offset = self.next()
        if kind == "int":
            return RatFn.constant(self.variables, Fraction(int(tok)))
        if kind == "ident":
            if tok not in self.variables:
                raise ParseError(f"unknown variable {tok!r}", offset)
            return RatFn(Poly.variable(self.variables, tok))
        if kind == "sym" and tok == "(":
            value = self.parse_sum()
            self.expect_sym(")")
            return value
        raise ParseError(f"expected a value, found {tok!r}" if tok else "unexpected end of expression", offset)

    # field grammar: field -> ['-'] fterm (('+'|'-') fterm)*
    #                fterm -> product '@' ident

    def parse_field(self) -> list:
        coeffs = [RatFn.zero(self.variables) for _ in self.variables]
        sign = 1
        kind, tok, _ = self.peek()
        if kind == "sym" and tok == "-":
            self.next()
            sign = -1
        while True:
            coeff, var_idx = self.parse_field_term()
            coeffs[var_idx] = coeffs[var_idx] + (coeff if sign > 0 else -coeff)
            kind, tok, offset = self.peek()
            if kind == "end":
                return coeffs
            if kind == "sym" and tok in "+-":
                self.next()
                sign = 1 if tok == "+" else -1
            else:
                raise ParseError(f"expected '+', '-' or end of field expression, found {tok!r}", offset)

    def parse_field_term(self) -> tuple[RatFn, int]:
        coeff = self.parse_product()
        kind, tok, offset = self.next()
        if kind != "sym" or tok != "@":
            raise ParseError("expected '@<variable>' after the coefficient", offset)
        kind, name, offset = self.next()
        if kind != "ident":
            raise ParseError("expected a variable name after '@'", offset)
        if name not in self.variables:
            raise ParseError(f"unknown variable {name!r}", offset)
        return coeff, self.variables.index(name)

    def check_done(self):
        kind, tok, offset = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing input {tok!r}", offset)


def parse_ratfn(text: str, variables: Sequence[str]) -> RatFn:
    parser = _Parser(text, variables)
    value = parser.parse_sum()
    parser.check_done()
    return value


def parse_poly(text: str, variables: Sequence[str]) -> Poly:
    value = parse_ratfn(text, variables)
    if not value.is_polynomial():
        raise ParseError("expected a polynomial, got a nontrivial denominator", 0)
    return value.as_poly()


def parse_field_coeffs(text: str, variables: Sequence[str]) -> list[RatFn]:
    parser = _Parser(text, variables)
    coeffs = parser.parse_field()
    return coeffs


# ---- emitters ----------------------------------------------------------


def _fraction_to_string(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _monomial_to_string(variables, exponents) -> str:
    parts = []
    for name, e in zip(variables, exponents):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def poly_to_string(p: Poly) -> str:
    """Canonical string, grlex-descending terms, exact rational coefficients."""
    if p.is_zero():
        return "0"
    pieces = []
    for exps in sorted(p.terms, key=grlex_key, reverse=True):
        coeff = p.terms[exps]
        mono = _monomial_to_string(p.variables, exps)
        sign = "-" if coeff < 0 else "+"
        mag = abs(coeff)
        if not mono:
            body = _fraction_to_string(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{_fraction_to_string(mag)}*{mono}"
        pieces.append((sign, body))
    first_sign, first_body = pieces[0]
    out = ("-" if first_sign == "-" else "") + first_body
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


def _needs_parens(text: str) -> bool:
    return (" " in text) or ("/" in text)


def ratfn_to_string(r: RatFn) -> str:
    num = poly_to_string(r.num)
    if r.is_polynomial():
        if r.den.constant_value() != 1:  # pragma: no cover - den normalized to 1
            num = f"({num})/{_fraction_to_string(r.den.constant_value())}"
        return num
    den = poly_to_string(r.den)
    num_s = f"({num})" if _needs_parens(num) or num.startswith("-") else num
    den_s = f"({den})" if _needs_parens(den) or "*" in den or den.startswith("-") else den
    return f"{num_s}/{den_s}"


def field_to_string(coeffs: Sequence[RatFn], variables: Sequence[str]) -> str:
    terms = []
    for coeff, name in zip(coeffs, variables):
        if coeff.is_zero():
            continue
        terms.append(f"({ratfn_to_string(coeff)})@{name}")
    if not terms:
        return "0@" + variables[0]
    return " + ".join(terms)
