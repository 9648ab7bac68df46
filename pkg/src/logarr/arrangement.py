"""Signed multiarrangements, inner products, and spec-file ingestion.

A spec file is TOML with a `variables` array, an optional `inner_product`
matrix (entries are integers or exact rational strings such as "1/2"),
repeated `[[hyperplane]]` tables with `form` and `multiplicity`, and an
optional `[coxeter]` section (see the coxeter module).
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import linalg
from .expressions import ParseError, parse_poly, poly_to_string
from .poly import LinForm, Poly


class SpecError(ValueError):
    """Raised for invalid arrangements, inner products or spec files."""


class InnerProduct:
    """A symmetric positive definite rational matrix on the coordinate
    differentials.  The default is the identity (orthonormal coordinates).
    """

    __slots__ = ("matrix", "_inverse")

    def __init__(self, matrix: Sequence[Sequence]):
        rows = tuple(tuple(Fraction(v) for v in row) for row in matrix)
        n = len(rows)
        if any(len(row) != n for row in rows):
            raise SpecError("inner product matrix must be square")
        for i in range(n):
            for j in range(i + 1, n):
                if rows[i][j] != rows[j][i]:
                    raise SpecError("inner product matrix must be symmetric")
        for k in range(1, n + 1):
            minor = [row[:k] for row in rows[:k]]
            if linalg.det_fraction(minor) <= 0:
                raise SpecError("inner product matrix must be positive definite")
        object.__setattr__(self, "matrix", rows)
        object.__setattr__(self, "_inverse", None)

    def __setattr__(self, name, value):
        raise AttributeError("InnerProduct is immutable")

    @classmethod
    def identity(cls, dimension: int) -> "InnerProduct":
        return cls([[int(i == j) for j in range(dimension)] for i in range(dimension)])

    @property
    def dimension(self) -> int:
        return len(self.matrix)

    def is_identity(self) -> bool:
        return all(v == (1 if i == j else 0) for i, row in enumerate(self.matrix) for j, v in enumerate(row))

    def inverse(self) -> tuple[tuple[Fraction, ...], ...]:
        inv = object.__getattribute__(self, "_inverse")
        if inv is None:
            inv = tuple(tuple(row) for row in linalg.invert_fraction(self.matrix))
            object.__setattr__(self, "_inverse", inv)
        return inv

    def pairing(self, a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
        return sum(ai * v * bj for ai, row in zip(a, self.matrix) for v, bj in zip(row, b))

    def __eq__(self, other):
        if not isinstance(other, InnerProduct):
            return NotImplemented
        return self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)

    def __repr__(self):
        return f"InnerProduct({[[str(v) for v in row] for row in self.matrix]})"


class SignedMulti:
    """A central multiarrangement with integer (possibly negative or zero)
    multiplicities.  Hyperplane forms are pairwise non-proportional;
    multiplicity-0 entries are retained but impose no conditions.
    """

    __slots__ = ("variables", "hyperplanes")

    def __init__(self, variables: Sequence[str], hyperplanes: Sequence[tuple[LinForm, int]]):
        variables = tuple(variables)
        pairs = []
        seen: set = set()
        for form, mult in hyperplanes:
            if form.variables != variables:
                raise SpecError("hyperplane form uses different variables than the arrangement")
            if form in seen:
                raise SpecError(f"proportional (duplicate) hyperplane forms: {poly_to_string(form.to_poly())}")
            if not isinstance(mult, int):
                raise SpecError("multiplicities must be integers")
            seen.add(form)
            pairs.append((form, mult))
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "hyperplanes", tuple(pairs))

    def __setattr__(self, name, value):
        raise AttributeError("SignedMulti is immutable")

    @property
    def dimension(self) -> int:
        return len(self.variables)

    def multiplicity(self, form: LinForm) -> int:
        for f, m in self.hyperplanes:
            if f == form:
                return m
        raise KeyError("form is not a hyperplane of this arrangement")

    def a_plus(self) -> list[tuple[LinForm, int]]:
        return [(f, m) for f, m in self.hyperplanes if m > 0]

    def a_minus(self) -> list[tuple[LinForm, int]]:
        return [(f, m) for f, m in self.hyperplanes if m < 0]

    def q_plus(self) -> Poly:
        result = Poly.one(self.variables)
        for form, mult in self.a_plus():
            result = result * form.to_poly() ** mult
        return result

    def q_minus(self) -> Poly:
        result = Poly.one(self.variables)
        for form, mult in self.a_minus():
            result = result * form.to_poly() ** (-mult)
        return result

    def m_abs(self) -> int:
        return sum(m for _, m in self.hyperplanes)

    def negate(self) -> "SignedMulti":
        return SignedMulti(self.variables, [(f, -m) for f, m in self.hyperplanes])

    def with_multiplicity(self, mult_fn) -> "SignedMulti":
        return SignedMulti(self.variables, [(f, mult_fn(f, m)) for f, m in self.hyperplanes])

    def __eq__(self, other):
        if not isinstance(other, SignedMulti):
            return NotImplemented
        return self.variables == other.variables and self.hyperplanes == other.hyperplanes

    def __hash__(self):
        return hash((self.variables, self.hyperplanes))

    def __repr__(self):
        inside = ", ".join(f"{poly_to_string(f.to_poly())}:{m:+d}" for f, m in self.hyperplanes)
        return f"SignedMulti({inside})"


@dataclass(frozen=True)
class CoxeterSection:
    """Raw `[coxeter]` data from a spec file; resolved by the coxeter module."""

    type_name: str | None = None
    roots: tuple[str, ...] | None = None
    invariants: tuple[str, ...] | None = None


@dataclass(frozen=True)
class SpecFile:
    arrangement: SignedMulti
    inner_product: InnerProduct
    coxeter: CoxeterSection | None = None


def parse_rational(value) -> Fraction:
    if isinstance(value, bool):
        raise SpecError(f"expected an exact rational, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise SpecError(f"bad rational literal {value!r}: {exc}") from None
    if isinstance(value, float):
        raise SpecError(f"floats are not exact; write {value!r} as a rational string")
    raise SpecError(f"expected an exact rational, got {value!r}")


def load_spec_file(text: str) -> SpecFile:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise SpecError(f"spec file is not valid TOML: {exc}") from None

    variables = data.get("variables")
    if not isinstance(variables, list) or not variables or not all(isinstance(v, str) for v in variables):
        raise SpecError("spec file needs a nonempty `variables` array of identifiers")
    variables = tuple(variables)
    if len(set(variables)) != len(variables):
        raise SpecError("duplicate variable names")

    raw_g = data.get("inner_product")
    if raw_g is None:
        inner = InnerProduct.identity(len(variables))
    else:
        if not isinstance(raw_g, list):
            raise SpecError("`inner_product` must be an array of arrays")
        matrix = [[parse_rational(v) for v in row] for row in raw_g]
        if len(matrix) != len(variables):
            raise SpecError("inner product dimension does not match the variable count")
        inner = InnerProduct(matrix)

    hyperplanes = []
    raw_planes = data.get("hyperplane", [])
    if not isinstance(raw_planes, list):
        raise SpecError("`hyperplane` entries must be tables ([[hyperplane]])")
    for entry in raw_planes:
        if not isinstance(entry, dict) or "form" not in entry or "multiplicity" not in entry:
            raise SpecError("each [[hyperplane]] needs `form` and `multiplicity`")
        expr = entry["form"]
        if not isinstance(expr, str):
            raise SpecError("hyperplane `form` must be an expression string")
        try:
            form_poly = parse_poly(expr, variables)
        except ParseError as exc:
            raise SpecError(f"bad hyperplane form {expr!r}: {exc}") from None
        try:
            form = LinForm.from_poly(form_poly)
        except ValueError:
            raise SpecError(f"hyperplane form {expr!r} is not a nonzero homogeneous linear form") from None
        mult = entry["multiplicity"]
        if not isinstance(mult, int) or isinstance(mult, bool):
            raise SpecError(f"multiplicity of {expr!r} must be an integer")
        hyperplanes.append((form, mult))

    arrangement = SignedMulti(variables, hyperplanes)

    coxeter = None
    raw_cox = data.get("coxeter")
    if raw_cox is not None:
        if not isinstance(raw_cox, dict):
            raise SpecError("[coxeter] must be a table")
        type_name = raw_cox.get("type")
        roots = raw_cox.get("roots")
        invariants = raw_cox.get("invariants")
        if type_name is not None and not isinstance(type_name, str):
            raise SpecError("coxeter `type` must be a string")
        if roots is not None and not (isinstance(roots, list) and all(isinstance(r, str) for r in roots)):
            raise SpecError("coxeter `roots` must be an array of linear-form strings")
        if invariants is not None and not (isinstance(invariants, list) and all(isinstance(r, str) for r in invariants)):
            raise SpecError("coxeter `invariants` must be an array of polynomial strings")
        if type_name is None and (roots is None or invariants is None):
            raise SpecError("[coxeter] needs either `type` or both `roots` and `invariants`")
        coxeter = CoxeterSection(
            type_name=type_name,
            roots=tuple(roots) if roots is not None else None,
            invariants=tuple(invariants) if invariants is not None else None,
        )

    return SpecFile(arrangement=arrangement, inner_product=inner, coxeter=coxeter)


def load_spec(text: str) -> tuple[SignedMulti, InnerProduct]:
    spec = load_spec_file(text)
    return spec.arrangement, spec.inner_product


def _form_to_expr(form: LinForm) -> str:
    return poly_to_string(form.to_poly())


def emit_spec(arrangement: SignedMulti, inner: InnerProduct | None = None) -> str:
    """Canonical spec text; load_spec(emit_spec(a, g)) reproduces (a, g)."""
    lines = ["variables = [" + ", ".join(f'"{v}"' for v in arrangement.variables) + "]"]
    if inner is not None and not inner.is_identity():
        rows = []
        for row in inner.matrix:
            rows.append("[" + ", ".join(f'"{v.numerator}/{v.denominator}"' if v.denominator != 1 else str(v.numerator) for v in row) + "]")
        lines.append("inner_product = [" + ", ".join(rows) + "]")
    for form, mult in arrangement.hyperplanes:
        lines.append("")
        lines.append("[[hyperplane]]")
        lines.append(f'form = "{_form_to_expr(form)}"')
        lines.append(f"multiplicity = {mult}")
    return "\n".join(lines) + "\n"
