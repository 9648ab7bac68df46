"""Exact linear algebra kernels: nullspaces, solves and determinants.

Rational systems are scaled to integer rows and eliminated with
cross-multiplication plus gcd normalization, which keeps the arithmetic
in (fast) Python integers.  Determinants of rational-function matrices
use cofactor expansion, so no division in the function field is needed.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from .poly import Poly, RatFn


def _scale_row(row: Sequence[Fraction]) -> list[int]:
    lcm = 1
    for c in row:
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    ints = [int(c * lcm) for c in row]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
    return ints


def _eliminate(rows: list[list[int]], ncols: int) -> tuple[list[list[int]], dict[int, int]]:
    """Row echelon form over Z.  Returns surviving rows and pivot->row map."""
    pivots: dict[int, int] = {}
    work = [r for r in rows if any(r)]
    echelon: list[list[int]] = []
    for col in range(ncols):
        pivot_idx = None
        best = None
        for idx, row in enumerate(work):
            v = row[col]
            if v != 0 and (best is None or abs(v) < best):
                best = abs(v)
                pivot_idx = idx
                if best == 1:
                    break
        if pivot_idx is None:
            continue
        pivot_row = work.pop(pivot_idx)
        pv = pivot_row[col]
        remaining = []
        for row in work:
            v = row[col]
            if v:
                row = [pv * a - v * b for a, b in zip(row, pivot_row)]
                g = 0
                for a in row:
                    g = math.gcd(g, a)
                if g > 1:
                    row = [a // g for a in row]
            if any(row):
                remaining.append(row)
        work = remaining
        pivots[col] = len(echelon)
        echelon.append(pivot_row)
    return echelon, pivots


def nullspace(matrix: Sequence[Sequence[Fraction]], ncols: int | None = None) -> list[list[Fraction]]:
    """A basis of the exact right kernel of a rational matrix.

    Accepts an empty matrix when ncols is given (kernel is everything).
    """
    rows = [list(r) for r in matrix]
    if ncols is None:
        if not rows:
            raise ValueError("ncols is required for an empty matrix")
        ncols = len(rows[0])
    int_rows = [_scale_row(r) for r in rows]
    echelon, pivots = _eliminate(int_rows, ncols)
    free_cols = [c for c in range(ncols) if c not in pivots]
    basis: list[list[Fraction]] = []
    pivot_cols_sorted = sorted(pivots)
    for free in free_cols:
        vec = [Fraction(0)] * ncols
        vec[free] = Fraction(1)
        for col in reversed(pivot_cols_sorted):
            row = echelon[pivots[col]]
            s = sum((Fraction(row[c]) * vec[c] for c in range(col + 1, ncols) if row[c]), Fraction(0))
            vec[col] = -s / row[col]
        basis.append(vec)
    return basis


def solve(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> tuple[list[Fraction], list[list[Fraction]]] | None:
    """Solve matrix x = rhs exactly.

    Returns (particular solution, kernel basis), or None when the system
    is inconsistent.
    """
    rows = [list(r) + [Fraction(b)] for r, b in zip(matrix, rhs)]
    ncols = len(rows[0]) - 1 if rows else 0
    if not rows:
        return [Fraction(0)] * ncols, []
    int_rows = [_scale_row(r) for r in rows]
    echelon, pivots = _eliminate(int_rows, ncols + 1)
    if ncols in pivots:
        return None
    solution = [Fraction(0)] * ncols
    for col in sorted(pivots, reverse=True):
        row = echelon[pivots[col]]
        s = Fraction(row[ncols])
        s -= sum(Fraction(row[c]) * solution[c] for c in range(col + 1, ncols) if row[c])
        solution[col] = s / row[col]
    kernel = nullspace([r[:ncols] for r in rows], ncols)
    return solution, kernel


def rank(matrix: Sequence[Sequence[Fraction]], ncols: int | None = None) -> int:
    rows = [list(r) for r in matrix]
    if not rows:
        return 0
    if ncols is None:
        ncols = len(rows[0])
    _, pivots = _eliminate([_scale_row(r) for r in rows], ncols)
    return len(pivots)


class RowSpace:
    """Incremental row space over Q for rank and membership queries."""

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows: list[list[int]] = []
        self.pivots: dict[int, int] = {}

    def _reduce(self, vec: Sequence[Fraction]) -> list[int]:
        row = _scale_row(list(vec))
        for col in sorted(self.pivots):
            v = row[col]
            if v == 0:
                continue
            pivot_row = self.rows[self.pivots[col]]
            pv = pivot_row[col]
            row = [pv * a - v * b for a, b in zip(row, pivot_row)]
            g = 0
            for a in row:
                g = math.gcd(g, a)
            if g > 1:
                row = [a // g for a in row]
        return row

    def contains(self, vec: Sequence[Fraction]) -> bool:
        return not any(self._reduce(vec))

    def add(self, vec: Sequence[Fraction]) -> bool:
        """Add a vector; True if it enlarged the space."""
        row = self._reduce(vec)
        for col, v in enumerate(row):
            if v != 0:
                self.pivots[col] = len(self.rows)
                self.rows.append(row)
                return True
        return False

    @property
    def dimension(self) -> int:
        return len(self.rows)


def det_fraction(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant of a rational matrix by fraction-free elimination."""
    n = len(matrix)
    if n == 0:
        return Fraction(1)
    rows = [[Fraction(v) for v in r] for r in matrix]
    sign = 1
    for col in range(n):
        pivot = None
        for i in range(col, n):
            if rows[i][col] != 0:
                pivot = i
                break
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            sign = -sign
        pv = rows[col][col]
        for i in range(col + 1, n):
            f = rows[i][col] / pv
            if f:
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[col])]
    result = Fraction(sign)
    for i in range(n):
        result *= rows[i][i]
    return result


def invert_fraction(matrix: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Exact inverse of a rational matrix via Gauss-Jordan elimination."""
    n = len(matrix)
    aug = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((i for i in range(col, n) if aug[i][col] != 0), None)
        if pivot is None:
            raise ValueError("matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        aug[col] = [v / pv for v in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[col])]
    return [row[n:] for row in aug]


def _det_laplace(matrix, rows: tuple[int, ...], col: int, zero, cache):
    if not rows:
        return None  # empty product handled by caller
    key = rows
    if key in cache:
        return cache[key]
    result = None
    sign = 1
    for idx, r in enumerate(rows):
        entry = matrix[r][col]
        if not _is_zero_entry(entry):
            rest_rows = rows[:idx] + rows[idx + 1 :]
            if rest_rows:
                sub = _det_laplace(matrix, rest_rows, col + 1, zero, cache)
                term = entry * sub if sub is not None else None
            else:
                term = entry
            if term is not None:
                term = term if sign > 0 else -term
                result = term if result is None else result + term
        sign = -sign
    if result is None:
        result = zero
    cache[key] = result
    return result


def _is_zero_entry(entry) -> bool:
    if isinstance(entry, (Poly, RatFn)):
        return entry.is_zero()
    return entry == 0


def det_ratfn(matrix: Sequence[Sequence[RatFn]]) -> RatFn:
    """Exact determinant of a square RatFn matrix, reduced."""
    n = len(matrix)
    for row in matrix:
        if len(row) != n:
            raise ValueError("determinant requires a square matrix")
    if n == 0:
        raise ValueError("empty matrix")
    variables = matrix[0][0].variables
    zero = RatFn.zero(variables)
    return _det_laplace(matrix, tuple(range(n)), 0, zero, {})


def det_poly(matrix: Sequence[Sequence[Poly]]) -> Poly:
    """Exact determinant of a square Poly matrix (no division)."""
    n = len(matrix)
    if n == 0:
        raise ValueError("empty matrix")
    variables = matrix[0][0].variables
    zero = Poly.zero(variables)
    return _det_laplace(matrix, tuple(range(n)), 0, zero, {})


def mat_vec(matrix: Sequence[Sequence[Fraction]], vec: Sequence) -> list:
    return [sum((m * v for m, v in zip(row, vec) if m != 0), start=_zero_like(vec)) for row in matrix]


def _zero_like(vec):
    first = vec[0]
    if isinstance(first, RatFn):
        return RatFn.zero(first.variables)
    if isinstance(first, Poly):
        return Poly.zero(first.variables)
    return Fraction(0)
