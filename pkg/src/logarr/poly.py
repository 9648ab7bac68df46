"""Exact sparse multivariate polynomials and rational functions over Q.

Coefficients are `fractions.Fraction` throughout; there is no floating
point anywhere in this package.  Monomials are ordered by graded
lexicographic order (total degree first, then exponent vectors compared
left to right), which fixes canonical forms, leading terms and the
denominator normalization of `RatFn`.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Exponents = tuple[int, ...]

INFINITE = math.inf


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact rational: {value!r}")


def grlex_key(exponents: Exponents) -> tuple:
    return (sum(exponents), exponents)


class Poly:
    """A multivariate polynomial with rational coefficients.

    `variables` is an ordered tuple of names; `terms` maps exponent
    tuples (one entry per variable) to nonzero Fractions.  Instances are
    immutable and hashable; equality is equality of canonical forms.
    """

    __slots__ = ("variables", "terms", "_hash")

    def __init__(self, variables: Sequence[str], terms: Mapping[Exponents, Fraction] | None = None):
        object.__setattr__(self, "variables", tuple(variables))
        clean: dict[Exponents, Fraction] = {}
        if terms:
            nvars = len(self.variables)
            for exps, coeff in terms.items():
                coeff = _as_fraction(coeff)
                if coeff == 0:
                    continue
                exps = tuple(exps)
                if len(exps) != nvars or any(e < 0 for e in exps):
                    raise ValueError(f"bad exponent vector {exps} for {nvars} variables")
                clean[exps] = coeff
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    # ---- constructors -------------------------------------------------

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "Poly":
        return cls(variables)

    @classmethod
    def constant(cls, variables: Sequence[str], value) -> "Poly":
        value = _as_fraction(value)
        if value == 0:
            return cls(variables)
        return cls(variables, {(0,) * len(variables): value})

    @classmethod
    def one(cls, variables: Sequence[str]) -> "Poly":
        return cls.constant(variables, 1)

    @classmethod
    def variable(cls, variables: Sequence[str], name: str) -> "Poly":
        variables = tuple(variables)
        idx = variables.index(name)
        exps = tuple(1 if i == idx else 0 for i in range(len(variables)))
        return cls(variables, {exps: Fraction(1)})

    @classmethod
    def monomial(cls, variables: Sequence[str], exponents: Exponents, coeff=1) -> "Poly":
        return cls(variables, {tuple(exponents): _as_fraction(coeff)})

    @classmethod
    def from_linear(cls, variables: Sequence[str], coeffs: Sequence[Fraction]) -> "Poly":
        variables = tuple(variables)
        terms = {}
        for i, c in enumerate(coeffs):
            c = _as_fraction(c)
            if c != 0:
                exps = tuple(1 if j == i else 0 for j in range(len(variables)))
                terms[exps] = c
        return cls(variables, terms)

    # ---- basic queries ------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_value(self) -> Fraction:
        if self.is_zero():
            return Fraction(0)
        if not self.is_constant():
            raise ValueError("not a constant polynomial")
        return next(iter(self.terms.values()))

    def total_degree(self) -> int:
        if self.is_zero():
            raise ValueError("degree of the zero polynomial is undefined")
        return max(sum(e) for e in self.terms)

    def homogeneous_degree(self) -> int | None:
        """Degree if homogeneous, else None.  Zero has no degree."""
        if self.is_zero():
            return None
        degrees = {sum(e) for e in self.terms}
        if len(degrees) == 1:
            return degrees.pop()
        return None

    def leading(self) -> tuple[Exponents, Fraction]:
        if self.is_zero():
            raise ValueError("zero polynomial has no leading term")
        exps = max(self.terms, key=grlex_key)
        return exps, self.terms[exps]

    def coefficient(self, exponents: Exponents) -> Fraction:
        return self.terms.get(tuple(exponents), Fraction(0))

    # ---- ring operations ----------------------------------------------

    def _check_same_ring(self, other: "Poly"):
        if self.variables != other.variables:
            raise ValueError(f"variable mismatch: {self.variables} vs {other.variables}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.constant(self.variables, other)
        if not isinstance(other, Poly):
            return NotImplemented
        self._check_same_ring(other)
        terms = dict(self.terms)
        for exps, coeff in other.terms.items():
            new = terms.get(exps, Fraction(0)) + coeff
            if new == 0:
                terms.pop(exps, None)
            else:
                terms[exps] = new
        return Poly(self.variables, terms)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.constant(self.variables, other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = _as_fraction(other)
            if q == 0:
                return Poly.zero(self.variables)
            return Poly(self.variables, {e: c * q for e, c in self.terms.items()})
        if not isinstance(other, Poly):
            return NotImplemented
        self._check_same_ring(other)
        terms: dict[Exponents, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                new = terms.get(exps, Fraction(0)) + c1 * c2
                if new == 0:
                    terms.pop(exps, None)
                else:
                    terms[exps] = new
        return Poly(self.variables, terms)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        result = Poly.one(self.variables)
        base = self
        n = exponent
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.constant(self.variables, other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.variables == other.variables and self.terms == other.terms

    def __hash__(self):
        h = object.__getattribute__(self, "_hash")
        if h is None:
            h = hash((self.variables, frozenset(self.terms.items())))
            object.__setattr__(self, "_hash", h)
        return h

    # ---- calculus and substitution -------------------------------------

    def derivative(self, var: str) -> "Poly":
        idx = self.variables.index(var)
        terms: dict[Exponents, Fraction] = {}
        for exps, coeff in self.terms.items():
            e = exps[idx]
            if e == 0:
                continue
            new = list(exps)
            new[idx] = e - 1
            key = tuple(new)
            val = terms.get(key, Fraction(0)) + coeff * e
            if val == 0:
                terms.pop(key, None)
            else:
                terms[key] = val
        return Poly(self.variables, terms)

    def substitute(self, replacements: Mapping[str, "Poly"]) -> "Poly":
        """Substitute polynomials for variables (all in the same ring)."""
        idx_repl = {self.variables.index(name): p for name, p in replacements.items()}
        for p in idx_repl.values():
            self._check_same_ring(p)
        result = Poly.zero(self.variables)
        power_cache: dict[tuple[int, int], Poly] = {}

        def cached_power(i: int, e: int) -> Poly:
            key = (i, e)
            if key not in power_cache:
                power_cache[key] = idx_repl[i] ** e
            return power_cache[key]

        for exps, coeff in self.terms.items():
            factor = None
            fixed = [0] * len(self.variables)
            for i, e in enumerate(exps):
                if e == 0:
                    continue
                if i in idx_repl:
                    piece = cached_power(i, e)
                    factor = piece if factor is None else factor * piece
                else:
                    fixed[i] = e
            term = Poly.monomial(self.variables, tuple(fixed), coeff)
            result = result + (term if factor is None else term * factor)
        return result

    def content(self) -> Fraction:
        """Positive rational c such that self/c has coprime integer coefficients."""
        if self.is_zero():
            return Fraction(1)
        nums = [abs(c.numerator) for c in self.terms.values()]
        dens = [c.denominator for c in self.terms.values()]
        g = 0
        for n in nums:
            g = math.gcd(g, n)
        l = 1
        for d in dens:
            l = l * d // math.gcd(l, d)
        return Fraction(g, l)

    def divmod_single(self, divisor: "Poly") -> tuple["Poly", "Poly"]:
        """Long division by one divisor under grlex: self = q*divisor + r.

        The remainder has no monomial divisible by the divisor's leading
        monomial, so r == 0 is an exact divisibility test.
        """
        self._check_same_ring(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        lead_e, lead_c = divisor.leading()
        quotient: dict[Exponents, Fraction] = {}
        remainder: dict[Exponents, Fraction] = {}
        work = dict(self.terms)
        while work:
            exps = max(work, key=grlex_key)
            diff = tuple(a - b for a, b in zip(exps, lead_e))
            if any(d < 0 for d in diff):
                remainder[exps] = work.pop(exps)
                continue
            factor = work[exps] / lead_c
            quotient[diff] = quotient.get(diff, Fraction(0)) + factor
            for de, dc in divisor.terms.items():
                key = tuple(a + b for a, b in zip(diff, de))
                val = work.get(key, Fraction(0)) - factor * dc
                if val == 0:
                    work.pop(key, None)
                else:
                    work[key] = val
        return Poly(self.variables, quotient), Poly(self.variables, remainder)

    def __repr__(self):
        from .expressions import poly_to_string

        return f"Poly({poly_to_string(self)!r})"


class LinForm:
    """A nonzero homogeneous linear form, normalized so the first nonzero
    coefficient is 1.  Proportional forms therefore compare equal.
    """

    __slots__ = ("variables", "coeffs")

    def __init__(self, variables: Sequence[str], coeffs: Sequence):
        variables = tuple(variables)
        values = [_as_fraction(c) for c in coeffs]
        if len(values) != len(variables):
            raise ValueError("coefficient count does not match variable count")
        pivot = next((c for c in values if c != 0), None)
        if pivot is None:
            raise ValueError("linear form must be nonzero")
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "coeffs", tuple(c / pivot for c in values))

    def __setattr__(self, name, value):
        raise AttributeError("LinForm is immutable")

    @classmethod
    def from_poly(cls, p: Poly) -> "LinForm":
        if p.is_zero() or p.homogeneous_degree() != 1:
            raise ValueError("not a nonzero homogeneous linear polynomial")
        coeffs = [Fraction(0)] * len(p.variables)
        for exps, coeff in p.terms.items():
            coeffs[exps.index(1)] = coeff
        return cls(p.variables, coeffs)

    @property
    def pivot(self) -> int:
        return next(i for i, c in enumerate(self.coeffs) if c != 0)

    def to_poly(self) -> Poly:
        return Poly.from_linear(self.variables, self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, LinForm):
            return NotImplemented
        return self.variables == other.variables and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.variables, self.coeffs))

    def __repr__(self):
        from .expressions import poly_to_string

        return f"LinForm({poly_to_string(self.to_poly())!r})"


def divide_linear(p: Poly, alpha: LinForm) -> tuple[Poly, int | float]:
    """Largest k with alpha^k | p, together with the cofactor p / alpha^k.

    Divisibility is tested by substituting the solution of alpha = 0 for
    the pivot variable; the exact quotient then comes from long division.
    Returns (0, +inf) for p == 0.
    """
    if p.variables != alpha.variables:
        raise ValueError("variable mismatch between polynomial and linear form")
    if p.is_zero():
        return p, INFINITE
    pivot = alpha.pivot
    pivot_name = p.variables[pivot]
    rest = [-c for c in alpha.coeffs]
    rest[pivot] = Fraction(0)
    parametrization = Poly.from_linear(p.variables, rest)
    alpha_poly = alpha.to_poly()
    multiplicity = 0
    current = p
    while True:
        if current.substitute({pivot_name: parametrization}).is_zero():
            quotient, rem = current.divmod_single(alpha_poly)
            if not rem.is_zero():  # cannot happen: substitution said divisible
                raise ArithmeticError("inconsistent linear division")
            current = quotient
            multiplicity += 1
        else:
            return current, multiplicity


def _divisors(n: int) -> list[int]:
    n = abs(n)
    if n == 0:
        return []
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
        d += 1
        if d > 1_000_000:  # give up on pathological coefficient sizes
            break
    return small + large[::-1]


def _binary_form_root_candidates(coeffs: dict[int, Fraction], degree: int) -> list[Fraction]:
    """Rational roots t of sum_k c_k t^k, for factor candidates u - t*v."""
    if not coeffs:
        return []
    lo = min(coeffs)
    shifted = {k - lo: c for k, c in coeffs.items()}
    deg = max(shifted)
    if deg == 0:
        return []
    denom_lcm = 1
    for c in shifted.values():
        denom_lcm = denom_lcm * c.denominator // math.gcd(denom_lcm, c.denominator)
    ints = {k: int(c * denom_lcm) for k, c in shifted.items()}
    a0 = ints.get(0, 0)
    an = ints[deg]
    if a0 == 0:
        return []
    roots = []
    for r in _divisors(a0):
        for s in _divisors(an):
            for cand in (Fraction(r, s), Fraction(-r, s)):
                if sum(c * cand**k for k, c in ints.items()) == 0 and cand not in roots:
                    roots.append(cand)
    return roots


def linear_factor_candidates(p: Poly) -> list[LinForm]:
    """Linear forms worth testing as factors of p.

    Single variables are always candidates; two-variable candidates come
    from rational roots of the restrictions of p to coordinate planes.
    Every actual linear factor supported on at most two variables is
    found; candidates are only candidates and must be confirmed with
    divide_linear.
    """
    if p.is_zero():
        return []
    nvars = len(p.variables)
    candidates: list[LinForm] = []
    seen = set()

    def push(coeffs):
        form = LinForm(p.variables, coeffs)
        if form.coeffs not in seen:
            seen.add(form.coeffs)
            candidates.append(form)

    for i in range(nvars):
        if all(e[i] > 0 for e in p.terms):
            unit = [Fraction(0)] * nvars
            unit[i] = Fraction(1)
            push(unit)
    for i, j in itertools.combinations(range(nvars), 2):
        slice_terms: dict[int, Fraction] = {}
        ok = True
        degrees = set()
        for exps, coeff in p.terms.items():
            if any(e > 0 for k, e in enumerate(exps) if k not in (i, j)):
                continue
            degrees.add(exps[i] + exps[j])
            slice_terms[exps[i]] = slice_terms.get(exps[i], Fraction(0)) + coeff
            if slice_terms[exps[i]] == 0:
                del slice_terms[exps[i]]
        if not slice_terms or len(degrees) > 1:
            # mixed-degree slices come from inhomogeneous input; roots of
            # the homogeneous pieces would still only be candidates, so
            # only handle the single-degree case here
            ok = len(degrees) <= 1
        if slice_terms and ok:
            for root in _binary_form_root_candidates(slice_terms, max(degrees)):
                coeffs = [Fraction(0)] * nvars
                coeffs[i] = Fraction(1)
                coeffs[j] = -root
                push(coeffs)
    return candidates


class RatFn:
    """A reduced rational function num/den.

    Reduction extracts rational content, cancels shared linear-form
    factors of the denominator (found via divide_linear) and finally
    attempts exact division of the numerator by the leftover denominator.
    Denominators in this package are products of powers of linear forms,
    for which this is a complete reduction; the denominator is normalized
    to leading coefficient 1 under grlex.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None, _reduced: bool = False):
        if den is None:
            den = Poly.one(num.variables)
        if num.variables != den.variables:
            raise ValueError("numerator and denominator live in different rings")
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if not _reduced:
            num, den = _reduce(num, den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RatFn is immutable")

    @classmethod
    def from_poly(cls, p: Poly) -> "RatFn":
        return cls(p)

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "RatFn":
        return cls(Poly.zero(variables))

    @classmethod
    def one(cls, variables: Sequence[str]) -> "RatFn":
        return cls(Poly.one(variables))

    @classmethod
    def constant(cls, variables: Sequence[str], value) -> "RatFn":
        return cls(Poly.constant(variables, value))

    @property
    def variables(self) -> tuple[str, ...]:
        return self.num.variables

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_poly(self) -> Poly:
        if not self.is_polynomial():
            raise ValueError("rational function has a nontrivial denominator")
        return self.num * (Fraction(1) / self.den.constant_value())

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("not a constant")
        if self.num.is_zero():
            return Fraction(0)
        return self.num.constant_value() / self.den.constant_value()

    def homogeneous_degree(self) -> int | None:
        if self.is_zero():
            return None
        nd = self.num.homogeneous_degree()
        dd = self.den.homogeneous_degree()
        if nd is None or dd is None:
            return None
        return nd - dd

    def __add__(self, other):
        other = _coerce(other, self.variables)
        if other is NotImplemented:
            return NotImplemented
        return RatFn(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFn(-self.num, self.den, _reduced=True)

    def __sub__(self, other):
        other = _coerce(other, self.variables)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce(other, self.variables)
        if other is NotImplemented:
            return NotImplemented
        return RatFn(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other, self.variables)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RatFn(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = _coerce(other, self.variables)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            raise ValueError("rational function powers must be integers")
        if exponent < 0:
            if self.is_zero():
                raise ZeroDivisionError("negative power of zero")
            return RatFn(self.den**-exponent, self.num**-exponent)
        return RatFn(self.num**exponent, self.den**exponent, _reduced=True)

    def __eq__(self, other):
        other = _coerce(other, self.variables)
        if other is NotImplemented:
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        return hash((self.num, self.den))

    def derivative(self, var: str) -> "RatFn":
        dn = self.num.derivative(var)
        if self.is_polynomial():
            return RatFn(dn, self.den, _reduced=True)
        dd = self.den.derivative(var)
        return RatFn(dn * self.den - self.num * dd, self.den * self.den)

    def substitute(self, replacements: Mapping[str, Poly]) -> "RatFn":
        return RatFn(self.num.substitute(replacements), self.den.substitute(replacements))

    def __repr__(self):
        from .expressions import ratfn_to_string

        return f"RatFn({ratfn_to_string(self)!r})"


def _coerce(value, variables) -> "RatFn":
    if isinstance(value, RatFn):
        if value.variables != variables:
            raise ValueError("variable mismatch between rational functions")
        return value
    if isinstance(value, Poly):
        if value.variables != variables:
            raise ValueError("variable mismatch between rational functions")
        return RatFn(value)
    if isinstance(value, (int, Fraction)):
        return RatFn.constant(variables, value)
    return NotImplemented


def _reduce(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    if num.is_zero():
        return num, Poly.one(num.variables)
    for alpha in linear_factor_candidates(den):
        _, k = divide_linear(den, alpha)
        if k == 0:
            continue
        _, m = divide_linear(num, alpha)
        cancel = min(k, m)
        if cancel:
            alpha_pow = alpha.to_poly() ** cancel
            num, _ = num.divmod_single(alpha_pow)
            den, _ = den.divmod_single(alpha_pow)
    if not den.is_constant():
        quotient, rem = num.divmod_single(den)
        if rem.is_zero():
            num, den = quotient, Poly.one(num.variables)
    _, lead_c = den.leading()
    if lead_c != 1:
        scale = Fraction(1) / lead_c
        num = num * scale
        den = den * scale
    return num, den


def pole_order(r: RatFn, alpha: LinForm) -> int:
    """Multiplicity of alpha in the denominator minus that in the numerator.

    Positive values mean r has a pole along alpha = 0.  The zero function
    is rejected; callers treat it as regular everywhere.
    """
    if r.is_zero():
        raise ValueError("pole order of the zero function is undefined")
    _, k_den = divide_linear(r.den, alpha)
    _, k_num = divide_linear(r.num, alpha)
    return k_den - k_num
