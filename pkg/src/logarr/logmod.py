"""Membership, Saito certification, graded pieces and duality pairings
for the generalized logarithmic module of a signed multiarrangement.

A vector field theta = sum_i t_i d/dx_i belongs to the module of an
arrangement with multiplicity m and inner product G when

  (i)   Q_minus * t_i is a polynomial for every i,
  (ii)  alpha^m(H) divides Q_minus * theta(alpha) for every H with
        m(H) > 0, and
  (iii) for every H with m(H) < 0, writing g = G^{-1} t for the 1-form
        side and alpha = sum a_i x_i, every minor g_i a_j - g_j a_i has
        pole order <= 0 along alpha.

All three condition families are linear over the rationals in the
numerator coefficients of theta, which is what the graded solver uses.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

from . import linalg
from .arrangement import InnerProduct, SignedMulti
from .poly import LinForm, Poly, RatFn, divide_linear, pole_order


class LogVectorField:
    """theta = sum_i t_i d/dx_i with rational-function coefficients."""

    __slots__ = ("variables", "coeffs")

    def __init__(self, variables: Sequence[str], coeffs: Sequence[RatFn]):
        variables = tuple(variables)
        coeffs = tuple(coeffs)
        if len(coeffs) != len(variables):
            raise ValueError("need one coefficient per variable")
        for c in coeffs:
            if c.variables != variables:
                raise ValueError("coefficient variables do not match the field's")
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("LogVectorField is immutable")

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "LogVectorField":
        return cls(variables, [RatFn.zero(variables) for _ in variables])

    @classmethod
    def euler(cls, variables: Sequence[str]) -> "LogVectorField":
        return cls(variables, [RatFn(Poly.variable(variables, v)) for v in variables])

    @classmethod
    def from_polys(cls, polys: Sequence[Poly]) -> "LogVectorField":
        return cls(polys[0].variables, [RatFn(p) for p in polys])

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def homogeneous_degree(self) -> int | None:
        """Common degree of the nonzero coefficients; None if zero or mixed."""
        degrees = {c.homogeneous_degree() for c in self.coeffs if not c.is_zero()}
        if len(degrees) != 1:
            return None
        d = degrees.pop()
        return d

    def apply(self, p) -> RatFn:
        """theta(p) = sum_i t_i dp/dx_i for a polynomial or rational p."""
        if isinstance(p, Poly):
            p = RatFn(p)
        if p.variables != self.variables:
            raise ValueError("variable mismatch")
        total = RatFn.zero(self.variables)
        for t, v in zip(self.coeffs, self.variables):
            if not t.is_zero():
                total = total + t * p.derivative(v)
        return total

    def __add__(self, other):
        if not isinstance(other, LogVectorField):
            return NotImplemented
        return LogVectorField(self.variables, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        if not isinstance(other, LogVectorField):
            return NotImplemented
        return LogVectorField(self.variables, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return LogVectorField(self.variables, [-c for c in self.coeffs])

    def scaled(self, factor) -> "LogVectorField":
        return LogVectorField(self.variables, [c * factor for c in self.coeffs])

    def __eq__(self, other):
        if not isinstance(other, LogVectorField):
            return NotImplemented
        return self.variables == other.variables and all(a == b for a, b in zip(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash((self.variables, self.coeffs))

    def __repr__(self):
        from .expressions import field_to_string

        return f"LogVectorField({field_to_string(self.coeffs, self.variables)!r})"


def to_form(theta: LogVectorField, inner: InnerProduct) -> LogVectorField:
    """Coefficients of the 1-form identified with theta: g = G^{-1} t."""
    inv = inner.inverse()
    return LogVectorField(theta.variables, linalg.mat_vec(inv, theta.coeffs))


def from_form(omega: LogVectorField, inner: InnerProduct) -> LogVectorField:
    """Vector field identified with the 1-form coefficients g: t = G g."""
    return LogVectorField(omega.variables, linalg.mat_vec(inner.matrix, omega.coeffs))


@dataclass(frozen=True)
class MembershipViolation:
    hyperplane: LinForm | None
    kind: str  # "denominator" | "plus-divisibility" | "minus-regularity"
    witness: RatFn


@dataclass(frozen=True)
class MembershipReport:
    member: bool
    violations: tuple[MembershipViolation, ...]


def is_member(theta: LogVectorField, arrangement: SignedMulti, inner: InnerProduct | None = None) -> MembershipReport:
    """Three-condition membership test; non-membership is a report, not an error."""
    if theta.variables != arrangement.variables:
        raise ValueError("field and arrangement use different variables")
    if inner is None:
        inner = InnerProduct.identity(arrangement.dimension)
    if theta.is_zero():
        return MembershipReport(member=True, violations=())

    violations: list[MembershipViolation] = []
    q_minus = RatFn(arrangement.q_minus())

    for t in theta.coeffs:
        cleared = t * q_minus
        if not cleared.is_polynomial():
            culprit = None
            for form, _ in arrangement.hyperplanes:
                if divide_linear(cleared.den, form)[1] > 0:
                    culprit = form
                    break
            violations.append(MembershipViolation(culprit, "denominator", cleared))

    for form, mult in arrangement.a_plus():
        value = theta.apply(form.to_poly())
        if value.is_zero():
            continue
        witness = value * q_minus / RatFn(form.to_poly() ** mult)
        if not witness.is_polynomial():
            violations.append(MembershipViolation(form, "plus-divisibility", witness))

    g = to_form(theta, inner).coeffs
    for form, mult in arrangement.a_minus():
        a = form.coeffs
        for i, j in itertools.combinations(range(len(a)), 2):
            minor = g[i] * a[j] - g[j] * a[i]
            if minor.is_zero():
                continue
            if pole_order(minor, form) > 0:
                violations.append(MembershipViolation(form, "minus-regularity", minor))
                break

    return MembershipReport(member=not violations, violations=tuple(violations))


def omega_module_member(omega: LogVectorField, arrangement: SignedMulti, inner: InnerProduct | None = None) -> MembershipReport:
    """Membership of 1-form coefficients in the form-side module of (A, m).

    Through the inner-product identification this is membership of the
    associated vector field G*g for the negated multiplicity.
    """
    if inner is None:
        inner = InnerProduct.identity(arrangement.dimension)
    return is_member(from_form(omega, inner), arrangement.negate(), inner)


# ---- Saito certification -------------------------------------------------


@dataclass(frozen=True)
class BasisCertificate:
    """Outcome of basis certification or bounded basis search.

    kind is "free", "not_free" or "inconclusive".  Free certificates
    carry the basis, ascending exponents and the nonzero scalar relating
    the coefficient determinant to the defining function.  NotFree
    certificates carry (degree, new-generator-count) evidence; the
    minimal generator count exceeding the rank is a sound witness.
    """

    kind: str
    basis: tuple[LogVectorField, ...] | None = None
    exponents: tuple[int, ...] | None = None
    scalar: Fraction | None = None
    generator_evidence: tuple[tuple[int, int], ...] | None = None
    generator_count: int | None = None
    max_degree_scanned: int | None = None


@dataclass(frozen=True)
class SaitoResult:
    accepted: bool
    determinant: RatFn | None
    reason: str | None
    membership: tuple[MembershipReport, ...]
    certificate: BasisCertificate | None


def saito_matrix(thetas: Sequence[LogVectorField]) -> list[list[RatFn]]:
    """Matrix whose (i, j) entry is theta_j(x_i)."""
    if not thetas:
        raise ValueError("no fields given")
    n = len(thetas[0].variables)
    if len(thetas) != n:
        raise ValueError(f"need exactly {n} fields, got {len(thetas)}")
    return [[theta.coeffs[i] for theta in thetas] for i in range(n)]


def saito_check(thetas: Sequence[LogVectorField], arrangement: SignedMulti, inner: InnerProduct | None = None) -> SaitoResult:
    """Certify a tuple as a free basis via the determinant criterion.

    Every field is checked for membership; the tuple is accepted exactly
    when the reduced determinant is a nonzero rational multiple of
    Q_plus / Q_minus.
    """
    if inner is None:
        inner = InnerProduct.identity(arrangement.dimension)
    if len(thetas) != arrangement.dimension:
        raise ValueError(f"need exactly {arrangement.dimension} fields, got {len(thetas)}")
    reports = tuple(is_member(t, arrangement, inner) for t in thetas)
    if not all(r.member for r in reports):
        bad = [i for i, r in enumerate(reports) if not r.member]
        return SaitoResult(False, None, f"fields {bad} are not members", reports, None)

    det = linalg.det_ratfn(saito_matrix(thetas))
    if det.is_zero():
        return SaitoResult(False, det, "determinant is zero (fields are dependent)", reports, None)
    target = RatFn(arrangement.q_plus(), arrangement.q_minus())
    ratio = det / target
    if not ratio.is_constant():
        return SaitoResult(False, det, "determinant is not a constant multiple of the defining function", reports, None)
    scalar = ratio.constant_value()

    degrees = [t.homogeneous_degree() for t in thetas]
    exponents = tuple(sorted(degrees)) if all(d is not None for d in degrees) else None
    certificate = BasisCertificate(
        kind="free",
        basis=tuple(thetas),
        exponents=exponents,
        scalar=scalar,
    )
    return SaitoResult(True, det, None, reports, certificate)


def degree_criterion(thetas: Sequence[LogVectorField], arrangement: SignedMulti, inner: InnerProduct | None = None) -> bool:
    """Independence plus degree sum equal to |m|, for homogeneous members."""
    if len(thetas) != arrangement.dimension:
        raise ValueError(f"need exactly {arrangement.dimension} fields, got {len(thetas)}")
    degrees = []
    for t in thetas:
        d = t.homogeneous_degree()
        if d is None:
            raise ValueError("degree criterion needs homogeneous nonzero fields")
        degrees.append(d)
    det = linalg.det_ratfn(saito_matrix(thetas))
    return (not det.is_zero()) and sum(degrees) == arrangement.m_abs()


# ---- graded pieces -------------------------------------------------------


def monomial_exponents(nvars: int, degree: int) -> list[tuple[int, ...]]:
    """All exponent tuples of the given total degree, in a fixed order."""
    if degree < 0:
        return []
    result = []
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        exps = [0] * nvars
        for i in combo:
            exps[i] += 1
        result.append(tuple(exps))
    result.sort()
    return result


def graded_dimension_free(exponents: Iterable[int], nvars: int, degree: int) -> int:
    """Hilbert count of a free module: sum_i dim S_{degree - e_i}."""
    total = 0
    for e in exponents:
        k = degree - e
        if k >= 0:
            total += comb(k + nvars - 1, nvars - 1)
    return total


class _AlphaExpansion:
    """z-adic expansion data of monomials along a linear form alpha.

    With pivot variable x_p (coefficient 1), substituting
    x_p = z - sum_{i != p} a_i x_i writes any monomial as a polynomial in
    z whose coefficients live in the pivot-free subring;
    alpha^k divides p exactly when the z-coefficients below k vanish.
    """

    def __init__(self, alpha: LinForm):
        self.alpha = alpha
        self.pivot = alpha.pivot
        variables = alpha.variables
        rest = [-c for c in alpha.coeffs]
        rest[self.pivot] = Fraction(0)
        self.rest_poly = Poly.from_linear(variables, rest)
        self._rest_powers: dict[int, Poly] = {0: Poly.one(variables)}
        self._cache: dict[tuple[int, ...], dict[int, Poly]] = {}

    def _rest_power(self, k: int) -> Poly:
        if k not in self._rest_powers:
            self._rest_powers[k] = self._rest_power(k - 1) * self.rest_poly
        return self._rest_powers[k]

    def of_monomial(self, exps: tuple[int, ...]) -> dict[int, Poly]:
        cached = self._cache.get(exps)
        if cached is not None:
            return cached
        ep = exps[self.pivot]
        base = list(exps)
        base[self.pivot] = 0
        base_poly = Poly.monomial(self.alpha.variables, tuple(base))
        expansion = {}
        for k in range(ep + 1):
            expansion[k] = base_poly * self._rest_power(ep - k) * comb(ep, k)
        self._cache[exps] = expansion
        return expansion


def _membership_rows(arrangement: SignedMulti, inner: InnerProduct, mus: list[tuple[int, ...]]):
    """Linear conditions on the numerator coefficients (f_1 .. f_l), where
    t_i = f_i / Q_minus and each f_i is spanned by the monomials in mus.
    Unknown (i, k) sits at column i * len(mus) + k.
    """
    nvars = arrangement.dimension
    n_mono = len(mus)
    inv = inner.inverse()
    rows: dict[tuple, dict[int, Fraction]] = {}
    for form, mult in arrangement.hyperplanes:
        if mult == 0:
            continue
        expansion = _AlphaExpansion(form)
        a = form.coeffs
        if mult > 0:
            combos = [(("plus",), a)]
            bound = mult
        else:
            combos = []
            bound = -mult
            for i, j in itertools.combinations(range(nvars), 2):
                cvec = tuple(inv[i][r] * a[j] - inv[j][r] * a[i] for r in range(nvars))
                if any(c != 0 for c in cvec):
                    combos.append((("minor", i, j), cvec))
        for combo_id, cvec in combos:
            for i, ci in enumerate(cvec):
                if ci == 0:
                    continue
                for m_idx, mu in enumerate(mus):
                    col = i * n_mono + m_idx
                    parts = expansion.of_monomial(mu)
                    for k in range(min(bound, mu[expansion.pivot] + 1)):
                        for nu, coef in parts[k].terms.items():
                            key = (form, combo_id, k, nu)
                            row = rows.setdefault(key, {})
                            row[col] = row.get(col, Fraction(0)) + ci * coef
    matrix = []
    for row in rows.values():
        if row:
            dense = [Fraction(0)] * (nvars * n_mono)
            for col, v in row.items():
                dense[col] = v
            matrix.append(dense)
    return matrix


def _field_from_coeff_vector(arrangement: SignedMulti, mus: list[tuple[int, ...]], vec: Sequence[Fraction]) -> LogVectorField:
    nvars = arrangement.dimension
    n_mono = len(mus)
    q_minus = arrangement.q_minus()
    coeffs = []
    for i in range(nvars):
        terms = {}
        for m_idx, mu in enumerate(mus):
            v = vec[i * n_mono + m_idx]
            if v != 0:
                terms[mu] = v
        coeffs.append(RatFn(Poly(arrangement.variables, terms), q_minus))
    return LogVectorField(arrangement.variables, coeffs)


def _numerator_vector(field: LogVectorField, arrangement: SignedMulti, mus: list[tuple[int, ...]], multiplier: Poly | None = None) -> list[Fraction]:
    """Coefficient vector of (Q_minus * t_i * multiplier) on the monomials mus."""
    q_minus = RatFn(arrangement.q_minus())
    n_mono = len(mus)
    index = {mu: k for k, mu in enumerate(mus)}
    vec = [Fraction(0)] * (len(field.coeffs) * n_mono)
    for i, t in enumerate(field.coeffs):
        f = t * q_minus
        poly = f.as_poly()
        if multiplier is not None:
            poly = poly * multiplier
        for exps, coef in poly.terms.items():
            vec[i * n_mono + index[exps]] = coef
    return vec


def graded_piece(arrangement: SignedMulti, inner: InnerProduct | None, degree: int) -> list[LogVectorField]:
    """A vector-space basis of the homogeneous members of the given degree.

    Brute-force oracle: with t_i = f_i / Q_minus and f_i unknown
    homogeneous of degree `degree + deg Q_minus`, the membership
    conditions are an exact linear system; its kernel is returned.
    """
    if inner is None:
        inner = InnerProduct.identity(arrangement.dimension)
    e = degree + _deg_or_zero(arrangement.q_minus())
    if e < 0:
        return []
    mus = monomial_exponents(arrangement.dimension, e)
    matrix = _membership_rows(arrangement, inner, mus)
    kernel = linalg.nullspace(matrix, arrangement.dimension * len(mus))
    return [_field_from_coeff_vector(arrangement, mus, vec) for vec in kernel]


def _deg_or_zero(p: Poly) -> int:
    return 0 if p.is_zero() or p.is_constant() else p.total_degree()


def find_basis(arrangement: SignedMulti, inner: InnerProduct | None, max_degree: int) -> BasisCertificate:
    """Bounded minimal-generator scan with a three-valued verdict.

    Scans degrees from -deg Q_minus upward, tracking minimal generators
    as complements of the span of earlier generators inside each graded
    piece.  More than `dim` minimal generators certifies NotFree (a
    rank-l reflexive module generated by l elements would be free);
    exactly `dim` generators passing the determinant criterion gives
    Free; otherwise the scan is Inconclusive at max_degree.
    """
    if inner is None:
        inner = InnerProduct.identity(arrangement.dimension)
    nvars = arrangement.dimension
    deg_qm = _deg_or_zero(arrangement.q_minus())
    start = -deg_qm
    if max_degree < start:
        raise ValueError(f"max_degree must be at least {start}")

    generators: list[tuple[LogVectorField, int]] = []
    evidence: list[tuple[int, int]] = []
    for d in range(start, max_degree + 1):
        e = d + deg_qm
        mus = monomial_exponents(nvars, e)
        matrix = _membership_rows(arrangement, inner, mus)
        kernel = linalg.nullspace(matrix, nvars * len(mus))
        if not kernel:
            continue
        span = linalg.RowSpace(nvars * len(mus))
        for gen, gen_deg in generators:
            for mu in monomial_exponents(nvars, d - gen_deg):
                multiplier = Poly.monomial(arrangement.variables, mu)
                span.add(_numerator_vector(gen, arrangement, mus, multiplier))
        added = 0
        for vec in kernel:
            if span.add(vec):
                generators.append((_field_from_coeff_vector(arrangement, mus, vec), d))
                added += 1
        if added:
            evidence.append((d, added))
        if len(generators) > nvars:
            return BasisCertificate(
                kind="not_free",
                generator_evidence=tuple(evidence),
                generator_count=len(generators),
                max_degree_scanned=d,
            )
        if len(generators) == nvars and sum(deg for _, deg in generators) == arrangement.m_abs():
            candidate = [gen for gen, _ in generators]
            outcome = saito_check(candidate, arrangement, inner)
            if outcome.accepted:
                cert = outcome.certificate
                return BasisCertificate(
                    kind="free",
                    basis=cert.basis,
                    exponents=cert.exponents,
                    scalar=cert.scalar,
                    generator_evidence=tuple(evidence),
                    generator_count=len(generators),
                    max_degree_scanned=d,
                )
    return BasisCertificate(
        kind="inconclusive",
        generator_evidence=tuple(evidence),
        generator_count=len(generators),
        max_degree_scanned=max_degree,
    )


# ---- duality pairing -----------------------------------------------------


class PairingError(ValueError):
    """Pairing precondition failure; carries the offending witness."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


def pairing(theta: LogVectorField, omega: LogVectorField, arrangement: SignedMulti | None = None, inner: InnerProduct | None = None) -> Poly:
    """<theta, omega> = sum_i t_i u_i, which is a polynomial whenever theta
    and omega are members for m and -m respectively.

    When an arrangement is supplied both memberships are verified first.
    A non-polynomial product is reported as an error carrying the
    offending value, since it proves a precondition was violated.
    """
    if theta.variables != omega.variables:
        raise ValueError("fields live in different rings")
    if arrangement is not None:
        if not is_member(theta, arrangement, inner).member:
            raise PairingError("first field is not a member for the given multiplicity")
        if not is_member(omega, arrangement.negate(), inner).member:
            raise PairingError("second field is not a member for the negated multiplicity")
    total = RatFn.zero(theta.variables)
    for t, u in zip(theta.coeffs, omega.coeffs):
        total = total + t * u
    if not total.is_polynomial():
        raise PairingError("pairing is not a polynomial; a membership precondition fails", witness=total)
    return total.as_poly()
