"""Reflection groups, basic invariants, the primitive derivation and the
degree-shift map on logarithmic modules of Coxeter arrangements.

The primitive derivation is normalized so that applying it to the top
invariant gives +1 (it is unique up to scalars, so this is a choice; the
classical display for type B2 differs from ours by a sign).  Everything
downstream is computed from that normalization, so telescoping and the
shift certificates are sign-consistent by construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linalg
from .arrangement import CoxeterSection, InnerProduct, SignedMulti, SpecError
from .expressions import ParseError, parse_poly
from .logmod import LogVectorField, SaitoResult, monomial_exponents, saito_check
from .poly import LinForm, Poly, RatFn, divide_linear

Matrix = tuple[tuple[Fraction, ...], ...]


class CoxeterError(ValueError):
    pass


def _identity_matrix(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def _mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n))
        for i in range(n)
    )


def reflection_matrix(root: LinForm, inner: InnerProduct) -> Matrix:
    """The reflection fixing root = 0, acting on covector coefficients:
    s(b) = b - 2 I*(b, root)/I*(root, root) * root.
    """
    a = root.coeffs
    n = len(a)
    ga = [sum(inner.matrix[i][j] * a[j] for j in range(n)) for i in range(n)]
    norm = sum(a[i] * ga[i] for i in range(n))
    if norm == 0:
        raise CoxeterError("root has zero length for this inner product")
    return tuple(
        tuple(Fraction(int(i == j)) - 2 * a[i] * ga[j] / norm for j in range(n))
        for i in range(n)
    )


def generate_group(roots: Sequence[LinForm], inner: InnerProduct, max_elements: int = 4096) -> list[Matrix]:
    """Close the set of root reflections under multiplication.

    Raises when the closure exceeds max_elements, which means the input
    is not a root system for this inner product.
    """
    if not roots:
        raise CoxeterError("no roots given")
    generators = [reflection_matrix(r, inner) for r in roots]
    n = len(roots[0].coeffs)
    seen: set[Matrix] = {_identity_matrix(n)}
    frontier = list(seen)
    while frontier:
        new_frontier = []
        for m in frontier:
            for g in generators:
                prod = _mat_mul(g, m)
                if prod not in seen:
                    seen.add(prod)
                    new_frontier.append(prod)
                    if len(seen) > max_elements:
                        raise CoxeterError(f"group closure exceeded {max_elements} elements; roots do not generate a finite group")
        frontier = new_frontier
    return sorted(seen)


def act_on_poly(matrix: Matrix, p: Poly) -> Poly:
    """Substitute x_i -> sum_j matrix[j][i] x_j (covector action)."""
    replacements = {}
    for i, name in enumerate(p.variables):
        coeffs = [matrix[j][i] for j in range(len(p.variables))]
        replacements[name] = Poly.from_linear(p.variables, coeffs)
    return p.substitute(replacements)


def act_on_ratfn(matrix: Matrix, r: RatFn) -> RatFn:
    return RatFn(act_on_poly(matrix, r.num), act_on_poly(matrix, r.den))


def act_on_field(matrix: Matrix, theta: LogVectorField) -> LogVectorField:
    """(w . theta)(f) = w(theta(w^{-1} f)), as fields on coordinates."""
    n = len(theta.variables)
    inverse = tuple(tuple(row) for row in linalg.invert_fraction(matrix))
    coeffs = []
    for i in range(n):
        combo = RatFn.zero(theta.variables)
        for j in range(n):
            if inverse[j][i] != 0:
                combo = combo + theta.coeffs[j] * inverse[j][i]
        coeffs.append(act_on_ratfn(matrix, combo))
    return LogVectorField(theta.variables, coeffs)


def reynolds(theta: LogVectorField, group: Sequence[Matrix]) -> LogVectorField:
    """Group average: the projection onto invariant fields."""
    total = LogVectorField.zero(theta.variables)
    for m in group:
        total = total + act_on_field(m, theta)
    return total.scaled(Fraction(1, len(group)))


def invariant_field_basis(group: Sequence[Matrix], variables: Sequence[str], degree: int) -> list[LogVectorField]:
    """Basis of the invariant polynomial fields homogeneous of `degree`."""
    variables = tuple(variables)
    nvars = len(variables)
    mus = monomial_exponents(nvars, degree)
    index = {mu: k for k, mu in enumerate(mus)}
    ncols = nvars * len(mus)
    space = linalg.RowSpace(ncols)
    basis = []
    for i in range(nvars):
        for mu in mus:
            seed = [RatFn.zero(variables) for _ in range(nvars)]
            seed[i] = RatFn(Poly.monomial(variables, mu))
            projected = reynolds(LogVectorField(variables, seed), group)
            if projected.is_zero():
                continue
            vec = [Fraction(0)] * ncols
            for ci, coeff in enumerate(projected.coeffs):
                poly = coeff.as_poly()
                for exps, value in poly.terms.items():
                    vec[ci * len(mus) + index[exps]] = value
            if space.add(vec):
                basis.append(projected)
    return basis


def elementary_symmetric(variables: Sequence[str], k: int) -> Poly:
    variables = tuple(variables)
    terms = {}
    for combo in itertools.combinations(range(len(variables)), k):
        exps = [0] * len(variables)
        for i in combo:
            exps[i] = 1
        terms[tuple(exps)] = Fraction(1)
    return Poly(variables, terms)


@dataclass(frozen=True)
class CoxeterData:
    """A reflection group with its arrangement, invariants and Coxeter number."""

    arrangement: SignedMulti  # all multiplicities +1
    inner: InnerProduct
    group: tuple[Matrix, ...]
    invariants: tuple[Poly, ...]
    h: int


def make_coxeter_data(roots: Sequence[LinForm], invariants: Sequence[Poly], inner: InnerProduct | None = None) -> CoxeterData:
    """Build and validate Coxeter data from roots and basic invariants.

    Checks: the reflections close to a finite group preserving the inner
    product; every invariant really is invariant; the invariant degrees
    increase to h with a unique top degree; and the Jacobian determinant
    of the invariants is a nonzero scalar multiple of the product of the
    hyperplane forms (algebraic independence).
    """
    if not roots:
        raise CoxeterError("no roots")
    variables = roots[0].variables
    nvars = len(variables)
    if inner is None:
        inner = InnerProduct.identity(nvars)
    if len(invariants) != nvars:
        raise CoxeterError(f"need {nvars} basic invariants, got {len(invariants)}")

    group = generate_group(roots, inner)
    for m in group:
        mt_g_m = _mat_mul(_mat_mul(_transpose(m), inner.matrix), m)
        if mt_g_m != tuple(tuple(row) for row in inner.matrix):
            raise CoxeterError("group element does not preserve the inner product")

    unique_forms = []
    for r in roots:
        if r not in unique_forms:
            unique_forms.append(r)
    arrangement = SignedMulti(variables, [(f, 1) for f in unique_forms])

    degrees = []
    for p in invariants:
        d = p.homogeneous_degree()
        if d is None or d < 1:
            raise CoxeterError("basic invariants must be nonzero homogeneous of positive degree")
        degrees.append(d)
    if degrees != sorted(degrees):
        raise CoxeterError("list basic invariants by ascending degree")
    if nvars >= 2 and degrees[-2] >= degrees[-1]:
        raise CoxeterError("the top invariant degree must be unique")
    h = degrees[-1]

    for p in invariants:
        for m in group:
            if act_on_poly(m, p) != p:
                raise CoxeterError("an alleged invariant is not fixed by the group")

    jac = jacobian_matrix(invariants, variables)
    det = linalg.det_poly(jac)
    if det.is_zero():
        raise CoxeterError("invariants are algebraically dependent (singular Jacobian)")
    product = Poly.one(variables)
    for f, _ in arrangement.hyperplanes:
        product = product * f.to_poly()
    quotient, remainder = det.divmod_single(product)
    if not remainder.is_zero() or not quotient.is_constant() or quotient.constant_value() == 0:
        raise CoxeterError("Jacobian determinant is not a scalar multiple of the product of the forms")

    return CoxeterData(
        arrangement=arrangement,
        inner=inner,
        group=tuple(group),
        invariants=tuple(invariants),
        h=h,
    )


def _transpose(m: Matrix) -> Matrix:
    n = len(m)
    return tuple(tuple(m[j][i] for j in range(n)) for i in range(n))


def jacobian_matrix(invariants: Sequence[Poly], variables: Sequence[str]) -> list[list[Poly]]:
    """Row j is the gradient of the j-th invariant."""
    return [[p.derivative(v) for v in variables] for p in invariants]


_BUILTIN_SPECS = {
    "a2": {
        "variables": ("x1", "x2", "x3"),
        "roots": [(1, -1, 0), (1, 0, -1), (0, 1, -1)],
        "invariant_exprs": None,  # elementary symmetric
    },
    "b2": {
        "variables": ("x", "y"),
        "roots": [(1, 0), (0, 1), (1, -1), (1, 1)],
        "invariant_exprs": ["(x^2 + y^2)/2", "(x^4 + y^4)/4"],
    },
    "a3": {
        "variables": ("x1", "x2", "x3", "x4"),
        "roots": [(1, -1, 0, 0), (1, 0, -1, 0), (1, 0, 0, -1), (0, 1, -1, 0), (0, 1, 0, -1), (0, 0, 1, -1)],
        "invariant_exprs": None,
    },
}


def builtin_coxeter(name: str) -> CoxeterData:
    """Built-in types: A2 and A3 (braid coordinates, elementary symmetric
    invariants including the degree-1 one) and B2 with the classical
    invariant pair ((x^2+y^2)/2, (x^4+y^4)/4).
    """
    key = name.lower().replace("_", "")
    if key not in _BUILTIN_SPECS:
        raise CoxeterError(f"unknown built-in Coxeter type {name!r} (have: {', '.join(sorted(_BUILTIN_SPECS))})")
    spec = _BUILTIN_SPECS[key]
    variables = spec["variables"]
    roots = [LinForm(variables, coeffs) for coeffs in spec["roots"]]
    if spec["invariant_exprs"] is None:
        invariants = [elementary_symmetric(variables, k) for k in range(1, len(variables) + 1)]
    else:
        invariants = [parse_poly(expr, variables) for expr in spec["invariant_exprs"]]
    return make_coxeter_data(roots, invariants)


def coxeter_from_section(section: CoxeterSection, variables: Sequence[str], inner: InnerProduct) -> CoxeterData:
    """Resolve a [coxeter] spec-file section against the file's variables."""
    if section.type_name is not None:
        data = builtin_coxeter(section.type_name)
        if data.arrangement.variables != tuple(variables):
            raise SpecError(
                f"built-in type {section.type_name!r} uses variables {data.arrangement.variables}, the spec file declares {tuple(variables)}"
            )
        if not inner.is_identity():
            data = make_coxeter_data([f for f, _ in data.arrangement.hyperplanes], list(data.invariants), inner)
        return data
    try:
        roots = [LinForm.from_poly(parse_poly(expr, variables)) for expr in section.roots]
        invariants = [parse_poly(expr, variables) for expr in section.invariants]
    except (ParseError, ValueError) as exc:
        raise SpecError(f"bad [coxeter] section: {exc}") from None
    return make_coxeter_data(roots, invariants, inner)


# ---- primitive derivation and the connection ------------------------------


def primitive_derivation(data: CoxeterData) -> LogVectorField:
    """The rational field D with D(P_j) = 0 for j < l and D(P_l) = 1,
    computed from the last column of the inverse Jacobian of the
    invariants (Cramer cofactors over the exact determinant).
    """
    variables = data.arrangement.variables
    n = len(variables)
    jac = jacobian_matrix(data.invariants, variables)
    det = linalg.det_poly(jac)
    if det.is_zero():
        raise CoxeterError("singular Jacobian")
    coeffs = []
    for i in range(n):
        minor_rows = [row[:i] + row[i + 1 :] for row in jac[:-1]]
        if minor_rows:
            minor = linalg.det_poly(minor_rows)
        else:
            minor = Poly.one(variables)
        sign = 1 if (n - 1 + i) % 2 == 0 else -1
        coeffs.append(RatFn(minor * sign, det))
    field = LogVectorField(variables, coeffs)
    for j, p in enumerate(data.invariants):
        expected = Fraction(int(j == n - 1))
        if field.apply(p) != RatFn.constant(variables, expected):
            raise CoxeterError("primitive derivation normalization failed; invariants are inconsistent")
    return field


def nabla(theta: LogVectorField, phi: LogVectorField) -> LogVectorField:
    """The affine connection: apply theta to each coefficient of phi."""
    if theta.variables != phi.variables:
        raise ValueError("variable mismatch")
    return LogVectorField(theta.variables, [theta.apply(c) for c in phi.coeffs])


@dataclass(frozen=True)
class EkField:
    """The k-fold antiderivative of the Euler field along the primitive
    derivation: an invariant polynomial field of degree k*h + 1 whose
    value on each form is exactly divisible by that form to order 2k+1.
    """

    k: int
    field: LogVectorField


def ek(data: CoxeterData, k: int) -> EkField:
    """Solve nabla_D E_j = E_{j-1} over the invariant ansatz, j = 1 .. k.

    The solution must exist and be unique in the invariant fields of
    degree j*h + 1; anything else flags inconsistent invariant data (for
    instance non-essential presentations, where the averaging direction
    makes the connection non-injective) and raises.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    variables = data.arrangement.variables
    current = LogVectorField.euler(variables)
    if k == 0:
        return EkField(0, current)
    d_field = primitive_derivation(data)
    clear = Poly.one(variables)
    for f, _ in data.arrangement.hyperplanes:
        clear = clear * f.to_poly()
    for j in range(1, k + 1):
        degree = j * data.h + 1
        ansatz = invariant_field_basis(data.group, variables, degree)
        if not ansatz:
            raise CoxeterError(f"no invariant fields of degree {degree}")
        # equations are multiplied through by the product of the forms, so
        # their monomials have degree (j-1)h + 1 + |A|
        eq_degree = (j - 1) * data.h + 1 + clear.total_degree()
        target_mus = monomial_exponents(len(variables), eq_degree)
        index = {mu: idx for idx, mu in enumerate(target_mus)}
        nrows = len(variables) * len(target_mus)
        matrix = [[Fraction(0)] * len(ansatz) for _ in range(nrows)]
        rhs = [Fraction(0)] * nrows

        def _cleared_coeffs(field_value):
            for ci, coeff in enumerate(field_value.coeffs):
                cleared = coeff * clear
                if not cleared.is_polynomial():
                    raise CoxeterError("connection image has poles outside the arrangement")
                for exps, value in cleared.as_poly().terms.items():
                    yield ci * len(target_mus) + index[exps], value

        for b, basis_field in enumerate(ansatz):
            image = nabla(d_field, basis_field)
            for row, value in _cleared_coeffs(image):
                matrix[row][b] += value
        for row, value in _cleared_coeffs(current):
            rhs[row] += value

        solved = linalg.solve(matrix, rhs)
        if solved is None:
            raise CoxeterError(f"no invariant antiderivative at k={j}")
        solution, kernel = solved
        if kernel:
            raise CoxeterError(f"antiderivative at k={j} is not unique over the invariant ansatz")
        result = LogVectorField.zero(variables)
        for c, basis_field in zip(solution, ansatz):
            if c != 0:
                result = result + basis_field.scaled(c)
        _verify_ek(data, j, result)
        current = result
    return EkField(k, current)


def _verify_ek(data: CoxeterData, k: int, field: LogVectorField):
    degree = field.homogeneous_degree()
    if degree != k * data.h + 1:
        raise CoxeterError(f"antiderivative at k={k} has degree {degree}, expected {k * data.h + 1}")
    for f, _ in data.arrangement.hyperplanes:
        value = field.apply(f.to_poly())
        if not value.is_polynomial():
            raise CoxeterError("antiderivative is not a polynomial field")
        p = value.as_poly()
        if p.is_zero():
            raise CoxeterError("antiderivative vanishes on a form")
        _, mult = divide_linear(p, f)
        if mult != 2 * k + 1:
            raise CoxeterError(f"antiderivative value on a form is divisible to order {mult}, expected exactly {2 * k + 1}")


def phi(theta: LogVectorField, e: EkField) -> LogVectorField:
    """The degree-shift map: theta -> nabla_theta E_k (raises degree by k*h)."""
    return nabla(theta, e.field)


def shifted_arrangement(data: CoxeterData, signed: SignedMulti, k: int) -> SignedMulti:
    """The Coxeter arrangement with multiplicity 2k + m on every form,
    where m comes from `signed` (forms missing there count as 0).
    """
    def mult_of(form: LinForm) -> int:
        for f, m in signed.hyperplanes:
            if f == form:
                return m
        return 0

    return SignedMulti(
        data.arrangement.variables,
        [(f, 2 * k + mult_of(f)) for f, _ in data.arrangement.hyperplanes],
    )


def shift_verify(data: CoxeterData, signed: SignedMulti, k: int, basis: Sequence[LogVectorField]) -> SaitoResult:
    """Push a certified basis through the shift map and re-certify it for
    the multiplicity 2k + m (all positive, so the classical module).
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if signed.variables != data.arrangement.variables:
        raise CoxeterError("multiplicity arrangement uses different variables")
    known_forms = {f for f, _ in data.arrangement.hyperplanes}
    for f, m in signed.hyperplanes:
        if f not in known_forms:
            raise CoxeterError("multiplicity assigns a form outside the Coxeter arrangement")
        if m not in (-1, 0, 1):
            raise CoxeterError("shift requires multiplicities in {-1, 0, +1}")
    before = saito_check(basis, signed, data.inner)
    if not before.accepted:
        raise CoxeterError(f"input fields are not a certified basis: {before.reason}")
    e = ek(data, k)
    images = [nabla(theta, e.field) for theta in basis]
    target = shifted_arrangement(data, signed, k)
    return saito_check(images, target, data.inner)
