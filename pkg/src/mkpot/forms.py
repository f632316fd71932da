"""Exterior algebra over R^6 with exact coefficients, the symplectic pairing
and the symplectic Hodge star.

Coefficients of a :class:`Form` are Fractions (constant forms), polynomials or
trigonometric polynomials; constant ring elements are demoted to Fractions at
construction so that the constant/polynomial embedding is the identity on
representations.  The star operator is defined blade-by-blade by solving

    alpha ^ star(beta) = <alpha, beta>_k  omega^3/3!

against the full blade basis, where <.,.>_k is the degree-k extension of the
Poisson matrix (determinant convention on decomposables).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .blades import (
    DIM,
    FULL_MASK,
    all_blades,
    blade_degree,
    complement,
    contraction_sign,
    indices_from_mask,
    mask_from_indices,
    wedge_sign,
)
from .scalars import (
    PolyScalar,
    Scalar,
    TrigScalar,
    normalize_scalar,
    scalar_eval,
    scalar_is_zero,
)


class DegreeError(ValueError):
    """Raised when an operation receives forms of incompatible degree."""


def _blade_key(blade) -> int:
    if isinstance(blade, int):
        return blade
    return mask_from_indices(blade)


class Form:
    """Degree-k differential form with exact scalar coefficients.

    Immutable by convention: no method mutates ``coeffs`` after construction.
    Absent blades mean zero coefficients.
    """

    __slots__ = ("degree", "coeffs")

    def __init__(self, degree: int, coeffs: Mapping | None = None):
        if not 0 <= degree <= DIM:
            raise DegreeError(f"form degree {degree} outside 0..{DIM}")
        clean: dict[int, Scalar] = {}
        if coeffs:
            for blade, c in coeffs.items():
                mask = _blade_key(blade)
                if blade_degree(mask) != degree:
                    raise DegreeError(
                        f"blade {indices_from_mask(mask)} has degree "
                        f"{blade_degree(mask)}, form has degree {degree}"
                    )
                c = normalize_scalar(c)
                if scalar_is_zero(c):
                    continue
                if mask in clean:
                    c = normalize_scalar(clean[mask] + c)
                    if scalar_is_zero(c):
                        del clean[mask]
                        continue
                clean[mask] = c
        self.degree = degree
        self.coeffs = dict(sorted(clean.items()))

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, degree: int) -> "Form":
        return cls(degree, {})

    @classmethod
    def scalar(cls, value) -> "Form":
        return cls(0, {0: value})

    @classmethod
    def blade(cls, indices, coeff=1) -> "Form":
        mask = _blade_key(indices)
        return cls(blade_degree(mask), {mask: Fraction(coeff) if isinstance(coeff, int) else coeff})

    # -- linear structure ----------------------------------------------------
    def __add__(self, other: "Form") -> "Form":
        if not isinstance(other, Form):
            return NotImplemented
        if self.degree != other.degree:
            raise DegreeError("cannot add forms of different degree")
        out = dict(self.coeffs)
        for mask, c in other.coeffs.items():
            out[mask] = out.get(mask, Fraction(0)) + c
        return Form(self.degree, out)

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def __neg__(self) -> "Form":
        return Form(self.degree, {m: -c for m, c in self.coeffs.items()})

    def scale(self, s) -> "Form":
        return Form(self.degree, {m: s * c for m, c in self.coeffs.items()})

    def __rmul__(self, s):
        if isinstance(s, (int, Fraction, PolyScalar, TrigScalar)):
            return self.scale(s)
        return NotImplemented

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        return self.degree == other.degree and (self - other).is_zero()

    def __hash__(self):
        return hash((self.degree, tuple(self.coeffs.items())))

    def coeff(self, blade) -> Scalar:
        return self.coeffs.get(_blade_key(blade), Fraction(0))

    def eval_coeffs(self, point: Sequence) -> dict[int, float]:
        return {m: scalar_eval(c, point) for m, c in self.coeffs.items()}

    def map_coeffs(self, fn) -> "Form":
        return Form(self.degree, {m: fn(c) for m, c in self.coeffs.items()})

    def __repr__(self):
        if not self.coeffs:
            return f"0 (degree {self.degree})"
        parts = []
        for mask, c in self.coeffs.items():
            name = "dx" + "".join(str(i) for i in indices_from_mask(mask)) if mask else "1"
            parts.append(f"({c!r})*{name}")
        return " + ".join(parts)


def wedge(a: Form, b: Form) -> Form:
    """Exterior product; bilinear, associative, graded-commutative."""
    if a.degree + b.degree > DIM:
        raise DegreeError(
            f"wedge degree overflow: {a.degree} + {b.degree} > {DIM}"
        )
    out: dict[int, Scalar] = {}
    for ma, ca in a.coeffs.items():
        for mb, cb in b.coeffs.items():
            s = wedge_sign(ma, mb)
            if not s:
                continue
            mask = ma | mb
            term = ca * cb if s > 0 else -(ca * cb)
            out[mask] = out.get(mask, Fraction(0)) + term
    return Form(a.degree + b.degree, out)


def wedge_all(forms: Iterable[Form]) -> Form:
    result = None
    for f in forms:
        result = f if result is None else wedge(result, f)
    if result is None:
        raise ValueError("empty wedge product")
    return result


# ---------------------------------------------------------------------------
# multivectors and interior products
# ---------------------------------------------------------------------------

class Multivector:
    """Constant alternating multivector, stored blade-wise like a form."""

    __slots__ = ("degree", "coeffs")

    def __init__(self, degree: int, coeffs: Mapping | None = None):
        clean: dict[int, Fraction] = {}
        if coeffs:
            for blade, c in coeffs.items():
                mask = _blade_key(blade)
                if blade_degree(mask) != degree:
                    raise DegreeError("multivector blade of wrong degree")
                c = Fraction(c) if isinstance(c, int) else c
                if c:
                    clean[mask] = clean.get(mask, Fraction(0)) + c
        self.degree = degree
        self.coeffs = {m: c for m, c in sorted(clean.items()) if c}

    @classmethod
    def basis_vector(cls, i: int) -> "Multivector":
        return cls(1, {1 << (i - 1): Fraction(1)})

    @classmethod
    def from_vectors(cls, vectors: Sequence[Sequence]) -> "Multivector":
        """Wedge v_1 ^ ... ^ v_j of coordinate vectors (Pluecker expansion)."""
        j = len(vectors)
        coeffs: dict[int, Fraction] = {}
        for combo in combinations(range(1, DIM + 1), j):
            det = _det([[Fraction(v[i - 1]) for i in combo] for v in vectors])
            if det:
                coeffs[mask_from_indices(combo)] = det
        return cls(j, coeffs)


def _det(matrix: list[list[Fraction]]) -> Fraction:
    n = len(matrix)
    if n == 0:
        return Fraction(1)
    if n == 1:
        return matrix[0][0]
    if n == 2:
        return matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0]
    total = Fraction(0)
    for col in range(n):
        if not matrix[0][col]:
            continue
        minor = [row[:col] + row[col + 1 :] for row in matrix[1:]]
        term = matrix[0][col] * _det(minor)
        total += term if col % 2 == 0 else -term
    return total


def _contract_blade(vmask: int, form: Form) -> Form:
    """Iterated contraction by the blade multivector e_{i1} ^ ... ^ e_{ij},
    applying iota_{e_{i1}} first (lowest index first)."""
    result = form
    for i in indices_from_mask(vmask):
        out: dict[int, Scalar] = {}
        for mask, c in result.coeffs.items():
            s = contraction_sign(i, mask)
            if not s:
                continue
            nm = mask & ~(1 << (i - 1))
            out[nm] = out.get(nm, Fraction(0)) + (c if s > 0 else -c)
        result = Form(result.degree - 1, out)
    return result


def interior_product(v: Multivector, a: Form) -> Form:
    """Contraction of a degree-j multivector into a degree-k form (j <= k).

    For a decomposable 3-vector xi = v1^v2^v3 and a 3-form a this returns the
    scalar a(v1, v2, v3).
    """
    if v.degree > a.degree:
        raise DegreeError(
            f"cannot contract degree-{v.degree} multivector into degree-{a.degree} form"
        )
    total = Form.zero(a.degree - v.degree)
    for vmask, vc in v.coeffs.items():
        total = total + _contract_blade(vmask, a).scale(vc)
    return total


def evaluate_on_vectors(a: Form, vectors: Sequence[Sequence]) -> Scalar:
    """a(v_1, ..., v_k) via full contraction."""
    if len(vectors) != a.degree:
        raise DegreeError("number of vectors must equal the form degree")
    out = interior_product(Multivector.from_vectors(vectors), a)
    return out.coeffs.get(0, Fraction(0))


# ---------------------------------------------------------------------------
# symplectic structure, pairing and star
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymplecticStructure:
    """Standard symplectic data: omega, its inverse matrix Pi and omega^3/3!.

    Pi is pinned by Pi @ omega_matrix = identity, with omega_matrix read off
    from omega in the basis dx^1..dx^6.
    """

    omega: Form
    pi: tuple[tuple[Fraction, ...], ...]
    vol: Form

    def __post_init__(self):
        w = _omega_matrix(self.omega)
        n = DIM
        for i in range(n):
            for j in range(n):
                acc = sum(self.pi[i][k] * w[k][j] for k in range(n))
                expected = Fraction(1) if i == j else Fraction(0)
                if acc != expected:
                    raise ValueError("Pi is not the inverse of the omega matrix")


def _omega_matrix(omega: Form) -> list[list[Fraction]]:
    if omega.degree != 2:
        raise DegreeError("omega must be a 2-form")
    w = [[Fraction(0)] * DIM for _ in range(DIM)]
    for mask, c in omega.coeffs.items():
        if not isinstance(c, Fraction):
            raise ValueError("omega must have constant coefficients")
        i, j = indices_from_mask(mask)
        w[i - 1][j - 1] = c
        w[j - 1][i - 1] = -c
    return w


def _invert(matrix: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(matrix)
    aug = [row[:] + [Fraction(1) if i == j else Fraction(0) for j in range(n)]
           for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col]), None)
        if pivot is None:
            raise ValueError("singular matrix")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def standard_structures() -> tuple[SymplecticStructure, Form, Form, "ComplexForm"]:
    """The Darboux model: omega, the stable pair (rho0, sigma0) and their
    complex combination Omega0 = rho0 + i sigma0."""
    omega = Form(2, {
        mask_from_indices((1, 2)): Fraction(1),
        mask_from_indices((3, 4)): Fraction(1),
        mask_from_indices((5, 6)): Fraction(1),
    })
    w = _omega_matrix(omega)
    pi = tuple(tuple(row) for row in _invert(w))
    vol = Form(6, {FULL_MASK: Fraction(1)})
    structure = SymplecticStructure(omega, pi, vol)

    rho0 = Form(3, {
        mask_from_indices((1, 3, 5)): Fraction(1),
        mask_from_indices((2, 4, 5)): Fraction(-1),
        mask_from_indices((1, 4, 6)): Fraction(-1),
        mask_from_indices((2, 3, 6)): Fraction(-1),
    })
    sigma0 = Form(3, {
        mask_from_indices((2, 3, 5)): Fraction(1),
        mask_from_indices((1, 4, 5)): Fraction(1),
        mask_from_indices((1, 3, 6)): Fraction(1),
        mask_from_indices((2, 4, 6)): Fraction(-1),
    })
    return structure, rho0, sigma0, ComplexForm(rho0, sigma0)


@lru_cache(maxsize=1)
def standard_symplectic() -> SymplecticStructure:
    return standard_structures()[0]


@lru_cache(maxsize=None)
def _pairing_blades(pi: tuple, ma: int, mb: int) -> Fraction:
    """<e_ma, e_mb>_k = det[ Pi(dx^i_a, dx^j_b) ]; degree 0 pairs to 1."""
    ia, ib = indices_from_mask(ma), indices_from_mask(mb)
    if not ia:
        return Fraction(1)
    return _det([[pi[i - 1][j - 1] for j in ib] for i in ia])


def poisson_pairing(s: SymplecticStructure, a: Form, b: Form):
    """Degree-k extension of Pi applied to two k-forms.

    Degree 0 is plain multiplication, so that star(1) = vol.
    """
    if a.degree != b.degree:
        raise DegreeError("poisson pairing needs equal degrees")
    total = None
    for ma, ca in a.coeffs.items():
        for mb, cb in b.coeffs.items():
            p = _pairing_blades(s.pi, ma, mb)
            if not p:
                continue
            term = p * (ca * cb)
            total = term if total is None else total + term
    if total is None:
        return Fraction(0)
    return normalize_scalar(total)


@lru_cache(maxsize=None)
def _star_table(pi: tuple) -> dict[int, tuple[tuple[int, Fraction], ...]]:
    """Blade-wise star: for each blade J the list of (blade M, weight) with
    star(e_J) = sum w_M e_M, solved from the defining identity."""
    table: dict[int, tuple[tuple[int, Fraction], ...]] = {}
    for k in range(DIM + 1):
        for mj in all_blades(k):
            entries = []
            for mi in all_blades(k):
                p = _pairing_blades(pi, mi, mj)
                if not p:
                    continue
                mm = complement(mi)
                s = wedge_sign(mi, mm)
                entries.append((mm, p * s))
            table[mj] = tuple(sorted(entries))
    return table


def symplectic_star(s: SymplecticStructure, a: Form) -> Form:
    """The symplectic Hodge star: the unique (6-k)-form with
    alpha ^ star(a) = <alpha, a>_k omega^3/3! for every k-form alpha.

    An involution: star(star(a)) = a.
    """
    table = _star_table(s.pi)
    out: dict[int, Scalar] = {}
    for mask, c in a.coeffs.items():
        for mm, w in table[mask]:
            out[mm] = out.get(mm, Fraction(0)) + w * c
    return Form(DIM - a.degree, out)


def transform_constant_form(g: Sequence[Sequence], form: Form) -> Form:
    """Pullback of a constant-coefficient form along the linear map g:
    (g*a)(v_1..v_k) = a(g v_1, .., g v_k)."""
    k = form.degree
    g = [[Fraction(x) if isinstance(x, int) else x for x in row] for row in g]
    out: dict[int, Fraction] = {}
    for target in all_blades(k):
        cols = indices_from_mask(target)
        vectors = [[g[r][c - 1] for r in range(DIM)] for c in cols]
        val = evaluate_on_vectors(form, vectors)
        if not isinstance(val, Fraction):
            raise ValueError("transform_constant_form needs constant coefficients")
        if val:
            out[target] = val
    return Form(k, out)


# ---------------------------------------------------------------------------
# complex combinations
# ---------------------------------------------------------------------------

class ComplexForm:
    """Pair (re, im) of equal-degree forms standing for re + i im."""

    __slots__ = ("re", "im")

    def __init__(self, re: Form, im: Form):
        if re.degree != im.degree:
            raise DegreeError("re/im parts must share the degree")
        self.re = re
        self.im = im

    @property
    def degree(self) -> int:
        return self.re.degree

    def __add__(self, other: "ComplexForm") -> "ComplexForm":
        return ComplexForm(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "ComplexForm") -> "ComplexForm":
        return ComplexForm(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "ComplexForm":
        return ComplexForm(-self.re, -self.im)

    def conjugate(self) -> "ComplexForm":
        return ComplexForm(self.re, -self.im)

    def times_i(self) -> "ComplexForm":
        return ComplexForm(-self.im, self.re)

    def times_minus_i(self) -> "ComplexForm":
        return ComplexForm(self.im, -self.re)

    def scale(self, s) -> "ComplexForm":
        return ComplexForm(self.re.scale(s), self.im.scale(s))

    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()

    def __eq__(self, other):
        if not isinstance(other, ComplexForm):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __repr__(self):
        return f"({self.re!r}) + i*({self.im!r})"


def wedge_complex(a: ComplexForm, b: ComplexForm) -> ComplexForm:
    re = wedge(a.re, b.re) - wedge(a.im, b.im)
    im = wedge(a.re, b.im) + wedge(a.im, b.re)
    return ComplexForm(re, im)
