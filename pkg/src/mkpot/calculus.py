"""Differential operators d, d^c, d^s and the potential operator dd^s(phi tau)
on exact forms and on periodic grid forms.

Normalization note.  The star-conjugated codifferential implemented here is

    d^s := (1/2) (-1)^k  star d star      (k = input degree)

The raw composite (-1)^(k+1) star d star satisfies the same operator identities
((d^s)^2 = 0, d d^s = -d^s d, degree -1, kills constants) for any nonzero
multiple; the factor -1/2 is the unique normalization reproducing the flat
model identity dd^s(phi Omega0) = 3i Omega0 for phi = sum (x^i)^2, which this
toolkit treats as the defining calibration.  The commutator oracle below is
normalized compatibly and related to d^s by a per-degree sign only.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .blades import DIM, all_blades, indices_from_mask, wedge_sign
from .forms import (
    ComplexForm,
    DegreeError,
    Form,
    Multivector,
    SymplecticStructure,
    interior_product,
    standard_symplectic,
    symplectic_star,
    wedge,
)
from .scalars import PolyScalar, TrigScalar, scalar_diff

DS_NORMALIZATION = Fraction(-1, 2)


def d(a: Form) -> Form:
    """Exterior derivative.  Top-degree input returns the zero 6-form
    (degree-7 forms do not exist; documented convention, not an error)."""
    if a.degree == DIM:
        return Form.zero(DIM)
    out: dict[int, object] = {}
    for mask, c in a.coeffs.items():
        for i in range(1, DIM + 1):
            dc = scalar_diff(c, i)
            if isinstance(dc, Fraction) and not dc:
                continue
            if hasattr(dc, "is_zero") and dc.is_zero():
                continue
            bit = 1 << (i - 1)
            s = wedge_sign(bit, mask)
            if not s:
                continue
            nm = bit | mask
            term = dc if s > 0 else -dc
            out[nm] = out.get(nm, Fraction(0)) + term
    return Form(a.degree + 1, out)


def d_s_raw(a: Form, s: SymplecticStructure | None = None) -> Form:
    """The unnormalized composite (-1)^(k+1) star d star."""
    s = s or standard_symplectic()
    if a.degree == 0:
        return Form.zero(0)
    sign = 1 if (a.degree + 1) % 2 == 0 else -1
    res = symplectic_star(s, d(symplectic_star(s, a)))
    return res if sign > 0 else -res


def d_s(a, s: SymplecticStructure | None = None):
    """Symplectic codifferential (degree -1); see the module normalization note."""
    if not isinstance(a, Form):
        from . import gridforms

        if isinstance(a, gridforms.GridForm):
            return gridforms.grid_d_s(a, s)
        raise TypeError(f"d_s expects a Form or GridForm, got {type(a).__name__}")
    return d_s_raw(a, s).scale(DS_NORMALIZATION)


def d_any(a):
    """d on either engine (exact Form or GridForm)."""
    if isinstance(a, Form):
        return d(a)
    from . import gridforms

    if isinstance(a, gridforms.GridForm):
        return gridforms.grid_d(a)
    raise TypeError(f"d expects a Form or GridForm, got {type(a).__name__}")


def dd_s(a, s: SymplecticStructure | None = None):
    """The composite d(d^s(a)); anticommutes with the opposite order."""
    return d_any(d_s(a, s))


def dd_s_potential(phi, tau: Form, s: SymplecticStructure | None = None):
    """dd^s(phi tau) for a scalar potential phi and constant-coefficient tau.

    Linear in phi and annihilates affine potentials (second-order operator).
    Grid potentials (degree-0 GridForm) are handled spectrally.
    """
    from . import gridforms

    if isinstance(phi, gridforms.GridForm):
        return gridforms.grid_dd_s_potential(phi, tau, s)
    phi = _as_scalar(phi)
    for c in tau.coeffs.values():
        if not isinstance(c, Fraction):
            raise ValueError("dd_s_potential needs a constant-coefficient tau")
    return dd_s(tau.scale(phi), s)


def dd_s_complex(phi, omega: ComplexForm, s: SymplecticStructure | None = None) -> ComplexForm:
    """dd^s(phi Omega) for a complex combination Omega."""
    return ComplexForm(
        dd_s_potential(phi, omega.re, s), dd_s_potential(phi, omega.im, s)
    )


def _as_scalar(phi):
    if isinstance(phi, Form):
        if phi.degree != 0:
            raise DegreeError("potential must have degree 0")
        return phi.coeffs.get(0, Fraction(0))
    if isinstance(phi, int):
        return Fraction(phi)
    if isinstance(phi, (Fraction, PolyScalar, TrigScalar)):
        return phi
    raise TypeError(f"unsupported potential type {type(phi).__name__}")


# ---------------------------------------------------------------------------
# d^c for the flat complex structure of the Darboux model
# ---------------------------------------------------------------------------
# J0 pairs the Darboux blocks: J0 d/dx^{2a-1} = d/dx^{2a}.  The orientation and
# the 1/2 prefactor are pinned by dd^c(sum (x^i)^2) = 2 omega0 (recorded by the
# flat-example report), equivalently dd^c = i del delbar.

def d_c(phi):
    """d^c phi = -(1/2) d(phi) o J0, a 1-form."""
    from . import gridforms

    if isinstance(phi, gridforms.GridForm):
        return gridforms.grid_d_c(phi)
    phi = _as_scalar(phi)
    half = Fraction(1, 2)
    out: dict[int, object] = {}
    for a in range(1, DIM // 2 + 1):
        u, v = 2 * a - 1, 2 * a
        du = scalar_diff(phi, u)
        dv = scalar_diff(phi, v)
        out[1 << (u - 1)] = -half * dv
        out[1 << (v - 1)] = half * du
    return Form(1, out)


def dd_c(phi):
    """dd^c phi, a 2-form; equals i del delbar phi in complex coordinates."""
    return d_any(d_c(phi))


def dd_c_holomorphic_oracle(phi: PolyScalar) -> tuple[Form, Form]:
    """Independent computation of dd^c phi through complex second derivatives.

    Returns (real part, imaginary part) of i sum_{a,b} phi_{z^a zbar^b}
    dz^a ^ dzbar^b; the imaginary part must vanish for real phi.
    """
    phi = _as_scalar(phi)
    quarter = Fraction(1, 4)
    re = Form.zero(2)
    im = Form.zero(2)

    def one_form(i: int) -> Form:
        return Form(1, {1 << (i - 1): Fraction(1)})

    for a in range(1, 4):
        u, v = 2 * a - 1, 2 * a
        for b in range(1, 4):
            p, q = 2 * b - 1, 2 * b
            A = quarter * (phi.diff(u).diff(p) + phi.diff(v).diff(q))
            B = quarter * (phi.diff(u).diff(q) - phi.diff(v).diff(p))
            C = wedge(one_form(u), one_form(p)) + wedge(one_form(v), one_form(q))
            D = wedge(one_form(v), one_form(p)) - wedge(one_form(u), one_form(q))
            # i (A + iB)(C + iD) = -(AD + BC) + i(AC - BD)
            re = re + D.scale(-A) + C.scale(-B)
            im = im + C.scale(A) + D.scale(-B)
    return re, im


# ---------------------------------------------------------------------------
# commutator oracle for d^s
# ---------------------------------------------------------------------------

def _lambda_contraction(a: Form, s: SymplecticStructure) -> Form:
    """Contraction of a form with the Poisson bivector Pi."""
    total = Form.zero(max(a.degree - 2, 0))
    if a.degree < 2:
        return total
    for i in range(1, DIM + 1):
        for j in range(i + 1, DIM + 1):
            pij = s.pi[i - 1][j - 1]
            if not pij:
                continue
            mv = Multivector(2, {(1 << (i - 1)) | (1 << (j - 1)): Fraction(1)})
            # iota_{e_i} iota_{e_j}: Multivector contraction applies lowest
            # index first, which is iota_{e_i} then iota_{e_j}; flip to match
            # the Lefschetz normalization Lambda(omega0) = 3.
            term = interior_product(mv, a)
            total = total + term.scale(-pij)
    return total


def d_lambda_oracle(a: Form, s: SymplecticStructure | None = None) -> Form:
    """Normalized commutator (1/2)(Lambda d - d Lambda), used only as an
    independent oracle for d^s; the factor matches the d^s normalization so
    the relating constant stays a per-degree sign."""
    s = s or standard_symplectic()
    if a.degree == 0:
        return Form.zero(0)
    half = Fraction(1, 2)
    if a.degree == DIM:  # d kills top degree, so only the second term survives
        lam_d = Form.zero(DIM - 1)
    else:
        lam_d = _lambda_contraction(d(a), s)
    d_lam = d(_lambda_contraction(a, s)) if a.degree >= 2 else Form.zero(a.degree - 1)
    return (lam_d - d_lam).scale(half)


@lru_cache(maxsize=1)
def oracle_signs() -> dict[int, int]:
    """Per-degree sign epsilon with epsilon * oracle = d^s, calibrated once on
    the basis forms x^j e_I and asserted on every blade."""
    s = standard_symplectic()
    signs: dict[int, int] = {}
    for k in range(1, DIM + 1):
        eps = None
        for mask in all_blades(k):
            for j in range(1, DIM + 1):
                base = Form(k, {mask: PolyScalar.variable(j)})
                via_star = d_s(base, s)
                via_comm = d_lambda_oracle(base, s)
                if via_star.is_zero() and via_comm.is_zero():
                    continue
                for cand in (1, -1):
                    if via_comm.scale(Fraction(cand)) == via_star:
                        if eps is None:
                            eps = cand
                        elif eps != cand:
                            raise AssertionError(
                                f"oracle sign not constant across degree {k}"
                            )
                        break
                else:
                    raise AssertionError(
                        f"oracle does not match d^s up to sign on degree {k}, "
                        f"blade {indices_from_mask(mask)}, variable x{j}"
                    )
        signs[k] = eps if eps is not None else 1
    return signs


# ---------------------------------------------------------------------------
# precomputed blade stencils (performance cache + grid backend)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def ds_stencil(degree: int) -> dict[tuple[int, int], tuple[tuple[int, Fraction], ...]]:
    """Sparse stencil of d^s per degree: d^s(f e_I) = sum_j (df/dx^j) C_{jI},
    with C_{jI} = d^s(x^j e_I) constant.  Agrees with the definitional
    star-d-star computation on all basis blades by construction."""
    s = standard_symplectic()
    table: dict[tuple[int, int], tuple[tuple[int, Fraction], ...]] = {}
    for mask in all_blades(degree):
        for j in range(1, DIM + 1):
            res = d_s(Form(degree, {mask: PolyScalar.variable(j)}), s)
            entries = []
            for m, c in res.coeffs.items():
                if not isinstance(c, Fraction):
                    raise AssertionError("d^s stencil must be constant")
                entries.append((m, c))
            if entries:
                table[(j, mask)] = tuple(sorted(entries))
    return table


def apply_ds_stencil(a: Form) -> Form:
    """d^s through the precomputed stencil (exact engine path)."""
    if a.degree == 0:
        return Form.zero(0)
    table = ds_stencil(a.degree)
    out: dict[int, object] = {}
    for mask, c in a.coeffs.items():
        for j in range(1, DIM + 1):
            key = (j, mask)
            if key not in table:
                continue
            dc = scalar_diff(c, j)
            if isinstance(dc, Fraction) and not dc:
                continue
            if hasattr(dc, "is_zero") and dc.is_zero():
                continue
            for m, w in table[key]:
                out[m] = out.get(m, Fraction(0)) + w * dc
    return Form(a.degree - 1, out)
