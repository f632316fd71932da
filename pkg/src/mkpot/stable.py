"""Stability analysis of constant real 3-forms in six dimensions.

A 3-form rho is stable when its GL(6)-orbit is open; the sign of the quartic
invariant lambda separates the two open orbits.  For lambda < 0 the form
induces an almost complex structure J = K/sqrt(-lambda) and a dual form
rho_hat with rho + i rho_hat decomposable into complex 1-forms.

The endomorphism is built as K(v) = A(iota_v rho ^ rho) with A the canonical
identification of 5-forms with vectors against the volume form; lambda is
normalized as tr(K^2)/6 (any positive rescaling would only rescale lambda,
and the toolkit relies on its sign and quartic homogeneity).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt, sqrt

import numpy as np

from .blades import DIM, FULL_MASK, all_blades, contraction_sign, indices_from_mask, mask_from_indices
from .forms import (
    ComplexForm,
    Form,
    Multivector,
    interior_product,
    transform_constant_form,
    wedge,
    wedge_complex,
)

STABLE_NEGATIVE = "stable_negative"
STABLE_POSITIVE = "stable_positive"
UNSTABLE = "unstable"

# Sign s in rho_hat(X, Y, Z) = s * rho(JX, Y, Z), calibrated once so that the
# dual of the standard rho0 is exactly sigma0 (the frame identity).
DUAL_SIGN = 1


def _require_constant(rho: Form) -> dict[int, Fraction]:
    out = {}
    for mask, c in rho.coeffs.items():
        if not isinstance(c, Fraction):
            raise ValueError("stability analysis needs constant coefficients")
        out[mask] = c
    return out


def k_endomorphism(rho: Form) -> tuple[tuple[Fraction, ...], ...]:
    """Matrix K with K(e_i) = A(iota_{e_i} rho ^ rho); trace-free, quadratic
    in rho.  The volume factor of A is stripped (vol coefficient is one)."""
    if rho.degree != 3:
        raise ValueError("k_endomorphism needs a 3-form")
    _require_constant(rho)
    cols: list[list[Fraction]] = []
    for i in range(1, DIM + 1):
        mu = wedge(interior_product(Multivector.basis_vector(i), rho), rho)
        col = [Fraction(0)] * DIM
        for mask, c in mu.coeffs.items():
            # mu = iota_X vol  <=>  X^m = mu[complement of m] * sign
            m = next(iter(indices_from_mask(FULL_MASK & ~mask)))
            col[m - 1] = c * contraction_sign(m, FULL_MASK)
        cols.append(col)
    return tuple(tuple(cols[i][m] for i in range(DIM)) for m in range(DIM))


def hitchin_lambda(rho: Form) -> Fraction:
    """Quartic invariant lambda(rho) = tr(K^2)/6; lambda(c rho) = c^4 lambda."""
    K = k_endomorphism(rho)
    tr = sum(
        (K[i][j] * K[j][i] for i in range(DIM) for j in range(DIM)),
        Fraction(0),
    )
    return tr / 6


def _fraction_sqrt(value: Fraction) -> Fraction | None:
    """Exact square root of a non-negative Fraction, or None."""
    if value < 0:
        return None
    num, den = value.numerator, value.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


@dataclass
class StableAnalysis:
    """Result of the Hitchin analysis of a constant 3-form."""

    lam: Fraction
    K: tuple[tuple[Fraction, ...], ...]
    verdict: str
    exact: bool
    J: list[list] | None = None
    dual: Form | None = None

    @property
    def J_array(self) -> np.ndarray | None:
        if self.J is None:
            return None
        return np.array([[float(x) for x in row] for row in self.J])


def analyze_stable(rho: Form) -> StableAnalysis:
    """Full stability analysis: lambda, verdict, and for the negative orbit
    the almost complex structure J = K/sqrt(-lambda) and the dual form.

    J and the dual are exact whenever sqrt(-lambda) is rational (which holds
    for every integer GL-transform of the standard pair); otherwise they are
    computed in double precision and ``exact`` is False.
    """
    coeffs = _require_constant(rho)
    K = k_endomorphism(rho)
    lam = hitchin_lambda(rho)
    if lam > 0:
        return StableAnalysis(lam, K, STABLE_POSITIVE, exact=True)
    if lam == 0:
        return StableAnalysis(lam, K, UNSTABLE, exact=True)

    root = _fraction_sqrt(-lam)
    if root is not None:
        inv = 1 / root
        J = [[K[i][j] * inv for j in range(DIM)] for i in range(DIM)]
        exact = True
    else:
        invf = 1.0 / sqrt(float(-lam))
        J = [[float(K[i][j]) * invf for j in range(DIM)] for i in range(DIM)]
        exact = False

    dual_coeffs: dict[int, object] = {}
    for mask in all_blades(3):
        i, j, k = indices_from_mask(mask)
        total = Fraction(0) if exact else 0.0
        for m in range(1, DIM + 1):
            jmi = J[m - 1][i - 1]
            if not jmi:
                continue
            val = _eval_constant(coeffs, m, j, k)
            if val:
                total = total + jmi * val
        total = DUAL_SIGN * total
        if total:
            dual_coeffs[mask] = total if exact else Fraction(total).limit_denominator(10**15)
    dual = Form(3, dual_coeffs)
    return StableAnalysis(lam, K, STABLE_NEGATIVE, exact=exact, J=J, dual=dual)


def _eval_constant(coeffs: dict[int, Fraction], a: int, b: int, c: int) -> Fraction:
    """rho(e_a, e_b, e_c) for distinct or repeated indices."""
    if len({a, b, c}) < 3:
        return Fraction(0)
    seq = (a, b, c)
    mask = mask_from_indices(sorted(seq))
    base = coeffs.get(mask, Fraction(0))
    if not base:
        return base
    sign = 1
    lst = list(seq)
    for i in range(3):
        for j in range(i + 1, 3):
            if lst[i] > lst[j]:
                sign = -sign
    return base * sign


def complex_onehalf_forms(analysis: StableAnalysis) -> list[ComplexForm]:
    """Frame theta^j = dx^j + i (dx^j o J) annihilating rho + i dual under the
    wedge (the J sign of the analysis makes this the holomorphic slot)."""
    if analysis.J is None:
        raise ValueError("analysis carries no complex structure")
    thetas = []
    for j in range(1, DIM + 1):
        re = Form(1, {1 << (j - 1): Fraction(1)})
        im_coeffs = {}
        for m in range(1, DIM + 1):
            val = analysis.J[j - 1][m - 1]
            if val:
                v = val if isinstance(val, Fraction) else Fraction(val).limit_denominator(10**15)
                im_coeffs[1 << (m - 1)] = v
        thetas.append(ComplexForm(re, Form(1, im_coeffs)))
    return thetas


def decomposability_residual(rho: Form, analysis: StableAnalysis) -> float:
    """Max coefficient of (rho + i dual) ^ theta^j over the (1,0)-frame;
    exactly zero for exact analyses of genuinely stable forms."""
    if analysis.dual is None:
        return float("nan")
    omega = ComplexForm(rho, analysis.dual)
    worst = 0.0
    for theta in complex_onehalf_forms(analysis):
        prod = wedge_complex(omega, theta)
        for part in (prod.re, prod.im):
            for c in part.coeffs.values():
                worst = max(worst, abs(float(c)))
    return worst


def random_stable_form(rng, spread: int = 2) -> tuple[Form, Fraction]:
    """Random GL(6,Z)-pushforward of rho0 (guaranteed lambda < 0): returns the
    form and det(g)."""
    from .forms import standard_structures

    _, rho0, _, _ = standard_structures()
    while True:
        g = [[Fraction(rng.randint(-spread, spread)) for _ in range(DIM)] for _ in range(DIM)]
        det = _det6(g)
        if det:
            return transform_constant_form(g, rho0), det


def _det6(g) -> Fraction:
    from .forms import _det

    return _det([list(row) for row in g])
