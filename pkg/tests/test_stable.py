"""Hitchin layer: the endomorphism, the quartic invariant, duality."""

from fractions import Fraction

import numpy as np
import pytest

from mkpot.forms import ComplexForm, Form, standard_structures, transform_constant_form, wedge_complex
from mkpot.stable import (
    STABLE_NEGATIVE,
    STABLE_POSITIVE,
    UNSTABLE,
    analyze_stable,
    decomposability_residual,
    hitchin_lambda,
    k_endomorphism,
    random_stable_form,
)

S, RHO0, SIGMA0, OMEGA0 = standard_structures()


def test_k_endomorphism_zero():
    K = k_endomorphism(Form.zero(3))
    assert all(x == 0 for row in K for x in row)


def test_k_endomorphism_rho0_squares_to_lambda():
    K = k_endomorphism(RHO0)
    lam = hitchin_lambda(RHO0)
    assert lam == Fraction(-4)
    K2 = [[sum(K[i][m] * K[m][j] for m in range(6)) for j in range(6)] for i in range(6)]
    for i in range(6):
        for j in range(6):
            assert K2[i][j] == (lam if i == j else 0)


def test_k_trace_free(rng):
    for _ in range(10):
        f, _det = random_stable_form(rng)
        K = k_endomorphism(f)
        assert sum(K[i][i] for i in range(6)) == 0


def test_decomposable_is_null():
    K = k_endomorphism(Form.blade((1, 3, 5)))
    K2 = [[sum(K[i][m] * K[m][j] for m in range(6)) for j in range(6)] for i in range(6)]
    assert all(x == 0 for row in K2 for x in row)
    assert hitchin_lambda(Form.blade((1, 3, 5))) == 0


def test_lambda_quartic_homogeneity():
    assert hitchin_lambda(RHO0.scale(Fraction(2))) == 16 * hitchin_lambda(RHO0)


def test_lambda_orbit_signs():
    assert hitchin_lambda(RHO0) < 0
    assert hitchin_lambda(Form.blade((1, 2, 3)) + Form.blade((4, 5, 6))) > 0


def test_lambda_gl_equivariance(rng):
    # det-1 shears leave lambda fixed; a det-2 map scales it by det^2 = 4
    base = hitchin_lambda(RHO0)
    for _ in range(10):
        g = [[Fraction(1 if i == j else 0) for j in range(6)] for i in range(6)]
        i, j = rng.sample(range(6), 2)
        g[i][j] = Fraction(rng.randint(-3, 3))
        assert hitchin_lambda(transform_constant_form(g, RHO0)) == base
    g2 = [[Fraction(2 if i == j == 0 else (1 if i == j else 0)) for j in range(6)]
          for i in range(6)]
    assert hitchin_lambda(transform_constant_form(g2, RHO0)) == 4 * base


def test_analyze_verdicts():
    assert analyze_stable(RHO0).verdict == STABLE_NEGATIVE
    assert analyze_stable(Form.blade((1, 2, 3)) + Form.blade((4, 5, 6))).verdict == STABLE_POSITIVE
    a = analyze_stable(Form.blade((1, 3, 5)))
    assert a.verdict == UNSTABLE
    assert a.J is None and a.dual is None


def test_duality_frame_identities():
    a = analyze_stable(RHO0)
    assert a.exact
    assert a.dual == SIGMA0
    b = analyze_stable(SIGMA0)
    assert b.dual == -RHO0


def test_duality_scales():
    a = analyze_stable(RHO0)
    c = analyze_stable(RHO0.scale(Fraction(2)))
    assert c.dual == SIGMA0.scale(Fraction(2))
    assert c.J == a.J


def test_j_squares_to_minus_identity_on_random_family(rng):
    for _ in range(20):
        f, _det = random_stable_form(rng)
        a = analyze_stable(f)
        assert a.verdict == STABLE_NEGATIVE
        J = a.J_array
        assert np.abs(J @ J + np.eye(6)).max() <= 1e-10


def test_dual_of_dual_negates(rng):
    for _ in range(20):
        f, _det = random_stable_form(rng)
        a = analyze_stable(f)
        b = analyze_stable(a.dual)
        diff = b.dual - (-f)
        worst = max((abs(float(c)) for c in diff.coeffs.values()), default=0.0)
        assert worst <= 1e-9


def test_decomposability_wedge_identities(rng):
    for _ in range(20):
        f, _det = random_stable_form(rng)
        a = analyze_stable(f)
        omega = ComplexForm(f, a.dual)
        square = wedge_complex(omega, omega)
        worst = 0.0
        for part in (square.re, square.im):
            for c in part.coeffs.values():
                worst = max(worst, abs(float(c)))
        assert worst <= 1e-9
        assert decomposability_residual(f, a) <= 1e-9


def test_analyze_requires_constant_coefficients():
    from mkpot.scalars import PolyScalar

    bad = Form(3, {0b111: PolyScalar.variable(1)})
    with pytest.raises(ValueError):
        analyze_stable(bad)
