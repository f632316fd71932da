"""Exterior core: structure constants, wedge, interior product, pairing, star.

[DERIVED] expectations are computed by independent test-local oracles
(shuffle-sum evaluation, brute-force determinant expansion) before being
asserted against the library path.
"""

from fractions import Fraction
from itertools import combinations

import pytest

from mkpot.blades import all_blades, indices_from_mask
from mkpot.forms import (
    DegreeError,
    Form,
    Multivector,
    evaluate_on_vectors,
    interior_product,
    poisson_pairing,
    standard_structures,
    symplectic_star,
    transform_constant_form,
    wedge,
)
from mkpot.scalars import PolyScalar
from mkpot.verify import random_form

S, RHO0, SIGMA0, OMEGA0 = standard_structures()


def _perm_parity(seq):
    s = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                s = -s
    return s


def brute_force_wedge_eval(forms, vectors):
    """(a1 ^ ... ^ am)(v_1..v_k) via the full shuffle sum; independent oracle."""
    degs = [f.degree for f in forms]
    k = sum(degs)
    assert len(vectors) == k
    total = Fraction(0)
    indices = list(range(k))

    def blocks(rest, degs):
        if not degs:
            yield []
            return
        for first in combinations(rest, degs[0]):
            remaining = [i for i in rest if i not in first]
            for tail in blocks(remaining, degs[1:]):
                yield [list(first)] + tail

    for split in blocks(indices, degs):
        flat = [i for block in split for i in block]
        sign = _perm_parity(flat)
        term = Fraction(sign)
        for f, block in zip(forms, split):
            term *= evaluate_on_vectors(f, [vectors[i] for i in block])
        total += term
    return total


# ---------------------------------------------------------------------------
# standard structures
# ---------------------------------------------------------------------------

def test_rho0_coefficients():
    assert RHO0.coeff((1, 3, 5)) == 1
    assert RHO0.coeff((2, 4, 5)) == -1
    assert RHO0.coeff((1, 4, 6)) == -1
    assert RHO0.coeff((2, 3, 6)) == -1
    assert len(RHO0.coeffs) == 4


def test_sigma0_coefficients():
    assert SIGMA0.coeff((2, 3, 5)) == 1
    assert SIGMA0.coeff((1, 4, 5)) == 1
    assert SIGMA0.coeff((1, 3, 6)) == 1
    assert SIGMA0.coeff((2, 4, 6)) == -1
    assert len(SIGMA0.coeffs) == 4


def test_omega0_is_complex_product_expansion():
    # (dx1 + i dx2) ^ (dx3 + i dx4) ^ (dx5 + i dx6) expanded term by term
    re = Form.zero(3)
    im = Form.zero(3)
    for bits in range(8):
        factors = []
        i_count = 0
        for block, bit in enumerate((1, 2, 4)):
            if bits & bit:
                factors.append(Form.blade((2 * block + 2,)))
                i_count += 1
            else:
                factors.append(Form.blade((2 * block + 1,)))
        prod = wedge(wedge(factors[0], factors[1]), factors[2])
        phase = i_count % 4
        if phase == 0:
            re = re + prod
        elif phase == 1:
            im = im + prod
        elif phase == 2:
            re = re - prod
        else:
            im = im - prod
    assert re == RHO0
    assert im == SIGMA0
    assert OMEGA0.re == RHO0 and OMEGA0.im == SIGMA0


def test_symplectic_structure_invariants():
    # Pi inverse relation is enforced by the dataclass; vol must be the unit blade
    assert S.vol == Form.blade((1, 2, 3, 4, 5, 6))
    assert S.omega.coeff((1, 2)) == 1
    assert S.omega.coeff((3, 4)) == 1
    assert S.omega.coeff((5, 6)) == 1


# ---------------------------------------------------------------------------
# wedge
# ---------------------------------------------------------------------------

def test_wedge_simple():
    assert wedge(Form.blade((1,)), Form.blade((2,))) == Form.blade((1, 2))


def test_omega_cubed_by_brute_force_expansion():
    # independent 27-term expansion of the cube
    blocks = [Form.blade((1, 2)), Form.blade((3, 4)), Form.blade((5, 6))]
    total = Form.zero(6)
    for a in blocks:
        for b in blocks:
            for c in blocks:
                try:
                    total = total + wedge(wedge(a, b), c)
                except DegreeError:
                    raise
    assert total == S.vol.scale(Fraction(6))
    assert wedge(wedge(S.omega, S.omega), S.omega) == S.vol.scale(Fraction(6))


def test_rho_wedge_sigma_regression_constant():
    # oracle: full shuffle evaluation on the standard frame
    frame = [[Fraction(1 if r == c else 0) for r in range(6)] for c in range(6)]
    c = brute_force_wedge_eval([RHO0, SIGMA0], frame)
    assert c == 4  # frozen regression constant
    assert wedge(RHO0, SIGMA0) == S.vol.scale(c)
    # cross-check: Omega0 ^ conj(Omega0) = -2i c vol
    from mkpot.forms import wedge_complex

    prod = wedge_complex(OMEGA0, OMEGA0.conjugate())
    assert prod.re.is_zero()
    assert prod.im == S.vol.scale(-2 * c)


def test_wedge_degree_overflow():
    with pytest.raises(DegreeError):
        wedge(S.vol, Form.blade((1,)))


def test_wedge_graded_commutative_and_associative(rng):
    for _ in range(30):
        ka, kb = rng.randint(0, 3), rng.randint(0, 3)
        kc = rng.randint(0, 6 - ka - kb)
        a, b, c = random_form(rng, ka), random_form(rng, kb), random_form(rng, kc)
        assert wedge(a, b) == wedge(b, a).scale(Fraction(-1) ** (ka * kb))
        assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))


# ---------------------------------------------------------------------------
# interior product
# ---------------------------------------------------------------------------

def test_interior_single_vector():
    out = interior_product(Multivector.basis_vector(1), Form.blade((1, 2)))
    assert out == Form.blade((2,))


def test_interior_full_contraction_examples():
    e135 = Multivector.from_vectors([[1, 0, 0, 0, 0, 0],
                                     [0, 0, 1, 0, 0, 0],
                                     [0, 0, 0, 0, 1, 0]])
    assert interior_product(e135, RHO0) == Form.scalar(1)
    e245 = Multivector.from_vectors([[0, 1, 0, 0, 0, 0],
                                     [0, 0, 0, 1, 0, 0],
                                     [0, 0, 0, 0, 1, 0]])
    assert interior_product(e245, RHO0) == Form.scalar(-1)


def test_interior_degree_mismatch():
    mv = Multivector.from_vectors([[1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0]])
    with pytest.raises(DegreeError):
        interior_product(mv, Form.blade((3,)))


def test_interior_leibniz_degree_one(rng):
    # iota_v(a ^ b) = (iota_v a) ^ b + (-1)^deg(a) a ^ (iota_v b)
    for _ in range(20):
        ka, kb = rng.randint(1, 2), rng.randint(1, 2)
        a, b = random_form(rng, ka), random_form(rng, kb)
        v = Multivector.basis_vector(rng.randint(1, 6))
        lhs = interior_product(v, wedge(a, b))
        rhs = wedge(interior_product(v, a), b) + wedge(a, interior_product(v, b)).scale(
            Fraction(-1) ** ka)
        assert lhs == rhs


def test_evaluate_on_vectors_matches_pluecker(rng):
    for _ in range(10):
        vecs = [[Fraction(rng.randint(-2, 2)) for _ in range(6)] for _ in range(3)]
        direct = evaluate_on_vectors(RHO0, vecs)
        mv = Multivector.from_vectors(vecs)
        assert interior_product(mv, RHO0) == Form.scalar(direct)


# ---------------------------------------------------------------------------
# poisson pairing
# ---------------------------------------------------------------------------

def test_pairing_degree_one_reads_pi():
    val = poisson_pairing(S, Form.blade((1,)), Form.blade((2,)))
    assert val == S.pi[0][1] == Fraction(-1)


def test_pairing_degree_zero_is_multiplication():
    f = Form.scalar(PolyScalar.variable(1))
    g = Form.scalar(PolyScalar.variable(2))
    assert poisson_pairing(S, f, g) == PolyScalar.variable(1) * PolyScalar.variable(2)
    # and star(1) = vol is forced by that convention
    assert symplectic_star(S, Form.scalar(1)) == S.vol


def test_pairing_omega_omega_brute_force():
    # oracle: explicit 2x2 determinant expansion over the blade pairs
    def det2_pairing(ma, mb):
        ia, ib = indices_from_mask(ma), indices_from_mask(mb)
        m = [[S.pi[i - 1][j - 1] for j in ib] for i in ia]
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]

    expected = Fraction(0)
    for ma, ca in S.omega.coeffs.items():
        for mb, cb in S.omega.coeffs.items():
            expected += ca * cb * det2_pairing(ma, mb)
    assert expected == 3
    assert poisson_pairing(S, S.omega, S.omega) == 3


def test_pairing_degree_mismatch():
    with pytest.raises(DegreeError):
        poisson_pairing(S, Form.blade((1,)), Form.blade((1, 2)))


def test_pairing_antisymmetric_odd_degree(rng):
    for _ in range(10):
        a, b = random_form(rng, 3), random_form(rng, 3)
        assert poisson_pairing(S, a, b) == -(poisson_pairing(S, b, a))


# ---------------------------------------------------------------------------
# symplectic star
# ---------------------------------------------------------------------------

def test_star_examples():
    assert symplectic_star(S, Form.scalar(1)) == S.vol
    assert symplectic_star(S, S.vol) == Form.scalar(1)
    half_sq = wedge(S.omega, S.omega).scale(Fraction(1, 2))
    assert symplectic_star(S, S.omega) == half_sq


def test_star_involution_all_blades():
    for k in range(7):
        for mask in all_blades(k):
            f = Form(k, {mask: Fraction(1)})
            assert symplectic_star(S, symplectic_star(S, f)) == f


def test_star_involution_random_forms(rng):
    for k in range(7):
        for _ in range(50):
            f = random_form(rng, k)
            assert symplectic_star(S, symplectic_star(S, f)) == f


def test_star_defining_identity_all_blade_pairs():
    for k in range(7):
        for ma in all_blades(k):
            alpha = Form(k, {ma: Fraction(1)})
            for mb in all_blades(k):
                beta = Form(k, {mb: Fraction(1)})
                lhs = wedge(alpha, symplectic_star(S, beta))
                assert lhs == S.vol.scale(poisson_pairing(S, alpha, beta))


def test_star_primitive_three_forms_fixed():
    # the stable pair is primitive (omega ^ rho = 0) and star-invariant
    assert wedge(S.omega, RHO0).is_zero()
    assert symplectic_star(S, RHO0) == RHO0
    assert symplectic_star(S, SIGMA0) == SIGMA0


# ---------------------------------------------------------------------------
# constant/polynomial embedding and transforms
# ---------------------------------------------------------------------------

def test_embedding_commutes_with_operations(rng):
    for _ in range(10):
        kk = rng.randint(0, 3)
        const = Form(kk, {m: Fraction(rng.randint(-3, 3)) for m in
                          rng.sample(all_blades(kk), min(3, len(all_blades(kk))))})
        lifted = const.map_coeffs(lambda c: PolyScalar.const(c))
        assert lifted == const  # constants are demoted at construction
        other = random_form(rng, rng.randint(0, 6 - kk))
        assert wedge(const, other) == wedge(lifted, other)
        assert symplectic_star(S, const) == symplectic_star(S, lifted)


def test_transform_constant_form_determinant_character():
    g = [[2 if i == j else 0 for j in range(6)] for i in range(6)]
    assert transform_constant_form(g, S.vol) == S.vol.scale(Fraction(64))
    shear = [[1 if i == j else 0 for j in range(6)] for i in range(6)]
    shear[0][1] = 3
    moved = transform_constant_form(shear, S.vol)
    assert moved == S.vol
