"""Potential map, flat-model report, deformation periods and the classifiers."""

import random
from fractions import Fraction

import pytest

from mkpot.cones import ConeSampleConfig
from mkpot.forms import standard_structures
from mkpot.gridforms import sample_form, sample_scalar
from mkpot.potential import (
    NOT_PSH,
    NOT_SL_PSH,
    PSH,
    SL_PLURIHARMONIC,
    SL_PSH,
    STRICTLY_PSH,
    STRICTLY_SL_PSH,
    classify_psh,
    classify_sl_psh,
    flat_example_check,
    global_mkp_deform,
    mkp_forms,
    squared_norm_potential,
    torus_periods,
)
from mkpot.scalars import PolyScalar, TrigScalar
from mkpot.verify import random_poly

S, RHO0, SIGMA0, OMEGA0 = standard_structures()
AXES6 = (1, 2, 3, 4, 5, 6)


def cfg_with(seed: int, count: int = 1500) -> ConeSampleConfig:
    return ConeSampleConfig(sample_count=count, seed=seed)


# ---------------------------------------------------------------------------
# the potential map
# ---------------------------------------------------------------------------

def test_mkp_flat_potential():
    res = mkp_forms(Fraction(1, 3) * squared_norm_potential())
    assert res.rho_out == RHO0
    assert res.sigma_out == SIGMA0
    assert res.consistent


def test_mkp_affine_maps_to_zero():
    res = mkp_forms(PolyScalar.variable(5) + PolyScalar.const(2))
    assert res.rho_out.is_zero() and res.sigma_out.is_zero()


def test_mkp_grid_matches_exact_trig():
    psi = TrigScalar.cosine((1, 0, 1, 0, 0, 0))
    res_grid = mkp_forms(sample_scalar(psi, AXES6, 4))
    res_exact = mkp_forms(psi)
    diff_r = (res_grid.rho_out - sample_form(res_exact.rho_out, AXES6, 4)).max_abs()
    diff_s = (res_grid.sigma_out - sample_form(res_exact.sigma_out, AXES6, 4)).max_abs()
    assert diff_r <= 1e-10 and diff_s <= 1e-10
    assert res_grid.consistent


def test_mkp_internal_consistency_on_random_potentials(rng):
    for _ in range(100):
        phi = random_poly(rng, max_degree=3, terms=4)
        res = mkp_forms(phi)
        assert res.consistent
        assert res.omega_complex.re == res.rho_out
        assert res.omega_complex.im == res.sigma_out


def test_mkp_linearity(rng):
    for _ in range(20):
        p1, p2 = random_poly(rng), random_poly(rng)
        a, b = Fraction(rng.randint(-3, 3)), Fraction(rng.randint(-3, 3))
        combo = mkp_forms(a * p1 + b * p2)
        split_rho = mkp_forms(p1).rho_out.scale(a) + mkp_forms(p2).rho_out.scale(b)
        assert combo.rho_out == split_rho


# ---------------------------------------------------------------------------
# the global deformation
# ---------------------------------------------------------------------------

def test_deform_identity_at_zero():
    out = global_mkp_deform(PolyScalar.const(0), OMEGA0)
    assert out == OMEGA0


def test_deform_flat_example():
    out = global_mkp_deform(squared_norm_potential(), OMEGA0)
    assert out == OMEGA0.scale(Fraction(4))


def test_deform_preserves_torus_periods():
    psi = TrigScalar.cosine((1, 0, 1, 0, 0, 0), Fraction(1, 10)) + \
        TrigScalar.sine((0, 1, 0, 1, 0, 0), Fraction(1, 7))
    base = torus_periods(OMEGA0)
    moved = torus_periods(global_mkp_deform(psi, OMEGA0))
    assert max(abs(base[k] - moved[k]) for k in base) <= 1e-9


def test_torus_periods_reject_polynomials():
    cubic = PolyScalar.variable(1) * PolyScalar.variable(1) * PolyScalar.variable(1)
    moved = global_mkp_deform(cubic, OMEGA0)  # keeps non-periodic coefficients
    with pytest.raises(ValueError):
        torus_periods(moved)


# ---------------------------------------------------------------------------
# flat-model report
# ---------------------------------------------------------------------------

def test_flat_example_report():
    rep = flat_example_check()
    assert rep.all_ok
    assert rep.dds_identity_ok
    assert rep.ddc_constant == Fraction(2)
    assert rep.ddc_proportional_ok
    d = rep.as_dict()
    assert d["all_ok"] and d["ddc_constant"] == "2"


# ---------------------------------------------------------------------------
# classifiers
# ---------------------------------------------------------------------------

def test_classify_psh_canonical():
    phi = squared_norm_potential()
    assert classify_psh(phi, cfg_with(3)).classification == STRICTLY_PSH
    assert classify_psh(Fraction(-1) * phi, cfg_with(3)).classification == NOT_PSH
    affine = PolyScalar.variable(1) + PolyScalar.const(1)
    assert classify_psh(affine, cfg_with(3)).classification == PSH
    assert classify_psh(Fraction(-1) * affine, cfg_with(3)).classification == PSH


def test_classify_psh_witness_on_failure():
    verdict = classify_psh(Fraction(-1) * squared_norm_potential(), cfg_with(5))
    assert verdict.classification == NOT_PSH
    assert verdict.witness is not None
    assert verdict.witness["value"] < 0


def test_classify_sl_psh_canonical():
    phi = squared_norm_potential()
    assert classify_sl_psh(phi, cfg_with(3)).classification == STRICTLY_SL_PSH
    assert classify_sl_psh(PolyScalar.variable(2), cfg_with(3)).classification == SL_PLURIHARMONIC
    assert classify_sl_psh(Fraction(-1) * phi, cfg_with(3)).classification == NOT_SL_PSH


@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
def test_classifier_seed_stability(seed):
    phi = squared_norm_potential()
    assert classify_psh(phi, cfg_with(seed)).classification == STRICTLY_PSH
    assert classify_sl_psh(phi, cfg_with(seed)).classification == STRICTLY_SL_PSH
    assert classify_sl_psh(Fraction(-1) * phi, cfg_with(seed)).classification == NOT_SL_PSH


def test_affine_shift_keeps_strict_verdict(rng):
    # the operator ignores affine parts, so the verdict is invariant exactly
    phi = squared_norm_potential()
    shifted = phi + 5 * PolyScalar.variable(3) + PolyScalar.const(11)
    from mkpot.calculus import dd_s_potential

    assert dd_s_potential(phi, SIGMA0) == dd_s_potential(shifted, SIGMA0)
    assert classify_sl_psh(shifted, cfg_with(9)).classification == STRICTLY_SL_PSH


def _random_quadratics(count: int, seed: int):
    rng = random.Random(seed)
    out = []
    for trial in range(count):
        kind = trial % 3
        h = [[Fraction(0)] * 6 for _ in range(6)]
        if kind == 0:  # scaled identity: genuinely strictly sl-psh
            c = Fraction(rng.randint(1, 5), rng.randint(1, 3))
            for i in range(6):
                h[i][i] = c
        elif kind == 1:  # identity plus a small symmetric perturbation
            for i in range(6):
                h[i][i] = Fraction(2)
            for _ in range(3):
                i, j = rng.sample(range(6), 2)
                v = Fraction(rng.randint(-1, 1), 4)
                h[i][j] = h[j][i] = v
        else:  # unconstrained random symmetric
            for i in range(6):
                for j in range(i, 6):
                    h[i][j] = h[j][i] = Fraction(rng.randint(-3, 3))
        out.append(PolyScalar.from_quadratic(h))
    return out


def test_sampled_claim_sl_psh_implies_psh():
    """Sampled check of the inclusion: no function classified sl-psh may fail
    the classical classifier (a counterexample is a convention bug)."""
    cfg = ConeSampleConfig(sample_count=1000, seed=77)
    positives = 0
    counterexamples = []
    for phi in _random_quadratics(102, seed=41):
        sl = classify_sl_psh(phi, cfg).classification
        if sl in (SL_PSH, STRICTLY_SL_PSH, SL_PLURIHARMONIC):
            positives += 1
            cl = classify_psh(phi, cfg).classification
            if cl not in (PSH, STRICTLY_PSH):
                counterexamples.append((phi, sl, cl))
    assert positives >= 10, "claim check is vacuous"
    assert not counterexamples, counterexamples
