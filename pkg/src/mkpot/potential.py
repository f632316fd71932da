"""Mirror-potential operators on the flat background, the flat-model
verification report, and the plurisubharmonicity classifiers.

The potential map sends a real function phi to the pair

    rho_out = dd^s(phi sigma0),    sigma_out = -dd^s(phi rho0),

equivalently to -i dd^s(phi Omega0); both phrasings are computed and
cross-checked.  Classifiers sample the positivity cones: the classical one
tests dd^c phi on C(omega0), the special-Lagrangian one tests the pair of
inequalities dd^s(phi sigma) >= 0 mod rho and dd^s(phi rho) <= 0 mod sigma.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .blades import DIM, FULL_MASK
from .calculus import dd_c, dd_s_complex, dd_s_potential
from .cones import (
    NEGATIVE,
    POSITIVE,
    STRICTLY_NEGATIVE,
    STRICTLY_POSITIVE,
    ZERO_ON_CONE,
    ConeSampleConfig,
    classify_values,
    form_coefficient_vector,
    sample_cone,
)
from .forms import ComplexForm, Form, standard_structures, wedge
from .gridforms import GridForm, grid_dd_c, grid_points
from .scalars import PolyScalar, TrigScalar

_S, RHO0, SIGMA0, OMEGA0 = standard_structures()


@dataclass
class MkpResult:
    """Output of the potential map; re/im of the complex phrasing must equal
    (rho_out, sigma_out) (internal consistency of the two definitions)."""

    rho_out: object
    sigma_out: object
    omega_complex: object
    consistent: bool


def mkp_forms(phi, background: tuple[Form, Form] | None = None) -> MkpResult:
    """Potential map phi -> (dd^s(phi sigma), -dd^s(phi rho)); linear in phi."""
    rho, sigma = background if background is not None else (RHO0, SIGMA0)
    rho_out = dd_s_potential(phi, sigma)
    sigma_out = -dd_s_potential(phi, rho)
    if isinstance(rho_out, GridForm):
        omega = dd_s_potential(phi, rho), dd_s_potential(phi, sigma)
        # -i (A + iB) = B - iA
        re, im = omega[1], -omega[0]
        consistent = ((re - rho_out).max_abs() <= 1e-12 * max(1.0, rho_out.max_abs())
                      and (im - sigma_out).max_abs() <= 1e-12 * max(1.0, sigma_out.max_abs()))
        return MkpResult(rho_out, sigma_out, (re, im), consistent)
    omega_c = dd_s_complex(phi, ComplexForm(rho, sigma)).times_minus_i()
    consistent = omega_c.re == rho_out and omega_c.im == sigma_out
    return MkpResult(rho_out, sigma_out, omega_c, consistent)


def global_mkp_deform(phi, omega: ComplexForm | None = None) -> ComplexForm:
    """Omega' = Omega - i dd^s(phi Omega).

    For closed constant Omega and periodic phi the correction is d-exact, so
    all torus periods of Omega' agree with those of Omega (the cohomological
    reading of Omega' ~ Omega; see torus_periods)."""
    omega = omega if omega is not None else OMEGA0
    return omega - dd_s_complex(phi, omega).times_i()


def torus_periods(omega: ComplexForm) -> dict[tuple[int, ...], complex]:
    """Exact torus periods: integral over T^6 of omega ^ e_J for every
    constant 3-blade e_J, divided by (2 pi)^6.

    Needs Fraction or TrigScalar coefficients (polynomials are not periodic).
    """
    from .blades import all_blades, indices_from_mask

    periods: dict[tuple[int, ...], complex] = {}
    for mask in all_blades(3):
        blade = Form(3, {mask: Fraction(1)})
        top_re = wedge(omega.re, blade)
        top_im = wedge(omega.im, blade)
        periods[indices_from_mask(mask)] = complex(
            _mean_value(top_re.coeffs.get(FULL_MASK, Fraction(0))),
            _mean_value(top_im.coeffs.get(FULL_MASK, Fraction(0))),
        )
    return periods


def _mean_value(c) -> float:
    if isinstance(c, (Fraction, int)):
        return float(c)
    if isinstance(c, TrigScalar):
        return float(c.constant_part())
    if isinstance(c, PolyScalar):
        raise ValueError("torus periods need periodic (constant or trig) coefficients")
    raise TypeError(type(c).__name__)


@dataclass
class FlatExampleReport:
    """Exact verification of the flat-model identities."""

    dds_identity_ok: bool
    dds_diff: str
    ddc_constant: Fraction | None
    ddc_proportional_ok: bool
    mkp_consistent_ok: bool
    flat_potential_ok: bool

    @property
    def all_ok(self) -> bool:
        return (self.dds_identity_ok and self.ddc_proportional_ok
                and self.mkp_consistent_ok and self.flat_potential_ok)

    def as_dict(self) -> dict:
        return {
            "dds_identity_ok": self.dds_identity_ok,
            "dds_diff": self.dds_diff,
            "ddc_constant": str(self.ddc_constant) if self.ddc_constant is not None else None,
            "ddc_proportional_ok": self.ddc_proportional_ok,
            "mkp_consistent_ok": self.mkp_consistent_ok,
            "flat_potential_ok": self.flat_potential_ok,
            "all_ok": self.all_ok,
        }


def squared_norm_potential() -> PolyScalar:
    """phi = sum_i (x^i)^2."""
    terms = {}
    for i in range(DIM):
        exps = [0] * DIM
        exps[i] = 2
        terms[tuple(exps)] = Fraction(1)
    return PolyScalar(terms)


def flat_example_check() -> FlatExampleReport:
    """Verify the flat-model identities exactly and report the constants.

    Checks dd^s(phi Omega0) = 3i Omega0 for phi = sum (x^i)^2, records the
    proportionality constant of dd^c phi against omega0 (2 under this
    toolkit's d^c normalization), and confirms that the rescaled potential
    phi/3 maps to exactly (rho0, sigma0).
    """
    phi = squared_norm_potential()
    lhs = dd_s_complex(phi, OMEGA0)
    target = OMEGA0.times_i().scale(Fraction(3))
    dds_ok = lhs == target
    diff = "" if dds_ok else repr((lhs - target))

    ddc = dd_c(phi)
    constant = None
    prop_ok = False
    base = _S.omega
    # proportionality: ddc == c * omega0 for a single rational c
    for mask, c in ddc.coeffs.items():
        if base.coeffs.get(mask) is None:
            break
        ratio = c / base.coeffs[mask]
        if constant is None:
            constant = ratio
        elif ratio != constant:
            constant = None
            break
    else:
        if constant is not None and ddc == base.scale(constant):
            prop_ok = True

    third = Fraction(1, 3) * phi
    res = mkp_forms(third)
    flat_ok = res.rho_out == RHO0 and res.sigma_out == SIGMA0

    return FlatExampleReport(
        dds_identity_ok=dds_ok,
        dds_diff=diff,
        ddc_constant=constant,
        ddc_proportional_ok=prop_ok,
        mkp_consistent_ok=res.consistent,
        flat_potential_ok=flat_ok,
    )


# ---------------------------------------------------------------------------
# plurisubharmonicity classifiers
# ---------------------------------------------------------------------------

STRICTLY_PSH = "strictly_psh"
PSH = "psh"
NOT_PSH = "not_psh"
STRICTLY_SL_PSH = "strictly_sl_psh"
SL_PSH = "sl_psh"
NOT_SL_PSH = "not_sl_psh"
SL_PLURIHARMONIC = "sl_pluriharmonic"


@dataclass
class PshVerdict:
    """Classification with the worst sampled cone element attached whenever
    the verdict is not strict."""

    classification: str
    witness: dict | None
    samples_used: int
    seed: int

    def as_dict(self) -> dict:
        return {
            "classification": self.classification,
            "witness": self.witness,
            "samples_used": self.samples_used,
            "seed": self.seed,
        }


def _evaluation_points(phi, at_points):
    if at_points is not None:
        return [tuple(float(x) for x in p) for p in at_points]
    if isinstance(phi, GridForm):
        return [tuple(p) for p in grid_points(phi.axes, phi.n)]
    return [(0.0,) * DIM]


def _values_on_cone(form, xs: np.ndarray, points) -> tuple[np.ndarray, int]:
    """Stacked form(xi) values over cone samples and evaluation points."""
    if isinstance(form, GridForm):
        from .blades import all_blades

        cols = np.stack([form.coeff(m).reshape(-1) for m in all_blades(form.degree)], axis=1)
        vals = cols @ xs.T  # (nodes, samples)
        return vals.reshape(-1), xs.shape[0]
    blocks = [xs @ form_coefficient_vector(form, p) for p in points]
    return np.concatenate(blocks), xs.shape[0]


def _witness(vals: np.ndarray, xs: np.ndarray, points, pick_min: bool) -> dict:
    idx = int(np.argmin(vals) if pick_min else np.argmax(vals))
    n = xs.shape[0]
    point = points[idx // n] if idx // n < len(points) else None
    return {
        "xi": [float(x) for x in xs[idx % n]],
        "value": float(vals[idx]),
        "point": list(point) if point is not None else None,
    }


def classify_psh(phi, cfg: ConeSampleConfig | None = None, at_points=None) -> PshVerdict:
    """Classical plurisubharmonicity: dd^c phi >= 0 on the sampled C(omega0)."""
    cfg = cfg or ConeSampleConfig()
    points = _evaluation_points(phi, at_points)
    ddc = grid_dd_c(phi) if isinstance(phi, GridForm) else dd_c(phi)
    xs = sample_cone(_S.omega, cfg, degree=2)
    vals, _ = _values_on_cone(ddc, xs, points)
    verdict = classify_values(vals, cfg)
    if verdict in (STRICTLY_POSITIVE,):
        return PshVerdict(STRICTLY_PSH, None, vals.size, cfg.seed)
    witness = _witness(vals, xs, points, pick_min=True)
    if verdict in (POSITIVE, ZERO_ON_CONE):
        return PshVerdict(PSH, witness, vals.size, cfg.seed)
    return PshVerdict(NOT_PSH, witness, vals.size, cfg.seed)


def classify_sl_psh(phi, cfg: ConeSampleConfig | None = None, at_points=None,
                    background: tuple[Form, Form] | None = None) -> PshVerdict:
    """Special-Lagrangian plurisubharmonicity against a stable background pair:
    dd^s(phi sigma) >= 0 mod rho and dd^s(phi rho) <= 0 mod sigma."""
    from .stable import STABLE_NEGATIVE, analyze_stable

    cfg = cfg or ConeSampleConfig()
    rho, sigma = background if background is not None else (RHO0, SIGMA0)
    for f in (rho, sigma):
        if analyze_stable(f).verdict != STABLE_NEGATIVE:
            raise ValueError("background forms must be stable with lambda < 0")
    points = _evaluation_points(phi, at_points)

    tau_plus = dd_s_potential(phi, sigma)   # must be >= 0 on C(rho)
    tau_minus = dd_s_potential(phi, rho)    # must be <= 0 on C(sigma)
    xs_rho = sample_cone(rho, cfg, degree=3)
    xs_sigma = sample_cone(sigma, cfg, degree=3)
    vals_plus, _ = _values_on_cone(tau_plus, xs_rho, points)
    vals_minus, _ = _values_on_cone(tau_minus, xs_sigma, points)
    v1 = classify_values(vals_plus, cfg)
    v2 = classify_values(vals_minus, cfg)
    used = int(vals_plus.size + vals_minus.size)

    if v1 == ZERO_ON_CONE and v2 == ZERO_ON_CONE:
        witness = _witness(vals_plus, xs_rho, points, pick_min=True)
        return PshVerdict(SL_PLURIHARMONIC, witness, used, cfg.seed)
    if v1 == STRICTLY_POSITIVE and v2 == STRICTLY_NEGATIVE:
        return PshVerdict(STRICTLY_SL_PSH, None, used, cfg.seed)
    ok_plus = v1 in (STRICTLY_POSITIVE, POSITIVE, ZERO_ON_CONE)
    ok_minus = v2 in (STRICTLY_NEGATIVE, NEGATIVE, ZERO_ON_CONE)
    if ok_plus and ok_minus:
        witness = _witness(vals_plus, xs_rho, points, pick_min=True)
        return PshVerdict(SL_PSH, witness, used, cfg.seed)
    if not ok_plus:
        witness = _witness(vals_plus, xs_rho, points, pick_min=True)
    else:
        witness = _witness(vals_minus, xs_sigma, points, pick_min=False)
    return PshVerdict(NOT_SL_PSH, witness, used, cfg.seed)
