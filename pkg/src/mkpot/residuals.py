"""Residual evaluators for the Monge-Ampere-type equations: the densities of
the global equations (background pair deformed by dd^s terms), the closed-form
six-dimensional local quadratic expression, and the exact crosscheck relating
the two on constant Hessians.

The brute-force density expansion is treated as ground truth and the closed-form
local expression as the hypothesis under test; the crosscheck fits the affine
relation with exact linear algebra and, independently, the same relation with
the local expression evaluated at the flat-offset Hessian H + (2/3) I, which
absorbs the background (the local expression reads the total potential,
quadratic flat part included).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .blades import DIM, FULL_MASK
from .calculus import dd_s_complex, dd_s_potential
from .forms import ComplexForm, Form, standard_structures, wedge, wedge_complex
from .gridforms import GridForm, grid_wedge, sample_form, torus_integral
from .scalars import PolyScalar, TrigScalar, normalize_scalar

_S, RHO0, SIGMA0, OMEGA0 = standard_structures()


# ---------------------------------------------------------------------------
# Hessian fields
# ---------------------------------------------------------------------------

@dataclass
class HessianField:
    """Symmetric 6x6 array of scalar fields phi_ij with provenance.

    Entries may be Fractions, exact polynomials/trig polynomials, floats or
    numpy arrays; the evaluators only use ring arithmetic, so every backend
    works through the same expression.
    """

    entries: list
    provenance: str = "exact_polynomial"

    def __post_init__(self):
        n = len(self.entries)
        if n != DIM or any(len(row) != DIM for row in self.entries):
            raise ValueError("Hessian must be 6x6")
        for i in range(n):
            for j in range(i + 1, n):
                a, b = self.entries[i][j], self.entries[j][i]
                if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
                    if np.max(np.abs(a - b)) > 1e-12:
                        raise ValueError(f"Hessian not symmetric at ({i+1},{j+1})")
                elif normalize_scalar(a - b) != 0:
                    raise ValueError(f"Hessian not symmetric at ({i+1},{j+1})")

    def entry(self, i: int, j: int):
        return self.entries[i - 1][j - 1]

    @classmethod
    def from_potential(cls, phi) -> "HessianField":
        if not isinstance(phi, (PolyScalar, TrigScalar)):
            raise TypeError("from_potential needs an exact scalar")
        rows = [[phi.diff(i).diff(j) for j in range(1, DIM + 1)] for i in range(1, DIM + 1)]
        return cls(rows, provenance="exact_polynomial")

    @classmethod
    def from_matrix(cls, h) -> "HessianField":
        rows = [[Fraction(h[i][j]) if isinstance(h[i][j], int) else h[i][j]
                 for j in range(DIM)] for i in range(DIM)]
        return cls(rows, provenance="exact_polynomial")

    @classmethod
    def from_grid(cls, phi: GridForm, scheme: str = "spectral") -> "HessianField":
        from .gridforms import grid_diff

        if phi.degree != 0:
            raise ValueError("grid Hessian needs a degree-0 grid form")
        if scheme != "spectral":
            raise ValueError("grid Hessians are spectral here; finite differences live in the semiflat solver")
        rows = []
        for i in range(1, DIM + 1):
            di = grid_diff(phi, i)
            rows.append([grid_diff(di, j).coeff(0) for j in range(1, DIM + 1)])
        return cls(rows, provenance="spectral")


def eq13_lhs(h: HessianField):
    """The closed-form local quadratic expression in the second derivatives
    phi_ij: four trace-pair products minus the four signed (12,34,56)
    combinations squared minus twice six off-diagonal combinations squared."""
    def p(i, j):
        return h.entry(i, j)

    t1 = (p(2, 2) + p(3, 3) + p(5, 5)) * (p(1, 1) + p(4, 4) + p(6, 6))
    t2 = (p(1, 1) + p(4, 4) + p(5, 5)) * (p(2, 2) + p(3, 3) + p(6, 6))
    t3 = (p(1, 1) + p(3, 3) + p(6, 6)) * (p(2, 2) + p(4, 4) + p(5, 5))
    t4 = (p(2, 2) + p(4, 4) + p(6, 6)) * (p(1, 1) + p(3, 3) + p(5, 5))
    s12, s34, s56 = p(1, 2), p(3, 4), p(5, 6)
    sq = (
        (s12 + s34 + s56) * (s12 + s34 + s56)
        + (-s12 - s34 + s56) * (-s12 - s34 + s56)
        + (s12 - s34 - s56) * (s12 - s34 - s56)
        + (-s12 + s34 - s56) * (-s12 + s34 - s56)
    )
    pairs = (
        (p(1, 3) - p(2, 4)) * (p(1, 3) - p(2, 4))
        + (p(3, 6) + p(4, 5)) * (p(3, 6) + p(4, 5))
        + (p(1, 5) - p(2, 6)) * (p(1, 5) - p(2, 6))
        + (p(1, 6) + p(2, 5)) * (p(1, 6) + p(2, 5))
        + (p(3, 5) - p(4, 6)) * (p(3, 5) - p(4, 6))
        + (p(1, 4) + p(2, 3)) * (p(1, 4) + p(2, 3))
    )
    return t1 + t2 + t3 + t4 - sq - 2 * pairs


def eq14_lhs(h: HessianField):
    """Semi-flat reduction: sigma2 of the odd-coordinate 3x3 Hessian block,
    phi_11 phi_33 + phi_11 phi_55 + phi_33 phi_55 - phi_13^2 - phi_15^2 - phi_35^2."""
    def p(i, j):
        return h.entry(i, j)

    return (p(1, 1) * p(3, 3) + p(1, 1) * p(5, 5) + p(3, 3) * p(5, 5)
            - p(1, 3) * p(1, 3) - p(1, 5) * p(1, 5) - p(3, 5) * p(3, 5))


# ---------------------------------------------------------------------------
# densities of the global equations
# ---------------------------------------------------------------------------

class DensityError(ValueError):
    """Raised when the background top form vanishes somewhere."""


def _top_coefficient(form):
    if isinstance(form, GridForm):
        return form.coeff(FULL_MASK)
    return form.coeffs.get(FULL_MASK, Fraction(0))


def _density_against(top, base):
    """Pointwise quotient top / base for 6-form coefficients."""
    if isinstance(top, np.ndarray) or isinstance(base, np.ndarray):
        base_arr = np.asarray(base, dtype=float)
        bad = np.abs(base_arr) < 1e-300
        if np.any(bad):
            node = tuple(int(i) for i in np.argwhere(bad)[0])
            raise DensityError(f"background volume vanishes at node {node}")
        return np.asarray(top, dtype=float) / base_arr
    if isinstance(base, (Fraction, int)):
        if base == 0:
            raise DensityError("background volume vanishes identically")
        if isinstance(top, (Fraction, int)):
            return normalize_scalar(Fraction(top) / Fraction(base))
        return Fraction(1, 1) / Fraction(base) * top
    raise DensityError("background volume must be constant in the exact engine")


def eq9_residual(alpha, beta, rho: Form | GridForm | None = None,
                 sigma: Form | GridForm | None = None, check_complex: bool = True):
    """Density of (rho + dd^s alpha) ^ (sigma + dd^s beta) against rho ^ sigma.

    alpha, beta are degree-3 forms on a shared engine.  The complex phrasing
    (Omega + dd^s psi) ^ (conj) with psi = alpha + i beta is recomputed and
    checked for consistency.
    """
    rho = rho if rho is not None else RHO0
    sigma = sigma if sigma is not None else SIGMA0
    if isinstance(alpha, GridForm):
        rho_g = rho if isinstance(rho, GridForm) else sample_form(rho, alpha.axes, alpha.n)
        sigma_g = sigma if isinstance(sigma, GridForm) else sample_form(sigma, alpha.axes, alpha.n)
        lhs_rho = rho_g + _dds(alpha)
        lhs_sigma = sigma_g + _dds(beta)
        top = grid_wedge(lhs_rho, lhs_sigma)
        base = grid_wedge(rho_g, sigma_g)
        density = _density_against(_top_coefficient(top), _top_coefficient(base))
        if check_complex:
            _check_complex_grid(lhs_rho, lhs_sigma, base, density)
        return density

    lhs_rho = rho + _dds(alpha)
    lhs_sigma = sigma + _dds(beta)
    top = wedge(lhs_rho, lhs_sigma)
    base = wedge(rho, sigma)
    density = _density_against(_top_coefficient(top), _top_coefficient(base))
    if check_complex:
        # (Omega + dd^s psi) ^ (conj Omega + dd^s conj psi) = -2i * top
        omega = ComplexForm(rho, sigma)
        psi = ComplexForm(alpha, beta)
        lhs_c = wedge_complex(omega + _dds_complex(psi), (omega + _dds_complex(psi)).conjugate())
        if not (lhs_c.re.is_zero() and lhs_c.im == top.scale(Fraction(-2))):
            raise AssertionError("complex phrasing disagrees with the real expansion")
    return density


def _dds(form):
    from .calculus import d_any, d_s

    return d_any(d_s(form))


def _dds_complex(psi: ComplexForm) -> ComplexForm:
    return ComplexForm(_dds(psi.re), _dds(psi.im))


def _check_complex_grid(lhs_rho, lhs_sigma, base, density):
    top_c = grid_wedge(lhs_rho, lhs_sigma)
    dens2 = _density_against(_top_coefficient(top_c), _top_coefficient(base))
    if np.max(np.abs(dens2 - density)) > 1e-10:
        raise AssertionError("complex phrasing disagrees on the grid")


def eq9_normalization_residual(alpha: GridForm, beta: GridForm,
                               rho: Form | None = None, sigma: Form | None = None) -> float:
    """|int density rho^sigma - int rho^sigma| over the torus; zero in exact
    arithmetic because the dd^s corrections are exact forms."""
    rho = rho if rho is not None else RHO0
    sigma = sigma if sigma is not None else SIGMA0
    rho_g = sample_form(rho, alpha.axes, alpha.n)
    sigma_g = sample_form(sigma, alpha.axes, alpha.n)
    top = grid_wedge(rho_g + _dds(alpha), sigma_g + _dds(beta))
    return abs(torus_integral(top) - torus_integral(grid_wedge(rho_g, sigma_g)))


def eq11_density(phi, rho: Form | None = None, sigma: Form | None = None,
                 check_complex: bool = True):
    """Density of (rho + dd^s(phi sigma)) ^ (sigma - dd^s(phi rho)) against
    rho ^ sigma; the potential-ansatz specialization of the alpha/beta
    density.  Equals e^F when the equation holds."""
    rho = rho if rho is not None else RHO0
    sigma = sigma if sigma is not None else SIGMA0
    if isinstance(phi, GridForm):
        a = dd_s_potential(phi, sigma)
        b = dd_s_potential(phi, rho)
        rho_g = sample_form(rho, phi.axes, phi.n)
        sigma_g = sample_form(sigma, phi.axes, phi.n)
        top = grid_wedge(rho_g + a, sigma_g - b)
        base = grid_wedge(rho_g, sigma_g)
        return _density_against(_top_coefficient(top), _top_coefficient(base))
    a = dd_s_potential(phi, sigma)
    b = dd_s_potential(phi, rho)
    top = wedge(rho + a, sigma - b)
    base = wedge(rho, sigma)
    density = _density_against(_top_coefficient(top), _top_coefficient(base))
    if check_complex:
        omega = ComplexForm(rho, sigma)
        moved = omega - dd_s_complex(phi, omega).times_i()
        lhs_c = wedge_complex(moved, moved.conjugate())
        if not (lhs_c.re.is_zero() and lhs_c.im == top.scale(Fraction(-2))):
            raise AssertionError("complex phrasing (deformed volume pairing) disagrees")
    return density


# ---------------------------------------------------------------------------
# exact crosscheck between the density and the closed-form local expression
# ---------------------------------------------------------------------------

FLAT_OFFSET = Fraction(2, 3)  # Hessian of the flat potential (1/3) sum (x^i)^2


@dataclass
class AffineFit:
    c1: Fraction | None
    c0: Fraction | None
    max_residual: Fraction
    exact: bool
    worst_sample: list | None = None


@dataclass
class CrosscheckReport:
    """Exact comparison of the brute-force density against the local
    expression on random constant Hessians."""

    sample_count: int
    holdout_count: int
    seed: int
    plain_fit: AffineFit
    offset_fit: AffineFit
    extended_fit: dict
    linear_coefficients: dict
    quadratic_mismatch: list
    status: str
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        def fit_dict(f: AffineFit) -> dict:
            return {
                "c1": str(f.c1) if f.c1 is not None else None,
                "c0": str(f.c0) if f.c0 is not None else None,
                "max_residual": str(f.max_residual),
                "exact": f.exact,
                "worst_sample": f.worst_sample,
            }

        return {
            "sample_count": self.sample_count,
            "holdout_count": self.holdout_count,
            "seed": self.seed,
            "plain_fit": fit_dict(self.plain_fit),
            "offset_fit": fit_dict(self.offset_fit),
            "extended_fit": self.extended_fit,
            "linear_coefficients": self.linear_coefficients,
            "quadratic_mismatch": self.quadratic_mismatch,
            "status": self.status,
            "notes": self.notes,
        }


def _random_symmetric(rng: random.Random, spread: int = 3) -> list[list[Fraction]]:
    h = [[Fraction(0)] * DIM for _ in range(DIM)]
    for i in range(DIM):
        for j in range(i, DIM):
            v = Fraction(rng.randint(-spread, spread))
            h[i][j] = v
            h[j][i] = v
    return h

def density4_of_hessian(h) -> Fraction:
    """4 * eq11 density (the raw 6-form coefficient) for the quadratic
    potential with Hessian h, flat backgrounds."""
    phi = PolyScalar.from_quadratic(h)
    dens = eq11_density(phi, check_complex=False)
    dens = normalize_scalar(dens)
    if not isinstance(dens, Fraction):
        raise AssertionError("constant Hessian must give a constant density")
    return 4 * dens


def eq13_of_matrix(h) -> Fraction:
    val = eq13_lhs(HessianField.from_matrix(h))
    val = normalize_scalar(val)
    if not isinstance(val, Fraction):
        raise AssertionError("constant Hessian must give a constant value")
    return val


def _shifted(h, offset: Fraction):
    return [[h[i][j] + (offset if i == j else 0) for j in range(DIM)] for i in range(DIM)]


def _affine_fit(pairs: list[tuple[Fraction, Fraction]]) -> tuple[Fraction, Fraction] | None:
    """Exact least squares for y = c1 x + c0 (normal equations over Q)."""
    n = Fraction(len(pairs))
    sx = sum((x for x, _ in pairs), Fraction(0))
    sy = sum((y for _, y in pairs), Fraction(0))
    sxx = sum((x * x for x, _ in pairs), Fraction(0))
    sxy = sum((x * y for x, y in pairs), Fraction(0))
    det = n * sxx - sx * sx
    if det == 0:
        return None
    c1 = (n * sxy - sx * sy) / det
    c0 = (sy - c1 * sx) / n
    return c1, c0


def _fit_and_verify(train, test) -> AffineFit:
    fit = _affine_fit(train)
    if fit is None:
        return AffineFit(None, None, Fraction(0), exact=False)
    c1, c0 = fit
    worst = Fraction(0)
    worst_sample = None
    for x, y in train + test:
        r = abs(y - (c1 * x + c0))
        if r > worst:
            worst = r
            worst_sample = [str(x), str(y)]
    return AffineFit(c1, c0, worst, exact=(worst == 0), worst_sample=worst_sample)


def eq13_crosscheck(sample_count: int = 40, holdout: int = 20, seed: int = 20110405) -> CrosscheckReport:
    """Fit the affine relation density*4 = c1 * local_expression + c0 with
    exact linear algebra, verify on held-out Hessians, and run the diagnostic
    fits that document the structure when the plain fit fails.

    A failed plain fit is a reportable finding, not an exception: the report
    carries the exact linear functional separating the two sides and the
    bilinear comparison of the quadratic parts.
    """
    rng = random.Random(seed)
    samples = [_random_symmetric(rng) for _ in range(sample_count + holdout)]
    data = [(eq13_of_matrix(h), density4_of_hessian(h)) for h in samples]
    train, test = data[:sample_count], data[sample_count:]

    plain = _fit_and_verify(train, test)

    shifted = [(eq13_of_matrix(_shifted(h, FLAT_OFFSET)), d)
               for h, (_e, d) in zip(samples, data)]
    offset = _fit_and_verify(shifted[:sample_count], shifted[sample_count:])

    extended = _extended_fit(samples, data)
    linear = _linear_functional_table()
    mismatch = _quadratic_mismatch_table()

    if offset.exact:
        status = "offset_affine_exact"
    elif plain.exact:
        status = "plain_affine_exact"
    else:
        status = "failed"
    notes = []
    if not plain.exact:
        notes.append(
            "no affine relation links the density to the local expression at the "
            "same Hessian: the density carries a linear trace term (see "
            "linear_coefficients); the local expression evaluated at the "
            "flat-offset Hessian H + (2/3) I absorbs it"
        )
    return CrosscheckReport(
        sample_count=sample_count,
        holdout_count=holdout,
        seed=seed,
        plain_fit=plain,
        offset_fit=offset,
        extended_fit=extended,
        linear_coefficients=linear,
        quadratic_mismatch=mismatch,
        status=status,
        notes=notes,
    )


def _extended_fit(samples, data) -> dict:
    """Exact least squares for density4 = a * eq13 + b * tr(H) + c."""
    rows = []
    for h, (e, d4) in zip(samples, data):
        tr = sum((h[i][i] for i in range(DIM)), Fraction(0))
        rows.append((e, tr, Fraction(1), d4))
    ata = [[Fraction(0)] * 3 for _ in range(3)]
    atb = [Fraction(0)] * 3
    for e, tr, one, y in rows:
        v = (e, tr, one)
        for i in range(3):
            for j in range(3):
                ata[i][j] += v[i] * v[j]
            atb[i] += v[i] * y
    try:
        from .forms import _invert

        inv = _invert(ata)
        sol = [sum(inv[i][j] * atb[j] for j in range(3)) for i in range(3)]
    except ValueError:
        return {"exact": False, "reason": "singular normal equations"}
    worst = Fraction(0)
    for e, tr, one, y in rows:
        worst = max(worst, abs(y - (sol[0] * e + sol[1] * tr + sol[2])))
    return {
        "a_eq13": str(sol[0]),
        "b_trace": str(sol[1]),
        "c_const": str(sol[2]),
        "max_residual": str(worst),
        "exact": worst == 0,
    }


def _basis_matrix(i: int, j: int) -> list[list[Fraction]]:
    e = [[Fraction(0)] * DIM for _ in range(DIM)]
    e[i][j] = Fraction(1)
    e[j][i] = Fraction(1)  # same cell for i == j
    return e


def _linear_functional_table() -> dict:
    """Coefficients of the exact linear-in-H part of density4 on the basis
    E_ij, computed as (density4(E) - density4(-E))/2."""
    out = {}
    for i in range(DIM):
        for j in range(i, DIM):
            e = _basis_matrix(i, j)
            plus = density4_of_hessian(e)
            minus = density4_of_hessian([[-x for x in row] for row in e])
            lin = (plus - minus) / 2
            if lin:
                out[f"H[{i+1},{j+1}]"] = str(lin)
    return out


def _quadratic_mismatch_table() -> list:
    """Bilinear comparison of the quadratic part of density4 against a single
    rational multiple of the local expression; empty when proportional."""
    basis = [((i + 1, j + 1), _basis_matrix(i, j))
             for i in range(DIM) for j in range(i, DIM)]
    zero = density4_of_hessian([[Fraction(0)] * DIM for _ in range(DIM)])

    cache_d: dict = {}
    cache_e: dict = {}

    def q_dens(key, h):
        if key not in cache_d:
            plus = density4_of_hessian(h)
            minus = density4_of_hessian([[-x for x in row] for row in h])
            cache_d[key] = (plus + minus) / 2 - zero
        return cache_d[key]

    def q_eq13(key, h):
        if key not in cache_e:
            cache_e[key] = eq13_of_matrix(h)
        return cache_e[key]

    ident = [[Fraction(2) if i == j else Fraction(0) for j in range(DIM)] for i in range(DIM)]
    qe = q_eq13("ident", ident)
    if not qe:
        return [{"note": "local expression vanishes on the identity"}]
    ratio = q_dens("ident", ident) / qe
    mismatches = []
    for a in range(len(basis)):
        lbl_a, ea = basis[a]
        for b in range(a, len(basis)):
            lbl_b, eb = basis[b]
            hsum = [[ea[i][j] + eb[i][j] for j in range(DIM)] for i in range(DIM)]
            bil_d = (q_dens(("s", lbl_a, lbl_b), hsum)
                     - q_dens(lbl_a, ea) - q_dens(lbl_b, eb))
            bil_e = (q_eq13(("s", lbl_a, lbl_b), hsum)
                     - q_eq13(lbl_a, ea) - q_eq13(lbl_b, eb))
            if bil_d != ratio * bil_e:
                mismatches.append({
                    "pair": [list(lbl_a), list(lbl_b)],
                    "density_bilinear": str(bil_d),
                    "local_bilinear": str(bil_e),
                    "ratio": str(ratio),
                })
    return mismatches
