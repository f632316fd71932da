"""Positivity of forms modulo a stable form, decided by sampling the
positivity cone with decomposable multivectors.

C(rho) is realized as the set of decomposable 3-vectors xi = v1^v2^v3 with
rho(xi) > threshold * |xi|, the v's drawn from the rotation-invariant
distribution on the sphere.  A flag switches to the convex-hull variant
(positive combinations of decomposable cone elements).  Sampling is seeded
and vectorized, so classifications are reproducible for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .blades import DIM, all_blades
from .forms import Form
from .scalars import scalar_eval

DEFAULT_SEED = 20110405

STRICTLY_POSITIVE = "strictly_positive"
POSITIVE = "positive"
STRICTLY_NEGATIVE = "strictly_negative"
NEGATIVE = "negative"
INDEFINITE = "indefinite"
ZERO_ON_CONE = "zero_on_cone"


class ConeSamplingError(RuntimeError):
    """Raised when too few raw samples land in the positivity cone."""


@dataclass(frozen=True)
class ConeSampleConfig:
    """Sampling realization of the positivity cones.

    cone_model selects between plain decomposable 3-vectors and their convex
    conical hull (random positive combinations of decomposable cone elements);
    the two agree for linear evaluations, and a comparison helper reports any
    classification difference.
    """

    sample_count: int = 2000
    seed: int = DEFAULT_SEED
    strict_threshold: float = 1e-6
    zero_tolerance: float = 1e-9
    cone_model: str = "decomposable"

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if self.strict_threshold <= 0 or self.zero_tolerance < 0:
            raise ValueError("thresholds must be positive / non-negative")
        if self.cone_model not in ("decomposable", "hull"):
            raise ValueError(f"unknown cone model {self.cone_model!r}")


def form_coefficient_vector(form: Form, point=None) -> np.ndarray:
    """Blade coefficients of a form as floats (evaluated at a point for
    non-constant coefficients), ordered like all_blades(degree)."""
    point = point if point is not None else (0.0,) * DIM
    out = np.zeros(len(all_blades(form.degree)))
    order = {m: i for i, m in enumerate(all_blades(form.degree))}
    for mask, c in form.coeffs.items():
        out[order[mask]] = scalar_eval(c, point)
    return out


def decomposable_kvectors(rng: np.random.Generator, count: int, k: int) -> np.ndarray:
    """Pluecker coordinates of v_1 ^ ... ^ v_k for Gaussian v's, normalized to
    unit Euclidean norm.  Shape (count, C(6,k))."""
    v = rng.standard_normal((count, k, DIM))
    combos = list(combinations(range(DIM), k))
    cols = np.empty((count, len(combos)))
    for idx, combo in enumerate(combos):
        sub = v[:, :, combo]  # (count, k, k)
        cols[:, idx] = np.linalg.det(sub)
    norms = np.linalg.norm(cols, axis=1)
    good = norms > 1e-12
    cols[good] /= norms[good, None]
    return cols[good]


def sample_cone(rho: Form, cfg: ConeSampleConfig, degree: int = 3) -> np.ndarray:
    """Unit decomposable degree-k vectors xi with rho(xi) > strict_threshold.

    Raises ConeSamplingError when fewer than 10% of the raw draws qualify.
    """
    rng = np.random.Generator(np.random.Philox(key=cfg.seed))
    coeffs = form_coefficient_vector(rho)
    xs = decomposable_kvectors(rng, cfg.sample_count, degree)
    if cfg.cone_model == "hull" and degree == 3:
        xs = _hull_samples(rng, xs, coeffs, cfg)
    vals = xs @ coeffs
    keep = vals > cfg.strict_threshold
    kept = xs[keep]
    if kept.shape[0] < 0.1 * cfg.sample_count:
        raise ConeSamplingError(
            f"cone starvation: {kept.shape[0]}/{cfg.sample_count} samples satisfy "
            f"rho(xi) > {cfg.strict_threshold} (is the form stable with the "
            "expected orientation?)"
        )
    return kept


def _hull_samples(rng, xs: np.ndarray, coeffs: np.ndarray, cfg: ConeSampleConfig) -> np.ndarray:
    """Positive combinations of pairs of decomposable cone elements."""
    vals = xs @ coeffs
    inside = xs[vals > cfg.strict_threshold]
    if inside.shape[0] < 4:
        return xs
    m = inside.shape[0]
    ia = rng.integers(0, m, size=m)
    ib = rng.integers(0, m, size=m)
    w = rng.uniform(0.0, 1.0, size=m)[:, None]
    mix = w * inside[ia] + (1.0 - w) * inside[ib]
    norms = np.linalg.norm(mix, axis=1)
    mix /= norms[:, None]
    return np.concatenate([inside, mix], axis=0)


@dataclass
class ConeReport:
    """Outcome of one positivity classification run."""

    verdict: str
    min_value: float
    max_value: float
    argmin_xi: list = field(default_factory=list)
    argmax_xi: list = field(default_factory=list)
    samples_used: int = 0


def classify_values(vals: np.ndarray, cfg: ConeSampleConfig) -> str:
    if np.abs(vals).max() <= cfg.zero_tolerance:
        return ZERO_ON_CONE
    lo, hi = float(vals.min()), float(vals.max())
    if lo > cfg.strict_threshold:
        return STRICTLY_POSITIVE
    if lo >= -cfg.zero_tolerance:
        return POSITIVE
    if hi < -cfg.strict_threshold:
        return STRICTLY_NEGATIVE
    if hi <= cfg.zero_tolerance:
        return NEGATIVE
    return INDEFINITE


def positivity_report(tau: Form, rho: Form, cfg: ConeSampleConfig | None = None,
                      points=None) -> ConeReport:
    """Classify the sign pattern of tau over the sampled cone C(rho).

    ``points`` supplies evaluation points for non-constant coefficients of
    tau (default: the origin).
    """
    from .stable import STABLE_NEGATIVE, analyze_stable

    cfg = cfg or ConeSampleConfig()
    if analyze_stable(rho).verdict != STABLE_NEGATIVE:
        raise ValueError("positivity is defined modulo a stable form with lambda < 0")
    xs = sample_cone(rho, cfg, degree=3)
    points = points if points is not None else [(0.0,) * DIM]
    all_vals = np.concatenate([xs @ form_coefficient_vector(tau, p) for p in points])
    lo_i = int(np.argmin(all_vals))
    hi_i = int(np.argmax(all_vals))
    verdict = classify_values(all_vals, cfg)
    n = xs.shape[0]
    return ConeReport(
        verdict=verdict,
        min_value=float(all_vals[lo_i]),
        max_value=float(all_vals[hi_i]),
        argmin_xi=list(map(float, xs[lo_i % n])),
        argmax_xi=list(map(float, xs[hi_i % n])),
        samples_used=int(all_vals.size),
    )


def positivity_mod(tau: Form, rho: Form, cfg: ConeSampleConfig | None = None) -> str:
    """Sign of tau modulo the stable form rho (sampled Definition-3 check)."""
    return positivity_report(tau, rho, cfg).verdict


def compare_cone_models(tau: Form, rho: Form, cfg: ConeSampleConfig | None = None) -> dict:
    """Run both cone realizations and report whether they classify alike."""
    cfg = cfg or ConeSampleConfig()
    plain = positivity_report(tau, rho, ConeSampleConfig(
        cfg.sample_count, cfg.seed, cfg.strict_threshold, cfg.zero_tolerance, "decomposable"))
    hull = positivity_report(tau, rho, ConeSampleConfig(
        cfg.sample_count, cfg.seed, cfg.strict_threshold, cfg.zero_tolerance, "hull"))
    return {
        "decomposable": plain.verdict,
        "hull": hull.verdict,
        "agree": plain.verdict == hull.verdict,
    }
