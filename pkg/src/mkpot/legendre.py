"""Convex conjugation (Legendre transform) of strictly convex potentials and
the new-solution experiments for the semi-flat equation.

The transform phi*(y) = sup_x (<x,y> - phi(x)) is evaluated per target node by
concave maximization: Newton on the gradient map, vectorized over the whole
node batch.  Strict convexity (positive-definite Hessian wherever the input is
sampled) makes the maximizer unique; nodes whose maximizer escapes the sampled
box are flagged as outside the gradient image.  Partial transforms conjugate a
subset of the variables with the rest frozen.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy import ndimage

from .semiflat import SemiflatPotential


class ConvexityError(ValueError):
    """Input fails the positive-definite Hessian check."""


# ---------------------------------------------------------------------------
# potential backends: value / gradient / Hessian at arbitrary points
# ---------------------------------------------------------------------------

class QuadraticPotential:
    """phi(x) = (1/2) x^T A x with A symmetric positive-definite."""

    def __init__(self, A):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        if not np.allclose(self.A, self.A.T):
            raise ValueError("A must be symmetric")
        if np.linalg.eigvalsh(self.A).min() <= 0:
            raise ConvexityError("quadratic part is not positive-definite")
        self.dim = self.A.shape[0]

    def value(self, x: np.ndarray) -> np.ndarray:
        return 0.5 * np.einsum("...i,ij,...j->...", x, self.A, x)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return x @ self.A

    def hess(self, x: np.ndarray) -> np.ndarray:
        return np.broadcast_to(self.A, x.shape[:-1] + self.A.shape)

    def conjugate(self) -> "QuadraticPotential":
        return QuadraticPotential(np.linalg.inv(self.A))


class QuadPlusTrig:
    """phi = (1/2) x^T Q x + sum_m amp_m trig(k_m . x) on d variables.

    modes: iterable of (freq tuple, kind, amplitude) with kind in
    {"cos", "sin"}.  Convexity is checked on a sample grid.
    """

    def __init__(self, Q, modes=(), check: bool = True):
        self.Q = np.atleast_2d(np.asarray(Q, dtype=float))
        self.dim = self.Q.shape[0]
        self.modes = [(np.asarray(k, dtype=float), kind, float(a)) for k, kind, a in modes]
        if check:
            self._check_convexity()

    def _check_convexity(self, n: int = 17):
        ticks = 2.0 * np.pi * np.arange(n) / n
        pts = np.array(list(product(*([ticks] * self.dim))))
        H = self.hess(pts)
        eig = np.linalg.eigvalsh(H)
        if eig.min() <= 0:
            raise ConvexityError(
                f"Hessian not positive-definite (min eigenvalue {eig.min():.3e})"
            )

    def value(self, x: np.ndarray) -> np.ndarray:
        out = 0.5 * np.einsum("...i,ij,...j->...", x, self.Q, x)
        for k, kind, a in self.modes:
            phase = x @ k
            out = out + a * (np.cos(phase) if kind == "cos" else np.sin(phase))
        return out

    def grad(self, x: np.ndarray) -> np.ndarray:
        out = x @ self.Q
        for k, kind, a in self.modes:
            phase = x @ k
            d = -a * np.sin(phase) if kind == "cos" else a * np.cos(phase)
            out = out + d[..., None] * k
        return out

    def hess(self, x: np.ndarray) -> np.ndarray:
        out = np.broadcast_to(self.Q, x.shape[:-1] + self.Q.shape).copy()
        for k, kind, a in self.modes:
            phase = x @ k
            dd = -a * np.cos(phase) if kind == "cos" else -a * np.sin(phase)
            out = out + dd[..., None, None] * np.multiply.outer(k, k)
        return out

    @classmethod
    def from_semiflat(cls, phi: SemiflatPotential, amplitude_cutoff: float = 1e-12,
                      check: bool = True) -> "QuadPlusTrig":
        """Trigonometric-interpolation view of a periodic grid solution: the
        FFT modes above the cutoff become explicit cos/sin terms."""
        n = phi.n
        spec = np.fft.fftn(phi.p) / n ** 3
        modes = []
        freqs = np.fft.fftfreq(n, d=1.0 / n).astype(int)
        seen = set()
        for idx in np.argwhere(np.abs(spec) > amplitude_cutoff):
            k = tuple(int(freqs[i]) for i in idx)
            if k == (0, 0, 0) or k in seen:
                continue
            mk = tuple(-c for c in k)
            seen.add(k)
            seen.add(mk)
            c = spec[tuple(idx)]
            # real field: c e^{ikx} + conj(c) e^{-ikx} = 2 Re(c) cos - 2 Im(c) sin
            if abs(c.real) > amplitude_cutoff / 2:
                modes.append((k, "cos", 2.0 * c.real))
            if abs(c.imag) > amplitude_cutoff / 2:
                modes.append((k, "sin", -2.0 * c.imag))
        return cls(phi.Q, modes, check=check)


class SampledConvex:
    """Strictly convex function known only by samples on a box grid.

    Values are interpolated with a cubic spline; gradient and Hessian fields
    come from finite differences of the samples, themselves spline-
    interpolated.  Good enough that conjugation error is dominated by the
    quartic interpolation error of the value itself.
    """

    def __init__(self, values: np.ndarray, axis_grids: list[np.ndarray]):
        self.values = np.asarray(values, dtype=float)
        self.grids = [np.asarray(g, dtype=float) for g in axis_grids]
        self.dim = self.values.ndim
        if len(self.grids) != self.dim:
            raise ValueError("one axis grid per dimension required")
        self.lo = np.array([g[0] for g in self.grids])
        self.hi = np.array([g[-1] for g in self.grids])
        self.h = np.array([g[1] - g[0] for g in self.grids])
        self._value_spline = ndimage.spline_filter(self.values, order=3)
        grads = np.gradient(self.values, *self.grids, edge_order=2)
        if self.dim == 1:
            grads = [grads]
        self._grad_fields = [np.asarray(g) for g in grads]
        self._grad_splines = [ndimage.spline_filter(g, order=3) for g in self._grad_fields]
        hess_fields = []
        for i in range(self.dim):
            row = np.gradient(self._grad_fields[i], *self.grids, edge_order=2)
            if self.dim == 1:
                row = [row]
            hess_fields.append([np.asarray(x) for x in row])
        self._hess_splines = [[ndimage.spline_filter(hess_fields[i][j], order=3)
                               for j in range(self.dim)] for i in range(self.dim)]
        self._check_convexity(hess_fields)

    def _check_convexity(self, hess_fields):
        H = np.stack([np.stack(row, axis=-1) for row in hess_fields], axis=-2)
        eig = np.linalg.eigvalsh(H.reshape(-1, self.dim, self.dim))
        if eig.min() <= 0:
            raise ConvexityError(
                f"sampled Hessian not positive-definite (min eig {eig.min():.3e})"
            )

    def _index_coords(self, x: np.ndarray) -> np.ndarray:
        return ((x - self.lo) / self.h).T

    def _interp(self, spline, x: np.ndarray) -> np.ndarray:
        coords = self._index_coords(x)
        return ndimage.map_coordinates(spline, coords, order=3, prefilter=False,
                                       mode="nearest")

    def value(self, x: np.ndarray) -> np.ndarray:
        return self._interp(self._value_spline, x)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return np.stack([self._interp(s, x) for s in self._grad_splines], axis=-1)

    def hess(self, x: np.ndarray) -> np.ndarray:
        rows = [np.stack([self._interp(self._hess_splines[i][j], x)
                          for j in range(self.dim)], axis=-1)
                for i in range(self.dim)]
        H = np.stack(rows, axis=-2)
        return 0.5 * (H + np.swapaxes(H, -1, -2))

    def clamp(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lo, self.hi)

    def near_boundary(self, x: np.ndarray, cells: float = 4.0) -> np.ndarray:
        # one-sided edge stencils and the spline boundary handling degrade a
        # few cells inward; flag that collar as outside the trusted image
        margin = cells * self.h
        return np.any((x <= self.lo + margin) | (x >= self.hi - margin), axis=-1)


# ---------------------------------------------------------------------------
# the transform
# ---------------------------------------------------------------------------

@dataclass
class LegendreResult:
    """Sampled conjugate with per-node diagnostics."""

    values: np.ndarray
    maximizers: np.ndarray
    boundary: np.ndarray
    grids: list = field(default_factory=list)
    subset: tuple = ()

    def interior_mask(self) -> np.ndarray:
        return ~self.boundary


def _batched_newton(phi, y: np.ndarray, x0: np.ndarray, tol: float, max_iter: int,
                    clamp=None) -> tuple[np.ndarray, np.ndarray]:
    """Solve grad phi(x) = y per row by damped Newton; returns (x, converged)."""
    x = x0.copy()
    for _ in range(max_iter):
        g = phi.grad(x) - y
        res = np.linalg.norm(g, axis=-1)
        active = res > tol
        if not np.any(active):
            break
        H = phi.hess(x[active])
        step = np.linalg.solve(H, g[active][..., None])[..., 0]
        x_new = x[active] - step
        if clamp is not None:
            x_new = clamp(x_new)
        x[active] = x_new
    g = phi.grad(x) - y
    return x, np.linalg.norm(g, axis=-1) <= max(tol, 1e-9) * (1.0 + np.abs(y).max())


def legendre_transform(phi, y_grids: list[np.ndarray], subset: tuple | None = None,
                       frozen_grids: list[np.ndarray] | None = None,
                       newton_tol: float = 1e-12, max_iter: int = 60) -> LegendreResult:
    """Convex conjugate sampled on the tensor grid of y_grids.

    Full transform: subset=None conjugates all variables of phi.  Partial
    transform: subset names the conjugated variable positions (0-based); the
    remaining variables range over frozen_grids and the result is sampled on
    the product (y-grid x frozen-grid), conjugation running only over the
    subset.
    """
    dim = phi.dim
    subset = tuple(range(dim)) if subset is None else tuple(sorted(subset))
    if len(y_grids) != len(subset):
        raise ValueError("one y grid per conjugated variable")
    rest = tuple(i for i in range(dim) if i not in subset)
    if rest and frozen_grids is None:
        raise ValueError("partial transform needs frozen_grids for the rest")
    frozen_grids = frozen_grids or []

    grids = list(y_grids) + list(frozen_grids)
    mesh = np.meshgrid(*grids, indexing="ij")
    shape = mesh[0].shape
    count = mesh[0].size
    y = np.stack([m.reshape(-1) for m in mesh[: len(subset)]], axis=-1)
    x_rest = (np.stack([m.reshape(-1) for m in mesh[len(subset):]], axis=-1)
              if rest else np.zeros((count, 0)))

    if not rest:
        full = _FullView(phi)
    else:
        full = _PartialView(phi, subset, rest, x_rest)

    x0 = full.initial_guess(y)
    clamp = phi.clamp if isinstance(phi, SampledConvex) else None
    if clamp is not None and rest:
        clamp = None  # partial transforms of sampled inputs clamp inside the view
    x_opt, converged = _batched_newton(full, y, x0, newton_tol, max_iter, clamp=clamp)

    values = np.einsum("ij,ij->i", x_opt, y) - full.value_at(x_opt)
    boundary = ~converged
    if isinstance(phi, SampledConvex):
        boundary |= full.near_boundary(x_opt)
    maximizers = x_opt
    return LegendreResult(
        values=values.reshape(shape),
        maximizers=maximizers.reshape(shape + (len(subset),)),
        boundary=boundary.reshape(shape),
        grids=grids,
        subset=subset,
    )


class _FullView:
    def __init__(self, phi):
        self.phi = phi

    def initial_guess(self, y):
        if isinstance(self.phi, QuadraticPotential):
            return y @ np.linalg.inv(self.phi.A)
        if isinstance(self.phi, QuadPlusTrig):
            return y @ np.linalg.inv(self.phi.Q)
        if isinstance(self.phi, SampledConvex):
            mid = 0.5 * (self.phi.lo + self.phi.hi)
            return np.broadcast_to(mid, y.shape).copy()
        return np.zeros_like(y)

    def grad(self, x):
        return self.phi.grad(x)

    def hess(self, x):
        return self.phi.hess(x)

    def value_at(self, x):
        return self.phi.value(x)

    def near_boundary(self, x):
        return self.phi.near_boundary(x)


class _PartialView:
    """View of phi as a function of the conjugated subset with the rest frozen
    per batch row."""

    def __init__(self, phi, subset, rest, x_rest):
        self.phi = phi
        self.subset = subset
        self.rest = rest
        self.x_rest = x_rest

    def _embed(self, x_sub):
        dim = self.phi.dim
        full = np.zeros(x_sub.shape[:-1] + (dim,))
        full[..., list(self.subset)] = x_sub
        full[..., list(self.rest)] = self.x_rest
        return full

    def initial_guess(self, y):
        if isinstance(self.phi, (QuadraticPotential, QuadPlusTrig)):
            A = self.phi.A if isinstance(self.phi, QuadraticPotential) else self.phi.Q
            sub = A[np.ix_(self.subset, self.subset)]
            cross = A[np.ix_(self.subset, self.rest)]
            rhs = y - self.x_rest @ cross.T
            return rhs @ np.linalg.inv(sub).T
        mid = 0.5 * (self.phi.lo[list(self.subset)] + self.phi.hi[list(self.subset)])
        return np.broadcast_to(mid, y.shape).copy()

    def grad(self, x_sub):
        return self.phi.grad(self._embed(x_sub))[..., list(self.subset)]

    def hess(self, x_sub):
        H = self.phi.hess(self._embed(x_sub))
        return H[..., list(self.subset), :][..., :, list(self.subset)]

    def value_at(self, x_sub):
        return self.phi.value(self._embed(x_sub))

    def near_boundary(self, x_sub):
        return self.phi.near_boundary(self._embed(x_sub))


class ConjugateFunction:
    """phi* as an evaluable potential (value/grad/hess through the envelope
    identities), enabling exact double transforms."""

    def __init__(self, phi, newton_tol: float = 1e-13, max_iter: int = 80):
        self.phi = phi
        self.dim = phi.dim
        self.newton_tol = newton_tol
        self.max_iter = max_iter

    def _maximizer(self, y: np.ndarray) -> np.ndarray:
        view = _FullView(self.phi)
        x0 = view.initial_guess(y)
        x, _ok = _batched_newton(view, y, x0, self.newton_tol, self.max_iter)
        return x

    def value(self, y: np.ndarray) -> np.ndarray:
        x = self._maximizer(y)
        return np.einsum("...i,...i->...", x, y) - self.phi.value(x)

    def grad(self, y: np.ndarray) -> np.ndarray:
        return self._maximizer(y)

    def hess(self, y: np.ndarray) -> np.ndarray:
        return np.linalg.inv(self.phi.hess(self._maximizer(y)))


# ---------------------------------------------------------------------------
# experiments: residual of the transform
# ---------------------------------------------------------------------------

def _fd_sigma2_box(values: np.ndarray, spacings: list[float]) -> np.ndarray:
    """sigma2 of the FD Hessian of a sampled function on a box (interior)."""
    dim = values.ndim
    if dim != 3:
        raise ValueError("sigma2 experiment expects three variables")
    h = spacings

    def d2(a, ax):
        out = np.zeros_like(a)
        sl = [slice(1, -1) if i == ax else slice(None) for i in range(dim)]
        up = [slice(2, None) if i == ax else slice(None) for i in range(dim)]
        dn = [slice(0, -2) if i == ax else slice(None) for i in range(dim)]
        out[tuple(sl)] = (a[tuple(up)] - 2 * a[tuple(sl)] + a[tuple(dn)]) / h[ax] ** 2
        return out

    def dm(a, ax1, ax2):
        out = np.zeros_like(a)
        sl = [slice(1, -1) if i in (ax1, ax2) else slice(None) for i in range(dim)]

        def sh(s1, s2):
            idx = []
            for i in range(dim):
                if i == ax1:
                    idx.append(slice(2, None) if s1 > 0 else slice(0, -2))
                elif i == ax2:
                    idx.append(slice(2, None) if s2 > 0 else slice(0, -2))
                else:
                    idx.append(slice(None))
            return a[tuple(idx)]

        out[tuple(sl)] = (sh(1, 1) - sh(1, -1) - sh(-1, 1) + sh(-1, -1)) / (4 * h[ax1] * h[ax2])
        return out

    H = {}
    for i in range(3):
        H[(i, i)] = d2(values, i)
    for i in range(3):
        for j in range(i + 1, 3):
            H[(i, j)] = dm(values, i, j)
    return (H[(0, 0)] * H[(1, 1)] + H[(0, 0)] * H[(2, 2)] + H[(1, 1)] * H[(2, 2)]
            - H[(0, 1)] ** 2 - H[(0, 2)] ** 2 - H[(1, 2)] ** 2)


@dataclass
class LegendreExperimentReport:
    """Residual statistics of the conjugated potential (measured, not asserted:
    the new-solution claim is an experiment here)."""

    subset: tuple
    residual_min: float
    residual_max: float
    residual_mean: float
    residual_std: float
    constancy_deviation: float
    closed_form: float | None
    interior_nodes: int
    notes: str = ""

    def as_dict(self) -> dict:
        return {
            "subset": list(self.subset),
            "residual_min": self.residual_min,
            "residual_max": self.residual_max,
            "residual_mean": self.residual_mean,
            "residual_std": self.residual_std,
            "constancy_deviation": self.constancy_deviation,
            "closed_form": self.closed_form,
            "interior_nodes": self.interior_nodes,
            "notes": self.notes,
        }


def legendre_experiment(phi, subset: tuple | None = None, n_y: int = 24,
                        margin: float = 0.75, box: float = 2.0) -> LegendreExperimentReport:
    """Conjugate a potential (fully or over a variable subset), evaluate the
    sigma2 residual of the transform on the interior of its grid, and report
    constancy statistics plus the quadratic closed form when applicable."""
    if isinstance(phi, SemiflatPotential):
        phi = QuadPlusTrig.from_semiflat(phi)
    dim = phi.dim
    subset = tuple(range(dim)) if subset is None else tuple(sorted(subset))
    rest = tuple(i for i in range(dim) if i not in subset)

    A = phi.A if isinstance(phi, QuadraticPotential) else phi.Q
    y_grids = []
    for pos, var in enumerate(subset):
        span = margin * float(np.abs(A[var]).sum()) * box
        y_grids.append(np.linspace(-span, span, n_y))
    frozen = [np.linspace(-box, box, n_y) for _ in rest] if rest else None
    result = legendre_transform(phi, y_grids, subset=None if not rest else subset,
                                frozen_grids=frozen)

    spacings = [float(g[1] - g[0]) for g in result.grids]
    res = _fd_sigma2_box(result.values, spacings)
    interior = np.zeros(res.shape, dtype=bool)
    interior[(slice(1, -1),) * res.ndim] = True
    interior &= ~result.boundary
    vals = res[interior]

    closed = None
    if isinstance(phi, QuadraticPotential) and np.allclose(A, np.diag(np.diag(A))):
        d = np.diag(A)
        if not rest:
            inv = 1.0 / d
            closed = float(inv[0] * inv[1] + inv[0] * inv[2] + inv[1] * inv[2])
        else:
            eig = np.array([(1.0 / d[i]) if i in subset else -d[i] for i in range(dim)])
            closed = float(eig[0] * eig[1] + eig[0] * eig[2] + eig[1] * eig[2])

    mean = float(vals.mean())
    return LegendreExperimentReport(
        subset=subset,
        residual_min=float(vals.min()),
        residual_max=float(vals.max()),
        residual_mean=mean,
        residual_std=float(vals.std()),
        constancy_deviation=float(np.abs(vals - mean).max()),
        closed_form=closed,
        interior_nodes=int(vals.size),
        notes="residual measured on the interior of the transform grid",
    )
