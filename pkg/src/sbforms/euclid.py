"""One-dimensional grid models of diffusion and fractional generators.

Grid models are ordinary :class:`~sbforms.model.FiniteModel` objects with
cell-centre nodes and measure ``m_i = h``, so every finite-state routine
applies to them verbatim. The continuum p-form of a smooth function is
computed separately by composite Gauss-Legendre quadrature, and
:func:`local_constant_study` compares the two as ``h -> 0``.

Grid results are statements about discrete forms of smooth test functions.
They say nothing about which rough functions lie in the continuum domain.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import gamma

from .forms import FormBreakdown, _check_p, energy, ep_generator
from .model import BeurlingDenyData, FiniteModel, assemble
from .scalar import signed_pow

BOUNDARIES = ("periodic", "dirichlet-exterior")
GAUSS_POINTS = 8
CUTOFF_PANELS = 10

_GL_X, _GL_W = np.polynomial.legendre.leggauss(GAUSS_POINTS)


class SingularIntegrandError(ValueError):
    """``|u|^(p-2)`` blows up at a zero of ``u`` where ``u'`` does not vanish."""

    def __init__(self, x: float, p: float):
        self.x = x
        self.p = p
        super().__init__(f"|u|^(p-2) is singular at x = {x!r} (u = 0, u' != 0, p = {p})")


@dataclass(frozen=True)
class Grid1D:
    a: float
    b: float
    N: int
    boundary: str = "periodic"

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError("N must be an integer >= 2")
        if not self.b > self.a:
            raise ValueError("need a < b")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.N

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def nodes(self) -> np.ndarray:
        return self.a + (np.arange(self.N) + 0.5) * self.h

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"

    def distances(self) -> np.ndarray:
        """Pairwise node distances; nearest image on a periodic grid."""
        x = self.nodes
        d = np.abs(x[:, None] - x[None, :])
        if self.periodic:
            d = np.minimum(d, self.length - d)
        return d


@dataclass(frozen=True)
class EuclideanSpec:
    """Coefficients of a one-dimensional form on ``domain``.

    ``nu`` is the diffusion coefficient ``a(x)``, ``jump_density`` a symmetric
    kernel ``J(x, y)`` and ``kill_density`` a killing density ``k(x)``; any of
    them may be ``None``. All callables must accept numpy arrays.
    ``jump_moment(x, r_left, r_right)``, when given, returns
    ``int (y - x)^2 J(x, y) dy`` over ``x - r_left < y < x + r_right``;
    otherwise it is integrated numerically.
    """

    p: float = 2.0
    nu: Callable | None = None
    jump_density: Callable | None = None
    kill_density: Callable | None = None
    domain: tuple[float, float] = (0.0, 2.0 * math.pi)
    jump_moment: Callable | None = None


def fractional_constant(s: float) -> float:
    """``c_{1,s} = 4^s s Gamma(s + 1/2) / (sqrt(pi) Gamma(1 - s))``."""
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie in (0, 1)")
    return 4.0**s * s * gamma(s + 0.5) / (math.sqrt(math.pi) * gamma(1.0 - s))


def fractional_spec(s: float, p: float, domain=(0.0, 1.0)) -> EuclideanSpec:
    """Pure-jump spec of the fractional Laplacian restricted to ``domain``,
    with the exterior interaction as killing density."""
    c = fractional_constant(s)
    a, b = domain

    def kernel(x, y):
        with np.errstate(divide="ignore"):
            return c * np.abs(x - y) ** (-1.0 - 2.0 * s)

    def kill(x):
        return c * ((x - a) ** (-2.0 * s) + (b - x) ** (-2.0 * s)) / (2.0 * s)

    def moment(x, r_left, r_right):
        return c * (r_left ** (2.0 - 2.0 * s) + r_right ** (2.0 - 2.0 * s)) / (2.0 - 2.0 * s)

    return EuclideanSpec(p=p, jump_density=kernel, kill_density=kill, domain=(a, b), jump_moment=moment)


def _sample_nonneg(fn, x, name):
    """Evaluate ``fn(x)`` (or take ``fn`` as values when ``x`` is None) and
    reject negative or non-finite samples."""
    if x is None:
        v = np.array(fn, dtype=float)
        x = np.zeros(v.shape)
    else:
        v = np.broadcast_to(np.asarray(fn(x), dtype=float), np.shape(x)).copy()
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} is not finite on the grid")
    if np.any(v < 0):
        i = int(np.argmin(v))
        raise ValueError(f"{name} is negative at x = {float(np.ravel(x)[i])!r}")
    return v


def _diffusion_parts(grid: Grid1D, nu) -> tuple[np.ndarray, np.ndarray]:
    """Face weights ``a_{i+1/2}/h`` as a jump matrix, and boundary killing."""
    n, h = grid.N, grid.h
    x = grid.nodes
    J = np.zeros((n, n))
    kappa = np.zeros(n)
    if nu is None:
        return J, kappa
    ax = _sample_nonneg(nu, x, "diffusion coefficient")
    i = np.arange(n - 1)
    face = 0.5 * (ax[i] + ax[i + 1]) / h
    np.add.at(J, (i, i + 1), face)
    if grid.periodic:
        J[n - 1, 0] += 0.5 * (ax[n - 1] + ax[0]) / h
    else:
        # u vanishes outside: the half cell to the wall carries flux 2a/h
        ab = _sample_nonneg(nu, np.array([grid.a, grid.b]), "diffusion coefficient")
        kappa[0] += 2.0 * ab[0] / h
        kappa[-1] += 2.0 * ab[1] / h
    return J + J.T, kappa


def _finish(grid: Grid1D, J, kappa) -> FiniteModel:
    J = 0.5 * (J + J.T)
    np.fill_diagonal(J, 0.0)
    return assemble(BeurlingDenyData(J, kappa), np.full(grid.N, grid.h))


def build_diffusion(grid: Grid1D, spec: EuclideanSpec) -> FiniteModel:
    """Three-point divergence-form discretisation of ``(a u')'`` with
    arithmetic face means, ``m_i = h``.

    ``jump_density`` and ``kill_density`` of ``spec``, if present, are added
    as ``h^2 J(x_i, x_j)`` and ``h k(x_i)``.
    """
    J, kappa = _diffusion_parts(grid, spec.nu)
    x, h = grid.nodes, grid.h
    if spec.jump_density is not None:
        off = ~np.eye(grid.N, dtype=bool)
        X, Y = np.meshgrid(x, x, indexing="ij")
        if grid.periodic:
            # nearest image of y as seen from x
            Y = Y + grid.length * np.round((X - Y) / grid.length)
        K = np.zeros_like(J)
        K[off] = _sample_nonneg(spec.jump_density(X[off], Y[off]), None, "jump density")
        J = J + h * h * K
    if spec.kill_density is not None:
        kappa = kappa + h * _sample_nonneg(spec.kill_density, x, "killing density")
    return _finish(grid, J, kappa)


def build_fractional(grid: Grid1D, s: float) -> FiniteModel:
    """Cell-centre discretisation of the fractional Laplacian of order ``s``.

    ``J_ij = c_{1,s} |x_i - x_j|^(-1-2s) h^2`` off the diagonal (nearest-image
    distance on a periodic grid). Under ``dirichlet-exterior`` the interaction
    with the complement of ``[a, b]`` becomes the killing
    ``kappa_i = h c_{1,s} ((x_i - a)^(-2s) + (b - x_i)^(-2s)) / (2s)``.
    """
    c = fractional_constant(s)
    h = grid.h
    d = grid.distances()
    J = np.zeros_like(d)
    off = ~np.eye(grid.N, dtype=bool)
    J[off] = c * d[off] ** (-1.0 - 2.0 * s) * h * h
    if grid.periodic:
        kappa = np.zeros(grid.N)
    else:
        x = grid.nodes
        kappa = h * c * ((x - grid.a) ** (-2.0 * s) + (grid.b - x) ** (-2.0 * s)) / (2.0 * s)
    return _finish(grid, J, kappa)


# ---------------------------------------------------------------------------
# continuum quadrature


def gauss_legendre(a: float, b: float, panels: int, grading: float = 1.0):
    """Composite 8-point Gauss-Legendre nodes and weights on ``[a, b]``.

    ``grading > 1`` clusters the panel breakpoints towards ``a`` as
    ``a + (b - a) (k / panels)^grading``.
    """
    if panels < 1:
        raise ValueError("panels must be positive")
    edges = a + (b - a) * (np.arange(panels + 1) / panels) ** grading
    lo, hi = edges[:-1, None], edges[1:, None]
    x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * _GL_X[None, :]
    w = 0.5 * (hi - lo) * _GL_W[None, :]
    return x.ravel(), w.ravel()


def _local_weight(u, du, p, x):
    """``(p - 1) |u|^(p-2) u'^2`` at ``x``, raising at a genuine singularity."""
    ux, dux = u(x), du(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = (p - 1.0) * np.abs(ux) ** (p - 2.0) * dux**2
    bad = ~np.isfinite(g)
    if np.any(bad & (dux != 0)):
        raise SingularIntegrandError(float(x[np.flatnonzero(bad & (dux != 0))[0]]), p)
    if p < 2.0:
        # a zero strictly between two nodes is singular just the same
        flips = np.flatnonzero(np.sign(ux[:-1]) * np.sign(ux[1:]) < 0)
        if flips.size:
            raise SingularIntegrandError(float(x[flips[0]]), p)
    return np.where(bad, 0.0, g)


def _numeric_moment(kernel, x, r_left, r_right, points: int = 64):
    # r = R w^3 tames the r^(1-2s) singularity of stable-like kernels at r = 0
    w, wt = np.polynomial.legendre.leggauss(points)
    w = 0.5 * (w + 1.0)
    wt = 0.5 * wt
    out = np.zeros_like(x)
    for R, sgn in ((r_left, -1.0), (r_right, 1.0)):
        r = R[:, None] * w[None, :] ** 3
        jac = 3.0 * R[:, None] * w[None, :] ** 2
        vals = r**2 * kernel(x[:, None], x[:, None] + sgn * r) * jac
        out += np.sum(np.where(r > 0, vals, 0.0) * wt[None, :], axis=1)
    return out


def continuum_ep(spec: EuclideanSpec, u, du, quad_N: int = 64, cutoff: float | None = None) -> FormBreakdown:
    """Local, jump and killing parts of ``E_p(u)`` for a smooth ``u`` on ``spec.domain``.

    Parameters
    ----------
    u, du : callable
        The function and its derivative, vectorised.
    quad_N : int
        Panels of the composite 8-point Gauss-Legendre rule.
    cutoff : float, optional
        Half-width ``delta`` of the excluded diagonal strip of the double
        integral, by default ten panel widths. Inside the strip the jump
        integrand is replaced by its leading Taylor term
        ``(p - 1) |u|^(p-2) u'(x)^2 (y - x)^2``.

    Notes
    -----
    The jump part couples points of ``domain`` only; interaction with the
    outside must be supplied as ``kill_density``.
    """
    p = spec.p
    _check_p(p)
    a, b = spec.domain
    x, w = gauss_legendre(a, b, quad_N)

    local = 0.0
    if spec.nu is not None:
        ax = _sample_nonneg(spec.nu, x, "diffusion coefficient")
        local = float(np.sum(w * ax * _local_weight(u, du, p, x)))

    kill = 0.0
    if spec.kill_density is not None:
        kill = float(np.sum(w * np.abs(u(x)) ** p * _sample_nonneg(spec.kill_density, x, "killing density")))

    jump = 0.0
    if spec.jump_density is not None:
        delta = CUTOFF_PANELS * (b - a) / quad_N if cutoff is None else float(cutoff)
        r_left = np.clip(x - a, 0.0, delta)
        r_right = np.clip(b - x, 0.0, delta)
        if spec.jump_moment is not None:
            moment = spec.jump_moment(x, r_left, r_right)
        else:
            moment = _numeric_moment(spec.jump_density, x, r_left, r_right)
        near = 0.5 * float(np.sum(w * _local_weight(u, du, p, x) * moment))

        far = 0.0
        ux = u(x)
        wx = signed_pow(ux, p - 1.0)
        t, tw = gauss_legendre(0.0, 1.0, quad_N, grading=2.0)
        for xi, wi, ui, vi in zip(x, w, ux, wx):
            for length, sgn in ((xi - delta - a, -1.0), (b - xi - delta, 1.0)):
                if length <= 0:
                    continue
                # graded towards the cutoff, where the kernel varies fastest
                y = xi + sgn * (delta + length * t)
                uy = u(y)
                f = (uy - ui) * (signed_pow(uy, p - 1.0) - vi) * spec.jump_density(xi, y)
                far += wi * length * float(np.sum(tw * f))
        jump = float(near + 0.5 * far)
    return FormBreakdown(local, jump, kill)


# ---------------------------------------------------------------------------
# energy measure


@dataclass(frozen=True)
class EnergyMeasureDensity:
    """Density ``2 a(x) v'(x)^2`` of the energy measure of ``v`` on the nodes."""

    grid: Grid1D
    density: np.ndarray

    def total(self) -> float:
        if self.grid.periodic:
            return float(self.grid.h * np.sum(self.density))
        return float(trapezoid(self.density, self.grid.nodes))

    def integrate(self, weight) -> float:
        """``sum_i weight_i density_i h``."""
        return float(self.grid.h * np.sum(np.asarray(weight) * self.density))


def _gradient(grid: Grid1D, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (grid.N,):
        raise ValueError(f"expected {grid.N} nodal values, got shape {v.shape}")
    if grid.periodic:
        return (np.roll(v, -1) - np.roll(v, 1)) / (2.0 * grid.h)
    return np.gradient(v, grid.h, edge_order=2)


def energy_measure(grid: Grid1D, spec: EuclideanSpec, v) -> EnergyMeasureDensity:
    """Energy-measure density from central differences of nodal values ``v``."""
    if spec.nu is None:
        raise ValueError("energy measure needs a diffusion coefficient")
    ax = _sample_nonneg(spec.nu, grid.nodes, "diffusion coefficient")
    return EnergyMeasureDensity(grid, 2.0 * ax * _gradient(grid, v) ** 2)


@dataclass(frozen=True)
class LeJanCheck:
    measure_side: float
    direct_side: float

    @property
    def difference(self) -> float:
        return abs(self.measure_side - self.direct_side)


def local_bilinear(grid: Grid1D, spec: EuclideanSpec, f, g) -> float:
    """Discrete ``E^loc(f, g)`` of the diffusion part, boundary flux included."""
    J, kappa = _diffusion_parts(grid, spec.nu)
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    df = f[None, :] - f[:, None]
    dg = g[None, :] - g[:, None]
    return 0.5 * float(np.sum(J * df * dg)) + float(np.sum(kappa * f * g))


def lejan_check(grid: Grid1D, spec: EuclideanSpec, v, phi, dphi, psi=None, dpsi=None) -> LeJanCheck:
    """Compare ``1/2 sum phi'(v) psi'(v) dmu_v`` with ``E^loc(phi(v), psi(v))``.

    ``psi`` defaults to ``phi``. Agreement is up to ``O(h)`` for Lipschitz
    ``phi``, ``psi`` vanishing at 0.
    """
    psi = phi if psi is None else psi
    dpsi = dphi if dpsi is None else dpsi
    v = np.asarray(v, dtype=float)
    mu = energy_measure(grid, spec, v)
    lhs = 0.5 * mu.integrate(dphi(v) * dpsi(v))
    return LeJanCheck(lhs, local_bilinear(grid, spec, phi(v), psi(v)))


# ---------------------------------------------------------------------------
# convergence study


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    h: float
    discrete_value: float
    continuum_value: float
    error: float
    observed_order: float
    half_power_value: float

    FIELDS = ("N", "h", "discrete_value", "continuum_value", "error", "observed_order", "half_power_value")

    def record(self) -> dict:
        return {k: getattr(self, k) for k in self.FIELDS}


def _discrete_pair(N, a, b, spec, u, p):
    grid = Grid1D(a, b, N, "periodic")
    x = grid.nodes
    ux = np.asarray(u(x), dtype=float)
    if not np.all(ux > 0):
        raise ValueError("u must be strictly positive on the grid")
    model = build_diffusion(grid, spec)
    half = 4.0 * (p - 1.0) / p**2 * energy(model, ux ** (p / 2.0))
    return grid.h, ep_generator(model, ux, p), half


def local_constant_study(
    u,
    du,
    p: float,
    grids,
    nu=None,
    domain=(0.0, 2.0 * math.pi),
    target: float | None = None,
    quad_N: int = 256,
    workers: int = 1,
) -> list[ConvergenceRow]:
    """Discrete ``E_p(u)`` of periodic diffusion grids against the continuum value.

    The continuum value ``(p - 1) int a |u|^(p-2) u'^2`` is computed by
    :func:`continuum_ep` unless ``target`` is given. ``half_power_value`` is
    the independent discrete route ``4(p-1)/p^2 E(u^(p/2))``. The observed
    order between consecutive rows is ``log(e_prev / e) / log(h_prev / h)``.
    """
    _check_p(p)
    grids = [int(N) for N in grids]
    if not grids:
        raise ValueError("need at least one grid")
    nu = (lambda x: np.ones_like(x)) if nu is None else nu
    spec = EuclideanSpec(p=p, nu=nu, domain=tuple(domain))
    a, b = domain
    xs = np.linspace(a, b, 1001)
    if not np.all(np.asarray(u(xs)) > 0):
        raise ValueError("u must be strictly positive on the domain")
    if target is None:
        target = continuum_ep(spec, u, du, quad_N).local

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(lambda N: _discrete_pair(N, a, b, spec, u, p), grids))

    rows = []
    prev = None
    for N, (h, disc, half) in zip(grids, results):
        err = abs(disc - target)
        order = math.nan
        if prev is not None and prev[1] > 0 and err > 0 and prev[0] != h:
            order = math.log(prev[1] / err) / math.log(prev[0] / h)
        rows.append(ConvergenceRow(N, h, disc, target, err, order, half))
        prev = (h, err)
    return rows
