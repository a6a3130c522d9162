"""The Dirichlet form and the Sobolev-Bregman p-form of a finite model.

``E_p(u)`` is computed by three independent routes:

* the generator pairing ``<-L u, u^<p-1>>_m`` (:func:`ep_generator`);
* the explicit jump + killing breakdown (:func:`bd_form_p`);
* the ``t -> 0`` limit of the approximate forms built from the exact
  kernel of ``T_t`` (:func:`ep_approx`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import BeurlingDenyData, FiniteModel, decompose
from .scalar import bregman_F, signed_pow
from .semigroup import SpectralSemigroup, spectral_decompose

P_GUARD = 1e-6
SLACK = 1e-12


@dataclass(frozen=True)
class FormBreakdown:
    local: float
    jump: float
    kill: float

    @property
    def total(self) -> float:
        return self.local + self.jump + self.kill


def _check_p(p):
    if not p - 1.0 >= P_GUARD:
        raise ValueError(f"p must exceed 1 (by at least {P_GUARD}), got {p}")


def _vec(model_n: int, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (model_n,):
        raise ValueError(f"expected a function on {model_n} states, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise ValueError("state function must be finite")
    return u


def dirichlet_form(model: FiniteModel, u, v) -> float:
    """``-<L u, v>_m``."""
    u = _vec(model.n, u)
    v = _vec(model.n, v)
    return float(-np.sum(model.m * (model.L @ u) * v))


def energy(model: FiniteModel, u) -> float:
    return dirichlet_form(model, u, u)


def bd_form_p(bd: BeurlingDenyData, u, p: float) -> FormBreakdown:
    """Jump and killing parts of ``E_p``:

    ``jump = 1/2 sum_{i != j} (u_j - u_i)(u_j^<p-1> - u_i^<p-1>) J_ij``,
    ``kill = sum_i |u_i|^p kappa_i``; the local part is zero on finite spaces.
    """
    _check_p(p)
    u = _vec(bd.n, u)
    w = signed_pow(u, p - 1)
    du = u[None, :] - u[:, None]
    dw = w[None, :] - w[:, None]
    jump = 0.5 * float(np.sum(du * dw * bd.J))
    kill = float(np.sum(np.abs(u) ** p * bd.kappa))
    return FormBreakdown(0.0, jump, kill)


def bregman_jump(bd: BeurlingDenyData, u, p: float) -> float:
    """Jump part rewritten as ``(1/p) sum_{i != j} F_p(u_i, u_j) J_ij``."""
    _check_p(p)
    u = _vec(bd.n, u)
    F = bregman_F(p, u[:, None], u[None, :])
    return float(np.sum(F * bd.J)) / p


def ep_generator(model: FiniteModel, u, p: float) -> float:
    """``E_p(u) = <-L u, u^<p-1>>_m``."""
    _check_p(p)
    u = _vec(model.n, u)
    return float(-np.sum(model.m * (model.L @ u) * signed_pow(u, p - 1)))


@dataclass(frozen=True)
class ApproxForm:
    """Approximate form at time ``t`` by the direct and the symmetric route.

    ``jump`` and ``kill`` are the two terms of the symmetric rewriting; their
    sum is ``symmetric``.
    """

    t: float
    direct: float
    jump: float
    kill: float

    @property
    def symmetric(self) -> float:
        return self.jump + self.kill


def _semigroup(obj) -> SpectralSemigroup:
    return obj if isinstance(obj, SpectralSemigroup) else spectral_decompose(obj)


def ep_approx(model_or_sg, u, p: float, t: float) -> ApproxForm:
    """``E_p^(t)(u) = (1/t) <u - T_t u, u^<p-1>>_m`` and its kernel form

    ``1/(2t) sum_ij (u_i - u_j)(u_i^<p-1> - u_j^<p-1>) m_i P_ij
    + (1/t) sum_i m_i |u_i|^p (1 - (T_t 1)_i)``.
    """
    _check_p(p)
    if not t > 0:
        raise ValueError("t must be positive")
    sg = _semigroup(model_or_sg)
    m = sg.model.m
    u = _vec(sg.n, u)
    w = signed_pow(u, p - 1)
    direct = float(-np.sum(m * sg.increment(u, t) * w)) / t

    # off-diagonal entries of T_t equal those of T_t - I; expm1 keeps them accurate
    D = sg.kernel_increment(t)
    K = m[:, None] * D
    np.fill_diagonal(K, 0.0)
    du = u[:, None] - u[None, :]
    dw = w[:, None] - w[None, :]
    jump = float(np.sum(du * dw * K)) / (2.0 * t)
    deficiency = -D.sum(axis=1)
    kill = float(np.sum(m * np.abs(u) ** p * deficiency)) / t
    return ApproxForm(float(t), direct, jump, kill)


@dataclass(frozen=True)
class Comparability:
    lower: float
    middle: float
    upper: float

    @property
    def lower_margin(self) -> float:
        return self.middle - self.lower

    @property
    def upper_margin(self) -> float:
        return self.upper - self.middle

    @property
    def holds(self) -> bool:
        slack = SLACK * max(1.0, self.upper)
        return self.lower_margin >= -slack and self.upper_margin >= -slack


def comparability_check(model: FiniteModel, u, p: float) -> Comparability:
    """Bracket ``E_p(u)`` between ``4(p-1)/p^2 E(u^<p/2>)`` and ``2 E(u^<p/2>)``."""
    _check_p(p)
    u = _vec(model.n, u)
    e = energy(model, signed_pow(u, p / 2.0))
    return Comparability(4.0 * (p - 1.0) / p**2 * e, ep_generator(model, u, p), 2.0 * e)


@dataclass(frozen=True)
class DomainWitness:
    p: float
    energy_half_power: float
    ep: float

    @property
    def ratio(self) -> float | None:
        return self.ep / self.energy_half_power if self.energy_half_power > 0 else None

    @property
    def bracket(self) -> tuple[float, float]:
        return 4.0 * (self.p - 1.0) / self.p**2, 2.0


def ep_domain_witness(model: FiniteModel, u, p: float) -> DomainWitness:
    """Record ``E(u^<p/2>)`` and ``E_p(u)``; on finite spaces every function is
    in both domains, so the report documents the ratio only."""
    c = comparability_check(model, u, p)
    return DomainWitness(p, c.upper / 2.0, c.middle)


def breakdown_of(model: FiniteModel, u, p: float) -> FormBreakdown:
    return bd_form_p(decompose(model), u, p)
