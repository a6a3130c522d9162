"""Seeded random instances and the per-instance checks run in batches.

Every instance is a pure function of ``(seed, index)``, so a batch can be
evaluated in any order or in parallel and still reproduce bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .forms import bd_form_p, comparability_check, ep_approx, ep_generator
from .model import FiniteModel, decompose, random_model
from .semigroup import SpectralSemigroup, lp_norm, spectral_decompose

IDENTITY_RTOL = 1e-9
BRACKET_SLACK = 1e-12
MONOTONE_SLACK = 1e-12
CONVERGENCE_TS = (1e-1, 1e-2, 1e-3, 1e-4)
MONOTONE_TS = tuple(np.geomspace(1e-4, 10.0, 20))
RECOVERY_T = 1e-6


@dataclass(frozen=True, eq=False)
class Instance:
    index: int
    seed: int
    killing: bool
    model: FiniteModel
    u: np.ndarray

    @property
    def n(self) -> int:
        return self.model.n


def make_instance(seed: int, index: int, sizes=(2, 40), killing: bool | None = None) -> Instance:
    """Instance ``index`` of the batch ``seed``.

    Size is uniform on ``sizes`` (inclusive), edge density uniform on
    [0.3, 1] and ``u`` standard normal. With ``killing=None`` odd indices
    carry killing and even ones do not.
    """
    lo, hi = sizes
    if not 1 <= lo <= hi:
        raise ValueError("sizes must satisfy 1 <= lo <= hi")
    rng = np.random.default_rng([seed, index])
    n = int(rng.integers(lo, hi + 1))
    density = float(rng.uniform(0.3, 1.0))
    kill = bool(index % 2) if killing is None else bool(killing)
    model_seed = int(rng.integers(2**63))
    model = random_model(model_seed, n, density, kill)
    u = rng.standard_normal(n)
    return Instance(index, model_seed, kill, model, u)


def _rel(a: float, b: float) -> float:
    """``|a - b| / |b|``, falling back to ``|a - b|`` when ``b = 0``."""
    d = abs(a - b)
    return d / abs(b) if b != 0 else d


# ---------------------------------------------------------------------------
# forms


def identity_record(inst: Instance, p: float) -> dict:
    """Generator route against the breakdown, plus the comparability bracket."""
    bd = decompose(inst.model)
    br = bd_form_p(bd, inst.u, p)
    comp = comparability_check(inst.model, inst.u, p)
    ep = comp.middle
    residual = abs(ep - br.total) / (1.0 + abs(ep))
    slack = BRACKET_SLACK * max(1.0, comp.upper)
    return {
        "index": inst.index,
        "seed": inst.seed,
        "n": inst.n,
        "killing": inst.killing,
        "p": p,
        "ep": ep,
        "jump": br.jump,
        "kill": br.kill,
        "energy_half": comp.upper / 2.0,
        "lower_margin": comp.lower_margin,
        "upper_margin": comp.upper_margin,
        "identity_residual": residual,
        "identity_ok": residual <= IDENTITY_RTOL,
        "bracket_ok": comp.lower_margin >= -slack and comp.upper_margin >= -slack,
    }


def loglog_slope(ts, errors) -> float:
    """Least-squares slope of ``log(error)`` against ``log(t)``."""
    x = np.log(np.asarray(ts, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def approx_record(inst: Instance, p: float, sg: SpectralSemigroup | None = None) -> dict:
    """``t -> 0`` behaviour of the approximate forms on one instance.

    * slope of ``|E_p^(t) - E_p|`` over :data:`CONVERGENCE_TS`;
    * largest increase of ``E_2^(t)`` along :data:`MONOTONE_TS`;
    * relative errors of the two kernel terms of ``E_2^(t)`` at
      :data:`RECOVERY_T` against the jump and killing parts.
    """
    sg = spectral_decompose(inst.model) if sg is None else sg
    u = inst.u
    ep = ep_generator(inst.model, u, p)
    errs = [abs(ep_approx(sg, u, p, t).direct - ep) for t in CONVERGENCE_TS]
    slope = loglog_slope(CONVERGENCE_TS, errs) if min(errs) > 0 else math.nan

    e2 = [ep_approx(sg, u, 2.0, t).direct for t in MONOTONE_TS]
    increase = max(0.0, max(b - a for a, b in zip(e2, e2[1:])))
    scale = max(1.0, abs(e2[0]))

    small = ep_approx(sg, u, 2.0, RECOVERY_T)
    br = bd_form_p(decompose(inst.model), u, 2.0)
    return {
        "index": inst.index,
        "n": inst.n,
        "killing": inst.killing,
        "p": p,
        "ep": ep,
        "error_max_t": errs[0],
        "error_min_t": errs[-1],
        "slope": slope,
        "monotone_excess": increase / scale,
        "jump_rel_error": _rel(small.jump, br.jump),
        "kill_rel_error": _rel(small.kill, br.kill),
    }


# ---------------------------------------------------------------------------
# semigroup


SEMIGROUP_TS = (0.01, 0.1, 1.0, 10.0)
CONTRACTION_PS = (1.0, 1.5, 2.0, 3.0, math.inf)


def semigroup_record(inst: Instance, sg: SpectralSemigroup | None = None, ts=SEMIGROUP_TS) -> dict:
    """Worst violations of contraction, positivity, sub-Markov bounds,
    symmetry and the semigroup law (each scaled as in its tolerance)."""
    sg = spectral_decompose(inst.model) if sg is None else sg
    m, u = inst.model.m, inst.u
    rng = np.random.default_rng([inst.seed % 2**63, 1])
    v = rng.standard_normal(inst.n)
    pos = np.abs(u)
    ones = np.ones(inst.n)

    contraction = positivity = markov = symmetry = law = 0.0
    for t in ts:
        Tu = sg.apply(u, t)
        for p in CONTRACTION_PS:
            base = lp_norm(m, u, p)
            contraction = max(contraction, (lp_norm(m, Tu, p) - base) / max(base, 1e-300))
        positivity = max(positivity, float(-sg.apply(pos, t).min()))
        T1 = sg.apply(ones, t)
        markov = max(markov, float(T1.max()) - 1.0, float(-T1.min()))
        a = float(np.sum(m * Tu * v))
        b = float(np.sum(m * u * sg.apply(v, t)))
        symmetry = max(symmetry, abs(a - b) / max(1.0, abs(a), abs(b)))
        for s in ts:
            lhs = sg.apply(sg.apply(u, s), t)
            rhs = sg.apply(u, s + t)
            law = max(law, float(np.max(np.abs(lhs - rhs))) / max(1.0, float(np.max(np.abs(rhs)))))
    return {
        "index": inst.index,
        "n": inst.n,
        "killing": inst.killing,
        "contraction": contraction,
        "positivity": positivity,
        "sub_markov": markov,
        "symmetry": symmetry,
        "semigroup_law": law,
    }


def _mass_difference(m, a, b, d, p: float) -> float:
    """``||a||_p^p - ||b||_p^p`` given the exact difference ``d = a - b``."""
    same = (np.sign(a) == np.sign(b)) & (b != 0)
    bs = np.where(same, np.abs(b), 1.0)
    ratio = np.where(same, np.sign(b) * d / bs, 0.0)
    with np.errstate(invalid="ignore"):
        near = bs**p * np.expm1(p * np.log1p(ratio))
    far = np.abs(a) ** p - np.abs(b) ** p
    return float(np.sum(m * np.where(same, near, far)))


def derivative_record(inst: Instance, p: float, t: float, sg: SpectralSemigroup | None = None) -> dict:
    """Central difference of ``t -> ||T_t u||_p^p`` (step ``1e-5 t``) against
    ``-p E_p(T_t u)``."""
    sg = spectral_decompose(inst.model) if sg is None else sg
    m = inst.model.m
    dt = 1e-5 * t
    # the two masses agree to ~1e-5; form their difference without cancellation
    a, b = sg.apply(inst.u, t + dt), sg.apply(inst.u, t - dt)
    fd = _mass_difference(m, a, b, sg.difference(inst.u, t + dt, t - dt), p) / (2.0 * dt)
    exact = -p * ep_generator(inst.model, sg.apply(inst.u, t), p)
    return {"index": inst.index, "n": inst.n, "p": p, "t": t, "finite_difference": fd, "exact": exact,
            "rel_error": _rel(fd, exact)}
