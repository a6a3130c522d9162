"""Scalar kernels: signed powers, the Bregman divergence and the truncated
power functions used by the key two-point bound.

Every function accepts scalars or numpy arrays and broadcasts; scalar
inputs give Python floats back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KEY_CONSTANT = 180.0


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def signed_pow(s, alpha):
    """Odd power ``|s|**alpha * sign(s)``.

    ``alpha == 0`` gives ``sign(s)``; ``signed_pow(0, alpha) == 0`` for every
    ``alpha``.
    """
    s = np.asarray(s, dtype=float)
    if np.any(np.asarray(alpha) < 0):
        raise ValueError("alpha must be nonnegative")
    # np.power is exact for alpha == 1, which keeps the p = 2 routes identical
    return _out(np.power(np.abs(s), alpha) * np.sign(s))


def signed_pow_diff(t, s, alpha):
    """``signed_pow(t, alpha) - signed_pow(s, alpha)`` without cancellation.

    When ``s`` and ``t`` share a sign and are within a factor of two of each
    other the difference is formed as ``|s|**alpha * expm1(alpha*log1p(r))``
    with ``r`` the exact relative gap.
    """
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    t, s = np.broadcast_arrays(t, s)
    plain = np.power(np.abs(t), alpha) * np.sign(t) - np.power(np.abs(s), alpha) * np.sign(s)

    at, as_ = np.abs(t), np.abs(s)
    lo = np.minimum(at, as_)
    hi = np.maximum(at, as_)
    close = (np.sign(t) == np.sign(s)) & (lo > 0) & (hi <= 2.0 * lo)
    if not np.any(close):
        return _out(plain)
    with np.errstate(divide="ignore", invalid="ignore"):
        gap = np.where(close, (hi - lo) / np.where(close, lo, 1.0), 0.0)
        mag = np.power(np.where(close, lo, 1.0), alpha) * np.expm1(alpha * np.log1p(gap))
    # orientation: positive when |t| > |s| on the positive axis
    orient = np.where(at >= as_, 1.0, -1.0) * np.sign(t)
    return _out(np.where(close, orient * mag, plain))


def bregman_F(p, xi, eta):
    """Bregman divergence of ``|.|**p``:
    ``|eta|^p - |xi|^p - p * xi^<p-1> * (eta - xi)``."""
    if p <= 1:
        raise ValueError("p must exceed 1")
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    val = np.abs(eta) ** p - np.abs(xi) ** p - p * signed_pow(xi, p - 1) * (eta - xi)
    return _out(val)


@dataclass(frozen=True)
class LemmaParams:
    """Exponent ``alpha`` in (0, 2) and truncation level ``n >= 2``."""

    alpha: float
    n: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not self.n >= 2.0:
            raise ValueError(f"n must be at least 2, got {self.n}")

    @property
    def reduced_alpha(self) -> float:
        return min(self.alpha, 2.0 - self.alpha)

    @property
    def epsilon(self) -> float:
        """Small-jump constant ``8 * n**(-min(alpha, 2 - alpha))``."""
        return 8.0 * self.n ** (-self.reduced_alpha)

    @property
    def c(self) -> float:
        return KEY_CONSTANT


def phi(alpha, s):
    return signed_pow(s, alpha)


def truncated_power(alpha, n, s):
    """``s`` on ``|s| < 1``, ``s^<alpha>`` on ``1 <= |s| < n^4``, constant
    ``n^(4 alpha) sign s`` beyond."""
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    top = float(n) ** 4
    # clipping at n^4 makes the constant branch n^(4 alpha) bitwise equal to
    # the power branch evaluated at the breakpoint
    val = np.where(a < 1.0, s, np.power(np.clip(a, 1.0, top), alpha) * np.sign(s))
    return _out(val)


def truncated_power_diff(alpha, n, t, s):
    """``truncated_power(t) - truncated_power(s)``, accurate in the power branch."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    t, s = np.broadcast_arrays(t, s)
    top = float(n) ** 4
    plain = np.asarray(truncated_power(alpha, n, t) - truncated_power(alpha, n, s))
    both_mid = (np.abs(t) >= 1.0) & (np.abs(t) <= top) & (np.abs(s) >= 1.0) & (np.abs(s) <= top)
    if not np.any(both_mid):
        return _out(plain)
    return _out(np.where(both_mid, signed_pow_diff(t, s, alpha), plain))


def phi_n(params: LemmaParams, s):
    return truncated_power(params.alpha, params.n, s)


def psi_n(n, s):
    """Piecewise linear: identity on ``|s| < n``, flat at ``n sign s`` until
    ``n^3``, then slope one again."""
    s = np.asarray(s, dtype=float)
    n = float(n)
    a = np.abs(s)
    val = np.where(
        a < n,
        s,
        np.where(a < n**3, n * np.sign(s), s - (n**3 - n) * np.sign(s)),
    )
    return _out(val)
