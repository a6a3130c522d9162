"""Exact semigroups ``T_t = exp(tL)`` of m-symmetric generators.

The symmetrised generator ``S = M^{1/2} L M^{-1/2}`` is diagonalised once by
cyclic Jacobi rotations; every ``T_t``, the ``t -> inf`` projection and the
spectral gap are then read off the decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import FiniteModel, InvalidModelError, validate_model

MAX_SWEEPS = 100
JACOBI_TOL = 1e-12
ZERO_EIG_RTOL = 1e-10


class EigenConvergenceError(RuntimeError):
    def __init__(self, residual: float, sweeps: int):
        self.residual = residual
        self.sweeps = sweeps
        super().__init__(f"Jacobi iteration stalled after {sweeps} sweeps, off-diagonal norm {residual:.3e}")


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings of a round-robin tournament; each round is a set of disjoint
    index pairs and the rounds together cover every pair once."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    k = len(players)
    rounds = []
    for _ in range(k - 1):
        pairs = [(players[i], players[k - 1 - i]) for i in range(k // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a >= 0 and b >= 0]
        if pairs:
            p, q = np.array(pairs).T
            rounds.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(A, tol: float = JACOBI_TOL, max_sweeps: int = MAX_SWEEPS):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi.

    Rotations within one round of the round-robin ordering act on disjoint
    index pairs and are applied together. Iteration stops once the
    off-diagonal Frobenius norm is at most ``tol * ||A||_F``.

    Returns
    -------
    w : ndarray
        Eigenvalues in ascending order.
    V : ndarray
        Orthonormal eigenvectors as columns.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    scale = np.linalg.norm(A)
    rounds = _round_robin(n)

    offdiag = ~np.eye(n, dtype=bool)

    def off_norm():
        return float(np.linalg.norm(A[offdiag]))

    sweeps = 0
    while off_norm() > tol * scale:
        if sweeps == max_sweeps:
            raise EigenConvergenceError(off_norm(), sweeps)
        for p, q in rounds:
            apq = A[p, q]
            active = apq != 0.0
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            with np.errstate(over="ignore"):
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
            # hypot avoids overflow of theta**2 for tiny apq
            t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
            t = np.where(theta == 0.0, 1.0, t)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            # A <- R^T A R with R[p,p] = R[q,q] = c, R[p,q] = s, R[q,p] = -s
            Ap, Aq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[q, :] = s[:, None] * Ap + c[:, None] * Aq
            Ap, Aq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = Ap * c - Aq * s
            A[:, q] = Ap * s + Aq * c
            A[p, q] = 0.0
            A[q, p] = 0.0
            Vp, Vq = V[:, p].copy(), V[:, q].copy()
            V[:, p] = Vp * c - Vq * s
            V[:, q] = Vp * s + Vq * c
        sweeps += 1
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


@dataclass(frozen=True, eq=False)
class SpectralSemigroup:
    """``T_t u = W diag(exp(lambda t)) W^T M u`` with ``W^T M W = I``."""

    model: FiniteModel
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.model.n

    @property
    def zero_threshold(self) -> float:
        radius = float(np.max(np.abs(self.eigenvalues))) if self.n else 0.0
        return ZERO_EIG_RTOL * max(1.0, radius)

    @property
    def harmonic(self) -> np.ndarray:
        return np.abs(self.eigenvalues) <= self.zero_threshold

    @property
    def gap(self) -> float:
        """Smallest nonzero ``|lambda|``; 0 if the spectrum is all zero."""
        nonzero = np.abs(self.eigenvalues[~self.harmonic])
        return float(nonzero.min()) if nonzero.size else 0.0

    def coefficients(self, u) -> np.ndarray:
        return self.eigenvectors.T @ (self.model.m * np.asarray(u, dtype=float))

    def _check_t(self, t):
        if np.any(np.asarray(t) < 0):
            raise ValueError("t must be nonnegative")

    def apply(self, u, t) -> np.ndarray:
        """``T_t u``; for an array of times the result has one column per time."""
        self._check_t(t)
        c = self.coefficients(u)
        t = np.asarray(t, dtype=float)
        u = np.asarray(u, dtype=float)
        # T_0 is the identity; return u itself rather than its reconstruction
        if t.ndim == 0:
            return u.copy() if t == 0 else self.eigenvectors @ (np.exp(self.eigenvalues * t) * c)
        out = self.eigenvectors @ (np.exp(np.outer(self.eigenvalues, t)) * c[:, None])
        out[:, t == 0] = u[:, None]
        return out

    def increment(self, u, t) -> np.ndarray:
        """``T_t u - u`` computed through ``expm1``, accurate for small ``t``."""
        self._check_t(t)
        c = self.coefficients(u)
        return self.eigenvectors @ (np.expm1(self.eigenvalues * float(t)) * c)

    def difference(self, u, t1: float, t0: float) -> np.ndarray:
        """``T_t1 u - T_t0 u`` without cancellation, via ``expm1``."""
        self._check_t([t0, t1])
        c = self.coefficients(u)
        lam = self.eigenvalues
        return self.eigenvectors @ (np.exp(lam * float(t0)) * np.expm1(lam * (float(t1) - float(t0))) * c)

    def kernel(self, t: float) -> np.ndarray:
        """Transition matrix ``P[i, j] = (T_t)_{ij}``, so ``T_t u = P @ u``."""
        self._check_t(t)
        W = self.eigenvectors
        return (W * np.exp(self.eigenvalues * float(t))) @ (W.T * self.model.m)

    def kernel_increment(self, t: float) -> np.ndarray:
        """``T_t - I`` as a matrix, via ``expm1``."""
        self._check_t(t)
        W = self.eigenvectors
        return (W * np.expm1(self.eigenvalues * float(t))) @ (W.T * self.model.m)

    def limit(self, u) -> np.ndarray:
        c = self.coefficients(u)
        return self.eigenvectors @ np.where(self.harmonic, c, 0.0)

    def generator(self) -> np.ndarray:
        W = self.eigenvectors
        return (W * self.eigenvalues) @ (W.T * self.model.m)


def spectral_decompose(model: FiniteModel, method: str = "jacobi") -> SpectralSemigroup:
    """Diagonalise the m-symmetrised generator of a valid model.

    ``method="eigh"`` swaps the Jacobi solver for LAPACK (used as a cross-check).
    """
    report = validate_model(model)
    if not report.passed:
        raise InvalidModelError(report)
    r = np.sqrt(model.m)
    S = r[:, None] * model.L / r[None, :]
    S = 0.5 * (S + S.T)
    if method == "jacobi":
        w, Q = jacobi_eigh(S)
    elif method == "eigh":
        w, Q = np.linalg.eigh(S)
    else:
        raise ValueError(f"unknown method {method!r}")
    w = np.minimum(w, 0.0)
    W = Q / r[:, None]
    W.setflags(write=False)
    w.setflags(write=False)
    return SpectralSemigroup(model, w, W)


def apply_Tt(sg: SpectralSemigroup, u, t: float) -> np.ndarray:
    return sg.apply(u, t)


def limit_infinity(sg: SpectralSemigroup, u) -> np.ndarray:
    """m-orthogonal projection of ``u`` onto the null space of the generator."""
    return sg.limit(u)


def lp_norm(m, u, p: float) -> float:
    """Weighted norm ``(sum m_i |u_i|^p)^(1/p)``; ``p = inf`` gives ``max |u_i|``."""
    u = np.abs(np.asarray(u, dtype=float))
    if p == np.inf:
        return float(u.max()) if u.size else 0.0
    if p < 1:
        raise ValueError("p must be at least 1")
    top = float(u.max()) if u.size else 0.0
    if top == 0.0:
        return 0.0
    # scaling by the largest entry avoids under- and overflow of u**p
    return top * float(np.sum(np.asarray(m) * (u / top) ** p) ** (1.0 / p))


def lp_mass(m, u, p: float) -> float:
    """``||u||_p^p``."""
    return float(np.sum(np.asarray(m) * np.abs(np.asarray(u, dtype=float)) ** p))
