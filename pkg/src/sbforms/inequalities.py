"""Executable forms of Stroock's two-sided inequality and of the key bound
comparing truncated and untruncated power products, plus seeded sweeps.

All array functions are vectorised over samples; the single-sample entry
points (`stroock_check`, `key_bound_residual`, `classify_region`,
`region_bound_check`) wrap them.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .scalar import KEY_CONSTANT, LemmaParams, psi_n, signed_pow_diff, truncated_power_diff

REGIONS = ("A", "B", "C", "D", "E", "F", "G")
DISTRIBUTIONS = ("uniform-box", "heavy-tail", "breakpoint-focused")

# Per-region multipliers of Psi_n; region C is bounded by 8 n^-alpha (t-s)^2 instead.
REGION_PSI_CONSTANT = {"A": 3.0, "B": 4.0, "D": 180.0, "E": 0.0, "F": 36.0, "G": 4.0}
REGION_C_CONSTANT = 8.0

SLACK = 1e-12


@dataclass(frozen=True)
class LemmaSample:
    s: float
    t: float
    params: LemmaParams

    def __post_init__(self):
        if not (math.isfinite(self.s) and math.isfinite(self.t)):
            raise ValueError("sample coordinates must be finite")


def _slack(scale):
    return SLACK * np.maximum(1.0, scale)


def stroock_arrays(alpha, s, t):
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    sq = (t - s) ** 2
    middle = signed_pow_diff(t, s, alpha) * signed_pow_diff(t, s, 2.0 - alpha)
    return alpha * (2.0 - alpha) * sq, np.asarray(middle), 2.0 * sq


def stroock_check(alpha: float, s: float, t: float) -> tuple[float, float, float]:
    """Return ``(alpha(2-alpha)(t-s)^2, middle product, 2(t-s)^2)``."""
    if not 0.0 < alpha < 2.0:
        raise ValueError("alpha must lie in (0, 2)")
    lo, mid, up = stroock_arrays(alpha, s, t)
    return float(lo), float(mid), float(up)


def normalize(s, t):
    """Swap so that ``|s| <= |t|``, then flip signs so that ``t >= 0``."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    swap = np.abs(s) > np.abs(t)
    s, t = np.where(swap, t, s), np.where(swap, s, t)
    flip = t < 0
    return np.where(flip, -s, s), np.where(flip, -t, t)


def _power_products(alpha, n, s, t):
    d_a = signed_pow_diff(t, s, alpha)
    d_b = signed_pow_diff(t, s, 2.0 - alpha)
    dn_a = truncated_power_diff(alpha, n, t, s)
    dn_b = truncated_power_diff(2.0 - alpha, n, t, s)
    return np.asarray(dn_a * dn_b), np.asarray(d_a * d_b)


def key_bound_arrays(alpha, n, s, t):
    """Vectorised ``(lhs, rhs, margin)`` of the key bound on normalised samples."""
    alpha = min(alpha, 2.0 - alpha)
    s, t = normalize(s, t)
    trunc, full = _power_products(alpha, n, s, t)
    lhs = np.abs(trunc - full)
    eps = 8.0 * float(n) ** (-alpha)
    rhs = eps * (t - s) ** 2 + KEY_CONSTANT * (np.asarray(psi_n(n, t)) - np.asarray(psi_n(n, s))) ** 2
    return lhs, rhs, rhs - lhs


def key_bound_residual(sample: LemmaSample) -> tuple[float, float, float]:
    lhs, rhs, margin = key_bound_arrays(sample.params.alpha, sample.params.n, sample.s, sample.t)
    return float(lhs), float(rhs), float(margin)


def region_codes(s, t, n):
    """Integer region codes 0..6 (A..G) after normalisation."""
    s, t = normalize(s, t)
    a = np.abs(s)
    n = float(n)
    top = n**4
    conds = [
        t <= 1.0,
        (a <= 1.0) & (t <= n),
        (a <= 1.0) & (t <= top),
        a <= 1.0,
        t <= top,
        a <= top,
        np.ones_like(t, dtype=bool),
    ]
    # the first matching condition wins, so ties go to the earliest tag
    return np.select(conds, np.arange(7))


def classify_region(s: float, t: float, n: float) -> str:
    if n < 2:
        raise ValueError("n must be at least 2")
    return REGIONS[int(region_codes(s, t, n))]


def region_bound_arrays(alpha, n, s, t):
    """Per-region sharper bounds; returns ``(lhs, rhs, margin, codes)``."""
    alpha = min(alpha, 2.0 - alpha)
    s, t = normalize(s, t)
    codes = region_codes(s, t, n)
    trunc, full = _power_products(alpha, n, s, t)
    lhs = np.abs(trunc - full)
    psi = (np.asarray(psi_n(n, t)) - np.asarray(psi_n(n, s))) ** 2
    psi_const = np.array([REGION_PSI_CONSTANT.get(r, 0.0) for r in REGIONS])[codes]
    rhs = np.where(
        codes == 2,
        REGION_C_CONSTANT * float(n) ** (-alpha) * (t - s) ** 2,
        psi_const * psi,
    )
    return lhs, rhs, rhs - lhs, codes


def region_bound_check(sample: LemmaSample) -> float:
    _, _, margin, _ = region_bound_arrays(sample.params.alpha, sample.params.n, sample.s, sample.t)
    return float(margin)


# ---------------------------------------------------------------------------
# sweeps

BREAKPOINT_PERTURBATIONS = np.array([0.0, 1e-12, -1e-12, 1e-6, -1e-6])


def draw_samples(rng: np.random.Generator, count: int, n: float, distribution: str):
    if distribution == "uniform-box":
        return rng.uniform(-2.0, 2.0, count), rng.uniform(-2.0, 2.0, count)
    if distribution == "heavy-tail":
        def one():
            return rng.choice([-1.0, 1.0], count) * np.exp(rng.uniform(-30.0, 30.0, count))

        return one(), one()
    if distribution == "breakpoint-focused":
        points = np.array([1.0, n, n**3, n**4])

        def one():
            base = rng.choice(points, count)
            delta = rng.choice(BREAKPOINT_PERTURBATIONS, count)
            return rng.choice([-1.0, 1.0], count) * base * (1.0 + delta)

        return one(), one()
    raise ValueError(f"unknown distribution {distribution!r}")


@dataclass
class SweepRow:
    distribution: str
    alpha: float
    n: float
    count: int
    min_margin: float
    argmin_s: float
    argmin_t: float
    min_region_margin: float
    min_stroock_margin: float
    max_ratio: float
    violations: int
    region_counts: dict = field(default_factory=dict)

    def record(self) -> dict:
        rec = asdict(self)
        counts = rec.pop("region_counts")
        rec.update({f"region_{r}": counts.get(r, 0) for r in REGIONS})
        return rec


@dataclass
class SweepReport:
    seed: int
    distribution: str
    rows: list[SweepRow]

    @property
    def total_samples(self) -> int:
        return sum(r.count for r in self.rows)

    @property
    def violations(self) -> int:
        return sum(r.violations for r in self.rows)

    @property
    def min_margin(self) -> float:
        return min(r.min_margin for r in self.rows)

    def region_totals(self) -> dict:
        out = {r: 0 for r in REGIONS}
        for row in self.rows:
            for k, v in row.region_counts.items():
                out[k] += v
        return out

    def records(self) -> list[dict]:
        return [r.record() for r in self.rows]


def _evaluate_block(alpha, n, s, t, distribution):
    lo, mid, up = stroock_arrays(alpha, s, t)
    stroock = np.minimum(mid - lo, up - mid) / np.maximum(1.0, up)

    lhs, rhs, margin = key_bound_arrays(alpha, n, s, t)
    rel = margin / np.maximum(1.0, rhs)
    _, rhs_r, margin_r, codes = region_bound_arrays(alpha, n, s, t)
    rel_r = margin_r / np.maximum(1.0, rhs_r)

    bad = (rel < -SLACK) | (rel_r < -SLACK) | (stroock < -SLACK)
    k = int(np.argmin(rel))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0, lhs / rhs, 0.0)
    counts = np.bincount(codes, minlength=7)
    return SweepRow(
        distribution=distribution,
        alpha=float(alpha),
        n=float(n),
        count=int(s.size),
        min_margin=float(rel[k]),
        argmin_s=float(s[k]),
        argmin_t=float(t[k]),
        min_region_margin=float(rel_r.min()),
        min_stroock_margin=float(stroock.min()),
        max_ratio=float(ratio.max()),
        violations=int(bad.sum()),
        region_counts={r: int(c) for r, c in zip(REGIONS, counts)},
    )


def sweep(seed: int, count: int, alphas, ns, distribution: str = "uniform-box") -> SweepReport:
    """Evaluate all three checks on ``count`` samples for every ``(alpha, n)``.

    Margins in the report are normalised by ``max(1, rhs)``, so a violation
    is any value below ``-1e-12``. Each block draws from its own stream
    seeded by ``(seed, distribution index, block index)``.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if distribution not in DISTRIBUTIONS:
        raise ValueError(f"unknown distribution {distribution!r}")
    dist_id = DISTRIBUTIONS.index(distribution)
    rows = []
    block = 0
    for alpha in alphas:
        for n in ns:
            LemmaParams(alpha, n)
            rng = np.random.default_rng([seed, dist_id, block])
            s, t = draw_samples(rng, count, float(n), distribution)
            rows.append(_evaluate_block(alpha, n, s, t, distribution))
            block += 1
    return SweepReport(seed=seed, distribution=distribution, rows=rows)
