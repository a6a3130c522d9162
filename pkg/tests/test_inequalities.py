import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sbforms.inequalities import (
    DISTRIBUTIONS,
    REGIONS,
    LemmaSample,
    classify_region,
    key_bound_arrays,
    key_bound_residual,
    normalize,
    region_bound_check,
    stroock_check,
    sweep,
)
from sbforms.scalar import LemmaParams

# lhs and rhs of the key bound at 40 digits (mpmath, independent of the library)
KEY_ORACLE = [
    ((0.5, 2.0, 0.5, 5.0), 1.9880596329636740738, 519.55129855222069895),
    ((0.3, 4.0, -0.7, 300.0), 30381.10534908239808, 10905810.407403845514),
    ((1.5, 2.0, 3.0, 40.0), 1004.5944619207918167, 192064.23346755506849),
    ((0.7, 16.0, 0.2, 1e6), 995684945050.36102117, 179682822541284.9391),
    ((1.2, 2.0, 20.0, 30.0), 96.052190392344174105, 18459.479341998813989),
]

reals = st.floats(-1e8, 1e8, allow_nan=False)
alphas = st.floats(0.05, 1.95)
ns = st.sampled_from([2.0, 4.0, 16.0, 64.0])


def test_stroock_examples():
    assert stroock_check(1.0, 0.0, 3.0) == (9.0, 9.0, 18.0)
    assert stroock_check(0.7, 0.4, 0.4) == (0.0, 0.0, 0.0)
    lo, mid, up = stroock_check(0.5, -1.0, 1.0)
    assert (lo, mid, up) == pytest.approx((3.0, 4.0, 8.0), rel=1e-15)
    with pytest.raises(ValueError):
        stroock_check(2.0, 0.0, 1.0)


@pytest.mark.parametrize("case,lhs,rhs", KEY_ORACLE)
def test_key_bound_against_high_precision(case, lhs, rhs):
    a, n, s, t = case
    got_l, got_r, margin = key_bound_residual(LemmaSample(s, t, LemmaParams(a, n)))
    assert got_l == pytest.approx(lhs, rel=1e-12)
    assert got_r == pytest.approx(rhs, rel=1e-12)
    assert margin == pytest.approx(rhs - lhs, rel=1e-12)


def test_key_bound_examples():
    prm = LemmaParams(0.8, 4.0)
    assert key_bound_residual(LemmaSample(0.3, 0.3, prm)) == (0.0, 0.0, 0.0)
    # region A: truncated product is (t - s)^2
    lhs, _, _ = key_bound_residual(LemmaSample(0.2, 0.9, prm))
    full = (0.9**0.8 - 0.2**0.8) * (0.9**1.2 - 0.2**1.2)
    assert lhs == pytest.approx(abs(0.49 - full), rel=1e-12)
    # region E: nothing is truncated
    assert key_bound_residual(LemmaSample(2.0, 200.0, prm))[0] == 0.0


def test_classify_examples():
    assert classify_region(0.5, 0.7, 2.0) == "A"
    assert classify_region(-0.5, 3.0, 2.0) == "C"
    assert classify_region(20.0, 30.0, 2.0) == "G"
    assert classify_region(0.5, 1.5, 2.0) == "B"
    assert classify_region(0.5, 100.0, 2.0) == "D"
    assert classify_region(2.0, 10.0, 2.0) == "E"
    assert classify_region(2.0, 100.0, 2.0) == "F"
    # ties go to the earliest tag
    assert classify_region(1.0, 1.0, 2.0) == "A"
    assert classify_region(0.5, 2.0, 2.0) == "B"
    assert classify_region(1.0, 16.0, 2.0) == "C"
    # swapped / negated samples land in the same region
    assert classify_region(-30.0, -20.0, 2.0) == "G"
    with pytest.raises(ValueError):
        classify_region(0.0, 1.0, 1.5)


def test_region_bound_examples():
    prm = LemmaParams(0.5, 2.0)
    e = LemmaSample(2.0, 10.0, prm)
    _, rhs_e, _ = key_bound_residual(e)
    assert region_bound_check(e) == 0.0  # lhs 0 against constant 0
    a = LemmaSample(0.2, 0.9, prm)
    assert region_bound_check(a) >= 0.0
    # region C: 8 n^-alpha (t-s)^2 = 114.551298552220699 against lhs 1.98805963296367407
    c = LemmaSample(0.5, 5.0, prm)
    assert region_bound_check(c) == pytest.approx(114.55129855222069895 - 1.9880596329636740738, rel=1e-12)


@given(alphas, ns, reals, reals)
def test_key_bound_holds(alpha, n, s, t):
    lhs, rhs, margin = key_bound_residual(LemmaSample(s, t, LemmaParams(alpha, n)))
    assert margin >= -1e-12 * max(1.0, rhs)


@given(alphas, ns, reals, reals)
def test_region_bounds_hold(alpha, n, s, t):
    smp = LemmaSample(s, t, LemmaParams(alpha, n))
    _, rhs, _ = key_bound_residual(smp)
    assert region_bound_check(smp) >= -1e-12 * max(1.0, rhs)


@given(alphas, reals, reals)
def test_stroock_holds(alpha, s, t):
    lo, mid, up = stroock_check(alpha, s, t)
    slack = 1e-12 * max(1.0, up)
    assert lo - slack <= mid <= up + slack


@given(alphas, ns, reals, reals)
def test_key_bound_symmetries(alpha, n, s, t):
    prm = LemmaParams(alpha, n)
    base = key_bound_residual(LemmaSample(s, t, prm))
    assert key_bound_residual(LemmaSample(t, s, prm)) == base
    assert key_bound_residual(LemmaSample(-s, -t, prm)) == base
    # 2 - (2 - alpha) may differ from alpha in the last bit
    refl = key_bound_residual(LemmaSample(s, t, LemmaParams(2.0 - alpha, n)))
    assert refl[0] == pytest.approx(base[0], rel=1e-12, abs=1e-12 * max(1.0, base[1]))
    assert refl[1] == pytest.approx(base[1], rel=1e-12)


@given(reals, reals, ns)
def test_classification_stable_under_normalization(s, t, n):
    ns_, nt = normalize(s, t)
    assert classify_region(s, t, n) == classify_region(float(ns_), float(nt), n)
    assert classify_region(s, t, n) in REGIONS


def test_sweep_deterministic_and_clean():
    a = sweep(5, 2000, [0.3, 1.0, 1.7], [2, 64], "breakpoint-focused")
    b = sweep(5, 2000, [0.3, 1.0, 1.7], [2, 64], "breakpoint-focused")
    assert a.records() == b.records()
    assert a.violations == 0
    assert a.total_samples == 12000


def test_breakpoint_sweep_visits_every_region_at_n2():
    rep = sweep(1, 20000, [0.5, 1.5], [2], "breakpoint-focused")
    assert rep.violations == 0
    assert all(v > 0 for v in rep.region_totals().values())


def test_uniform_box_sweep():
    rep = sweep(2, 5000, [0.1, 0.9, 1.9], [2, 4, 16, 64], "uniform-box")
    assert rep.violations == 0
    assert rep.min_margin >= -1e-12


def test_sweep_rejects_bad_config():
    with pytest.raises(ValueError):
        sweep(0, 0, [0.5], [2], "uniform-box")
    with pytest.raises(ValueError):
        sweep(0, 10, [0.5], [2], "gaussian")
    assert set(DISTRIBUTIONS) == {"uniform-box", "heavy-tail", "breakpoint-focused"}


def test_vectorised_matches_scalar():
    rng = np.random.default_rng(3)
    s = rng.uniform(-100, 100, 50)
    t = rng.uniform(-100, 100, 50)
    lhs, rhs, _ = key_bound_arrays(0.4, 4.0, s, t)
    for i in range(50):
        l1, r1, _ = key_bound_residual(LemmaSample(s[i], t[i], LemmaParams(0.4, 4.0)))
        assert (l1, r1) == (lhs[i], rhs[i])
