import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sbforms.euclid import (
    EuclideanSpec,
    Grid1D,
    SingularIntegrandError,
    build_diffusion,
    build_fractional,
    continuum_ep,
    energy_measure,
    fractional_constant,
    fractional_spec,
    lejan_check,
    local_bilinear,
    local_constant_study,
)
from sbforms.forms import bd_form_p, dirichlet_form, ep_generator
from sbforms.model import decompose, validate_model
from sbforms.scalar import signed_pow

ONE = EuclideanSpec(p=2.0, nu=np.ones_like)
TWO_PI = 2 * math.pi

# int over the complement of [0, 1] of |0.3 - y|^(-1.6) dy, mpmath quadrature
ORACLE_EXT = 5.4966082913613124886

# (p - 1) * int_0^{2 pi} (2 + sin)^(p-2) cos^2, by mpmath at 30 digits
CONTINUUM_ORACLE = {1.5: 1.1394880440694570587, 2.0: 3.1415926535897932385, 3.0: 12.566370614359172954}


def u_sin(x):
    return 2.0 + np.sin(x)


def test_grid_contract():
    g = Grid1D(0.0, 1.0, 4)
    np.testing.assert_allclose(g.nodes, [0.125, 0.375, 0.625, 0.875])
    assert g.h == 0.25
    for bad in [(0.0, 1.0, 1), (1.0, 0.0, 4), (0.0, 1.0, 4, "neumann")]:
        with pytest.raises(ValueError):
            Grid1D(*bad)


def test_diffusion_constants_and_linear():
    g = Grid1D(0.0, TWO_PI, 16)
    model = build_diffusion(g, ONE)
    assert validate_model(model).passed
    np.testing.assert_allclose(model.L @ np.full(16, 3.0), 0.0, atol=1e-12)
    g = Grid1D(0.0, 1.0, 4, "dirichlet-exterior")
    Lu = build_diffusion(g, ONE).L @ g.nodes
    np.testing.assert_allclose(Lu[1:-1], 0.0, atol=1e-12)


def test_diffusion_sin_energy_closed_form():
    # the three-point energy of sin is pi * (sin(h/2) / (h/2))^2
    for N in (8, 32, 128, 512):
        g = Grid1D(0.0, TWO_PI, N)
        u = np.sin(g.nodes)
        half = g.h / 2
        assert dirichlet_form(build_diffusion(g, ONE), u, u) == pytest.approx(math.pi * (math.sin(half) / half) ** 2,
                                                                              rel=1e-12)


def test_diffusion_dirichlet_boundary_killing():
    g = Grid1D(0.0, 1.0, 5, "dirichlet-exterior")
    spec = EuclideanSpec(nu=lambda x: 1.0 + x)
    bd = decompose(build_diffusion(g, spec))
    np.testing.assert_allclose(bd.kappa, [2.0 / g.h, 0, 0, 0, 4.0 / g.h])
    assert bd.J[0, 1] == pytest.approx((1.0 + (g.nodes[0] + g.nodes[1]) / 2) / g.h)


def test_diffusion_two_cell_periodic():
    g = Grid1D(0.0, 1.0, 2)
    bd = decompose(build_diffusion(g, ONE))
    assert bd.J[0, 1] == pytest.approx(2.0 / g.h)


def test_diffusion_rejects_negative_coefficient():
    with pytest.raises(ValueError, match="negative"):
        build_diffusion(Grid1D(0.0, 1.0, 8), EuclideanSpec(nu=lambda x: x - 0.5))


def test_diffusion_with_jump_and_kill():
    spec = EuclideanSpec(nu=np.ones_like, jump_density=lambda x, y: np.exp(-((x - y) ** 2)),
                         kill_density=lambda x: x**2, domain=(0.0, 1.0))
    for bnd in ("periodic", "dirichlet-exterior"):
        g = Grid1D(0.0, 1.0, 10, bnd)
        model = build_diffusion(g, spec)
        assert validate_model(model).passed
        bd = decompose(model)
        assert bd.kappa[3] == pytest.approx(g.h * g.nodes[3] ** 2)


def test_fractional_constant():
    assert fractional_constant(0.5) == pytest.approx(1.0 / math.pi, rel=1e-14)
    # mpmath values of 4^s s Gamma(s+1/2) / (sqrt(pi) Gamma(1-s))
    assert fractional_constant(0.3) == pytest.approx(0.23009638168163209817, rel=1e-13)
    assert fractional_constant(0.75) == pytest.approx(0.29920671030107450845, rel=1e-13)
    with pytest.raises(ValueError):
        fractional_constant(1.0)


def test_fractional_two_nodes():
    g = Grid1D(0.0, 1.0, 2, "dirichlet-exterior")
    bd = decompose(build_fractional(g, 0.5))
    # d = h = 1/2: J = c d^-2 h^2 = 1/pi
    assert bd.J[0, 1] == pytest.approx(1.0 / math.pi, rel=1e-14)


def test_fractional_models_and_killing():
    g = Grid1D(0.0, 1.0, 40, "dirichlet-exterior")
    model = build_fractional(g, 0.3)
    assert validate_model(model).passed
    k = decompose(model).kappa
    assert (k > 0).all()
    half = k[:20]
    assert (np.diff(half) < 0).all()  # larger near the wall
    np.testing.assert_allclose(k, k[::-1], rtol=1e-12)
    # exterior integral at x = 0.3 on [0, 1] by mpmath quadrature
    g5 = Grid1D(0.0, 1.0, 5, "dirichlet-exterior")
    k5 = decompose(build_fractional(g5, 0.3)).kappa
    assert k5[1] / (g5.h * fractional_constant(0.3)) == pytest.approx(ORACLE_EXT, rel=1e-12)
    per = build_fractional(Grid1D(0.0, 1.0, 30), 0.6)
    assert validate_model(per).passed
    assert not decompose(per).kappa.any()
    assert bd_form_p(decompose(per), np.full(30, 2.0), 3.0).total == 0.0


@given(st.integers(2, 40), st.floats(0.05, 0.95), st.sampled_from(["periodic", "dirichlet-exterior"]))
def test_grid_models_valid_and_identity(N, s, bnd):
    g = Grid1D(-1.0, 2.0, N, bnd)
    u = np.cos(g.nodes) + 0.3
    for model in (build_fractional(g, s), build_diffusion(g, EuclideanSpec(nu=lambda x: 1 + x**2))):
        assert validate_model(model).passed
        for p in (1.5, 3.0):
            ep = ep_generator(model, u, p)
            assert abs(ep - bd_form_p(decompose(model), u, p).total) <= 1e-9 * (1 + abs(ep))


def test_continuum_local_examples():
    spec = EuclideanSpec(p=2.0, nu=np.ones_like)
    assert continuum_ep(spec, u_sin, np.cos, 32).local == pytest.approx(math.pi, rel=1e-13)
    zero = continuum_ep(spec, lambda x: np.full_like(x, 3.0), np.zeros_like, 16)
    assert zero.total == 0.0
    for p, val in CONTINUUM_ORACLE.items():
        got = continuum_ep(dataclasses.replace(spec, p=p), u_sin, np.cos, 64).local
        assert got == pytest.approx(val, rel=1e-13)


def test_continuum_singular_integrand():
    spec = EuclideanSpec(p=1.5, nu=np.ones_like, domain=(-1.0, 1.0))
    with pytest.raises(SingularIntegrandError) as info:
        continuum_ep(spec, lambda x: x, np.ones_like, 4)
    assert abs(info.value.x) < 0.5
    # a zero with vanishing derivative is harmless
    ok = continuum_ep(dataclasses.replace(spec, p=3.0), lambda x: x, np.ones_like, 4)
    assert ok.local == pytest.approx(2.0, rel=1e-12)  # int 2|x| over [-1, 1]


def test_continuum_kill():
    spec = EuclideanSpec(p=3.0, kill_density=lambda x: 1 + x, domain=(0.0, 1.0))
    # int_0^1 (1 + x) x^3 dx = 1/4 + 1/5
    assert continuum_ep(spec, lambda x: x, np.ones_like, 4).kill == pytest.approx(0.45, rel=1e-13)


def test_continuum_jump_gaussian_kernel():
    # for p = 2, jump = 1/2 int int (u(y) - u(x))^2 J; u(x) = x, J = 1 on [0,1]^2 gives 1/12
    spec = EuclideanSpec(p=2.0, jump_density=lambda x, y: np.ones(np.broadcast(x, y).shape), domain=(0.0, 1.0))
    assert continuum_ep(spec, lambda x: x, np.ones_like, 32).jump == pytest.approx(1 / 12, rel=1e-10)


def test_continuum_fractional_matches_grid():
    s = 0.3
    spec = fractional_spec(s, 2.0, (0.0, 1.0))

    def u(x):
        return np.sin(np.pi * x) ** 2 + 0.5

    def du(x):
        return np.pi * np.sin(2 * np.pi * x)

    cont = continuum_ep(spec, u, du, 128)
    numeric = continuum_ep(dataclasses.replace(spec, jump_moment=None), u, du, 128)
    assert numeric.jump == pytest.approx(cont.jump, rel=1e-10)
    g = Grid1D(0.0, 1.0, 512, "dirichlet-exterior")
    disc = bd_form_p(decompose(build_fractional(g, s)), u(g.nodes), 2.0)
    assert disc.jump == pytest.approx(cont.jump, rel=2e-3)
    assert disc.kill == pytest.approx(cont.kill, rel=2e-2)


def test_energy_measure_examples():
    g = Grid1D(0.0, 1.0, 20, "dirichlet-exterior")
    mu = energy_measure(g, ONE, 3.0 * g.nodes)
    np.testing.assert_allclose(mu.density, 18.0, rtol=1e-12)
    gp = Grid1D(0.0, TWO_PI, 256)
    v = np.sin(gp.nodes)
    mu = energy_measure(gp, ONE, v)
    assert (mu.density >= 0).all()
    assert mu.total() == pytest.approx(2 * local_bilinear(gp, ONE, v, v), rel=1e-3)
    with pytest.raises(ValueError):
        energy_measure(gp, EuclideanSpec(), v)


def test_lejan_identity_and_half_power():
    ident = lambda s: s  # noqa: E731
    one = np.ones_like
    p = 3.0
    phi = lambda s: signed_pow(s, p / 2)  # noqa: E731
    dphi = lambda s: (p / 2) * np.abs(s) ** (p / 2 - 1)  # noqa: E731
    prev = None
    for N in (64, 128, 256, 512):
        g = Grid1D(0.0, TWO_PI, N)
        v = u_sin(g.nodes)
        c = lejan_check(g, ONE, v, ident, one)
        assert c.difference <= 1e-2 * c.direct_side
        h = lejan_check(g, ONE, v, phi, dphi)
        if prev is not None:
            assert h.difference < prev  # shrinks with h
        prev = h.difference
    assert prev < 1e-3


def test_local_constant_study_orders():
    rows = local_constant_study(u_sin, np.cos, 2.0, [32, 64, 128, 256])
    assert math.isnan(rows[0].observed_order)
    assert all(r.observed_order >= 1.9 for r in rows[1:])
    for r in rows:
        assert abs(r.discrete_value - r.half_power_value) <= 1e-12 * r.discrete_value
        assert r.continuum_value == pytest.approx(math.pi, rel=1e-13)
    with pytest.raises(ValueError):
        local_constant_study(np.sin, np.cos, 2.0, [16])
