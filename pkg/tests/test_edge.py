import numpy as np
import pytest
from scipy.integrate import solve_ivp

from frozenstar.edge import (delta_edge, delta_frozen_edge, delta_ordinary_edge,
                             frozen_node_values, node_residual, phi_gamma, rho_of)
from frozenstar.errors import InputError, ResolutionError
from frozenstar.potential import EdgeSpec, PotentialFn, wq_transform

from conftest import random_frozen_args, trig_potential

ZERO = PotentialFn.zero()
ONE = PotentialFn.constant(1.0)


def ivp_oracle(f, alpha, lam):
    """(z(pi), z'(pi)) for the smooth potential f from an adaptive integrator."""
    y0 = [0.0, 1.0] if alpha == 0 else [1.0, 0.0]
    fx = lambda x: float(np.ravel(f(x))[0])
    sol = solve_ivp(lambda x, y: [y[1], (fx(x) - lam) * y[0]], (0, np.pi), y0,
                    method="DOP853", rtol=1e-13, atol=1e-14)
    return sol.y[0, -1], sol.y[1, -1]


class TestPhi:
    def test_values(self):
        assert abs(phi_gamma(0, np.pi, 2.0)) < 1e-15
        assert phi_gamma(1, np.pi, 1.0) == pytest.approx(-1.0)
        assert phi_gamma(0, np.pi / 2, 0.0) == pytest.approx(np.pi / 2)
        assert phi_gamma(0, np.pi / 2, 1e-9) == pytest.approx(np.pi / 2)

    def test_rho_squared(self):
        for lam in [2.5, 0.0, -4.0, 3 + 2j]:
            assert abs(rho_of(lam) ** 2 - lam) <= 1e-12 * max(1, abs(lam))


class TestFrozenEdge:
    def test_zero_potential(self):
        e = EdgeSpec(ZERO, (0.4, 2.0), 0)
        rho = 1.3
        assert delta_frozen_edge(e, rho**2, 0) == pytest.approx(np.sin(1.3 * np.pi) / 1.3, abs=1e-14)
        assert delta_frozen_edge(e, rho**2, 1) == pytest.approx(np.cos(1.3 * np.pi), abs=1e-14)

    def test_constant_potential_closed_forms(self):
        e = EdgeSpec(ONE, (np.pi / 2,), 0)
        assert delta_frozen_edge(e, 1.0, 0) == pytest.approx(2.0, abs=1e-12)
        assert delta_frozen_edge(e, 1.0, 1) == pytest.approx(0.0, abs=1e-12)

    def test_two_by_two_formula(self, rng):
        # the reduced determinant rebuilt from independently computed pieces
        q, f = trig_potential(rng, M=4096)
        a = random_frozen_args(rng, 2)
        for alpha in (0, 1):
            e = EdgeSpec(q, a, alpha)
            rho = 3.7
            w = lambda x: wq_transform(q, x, rho)
            top = [np.sum(phi_gamma(alpha, np.array(a), rho)), sum(w(x) for x in a) - 1]
            bottom0 = [phi_gamma(alpha, np.pi, rho), w(np.pi)]
            expect = top[0] * bottom0[1] - top[1] * bottom0[0]
            assert delta_frozen_edge(e, rho**2, 0) == pytest.approx(expect, rel=1e-12)

    def test_wrong_kind(self):
        with pytest.raises(InputError):
            delta_frozen_edge(EdgeSpec(ZERO, (), 0), 1.0, 0)
        with pytest.raises(InputError):
            delta_ordinary_edge(EdgeSpec(ZERO, (1.0,), 0), 1.0, 0)
        with pytest.raises(InputError):
            delta_frozen_edge(EdgeSpec(ZERO, (1.0,), 0), 1.0, 2)

    def test_continuity_in_lambda(self, rng):
        q, _ = trig_potential(rng)
        e = EdgeSpec(q, random_frozen_args(rng, 2), 0)
        h = 0.005
        rho = np.arange(0.7, 60, h)
        d = delta_frozen_edge(e, rho**2, 0)
        mid = delta_frozen_edge(e, (rho[:-1] + h / 2) ** 2, 0)
        # linear interpolation error of a C^2 function is at most h^2/8 max|d''|
        d2 = np.abs(np.diff(d, 2)).max() / h**2
        gap = np.abs(mid - 0.5 * (d[:-1] + d[1:]))
        assert gap.max() <= 2 * d2 * h**2 / 8 + 1e-14

    def test_asymptotics(self, rng):
        q, _ = trig_potential(rng)
        e = EdgeSpec(q, random_frozen_args(rng, 2), 0)
        rho = np.linspace(10, 60, 4001)
        d0 = delta_frozen_edge(e, rho**2, 0)
        d1 = delta_frozen_edge(e, rho**2, 1)
        # envelopes over windows of unit length, then a log-log fit
        edges = np.arange(10, 61, 2.0)
        mid, e0, e1 = [], [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            s = (rho >= lo) & (rho < hi)
            mid.append(0.5 * (lo + hi))
            e0.append(np.abs(d0 - np.sin(rho * np.pi) / rho)[s].max())
            e1.append(np.abs(d1 - np.cos(rho * np.pi))[s].max())
        s0 = np.polyfit(np.log(mid), np.log(e0), 1)[0]
        s1 = np.polyfit(np.log(mid), np.log(e1), 1)[0]
        assert s0 <= -2 + 0.1
        assert s1 <= -1 + 0.1


class TestOrdinaryEdge:
    def test_zero_potential_roots(self):
        e0, e1 = EdgeSpec(ZERO, (), 0), EdgeSpec(ZERO, (), 1)
        for k in (1, 2, 5):
            assert abs(delta_ordinary_edge(e0, k**2, 0)) < 1e-12
            assert abs(delta_ordinary_edge(e1, k**2, 1)) < 1e-11

    def test_constant_potential(self):
        e = EdgeSpec(ONE, (), 0)
        assert abs(delta_ordinary_edge(e, 2.0, 0)) < 1e-12
        for lam in [0.3, 5.5, 40.0, 900.0]:
            k = np.sqrt(complex(lam - 1))
            assert abs(delta_ordinary_edge(e, lam, 0) - np.sin(k * np.pi) / k) < 1e-11
            assert abs(delta_ordinary_edge(e, lam, 1) - np.cos(k * np.pi)) < 1e-10

    def test_zero_potential_matches_closed_form(self):
        rho = np.linspace(0.1, 40, 1500)
        d0 = delta_ordinary_edge(EdgeSpec(ZERO, (), 0), rho**2, 0)
        d1 = delta_ordinary_edge(EdgeSpec(ZERO, (), 0), rho**2, 1)
        assert np.max(np.abs(d0 - np.sin(rho * np.pi) / rho)) < 1e-10
        assert np.max(np.abs(d1 - np.cos(rho * np.pi))) < 1e-10

    @pytest.mark.parametrize("alpha", [0, 1])
    def test_against_ivp_oracle(self, rng, alpha):
        # fine grid so the interpolant is within ~1e-9 of the smooth potential
        q, f = trig_potential(rng, M=16384)
        e = EdgeSpec(q, (), alpha)
        for lam in [0.2, 7.3, 150.0, -2.0]:
            z, zp = ivp_oracle(f, alpha, lam)
            assert delta_ordinary_edge(e, lam, 0) == pytest.approx(z, rel=1e-8, abs=1e-8)
            assert delta_ordinary_edge(e, lam, 1) == pytest.approx(zp, rel=1e-8, abs=1e-8)

    def test_complex_lambda(self):
        lam = 4.0 + 3.0j
        k = np.sqrt(lam)
        d = delta_ordinary_edge(EdgeSpec(ZERO, (), 0), lam, 0)
        assert abs(d - np.sin(k * np.pi) / k) < 1e-11

    def test_real_outputs(self, rng):
        q, _ = trig_potential(rng)
        d = delta_ordinary_edge(EdgeSpec(q, (), 0), np.linspace(0.1, 100, 50), 0)
        assert d.dtype == np.float64

    def test_resolution_error_names_M(self):
        with pytest.raises(ResolutionError, match="M >="):
            delta_ordinary_edge(EdgeSpec(ZERO, (), 0), 5000.0**2, 0)


class TestDeltaEdge:
    def test_ordinary(self):
        v = delta_edge(EdgeSpec(ZERO, (), 0), 0.25)
        assert v.d00 == pytest.approx(2.0, abs=1e-12)
        assert v.d01 == pytest.approx(0.0, abs=1e-12)
        assert v.rho == pytest.approx(0.5)

    def test_frozen(self):
        v = delta_edge(EdgeSpec(ONE, (np.pi / 2,), 0), 1.0)
        assert (v.d00, v.d01) == (pytest.approx(2.0, abs=1e-12), pytest.approx(0.0, abs=1e-12))
        v = delta_edge(EdgeSpec(ZERO, (0.3, 1.9), 0), 4.0)
        assert (v.d00, v.d01) == (pytest.approx(0.0, abs=1e-14), pytest.approx(1.0, abs=1e-14))


class TestNodeValues:
    def test_zero_potential(self):
        e = EdgeSpec(ZERO, (0.5, 1.7, 2.4), 0)
        rho = 1.9
        sol = frozen_node_values(e, rho**2)
        assert sol.D == 1
        np.testing.assert_allclose(sol.node_values, np.sin(rho * np.array(e.frozen_args)) / rho,
                                   atol=1e-14)

    def test_singular_case(self):
        sol = frozen_node_values(EdgeSpec(ONE, (np.pi / 2,), 0), 1.0)
        assert sol.D == 0
        np.testing.assert_allclose(sol.node_values, [1.0], atol=1e-12)
        assert np.max(np.abs(node_residual(EdgeSpec(ONE, (np.pi / 2,), 0), 1.0, sol))) < 1e-12

    def test_residual_random(self, rng):
        q, _ = trig_potential(rng)
        e = EdgeSpec(q, random_frozen_args(rng, 2), 0)
        sol = frozen_node_values(e, 2.7)
        assert sol.D == 1 and not sol.degenerate
        assert np.max(np.abs(node_residual(e, 2.7, sol))) < 1e-9

    def test_node_values_solve_the_nonlocal_equation(self, rng):
        # y = D phi + sum_k y(a_k) w_q, evaluated at the frozen points, reproduces u
        q, _ = trig_potential(rng)
        e = EdgeSpec(q, random_frozen_args(rng, 3), 1)
        lam = 5.1
        rho = np.sqrt(lam)
        sol = frozen_node_values(e, lam)
        a = np.asarray(e.frozen_args)
        y = sol.D * phi_gamma(1, a, rho) + sol.node_values.sum() * np.array(
            [wq_transform(q, x, rho) for x in a])
        np.testing.assert_allclose(y, sol.node_values, atol=1e-10)

    def test_needs_frozen_edge(self):
        with pytest.raises(InputError):
            frozen_node_values(EdgeSpec(ZERO, (), 0), 1.0)
