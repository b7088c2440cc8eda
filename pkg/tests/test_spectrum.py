import numpy as np
import pytest
from scipy.optimize import brentq

from frozenstar.errors import ClassificationError, InputError
from frozenstar.fd_oracle import build_fd_matrix
from frozenstar.graph import graph_values_rho
from frozenstar.potential import EdgeSpec, GraphSpec, PotentialFn
from frozenstar.spectrum import (EigenSubsequences, asymptotic_guess, classify_spectrum,
                                 extract_subsequences, fit_asymptotic_constant,
                                 forward_spectrum, ordinary_mean_sum, refine_root,
                                 scan_low_eigenvalues, scan_real_roots)

from conftest import trig_potential, zero_graph


def closed_form_roots(p, rho_max):
    half = np.arange(1, int(rho_max) + 2) - 0.5
    whole = np.repeat(np.arange(1, int(rho_max) + 2), p - 1).astype(float)
    r = np.sort(np.concatenate([half, whole]))
    return r[r <= rho_max]


def perturbed_graph(rng, p=3, amp=0.3):
    qs = [trig_potential(rng, degree=3, amp=amp)[0] for _ in range(p)]
    edges = [EdgeSpec(q) for q in qs[:-1]] + [EdgeSpec(qs[-1], (1.0,))]
    return GraphSpec(tuple(edges))


class TestAsymptoticGuess:
    def test_zero(self):
        assert asymptotic_guess(zero_graph(3), 5, 0) == 4.5

    def test_near_integer_branch(self, rng):
        assert asymptotic_guess(perturbed_graph(rng), 7, 2) == 7

    def test_constant_edge(self):
        g = GraphSpec((EdgeSpec(PotentialFn.constant(1.0)), EdgeSpec(PotentialFn.zero(), (1.0,))))
        assert ordinary_mean_sum(g) == pytest.approx(np.pi / 2, rel=1e-12)
        # shift A_l / (p pi k) with A_l = pi/2, p = 2, k = 10
        assert asymptotic_guess(g, 10, 0) == pytest.approx(9.5 + 1 / 40, rel=1e-12)

    def test_bad_k(self):
        with pytest.raises(InputError):
            asymptotic_guess(zero_graph(2), 0, 0)


class TestScan:
    def test_p2_zero(self):
        s = scan_real_roots(zero_graph(2), 3.2)
        np.testing.assert_allclose(s.roots, [0.5, 1, 1.5, 2, 2.5, 3], atol=1e-9)
        assert not s.cluster.any()

    @pytest.mark.parametrize("p", [3, 4])
    def test_multiple_roots_flagged(self, p):
        s = scan_real_roots(zero_graph(p), 4.2)
        want = closed_form_roots(p, 4.2)
        np.testing.assert_allclose(s.roots, want, atol=1e-9)
        np.testing.assert_array_equal(s.cluster, np.abs(want - np.round(want)) < 1e-12)

    def test_step_limit(self):
        with pytest.raises(InputError):
            scan_real_roots(zero_graph(2), 3.0, step=0.02)

    def test_empty(self):
        assert scan_real_roots(zero_graph(2), 0.04).roots.size == 0

    def test_against_brentq(self, rng):
        g = GraphSpec((EdgeSpec(PotentialFn.constant(0.7)), EdgeSpec(PotentialFn.constant(-0.4)),
                       EdgeSpec(PotentialFn.constant(0.2), (1.3,))))
        s = scan_real_roots(g, 6.0)
        f = lambda r: float(np.real(graph_values_rho(g, np.array([r]))[0]))
        for r in s.roots:
            if not np.isclose(r, s.roots, atol=1e-6).sum() == 1:
                continue
            ref = brentq(f, r - 1e-4, r + 1e-4, xtol=1e-15, rtol=1e-15)
            assert r == pytest.approx(ref, abs=1e-10)

    def test_residual(self, rng):
        g = perturbed_graph(rng)
        s = scan_real_roots(g, 8.0)
        F = np.real(graph_values_rho(g, s.roots))
        grid = np.linspace(0.05, 8.0, 4000)
        scale = np.abs(np.real(graph_values_rho(g, grid)))
        for r, v in zip(s.roots, F):
            local = scale[np.abs(grid - r) < 0.5].max()
            assert abs(v) < 1e-9 * local

    def test_deterministic(self, rng):
        g = perturbed_graph(rng)
        a, b = scan_real_roots(g, 6.0), scan_real_roots(g, 6.0)
        assert a.roots.tobytes() == b.roots.tobytes()

    def test_count_matches_fd(self, rng):
        g = perturbed_graph(rng, amp=0.5)
        rho_max = 6.3
        n = scan_real_roots(g, rho_max).roots.size
        A = build_fd_matrix(g, 800).entries
        ev = np.linalg.eigvals(A)
        fd = ev.real[(np.abs(ev.imag) < 1e-8) & (ev.real > SCAN_LAMBDA_MIN) & (ev.real <= rho_max**2)]
        assert abs(n - fd.size) <= 1


SCAN_LAMBDA_MIN = 0.05**2


class TestLowEigenvalues:
    def test_matches_fd(self, rng):
        g = perturbed_graph(rng)
        low = scan_low_eigenvalues(g)
        fd = np.sort(np.linalg.eigvals(build_fd_matrix(g, 1000).entries).real)
        assert low.size == 1 and low[0] < 0
        assert low[0] == pytest.approx(fd[0], abs=1e-4)

    def test_none_for_zero_potential(self):
        assert scan_low_eigenvalues(zero_graph(3)).size == 0

    def test_shifted_constant(self):
        # q = -2 on every edge shifts the whole zero-potential spectrum down by 2
        q = PotentialFn.constant(-2.0)
        g = GraphSpec((EdgeSpec(q), EdgeSpec(q)))
        np.testing.assert_allclose(scan_low_eigenvalues(g), [0.25 - 2, 1 - 2], atol=1e-10)
        spec = forward_spectrum(g, 5)
        # the nearest-guess labelling is asymptotic; low groups are compared as sets
        want = np.array([(np.arange(1, 6) - 0.5) ** 2, np.arange(1, 6) ** 2]) - 2
        np.testing.assert_allclose(np.sort(spec.lambdas, axis=0), want, atol=1e-9)
        np.testing.assert_allclose(spec.lambdas[:, 2:], want[:, 2:], atol=1e-9)
        assert np.isnan(spec.branches[:, 0]).all()

    def test_classification_keeps_slots(self, rng):
        g = perturbed_graph(rng)
        spec = forward_spectrum(g, 12)
        assert np.isnan(spec.branches).sum() == 1
        fd = np.sort(np.linalg.eigvals(build_fd_matrix(g, 1000).entries).real)[:6]
        np.testing.assert_allclose(np.sort(spec.lambdas[:, :2].ravel()), fd, rtol=2e-3, atol=1e-4)


class TestRefine:
    def test_half(self):
        assert refine_root(zero_graph(2), (0.4, 0.6)) == pytest.approx(0.5, abs=1e-12)

    def test_integer(self):
        assert refine_root(zero_graph(2), (0.93, 1.07)) == pytest.approx(1.0, abs=1e-12)

    def test_no_sign_change(self):
        with pytest.raises(InputError, match="sign change"):
            refine_root(zero_graph(2), (0.6, 0.9))


class TestClassify:
    def test_p3_zero(self):
        s = scan_real_roots(zero_graph(3), 6.0)
        spec = classify_spectrum(s.roots, zero_graph(3), s.cluster, k_max=5)
        np.testing.assert_allclose(spec.branches[0], np.arange(1, 6) - 0.5, atol=1e-9)
        np.testing.assert_allclose(spec.branches[1], np.arange(1, 6), atol=1e-9)
        np.testing.assert_allclose(spec.branches[2], np.arange(1, 6), atol=1e-9)
        assert spec.cluster_flags[1:].all() and not spec.cluster_flags[0].any()

    def test_p2_zero(self):
        spec = forward_spectrum(zero_graph(2), 6)
        np.testing.assert_allclose(spec.branches[0], np.arange(1, 7) - 0.5, atol=1e-9)
        np.testing.assert_allclose(spec.branches[1], np.arange(1, 7), atol=1e-9)

    def test_unsorted(self):
        with pytest.raises(InputError):
            classify_spectrum(np.array([1.0, 0.5]), zero_graph(2))

    def test_bad_window(self):
        roots = np.sort(np.concatenate([np.arange(1, 13) - 0.5, np.arange(1, 13) + 0.4]))
        with pytest.raises(ClassificationError, match="k=10"):
            classify_spectrum(roots, zero_graph(2))

    def test_too_few_groups(self):
        with pytest.raises(ClassificationError):
            classify_spectrum(np.array([0.5, 1.0]), zero_graph(2), k_max=3)

    def test_step_halving_stable(self, rng):
        g = perturbed_graph(rng, amp=0.2)
        a = forward_spectrum(g, 12)
        b = forward_spectrum(g, 12, step=0.5 * min(0.01, 1 / 120))
        np.testing.assert_allclose(a.branches, b.branches, atol=1e-10)

    def test_branches_increasing(self, rng):
        spec = forward_spectrum(perturbed_graph(rng), 12)
        assert np.all(np.diff(spec.lambdas, axis=1) > 0)


class TestExtract:
    def test_p2(self):
        mu = extract_subsequences(forward_spectrum(zero_graph(2), 5))
        np.testing.assert_allclose(mu.mu0, np.arange(1, 6), atol=1e-9)
        np.testing.assert_allclose(mu.mu1, np.arange(1, 6) - 0.5, atol=1e-9)
        assert mu.provenance == {"mu0": 1, "mu1": 0}

    def test_p3(self):
        mu = extract_subsequences(forward_spectrum(zero_graph(3), 5))
        np.testing.assert_allclose(mu.mu0, np.arange(1, 6), atol=1e-9)
        np.testing.assert_allclose(mu.mu1, np.arange(1, 6) - 0.5, atol=1e-9)

    def test_perturbed_near_guesses(self, rng):
        g = perturbed_graph(rng, amp=0.2)
        assert scan_low_eigenvalues(g).size == 0
        mu = extract_subsequences(forward_spectrum(g, 15))
        k = np.arange(5, 16)
        assert np.max(np.abs(mu.mu0[4:] - k)) < 0.1
        assert np.max(np.abs(mu.mu1[4:] - [asymptotic_guess(g, kk, 0) for kk in k])) < 0.1

    def test_nonpositive_rejected(self, rng):
        spec = forward_spectrum(perturbed_graph(rng), 12)
        with pytest.raises(InputError, match="k=1, j=1"):
            extract_subsequences(spec)

    def test_zero_rejected(self):
        with pytest.raises(InputError):
            EigenSubsequences(np.array([0.0, 1.0]), np.array([0.5, 1.5]))


@pytest.mark.slow
def test_asymptotic_constant_fit():
    q = PotentialFn.constant(0.8)
    g = GraphSpec((EdgeSpec(q), EdgeSpec(PotentialFn.zero(), (1.2,))))
    spec = forward_spectrum(g, 60)
    A = fit_asymptotic_constant(spec, 20, 60)
    assert A == pytest.approx(ordinary_mean_sum(g), rel=0.05)


def test_fit_range_checked():
    spec = forward_spectrum(zero_graph(2), 5)
    with pytest.raises(InputError):
        fit_asymptotic_constant(spec, 20, 60)
