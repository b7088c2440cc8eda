import json

import numpy as np
import pytest

from frozenstar.errors import InputError
from frozenstar.fd_oracle import (build_fd_matrix, compare_spectra, fd_eigen, fd_spectrum,
                                  richardson_order)
from frozenstar.potential import EdgeSpec, GraphSpec, PotentialFn
from frozenstar.spectrum import forward_spectrum, scan_real_roots

from conftest import random_frozen_args, trig_potential, zero_graph


class TestMatrix:
    def test_zero_graph_structure(self):
        N = 200
        mat = build_fd_matrix(zero_graph(2), N)
        A = mat.entries
        assert mat.size == 2 * (N - 1)
        inv_h2 = 1 / mat.h**2
        # interior rows away from the vertex are the plain (-1, 2, -1) stencil
        for r in (5, 50, N - 5):
            np.testing.assert_allclose(A[r, r - 1:r + 2], [-inv_h2, 2 * inv_h2, -inv_h2])
            assert np.count_nonzero(A[r]) == 3
        off = A.copy()
        off[:N - 1, :N - 1] = 0
        off[N - 1:, N - 1:] = 0
        # the edges only talk to each other through the eliminated vertex value
        assert set(np.flatnonzero(off.any(axis=1))) == {N - 2, 2 * N - 3}

    def test_frozen_row_weights(self):
        N = 100
        c, a = 0.7, 1.234
        e = EdgeSpec(PotentialFn.constant(c), (a,))
        mat = build_fd_matrix(GraphSpec((EdgeSpec(PotentialFn.zero()), e)), N)
        A = mat.entries
        h = mat.h
        i0 = int(np.floor(a / h))
        t = a / h - i0
        off = mat.offsets[1]
        r = off + 60 - 1  # row of x_60 on the frozen edge (Dirichlet: node 1 is the first unknown)
        assert A[r, off + i0 - 1] == pytest.approx(c * (1 - t))
        assert A[r, off + i0] == pytest.approx(c * t)

    def test_neumann_ghost_row(self):
        N = 100
        g = GraphSpec((EdgeSpec(PotentialFn.zero(), (), 1), EdgeSpec(PotentialFn.zero())))
        mat = build_fd_matrix(g, N)
        A = mat.entries
        assert mat.size == N + N - 1
        np.testing.assert_allclose(A[0, :2], [2 / mat.h**2, -2 / mat.h**2])

    def test_min_n(self):
        with pytest.raises(InputError):
            build_fd_matrix(zero_graph(2), 50)


class TestSpectrum:
    def test_p2_zero(self):
        ev = fd_spectrum(build_fd_matrix(zero_graph(2), 2000), 6)
        want = (np.array([1, 2, 3, 4, 5, 6]) / 2) ** 2
        np.testing.assert_allclose(ev, want, rtol=1e-3)

    def test_p3_zero_doubles(self):
        ev = fd_spectrum(build_fd_matrix(zero_graph(3), 1000), 6)
        np.testing.assert_allclose(ev, [0.25, 1, 1, 2.25, 4, 4], rtol=1e-3)

    def test_constant_shift(self):
        c = 0.6
        q = PotentialFn.constant(c)
        g = GraphSpec((EdgeSpec(q), EdgeSpec(q), EdgeSpec(q)))
        base = fd_spectrum(build_fd_matrix(zero_graph(3), 400), 8)
        shifted = fd_spectrum(build_fd_matrix(g, 400), 8)
        np.testing.assert_allclose(shifted - base, c, atol=1e-10)

    def test_dense_matches_sparse(self, rng):
        q, _ = trig_potential(rng, degree=2)
        g = GraphSpec((EdgeSpec(q), EdgeSpec(q, (1.1,))))
        mat = build_fd_matrix(g, 300)
        a, _ = fd_eigen(mat, 6, "sparse")
        b, _ = fd_eigen(mat, 6, "dense")
        np.testing.assert_allclose(a, b, rtol=1e-9)

    def test_count_limit(self):
        with pytest.raises(InputError):
            fd_eigen(build_fd_matrix(zero_graph(2), 200), 31)

    def test_bad_method(self):
        with pytest.raises(InputError):
            fd_eigen(build_fd_matrix(zero_graph(2), 200), 3, "qr")

    def test_neumann_zero(self):
        # y'(0) = 0 on one edge, y(0) = 0 on the other: cos(rho pi) cos(rho pi) - sin sin = cos(2 rho pi)
        g = GraphSpec((EdgeSpec(PotentialFn.zero(), (), 1), EdgeSpec(PotentialFn.zero())))
        ev = fd_spectrum(build_fd_matrix(g, 1000), 4)
        np.testing.assert_allclose(ev, ((2 * np.arange(4) + 1) / 4) ** 2, rtol=1e-3)


class TestAgainstAnalytic:
    @pytest.mark.parametrize("seed", [1, 2])
    def test_frozen_instance_order(self, seed):
        rng = np.random.default_rng(seed)
        edges = [EdgeSpec(trig_potential(rng, degree=2, amp=0.3)[0]),
                 EdgeSpec(trig_potential(rng, degree=2, amp=0.3)[0], random_frozen_args(rng, 2))]
        g = GraphSpec(tuple(edges))
        lam = scan_real_roots(g, 5.0).roots[:8] ** 2
        fine = fd_spectrum(build_fd_matrix(g, 2000), 8)
        coarse = fd_spectrum(build_fd_matrix(g, 1000), 8)
        report = compare_spectra(lam, fine, 2e-3)
        assert report.passed
        assert 1.7 <= richardson_order(coarse - lam, fine - lam) <= 2.3

    def test_accepts_spectrum(self):
        spec = forward_spectrum(zero_graph(2), 3)
        fd = fd_spectrum(build_fd_matrix(zero_graph(2), 2000), 6)
        assert compare_spectra(spec, fd).max_rel_deviation < 1e-3


class TestCompare:
    def test_identical(self):
        r = compare_spectra([1.0, 2.0, 3.0], [3.0, 1.0, 2.0])
        assert r.max_rel_deviation == 0 and r.passed

    def test_unmatched(self):
        r = compare_spectra([1.0, 2.0], [1.0, 2.1, 7.0], tol=0.01)
        assert r.unmatched_fd == (7.0,)
        assert r.max_rel_deviation == pytest.approx(0.05)
        assert not r.passed
        doc = json.loads(json.dumps(r.to_json()))
        assert doc["passed"] is False and doc["pairs"] == [[1.0, 1.0], [2.0, 2.1]]

    def test_multiplicity(self):
        r = compare_spectra([1.0, 1.0, 2.0], [1.0, 1.0001, 2.0])
        assert r.max_rel_deviation == pytest.approx(1e-4)
        assert r.unmatched_fd == ()

    def test_empty(self):
        with pytest.raises(InputError):
            compare_spectra([], [1.0])


def test_richardson_synthetic():
    e = np.array([1e-3, -2e-3, 5e-4])
    assert richardson_order(4 * e, e) == pytest.approx(2.0)
    assert richardson_order(8 * e, e) == pytest.approx(3.0)
