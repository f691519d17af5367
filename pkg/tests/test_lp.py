"""The LP layer: eigenbasis, dense simplex, margin LP and radius optimizer."""

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spherelp.errors import InvalidCertificate, NumericalStall
from spherelp.lattice import ball_volume
from spherelp.lpbounds import (BoundCertificate, LPInstance, RadialFunction,
                               assemble_and_solve, bound_from_certificate,
                               build_instance, certify, default_degree,
                               eigenbasis, laguerre_basis, margin_lp,
                               optimize_r, simplex_solve, validate_eigenbasis)
from spherelp.reference import record_density


class TestEigenbasis:
    def test_against_mpmath_laguerre(self):
        # independent oracle: b_k(r) = L_k^{(n/2-1)}(2 pi r^2) e^{-pi r^2}
        radii = np.array([0.0, 0.4, 1.1, 2.3])
        for n in (1, 3, 8):
            basis = laguerre_basis(n, 6, radii)
            with mp.workprec(120):
                alpha = mp.mpf(n) / 2 - 1
                for k in range(7):
                    for j, r in enumerate(radii):
                        x = 2 * mp.pi * mp.mpf(r) ** 2
                        want = (mp.laguerre(k, alpha, x)
                                * mp.exp(-mp.pi * mp.mpf(r) ** 2))
                        assert abs(basis[k, j] - float(want)) < 1e-12

    def test_unweighted_strips_gaussian(self):
        radii = np.array([0.5, 1.5])
        w = laguerre_basis(4, 5, radii, weighted=True)
        u = laguerre_basis(4, 5, radii, weighted=False)
        env = np.exp(-np.pi * radii ** 2)
        assert np.allclose(w, u * env, rtol=1e-13)

    def test_transform_eigenvalues(self):
        desc = eigenbasis(8, 5)
        assert desc["eigenvalues"] == [1, -1, 1, -1, 1, -1]
        mat = desc["evaluate"](np.array([0.7]))
        assert mat.shape == (6, 1)

    def test_oracle_residual(self):
        # the (-1)^k transform claim against the Hankel-kernel quadrature
        assert validate_eigenbasis(8, k_max=3, precision=100) < 1e-8

    def test_default_degree_bands(self):
        assert default_degree(2) == 16
        assert default_degree(8) == 40
        assert default_degree(24) == 40


class TestRadialFunction:
    def test_value_is_coefficient_combination(self):
        coeffs = np.array([0.3, -0.2, 0.05])
        f = RadialFunction(n=8, coeffs=coeffs)
        radii = np.array([0.2, 1.0, 1.8])
        basis = laguerre_basis(8, 2, radii)
        assert np.allclose(f.value(radii), coeffs @ basis, rtol=1e-14)

    def test_hat_flips_odd_coefficients(self):
        coeffs = np.array([0.3, -0.2, 0.05, 0.01])
        f = RadialFunction(n=8, coeffs=coeffs)
        flipped = RadialFunction(n=8, coeffs=coeffs * (-1.0) ** np.arange(4))
        radii = np.array([0.4, 1.3])
        assert np.allclose(f.hat_value(radii), flipped.value(radii),
                           rtol=1e-14)


class TestSimplex:
    def test_basic_maximum(self):
        # max x + 2y st x + y <= 4, y <= 3  ->  (1, 3), objective 7
        x, obj, _, duals = simplex_solve(
            np.array([1.0, 2.0]),
            np.array([[1.0, 1.0], [0.0, 1.0]]), np.array([4.0, 3.0]))
        assert abs(obj - 7.0) < 1e-12
        assert np.allclose(x[0] + x[1], [1.0, 3.0], atol=1e-12)
        # duals of the two rows: 1 and 1
        assert np.allclose(duals[0] + duals[1], [1.0, 1.0], atol=1e-12)

    def test_equality_constraint(self):
        # max x st x + y = 2, x <= 1.5  ->  x = 1.5
        x, obj, _, _ = simplex_solve(
            np.array([1.0, 0.0]),
            np.array([[1.0, 0.0]]), np.array([1.5]),
            np.array([[1.0, 1.0]]), np.array([2.0]))
        assert abs(obj - 1.5) < 1e-12
        assert abs(x[0][1] + x[1][1] - 0.5) < 1e-12

    def test_negative_rhs_flip(self):
        # -x <= -1 forces x >= 1; min cost via max of -x gives x = 1
        x, obj, _, _ = simplex_solve(
            np.array([-1.0, 0.0]),
            np.array([[-1.0, 0.0]]), np.array([-1.0]))
        assert abs(obj + 1.0) < 1e-12

    def test_infeasible(self):
        with pytest.raises(InvalidCertificate):
            simplex_solve(np.array([1.0]),
                          np.array([[1.0], [-1.0]]), np.array([1.0, -3.0]))

    def test_unbounded(self):
        with pytest.raises(NumericalStall):
            simplex_solve(np.array([1.0, 0.0]),
                          np.array([[-1.0, 0.0]]), np.array([0.0]))

    @settings(max_examples=30, deadline=None)
    @given(st.data())
    def test_matches_reference_solver(self, data):
        from scipy.optimize import linprog

        nvar = data.draw(st.integers(2, 4))
        nrow = data.draw(st.integers(1, 4))
        # coefficients are quantized: entries below the solver's pivot
        # tolerance deliberately count as zero, which a reference solver
        # working in plain doubles would treat as a (huge) finite ray
        vals = st.floats(-3, 3, allow_nan=False).map(
            lambda v: round(v, 3))
        c = np.array(data.draw(st.lists(vals, min_size=nvar, max_size=nvar)))
        a = np.array([data.draw(st.lists(vals, min_size=nvar, max_size=nvar))
                      for _ in range(nrow)])
        b = np.abs(np.array(data.draw(
            st.lists(vals, min_size=nrow, max_size=nrow)))) + 0.5
        # b > 0 makes x = 0 feasible, so the instance is never infeasible
        ref = linprog(-c, A_ub=a, b_ub=b, bounds=(0, None), method="highs")
        try:
            _x, obj, _, _ = simplex_solve(c, a, b)
        except NumericalStall:
            # the reference's presolve sometimes labels unbounded instances
            # "infeasible"; disabling it gives the unambiguous status
            if ref.status != 3:
                ref = linprog(-c, A_ub=a, b_ub=b, bounds=(0, None),
                              method="highs", options={"presolve": False})
            assert ref.status == 3  # unbounded
            return
        assert ref.status == 0
        assert abs(obj - (-ref.fun)) < 1e-9 * (1 + abs(obj))


class TestMarginLP:
    def test_dimension_one_known_radius(self):
        # in dimension 1 the optimal crossing radius is 1
        feasible, coeffs, margin = assemble_and_solve(1, 1.001, degree=12)
        assert feasible and margin > 0
        assert len(coeffs) == 13
        infeasible, none_coeffs, _ = assemble_and_solve(1, 0.93, degree=12)
        assert not infeasible and none_coeffs is None

    def test_margin_lp_normalizes_f0(self):
        inst = build_instance(8, math.sqrt(2) * 1.01, degree=24, npts=100)
        margin, coeffs, iters = margin_lp(inst)
        assert margin > 0 and iters > 0
        with mp.workprec(140):
            basis = laguerre_basis(8, 24, np.array([0.0]))
            f0 = mp.fsum(c * float(basis[k, 0])
                         for k, c in enumerate(coeffs))
            assert abs(f0 - 1) < mp.mpf("1e-12")

    def test_certify_flags_are_consistent(self):
        # a raw single-radius solution may violate between grid points; the
        # violation lists must agree with the reported fine margins either way
        r = math.sqrt(2) * 1.01
        inst = build_instance(8, r, degree=24, npts=100)
        _margin, coeffs, _ = margin_lp(inst)
        fine_f, fine_h, viol_f, viol_h = certify(8, r, coeffs, npts=100)
        assert (viol_f.size == 0) == (fine_f >= -1e-18)
        assert (viol_h.size == 0) == (fine_h >= -1e-18)

    def test_certify_accepts_refined_certificate(self):
        cert = optimize_r(8, degree=24, npts=100)
        fine_f, fine_h, viol_f, viol_h = certify(8, cert.r, cert.coeffs,
                                                 npts=100)
        assert fine_f > -1e-15 and fine_h > -1e-15
        assert viol_f.size == 0 and viol_h.size == 0

    def test_infeasible_radius_raises(self):
        inst = build_instance(8, 1.2, degree=24, npts=100)
        with pytest.raises(InvalidCertificate):
            margin_lp(inst)


class TestOptimizeR:
    def test_dimension_one_bound(self):
        cert = optimize_r(1)
        assert abs(cert.r - 1.0) < 5e-3
        assert record_density(1) <= cert.bound <= 1.005
        assert cert.fine_margin_f > -1e-15
        assert cert.fine_margin_hat > -1e-15
        # the bound is the ball volume at half the crossing radius
        assert abs(bound_from_certificate(cert) - cert.bound) < 1e-15
        doc = cert.to_json_dict()
        assert doc["n"] == 1 and doc["bound"] == cert.bound

    def test_bound_from_certificate_guards_margins(self):
        cert = BoundCertificate(n=1, degree=12, r=1.0, coeffs=[],
                                margin=0.1, fine_margin_f=-1e-3,
                                fine_margin_hat=0.0,
                                bound=float(ball_volume(1, 0.5, 80)))
        with pytest.raises(InvalidCertificate):
            bound_from_certificate(cert)
