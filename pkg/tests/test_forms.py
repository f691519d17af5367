"""Quasimodular forms, theta powers, stable evaluation and the caches."""

import json
import os
from fractions import Fraction

import mpmath as mp
import pytest

from spherelp.errors import TailTooLarge
from spherelp.forms import (QuasiForm, SeriesCache, eval_eisenstein_stable,
                            eval_theta_stable, named_series, phi_quasiform,
                            psi_eval, psi_eval_small_t, psi_qseries,
                            theta4_powers, verify_identities)
from spherelp.qseries import eisenstein_qseries


class TestPhi:
    def test_collapse_leading_terms(self):
        # weight 0, depth 2; collapsed expansion starts -240*pi*q + ...
        phi = phi_quasiform(12)
        assert phi.weight == 0
        assert phi.depth == 2
        series = phi.collapse()
        assert series.pi_power == 1
        assert series.coeff(0) == 0
        assert series.coeff(1) == -240
        assert series.coeff(2) == -14400

    def test_partwise_eval_matches_collapse(self):
        phi = phi_quasiform(16)
        with mp.workprec(200):
            z = mp.mpc(0, mp.mpf("1.3"))
            direct = phi.eval(z, precision=160)
            collapsed, _ = phi.collapse().eval(z, precision=160)
            assert abs(direct - collapsed) < mp.mpf("1e-40")

    def test_order_guard(self):
        with pytest.raises(ValueError):
            phi_quasiform(3)


class TestTheta:
    def test_jacobi_identity_exact(self):
        # theta3^4 = theta4^4 + theta2^4, exact to the working order
        a, b, c = theta4_powers(24)
        assert a == b + c

    def test_against_mpmath_jtheta(self):
        # independent oracle for all three fourth powers across the regimes
        with mp.workprec(200):
            for t in ("0.3", "1.0", "2.7"):
                t = mp.mpf(t)
                q = mp.exp(-mp.pi * t)
                for variant, idx in (("theta3", 3), ("theta4", 4),
                                     ("theta2", 2)):
                    got = eval_theta_stable(variant, t, precision=160)
                    want = mp.jtheta(idx, 0, q) ** 4
                    assert abs(got - want) < mp.mpf("1e-40")

    def test_theta2_single_power_rejected(self):
        with pytest.raises(ValueError):
            eval_theta_stable("theta2", 1.5, fourth_power=False)


class TestPsi:
    def test_laurent_structure(self):
        psi = psi_qseries(16)
        assert psi.pi_power == -1
        assert psi.min_exp == -2
        assert psi.coeff(-2) != 0
        assert psi.coeff(-1) == 0

    def test_small_t_path_agrees_with_series(self):
        # overlap band around t = 1: the modular inversion path and the
        # direct series summation must agree far below double precision
        for t in ("0.8", "0.95", "1.0"):
            t = mp.mpf(t)
            a = psi_eval_small_t(t, precision=200)
            b = psi_eval(mp.mpc(0, t), precision=200)
            assert abs(a - b) < mp.mpf("1e-40")

    def test_weight_minus_two_inversion(self):
        # psi(z) - psi(z+1) - z^2 psi(-1/z) = 0; spot-check off the axis
        with mp.workprec(200):
            z = mp.mpc("0.2", "1.4")
            res = (psi_eval(z, 160) - psi_eval(z + 1, 160)
                   - z * z * psi_eval(-1 / z, 160))
            assert abs(res) < mp.mpf("1e-30")


class TestStableEisenstein:
    def test_e6_vanishes_at_i(self):
        # i is a fixed point of the inversion with an odd multiplier sign
        v = eval_eisenstein_stable(6, 1.0, precision=160)
        assert abs(v) < mp.mpf("1e-40")

    def test_inversion_law_small_t(self):
        # i*t and i/(1/t) name the same point through the two which= paths
        with mp.workprec(200):
            t = mp.mpf("0.05")
            via_law = eval_eisenstein_stable(4, t, which="at_it",
                                             precision=160)
            direct = eval_eisenstein_stable(4, 1 / t, which="at_i_over_t",
                                            precision=160)
            assert abs(via_law - direct) < mp.mpf("1e-40") * abs(direct)

    def test_e2_inversion_correction(self):
        with mp.workprec(200):
            t = mp.mpf(2)
            lhs = eval_eisenstein_stable(2, t, which="at_i_over_t",
                                         precision=160)
            base = eval_eisenstein_stable(2, t, which="at_it", precision=160)
            assert abs(lhs - (-t * t * base + 6 * t / mp.pi)) < mp.mpf("1e-40")

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            eval_eisenstein_stable(8, 1.0)
        with pytest.raises(ValueError):
            eval_eisenstein_stable(4, -1.0)
        with pytest.raises(ValueError):
            eval_eisenstein_stable(4, 1.0, which="elsewhere")


class TestVerifyIdentities:
    def test_report_passes(self):
        report = verify_identities(order=12, precision=128)
        names = [c["name"] for c in report["checks"]]
        assert names == ["theta_e8_equals_e4",
                         "leech_theta_no_length_sqrt2_vectors",
                         "e2_quasimodular_law",
                         "psi_functional_equation"]
        assert report["passed"], report


class TestNamedSeriesAndCache:
    def test_known_names(self):
        e4 = named_series("E4", 10)
        assert e4 == eisenstein_qseries(4, 10)
        leech = named_series("leech_theta", 10)
        assert leech.coeff(1) == 0
        assert leech.coeff(2) == 196560

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            named_series("E8_series", 10)

    def test_cache_roundtrip_and_corruption(self, tmp_path):
        cache = SeriesCache(str(tmp_path))
        first = cache.get("E4", 12)
        assert first == eisenstein_qseries(4, 12)
        # a second get must come back identical from disk
        assert cache.get("E4", 12) == first
        # corrupt the file: the entry is silently recomputed
        path = cache._path("E4", 12)
        with open(path, "w") as fh:
            fh.write("{not json")
        assert cache.get("E4", 12) == first
        # checksum mismatch is also treated as corruption
        with open(path) as fh:
            doc = json.load(fh)
        doc["checksum"] = "0" * 64
        with open(path, "w") as fh:
            json.dump(doc, fh)
        assert cache.get("E4", 12) == first
        assert os.path.exists(path)
