"""Modular and quasimodular forms built on exact q-series.

Provides the Eisenstein series E2/E4/E6, theta fourth powers on the level-2
nome, the weight-0 depth-2 quasimodular form `phi` and the weight -2 form
`psi` entering the eight-dimensional magic function, plus numerically stable
dual-path evaluation on the imaginary axis and the identity verification
report.
"""

from __future__ import annotations

import functools
import hashlib
import json
import os
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .errors import TailTooLarge
from .qseries import QSeries, eisenstein_qseries, theta_z_qseries

__all__ = [
    "QuasiForm",
    "phi_quasiform",
    "psi_qseries",
    "theta4_powers",
    "eval_eisenstein_stable",
    "eval_theta_stable",
    "verify_identities",
    "named_series",
    "SeriesCache",
]


@dataclass(frozen=True)
class QuasiForm:
    """c0 + c1*E2 + c2*E2**2 with genuinely modular q-series coefficients."""

    parts: tuple  # (QSeries, QSeries, QSeries)
    weight: int

    @property
    def depth(self):
        d = 0
        for i, p in enumerate(self.parts):
            if not p.is_zero():
                d = i
        return d

    def collapse(self):
        """Substitute the q-expansion of E2 to obtain a single q-series."""
        order = min(p.order for p in self.parts)
        e2 = eisenstein_qseries(2, max(order + 4, 8))
        acc = self.parts[0]
        if len(self.parts) > 1:
            acc = acc + self.parts[1] * e2
        if len(self.parts) > 2:
            acc = acc + self.parts[2] * e2 * e2
        return acc

    def eval(self, z, precision=128):
        """Part-wise evaluation: sum_i c_i(z) * E2(z)^i."""
        order = min(p.order for p in self.parts)
        e2 = eisenstein_qseries(2, max(order + 4, 8))
        e2v, _ = e2.eval(z, precision)
        acc = mp.mpf(0)
        for i, p in enumerate(self.parts):
            v, _ = p.eval(z, precision)
            acc = acc + v * e2v ** i
        return acc


@functools.lru_cache(maxsize=None)
def phi_quasiform(order):
    """The weight-0 depth-2 quasimodular form 4*pi*(E2*E4 - E6)^2 / (5*(E6^2 - E4^3)).

    Parts are exact q-series with a global factor of pi; the collapsed
    expansion starts at -240*pi*q.
    """
    if order < 4:
        raise ValueError("order must be >= 4")
    # extra working order: the denominator has valuation 1, which costs terms
    work = order + 6
    e4 = eisenstein_qseries(4, work)
    e6 = eisenstein_qseries(6, work)
    den = (e6 * e6 - e4 ** 3).scale(Fraction(5, 4), -1)  # 5*(E6^2-E4^3)/(4*pi)
    inv = den.inverse()
    c0 = e6 * e6 * inv
    c1 = (e4 * e6).scale(-2) * inv
    c2 = e4 * e4 * inv
    return QuasiForm(parts=(c0, c1, c2), weight=0)


@functools.lru_cache(maxsize=None)
def theta4_powers(order):
    """(A, B, C) = (theta3^4, theta4^4, theta2^4) as q2-series.

    A is the fourth power of the theta series of Z, B its translate, and C is
    defined series-wise as A - B, avoiding fractional nome exponents.
    """
    th = theta_z_qseries(order + 4)
    a = th ** 4
    b = a.translate()
    c = a - b
    return a, b, c


@functools.lru_cache(maxsize=None)
def psi_qseries(order):
    """The weight -2 form -32*B*(5*A^2 - 5*A*B + 2*B^2) / (15*pi*A^2*(A-B)^2).

    Returned as an exact Laurent series in q2 with pi_power -1 and min_exp -2.
    """
    if order < 4:
        raise ValueError("order must be >= 4")
    work = order + 8
    a, b, c = theta4_powers(work)
    num = (b * (a * a * 5 - a * b * 5 + b * b * 2)).scale(Fraction(-32, 15), -1)
    den = a * a * c * c
    return num / den


def psi_eval_small_t(t, precision=200):
    """psi(i*t) for 0 < t <= 1 via the z -> -1/z regime.

    Writing psi through A, B, C at w = i/t (where the nome e^{-pi/t} is small):
    A(it) = t^-2 A(w), B(it) = t^-2 C(w), C(it) = t^-2 B(w), so
    psi(it) = t^2 * (-32/(15*pi)) * C*(5A^2 - 5AC + 2C^2) / (A^2 B^2) at w.
    """
    with mp.workprec(precision + 20):
        t = mp.mpf(t)
        order = _order_for_nome(mp.exp(-mp.pi / t), precision)
        a, b, c = theta4_powers(order)
        q2 = mp.exp(-mp.pi / t)
        av = a.eval_nome(q2, precision)[0]
        bv = b.eval_nome(q2, precision)[0]
        cv = c.eval_nome(q2, precision)[0]
        num = cv * (5 * av * av - 5 * av * cv + 2 * cv * cv)
        return t * t * mp.mpf(-32) / (15 * mp.pi) * num / (av * av * bv * bv)


def _order_for_nome(absq, precision, minimum=16):
    """Series order needed so the geometric tail is below 2^-precision."""
    with mp.workprec(64):
        absq = mp.mpf(absq)
        if absq <= 0:
            return minimum
        need = int(mp.ceil((precision + 8) * mp.log(2) / (-mp.log(absq)))) + 4
    return max(minimum, need)


def eval_eisenstein_stable(k, t, which="at_it", precision=128, order=None):
    """E_k(it) or E_k(i/t) for t > 0, always summing in the smaller nome.

    The two arguments are exchanged by E_k(i/t) = (it)^k E_k(it) for k in
    {4, 6} and E2(i/t) = -t^2 E2(it) + 6t/pi.
    """
    if k not in (2, 4, 6):
        raise ValueError("stable evaluation supports k in {2, 4, 6}")
    if which not in ("at_it", "at_i_over_t"):
        raise ValueError("which must be at_it or at_i_over_t")
    with mp.workprec(precision + 20):
        t = mp.mpf(t)
        if t <= 0:
            raise ValueError("t must be positive")
        # reduce to the argument i*s with s >= 1, then map across if needed
        want_inverse = (which == "at_i_over_t")
        s = t
        if s < 1:
            s = 1 / s
            want_inverse = not want_inverse
        q = mp.exp(-2 * mp.pi * s)
        n = order or _order_for_nome(q, precision)
        ek = eisenstein_qseries(k, n)
        base = ek.eval_nome(q, precision)[0]
        if not want_inverse:
            return base
        # value at i/s from the value at i*s
        if k == 2:
            return -s * s * base + 6 * s / mp.pi
        sign = 1 if k % 4 == 0 else -1
        return sign * s ** k * base


def eval_theta_stable(variant, t, precision=128, fourth_power=True):
    """theta3/theta4/theta2 data at z = i*t, stable for both large and small t.

    Only fourth powers are exposed for theta2 (and by default for all
    variants), matching how the forms here consume them.  The small-t regime
    uses A <-> A, B <-> C swaps under z -> -1/z with the factor t^-2 on fourth
    powers (t^-1/2 per single theta power).
    """
    if variant not in ("theta3", "theta4", "theta2"):
        raise ValueError("variant must be theta3, theta4 or theta2")
    with mp.workprec(precision + 20):
        t = mp.mpf(t)
        if t <= 0:
            raise ValueError("t must be positive")
        if t >= 1:
            s, swapped = t, False
        else:
            s, swapped = 1 / t, True
        q2 = mp.exp(-mp.pi * s)
        order = _order_for_nome(q2, precision)
        a, b, c = theta4_powers(order)
        if swapped:
            # theta3^4(it) = t^-2 A(i/t), theta4^4 -> theta2^4 swap
            table = {"theta3": a, "theta4": c, "theta2": b}
            factor = 1 / (t * t)
        else:
            table = {"theta3": a, "theta4": b, "theta2": c}
            factor = mp.mpf(1)
        val = table[variant].eval_nome(q2, precision)[0] * factor
        if fourth_power:
            return val
        if variant == "theta2":
            raise ValueError("theta2 is only defined through its fourth power")
        return val ** Fraction(1, 4) if val >= 0 else mp.mpf(val) ** 0.25


def psi_eval(z, precision=128):
    """psi at a general upper-half-plane point via direct series summation."""
    with mp.workprec(precision + 20):
        z = mp.mpmathify(z)
        q2 = mp.exp(1j * mp.pi * z)
        order = _order_for_nome(abs(q2), precision)
        # the geometric order estimate ignores coefficient growth, so retry
        # with a longer expansion when the tail bound rejects the evaluation
        for _ in range(5):
            try:
                return psi_qseries(order).eval_nome(q2, precision)[0]
            except TailTooLarge:
                order = int(order * 1.6) + 8
        raise TailTooLarge(f"psi tail does not converge by order {order}")


def verify_identities(order=20, sample_points=None, precision=128):
    """Cross-checks tying the exact expansions to the evaluation paths.

    (a) Theta_E8 coefficients from lattice enumeration equal E4's exactly.
    (b) The Leech theta combination (7/12)E4^3 + (5/12)E6^2 has no q^1 term.
    (c) E2(-1/z) - z^2 E2(z) + 6iz/pi vanishes at the sample points.
    (d) psi(z) - psi(z+1) - z^2 psi(-1/z) vanishes at the sample points.
    """
    from .lattice import e8_gram, basis_from_gram, enumerate_vectors

    if sample_points is None:
        sample_points = [mp.mpc(0, 2), mp.mpc(0, 1.5), mp.mpc(0.25, 1.25),
                         mp.mpc(-0.3, 1.1), mp.mpc(0.1, 0.9), mp.mpc(0, 3),
                         mp.mpc(0.5, 1.3), mp.mpc(-0.2, 2.5), mp.mpc(0, 0.8),
                         mp.mpc(0.4, 1.7)]
    report = {"checks": [], "passed": True}

    e4 = eisenstein_qseries(4, order)
    basis = basis_from_gram(e8_gram(), precision=96)
    counts = enumerate_vectors(basis, 2 * order)
    mismatch = []
    for m in range(order + 1):
        got = counts.counts.get(2 * m, 0) if m else 1
        if Fraction(got) != e4.coeff(m):
            mismatch.append(m)
    report["checks"].append({
        "name": "theta_e8_equals_e4",
        "pass": not mismatch,
        "detail": {"order": order, "mismatched_exponents": mismatch},
    })

    e6 = eisenstein_qseries(6, order)
    leech = e4 ** 3 * Fraction(7, 12) + e6 ** 2 * Fraction(5, 12)
    q1 = leech.coeff(1)
    report["checks"].append({
        "name": "leech_theta_no_length_sqrt2_vectors",
        "pass": q1 == 0,
        "detail": {"q1": str(q1), "q2": str(leech.coeff(2))},
    })

    with mp.workprec(precision + 20):
        min_im = min(min(mp.im(mp.mpmathify(z)),
                         mp.im(-1 / mp.mpmathify(z))) for z in sample_points)
        eval_order = _order_for_nome(mp.exp(-2 * mp.pi * min_im), precision)
        e2 = eisenstein_qseries(2, eval_order)

        def e2_at(w):
            nonlocal e2, eval_order
            for _ in range(5):
                try:
                    return e2.eval(w, precision)[0]
                except TailTooLarge:
                    eval_order = int(eval_order * 1.6) + 8
                    e2 = eisenstein_qseries(2, eval_order)
            raise TailTooLarge(f"E2 tail does not converge by order {eval_order}")

        worst_c = mp.mpf(0)
        for z in sample_points:
            z = mp.mpmathify(z)
            lhs = e2_at(-1 / z)
            rhs = z * z * e2_at(z) - 6j * z / mp.pi
            worst_c = max(worst_c, abs(lhs - rhs))
        tol_c = mp.mpf(10) ** -(25 * precision // 128)
        report["checks"].append({
            "name": "e2_quasimodular_law",
            "pass": worst_c < tol_c,
            "detail": {"max_residual": float(worst_c), "tolerance": float(tol_c)},
        })

        worst_d = mp.mpf(0)
        for z in sample_points:
            z = mp.mpmathify(z)
            res = (psi_eval(z, precision) - psi_eval(z + 1, precision)
                   - z * z * psi_eval(-1 / z, precision))
            worst_d = max(worst_d, abs(res))
        tol_d = mp.mpf(10) ** -(20 * precision // 128)
        report["checks"].append({
            "name": "psi_functional_equation",
            "pass": worst_d < tol_d,
            "detail": {"max_residual": float(worst_d), "tolerance": float(tol_d)},
        })

    report["passed"] = all(c["pass"] for c in report["checks"])
    return report


# -- named series and the on-disk cache ------------------------------------

def named_series(name, order):
    """Series lookup used by the CLI and the cache."""
    builders = {
        "E2": lambda: eisenstein_qseries(2, order),
        "E4": lambda: eisenstein_qseries(4, order),
        "E6": lambda: eisenstein_qseries(6, order),
        "theta_z": lambda: theta_z_qseries(order),
        "theta3_4": lambda: theta4_powers(order)[0],
        "theta4_4": lambda: theta4_powers(order)[1],
        "theta2_4": lambda: theta4_powers(order)[2],
        "phi": lambda: phi_quasiform(order).collapse(),
        "psi": lambda: psi_qseries(order),
        "leech_theta": lambda: (eisenstein_qseries(4, order) ** 3 * Fraction(7, 12)
                                + eisenstein_qseries(6, order) ** 2 * Fraction(5, 12)),
    }
    if name not in builders:
        raise KeyError(f"unknown series {name!r}; choose from {sorted(builders)}")
    return builders[name]()


class SeriesCache:
    """JSON file cache for exact series keyed by (name, order, nome_div).

    Corrupt entries (bad JSON or checksum mismatch) are silently recomputed.
    """

    def __init__(self, cache_dir):
        self.cache_dir = cache_dir

    def _path(self, name, order):
        key = f"{name}-{order}"
        return os.path.join(self.cache_dir, f"series-{key}.json")

    def get(self, name, order):
        path = self._path(name, order)
        if os.path.exists(path):
            try:
                with open(path) as fh:
                    doc = json.load(fh)
                series = QSeries.from_json_dict(doc["series"])
                if doc.get("checksum") == series.checksum():
                    return series
            except (ValueError, KeyError, OSError):
                pass
        series = named_series(name, order)
        self.put(name, order, series)
        return series

    def put(self, name, order, series):
        os.makedirs(self.cache_dir, exist_ok=True)
        doc = {
            "name": name,
            "order": order,
            "series": series.to_json_dict(),
            "checksum": series.checksum(),
        }
        with open(self._path(name, order), "w") as fh:
            json.dump(doc, fh)
