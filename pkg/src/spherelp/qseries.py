"""Truncated Laurent series in a nome with exact rational coefficients.

A series represents  pi^pi_power * sum_{m=min_exp}^{order} c_m q^m  where
q = exp(2*pi*i*z/nome_div).  nome_div=1 is the classical nome q = e^{2 pi i z};
nome_div=2 gives the level-2 nome q2 = e^{pi i z}, so half-integer exponents of
q become integer exponents of q2.  Coefficients beyond `order` are unknown, not
zero, and every operation tracks the order to which its result is valid.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .errors import DivideByZeroSeries, InvalidWeight, OrderUnderflow, TailTooLarge

__all__ = [
    "QSeries",
    "EvalPoint",
    "bernoulli_number",
    "divisor_sigma",
    "eisenstein_qseries",
    "theta_z_qseries",
    "series_arith",
    "eval_qseries",
]


@dataclass(frozen=True)
class EvalPoint:
    """A point z in the upper half-plane together with a working precision."""

    z: complex
    precision: int = 128

    def __post_init__(self):
        if not (getattr(self.z, "imag", 0) > 0):
            raise ValueError("EvalPoint requires Im z > 0")


class QSeries:
    __slots__ = ("nome_div", "min_exp", "coeffs", "pi_power", "order")

    def __init__(self, nome_div, min_exp, coeffs, order, pi_power=0):
        if nome_div not in (1, 2):
            raise ValueError("nome_div must be 1 or 2")
        coeffs = [Fraction(c) for c in coeffs]
        expected = order - min_exp + 1
        if expected < 1:
            raise OrderUnderflow(f"order {order} below min_exp {min_exp}")
        if len(coeffs) != expected:
            raise ValueError(f"need {expected} coefficients, got {len(coeffs)}")
        # canonical form: drop leading zeros so min_exp points at the first
        # (possibly) nonzero coefficient
        while len(coeffs) > 1 and coeffs[0] == 0:
            coeffs.pop(0)
            min_exp += 1
        self.nome_div = nome_div
        self.min_exp = min_exp
        self.coeffs = tuple(coeffs)
        self.pi_power = pi_power
        self.order = order

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, value, order, nome_div=1, pi_power=0):
        c = [Fraction(value)] + [Fraction(0)] * order
        return cls(nome_div, 0, c, order, pi_power)

    @classmethod
    def zero(cls, order, nome_div=1, pi_power=0):
        return cls.constant(0, order, nome_div, pi_power)

    # -- basic queries -----------------------------------------------------

    def coeff(self, m):
        """Exact coefficient of q^m.  Raises if m is beyond the valid order."""
        if m > self.order:
            raise OrderUnderflow(f"coefficient {m} beyond valid order {self.order}")
        if m < self.min_exp:
            return Fraction(0)
        return self.coeffs[m - self.min_exp]

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def valuation(self):
        """Exponent of the first nonzero coefficient, or None if zero to order."""
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return self.min_exp + i
        return None

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        a, b = self._common_nome(other)
        if a.pi_power != b.pi_power and not (a.is_zero() and b.is_zero()):
            return False
        o = min(a.order, b.order)
        return all(a.coeff(m) == b.coeff(m)
                   for m in range(min(a.min_exp, b.min_exp), o + 1))

    def __hash__(self):
        return hash((self.nome_div, self.min_exp, self.coeffs, self.pi_power))

    def __repr__(self):
        head = []
        for i, c in enumerate(self.coeffs[:4]):
            if c:
                head.append(f"{c}*q{'' if self.nome_div == 1 else '2'}^{self.min_exp + i}")
        body = " + ".join(head) or "0"
        pi = f"pi^{self.pi_power} * " if self.pi_power else ""
        return f"QSeries({pi}{body} + O(q^{self.order + 1}))"

    # -- nome promotion ----------------------------------------------------

    def to_nome_div(self, nome_div):
        if nome_div == self.nome_div:
            return self
        if self.nome_div == 1 and nome_div == 2:
            c = []
            for i, v in enumerate(self.coeffs):
                c.append(v)
                if i < len(self.coeffs) - 1:
                    c.append(Fraction(0))
            return QSeries(2, 2 * self.min_exp, c, 2 * self.order + 1, self.pi_power)
        raise ValueError("can only promote nome_div 1 -> 2")

    def _common_nome(self, other):
        nd = max(self.nome_div, other.nome_div)
        return self.to_nome_div(nd), other.to_nome_div(nd)

    # -- arithmetic --------------------------------------------------------

    def __neg__(self):
        return QSeries(self.nome_div, self.min_exp, [-c for c in self.coeffs],
                       self.order, self.pi_power)

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QSeries.constant(other, self.order, self.nome_div, self.pi_power)
        a, b = self._common_nome(other)
        if a.pi_power != b.pi_power:
            if a.is_zero():
                a = QSeries(a.nome_div, a.min_exp, a.coeffs, a.order, b.pi_power)
            elif b.is_zero():
                b = QSeries(b.nome_div, b.min_exp, b.coeffs, b.order, a.pi_power)
            else:
                raise ValueError("cannot add series with different pi powers")
        order = min(a.order, b.order)
        lo = min(a.min_exp, b.min_exp)
        if order < lo:
            raise OrderUnderflow("sum has no valid coefficients")
        c = [a.coeff(m) + b.coeff(m) for m in range(lo, order + 1)]
        return QSeries(a.nome_div, lo, c, order, a.pi_power)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QSeries.constant(other, self.order, self.nome_div, self.pi_power)
        return self.__add__(-other)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def scale(self, rational, pi_shift=0):
        """Multiply by rational * pi^pi_shift."""
        r = Fraction(rational)
        return QSeries(self.nome_div, self.min_exp, [r * c for c in self.coeffs],
                       self.order, self.pi_power + pi_shift)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        a, b = self._common_nome(other)
        order = min(a.order + b.min_exp, b.order + a.min_exp)
        lo = a.min_exp + b.min_exp
        if order < lo:
            raise OrderUnderflow("product has no valid coefficients")
        c = [Fraction(0)] * (order - lo + 1)
        for i, ai in enumerate(a.coeffs):
            if ai == 0:
                continue
            ei = a.min_exp + i
            for j, bj in enumerate(b.coeffs):
                e = ei + b.min_exp + j
                if e > order:
                    break
                if bj != 0:
                    c[e - lo] += ai * bj
        return QSeries(a.nome_div, lo, c, order, a.pi_power + b.pi_power)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def inverse(self):
        v = self.valuation()
        if v is None:
            raise DivideByZeroSeries("cannot invert a series that is zero to order")
        # u = q^-v * series / leading is a unit power series; invert by recurrence
        lead = self.coeff(v)
        n_known = self.order - v  # unit part known through q^n_known
        u = [self.coeff(v + m) / lead for m in range(n_known + 1)]
        inv = [Fraction(1)] + [Fraction(0)] * n_known
        for m in range(1, n_known + 1):
            inv[m] = -sum(u[k] * inv[m - k] for k in range(1, m + 1))
        return QSeries(self.nome_div, -v, [c / lead for c in inv],
                       n_known - v, -self.pi_power)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1, 1) / Fraction(other))
        return self * other.inverse()

    def __pow__(self, k):
        if not isinstance(k, int):
            raise TypeError("series powers must be integers")
        if k < 0:
            return self.inverse() ** (-k)
        result = QSeries.constant(1, self.order, self.nome_div)
        base = self
        while k:
            if k & 1:
                result = result * base
            base_needed = k >> 1
            if base_needed:
                base = base * base
            k >>= 1
        return result

    def translate(self):
        """The image under z -> z+1.

        For nome_div 2 the coefficient of q2^n picks up (-1)^n; for nome_div 1
        the map is the identity.
        """
        if self.nome_div == 1:
            return self
        c = [v if (self.min_exp + i) % 2 == 0 else -v
             for i, v in enumerate(self.coeffs)]
        return QSeries(2, self.min_exp, c, self.order, self.pi_power)

    # -- serialization -----------------------------------------------------

    def to_json_dict(self):
        return {
            "nome_div": self.nome_div,
            "min_exp": self.min_exp,
            "pi_power": self.pi_power,
            "order": self.order,
            "coeffs": [[c.numerator, c.denominator] for c in self.coeffs],
        }

    @classmethod
    def from_json_dict(cls, d):
        coeffs = [Fraction(n, den) for n, den in d["coeffs"]]
        # stored coefficients start at min_exp; pad up to order
        coeffs += [Fraction(0)] * (d["order"] - d["min_exp"] + 1 - len(coeffs))
        return cls(d["nome_div"], d["min_exp"], coeffs, d["order"], d["pi_power"])

    def checksum(self):
        payload = json.dumps(self.to_json_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()

    # -- evaluation --------------------------------------------------------

    def eval(self, z, precision=128):
        """Evaluate at z (Im z > 0) with `precision` bits; returns (value, tail)."""
        with mp.workprec(precision + 20):
            q = mp.exp(2j * mp.pi * mp.mpmathify(z) / self.nome_div)
            return self.eval_nome(q, precision)

    def eval_nome(self, q, precision=128):
        """Evaluate with an explicit nome value (|q| < 1); returns (value, tail)."""
        with mp.workprec(precision + 20):
            q = mp.mpmathify(q)
            absq = abs(q)
            if absq >= 1:
                raise TailTooLarge("nome magnitude >= 1")
            # Horner from the top coefficient down
            acc = mp.mpf(0)
            for c in reversed(self.coeffs):
                acc = acc * q + (mp.mpf(c.numerator) / c.denominator)
            acc *= q ** self.min_exp
            if self.pi_power:
                acc *= mp.pi ** self.pi_power
            scale = max((abs(c) for c in self.coeffs[-5:]), default=Fraction(0))
            tail = (mp.mpf(scale.numerator) / max(scale.denominator, 1)
                    * absq ** (self.order + 1) / (1 - absq))
            target = mp.mpf(2) ** (-precision)
            if tail > target * max(1, abs(acc)):
                raise TailTooLarge(
                    f"tail estimate {mp.nstr(tail, 5)} exceeds target at order {self.order}")
            if mp.im(acc) == 0:
                return mp.re(acc), tail
            return acc, tail


def series_arith(a, b, op):
    """Dispatch table mirroring the series operations by name."""
    ops = {
        "add": lambda: a + b,
        "sub": lambda: a - b,
        "mul": lambda: a * b,
        "div": lambda: a / b,
        "pow": lambda: a ** b,
        "translate": lambda: a.translate(),
    }
    if op not in ops:
        raise ValueError(f"unknown op {op!r}")
    return ops[op]()


def eval_qseries(s, point):
    """Evaluate a QSeries at an EvalPoint; returns the complex value."""
    value, _tail = s.eval(point.z, point.precision)
    return value


# -- number-theoretic helpers ---------------------------------------------

def divisor_sigma(power, m):
    """Sum of the `power`-th powers of the divisors of m."""
    if m < 1:
        raise ValueError("m must be positive")
    total = 0
    d = 1
    while d * d <= m:
        if m % d == 0:
            total += d ** power
            e = m // d
            if e != d:
                total += e ** power
        d += 1
    return total


def bernoulli_number(n):
    """Exact Bernoulli number B_n (B_1 = -1/2 convention)."""
    b = [Fraction(0)] * (n + 1)
    for m in range(n + 1):
        # recurrence sum_{k=0}^{m} C(m+1,k) B_k = 0, B_0 = 1
        if m == 0:
            b[0] = Fraction(1)
            continue
        acc = Fraction(0)
        for k in range(m):
            acc += math.comb(m + 1, k) * b[k]
        b[m] = -acc / (m + 1)
    return b[n]


def eisenstein_normalizer(k):
    """The exact rational 2/zeta(1-k) for even k >= 2, via zeta(1-k) = -B_k/k."""
    bk = bernoulli_number(k)
    return Fraction(-2 * k, 1) / bk


def eisenstein_qseries(k, order):
    """q-expansion of the (quasi)modular Eisenstein series of even weight k."""
    if k < 2 or k % 2 != 0:
        raise InvalidWeight(f"weight must be even and >= 2, got {k}")
    norm = eisenstein_normalizer(k)
    coeffs = [Fraction(1)] + [norm * divisor_sigma(k - 1, m)
                              for m in range(1, order + 1)]
    return QSeries(1, 0, coeffs, order)


def theta_z_qseries(order):
    """Theta series of the integer lattice Z, as a series in q2 = e^{pi i z}."""
    coeffs = [Fraction(0)] * (order + 1)
    coeffs[0] = Fraction(1)
    m = 1
    while m * m <= order:
        coeffs[m * m] = Fraction(2)
        m += 1
    return QSeries(2, 0, coeffs, order)
