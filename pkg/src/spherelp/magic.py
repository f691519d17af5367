"""The eight-dimensional magic function and its Fourier transform.

Both functions are represented as

    f(x)     = sin^2(pi*rho/2) * int_0^inf g_+(t) exp(-pi*rho*t) dt,
    fhat(x)  = sin^2(pi*rho/2) * int_0^inf g_-(t) exp(-pi*rho*t) dt,

with rho = |x|^2 and g_{+/-}(t) = t^2*phi(i/t) +/- psi(i*t).  The integral is
split at t0: on [t0, inf) the integrand is expanded into exact exponential
terms c(t)*exp(-pi*n*t) whose Laplace tails have closed forms (meromorphically
continued below the abscissa of convergence), and on (0, t0] a fixed
Gauss-Legendre quadrature reuses cached integrand samples.  The sine-squared
prefactor cancels every tail pole that occurs at nonnegative rho; the
near-pole branch makes that cancellation explicit through sinc^2.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .errors import CancellationFailure, ChecksNotRun, PoleResidue, TailTooLarge
from .forms import phi_quasiform, psi_qseries, psi_eval_small_t, _order_for_nome
from .qseries import eisenstein_qseries
from .radial import RadialTransform, composite_nodes

__all__ = [
    "IntegrandTerm",
    "build_integrand",
    "MagicValue",
    "MagicFunction",
    "sphere_packing_certificate",
]


@dataclass(frozen=True)
class IntegrandTerm:
    """One exact exponential term (c_const/pi + c_lin*t + c_quad*pi*t^2) e^{-pi n t}."""

    n: int
    c_const: Fraction
    c_lin: Fraction
    c_quad: Fraction

    def is_zero(self):
        return self.c_const == 0 and self.c_lin == 0 and self.c_quad == 0


@functools.lru_cache(maxsize=None)
def _integrand_parts(order):
    """Exact series (alpha, beta, gamma, psi) behind the large-t expansion.

    Writing N = E2*E4 - E6, M = E4 and D = E6^2 - E4^3 (all at i*t),

        t^2 * phi(i/t) = (4*pi/5) * (t^2*N^2 - (12/pi)*t*N*M + (36/pi^2)*M^2) / D,

    so with alpha = N^2/D, beta = N*M/D, gamma = M^2/D the coefficient of
    q^m = e^{-2*pi*m*t} is (4*pi/5)*alpha_m*t^2 - (48/5)*beta_m*t
    + (144/(5*pi))*gamma_m.  psi(i*t) contributes its own q2-coefficients.
    """
    m_order = order // 2
    work = m_order + 8
    e2 = eisenstein_qseries(2, work)
    e4 = eisenstein_qseries(4, work)
    e6 = eisenstein_qseries(6, work)
    nser = e2 * e4 - e6
    invd = (e6 * e6 - e4 ** 3).inverse()
    alpha = nser * nser * invd
    beta = nser * e4 * invd
    gamma = e4 * e4 * invd
    psi = psi_qseries(order)
    return alpha, beta, gamma, psi


@functools.lru_cache(maxsize=None)
def build_integrand(sign, order=64):
    """Exact terms of g_sign(t) for t >= t0, as a tuple of IntegrandTerm.

    sign=+1 selects t^2*phi(i/t) + psi(it) (the function side), sign=-1 the
    transform side.  sign=0 and sign=2 select the pure phi and pure psi
    components used by the eigenfunction oracle.  Structural facts are
    enforced exactly: psi has no q2^-1 coefficient, alpha has no constant
    term (else the value at the origin would diverge), and on the transform
    side the e^{2*pi*t} growth cancels, leaving no negative exponents.
    """
    if sign not in (-1, 0, 1, 2):
        raise ValueError("sign must be one of -1, 0, 1, 2")
    alpha, beta, gamma, psi = _integrand_parts(order)
    if psi.coeff(-1) != 0:
        raise CancellationFailure("psi acquired a q2^-1 coefficient")
    if alpha.coeff(0) != 0:
        raise CancellationFailure("alpha acquired a constant term")
    terms = {}

    def bump(n, cc=Fraction(0), cl=Fraction(0), cq=Fraction(0)):
        old = terms.get(n, (Fraction(0), Fraction(0), Fraction(0)))
        terms[n] = (old[0] + cc, old[1] + cl, old[2] + cq)

    use_phi = sign in (-1, 0, 1)
    use_psi = sign in (-1, 1, 2)
    if use_phi:
        for m in range(-1, order // 2 + 1):
            bump(2 * m,
                 cc=Fraction(144, 5) * gamma.coeff(m),
                 cl=Fraction(-48, 5) * beta.coeff(m),
                 cq=Fraction(4, 5) * alpha.coeff(m))
    if use_psi:
        s = 1 if sign != -1 else -1
        for m in range(-2, order + 1):
            bump(m, cc=s * psi.coeff(m))
    out = tuple(IntegrandTerm(n, *terms[n]) for n in sorted(terms)
                if any(c != 0 for c in terms[n]))
    if sign == -1 and out and out[0].n < 0:
        raise CancellationFailure(
            f"transform-side integrand kept a growing term e^{{{-out[0].n}*pi*t}}")
    return out


@dataclass(frozen=True)
class MagicValue:
    """A single evaluation together with a crude error estimate."""

    r: float
    value: object  # mp.mpf
    err_estimate: float
    hat: bool

    def __float__(self):
        return float(self.value)


_VARIANTS = {"plus": 1, "minus": -1, "phi": 0, "psi": 2}


class MagicFunction:
    """Evaluator for the magic function, its transform, and their components.

    Building an instance precomputes the exact expansion terms for every
    variant and samples the integrand on the quadrature nodes of the head
    interval (0, t0], so individual evaluations are cheap.
    """

    def __init__(self, order=64, precision=200, t0=1.0):
        self.order = order
        self.precision = precision
        self.pole_window = mp.mpf("1e-3")
        self._roots_checked = False
        self._signs_checked = False
        with mp.workprec(precision + 20):
            self.t0 = mp.mpf(t0)
            self.terms = {name: build_integrand(s, order)
                          for name, s in _VARIANTS.items()}
            # mpf polynomial coefficients [t^0, t^1, t^2] per term
            self._polys = {}
            for name, terms in self.terms.items():
                self._polys[name] = [
                    (term.n, (mp.mpf(term.c_const.numerator) / term.c_const.denominator / mp.pi,
                              mp.mpf(term.c_lin.numerator) / term.c_lin.denominator,
                              mp.mpf(term.c_quad.numerator) / term.c_quad.denominator * mp.pi))
                    for term in terms]
            breaks = [float(self.t0) * b for b in (0.0, 0.08, 0.2, 0.4, 0.65, 1.0)]
            self._nodes, self._weights = composite_nodes(breaks, 32, precision)
            self._nodes_c, self._weights_c = composite_nodes(breaks, 24, precision)
            self._a = [self._phi_small_t(t) for t in self._nodes]
            self._p = [psi_eval_small_t(t, precision) for t in self._nodes]
            self._a_c = [self._phi_small_t(t) for t in self._nodes_c]
            self._p_c = [psi_eval_small_t(t, precision) for t in self._nodes_c]

    # -- integrand ---------------------------------------------------------

    def _phi_small_t(self, t):
        """t^2 * phi(i/t) through the collapsed series at i/t (Im >= 1/t)."""
        with mp.workprec(self.precision + 20):
            t = mp.mpf(t)
            q = mp.exp(-2 * mp.pi / t)
            # the collapsed coefficients grow subexponentially, so the plain
            # nome-based order estimate can undershoot; double until the tail
            # bound clears the precision target
            order = max(self.order // 2, _order_for_nome(q, self.precision))
            while True:
                phi = phi_quasiform(order).collapse()
                try:
                    return t * t * phi.eval_nome(q, self.precision)[0]
                except TailTooLarge:
                    if order > 4096:
                        raise
                    order *= 2

    def g(self, t, variant="plus", regime="auto"):
        """The integrand for the given variant at t > 0.

        regime "expansion" forces the exponential-term sum (accurate for
        t >= t0), "direct" evaluates t^2*phi(i/t) and psi(it) from the
        modular-form side, and "auto" picks by the t0 threshold.  The two
        regimes follow independent computation paths, which the tests use as
        a cross-check on the expansion itself.
        """
        if variant not in _VARIANTS:
            raise ValueError(f"variant must be one of {sorted(_VARIANTS)}")
        with mp.workprec(self.precision + 20):
            t = mp.mpf(t)
            if t <= 0:
                raise ValueError("t must be positive")
            if regime == "auto":
                regime = "direct" if t < self.t0 else "expansion"
            if regime == "expansion":
                return self._g_expansion(variant, t)
            if regime != "direct":
                raise ValueError("regime must be auto, expansion or direct")
            sign = _VARIANTS[variant]
            acc = mp.mpf(0)
            if sign in (-1, 0, 1):
                acc += self._phi_small_t(t)
            if sign in (-1, 1, 2):
                p = psi_eval_small_t(t, self.precision)
                acc += p if sign != -1 else -p
            return acc

    def _g_expansion(self, variant, t):
        x = mp.exp(-mp.pi * t)
        acc = mp.mpf(0)
        for n, (c0, c1, c2) in self._polys[variant]:
            acc += (c0 + t * (c1 + t * c2)) * x ** n
        return acc

    # -- tail integrals ----------------------------------------------------

    def _tail_contrib(self, n, poly, s, sin2):
        """sin^2 * int_{t0}^inf (c0 + c1 t + c2 t^2) e^{-pi s t} dt, continued in s.

        The closed form is sum_j c_j * j! * e^{-pi s t0} *
        sum_{i<=j} t0^i (pi s)^{i-j-1} / i!.  Near s = 0 the pole is cancelled
        against sin^2(pi*rho/2) = sin^2(pi*s/2) (n even), rewritten through
        sinc^2 so the branch stays smooth; a pole at odd n would not be
        cancelled and raises PoleResidue.
        """
        t0 = self.t0
        if abs(s) < self.pole_window:
            if n % 2 != 0:
                raise PoleResidue(
                    f"tail pole at exponent n={n} is not cancelled by sin^2")
            half = mp.pi * s / 2
            sinc2 = mp.sinc(half) ** 2
            expf = mp.exp(-mp.pi * s * t0)
            acc = mp.mpf(0)
            for j, cj in enumerate(poly):
                if cj == 0:
                    continue
                fj = math.factorial(j)
                for i in range(j + 1):
                    e = i - j + 1  # (i - j - 1) + 2 from the sin^2 factor
                    if e < 0:
                        raise PoleResidue(
                            f"residual pole of order {-e} at exponent n={n}")
                    acc += (cj * fj * t0 ** i / math.factorial(i)
                            * (mp.pi * s) ** e * sinc2 / 4)
            return expf * acc
        expf = mp.exp(-mp.pi * s * t0)
        acc = mp.mpf(0)
        for j, cj in enumerate(poly):
            if cj == 0:
                continue
            fj = math.factorial(j)
            inner = mp.fsum(t0 ** i * (mp.pi * s) ** (i - j - 1) / math.factorial(i)
                            for i in range(j + 1))
            acc += cj * fj * inner
        return sin2 * expf * acc

    # -- evaluation --------------------------------------------------------

    def _head(self, variant, rho, coarse=False):
        sign = _VARIANTS[variant]
        nodes = self._nodes_c if coarse else self._nodes
        weights = self._weights_c if coarse else self._weights
        avals = self._a_c if coarse else self._a
        pvals = self._p_c if coarse else self._p
        parts = []
        for t, w, a, p in zip(nodes, weights, avals, pvals):
            if sign == 0:
                gv = a
            elif sign == 2:
                gv = p
            else:
                gv = a + p if sign == 1 else a - p
            parts.append(w * gv * mp.exp(-mp.pi * rho * t))
        return mp.fsum(parts)

    def eval_variant(self, r, variant):
        """MagicValue of the chosen variant at radius r >= 0."""
        if variant not in _VARIANTS:
            raise ValueError(f"variant must be one of {sorted(_VARIANTS)}")
        with mp.workprec(self.precision + 20):
            r = mp.mpf(r)
            if r < 0:
                raise ValueError("radius must be nonnegative")
            rho = r * r
            sin2 = mp.sin(mp.pi * rho / 2) ** 2
            head = self._head(variant, rho)
            head_c = self._head(variant, rho, coarse=True)
            total = sin2 * head
            for n, poly in self._polys[variant]:
                total += self._tail_contrib(n, poly, rho + n, sin2)
            n_max = self._polys[variant][-1][0]
            trunc = mp.exp(-mp.pi * (n_max + 1 + rho) * self.t0) / (n_max + 1 + rho)
            err = float(abs(sin2) * (abs(head - head_c) + trunc)
                        + abs(total) * mp.mpf(2) ** (-self.precision))
            return MagicValue(r=float(r), value=total, err_estimate=err,
                              hat=(variant == "minus"))

    def eval(self, r, hat=False):
        return self.eval_variant(r, "minus" if hat else "plus")

    def derivative(self, r, variant="plus"):
        """d/dr of the chosen variant, by central differences at working precision."""
        with mp.workprec(self.precision + 40):
            r = mp.mpf(r)
            h = mp.mpf(2) ** (-(self.precision // 3))
            if r < h:
                h = r / 2 if r > 0 else h
            if r == 0:
                return mp.mpf(0)
            up = self.eval_variant(r + h, variant).value
            dn = self.eval_variant(r - h, variant).value
            return (up - dn) / (2 * h)

    # -- exact structure ---------------------------------------------------

    def taylor_at_zero(self):
        """Exact rational Taylor data at the origin.

        Near rho = 0 only the n=0 expansion term interacts with the sin^2
        prefactor's double zero, giving value = c_lin/4 + (c_const/4)*rho
        + O(rho^2) with rho = r^2; everything else is O(rho^2).
        """
        out = {}
        for name, key in (("f", "plus"), ("f_hat", "minus")):
            term0 = next((t for t in self.terms[key] if t.n == 0), None)
            if term0 is None:
                raise CancellationFailure("expansion lost its n=0 term")
            out[name] = {"value": term0.c_lin / 4,
                         "quadratic": term0.c_const / 4}
        return out

    # -- checks ------------------------------------------------------------

    def verify_roots(self, k_max=6, tol=1e-8):
        """Values and derivatives of f and fhat at the claimed roots sqrt(2k)."""
        rows = []
        with mp.workprec(self.precision + 20):
            for k in range(1, k_max + 1):
                r = mp.sqrt(2 * k)
                fv = self.eval_variant(r, "plus").value
                gv = self.eval_variant(r, "minus").value
                fp = self.derivative(r, "plus")
                gp = self.derivative(r, "minus")
                rows.append({
                    "k": k, "r": float(r),
                    "f": float(fv), "f_hat": float(gv),
                    "f_prime": float(fp), "f_hat_prime": float(gp),
                    "pass": bool(abs(fv) < tol and abs(gv) < tol),
                })
        report = {"tolerance": tol, "roots": rows,
                  "passed": all(row["pass"] for row in rows)}
        if report["passed"]:
            self._roots_checked = True
        return report

    def sign_report(self, grid_points=200, r_max=6.0, tol=1e-20):
        """Pointwise sign conditions behind the optimality argument.

        Checks g_+ < 0 and g_- > 0 on a log grid of t, f <= 0 beyond sqrt(2),
        and fhat >= 0 everywhere sampled.  Root touch-points are allowed to
        sit within `tol` of zero.
        """
        with mp.workprec(self.precision + 20):
            report = {"passed": True, "checks": []}
            ts = [mp.mpf(10) ** (-3 + 6 * i / (grid_points - 1))
                  for i in range(grid_points)]
            worst_plus = max(self.g(t, "plus") for t in ts)
            worst_minus = min(self.g(t, "minus") for t in ts)
            report["checks"].append({
                "name": "integrand_signs",
                "pass": bool(worst_plus < 0 and worst_minus > 0),
                "detail": {"max_g_plus": float(worst_plus),
                           "min_g_minus": float(worst_minus)},
            })
            sqrt2 = mp.sqrt(2)
            rs = [sqrt2 + (r_max - sqrt2) * i / (grid_points - 1)
                  for i in range(grid_points)]
            worst_f = max(self.eval_variant(r, "plus").value for r in rs)
            report["checks"].append({
                "name": "f_nonpositive_beyond_sqrt2",
                "pass": bool(worst_f <= tol),
                "detail": {"max_f": float(worst_f)},
            })
            ss = [mp.mpf(r_max) * (i + 1) / grid_points
                  for i in range(grid_points)]
            worst_g = min(self.eval_variant(s, "minus").value for s in ss)
            report["checks"].append({
                "name": "f_hat_nonnegative",
                "pass": bool(worst_g >= -tol),
                "detail": {"min_f_hat": float(worst_g)},
            })
            report["passed"] = all(c["pass"] for c in report["checks"])
            if report["passed"]:
                self._signs_checked = True
            return report

    def eigenfunction_check(self, component, radii=(1.7, 2.1, 3.0),
                            oracle_precision=120):
        """Residuals of the +1/-1 eigenfunction claims against the radial oracle.

        component "phi" should transform to +itself, "psi" to -itself.  The
        oracle quadrature must first pass its Gaussian self-check.
        """
        if component not in ("phi", "psi"):
            raise ValueError("component must be phi or psi")
        eigenvalue = 1 if component == "phi" else -1
        oracle = RadialTransform(8, rmax=6.0, panels=12, npts=32,
                                 precision=oracle_precision)
        self_residual = oracle.self_check()
        samples = [self.eval_variant(r, component).value for r in oracle.nodes]
        rows = []
        with mp.workprec(oracle_precision + 20):
            for s in radii:
                got = oracle.transform_samples(samples, s)
                want = eigenvalue * self.eval_variant(s, component).value
                rows.append({"radius": float(s),
                             "residual": float(abs(got - want))})
        return {
            "component": component,
            "eigenvalue": eigenvalue,
            "gaussian_self_check": self_residual,
            "residuals": rows,
            "max_residual": max(row["residual"] for row in rows),
        }

    @property
    def checks_complete(self):
        return self._roots_checked and self._signs_checked


def sphere_packing_certificate(magic=None, precision=200):
    """Certificate that the linear-programming bound in dimension 8 is sharp.

    Requires the root and sign checks to have been run on the supplied
    MagicFunction (raises ChecksNotRun otherwise); with magic=None a fresh
    instance is built and the checks are run first.
    """
    from .lattice import e8_gram, basis_from_gram, covolume, ball_volume

    if magic is None:
        magic = MagicFunction(precision=precision)
        magic.verify_roots()
        magic.sign_report()
    if not magic.checks_complete:
        raise ChecksNotRun(
            "run verify_roots and sign_report before requesting a certificate")
    with mp.workprec(precision + 20):
        bound = mp.pi ** 4 / 384
        basis = basis_from_gram(e8_gram(), precision=precision)
        attained = (ball_volume(8, mp.sqrt(2) / 2, precision=precision)
                    / covolume(basis, precision=precision))
        gap = abs(bound - attained)
        taylor = magic.taylor_at_zero()
        return {
            "dimension": 8,
            "lp_bound_density": float(bound),
            "attained_density": float(attained),
            "gap": float(gap),
            "sharp": bool(gap < mp.mpf(10) ** -(precision // 4)),
            "normalization": {name: {"value": str(d["value"]),
                                     "quadratic": str(d["quadratic"])}
                              for name, d in taylor.items()},
        }
