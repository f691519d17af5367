"""Linear-programming upper bounds for sphere packing densities.

An admissible pair (f, fhat) is expanded over the Fourier eigenbasis

    b_k(x) = L_k^{n/2-1}(2*pi*|x|^2) * exp(-pi*|x|^2),

whose transform is (-1)^k b_k.  For a trial radius r the sign conditions
(f <= 0 beyond r, fhat >= 0 everywhere, f(0) = fhat(0) = 1) are imposed on
finite grids and the worst margin is maximized by a dense simplex solver;
the least feasible r is located by bisection, and the resulting coefficient
vector is re-certified on a ten-times-finer grid before the volume bound
vol(B^n_{r/2}) is reported.

The simplex tableau is kept in double-double precision (about 32 decimal
digits).  This is not a luxury: the sign structure of a near-optimal f lives
at the scale of the Gaussian envelope e^{-pi x^2}, which falls below double
precision already at |x|^2 ~ 12, while dimensions past 16 still carry
binding structure out there.  Plain double tableaus either stall or happily
certify radii the true LP rejects; 32 digits keep the structure visible out
to |x|^2 ~ 23, comfortably past everything that matters through n = 24.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import mpmath as mp

from .ddarith import (dd_add, dd_sub, dd_mul, dd_div, dd_scale, dd_sum,
                      dd_from_float, dd_from_mp, dd_to_mp)
from .errors import InvalidCertificate, NumericalStall
from .lattice import ball_volume
from .radial import RadialTransform

__all__ = [
    "default_degree",
    "laguerre_basis",
    "RadialFunction",
    "LPInstance",
    "BoundCertificate",
    "simplex_solve",
    "eigenbasis",
    "assemble_and_solve",
    "margin_lp",
    "certify",
    "optimize_r",
    "bound_from_certificate",
    "validate_eigenbasis",
]


def default_degree(n):
    """Basis degree used for dimension n (low dimensions need fewer terms)."""
    return 16 if n <= 4 else 40


def laguerre_basis(n, degree, radii, weighted=True):
    """Matrix B[k, i] = b_k(radii[i]) for k = 0..degree, in double precision.

    The generalized Laguerre polynomials come from the three-term recurrence
    (k+1) L_{k+1} = (2k+1+alpha-t) L_k - (k+alpha) L_{k-1} with
    alpha = n/2 - 1 and t = 2*pi*r^2.  With ``weighted=False`` the Gaussian
    factor is omitted, giving the value relative to the envelope e^{-pi r^2}.
    """
    radii = np.asarray(radii, dtype=float)
    alpha = n / 2.0 - 1.0
    t = 2.0 * np.pi * radii ** 2
    out = np.empty((degree + 1, radii.size))
    out[0] = 1.0
    if degree >= 1:
        out[1] = 1.0 + alpha - t
    for k in range(1, degree):
        out[k + 1] = ((2 * k + 1 + alpha - t) * out[k]
                      - (k + alpha) * out[k - 1]) / (k + 1)
    if weighted:
        out = out * np.exp(-np.pi * radii ** 2)
    return out


def _mp_basis(n, degree, radii, weighted=True):
    """Laguerre basis values as mpmath numbers at the caller's precision.

    Returns a list of rows; row k holds L_k(2 pi r^2) (times the Gaussian
    when weighted) at each radius.
    """
    alpha = mp.mpf(n) / 2 - 1
    ts = [2 * mp.pi * mp.mpf(r) ** 2 for r in radii]
    rows = [[mp.mpf(1)] * len(ts)]
    if degree >= 1:
        rows.append([1 + alpha - t for t in ts])
    for k in range(1, degree):
        prev, cur = rows[k - 1], rows[k]
        rows.append([((2 * k + 1 + alpha - t) * c - (k + alpha) * p) / (k + 1)
                     for t, c, p in zip(ts, cur, prev)])
    if weighted:
        envs = [mp.exp(-t / 2) for t in ts]
        rows = [[v * e for v, e in zip(row, envs)] for row in rows]
    return rows


def validate_eigenbasis(n, k_max=6, precision=120):
    """Max residual of the (-1)^k eigenfunction property, via the radial oracle."""
    oracle = RadialTransform(n, rmax=6.0, panels=12, npts=32, precision=precision)
    nodes = np.array([float(t) for t in oracle.nodes])
    basis = laguerre_basis(n, k_max, nodes)
    worst = 0.0
    for k in range(k_max + 1):
        samples = [mp.mpf(v) for v in basis[k]]
        for s in (0.8, 1.3, 2.2):
            got = oracle.transform_samples(samples, s)
            want = (-1) ** k * float(laguerre_basis(n, k, np.array([s]))[k, 0])
            worst = max(worst, abs(float(got) - want))
    return worst


@dataclass
class RadialFunction:
    """f = sum_k coeffs[k] * b_k; the transform flips odd-k coefficients."""

    n: int
    coeffs: np.ndarray

    def value(self, radii):
        basis = laguerre_basis(self.n, len(self.coeffs) - 1, np.atleast_1d(radii))
        return np.asarray(self.coeffs, float) @ basis

    def hat_value(self, radii):
        signs = (-1.0) ** np.arange(len(self.coeffs))
        basis = laguerre_basis(self.n, len(self.coeffs) - 1, np.atleast_1d(radii))
        return (np.asarray(self.coeffs, float) * signs) @ basis


@dataclass
class LPInstance:
    n: int
    degree: int
    r: float
    f_grid: np.ndarray
    hat_grid: np.ndarray


@dataclass
class BoundCertificate:
    n: int
    degree: int
    r: float
    coeffs: list           # mpmath values, scaled so f(0) = 1
    margin: float
    fine_margin_f: float
    fine_margin_hat: float
    bound: float
    iterations: int = 0
    notes: dict = field(default_factory=dict)

    def to_json_dict(self):
        return {
            "n": self.n,
            "degree": self.degree,
            "r": self.r,
            "r_squared": self.r * self.r,
            "coeffs": [mp.nstr(mp.mpf(c), 40) for c in self.coeffs],
            "margin": self.margin,
            "fine_margin_f": self.fine_margin_f,
            "fine_margin_hat": self.fine_margin_hat,
            "bound": self.bound,
            "iterations": self.iterations,
            "notes": self.notes,
        }


# -- dense simplex in double-double precision -------------------------------

_PIV_EPS = 1e-25      # smallest admissible pivot element
_COST_EPS = 1e-25     # reduced-cost optimality threshold


class _Tableau:
    """Dense tableau held as an unevaluated hi + lo float64 pair."""

    def __init__(self, n_rows, n_cols):
        self.hi = np.zeros((n_rows, n_cols))
        self.lo = np.zeros((n_rows, n_cols))

    def pivot(self, row, col, basis):
        hi, lo = self.hi, self.lo
        phi, plo = dd_div(hi[row], lo[row], hi[row, col], lo[row, col])
        phi[col], plo[col] = 1.0, 0.0
        chi = hi[:, col].copy()
        clo = lo[:, col].copy()
        chi[row], clo[row] = 0.0, 0.0
        mhi, mlo = dd_mul(chi[:, None], clo[:, None], phi[None, :], plo[None, :])
        hi_new, lo_new = dd_sub(hi, lo, mhi, mlo)
        hi_new[row], lo_new[row] = phi, plo
        hi_new[:, col] = 0.0
        lo_new[:, col] = 0.0
        hi_new[row, col] = 1.0
        self.hi, self.lo = hi_new, lo_new
        basis[row] = col


def _pivot_f(t, row, col, basis):
    """Plain float64 pivot used by the advisory pass."""
    piv = t[row] / t[row, col]
    piv[col] = 1.0
    colv = t[:, col].copy()
    colv[row] = 0.0
    t -= colv[:, None] * piv[None, :]
    t[row] = piv
    t[:, col] = 0.0
    t[row, col] = 1.0
    basis[row] = col


def _run_simplex_f(t, basis, ncols, max_iter, stop_value=None):
    """Float64 mirror of `_run_simplex`; returns a status string.

    The float pass cannot certify anything -- the tableau entries span the
    Gaussian envelope's full dynamic range -- but it walks the same
    polytope orders of magnitude faster than the double-double tableau, and
    its final basis is an excellent starting point for the exact phases.
    """
    stall = 0
    for _ in range(max_iter):
        if stop_value is not None and t[-1, -1] >= stop_value - 1e-12:
            return "optimal"
        obj = t[-1, :ncols]
        bland = stall >= 64
        if not bland:
            col = int(np.argmin(obj))
            if obj[col] > -1e-12:
                return "optimal"
        else:
            neg = np.nonzero(obj < -1e-12)[0]
            if neg.size == 0:
                return "optimal"
            col = int(neg[0])
        colv = t[:-1, col]
        rhs = t[:-1, -1]
        ratios = np.full(colv.size, np.inf)
        pos = colv > 1e-11
        ratios[pos] = np.maximum(rhs[pos], 0.0) / colv[pos]
        best = ratios.min()
        if not np.isfinite(best):
            return "unbounded"
        ties = np.nonzero(ratios <= best * (1 + 1e-9) + 1e-15)[0]
        row = int(ties[np.argmin(basis[ties])]) if bland else int(ties[0])
        before = t[-1, -1]
        _pivot_f(t, row, col, basis)
        stall = stall + 1 if abs(t[-1, -1] - before) < 1e-13 else 0
    return "stall"


def _run_simplex(tab, basis, ncols, max_iter, stop_value=None,
                 cap_raise=True):
    """Minimize the objective in the last tableau row over columns < ncols.

    `stop_value` lets phase one exit as soon as the known optimum is
    reached instead of grinding through degenerate pivots.  Bland's rule
    engages after a degenerate stretch; with the tableau carrying 32 digits
    its anti-cycling guarantee is effectively the exact-arithmetic one.
    With `cap_raise=False` the iteration cap returns instead of raising so
    the caller can interleave bounded exact batches with advisory passes.
    """
    stall = 0
    for it in range(max_iter):
        if stop_value is not None and tab.hi[-1, -1] >= stop_value - 1e-24:
            return it
        obj = tab.hi[-1, :ncols]
        bland = stall >= 64
        if not bland:
            col = int(np.argmin(obj))
            if obj[col] > -_COST_EPS:
                return it
        else:
            neg = np.nonzero(obj < -_COST_EPS)[0]
            if neg.size == 0:
                return it
            col = int(neg[0])
        colv = tab.hi[:-1, col]
        rhs = tab.hi[:-1, -1]
        ratios = np.full(colv.size, np.inf)
        pos = colv > _PIV_EPS
        ratios[pos] = np.maximum(rhs[pos], 0.0) / colv[pos]
        best = ratios.min()
        if not np.isfinite(best):
            raise NumericalStall("unbounded direction in simplex")
        ties = np.nonzero(ratios <= best + 1e-28)[0]
        row = int(ties[np.argmin(basis[ties])]) if bland else int(ties[0])
        before = tab.hi[-1, -1]
        tab.pivot(row, col, basis)
        stall = stall + 1 if abs(tab.hi[-1, -1] - before) < 1e-26 else 0
    if cap_raise:
        raise NumericalStall(f"simplex exceeded {max_iter} iterations")
    return max_iter


def simplex_solve(c_obj, a_ub=None, b_ub=None, a_eq=None, b_eq=None,
                  max_iter=50000):
    """Maximize c_obj @ x subject to a_ub x <= b_ub, a_eq x = b_eq, x >= 0.

    Every array argument may be a plain float array or an (hi, lo)
    double-double pair.  Returns (x, objective, iterations, duals) with x
    and duals as (hi, lo) pairs; duals carries one multiplier per a_ub row
    followed by one per a_eq row, read from the final reduced costs of the
    initial identity columns.  Raises NumericalStall at the iteration cap
    or on an unbounded ray, and InvalidCertificate when phase one cannot
    reach feasibility.
    """
    def as_dd(v, fallback_shape):
        if v is None:
            return dd_from_float(np.zeros(fallback_shape))
        if isinstance(v, tuple):
            return np.asarray(v[0], float), np.asarray(v[1], float)
        return dd_from_float(np.asarray(v, float))

    c_hi, c_lo = as_dd(c_obj, (0,))
    nvar = c_hi.size
    aub_hi, aub_lo = as_dd(a_ub, (0, nvar))
    bub_hi, bub_lo = as_dd(b_ub, (0,))
    aeq_hi, aeq_lo = as_dd(a_eq, (0, nvar))
    beq_hi, beq_lo = as_dd(b_eq, (0,))
    n_ub, n_eq = aub_hi.shape[0], aeq_hi.shape[0]
    n_rows = n_ub + n_eq
    ub_flip = bub_hi < 0
    eq_flip = beq_hi < 0
    art_rows = list(np.nonzero(ub_flip)[0]) + [n_ub + i for i in range(n_eq)]
    n_art = len(art_rows)
    slack0 = nvar
    art0 = nvar + n_ub
    ncols = nvar + n_ub + n_art
    tab = _Tableau(n_rows + 1, ncols + 1)
    tab.hi[:n_ub, :nvar] = aub_hi
    tab.lo[:n_ub, :nvar] = aub_lo
    tab.hi[n_ub:n_rows, :nvar] = aeq_hi
    tab.lo[n_ub:n_rows, :nvar] = aeq_lo
    tab.hi[:n_ub, -1] = bub_hi
    tab.lo[:n_ub, -1] = bub_lo
    tab.hi[n_ub:n_rows, -1] = beq_hi
    tab.lo[n_ub:n_rows, -1] = beq_lo
    for i in range(n_ub):
        tab.hi[i, slack0 + i] = 1.0
    for i in np.nonzero(ub_flip)[0]:
        # negate the row so the rhs is positive; the slack becomes a surplus
        tab.hi[i, :] *= -1.0
        tab.lo[i, :] *= -1.0
    for i in np.nonzero(eq_flip)[0]:
        tab.hi[n_ub + i, :] *= -1.0
        tab.lo[n_ub + i, :] *= -1.0
    basis = np.empty(n_rows, dtype=int)
    basis[:n_ub] = slack0 + np.arange(n_ub)
    art_col = {}
    for j, row in enumerate(art_rows):
        tab.hi[row, art0 + j] = 1.0
        basis[row] = art0 + j
        art_col[row] = art0 + j
    # advisory pass: walk the same polytope in float64 and crash the exact
    # tableau onto the resulting basis.  The dual cone of the margin LP is
    # a cluster of near-coincident vertices that the exact tableau crawls
    # through at ~2 ms a pivot; the float walk covers it at ~50 us a pivot.
    # The float tableau drifts over a long walk, so the advisory is
    # repeated from a fresh copy of the exact tableau between bounded
    # exact batches.  The float result is never trusted: the exact phases
    # always re-verify optimality in double-double.
    def crash(target):
        """Pivot the exact tableau onto `target` if that stays feasible."""
        if target == set(int(v) for v in basis):
            return
        tmp = _Tableau.__new__(_Tableau)
        tmp.hi, tmp.lo = tab.hi.copy(), tab.lo.copy()
        b2 = basis.copy()
        for col in sorted(target - set(int(v) for v in b2)):
            rows_free = np.array([i for i in range(n_rows)
                                  if int(b2[i]) not in target])
            if rows_free.size == 0:
                return
            vals = np.abs(tmp.hi[rows_free, col])
            k = int(np.argmax(vals))
            if vals[k] < 1e-18:
                return
            tmp.pivot(int(rows_free[k]), col, b2)
        if tmp.hi[:-1, -1].min() > -1e-16:
            tab.hi, tab.lo = tmp.hi, tmp.lo
            basis[:] = b2

    def advise(phase_one):
        """Refresh a float64 tableau from the exact one and crash back."""
        try:
            tf = tab.hi + tab.lo
            bf = basis.copy()
            if phase_one:
                tf[-1] = -tf[np.asarray(art_rows)].sum(axis=0)
                tf[-1, art0:ncols] = 0.0
                _run_simplex_f(tf, bf, art0, max_iter, stop_value=0.0)
                tf[-1] = 0.0
            tf[-1, :nvar] = -(c_hi + c_lo)
            for row in range(n_rows):
                w = tf[-1, bf[row]]
                if w != 0.0:
                    tf[-1] -= w * tf[row]
                    tf[-1, bf[row]] = 0.0
            _run_simplex_f(tf, bf, art0, max_iter)
            crash(set(int(v) for v in bf))
        except (FloatingPointError, ValueError):
            pass

    if n_art and tab.hi[np.asarray(art_rows), -1].sum() > 1e-24:
        advise(phase_one=True)
    # phase one: minimize the sum of the artificial variables
    it1 = 0
    art_basic = [row for row in range(n_rows) if basis[row] >= art0]
    if art_basic and tab.hi[np.asarray(art_basic), -1].sum() > 1e-24:
        shi = np.zeros(ncols + 1)
        slo = np.zeros(ncols + 1)
        for row in art_basic:
            shi, slo = dd_add(shi, slo, tab.hi[row], tab.lo[row])
        tab.hi[-1], tab.lo[-1] = -shi, -slo
        tab.hi[-1, art0:ncols] = 0.0
        tab.lo[-1, art0:ncols] = 0.0
        it1 = _run_simplex(tab, basis, art0, max_iter, stop_value=0.0)
        if tab.hi[-1, -1] < -1e-18:
            raise InvalidCertificate("phase-one infeasible")
        for row in range(n_rows):
            if basis[row] >= art0:
                cand = np.nonzero(np.abs(tab.hi[row, :art0]) > _PIV_EPS)[0]
                if cand.size:
                    tab.pivot(row, int(cand[0]), basis)
    # phase two: maximize the real objective; the artificial columns stay in
    # the tableau (barred from entering) so the equality-row duals remain
    # readable from their reduced costs
    tab.hi[-1, :] = 0.0
    tab.lo[-1, :] = 0.0
    tab.hi[-1, :nvar] = -c_hi
    tab.lo[-1, :nvar] = -c_lo
    for row in range(n_rows):
        w_hi, w_lo = tab.hi[-1, basis[row]], tab.lo[-1, basis[row]]
        if w_hi != 0.0 or w_lo != 0.0:
            mhi, mlo = dd_mul(np.float64(w_hi), np.float64(w_lo),
                              tab.hi[row], tab.lo[row])
            tab.hi[-1], tab.lo[-1] = dd_sub(tab.hi[-1], tab.lo[-1], mhi, mlo)
            tab.hi[-1, basis[row]] = 0.0
            tab.lo[-1, basis[row]] = 0.0
    it2 = 0
    batch = 300
    while True:
        done = _run_simplex(tab, basis, art0, batch, cap_raise=False)
        it2 += done
        if done < batch:
            break
        if it2 + batch > max_iter:
            raise NumericalStall(f"simplex exceeded {max_iter} iterations")
        advise(phase_one=False)
    x_hi = np.zeros(ncols)
    x_lo = np.zeros(ncols)
    x_hi[basis] = tab.hi[:-1, -1]
    x_lo[basis] = tab.lo[:-1, -1]
    flip_sign = np.ones(n_rows)
    flip_sign[:n_ub][ub_flip] = -1.0
    flip_sign[n_ub:][eq_flip] = -1.0
    duals_hi = np.empty(n_rows)
    duals_lo = np.empty(n_rows)
    for row in range(n_rows):
        col = art_col.get(row, slack0 + row)
        duals_hi[row] = tab.hi[-1, col] * flip_sign[row]
        duals_lo[row] = tab.lo[-1, col] * flip_sign[row]
    obj = float(tab.hi[-1, -1]) + float(tab.lo[-1, -1])
    return (x_hi[:nvar], x_lo[:nvar]), obj, it1 + it2, (duals_hi, duals_lo)


# -- the margin LP ----------------------------------------------------------

def _grids(r, npts):
    """Sample radii: clustered toward r on [r, r+w] and toward 0 on [0, r+w]."""
    w = 6.5
    u = np.linspace(0.0, 1.0, npts)
    f_grid = r + w * u ** 2
    hat_grid = (r + w) * u ** 1.5
    return f_grid, hat_grid


def build_instance(n, r, degree=None, npts=160):
    degree = degree or default_degree(n)
    f_grid, hat_grid = _grids(r, npts)
    return LPInstance(n=n, degree=degree, r=float(r),
                      f_grid=f_grid, hat_grid=hat_grid)


class _MasterLP:
    """Shared constraint data for the sign-margin LP of one dimension.

    Feasibility is probed at many radii during a radius search, but the
    expensive part of each probe -- evaluating the eigenbasis with mpmath --
    depends only weakly on the radius.  This class builds the basis matrices
    once over a master grid of constraint points; a test at radius r then
    selects the f-constraint columns with x >= r and appends a transient
    cluster of columns starting exactly at r.  Cutting planes discovered by
    `certify` are folded in with `add_points` and benefit every later probe.

    Constraint points live in two unit systems: near points (x <= 14.5) in
    weighted units, where the Gaussian factor is representable in float64,
    and tail points relative to the envelope, where f <= 0 and fhat >= 0
    reduce to sign conditions on the bare Laguerre combination.
    """

    _NEAR_CAP = 14.5

    def __init__(self, n, degree, f_grid, hat_grid, precision=140):
        self.n = n
        self.degree = degree
        self.k1 = degree + 1
        self.precision = precision
        k1 = self.k1
        f_grid = np.asarray(f_grid, float)
        hat_grid = np.asarray(hat_grid, float)
        near_f = f_grid[f_grid <= self._NEAR_CAP]
        near_h = hat_grid[hat_grid <= self._NEAR_CAP]
        base = max(near_f.max(), near_h.max())
        tail = np.unique(np.concatenate([
            np.geomspace(base * 1.002, 2.6 * base, 120),
            f_grid[f_grid > self._NEAR_CAP],
            hat_grid[hat_grid > self._NEAR_CAP]]))
        with mp.workprec(precision):
            bf_rows = _mp_basis(n, degree, near_f)
            bh_rows = _mp_basis(n, degree, near_h)
            self.b0 = [row[0] for row in _mp_basis(n, degree, [0.0])]
            signs = [(-1) ** k for k in range(k1)]
            bh_rows = [[s * v for v in row]
                       for s, row in zip(signs, bh_rows)]
            # one scale per basis index keeps the tableau entries O(1)
            self.scale = [max(max(abs(v) for v in bf_rows[k]),
                              max(abs(v) for v in bh_rows[k]))
                          for k in range(k1)]
            bf_rows = [[v / s for v in row]
                       for s, row in zip(self.scale, bf_rows)]
            bh_rows = [[v / s for v in row]
                       for s, row in zip(self.scale, bh_rows)]
            b0s = [v / s for v, s in zip(self.b0, self.scale)]
            b0h = [v * sg for v, sg in zip(b0s, signs)]
            env_f = [mp.exp(-mp.pi * mp.mpf(x) ** 2) for x in near_f]
            env_h = [mp.exp(-mp.pi * mp.mpf(x) ** 2) for x in near_h]
            self.bf_dd = dd_from_mp([v for row in bf_rows for v in row],
                                    (k1, len(near_f)))
            self.bh_dd = dd_from_mp([v for row in bh_rows for v in row],
                                    (k1, len(near_h)))
            self.b0s_dd = dd_from_mp(b0s)
            self.b0h_dd = dd_from_mp(b0h)
            self.envf_dd = dd_from_mp(env_f)
            self.envh_dd = dd_from_mp(env_h)
        self.signs = signs
        self.sgn_arr = np.asarray(signs, float)[:, None]
        self.f_grid = near_f.copy()
        self.hat_grid = near_h.copy()
        self.tail_grid = np.empty(0)
        self.bt_dd = (np.empty((k1, 0)), np.empty((k1, 0)))
        self.bts_dd = self.bt_dd
        self._append_tail(tail)
        self._solves = 0

    def _near_cols(self, radii, hat=False):
        """Scaled weighted basis columns and envelopes at new near radii."""
        with mp.workprec(self.precision):
            rows = _mp_basis(self.n, self.degree, radii)
            if hat:
                rows = [[s * v for v in row]
                        for s, row in zip(self.signs, rows)]
            rows = [[v / s for v in row]
                    for s, row in zip(self.scale, rows)]
            env = [mp.exp(-mp.pi * mp.mpf(x) ** 2) for x in radii]
            cols = dd_from_mp([v for row in rows for v in row],
                              (self.k1, len(radii)))
            env_dd = dd_from_mp(env)
        return cols, env_dd

    def _append_tail(self, radii):
        with mp.workprec(self.precision):
            rows = _mp_basis(self.n, self.degree, radii, weighted=False)
            rows = [[v / s for v in row]
                    for s, row in zip(self.scale, rows)]
            tail_scale = [max(abs(rows[k][j]) for k in range(self.k1))
                          for j in range(len(radii))]
            rows = [[v / s for v, s in zip(row, tail_scale)]
                    for row in rows]
            cols = dd_from_mp([v for row in rows for v in row],
                              (self.k1, len(radii)))
        self.bt_dd = (np.concatenate([self.bt_dd[0], cols[0]], axis=1),
                      np.concatenate([self.bt_dd[1], cols[1]], axis=1))
        self.bts_dd = (self.sgn_arr * self.bt_dd[0],
                       self.sgn_arr * self.bt_dd[1])
        self.tail_grid = np.concatenate([self.tail_grid, radii])

    def add_points(self, f_radii, hat_radii):
        """Fold cutting-plane radii into the master constraint set."""
        f_radii = np.asarray(f_radii, float)
        hat_radii = np.asarray(hat_radii, float)
        near_f = f_radii[f_radii <= self._NEAR_CAP]
        near_h = hat_radii[hat_radii <= self._NEAR_CAP]
        tail = np.concatenate([f_radii[f_radii > self._NEAR_CAP],
                               hat_radii[hat_radii > self._NEAR_CAP]])
        if near_f.size:
            cols, env = self._near_cols(near_f)
            self.bf_dd = (np.concatenate([self.bf_dd[0], cols[0]], axis=1),
                          np.concatenate([self.bf_dd[1], cols[1]], axis=1))
            self.envf_dd = (np.concatenate([self.envf_dd[0], env[0]]),
                            np.concatenate([self.envf_dd[1], env[1]]))
            self.f_grid = np.concatenate([self.f_grid, near_f])
        if near_h.size:
            cols, env = self._near_cols(near_h, hat=True)
            self.bh_dd = (np.concatenate([self.bh_dd[0], cols[0]], axis=1),
                          np.concatenate([self.bh_dd[1], cols[1]], axis=1))
            self.envh_dd = (np.concatenate([self.envh_dd[0], env[0]]),
                            np.concatenate([self.envh_dd[1], env[1]]))
            self.hat_grid = np.concatenate([self.hat_grid, near_h])
        if tail.size:
            self._append_tail(np.unique(tail))

    def solve(self, r, support=None, max_iter=60000):
        """Maximize the worst sign margin at radius r.

        The primal has one coefficient c_k per basis function plus a margin
        m >= 0, with constraints f(x) <= -m e^{-pi x^2} for x >= r,
        fhat(s) >= m e^{-pi s^2} everywhere, f(0) = fhat(0) = 1, m <= 1.
        The constraint set carries hundreds of points but the basis only
        degree+1 functions, so the LP is solved in its dual form (degree+2
        rows) with column generation, and (margin, coeffs) recovered from
        the multipliers of the equality rows.  `support` is the binding-set
        hint returned by a previous solve; passing it back warm-starts the
        column generation.  Returns (margin, coeffs, iterations, support)
        with coeffs a list of mpmath values; raises InvalidCertificate when
        the radius is infeasible for this discretization.
        """
        n, k1 = self.n, self.k1
        sel = np.nonzero(self.f_grid >= r * (1 - 1e-12))[0]
        # the master grid is only moderately dense near r, so each probe
        # carries a transient cluster of points clustered at exactly r
        span = self.f_grid.max() - r
        trans = r + span * np.linspace(0.0, 0.15, 16) ** 2
        tcols, tenv = self._near_cols(trans)
        bf_dd = (np.concatenate([self.bf_dd[0][:, sel], tcols[0]], axis=1),
                 np.concatenate([self.bf_dd[1][:, sel], tcols[1]], axis=1))
        envf_dd = (np.concatenate([self.envf_dd[0][sel], tenv[0]]),
                   np.concatenate([self.envf_dd[1][sel], tenv[1]]))
        bh_dd, envh_dd = self.bh_dd, self.envh_dd
        bt_dd, bts_dd = self.bt_dd, self.bts_dd
        b0s_dd, b0h_dd = self.b0s_dd, self.b0h_dd
        nf = sel.size + trans.size
        nh = self.hat_grid.size
        nt = self.tail_grid.size
        self._solves += 1

        def solve_active(af, ah, at, rnd):
            """Dual LP restricted to the active constraint points.

            Dual variables: y >= 0 (active f rows), z >= 0 (active hat
            rows), u, v >= 0 (active f and hat tail rows), w >= 0 (the
            m <= 1 cap) and two split-free multipliers for the
            normalizations.
            """
            naf, nah, nat = af.size, ah.size, at.size
            nvar = naf + nah + 2 * nat + 1 + 4
            iw = naf + nah + 2 * nat
            aeq_hi = np.zeros((k1, nvar))
            aeq_lo = np.zeros((k1, nvar))
            aeq_hi[:, :naf] = bf_dd[0][:, af]
            aeq_lo[:, :naf] = bf_dd[1][:, af]
            aeq_hi[:, naf:naf + nah] = -bh_dd[0][:, ah]
            aeq_lo[:, naf:naf + nah] = -bh_dd[1][:, ah]
            aeq_hi[:, naf + nah:naf + nah + nat] = bt_dd[0][:, at]
            aeq_lo[:, naf + nah:naf + nah + nat] = bt_dd[1][:, at]
            aeq_hi[:, naf + nah + nat:iw] = -bts_dd[0][:, at]
            aeq_lo[:, naf + nah + nat:iw] = -bts_dd[1][:, at]
            for j, (sgn, vec) in enumerate(((1, b0s_dd), (-1, b0s_dd),
                                            (1, b0h_dd), (-1, b0h_dd))):
                aeq_hi[:, iw + 1 + j] = sgn * vec[0]
                aeq_lo[:, iw + 1 + j] = sgn * vec[1]
            aub_hi = np.zeros((1, nvar))
            aub_lo = np.zeros((1, nvar))
            aub_hi[0, :naf] = -envf_dd[0][af]
            aub_lo[0, :naf] = -envf_dd[1][af]
            aub_hi[0, naf:naf + nah] = -envh_dd[0][ah]
            aub_lo[0, naf:naf + nah] = -envh_dd[1][ah]
            aub_hi[0, iw] = -1.0
            # cone-interior perturbation: shifting the right-hand sides to
            # A@x0 with a small random x0 > 0 keeps the LP feasible (x + x0
            # works) while breaking the massive degeneracy of the zero
            # equality rows.  The scale must sit well above the float64
            # noise floor so the advisory pass resolves the perturbed
            # vertex cluster the same way the exact tableau does; at 1e-9
            # the optimum moves by O(1e-8), far below the decision
            # tolerances, and the advisory basis is almost always final
            rng = np.random.default_rng(0xC0FFEE + 1000 * n + k1
                                        + 7919 * rnd + 131 * self._solves)
            x0 = 1e-9 * (1.0 + rng.random(nvar))
            beq = dd_sum(*dd_mul(aeq_hi, aeq_lo, x0[None, :],
                                 np.zeros((1, nvar))), axis=1)
            ph, pl = dd_sum(*dd_mul(aub_hi, aub_lo, x0[None, :],
                                    np.zeros((1, nvar))), axis=1)
            b_ub = dd_add(np.array([-1.0]), np.array([0.0]), ph, pl)
            c_obj = np.zeros(nvar)
            c_obj[iw] = -1.0
            c_obj[iw + 1:] = [-1.0, 1.0, -1.0, 1.0]
            return simplex_solve(c_obj, (aub_hi, aub_lo), b_ub,
                                 (aeq_hi, aeq_lo), beq, max_iter)

        def matvec(dual_hi, dual_lo, mat):
            ph, pl = dd_mul(dual_hi[:, None], dual_lo[:, None],
                            mat[0], mat[1])
            return dd_sum(ph, pl, axis=0)

        # column generation: solve on a coarse subset of the constraint
        # points, then admit the points the current solution violates,
        # until the full discretization is satisfied -- far fewer simplex
        # pivots than solving with every grid point active from the start.
        # A support hint replaces most of the initial skeleton.
        if support is None:
            active_f = np.unique(np.r_[np.arange(0, nf, 4),
                                       np.arange(sel.size, nf)])
            active_h = np.unique(np.r_[np.arange(0, nh, 4), nh - 1])
            active_t = np.unique(np.r_[np.arange(0, nt, 2), nt - 1])
        else:
            loc_f = np.nonzero(np.isin(sel, support["f"]))[0]
            active_f = np.unique(np.r_[loc_f, np.arange(sel.size, nf),
                                       np.arange(0, nf, 16)])
            active_h = np.unique(np.r_[support["h"],
                                       np.arange(0, nh, 16), nh - 1])
            active_t = np.unique(np.r_[support["t"],
                                       np.arange(0, nt, 8), nt - 1])
        total_iters = 0
        viol_tol = 1e-22
        for rnd in range(25):
            try:
                _x, obj, iters, duals = solve_active(active_f, active_h,
                                                     active_t, rnd)
            except NumericalStall as exc:
                if "unbounded" in str(exc):
                    # an unbounded dual certifies that no admissible
                    # function exists at this radius
                    raise InvalidCertificate(f"infeasible radius r={r}")
                raise
            total_iters += iters
            margin = -obj  # the dual optimum equals the primal max margin
            dh, dl = duals[0][1:], duals[1][1:]
            # the reduced-cost extraction determines the multipliers only
            # up to a global sign; orient them so f(0) > 0 before scanning
            if float(dh @ b0s_dd[0]) < 0:
                dh, dl = -dh, -dl
            sf = matvec(dh, dl, bf_dd)
            sf = dd_add(*sf, *dd_scale(envf_dd[0], envf_dd[1], margin))
            sh_ = matvec(dh, dl, bh_dd)
            sh_ = dd_sub(*sh_, *dd_scale(envh_dd[0], envh_dd[1], margin))
            st = matvec(dh, dl, bt_dd)
            sq = matvec(dh, dl, bts_dd)
            bad_f = np.nonzero(sf[0] > viol_tol)[0]
            bad_h = np.nonzero(sh_[0] < -viol_tol)[0]
            bad_t = np.nonzero((st[0] > viol_tol) | (sq[0] < -viol_tol))[0]
            grew = False
            for bad, active in ((bad_f, active_f), (bad_h, active_h),
                                (bad_t, active_t)):
                if np.setdiff1d(bad, active).size:
                    grew = True
            if not grew:
                break
            active_f = np.union1d(active_f, bad_f)
            active_h = np.union1d(active_h, bad_h)
            active_t = np.union1d(active_t, bad_t)
        # binding constraints, reported in master indices so the caller can
        # warm-start the next probe at a nearby radius.  Nearness to zero is
        # judged relative to the weighted envelope: in raw weighted units
        # every far point looks binding because its whole column is tiny.
        rel_f = sf[0] / np.maximum(envf_dd[0], 1e-300)
        rel_h = sh_[0] / np.maximum(envh_dd[0], 1e-300)
        bind_f = np.nonzero(rel_f > -1e-6)[0]
        bind_f = sel[bind_f[bind_f < sel.size]]
        support_out = {
            "f": bind_f,
            "h": np.nonzero(rel_h < 1e-6)[0],
            "t": np.nonzero((st[0] > -1e-10) | (sq[0] < 1e-10))[0]}
        with mp.workprec(self.precision):
            coeffs = [dd_to_mp(dh[k], dl[k]) / self.scale[k]
                      for k in range(k1)]
            f0 = mp.fsum(c * v for c, v in zip(coeffs, self.b0))
            if abs(f0) < mp.mpf("1e-8"):
                raise InvalidCertificate("degenerate dual: normalization lost")
            if f0 < 0:
                coeffs = [-c for c in coeffs]
                f0 = -f0
            # renormalize exactly; the multipliers carry O(1e-30) roundoff
            coeffs = [c / f0 for c in coeffs]
        return margin, coeffs, total_iters, support_out


def margin_lp(instance, max_iter=50000, precision=140):
    """Maximize the worst sign margin at the fixed radius of `instance`.

    Convenience wrapper that builds the constraint matrices for the
    instance grids and runs a single dual-simplex solve; see
    `_MasterLP.solve` for the formulation.  Returns (margin, coeffs,
    iterations) with coeffs a list of mpmath values; raises
    InvalidCertificate when the radius is infeasible for this
    discretization.
    """
    master = _MasterLP(instance.n, instance.degree, instance.f_grid,
                       instance.hat_grid, precision)
    margin, coeffs, iters, _support = master.solve(instance.r,
                                                   max_iter=max_iter)
    return margin, coeffs, iters


def eigenbasis(n, degree):
    """Description of the transform eigenbasis used by the LP.

    Returns a dict with the eigenvalue sign pattern and a callable
    evaluating the basis matrix; b_0 is the pure Gaussian.
    """
    return {
        "n": n,
        "degree": degree,
        "eigenvalues": [(-1) ** k for k in range(degree + 1)],
        "evaluate": lambda radii, weighted=True: laguerre_basis(
            n, degree, radii, weighted=weighted),
    }


def assemble_and_solve(n, r, degree=None, npts=160):
    """Feasibility of the sign conditions at radius r.

    Returns (feasible, coeffs, margin); coeffs is None when the
    discretized LP is infeasible at this radius.
    """
    inst = build_instance(n, r, degree, npts)
    try:
        margin, coeffs, _iters = margin_lp(inst)
    except (InvalidCertificate, NumericalStall):
        return False, None, -1.0
    if margin <= 1e-9:
        return False, None, float(margin)
    return True, coeffs, float(margin)


with mp.workprec(140):
    _TWO_PI_DD = dd_from_mp([2 * mp.pi])    # 2*pi to double-double


def _dd_rel_values(n, degree, coeffs_dd, radii):
    """Relative values sum c_k L_k / (sum |c_k| |L_k| + 1) in double-double.

    The denominator is the local evaluation scale, so a result of size eps
    means the sign of the function is only determined down to eps times the
    cancellation mass -- the natural unit for certifying sign conditions.
    """
    cs_hi, cs_lo = coeffs_dd
    x = np.asarray(radii, float)
    zero = np.zeros_like(x)
    xh, xl = dd_mul(x, zero, x, zero)
    th, tl = dd_mul(xh, xl, np.float64(_TWO_PI_DD[0][0]),
                    np.float64(_TWO_PI_DD[1][0]))
    alpha = n / 2.0 - 1.0
    prev_h, prev_l = zero.copy(), zero.copy()           # L_{k-1}
    cur_h, cur_l = np.ones_like(x), zero.copy()         # L_k, starting at L_0
    sh, sl = zero.copy(), zero.copy()
    ah, al = zero.copy(), zero.copy()
    for k in range(degree + 1):
        if k == 1:
            prev_h, prev_l = cur_h, cur_l
            cur_h, cur_l = dd_sub(np.full_like(x, 1.0 + alpha), zero, th, tl)
        elif k >= 2:
            m = k - 1
            d1h, d1l = dd_sub(np.full_like(x, 2 * m + 1 + alpha), zero, th, tl)
            t1h, t1l = dd_mul(d1h, d1l, cur_h, cur_l)
            t2h, t2l = dd_scale(prev_h, prev_l, m + alpha)
            nxt_h, nxt_l = dd_div(*dd_sub(t1h, t1l, t2h, t2l),
                                  np.float64(m + 1), np.float64(0.0))
            prev_h, prev_l = cur_h, cur_l
            cur_h, cur_l = nxt_h, nxt_l
        gh, gl = dd_mul(cur_h, cur_l, np.float64(cs_hi[k]),
                        np.float64(cs_lo[k]))
        sh, sl = dd_add(sh, sl, gh, gl)
        ah, al = dd_add(ah, al, np.abs(gh), np.where(gh < 0, -gl, gl))
    rh, _ = dd_div(sh, sl, *dd_add(ah, al, np.ones_like(x), zero))
    return rh


def certify(n, r, coeffs, fine_factor=10, npts=160, top=30):
    """Re-check the sign conditions on a ten-times-finer grid.

    Values are measured relative to the local evaluation scale
    sum_k |c_k| |L_k| + 1, the honest noise floor of the coefficient
    representation; the double-double evaluation resolves that ratio to
    ~1e-30, far below the acceptance slack.  Returns (fine_margin_f,
    fine_margin_hat, viol_f, viol_h): the worst relative values of -f
    beyond r and of fhat everywhere (nonnegative for a valid certificate)
    and the radii of the strongest violations on each side.
    """
    degree = len(coeffs) - 1
    f_grid, hat_grid = _grids(r, npts * fine_factor)
    far = np.linspace(f_grid[-1], 2.5 * f_grid[-1], 200)[1:]
    f_all = np.concatenate([f_grid, far])
    h_all = np.concatenate([hat_grid, far])
    with mp.workprec(140):
        cs_dd = dd_from_mp([mp.mpf(c) for c in coeffs])
        chat_dd = dd_from_mp([(-1) ** k * mp.mpf(c)
                              for k, c in enumerate(coeffs)])
    fv = _dd_rel_values(n, degree, cs_dd, f_all)        # want <= 0
    hv = -_dd_rel_values(n, degree, chat_dd, h_all)     # want <= 0
    bad_f = np.nonzero(fv > 0)[0]
    bad_h = np.nonzero(hv > 0)[0]
    viol_f = f_all[bad_f[np.argsort(fv[bad_f])[::-1][:top]]]
    viol_h = h_all[bad_h[np.argsort(hv[bad_h])[::-1][:top]]]
    return -float(fv.max()), -float(hv.max()), viol_f, viol_h


def optimize_r(n, degree=None, npts=160, rel_tol=2e-4, margin_tol=1e-9,
               safety=2.5e-4):
    """Smallest certified sign-crossing radius and the implied density bound.

    Bisects on r (feasibility is monotone: a larger r only relaxes the
    f <= 0 region), then enters a refinement loop that re-checks the
    winning coefficients on a much finer grid, folds any violations back
    into the constraint set as cutting planes, and nudges r upward in
    `safety`-sized steps whenever the enriched LP turns infeasible.  All
    radius probes share one `_MasterLP`, so only the first carries the
    mpmath matrix-build cost, and each probe warm-starts from the binding
    set of the previous one.
    """
    degree = degree or default_degree(n)
    from .reference import record_density

    with mp.workprec(80):
        rec = mp.mpf(record_density(n))
        r_rec = float(2 * (rec / ball_volume(n, 1, 80)) ** (mp.mpf(1) / n))
    # the best packing gives a lower bracket for the LP radius; the upper
    # cap is generous (bound/record ratios in low dimensions stay under
    # 1.5**n) and fixes the extent of the master grids
    r_cap = 1.5 * r_rec
    base = r_cap + 6.5
    u = np.linspace(0.0, 1.0, 2 * npts)
    master = _MasterLP(n, degree,
                       r_rec * (1 - 1e-9) + (base - r_rec) * u ** 2,
                       base * u ** 1.5)
    total_iters = 0
    support = None
    solution = None
    r_lo, r_hi = r_rec, r_rec
    for _ in range(10):
        r_lo = r_hi
        r_hi = min(r_hi * 1.06, r_cap)
        try:
            margin, coeffs, iters, support = master.solve(r_hi, support)
        except (InvalidCertificate, NumericalStall):
            if r_hi >= r_cap:
                break
            continue
        total_iters += iters
        if margin > margin_tol:
            solution = (r_hi, margin, coeffs)
            break
    if solution is None:
        raise InvalidCertificate(f"no feasible radius found for n={n}")
    while (r_hi - r_lo) > rel_tol * r_hi:
        mid = 0.5 * (r_lo + r_hi)
        try:
            margin, coeffs, iters, support = master.solve(mid, support)
            total_iters += iters
        except (InvalidCertificate, NumericalStall):
            # a stalled solve near the critical radius is treated as
            # infeasible, which can only push the certified radius (and so
            # the reported bound) upward, never below the true LP value
            margin = -1.0
        if margin > margin_tol:
            r_hi = mid
            solution = (mid, margin, coeffs)
        else:
            r_lo = mid
    r = solution[0]
    accepted = None
    steps = 0
    slack = -1e-18
    for _ in range(30):
        try:
            margin, coeffs, iters, support = master.solve(r, support)
            total_iters += iters
        except (InvalidCertificate, NumericalStall):
            margin = -1.0
        if margin <= margin_tol:
            r *= 1 + safety
            steps += 1
            continue
        fine_f, fine_h, viol_f, viol_h = certify(n, r, coeffs, npts=npts)
        if (fine_f >= slack and fine_h >= slack) or (
                viol_f.size == 0 and viol_h.size == 0):
            accepted = (margin, coeffs, fine_f, fine_h)
            break
        master.add_points(viol_f, viol_h)
    if accepted is None:
        raise InvalidCertificate(
            f"could not certify any radius near the bisection result for n={n}")
    margin, coeffs, fine_f, fine_h = accepted
    bound = float(ball_volume(n, r / 2, 80))
    return BoundCertificate(
        n=n, degree=degree, r=float(r), coeffs=coeffs,
        margin=float(margin), fine_margin_f=fine_f, fine_margin_hat=fine_h,
        bound=bound, iterations=total_iters,
        notes={"npts": npts, "rel_tol": rel_tol, "safety_steps": steps})


def bound_from_certificate(cert):
    """Recompute the volume bound from a certificate's radius."""
    if cert.fine_margin_f < -1e-15 or cert.fine_margin_hat < -1e-15:
        raise InvalidCertificate("certificate carries violated sign margins")
    return float(ball_volume(cert.n, cert.r / 2, 80))
