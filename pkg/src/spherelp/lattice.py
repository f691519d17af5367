"""Exact and high-precision lattice computations.

Gram matrices stay in exact rational arithmetic; embedded bases are
high-precision floats produced by Cholesky factorization.  Vector counts come
from branch-and-prune enumeration whose pruning box is floating point but
whose membership test is exact integer arithmetic on the Gram form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp
import numpy as np

from .errors import BudgetExceeded, NotPositiveDefinite, SingularBasis

__all__ = [
    "GramMatrix",
    "LatticeBasis",
    "ThetaCounts",
    "DensityReport",
    "e8_gram",
    "identity_gram",
    "characteristic_polynomial",
    "basis_from_gram",
    "dual_basis",
    "covolume",
    "enumerate_vectors",
    "ball_volume",
    "packing_density",
    "greedy_lower_bound",
    "poisson_verify",
]

DEFAULT_NODE_BUDGET = 10 ** 8


@dataclass(frozen=True)
class GramMatrix:
    n: int
    entries: tuple  # n x n tuple of tuples of Fraction

    def __post_init__(self):
        ent = tuple(tuple(Fraction(v) for v in row) for row in self.entries)
        object.__setattr__(self, "entries", ent)
        if len(ent) != self.n or any(len(r) != self.n for r in ent):
            raise ValueError("entries must be n x n")
        for i in range(self.n):
            for j in range(i):
                if ent[i][j] != ent[j][i]:
                    raise ValueError("Gram matrix must be symmetric")

    @classmethod
    def from_rows(cls, rows):
        rows = [list(r) for r in rows]
        return cls(n=len(rows), entries=tuple(tuple(r) for r in rows))

    def is_positive_definite(self):
        """Leading-principal-minor test in exact arithmetic."""
        a = [[Fraction(v) for v in row] for row in self.entries]
        for k in range(self.n):
            if a[k][k] <= 0:
                return False
            for i in range(k + 1, self.n):
                f = a[i][k] / a[k][k]
                for j in range(k, self.n):
                    a[i][j] -= f * a[k][j]
        return True

    def is_integral(self):
        return all(v.denominator == 1 for row in self.entries for v in row)

    def is_even(self):
        return self.is_integral() and all(
            self.entries[i][i].numerator % 2 == 0 for i in range(self.n))

    def determinant(self):
        """Exact determinant by fraction-free elimination."""
        a = [[Fraction(v) for v in row] for row in self.entries]
        det = Fraction(1)
        for k in range(self.n):
            pivot = None
            for i in range(k, self.n):
                if a[i][k] != 0:
                    pivot = i
                    break
            if pivot is None:
                return Fraction(0)
            if pivot != k:
                a[k], a[pivot] = a[pivot], a[k]
                det = -det
            det *= a[k][k]
            for i in range(k + 1, self.n):
                f = a[i][k] / a[k][k]
                for j in range(k, self.n):
                    a[i][j] -= f * a[k][j]
        return det

    def inverse(self):
        """Exact inverse as a GramMatrix (Gram matrix of the dual basis)."""
        n = self.n
        a = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)]
             for i, row in enumerate(self.entries)]
        for k in range(n):
            pivot = next((i for i in range(k, n) if a[i][k] != 0), None)
            if pivot is None:
                raise SingularBasis("Gram matrix is singular")
            a[k], a[pivot] = a[pivot], a[k]
            p = a[k][k]
            a[k] = [v / p for v in a[k]]
            for i in range(n):
                if i != k and a[i][k] != 0:
                    f = a[i][k]
                    a[i] = [vi - f * vk for vi, vk in zip(a[i], a[k])]
        return GramMatrix(n=n, entries=tuple(tuple(row[n:]) for row in a))

    def to_json_dict(self):
        return {
            "n": self.n,
            "entries": [[v.numerator, v.denominator]
                        for row in self.entries for v in row],
        }

    @classmethod
    def from_json_dict(cls, d):
        n = d["n"]
        flat = [Fraction(num, den) for num, den in d["entries"]]
        rows = tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(n))
        return cls(n=n, entries=rows)


@dataclass(frozen=True)
class LatticeBasis:
    n: int
    rows: tuple  # n rows, each a tuple of mpf
    source_gram: GramMatrix | None = None
    precision: int = 128

    def gram_float(self):
        b = np.array([[float(v) for v in row] for row in self.rows])
        return b @ b.T

    def gram_exact(self):
        """Exact Gram: the source when available, else exact binary rationals."""
        if self.source_gram is not None:
            return self.source_gram
        rows = [[Fraction(float(v)) for v in row] for row in self.rows]
        ent = [[sum(a * b for a, b in zip(ri, rj)) for rj in rows] for ri in rows]
        return GramMatrix(n=self.n, entries=tuple(tuple(r) for r in ent))

    def to_json_dict(self):
        return {
            "n": self.n,
            "entries": [mp.nstr(v, int(self.precision * 0.302) + 3)
                        for row in self.rows for v in row],
        }


@dataclass(frozen=True)
class ThetaCounts:
    max_norm: Fraction
    counts: dict = field(default_factory=dict)  # squared length -> count

    def minimal_norm(self):
        nonzero = [k for k, v in self.counts.items() if k != 0 and v > 0]
        return min(nonzero) if nonzero else None

    def to_json_list(self):
        def key(x):
            return Fraction(x)
        items = sorted(self.counts.items(), key=lambda kv: key(kv[0]))
        return [[(k.numerator if isinstance(k, Fraction) and k.denominator == 1
                  else float(k)) if isinstance(k, Fraction) else k, v]
                for k, v in items]


@dataclass(frozen=True)
class DensityReport:
    n: int
    minimal_length: float
    covolume: float
    translate_count: int
    density: float

    def to_json_dict(self):
        return {
            "n": self.n,
            "minimal_length": self.minimal_length,
            "covolume": self.covolume,
            "translate_count": self.translate_count,
            "density": self.density,
        }


# -- constructors ----------------------------------------------------------

# Dynkin diagram edges for the E8 numbering used here: a chain
# 1-2-3-5-6-7-8 with node 4 attached to node 3.
_E8_EDGES = [(1, 2), (2, 3), (3, 4), (3, 5), (5, 6), (6, 7), (7, 8)]


def e8_gram():
    """The 8x8 E8 Gram matrix: 2 on the diagonal, -1 on diagram edges."""
    ent = [[Fraction(0)] * 8 for _ in range(8)]
    for i in range(8):
        ent[i][i] = Fraction(2)
    for a, b in _E8_EDGES:
        ent[a - 1][b - 1] = ent[b - 1][a - 1] = Fraction(-1)
    return GramMatrix(n=8, entries=tuple(tuple(r) for r in ent))


def identity_gram(n, scale=1):
    ent = [[Fraction(scale) if i == j else Fraction(0) for j in range(n)]
           for i in range(n)]
    return GramMatrix(n=n, entries=tuple(tuple(r) for r in ent))


def characteristic_polynomial(g):
    """Exact coefficients of det(tI - g), degree n down to 0 (Faddeev-LeVerrier)."""
    n = g.n
    a = [[Fraction(v) for v in row] for row in g.entries]

    def matmul(x, y):
        return [[sum(x[i][k] * y[k][j] for k in range(n)) for j in range(n)]
                for i in range(n)]

    def trace(x):
        return sum(x[i][i] for i in range(n))

    coeffs = [Fraction(1)]
    m = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for k in range(1, n + 1):
        am = matmul(a, m)
        c = -trace(am) / k
        coeffs.append(c)
        m = [[am[i][j] + (c if i == j else 0) for j in range(n)] for i in range(n)]
    return coeffs


def basis_from_gram(g, precision=128):
    """Lower-triangular embedding via Cholesky at the given bit precision."""
    n = g.n
    with mp.workprec(precision + 20):
        low = [[mp.mpf(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1):
                s = mp.mpf(g.entries[i][j].numerator) / g.entries[i][j].denominator
                s -= mp.fsum(low[i][k] * low[j][k] for k in range(j))
                if i == j:
                    if s <= 0:
                        raise NotPositiveDefinite(
                            f"nonpositive pivot at index {i}")
                    low[i][j] = mp.sqrt(s)
                else:
                    low[i][j] = s / low[j][j]
        rows = tuple(tuple(r) for r in low)
    return LatticeBasis(n=n, rows=rows, source_gram=g, precision=precision)


def _mp_matrix(basis):
    return mp.matrix([[v for v in row] for row in basis.rows])


def covolume(b, precision=None):
    precision = precision or b.precision
    with mp.workprec(precision + 20):
        d = mp.det(_mp_matrix(b))
        return abs(d)


def dual_basis(b, precision=None):
    """Inverse-transpose basis; exact dual Gram when the source Gram is known."""
    precision = precision or b.precision
    with mp.workprec(precision + 20):
        m = _mp_matrix(b)
        if abs(mp.det(m)) < mp.mpf(2) ** (-precision // 2):
            raise SingularBasis("basis determinant is numerically zero")
        inv = m ** -1
        rows = tuple(tuple(inv[j, i] for j in range(b.n)) for i in range(b.n))
    dual_gram = b.source_gram.inverse() if b.source_gram is not None else None
    return LatticeBasis(n=b.n, rows=rows, source_gram=dual_gram,
                        precision=precision)


# -- enumeration -----------------------------------------------------------

def _integerized_gram(g):
    """(integer numpy Gram, denominator L) with G = Gi / L entrywise."""
    denoms = [v.denominator for row in g.entries for v in row]
    lcm = 1
    for d in denoms:
        lcm = lcm * d // math.gcd(lcm, d)
    gi = np.array([[int(v * lcm) for v in row] for row in g.entries],
                  dtype=np.int64)
    return gi, lcm


def enumerate_vectors(b, max_norm, node_budget=DEFAULT_NODE_BUDGET):
    """Exact counts of lattice vectors with squared length <= max_norm.

    The float Cholesky frame only bounds the search box (with slack); whether
    a candidate is counted, and under which squared length, is decided in
    integer arithmetic on the Gram form.
    """
    if max_norm < 0:
        raise ValueError("max_norm must be nonnegative")
    g = b.gram_exact()
    n = g.n
    gi, lcm = _integerized_gram(g)
    bound_scaled = Fraction(max_norm) * lcm  # compare integer values against this
    cnum, cden = bound_scaled.numerator, bound_scaled.denominator

    gf = np.array(gi, dtype=float)
    try:
        chol = np.linalg.cholesky(gf)  # gf = chol @ chol.T, lower
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    r = [list(row) for row in chol.T]  # upper triangular, Q(x) = |r @ x|^2
    gil = [[int(v) for v in row] for row in gi]
    budget_f = float(bound_scaled) * (1 + 1e-9) + 1e-6
    cap = cnum // cden if cnum >= 0 else -1
    if cap < 0:
        return ThetaCounts(max_norm=Fraction(max_norm), counts={})
    total = np.zeros(cap + 1, dtype=np.int64)
    nodes = 0
    a_leaf = gil[0][0]

    # Negation symmetry: only explore branches whose outermost nonzero
    # coordinate is positive and count them twice; the all-zero prefix keeps
    # symmetric=True down to the leaf, where x=0 contributes the zero vector.
    def recurse(level, ulin, pn, partial, acc, symmetric):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise BudgetExceeded(f"enumeration exceeded {node_budget} nodes")
        rem = budget_f - acc
        if rem < 0:
            return
        rii = r[level][level]
        center = -partial[level] / rii
        halfw = math.sqrt(rem) / rii * (1 + 1e-9) + 1e-9
        lo = math.ceil(center - halfw)
        hi = math.floor(center + halfw)
        if symmetric and lo < 0:
            lo = 0
        if lo > hi:
            return
        if level == 0:
            bq = 2 * ulin[0]
            xs = np.arange(lo - 1, hi + 2, dtype=np.int64)
            vals = a_leaf * xs * xs + bq * xs + pn
            ok = (vals * cden <= cnum) & (vals >= 0)
            if symmetric:
                pos = xs > 0
                v2 = vals[ok & pos]
                if v2.size:
                    total[:] += 2 * np.bincount(v2, minlength=cap + 1)
                vz = vals[ok & (xs == 0)]
                if vz.size:
                    total[:] += np.bincount(vz, minlength=cap + 1)
            else:
                v2 = vals[ok]
                if v2.size:
                    total[:] += 2 * np.bincount(v2, minlength=cap + 1)
            return
        gcol = [gil[i][level] for i in range(level)]
        rcol = [r[i][level] for i in range(level)]
        ull = ulin[level]
        gll = gil[level][level]
        if level == 2:
            # batch the bottom three levels on one integer grid (see the
            # level-1 branch below for the masking argument)
            if symmetric and lo == 0:
                recurse(1, ulin[:2], pn, partial[:2] + [0.0], acc, True)
                lo = 1
                if lo > hi:
                    return
            if lo > hi:
                return
            xs2 = np.arange(lo, hi + 1, dtype=np.int64)
            nodes += xs2.size
            u0 = ulin[0] + xs2 * gcol[0]
            u1 = ulin[1] + xs2 * gcol[1]
            pn2 = pn + xs2 * (xs2 * gll + 2 * ull)
            f2 = xs2.astype(float)
            p0 = partial[0] + rcol[0] * f2
            p1 = partial[1] + rcol[1] * f2
            y2 = partial[2] + rii * f2
            acc2 = acc + y2 * y2
            r11, r01, r00 = r[1][1], r[0][1], r[0][0]
            g11, g01 = gil[1][1], gil[0][1]
            half1 = np.sqrt(np.maximum(budget_f - acc2, 0.0)) / r11 \
                * (1 + 1e-9) + 1e-9
            lo1 = int(np.floor((-p1 / r11 - half1).min())) - 1
            hi1 = int(np.ceil((-p1 / r11 + half1).max())) + 1
            xs1 = np.arange(lo1, hi1 + 1, dtype=np.int64)
            pn21 = pn2[:, None] + xs1 * (xs1 * g11 + 2 * u1[:, None])
            b0 = u0[:, None] + xs1 * g01
            p0b = p0[:, None] + r01 * xs1.astype(float)
            y1 = p1[:, None] + r11 * xs1.astype(float)
            rem1 = budget_f - (acc2[:, None] + y1 * y1)
            half0 = np.sqrt(np.maximum(rem1, 0.0)) / r00 * (1 + 1e-9) + 1e-9
            lo0 = int(np.floor((-p0b / r00 - half0).min())) - 1
            hi0 = int(np.ceil((-p0b / r00 + half0).max())) + 1
            xs0 = np.arange(lo0, hi0 + 1, dtype=np.int64)
            vals = (a_leaf * xs0 * xs0)[None, None, :] \
                + 2 * b0[:, :, None] * xs0[None, None, :] \
                + pn21[:, :, None]
            v2 = vals[(vals * cden <= cnum) & (vals >= 0)]
            if v2.size:
                total[:] += 2 * np.bincount(v2, minlength=cap + 1)
            return
        if level == 1:
            # batch the bottom two levels on one integer grid; the exact
            # norm test is the membership criterion, so padding the leaf
            # range to the widest row only adds masked-out entries
            if symmetric and lo == 0:
                recurse(0, [ulin[0]], pn, [partial[0] + 0.0], acc, True)
                lo = 1
                if lo > hi:
                    return
            xs1 = np.arange(lo, hi + 1, dtype=np.int64)
            nodes += xs1.size
            pn1 = pn + xs1 * (xs1 * gll + 2 * ull)
            y1 = partial[1] + rii * xs1.astype(float)
            rem1 = budget_f - (acc + y1 * y1)
            b1 = ulin[0] + xs1 * gcol[0]
            p1 = partial[0] + rcol[0] * xs1.astype(float)
            r00 = r[0][0]
            half1 = np.sqrt(np.maximum(rem1, 0.0)) / r00 * (1 + 1e-9) + 1e-9
            lo0 = int(np.floor((-p1 / r00 - half1).min())) - 1
            hi0 = int(np.ceil((-p1 / r00 + half1).max())) + 1
            xs0 = np.arange(lo0, hi0 + 1, dtype=np.int64)
            vals = (a_leaf * xs0 * xs0)[None, :] \
                + 2 * b1[:, None] * xs0[None, :] + pn1[:, None]
            v2 = vals[(vals * cden <= cnum) & (vals >= 0)]
            if v2.size:
                total[:] += 2 * np.bincount(v2, minlength=cap + 1)
            return
        for x in range(lo, hi + 1):
            new_ulin = [ulin[i] + x * gcol[i] for i in range(level)]
            new_pn = pn + x * (x * gll + 2 * ull)
            y = partial[level] + rii * x
            new_partial = [partial[i] + rcol[i] * x for i in range(level)]
            recurse(level - 1, new_ulin, new_pn, new_partial, acc + y * y,
                    symmetric and x == 0)

    if n == 1:
        recurse(0, [0], 0, [0.0], 0.0, True)
    else:
        recurse(n - 1, [0] * n, 0, [0.0] * n, 0.0, True)

    counts = {}
    for scaled in np.nonzero(total)[0].tolist():
        key = Fraction(int(scaled), lcm)
        counts[key] = int(total[scaled])
    if cnum >= 0:
        counts[Fraction(0)] = 1  # the zero vector, counted once
    return ThetaCounts(max_norm=Fraction(max_norm), counts=counts)


# -- densities -------------------------------------------------------------

def ball_volume(n, radius, precision=128):
    """pi^(n/2) / Gamma(n/2 + 1) * radius^n."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    with mp.workprec(precision + 20):
        return (mp.pi ** (mp.mpf(n) / 2) / mp.gamma(mp.mpf(n) / 2 + 1)
                * mp.mpf(radius) ** n)


def packing_density(n, minimal_length, covol, translate_count=1, precision=128):
    if minimal_length <= 0 or covol <= 0 or translate_count <= 0:
        raise ValueError("all arguments must be positive")
    with mp.workprec(precision + 20):
        dens = (translate_count * ball_volume(n, mp.mpf(minimal_length) / 2, precision)
                / mp.mpf(covol))
        return DensityReport(
            n=n,
            minimal_length=float(minimal_length),
            covolume=float(covol),
            translate_count=translate_count,
            density=float(dens),
        )


def greedy_lower_bound(n):
    """Any saturated packing covers at least a 2^-n fraction of space."""
    return 2.0 ** (-n)


# -- Poisson summation check ----------------------------------------------

def _enumerate_shifted_float(gram_f, center, bound):
    """Integer points m with (m + center)^T G (m + center) <= bound.

    Returns an (N, n) int64 array.  The innermost coordinate is emitted as a
    whole numpy block per branch, which keeps the Python recursion on the
    sparse upper levels only.
    """
    n = gram_f.shape[0]
    r = np.linalg.cholesky(gram_f).T
    slack = bound * (1 + 1e-9) + 1e-9
    blocks = []
    coords = np.zeros(n, dtype=np.int64)

    def recurse(level, partial, acc):
        rii = r[level, level]
        cent = -partial[level] / rii - center[level]
        halfw = math.sqrt(max(slack - acc, 0.0)) / rii + 1e-9
        lo = math.ceil(cent - halfw)
        hi = math.floor(cent + halfw)
        if hi < lo:
            return
        xs = np.arange(lo, hi + 1)
        ys = partial[level] + rii * (xs + center[level])
        accs = acc + ys * ys
        if level == 0:
            keep = accs <= slack
            if keep.any():
                block = np.empty((int(keep.sum()), n), dtype=np.int64)
                block[:, 0] = xs[keep]
                block[:, 1:] = coords[1:]
                blocks.append(block)
            return
        if level == 1:
            # vectorize the bottom two levels: one rectangular grid of
            # (x0, x1) candidates per call, masked by the norm bound
            good = accs <= slack
            if not good.any():
                return
            x1 = xs[good]
            acc1 = accs[good]
            p0 = partial[0] + r[0, 1] * (x1 + center[1])
            cent0 = -p0 / r[0, 0] - center[0]
            half0 = np.sqrt(np.maximum(slack - acc1, 0.0)) / r[0, 0] + 1e-9
            lo0 = np.ceil(cent0 - half0).astype(np.int64)
            hi0 = np.floor(cent0 + half0).astype(np.int64)
            width = int((hi0 - lo0).max()) + 1
            if width <= 0:
                return
            x0 = lo0[:, None] + np.arange(width)[None, :]
            y0 = p0[:, None] + r[0, 0] * (x0 + center[0])
            keep = (x0 <= hi0[:, None]) & (acc1[:, None] + y0 * y0 <= slack)
            if not keep.any():
                return
            rows, cols = np.nonzero(keep)
            block = np.empty((rows.size, n), dtype=np.int64)
            block[:, 0] = x0[rows, cols]
            block[:, 1] = x1[rows]
            block[:, 2:] = coords[2:]
            blocks.append(block)
            return
        for x, a in zip(xs, accs):
            if a > slack:
                continue
            coords[level] = x
            recurse(level - 1,
                    partial + r[:, level] * (x + center[level]), a)

    recurse(n - 1, np.zeros(n), 0.0)
    if not blocks:
        return np.empty((0, n), dtype=np.int64)
    return np.concatenate(blocks, axis=0)


def poisson_verify(b, translation=None, truncation_radius=6.0, precision=128):
    """|LHS - RHS| of translated Poisson summation for the Gaussian e^{-pi|x|^2}.

    Both sides are truncated at the given radius.  The Gaussian is self-dual,
    so each side is an explicit sum.
    """
    n = b.n
    with mp.workprec(precision + 20):
        radius = mp.mpf(truncation_radius)
        bound = float(radius) ** 2
        vol = covolume(b, precision)
        tau = [mp.mpf(0)] * n if translation is None else [mp.mpf(v) for v in translation]
        tau_zero = all(v == 0 for v in tau)
        dual = dual_basis(b, precision)

        if tau_zero:
            def side(basis):
                counts = enumerate_vectors(basis, Fraction(bound).limit_denominator(10 ** 6))
                return mp.fsum(
                    c * mp.exp(-mp.pi * mp.mpf(k.numerator) / k.denominator)
                    for k, c in counts.counts.items())
            lhs = side(b)
            rhs = side(dual) / vol
            return abs(lhs - rhs)

        # translated sums run vectorized in doubles: pairwise summation over
        # the truncation ball leaves roundoff around 1e-14, far below the
        # 1e-10 scale these residuals are checked against
        bmat = np.array([[float(v) for v in row] for row in b.rows])
        gram_f = bmat @ bmat.T
        tau_f = np.array([float(v) for v in tau])
        center = np.linalg.solve(bmat.T, tau_f)  # tau = center @ B

        shifted = (_enumerate_shifted_float(gram_f, center, bound) @ bmat
                   + tau_f)
        lhs = float(np.sum(np.exp(-np.pi * np.einsum("ij,ij->i",
                                                     shifted, shifted))))

        dmat = np.array([[float(v) for v in row] for row in dual.rows])
        dgram = dmat @ dmat.T
        ys = _enumerate_shifted_float(dgram, np.zeros(n), bound) @ dmat
        norms = np.einsum("ij,ij->i", ys, ys)
        phases = ys @ tau_f
        rhs = complex(np.sum(np.exp(-np.pi * norms)
                             * np.exp(2j * np.pi * phases)))
        return abs(mp.mpf(lhs) - mp.mpc(rhs) / vol)
