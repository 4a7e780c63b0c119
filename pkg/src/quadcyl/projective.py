"""Projective points, quadratic forms, and exact linear algebra over towers.

Vectors are tuples of TowerScalar.  Matrices are tuples of row tuples.
Everything is exact; rank and kernels are computed by fraction-free-ish
Gauss elimination over the tower field (which is exact anyway).

Conventions used throughout the package:
  - a quadratic form is a symmetric matrix A with f(x) = x^T A x, so the
    coefficient of a cross term x_i x_j (i != j) is 2*A[i][j];
  - the associated bilinear form is beta(u, v) = u^T A v, and the gradient
    at x is the covector 2*A x (we drop the 2 where only vanishing matters).
"""

from __future__ import annotations

import random

from .errors import (
    PointNotOnQuadricError,
    RetryLimitError,
    SingularPointError,
    TowerError,
    TowerLimitError,
)
from .tower import ZERO, ONE, as_scalar

Vec = tuple
Mat = tuple


def vec(values) -> Vec:
    return tuple(as_scalar(v) for v in values)


def mat(rows) -> Mat:
    m = tuple(tuple(as_scalar(v) for v in row) for row in rows)
    if m and any(len(r) != len(m[0]) for r in m):
        raise TowerError("ragged matrix")
    return m


def zero_vec(n) -> Vec:
    return (ZERO,) * n


def unit_vec(n, i) -> Vec:
    return tuple(ONE if j == i else ZERO for j in range(n))


def identity_mat(n) -> Mat:
    return tuple(unit_vec(n, i) for i in range(n))


def vec_add(u, v) -> Vec:
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u, v) -> Vec:
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(u, c) -> Vec:
    return tuple(a * c for a in u)


def dot(u, v):
    acc = ZERO
    for a, b in zip(u, v):
        if a.is_zero() or b.is_zero():
            continue
        acc = acc + a * b
    return acc


def mat_vec(m, v) -> Vec:
    return tuple(dot(row, v) for row in m)


def mat_mul(a, b) -> Mat:
    bt = transpose(b)
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def transpose(m) -> Mat:
    return tuple(zip(*m)) if m else ()


def mat_eq(a, b) -> bool:
    return len(a) == len(b) and all(
        len(r) == len(s) and all(x == y for x, y in zip(r, s))
        for r, s in zip(a, b))


def is_zero_vec(v) -> bool:
    return all(x.is_zero() for x in v)


def _eliminate(rows):
    """Row-reduce in place; returns the pivot column list."""
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, nrows):
            if not rows[i][c].is_zero():
                pr = i
                break
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(nrows):
            if i != r and not rows[i][c].is_zero():
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return pivots


def rref(m):
    """(reduced rows as Mat, pivot columns)."""
    rows = [list(r) for r in m]
    pivots = _eliminate(rows)
    return tuple(tuple(r) for r in rows[:len(pivots)]), pivots


def rank_of(m) -> int:
    if not m:
        return 0
    rows = [list(r) for r in m]
    return len(_eliminate(rows))


def nullspace(m) -> tuple:
    """A basis (tuple of Vecs) for {v : m v = 0}."""
    if not m:
        return ()
    ncols = len(m[0])
    red, pivots = rref(m)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [ZERO] * ncols
        v[fc] = ONE
        for ri, pc in enumerate(pivots):
            v[pc] = -red[ri][fc]
        basis.append(tuple(v))
    return tuple(basis)


def mat_inverse(m) -> Mat:
    n = len(m)
    rows = [list(r) + list(unit_vec(n, i)) for i, r in enumerate(m)]
    pivots = _eliminate(rows)
    if len(pivots) != n or pivots != list(range(n)):
        raise TowerError("matrix is singular")
    return tuple(tuple(r[n:]) for r in rows)


def det(m):
    n = len(m)
    rows = [list(r) for r in m]
    sign = 1
    acc = ONE
    for c in range(n):
        pr = None
        for i in range(c, n):
            if not rows[i][c].is_zero():
                pr = i
                break
        if pr is None:
            return ZERO
        if pr != c:
            rows[c], rows[pr] = rows[pr], rows[c]
            sign = -sign
        acc = acc * rows[c][c]
        inv = 1 / rows[c][c]
        for i in range(c + 1, n):
            if not rows[i][c].is_zero():
                f = rows[i][c] * inv
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[c])]
    return acc if sign == 1 else -acc


class ProjPoint:
    """A point of projective space, stored as a nonzero coordinate tuple.

    Equality and hashing go through the canonical representative whose
    first nonzero coordinate is 1.
    """

    __slots__ = ("coords", "_canon")

    def __init__(self, coords):
        cs = vec(coords)
        if is_zero_vec(cs):
            raise TowerError("projective point needs a nonzero coordinate")
        self.coords = cs
        self._canon = None

    def canonical_coords(self) -> Vec:
        if self._canon is None:
            i = next(j for j, c in enumerate(self.coords) if not c.is_zero())
            lead = self.coords[i]
            if lead == 1:
                self._canon = self.coords
            else:
                inv = 1 / lead
                self._canon = tuple(c * inv for c in self.coords)
        return self._canon

    def canonical(self) -> "ProjPoint":
        return ProjPoint(self.canonical_coords())

    @property
    def dim(self) -> int:
        return len(self.coords) - 1

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __eq__(self, other):
        if not isinstance(other, ProjPoint):
            return NotImplemented
        if len(self.coords) != len(other.coords):
            return False
        return all(
            a == b
            for a, b in zip(self.canonical_coords(), other.canonical_coords()))

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __hash__(self):
        return hash(tuple(self.canonical_coords()))

    def __repr__(self):
        return "(" + " : ".join(repr(c) for c in self.canonical_coords()) + ")"


def proj(coords) -> ProjPoint:
    return ProjPoint(coords)


class QuadForm:
    """A quadratic form given by its symmetric matrix."""

    __slots__ = ("matrix", "_rank")

    def __init__(self, matrix):
        m = mat(matrix)
        n = len(m)
        if any(len(r) != n for r in m):
            raise TowerError("quadratic form matrix must be square")
        for i in range(n):
            for j in range(i + 1, n):
                if m[i][j] != m[j][i]:
                    raise TowerError("quadratic form matrix must be symmetric")
        self.matrix = m
        self._rank = None

    @property
    def size(self) -> int:
        return len(self.matrix)

    @property
    def dim(self) -> int:
        """Dimension of the ambient projective space."""
        return self.size - 1

    @staticmethod
    def _coords(x):
        return x.coords if isinstance(x, ProjPoint) else vec(x)

    def __call__(self, x):
        v = self._coords(x)
        return dot(v, mat_vec(self.matrix, v))

    def bilinear(self, u, v):
        return dot(self._coords(u), mat_vec(self.matrix, self._coords(v)))

    def gradient(self, x) -> Vec:
        """A x (proportional to the actual gradient 2 A x)."""
        return mat_vec(self.matrix, self._coords(x))

    def rank(self) -> int:
        if self._rank is None:
            self._rank = rank_of(self.matrix)
        return self._rank

    def radical_basis(self) -> tuple:
        return nullspace(self.matrix)

    def is_smooth_quadric(self) -> bool:
        return self.rank() == self.size

    def transform(self, m) -> "QuadForm":
        """The form of f composed with the substitution x = M u."""
        mm = mat(m)
        return QuadForm(mat_mul(transpose(mm), mat_mul(self.matrix, mm)))

    def contains(self, x) -> bool:
        return self(x).is_zero()

    def is_smooth_at(self, x) -> bool:
        return not is_zero_vec(self.gradient(x))

    def tangent_space(self, x) -> "LinearSubspace":
        """Tangent hyperplane at a smooth point of the quadric."""
        g = self.gradient(x)
        if not self(x).is_zero():
            raise PointNotOnQuadricError("point is not on the quadric")
        if is_zero_vec(g):
            raise SingularPointError("quadric is singular at the point")
        return LinearSubspace.from_equations([g], self.size)

    def __eq__(self, other):
        if not isinstance(other, QuadForm):
            return NotImplemented
        return mat_eq(self.matrix, other.matrix)

    def __repr__(self):
        return "QuadForm(size=%d, rank=%d)" % (self.size, self.rank())


def quadform_from_terms(n, terms) -> QuadForm:
    """Build a form on n coordinates from {(i, j): coefficient} of the
    polynomial; off-diagonal polynomial coefficients split across the two
    symmetric entries."""
    rows = [[ZERO] * n for _ in range(n)]
    for (i, j), c in terms.items():
        c = as_scalar(c)
        if i == j:
            rows[i][i] = rows[i][i] + c
        else:
            half = c / 2
            rows[i][j] = rows[i][j] + half
            rows[j][i] = rows[j][i] + half
    return QuadForm(rows)


class CoordChange:
    """An invertible substitution x = M u between ambient coordinates x
    and chart coordinates u."""

    __slots__ = ("matrix", "_inverse")

    def __init__(self, matrix, inverse=None):
        self.matrix = mat(matrix)
        self._inverse = mat(inverse) if inverse is not None else None

    @property
    def size(self):
        return len(self.matrix)

    def inverse_matrix(self) -> Mat:
        if self._inverse is None:
            self._inverse = mat_inverse(self.matrix)
        return self._inverse

    def to_ambient(self, u) -> Vec:
        return mat_vec(self.matrix, u)

    def from_ambient(self, x) -> Vec:
        return mat_vec(self.inverse_matrix(), x)

    def then(self, outer) -> "CoordChange":
        """First apply self's substitution, then outer's: x = M_outer M_self u."""
        inv = None
        if self._inverse is not None and outer._inverse is not None:
            inv = mat_mul(self._inverse, outer._inverse)
        return CoordChange(mat_mul(outer.matrix, self.matrix), inv)

    def __eq__(self, other):
        if not isinstance(other, CoordChange):
            return NotImplemented
        return mat_eq(self.matrix, other.matrix)


class LinearSubspace:
    """A linear subspace, stored as a spanning basis and/or equations."""

    __slots__ = ("ambient", "_span", "_eqs")

    def __init__(self, ambient, span=None, eqs=None):
        self.ambient = ambient
        self._span = span
        self._eqs = eqs

    @classmethod
    def from_span(cls, vectors, ambient=None):
        vs = [v.coords if isinstance(v, ProjPoint) else vec(v) for v in vectors]
        if ambient is None:
            if not vs:
                raise TowerError("empty span needs an explicit ambient size")
            ambient = len(vs[0])
        red, _ = rref(vs) if vs else ((), [])
        return cls(ambient, span=tuple(red))

    @classmethod
    def from_equations(cls, forms, ambient=None):
        fs = [vec(f) for f in forms]
        if ambient is None:
            if not fs:
                raise TowerError("no equations needs an explicit ambient size")
            ambient = len(fs[0])
        red, _ = rref(fs) if fs else ((), [])
        return cls(ambient, eqs=tuple(red))

    @classmethod
    def full(cls, ambient):
        return cls(ambient, span=identity_mat(ambient), eqs=())

    def span_basis(self) -> tuple:
        if self._span is None:
            self._span = nullspace(self._eqs) if self._eqs else identity_mat(self.ambient)
        return self._span

    def equations(self) -> tuple:
        if self._eqs is None:
            self._eqs = nullspace(self.span_basis()) if self.span_basis() else \
                identity_mat(self.ambient)
        return self._eqs

    def linear_dim(self) -> int:
        return len(self.span_basis())

    def proj_dim(self) -> int:
        return self.linear_dim() - 1

    def contains(self, x) -> bool:
        v = x.coords if isinstance(x, ProjPoint) else vec(x)
        return all(dot(f, v).is_zero() for f in self.equations())

    def intersect(self, other) -> "LinearSubspace":
        eqs = list(self.equations()) + list(other.equations())
        return LinearSubspace.from_equations(eqs, self.ambient)

    def __repr__(self):
        return "LinearSubspace(ambient=%d, dim=%d)" % (
            self.ambient, self.linear_dim())


def congruent_diagonalize(q: QuadForm):
    """(CoordChange M, diagonal entries) with M^T A M diagonal, nonzero
    entries first.  Symmetric elimination; never extends any tower."""
    n = q.size
    a = [list(r) for r in q.matrix]
    m = [list(r) for r in identity_mat(n)]

    def add_col(dst, src, c):
        # column operation on A (and the congruent row op) plus bookkeeping in M
        for i in range(n):
            a[i][dst] = a[i][dst] + a[i][src] * c
        for j in range(n):
            a[dst][j] = a[dst][j] + a[src][j] * c
        for i in range(n):
            m[i][dst] = m[i][dst] + m[i][src] * c

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        a[i], a[j] = a[j], a[i]
        for r in m:
            r[i], r[j] = r[j], r[i]

    for k in range(n):
        if a[k][k].is_zero():
            # bring a nonzero diagonal entry to position k, or manufacture
            # one from an off-diagonal entry
            found = None
            for i in range(k + 1, n):
                if not a[i][i].is_zero():
                    found = i
                    break
            if found is not None:
                swap_cols(k, found)
            else:
                pair = None
                for i in range(k, n):
                    for j in range(i + 1, n):
                        if not a[i][j].is_zero():
                            pair = (i, j)
                            break
                    if pair:
                        break
                if pair is None:
                    break  # remaining block is zero
                i, j = pair
                add_col(i, j, ONE)  # now a[i][i] = 2 a_ij != 0 (char 0)
                if i != k:
                    swap_cols(k, i)
        piv = a[k][k]
        inv = 1 / piv
        for j in range(k + 1, n):
            if not a[k][j].is_zero():
                add_col(j, k, -a[k][j] * inv)

    diag = [a[i][i] for i in range(n)]
    # move zero diagonal entries last, preserving the order of the rest
    order = [i for i in range(n) if not diag[i].is_zero()] + \
            [i for i in range(n) if diag[i].is_zero()]
    mt = transpose(m)
    cols = [mt[i] for i in order]
    change = CoordChange(transpose(cols))
    return change, tuple(diag[i] for i in order)


def max_linear_on_quadric(n: int, r: int) -> int:
    """Largest projective dimension of a linear space inside a rank-r
    quadric in P^n."""
    return n - (r + 1) // 2


def _random_combo(basis, rng, bound):
    while True:
        cs = [rng.randint(-bound, bound) for _ in basis]
        if any(cs):
            v = zero_vec(len(basis[0]))
            for c, b in zip(cs, basis):
                if c:
                    v = vec_add(v, vec_scale(b, as_scalar(c)))
            if not is_zero_vec(v):
                return v


def point_on_quadric(q: QuadForm, subspace=None, rng=None, tower=None,
                     predicate=None, retry_limit=64):
    """A point of V(q) inside the subspace, found by seeded random line
    sections.  Returns (ProjPoint, tower).

    Each attempt draws a random line in the subspace, solves the restricted
    quadratic exactly, and offers the roots to the predicate.  Attempts
    whose discriminant is already a square in the tower are free; paying an
    adjunction happens on a child tower, so the returned tower carries at
    most one new radicand (the one used by the returned point).
    """
    from .tower import Tower, sqrt_if_present

    if rng is None:
        rng = random.Random(0)
    if tower is None:
        tower = Tower.rationals()
    basis = subspace.span_basis() if subspace is not None else identity_mat(q.size)
    if not basis:
        raise RetryLimitError("empty subspace has no points")

    def offer(coords, tw):
        if is_zero_vec(coords):
            return None
        p = ProjPoint(coords)
        if predicate is not None and not predicate(p):
            return None
        return p, tw

    if len(basis) == 1:
        p = ProjPoint(basis[0])
        if q(p).is_zero():
            got = offer(basis[0], tower)
            if got:
                return got
        raise RetryLimitError("no acceptable point on the quadric in the subspace")

    for attempt in range(retry_limit):
        bound = 10 + 5 * (attempt // 8)
        u = _random_combo(basis, rng, bound)
        v = _random_combo(basis, rng, bound)
        fu = q(u)
        fuv = dot(u, mat_vec(q.matrix, v))
        fv = q(v)
        candidates = []
        work = tower
        if fu.is_zero() and fuv.is_zero() and fv.is_zero():
            # the whole line is on the quadric
            candidates = [u, v, vec_add(u, v)]
        elif fu.is_zero():
            candidates = [u]
            if not fuv.is_zero():
                # f(su + tv) = t (2 s fuv + t fv); second root
                candidates.append(vec_add(vec_scale(u, fv), vec_scale(v, -2 * fuv)))
        elif fv.is_zero():
            candidates = [v]
            if not fuv.is_zero():
                candidates.append(vec_add(vec_scale(v, fu), vec_scale(u, -2 * fuv)))
        else:
            disc = fuv * fuv - fu * fv
            root = sqrt_if_present(tower, disc)
            if root is None:
                if 2 * (attempt + 1) <= retry_limit:
                    continue  # early attempts hold out for a square disc
                try:
                    work = tower.extend(disc)
                except TowerLimitError:
                    continue  # keep hunting for adjunction-free lines
                root = work.generator(work.height)
            inv = 1 / fu
            for r in (root, -root):
                s = (-fuv + r) * inv
                candidates.append(vec_add(vec_scale(u, s), v))
        for cand in candidates:
            got = offer(cand, work)
            if got:
                return got
    raise RetryLimitError(
        "no acceptable point on the quadric after %d attempts" % retry_limit)
