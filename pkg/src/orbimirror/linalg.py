"""Exact integer/rational linear algebra: SNF, HNF, kernels, splittings, saturation.

Everything here is arbitrary precision (int / Fraction); no floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd


class LinAlgError(ValueError):
    pass


Vec = tuple[int, ...]


def _as_rows(data) -> tuple[Vec, ...]:
    rows = tuple(tuple(int(x) for x in row) for row in data)
    if not rows or not rows[0]:
        raise LinAlgError("matrix must have positive dimensions")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise LinAlgError("ragged matrix")
    return rows


@dataclass(frozen=True)
class IntMatrix:
    data: tuple[Vec, ...]

    def __init__(self, data):
        object.__setattr__(self, "data", _as_rows(data))

    @property
    def rows(self) -> int:
        return len(self.data)

    @property
    def cols(self) -> int:
        return len(self.data[0])

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def row(self, i) -> Vec:
        return self.data[i]

    def col(self, j) -> Vec:
        return tuple(r[j] for r in self.data)

    def transpose(self) -> "IntMatrix":
        return IntMatrix(zip(*self.data))

    def __mul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise LinAlgError("dimension mismatch in product")
        bt = list(zip(*other.data))
        return IntMatrix(
            tuple(sum(a * b for a, b in zip(r, c)) for c in bt) for r in self.data
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, IntMatrix) and self.data == other.data

    def __hash__(self):
        return hash(self.data)

    @staticmethod
    def identity(n: int) -> "IntMatrix":
        return IntMatrix(tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    def det(self) -> int:
        if self.rows != self.cols:
            raise LinAlgError("determinant of a non-square matrix")
        return _det_bareiss([list(r) for r in self.data])

    def is_unimodular(self) -> bool:
        return self.rows == self.cols and self.det() in (1, -1)


def _det_bareiss(a: list[list[int]]) -> int:
    # Fraction-free Gaussian elimination; exact for integer matrices.
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


@dataclass(frozen=True)
class SNFDecomposition:
    """U @ M @ V == S, U and V unimodular, diag(S) a divisibility chain."""

    u: IntMatrix
    s: IntMatrix
    v: IntMatrix

    def diagonal(self) -> tuple[int, ...]:
        k = min(self.s.rows, self.s.cols)
        return tuple(self.s[i, i] for i in range(k))

    def rank(self) -> int:
        return sum(1 for d in self.diagonal() if d != 0)


def smith_normal_form(m: IntMatrix) -> SNFDecomposition:
    """Smith normal form with deterministic smallest-pivot selection.

    Pivot rule: nonzero entry of minimal |value| in the active submatrix,
    ties by row then column index. Diagonal entries are normalized >= 0.
    """
    a = [list(r) for r in m.data]
    nr, nc = m.rows, m.cols
    u = [[1 if i == j else 0 for j in range(nr)] for i in range(nr)]
    v = [[1 if i == j else 0 for j in range(nc)] for i in range(nc)]

    def swap_rows(i, j):
        if i != j:
            a[i], a[j] = a[j], a[i]
            u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        if i != j:
            for row in a:
                row[i], row[j] = row[j], row[i]
            for row in v:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):
        # row_dst -= q * row_src
        if q:
            a[dst] = [x - q * y for x, y in zip(a[dst], a[src])]
            u[dst] = [x - q * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, q):
        if q:
            for row in a:
                row[dst] -= q * row[src]
            for row in v:
                row[dst] -= q * row[src]

    for k in range(min(nr, nc)):
        while True:
            pivot = None
            for i in range(k, nr):
                for j in range(k, nc):
                    val = a[i][j]
                    if val != 0 and (pivot is None or (abs(val), i, j) < pivot):
                        pivot = (abs(val), i, j)
            if pivot is None:
                break
            _, pi, pj = pivot
            swap_rows(k, pi)
            swap_cols(k, pj)
            dirty = False
            for i in range(k + 1, nr):
                if a[i][k]:
                    add_row(i, k, a[i][k] // a[k][k])
                    if a[i][k]:
                        dirty = True
            if dirty:
                continue
            for j in range(k + 1, nc):
                if a[k][j]:
                    add_col(j, k, a[k][j] // a[k][k])
                    if a[k][j]:
                        dirty = True
            if dirty:
                continue
            # Pivot divides the rest of the submatrix, or we absorb a witness row.
            p = a[k][k]
            offender = None
            for i in range(k + 1, nr):
                for j in range(k + 1, nc):
                    if a[i][j] % p:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            add_row(k, offender, -1)
        if k < min(nr, nc) and a[k][k] < 0:
            a[k] = [-x for x in a[k]]
            u[k] = [-x for x in u[k]]

    return SNFDecomposition(IntMatrix(u), IntMatrix(a), IntMatrix(v))


def unimodular_inverse(m: IntMatrix) -> IntMatrix:
    """Exact inverse of a unimodular integer matrix."""
    if m.rows != m.cols:
        raise LinAlgError("inverse of a non-square matrix")
    n = m.rows
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(m.data)]
    for k in range(n):
        piv = next((i for i in range(k, n) if aug[i][k] != 0), None)
        if piv is None:
            raise LinAlgError("singular matrix")
        aug[k], aug[piv] = aug[piv], aug[k]
        inv = 1 / aug[k][k]
        aug[k] = [x * inv for x in aug[k]]
        for i in range(n):
            if i != k and aug[i][k]:
                f = aug[i][k]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[k])]
    out = []
    for row in aug:
        vals = row[n:]
        if any(x.denominator != 1 for x in vals):
            raise LinAlgError("matrix is not unimodular")
        out.append([int(x) for x in vals])
    return IntMatrix(out)


def hermite_row_basis(vectors) -> list[Vec]:
    """Canonical row-HNF basis of the lattice spanned by the given vectors.

    Pivots positive, entries above each pivot reduced into [0, pivot).
    Zero input yields an empty list.
    """
    rows = [list(int(x) for x in v) for v in vectors if any(v)]
    if not rows:
        return []
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise LinAlgError("ragged vector list")
    basis: list[list[int]] = []
    col = 0
    pend = rows
    while col < width and pend:
        nxt = []
        lead = None
        for r in pend:
            if r[col] == 0:
                nxt.append(r)
                continue
            if lead is None:
                lead = r
                continue
            # gcd-combine lead and r at this column
            g, x, y = _exgcd(lead[col], r[col])
            la, ra = lead[col] // g, r[col] // g
            new_lead = [x * p + y * q for p, q in zip(lead, r)]
            new_r = [-ra * p + la * q for p, q in zip(lead, r)]
            lead, rem = new_lead, new_r
            if any(rem):
                nxt.append(rem)
        if lead is not None:
            if lead[col] < 0:
                lead = [-x for x in lead]
            basis.append(lead)
        pend = nxt
        col += 1
    # Reduce entries above each pivot.
    pivots = [(next(j for j, x in enumerate(b) if x), i) for i, b in enumerate(basis)]
    for pcol, pi in reversed(pivots):
        p = basis[pi][pcol]
        for qi in range(pi):
            q = basis[qi][pcol] // p
            if q:
                basis[qi] = [x - q * y for x, y in zip(basis[qi], basis[pi])]
    return [tuple(b) for b in basis]


def _exgcd(a: int, b: int) -> tuple[int, int, int]:
    """g, x, y with x*a + y*b == g == gcd(a, b), g > 0 for (a, b) != (0, 0)."""
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        old_r, old_x, old_y = -old_r, -old_x, -old_y
    return old_r, old_x, old_y


def kernel_basis(m: IntMatrix) -> list[Vec]:
    """Canonical (HNF) Z-basis of {x : M x = 0}; automatically saturated."""
    snf = smith_normal_form(m)
    rank = snf.rank()
    if rank == m.cols:
        return []
    cols = [snf.v.col(j) for j in range(rank, m.cols)]
    return hermite_row_basis(cols)


def saturate(vectors) -> list[Vec]:
    """HNF basis of (Q-span of the input) intersected with Z^k."""
    rows = [v for v in vectors if any(v)]
    if not rows:
        return []
    w = IntMatrix(rows)
    snf = smith_normal_form(w)
    rank = snf.rank()
    vinv = unimodular_inverse(snf.v)
    return hermite_row_basis([vinv.row(i) for i in range(rank)])


def reduce_mod_lattice(vector, hnf_basis) -> Vec:
    """Canonical coset representative of `vector` modulo the HNF-spanned lattice."""
    v = list(int(x) for x in vector)
    for b in hnf_basis:
        pcol = next(j for j, x in enumerate(b) if x)
        q = v[pcol] // b[pcol]
        if q:
            v = [x - q * y for x, y in zip(v, b)]
    return tuple(v)


def splitting_maps(a: IntMatrix) -> tuple[IntMatrix | None, IntMatrix]:
    """Section data (s, g) for a surjective lattice map a: Z^n -> Z^d.

    With t the kernel basis (columns), the four identities hold exactly:
    s@t = id, a@g = id, a@t = 0, s@g = 0. Deterministic: g is the SNF
    right-inverse reduced to the canonical coset representative mod ker(a).
    For a trivial kernel (a invertible) s is None and g = a^{-1}.
    """
    snf = smith_normal_form(a)
    d, n = a.rows, a.cols
    diag = snf.diagonal()
    if snf.rank() < d or any(x != 1 for x in diag):
        raise LinAlgError(
            "map is not surjective onto Z^%d; invariant factors %s" % (d, list(diag))
        )
    ker = kernel_basis(a)
    # g0 = V [I;0] U  is a right inverse: a @ g0 = id.
    g0 = IntMatrix([[sum(snf.v[i, k] * snf.u[k, j] for k in range(d)) for j in range(d)]
                    for i in range(n)])
    if not ker:
        _check_splitting(a, None, g0, None)
        return None, g0
    gcols = [reduce_mod_lattice(g0.col(j), ker) for j in range(d)]
    g = IntMatrix(list(zip(*gcols)))
    t = IntMatrix(list(zip(*ker)))
    b = IntMatrix([list(t.row(i)) + list(g.row(i)) for i in range(n)])
    binv = unimodular_inverse(b)
    s = IntMatrix([binv.row(i) for i in range(n - d)])
    _check_splitting(a, s, g, t)
    return s, g


def _check_splitting(a, s, g, t):
    d, n = a.rows, a.cols
    ag = a * g
    if ag != IntMatrix.identity(d):
        raise LinAlgError("splitting check failed: a@g != id")
    if t is not None:
        at = a * t
        if any(x != 0 for row in at.data for x in row):
            raise LinAlgError("splitting check failed: a@t != 0")
        st = s * t
        if st != IntMatrix.identity(n - d):
            raise LinAlgError("splitting check failed: s@t != id")
        sg = s * g
        if any(x != 0 for row in sg.data for x in row):
            raise LinAlgError("splitting check failed: s@g != 0")


def normalized_simplex_volume(vectors) -> int:
    """|det| of d integer vectors in Z^d (the d!-normalized simplex volume)."""
    vecs = [tuple(int(x) for x in v) for v in vectors]
    d = len(vecs)
    if any(len(v) != d for v in vecs):
        raise LinAlgError("need exactly d vectors of length d")
    return abs(IntMatrix(vecs).det())


# ---------------------------------------------------------------------------
# Rational Gaussian elimination helpers (shared by cones/fan/picard).

QVec = tuple[Fraction, ...]


def qvec(v) -> QVec:
    return tuple(Fraction(x) for x in v)


def solve_unique(a_rows, b) -> QVec:
    """Unique rational solution of A x = b; raises if singular/inconsistent."""
    sol = solve_general(a_rows, b)
    if sol is None:
        raise LinAlgError("inconsistent linear system")
    part, null = sol
    if null:
        raise LinAlgError("linear system is underdetermined")
    return part


def solve_general(a_rows, b):
    """Particular solution + nullspace basis of A x = b over Q, or None.

    Deterministic: first-nonzero pivoting in row-echelon order.
    """
    rows = [list(map(Fraction, r)) + [Fraction(x)] for r, x in zip(a_rows, b)]
    ncols = len(rows[0]) - 1 if rows else 0
    pivots: list[int] = []
    rank = 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = 1 / rows[rank][col]
        rows[rank] = [x * inv for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[rank])]
        pivots.append(col)
        rank += 1
    for i in range(rank, len(rows)):
        if rows[i][ncols] != 0:
            return None
    part = [Fraction(0)] * ncols
    for i, col in enumerate(pivots):
        part[col] = rows[i][ncols]
    free = [c for c in range(ncols) if c not in pivots]
    null = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for i, col in enumerate(pivots):
            vec[col] = -rows[i][fc]
        null.append(tuple(vec))
    return tuple(part), null


def dot(u, v) -> Fraction:
    return sum((Fraction(a) * Fraction(b) for a, b in zip(u, v)), Fraction(0))


def clear_denominators(v) -> Vec:
    """Scale a rational vector to a primitive integer vector (gcd 1), keeping direction."""
    fracs = [Fraction(x) for x in v]
    if all(x == 0 for x in fracs):
        return tuple(0 for _ in fracs)
    lcm = 1
    for x in fracs:
        lcm = lcm * x.denominator // gcd(lcm, x.denominator)
    ints = [int(x * lcm) for x in fracs]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    return tuple(x // g for x in ints)
