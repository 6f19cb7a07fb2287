"""Exact integer/rational matrix helpers.

Matrices are tuples of row tuples. Entries are ``int`` or ``Fraction``;
nothing in here touches floating point.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt
from typing import Iterable, Sequence

Matrix = tuple[tuple, ...]


def to_matrix(rows: Iterable[Iterable]) -> Matrix:
    return tuple(tuple(r) for r in rows)


def frac_matrix(rows: Iterable[Iterable]) -> Matrix:
    return tuple(tuple(Fraction(x) for x in r) for r in rows)


def normalize(x):
    """Collapse integral Fractions to ``int``."""
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def normalize_matrix(m: Matrix) -> Matrix:
    return tuple(tuple(normalize(x) for x in r) for r in m)


def identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def zeros(n: int, m: int | None = None) -> Matrix:
    m = n if m is None else m
    return tuple((0,) * m for _ in range(n))


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a)) if a else ()


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def mat_vec(a: Matrix, v: Sequence) -> tuple:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def vec_mat(v: Sequence, a: Matrix) -> tuple:
    n = len(a[0]) if a else 0
    return tuple(sum(v[i] * a[i][j] for i in range(len(v))) for j in range(n))


def bilinear(u: Sequence, gram: Matrix, v: Sequence) -> Fraction | int:
    return sum(u[i] * sum(gram[i][j] * v[j] for j in range(len(v))) for i in range(len(u)))


def congruent(basis: Matrix, gram: Matrix) -> Matrix:
    """``basis · gram · basisᵀ``."""
    return mat_mul(mat_mul(basis, gram), transpose(basis))


def scale(a: Matrix, s) -> Matrix:
    return tuple(tuple(x * s for x in r) for r in a)


def block_diag(*blocks: Matrix) -> Matrix:
    n = sum(len(b) for b in blocks)
    rows = []
    off = 0
    for b in blocks:
        k = len(b)
        for r in b:
            rows.append((0,) * off + tuple(r) + (0,) * (n - off - k))
        off += k
    return tuple(rows)


def is_symmetric(a: Matrix) -> bool:
    return all(a[i][j] == a[j][i] for i in range(len(a)) for j in range(i))


def det(a: Matrix) -> Fraction | int:
    """Determinant by fraction-free elimination (exact)."""
    n = len(a)
    if n == 0:
        return 1
    m = [[Fraction(x) for x in r] for r in a]
    sign = 1
    d = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return 0
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            sign = -sign
        p = m[col][col]
        d *= p
        for r in range(col + 1, n):
            f = m[r][col] / p
            if f:
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return normalize(sign * d)


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    m = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return tuple(tuple(normalize(x) for x in r[n:]) for r in m)


def common_denominator(rows: Iterable[Iterable]) -> int:
    den = 1
    for r in rows:
        for x in r:
            q = Fraction(x).denominator
            den = den * q // gcd(den, q)
    return den


def hnf_rows(rows: Sequence[Sequence[int]]) -> Matrix:
    """Row Hermite normal form of an integer matrix, zero rows dropped.

    The returned rows form a basis of the row lattice.
    """
    m = [list(map(int, r)) for r in rows]
    if not m:
        return ()
    ncol = len(m[0])
    out: list[list[int]] = []
    r0 = 0
    for col in range(ncol):
        # gcd-combine all rows below r0 into r0 on this column
        rows_nz = [i for i in range(r0, len(m)) if m[i][col] != 0]
        if not rows_nz:
            continue
        while True:
            rows_nz = [i for i in range(r0, len(m)) if m[i][col] != 0]
            if len(rows_nz) <= 1:
                break
            piv = min(rows_nz, key=lambda i: abs(m[i][col]))
            for i in rows_nz:
                if i != piv:
                    q = m[i][col] // m[piv][col]
                    m[i] = [x - q * y for x, y in zip(m[i], m[piv])]
        piv = rows_nz[0]
        m[r0], m[piv] = m[piv], m[r0]
        if m[r0][col] < 0:
            m[r0] = [-x for x in m[r0]]
        for i in range(r0):
            q = m[i][col] // m[r0][col]
            if q:
                m[i] = [x - q * y for x, y in zip(m[i], m[r0])]
        r0 += 1
        if r0 == len(m):
            break
    out = [r for r in m[:r0] if any(r)]
    return tuple(tuple(r) for r in out)


def lattice_basis(generators: Sequence[Sequence]) -> Matrix:
    """Basis (rows) of the Z-span of rational row vectors."""
    den = common_denominator(generators)
    ints = [[int(Fraction(x) * den) for x in g] for g in generators]
    h = hnf_rows(ints)
    return tuple(tuple(normalize(Fraction(x, den)) for x in r) for r in h)


def smith_normal_form(a: Sequence[Sequence[int]]) -> tuple[list[int], Matrix, Matrix]:
    """Return ``(diag, U, V)`` with ``U·A·V = diag`` and U, V unimodular.

    Square integer input; diagonal entries are non-negative and each divides
    the next.
    """
    n = len(a)
    m = [list(map(int, r)) for r in a]
    u = [[int(i == j) for j in range(n)] for i in range(n)]
    v = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        m[i], m[j] = m[j], m[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in m:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, q):  # row dst -= q*row src
        m[dst] = [x - q * y for x, y in zip(m[dst], m[src])]
        u[dst] = [x - q * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, q):  # col dst -= q*col src
        for r in m:
            r[dst] -= q * r[src]
        for r in v:
            r[dst] -= q * r[src]

    for t in range(n):
        while True:
            entries = [(abs(m[i][j]), i, j) for i in range(t, n) for j in range(t, n) if m[i][j] != 0]
            if not entries:
                break
            _, i, j = min(entries)
            swap_rows(t, i)
            swap_cols(t, j)
            done = True
            for i in range(t + 1, n):
                q = m[i][t] // m[t][t]
                if q:
                    add_row(i, t, q)
                if m[i][t] != 0:
                    done = False
            for j in range(t + 1, n):
                q = m[t][j] // m[t][t]
                if q:
                    add_col(j, t, q)
                if m[t][j] != 0:
                    done = False
            if not done:
                continue
            # divisibility of the remaining block
            bad = next(((i, j) for i in range(t + 1, n) for j in range(t + 1, n) if m[i][j] % m[t][t]), None)
            if bad is None:
                break
            add_row(t, bad[0], -1)
        if m[t][t] < 0:
            m[t] = [-x for x in m[t]]
            u[t] = [-x for x in u[t]]
    return [m[i][i] for i in range(n)], to_matrix(u), to_matrix(v)


def ldl(gram: Matrix) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Exact LDLᵀ of a positive definite matrix: returns (mu, diag) with
    gram = Σ_i diag[i]·(x_i + Σ_{j>i} mu[i][j] x_j)²."""
    n = len(gram)
    a = [[Fraction(x) for x in r] for r in gram]
    mu = [[Fraction(0)] * n for _ in range(n)]
    dg = [Fraction(0)] * n
    for i in range(n):
        dg[i] = a[i][i]
        if dg[i] <= 0:
            raise ValueError("matrix is not positive definite")
        for j in range(i + 1, n):
            mu[i][j] = a[i][j] / dg[i]
        for j in range(i + 1, n):
            for k in range(j, n):
                a[j][k] -= mu[i][j] * mu[i][k] * dg[i]
                a[k][j] = a[j][k]
    return mu, dg


def _sqrt_ceil(x: Fraction) -> int:
    """Smallest integer s with s*s >= x (x >= 0)."""
    if x <= 0:
        return 0
    s = isqrt(x.numerator // x.denominator)
    while s * s < x:
        s += 1
    return s


def short_vectors(gram: Matrix, bound, include_zero: bool = False) -> list[tuple[tuple[int, ...], Fraction]]:
    """All integer vectors x with xᵀ·gram·x <= bound (Fincke–Pohst, exact).

    ``gram`` may be rational; must be positive definite.
    """
    n = len(gram)
    bound = Fraction(bound)
    if n == 0:
        return [((), Fraction(0))] if include_zero else []
    mu, dg = ldl(gram)
    out: list[tuple[tuple[int, ...], Fraction]] = []
    x = [0] * n

    def rec(i: int, remaining: Fraction):
        c = sum((mu[i][j] * x[j] for j in range(i + 1, n)), Fraction(0))
        r = remaining / dg[i]
        s = _sqrt_ceil(r)
        lo = int(-c - s) - 1
        hi = int(-c + s) + 1
        for xi in range(lo, hi + 1):
            t = (xi + c) ** 2 * dg[i]
            if t > remaining:
                continue
            x[i] = xi
            if i == 0:
                norm = bound - (remaining - t)
                if include_zero or any(x):
                    out.append((tuple(x), norm))
            else:
                rec(i - 1, remaining - t)
        x[i] = 0

    rec(n - 1, bound)
    out.sort(key=lambda p: (p[1], p[0]))
    return out


def lll_reduce(gram: Matrix, delta: Fraction = Fraction(3, 4)) -> tuple[Matrix, Matrix]:
    """Exact LLL on a positive definite Gram matrix.

    Returns ``(T, gram')`` with ``gram' = T·gram·Tᵀ`` and T unimodular.
    """
    n = len(gram)
    b = [[int(i == j) for j in range(n)] for i in range(n)]
    gb = [[Fraction(x) for x in r] for r in gram]  # Gram of the current basis

    def gso():
        bstar_norm = []
        mu = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i):
                mu[i][j] = (gb[i][j] - sum(mu[j][m] * mu[i][m] * bstar_norm[m] for m in range(j))) / bstar_norm[j]
            bstar_norm.append(gb[i][i] - sum(mu[i][m] ** 2 * bstar_norm[m] for m in range(i)))
        return mu, bstar_norm

    def subtract(k, j, q):
        # b_k <- b_k - q b_j, keeping gb and mu current
        b[k] = [x - q * y for x, y in zip(b[k], b[j])]
        kk = gb[k][k] - 2 * q * gb[k][j] + q * q * gb[j][j]
        for i in range(n):
            gb[k][i] -= q * gb[j][i]
        gb[k][k] = kk
        for i in range(n):
            gb[i][k] = gb[k][i]
        for i in range(j):
            mu[k][i] -= q * mu[j][i]
        mu[k][j] -= q

    k = 1
    mu, bn = gso()
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                subtract(k, j, q)
        if bn[k] >= (delta - mu[k][k - 1] ** 2) * bn[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            gb[k], gb[k - 1] = gb[k - 1], gb[k]
            for r in gb:
                r[k], r[k - 1] = r[k - 1], r[k]
            mu, bn = gso()
            k = max(k - 1, 1)
    t = to_matrix(b)
    return t, normalize_matrix(congruent(t, frac_matrix(gram)))
