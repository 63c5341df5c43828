"""Exact integer and rational linear algebra on small dense matrices.

Everything here works on lists of lists of Python ints (or Fractions for the
rational solvers), so there is no overflow and results are reproducible.  The
matrices coming from cylinder diagrams and origamis are tiny (at most a few
dozen rows), so asymptotics do not matter; determinism of the pivot choices
does, because downstream homology bases are frozen into golden tests.
"""

from fractions import Fraction


def identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(a, b):
    n, k = len(a), len(b)
    m = len(b[0]) if b else 0
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for t in range(k):
            c = ai[t]
            if c:
                bt = b[t]
                for j in range(m):
                    oi[j] += c * bt[j]
    return out


def mat_vec(a, v):
    return [sum(c * x for c, x in zip(row, v)) for row in a]


def transpose(a):
    return [list(col) for col in zip(*a)] if a else []


def smith_normal_form(mat):
    """Return (d, u, v) with u @ mat @ v = d diagonal and u, v unimodular.

    The diagonal is not normalized to a divisibility chain; the callers only
    need the zero pattern and unit entries.  Pivot selection is the smallest
    nonzero absolute value, ties broken by (row, column) order, so the output
    is deterministic.
    """
    a = [list(row) for row in mat]
    n = len(a)
    m = len(a[0]) if a else 0
    u = identity(n)
    v = identity(m)

    def pivot(k):
        best = None
        for i in range(k, n):
            for j in range(k, m):
                if a[i][j] != 0:
                    key = (abs(a[i][j]), i, j)
                    if best is None or key < best[0]:
                        best = (key, i, j)
        return None if best is None else (best[1], best[2])

    k = 0
    while k < min(n, m):
        p = pivot(k)
        if p is None:
            break
        i0, j0 = p
        if i0 != k:
            a[k], a[i0] = a[i0], a[k]
            u[k], u[i0] = u[i0], u[k]
        if j0 != k:
            for row in a:
                row[k], row[j0] = row[j0], row[k]
            for row in v:
                row[k], row[j0] = row[j0], row[k]
        dirty = True
        while dirty:
            dirty = False
            for i in range(k + 1, n):
                if a[i][k]:
                    q = a[i][k] // a[k][k]
                    if q:
                        for j in range(m):
                            a[i][j] -= q * a[k][j]
                        for j in range(n):
                            u[i][j] -= q * u[k][j]
                    if a[i][k]:
                        a[k], a[i] = a[i], a[k]
                        u[k], u[i] = u[i], u[k]
                        dirty = True
            for j in range(k + 1, m):
                if a[k][j]:
                    q = a[k][j] // a[k][k]
                    if q:
                        for i in range(n):
                            a[i][j] -= q * a[i][k]
                        for i in range(m):
                            v[i][j] -= q * v[i][k]
                    if a[k][j]:
                        for i in range(n):
                            a[i][k], a[i][j] = a[i][j], a[i][k]
                        for i in range(m):
                            v[i][k], v[i][j] = v[i][j], v[i][k]
                        dirty = True
        if a[k][k] < 0:
            for j in range(m):
                a[k][j] = -a[k][j]
            for j in range(n):
                u[k][j] = -u[k][j]
        k += 1
    return a, u, v


def kernel_basis(mat):
    """Basis of the integer kernel lattice {x : mat @ x = 0}, saturated."""
    if not mat or not mat[0]:
        m = len(mat[0]) if mat else 0
        return [list(row) for row in identity(m)]
    d, u, v = smith_normal_form(mat)
    m = len(mat[0])
    r = sum(1 for i in range(min(len(d), m)) if d[i][i] != 0)
    cols = []
    for j in range(r, m):
        cols.append([v[i][j] for i in range(m)])
    return cols


def solve_int(mat, rhs):
    """One integer solution of mat @ x = rhs, or None."""
    d, u, v = smith_normal_form(mat)
    n = len(mat)
    m = len(mat[0]) if mat else 0
    b = mat_vec(u, rhs)
    y = [0] * m
    for i in range(n):
        di = d[i][i] if i < min(n, m) else 0
        if i < m and di:
            if b[i] % di != 0:
                return None
            y[i] = b[i] // di
        elif b[i] != 0:
            return None
    return mat_vec(v, y)


def solve_fraction(mat, rhs):
    """One rational solution of mat @ x = rhs, or None if inconsistent."""
    n = len(mat)
    m = len(mat[0]) if mat else 0
    a = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(mat, rhs)]
    piv_cols = []
    r = 0
    for j in range(m):
        p = next((i for i in range(r, n) if a[i][j] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        pv = a[r][j]
        a[r] = [x / pv for x in a[r]]
        for i in range(n):
            if i != r and a[i][j] != 0:
                f = a[i][j]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        piv_cols.append(j)
        r += 1
        if r == n:
            break
    for i in range(r, n):
        if a[i][m] != 0:
            return None
    x = [Fraction(0)] * m
    for i, j in enumerate(piv_cols):
        x[j] = a[i][m]
    return x


def rank(mat):
    """Rank over Q."""
    n = len(mat)
    m = len(mat[0]) if mat else 0
    a = [[Fraction(x) for x in row] for row in mat]
    r = 0
    for j in range(m):
        p = next((i for i in range(r, n) if a[i][j] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        pv = a[r][j]
        for i in range(r + 1, n):
            if a[i][j] != 0:
                f = a[i][j] / pv
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == n:
            break
    return r


def det(mat):
    """Exact determinant of a square integer matrix (fraction-free Gauss)."""
    n = len(mat)
    a = [[Fraction(x) for x in row] for row in mat]
    sign = 1
    d = Fraction(1)
    for j in range(n):
        p = next((i for i in range(j, n) if a[i][j] != 0), None)
        if p is None:
            return 0
        if p != j:
            a[j], a[p] = a[p], a[j]
            sign = -sign
        d *= a[j][j]
        for i in range(j + 1, n):
            if a[i][j] != 0:
                f = a[i][j] / a[j][j]
                a[i] = [x - f * y for x, y in zip(a[i], a[j])]
    d *= sign
    assert d.denominator == 1
    return int(d)


def invert_unimodular(mat):
    """Inverse of an integer matrix with det +-1 (stays integer)."""
    n = len(mat)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(mat)]
    for j in range(n):
        p = next(i for i in range(j, n) if aug[i][j] != 0)
        aug[j], aug[p] = aug[p], aug[j]
        pv = aug[j][j]
        aug[j] = [x / pv for x in aug[j]]
        for i in range(n):
            if i != j and aug[i][j] != 0:
                f = aug[i][j]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[j])]
    out = [[aug[i][n + j] for j in range(n)] for i in range(n)]
    assert all(x.denominator == 1 for row in out for x in row)
    return [[int(x) for x in row] for row in out]


def saturate(columns):
    """Basis of the saturation of the lattice spanned by integer columns."""
    if not columns:
        return []
    n = len(columns[0])
    a = [[col[i] for col in columns] for i in range(n)]
    d, u, v = smith_normal_form(a)
    r = sum(1 for i in range(min(n, len(columns))) if d[i][i] != 0)
    uinv = invert_unimodular(u)
    return [[uinv[i][j] for i in range(n)] for j in range(r)]


def subspace_intersection(a_cols, b_cols):
    """Saturated basis of span(a_cols) intersect span(b_cols) over Q."""
    if not a_cols or not b_cols:
        return []
    n = len(a_cols[0])
    mat = [[col[i] for col in a_cols] + [-col[i] for col in b_cols]
           for i in range(n)]
    ker = kernel_basis(mat)
    vecs = []
    for k in ker:
        vec = [sum(k[j] * a_cols[j][i] for j in range(len(a_cols)))
               for i in range(n)]
        if any(vec):
            vecs.append(vec)
    if not vecs:
        return []
    return saturate(vecs)


def quotient_free_basis(n, relation_columns):
    """Basis data for the quotient Z^n / span(relation_columns).

    Returns (lifted_basis, coord_matrix) where lifted_basis is a list of
    n-vectors mapping to a basis of the quotient's free part and
    coord_matrix @ x gives the coordinates of a vector x in that basis.
    Raises if the quotient has torsion (our surface quotients never do).
    """
    if not relation_columns:
        basis = [list(row) for row in identity(n)]
        return basis, identity(n)
    rel = [[col[i] for col in relation_columns] for i in range(n)]
    d, u, v = smith_normal_form(rel)
    k = len(relation_columns)
    r = sum(1 for i in range(min(n, k)) if d[i][i] != 0)
    for i in range(r):
        if abs(d[i][i]) != 1:
            raise ValueError("quotient has torsion")
    uinv = invert_unimodular(u)
    basis = [[uinv[i][j] for i in range(n)] for j in range(r, n)]
    coords = [u[j] for j in range(r, n)]
    return basis, coords
