"""Exact linear algebra over the rationals.

Matrices are lists of rows of Fraction. Everything here is row reduction;
subspaces are carried as lists of vectors and compared through their reduced
row echelon form, which is canonical.
"""
from fractions import Fraction


def _copy(rows):
    return [[Fraction(v) for v in row] for row in rows]


def rref(rows, ncols=None):
    """Reduced row echelon form. Returns (nonzero rows, pivot columns)."""
    m = _copy(rows)
    if not m:
        return [], []
    ncols = len(m[0]) if ncols is None else ncols
    pivots = []
    piv_r = 0
    for piv_c in range(ncols):
        for i_row in range(piv_r, len(m)):
            if m[i_row][piv_c] != 0:
                break
        else:
            continue
        if i_row != piv_r:
            m[piv_r], m[i_row] = m[i_row], m[piv_r]
        fp = m[piv_r][piv_c]
        if fp != 1:
            m[piv_r] = [v / fp for v in m[piv_r]]
        for r in range(len(m)):
            if r == piv_r:
                continue
            fr = m[r][piv_c]
            if fr == 0:
                continue
            m[r] = [a - fr * b for a, b in zip(m[r], m[piv_r])]
        pivots.append(piv_c)
        piv_r += 1
        if piv_r == len(m):
            break
    return m[:piv_r], pivots


def rank(rows):
    if not rows:
        return 0
    return len(rref(rows)[0])


def nullspace(rows, ncols):
    """Basis of {v : rows . v = 0}, one vector per free column."""
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    red, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][f]
        basis.append(v)
    return basis


def row_basis(vectors, dim):
    """Canonical basis (rref rows) of the span of vectors."""
    if not vectors:
        return []
    return rref(vectors, dim)[0]


def same_span(a, b, dim):
    return row_basis(a, dim) == row_basis(b, dim)


def contains(basis, vector, dim):
    if not any(vector):
        return True
    return rank(list(basis) + [list(vector)]) == rank(basis) if basis else False


def intersect(a, b, dim):
    """Basis of span(a) ∩ span(b)."""
    if not a or not b:
        return []
    # c·a - d·b = 0  ->  solutions (c, d); the intersection is spanned by c·a
    cols = [list(v) for v in a] + [[-x for x in v] for v in b]
    system = [[cols[j][i] for j in range(len(cols))] for i in range(dim)]
    sols = nullspace(system, len(cols))
    out = []
    for s in sols:
        out.append([sum((s[j] * a[j][i] for j in range(len(a))), Fraction(0)) for i in range(dim)])
    return row_basis(out, dim)


def matvec(m, v):
    return [sum((a * b for a, b in zip(row, v)), Fraction(0)) for row in m]


def transpose(m):
    return [list(col) for col in zip(*m)] if m else []


def combine(coeffs, vectors, dim):
    out = [Fraction(0)] * dim
    for c, v in zip(coeffs, vectors):
        if c:
            out = [o + c * x for o, x in zip(out, v)]
    return out


def dot(a, b):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def solve(a, b, ncols):
    """One particular solution of a.u = b and the nullspace of a, or (None, kernel)."""
    kernel = nullspace(a, ncols)
    if not a:
        return [Fraction(0)] * ncols, kernel
    aug = [list(row) + [Fraction(rhs)] for row, rhs in zip(a, b)]
    red, pivots = rref(aug, ncols + 1)
    if ncols in pivots:
        return None, kernel
    sol = [Fraction(0)] * ncols
    for r, pc in enumerate(pivots):
        sol[pc] = red[r][ncols]
    return sol, kernel


def min_norm_point(x0, directions, dim):
    """Point of minimal Euclidean norm on x0 + span(directions)."""
    dirs = row_basis(directions, dim)
    if not dirs:
        return list(x0)
    gram = [[dot(u, v) for v in dirs] for u in dirs]
    rhs = [-dot(u, x0) for u in dirs]
    s, _ = solve(gram, rhs, len(dirs))
    return combine([Fraction(1)] + s, [list(x0)] + dirs, dim)
