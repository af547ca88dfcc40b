"""Sparse exact linear algebra over the rationals.

Vectors are dicts keyed by hashable, mutually comparable coordinates (in
practice: monomial words as tuples of ints).  Matrices are lists of column
vectors; solving and kernel computation run a fraction-based Gauss-Jordan
elimination, fast enough at the desk scale this package targets.
"""

from __future__ import annotations

from fractions import Fraction

Q = Fraction


class _Elim:
    """Incremental Gauss-Jordan elimination of column vectors.

    Invariant: every stored pivot column is normalized and supported only
    on its own pivot row plus non-pivot rows.
    """

    def __init__(self):
        self.pivots = {}  # pivot row -> column dict
        self.combos = {}  # pivot row -> {var: coeff} with col = sum coeff*cols[var]

    def reduce(self, col, combo):
        """Reduce a column; installs a pivot and returns its row, or returns
        None when the column is dependent (combo then holds the dependency)."""
        col = {k: Q(v) for k, v in col.items() if v}
        while col:
            rk = min(k for k in col if k in self.pivots) if any(
                k in self.pivots for k in col
            ) else None
            if rk is None:
                rk = min(col)
                inv = Q(1) / col[rk]
                ncol = {k: v * inv for k, v in col.items()}
                ncombo = {k: v * inv for k, v in combo.items()}
                # back-substitute so older pivots lose their rk entries
                for prow, pcol in self.pivots.items():
                    f = pcol.get(rk)
                    if f:
                        _saxpy(pcol, ncol, -f)
                        _saxpy(self.combos[prow], ncombo, -f)
                self.pivots[rk] = ncol
                self.combos[rk] = ncombo
                return rk
            f = col[rk]
            _saxpy(col, self.pivots[rk], -f)
            _saxpy(combo, self.combos[rk], -f)
        return None

    def express(self, rhs):
        """Write rhs as a combination of the installed columns, or None."""
        col = {k: Q(v) for k, v in rhs.items() if v}
        combo: dict = {}
        for rk in [k for k in list(col) if k in self.pivots]:
            f = col.get(rk)
            if not f:
                continue
            _saxpy(col, self.pivots[rk], -f)
            combo[rk] = combo.get(rk, Q(0)) + f
        if any(v for v in col.values()):
            return None
        out: dict = {}
        for rk, f in combo.items():
            for var, v in self.combos[rk].items():
                nv = out.get(var, Q(0)) + f * v
                if nv:
                    out[var] = nv
                else:
                    out.pop(var, None)
        return out


def _saxpy(dst, src, f):
    for k, v in src.items():
        nv = dst.get(k, Q(0)) + f * v
        if nv:
            dst[k] = nv
        else:
            dst.pop(k, None)


def rank(cols) -> int:
    e = _Elim()
    return sum(1 for i, c in enumerate(cols) if e.reduce(c, {i: Q(1)}) is not None)


def independent_subset(cols):
    """Indices of a maximal linearly independent subset, greedily in order."""
    e = _Elim()
    return [i for i, c in enumerate(cols) if e.reduce(c, {i: Q(1)}) is not None]


def nullspace(cols):
    """Basis of {x : sum_i x_i cols[i] = 0} as lists of Fractions."""
    e = _Elim()
    basis = []
    for i, c in enumerate(cols):
        combo = {i: Q(1)}
        if e.reduce(c, combo) is None:
            vec = [Q(0)] * len(cols)
            for k, v in combo.items():
                vec[k] = v
            basis.append(vec)
    return basis


def solve(cols, rhs):
    """One solution x of sum_i x_i cols[i] = rhs, or None if inconsistent."""
    e = _Elim()
    for i, c in enumerate(cols):
        e.reduce(c, {i: Q(1)})
    combo = e.express(rhs)
    if combo is None:
        return None
    x = [Q(0)] * len(cols)
    for k, v in combo.items():
        x[k] = v
    return x


def solvable(cols, rhs) -> bool:
    return solve(cols, rhs) is not None


def solve_min_support(cols, rhs):
    """Deterministic sparse solution: walk the variables in order, pinning
    each to zero whenever the system stays consistent."""
    if solve(cols, rhs) is None:
        return None
    active = list(range(len(cols)))
    for i in range(len(cols)):
        trial = [j for j in active if j != i]
        if solve([cols[j] for j in trial], rhs) is not None:
            active = trial
    sub = solve([cols[j] for j in active], rhs)
    x = [Q(0)] * len(cols)
    for pos, j in enumerate(active):
        x[j] = sub[pos]
    return x


# -- dense rational matrices (small) ----------------------------------------


def mat_inverse(m):
    """Inverse of a small dense rational matrix (list of rows), or None."""
    n = len(m)
    a = [
        [Q(v) for v in row] + [Q(1) if i == j else Q(0) for j in range(n)]
        for i, row in enumerate(m)
    ]
    r = 0
    for cidx in range(n):
        piv = next((i for i in range(r, n) if a[i][cidx]), None)
        if piv is None:
            return None
        a[r], a[piv] = a[piv], a[r]
        f = a[r][cidx]
        a[r] = [v / f for v in a[r]]
        for i in range(n):
            if i != r and a[i][cidx]:
                g = a[i][cidx]
                a[i] = [vi - g * vr for vi, vr in zip(a[i], a[r])]
        r += 1
    return [row[n:] for row in a]


def mat_rank(m) -> int:
    if not m or not m[0]:
        return 0
    cols = [{i: Q(m[i][j]) for i in range(len(m)) if m[i][j]} for j in range(len(m[0]))]
    return rank(cols)


def mat_nullspace(m):
    """Kernel basis of a dense rational matrix acting on column vectors."""
    if not m or not m[0]:
        return []
    cols = [{i: Q(m[i][j]) for i in range(len(m)) if m[i][j]} for j in range(len(m[0]))]
    return nullspace(cols)
