"""Numeric oracle: evaluate universal objects on concrete quadratic Lie
algebras and cross-check symbolic identities in floating point.

Evaluation uses the trace form <a,b> = tr(ab) (proportional to the
Killing form on the special linear algebras, so nonvanishing statements
transfer).  This is the only module that touches floating point; all
tolerances are relative at 1e-9 unless stated otherwise, with seeds fixed
by the caller.
"""

from __future__ import annotations

import numpy as np

from .cyclic import CyclicSeries
from .geometry import LieSpaceContext, SeriesMatrix
from .nc import NCSeries


class MatrixLieContext:
    """Concrete quadratic Lie algebra: basis, structure constants, form."""

    def __init__(self, name: str, basis):
        self.name = name
        self.basis = np.array(basis, dtype=float)
        self.dim = len(basis)
        self.size = self.basis.shape[1]
        # trace form and inverse
        self.form = np.einsum("aij,bji->ab", self.basis, self.basis)
        self.form_inv = np.linalg.inv(self.form)
        self.condition = float(np.linalg.cond(self.form))
        # structure constants via least squares on the flattened basis
        flat = self.basis.reshape(self.dim, -1).T
        self.structure = np.zeros((self.dim, self.dim, self.dim))
        for a in range(self.dim):
            for b in range(self.dim):
                comm = self.basis[a] @ self.basis[b] - self.basis[b] @ self.basis[a]
                coef, *_ = np.linalg.lstsq(flat, comm.reshape(-1), rcond=None)
                self.structure[a, b] = coef
        self._check_invariance()

    def _check_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(4):
            a, b, c = (self.random_element(rng) for _ in range(3))
            lhs = np.trace((a @ b - b @ a) @ c)
            rhs = np.trace(a @ (b @ c - c @ b))
            if abs(lhs - rhs) > 1e-12 * max(1.0, abs(lhs), abs(rhs)):
                raise ValueError("trace form is not invariant")

    def random_element(self, rng, scale=1.0):
        coef = rng.standard_normal(self.dim) * scale
        return np.einsum("a,aij->ij", coef, self.basis)

    def pairing(self, a, b) -> float:
        return float(np.trace(a @ b))


def _sl_basis(n):
    basis = []
    for i in range(n):
        for j in range(n):
            if i != j:
                e = np.zeros((n, n))
                e[i, j] = 1.0
                basis.append(e)
    for k in range(n - 1):
        e = np.zeros((n, n))
        e[k, k] = 1.0
        e[k + 1, k + 1] = -1.0
        basis.append(e)
    return basis


def _gl_basis(n):
    basis = []
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n))
            e[i, j] = 1.0
            basis.append(e)
    return basis


_PRESETS = {
    "sl2": lambda: MatrixLieContext("sl2", _sl_basis(2)),
    "sl3": lambda: MatrixLieContext("sl3", _sl_basis(3)),
    "sl4": lambda: MatrixLieContext("sl4", _sl_basis(4)),
    "gl2": lambda: MatrixLieContext("gl2", _gl_basis(2)),
    "gl3": lambda: MatrixLieContext("gl3", _gl_basis(3)),
}
_CACHE: dict = {}


def preset(name: str) -> MatrixLieContext:
    if name not in _PRESETS:
        raise KeyError("unknown context %r (have %s)" % (name, sorted(_PRESETS)))
    if name not in _CACHE:
        _CACHE[name] = _PRESETS[name]()
    return _CACHE[name]


def random_point(mctx: MatrixLieContext, n: int, rng, scale=1.0):
    return [mctx.random_element(rng, scale) for _ in range(n)]


def eval_lie(ctx: LieSpaceContext, mctx: MatrixLieContext, s: NCSeries, point):
    """Evaluate a coordinate series at matrices: words become products."""
    size = mctx.size
    out = np.zeros((size, size))
    for w, c in s.terms.items():
        m = np.eye(size)
        for z in w:
            if ctx.kind(z) != "x":
                raise ValueError("series must involve only the coordinates")
            m = m @ point[z]
        out = out + float(c) * m
    return out


def eval_function(ctx: LieSpaceContext, mctx: MatrixLieContext, f: CyclicSeries, point) -> float:
    """Necklaces evaluate to traces of matrix words (rotation invariant)."""
    total = 0.0
    size = mctx.size
    for w, c in f.terms.items():
        m = np.eye(size)
        for z in w:
            if ctx.kind(z) != "x":
                raise ValueError("function must involve only the coordinates")
            m = m @ point[z]
        total += float(c) * float(np.trace(m))
    return total


def eval_form(ctx: LieSpaceContext, mctx: MatrixLieContext, f: CyclicSeries, point, tangents) -> float:
    """Evaluate a k-form on k tangent tuples: dx slots antisymmetrize over
    the arguments in occurrence order with permutation signs."""
    from itertools import permutations

    total = 0.0
    size = mctx.size
    k = len(tangents)
    for w, c in f.terms.items():
        slots = [i for i, z in enumerate(w) if ctx.kind(z) == "dx"]
        if len(slots) != k:
            raise ValueError("form degree does not match the argument count")
        for perm in permutations(range(k)):
            sign = 1
            seen = list(perm)
            for i in range(len(seen)):
                for j in range(i + 1, len(seen)):
                    if seen[i] > seen[j]:
                        sign = -sign
            m = np.eye(size)
            it = 0
            for z in w:
                if ctx.kind(z) == "x":
                    m = m @ point[z]
                elif ctx.kind(z) == "dx":
                    m = m @ tangents[perm[it]][z - ctx.n]
                    it += 1
                else:
                    raise ValueError("unexpected letter in a form")
            total += sign * float(c) * float(np.trace(m))
    return total


def eval_series_directional(ctx: LieSpaceContext, mctx: MatrixLieContext, f: CyclicSeries, point, direction) -> float:
    """Exact directional derivative of the evaluation of a function:
    sum over coordinate occurrences replaced by the direction entry."""
    total = 0.0
    size = mctx.size
    for w, c in f.terms.items():
        for pos, z in enumerate(w):
            if ctx.kind(z) != "x":
                raise ValueError("function must involve only the coordinates")
            m = np.eye(size)
            for q, zz in enumerate(w):
                m = m @ (direction[zz] if q == pos else point[zz])
            total += float(c) * float(np.trace(m))
    return total


def _ad_operator(ctx, mctx, entry: NCSeries, point):
    """The enveloping-algebra entry as an operator via iterated brackets."""

    def op(v):
        size = mctx.size
        out = np.zeros((size, size))
        for w, c in entry.terms.items():
            m = v
            for z in reversed(w):
                a = point[z]
                m = a @ m - m @ a
            out = out + float(c) * m
        return out

    return op


def eval_bracket(ctx: LieSpaceContext, mctx: MatrixLieContext, P: SeriesMatrix, f: CyclicSeries, g: CyclicSeries, point) -> float:
    """Induced bracket {f,g} at a point, computed by contracting the
    coordinate gradients through the matrix entries:
    {f,g} = sum_ij < grad_i f, Ad_{P_ij} grad_j g >."""
    n = ctx.n
    gf = [eval_lie(ctx, mctx, f.cyclic_derivative(ctx.x(i)), point) for i in range(n)]
    gg = [eval_lie(ctx, mctx, g.cyclic_derivative(ctx.x(j)), point) for j in range(n)]
    total = 0.0
    for i in range(n):
        for j in range(n):
            entry = P.entries[i][j]
            if entry.is_zero():
                continue
            op = _ad_operator(ctx, mctx, entry, point)
            total += mctx.pairing(gf[i], op(gg[j]))
    return total


def faithfulness_probe(ctx: LieSpaceContext, obj, n_max: int = 4, seed: int = 0, samples: int = 12, threshold: float = 1e-6):
    """Smallest special-linear rank whose random evaluations detect the
    object, or None when the sweep is exhausted (not a proof of zero)."""
    if (isinstance(obj, (NCSeries, CyclicSeries)) and obj.is_zero()) or obj is None:
        raise ValueError("probe needs a symbolically nonzero object")
    rng = np.random.default_rng(seed)
    for nn in range(2, n_max + 1):
        mctx = preset("sl%d" % nn) if ("sl%d" % nn) in _PRESETS else MatrixLieContext(
            "sl%d" % nn, _sl_basis(nn)
        )
        for _ in range(samples):
            point = random_point(mctx, ctx.n, rng, scale=0.8)
            if isinstance(obj, NCSeries):
                val = float(np.abs(eval_lie(ctx, mctx, obj, point)).max())
            else:
                k = obj.max_letter_count(ctx.dx_letters())
                if k == 0:
                    val = abs(eval_function(ctx, mctx, obj, point))
                else:
                    tangents = [random_point(mctx, ctx.n, rng, scale=0.8) for _ in range(k)]
                    val = abs(eval_form(ctx, mctx, obj, point, tangents))
            if val > threshold:
                return nn
    return None
