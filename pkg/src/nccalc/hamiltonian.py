"""Poisson structures, moment maps, splitting and Casimirs.

A moment map for a bivector field Pi is a Lie series mu with
[Pi, mu] = rho, where rho = sum_i [x_i, p_i] is the canonical action
vector field.  The central constructions here: the degree-by-degree
moment solver, the closed 2-form omega built from a moment-map
increment (pair the differentials of a bracket decomposition), the
resulting gauge transport, Weinstein splitting and Casimir kernels.
"""

from __future__ import annotations

from fractions import Fraction

from . import linalg
from .cyclic import CyclicSeries, necklace_basis, pair, project_cyclic
from .geometry import (
    InternalInvariantError,
    LieSpaceContext,
    NondegeneracyReport,
    PoissonStructure,
    SeriesMatrix,
    d_series,
    gauge_transform,
    schouten,
    two_form_matrix,
)
from .nc import NCSeries, dynkin_theta_word, lie_basis, lie_bracket

Q = Fraction


def poisson_residual(ctx: LieSpaceContext, P: PoissonStructure) -> CyclicSeries:
    """[Pi, Pi]; zero iff the structure is Poisson at truncation."""
    return schouten(ctx, P.cyclic, P.cyclic)


def padded_structure(ctx: LieSpaceContext, P: PoissonStructure, pad: int = 1):
    """Rebuild the structure one weight higher from its matrix.

    The mixed action [Pi, mu] lowers necklace weight by one, so output
    weight N is only faithful when Pi is known to weight N+1.  The matrix
    entries at truncation N determine those necklaces exactly.  The letter
    layout is identical for equal n, so words embed verbatim.
    """
    big = LieSpaceContext(ctx.n, ctx.max_weight + pad)
    ent = [
        [NCSeries(big.alphabet, big.max_weight, dict(e.terms)) for e in row]
        for row in P.matrix.entries
    ]
    return big, PoissonStructure(big, matrix=SeriesMatrix(big, ent))


def moment_residual(ctx: LieSpaceContext, P: PoissonStructure, mu: NCSeries) -> NCSeries:
    """[Pi, mu] - rho via the mixed action, faithful to the truncation."""
    if mu.constant_term():
        raise ValueError("moment candidates must be constant-free")
    big, Pb = padded_structure(ctx, P)
    mu_b = NCSeries(big.alphabet, big.max_weight, dict(mu.terms))
    res = schouten(big, Pb.cyclic, mu_b) - big.rho()
    return NCSeries(ctx.alphabet, ctx.max_weight, dict(res.truncate(ctx.max_weight).terms))


class MomentFailure(Exception):
    """No moment map exists; carries the first inconsistent weight."""

    def __init__(self, weight):
        super().__init__("moment equation unsolvable at output weight %d" % weight)
        self.weight = weight


def solve_moment(ctx: LieSpaceContext, P: PoissonStructure) -> NCSeries:
    """Degree-by-degree exact solve of [Pi, mu] = rho.

    The bivector splits by polynomial grade; the lowest grade k0 makes the
    system triangular and each stage determines one weight of mu (up to
    weight N - k0, the range the truncated equation constrains).  Raises
    MomentFailure at the first inconsistent stage.
    """
    big, Pb = padded_structure(ctx, P)
    grades = {}
    for w, comp in Pb.cyclic.weight_split().items():
        grades[w - 2] = comp  # a bivector necklace of weight w has w-2 x letters
    if not grades:
        raise MomentFailure(2)
    k0 = min(grades)
    n_max = ctx.max_weight
    rho = big.rho()
    xl = list(big.x_letters())
    mu_parts: dict[int, NCSeries] = {}

    def bracket_part(k, mu_w):
        return schouten(big, grades[k], mu_w)

    top_max = n_max - k0
    for m in range(k0 + 1, n_max + 1):
        wtop = m - k0
        if wtop > top_max:
            break
        rhs = rho.weight_component(m) if m == 2 else big.zero_nc()
        for k, comp in grades.items():
            if k == k0:
                continue
            w = m - k
            if w in mu_parts:
                rhs = rhs - bracket_part(k, mu_parts[w]).weight_component(m)
        basis = lie_basis(big.alphabet, wtop, big.max_weight, letters=xl)
        cols = [bracket_part(k0, e).weight_component(m).terms for e in basis]
        x = linalg.solve(cols, rhs.terms)
        if x is None:
            raise MomentFailure(m)
        part = big.zero_nc()
        for c, e in zip(x, basis):
            if c:
                part = part + e.scale(c)
        if not part.is_zero():
            mu_parts[wtop] = part
    mu = big.zero_nc()
    for part in mu_parts.values():
        mu = mu + part
    return NCSeries(ctx.alphabet, ctx.max_weight, dict(mu.truncate(ctx.max_weight).terms))


def omega_from_moment(ctx: LieSpaceContext, mu_tilde: NCSeries) -> CyclicSeries:
    """Closed 2-form from a weight >= 2 moment increment.

    Rewrite each weight component through the left-bracketing idempotent,
    mu~ = sum_k [m1_k, m2_k], and output sum_k <d m1_k, d m2_k>.  The
    result is closed and satisfies iota_rho(omega) = -d(mu~).
    """
    if mu_tilde.min_weight() < 2:
        raise ValueError("moment increment must have weight >= 2")
    out = ctx.zero_cyc()
    ww = ctx.alphabet.word_weight
    for w, c in mu_tilde.terms.items():
        k = ww(w)
        m1 = dynkin_theta_word(ctx.alphabet, w[:-1], ctx.max_weight).scale(Q(c, k))
        m2 = ctx.gen_series(w[-1])
        out = out + pair(d_series(ctx, m1), d_series(ctx, m2))
    return out


def poisson_from_moment(ctx: LieSpaceContext, P: PoissonStructure, eta: NCSeries):
    """Gauge P so that its moment map becomes eta.

    Returns (new PoissonStructure, omega).  Preconditions: eta agrees with
    the moment map of P in weight 1 and its weight-2 part is non-degenerate
    on the complement of the constant-pairing kernel.
    """
    mu = solve_moment(ctx, P)
    mu_tilde = eta - mu
    if not mu_tilde.is_zero() and mu_tilde.min_weight() < 2:
        raise ValueError("eta must agree with the moment map below weight 2")
    report = NondegeneracyReport(ctx, P.matrix)
    if not report.quadratic_nondegenerate_mod_kernel(eta.weight_component(2)):
        raise ValueError("weight-2 part of eta is degenerate on the reduced space")
    omega = omega_from_moment(ctx, mu_tilde)
    w = two_form_matrix(ctx, omega)
    newmat = gauge_transform(P.matrix, w)
    return PoissonStructure(ctx, matrix=newmat), omega


def casimir_search(ctx: LieSpaceContext, P: PoissonStructure, max_weight: int):
    """Per-weight exact kernel of f -> [Pi, f] on coordinate functions.

    The function space is the Lie world: pairings of Lie series in the
    coordinates (so there is nothing in weight one, and the associative
    trace powers are outside the search space)."""
    from .geometry import lie_world_basis

    big, Pb = padded_structure(ctx, P)
    out = {}
    for w in range(1, max_weight + 1):
        basis = lie_world_basis(big, w, list(big.x_letters()))
        if not basis:
            out[w] = []
            continue
        cols = [schouten(big, Pb.cyclic, e).truncate(ctx.max_weight).terms for e in basis]
        combos = linalg.nullspace(cols)
        res = []
        for vec in combos:
            acc = ctx.zero_cyc()
            for c, e in zip(vec, basis):
                if c:
                    acc = acc + CyclicSeries(
                        ctx.alphabet, ctx.max_weight, dict(e.scale(c).terms), _canonical=True
                    )
            res.append(acc)
        out[w] = res
    return out


# -- Weinstein splitting ------------------------------------------------------


def _skew_darboux(p0):
    """Symplectic normalization of a rational skew matrix: returns a basis
    change S with (S^T p0 S) = J_k (+) 0, J in 2x2 blocks [[0,1],[-1,0]]."""
    n = len(p0)
    m = [[Q(v) for v in row] for row in p0]
    basis = [[Q(1) if i == j else Q(0) for j in range(n)] for i in range(n)]

    def form(u, v):
        return sum(u[i] * m[i][j] * v[j] for i in range(n) for j in range(n))

    pairs, rest = [], [row[:] for row in basis]
    while True:
        found = None
        for a in range(len(rest)):
            for b in range(len(rest)):
                if form(rest[a], rest[b]):
                    found = (a, b)
                    break
            if found:
                break
        if not found:
            break
        a, b = found
        u = rest[a]
        v = [x / form(rest[a], rest[b]) for x in rest[b]]
        pairs.extend([u, v])
        new_rest = []
        for k, wv in enumerate(rest):
            if k in (a, b):
                continue
            c1, c2 = form(wv, v), form(wv, u)
            nw = [wv[i] - c1 * u[i] + c2 * v[i] for i in range(n)]
            new_rest.append(nw)
        rest = new_rest
    cols = pairs + rest
    # S has the new basis vectors as columns
    return [[cols[j][i] for j in range(n)] for i in range(n)], len(pairs) // 2


def weinstein_split(ctx: LieSpaceContext, P: PoissonStructure):
    """Split off the constant symplectic part.

    Returns (automorphism, split PoissonStructure) where the automorphism
    carries P to a structure of the form (constant 2x2 blocks) + terms in
    the kernel coordinates only.
    """
    from .geometry import CoordinateAutomorphism, matrix_bivector

    n = ctx.n
    s, k = _skew_darboux(P.matrix.constant_part())
    sinv = linalg.mat_inverse(s)
    # the dual slots then transform by S itself, giving S^T P0 S = normal form
    images = []
    for i in range(n):
        im = ctx.zero_nc()
        for j in range(n):
            if sinv[j][i]:
                im = im + ctx.gen_series(ctx.x(j)).scale(sinv[j][i])
        images.append(im)
    lin = CoordinateAutomorphism(ctx, images)
    cur = lin.apply_poisson(P)
    total = lin
    symp_letters = set(range(2 * k))

    def bad_part(cyc):
        bad = cyc.copy_with({})
        const = {}
        ww = ctx.alphabet.word_weight
        for w, c in cyc.terms.items():
            letters = {z % ctx.n if ctx.kind(z) != "t" else -1 for z in w}
            if ww(w) == 2 and all(ctx.kind(z) == "p" for z in w):
                continue  # constant block: allowed
            if letters & symp_letters:
                bad = bad + cyc.copy_with({w: c})
        return bad

    if k:
        pi0 = CyclicSeries(
            ctx.alphabet,
            ctx.max_weight,
            {(ctx.p(2 * j), ctx.p(2 * j + 1)): Q(1) for j in range(k)},
        )
        for wt in range(1, ctx.max_weight + 1):
            bad = bad_part(cur.cyclic)
            if bad.is_zero():
                break
            wmin = min(ctx.alphabet.word_weight(w) for w in bad.terms) - 2
            target = bad.copy_with(
                {
                    w: c
                    for w, c in bad.terms.items()
                    if ctx.alphabet.word_weight(w) - 2 == wmin
                }
            )
            # solve [pi0, X] = -target for a vector field X of x-degree wmin+1
            from .geometry import lie_world_basis

            basis = lie_world_basis(
                ctx,
                wmin + 2,
                list(ctx.x_letters()) + list(ctx.p_letters()),
                slot_letters=ctx.p_letters(),
                slot_count=1,
            )
            cols = [schouten(ctx, pi0, e).terms for e in basis]
            sol = linalg.solve(cols, (-target).terms)
            if sol is None:
                raise InternalInvariantError("splitting obstruction: homotopy failed")
            xfield = ctx.zero_cyc()
            for c, e in zip(sol, basis):
                if c:
                    xfield = xfield + e.scale(c)
            # gauge by the exponential of the vector field's coordinate flow
            images = []
            for i in range(n):
                xi = ctx.gen_series(ctx.x(i))
                term = xi
                acc = xi
                kfac = 1
                for step in range(1, ctx.max_weight + 1):
                    term = schouten(ctx, xfield, term)
                    if term.is_zero():
                        break
                    kfac *= step
                    acc = acc + term.scale(Q(1, kfac))
                images.append(acc)
            flow = CoordinateAutomorphism(ctx, images)
            cur = flow.apply_poisson(cur)
            total = CoordinateAutomorphism(
                ctx, [flow.apply_series(im) for im in total.x_images]
            )
    if k and not bad_part(cur.cyclic).is_zero():
        raise InternalInvariantError("splitting did not converge")
    return total, cur
