"""Differential-geometric calculus on free Lie coordinate spaces.

The master alphabet on n even coordinates x_1..x_n carries three derived
letter families: the odd differentials dx_i (forms), the odd duals p_i
(polyvector slots) and one even separator t used for contraction
bookkeeping.  Forms are necklace series with no p/t letters, polyvector
fields have no dx/t letters.

Sign conventions (fixed once; the calibration tests pin them):

* the odd bracket on polyvectors acts through right cyclic derivatives,
    [A, x_i] = dR A / d p_i,      [A, p_i] = - dR A / d x_i,
  extended as a derivation of parity |A|+1,
* 2-forms and bivectors are identified with skew-adjoint matrices by the
  contraction map (no extra factor); the inverse map carries 1/2,
* the musical substitution sends dx_i to [Pi, x_i],
* gauge transformation of bivector matrices: P -> (1 - P W)^{-1} P.
"""

from __future__ import annotations

from fractions import Fraction

from . import linalg
from .cyclic import CyclicSeries, apply_derivation, apply_hom, necklace_basis, pair, project_cyclic
from .nc import Alphabet, Generator, NCSeries, ad_apply, der_apply, dynkin_project, hom_apply, lie_bracket

Q = Fraction


class InternalInvariantError(RuntimeError):
    """A structural invariant failed; signals a bug, not a user error."""


class LieSpaceContext:
    """n even coordinates with their form/polyvector letters at truncation N."""

    def __init__(self, n: int, max_weight: int):
        if n < 1:
            raise ValueError("need at least one coordinate")
        self.n = n
        self.max_weight = max_weight
        gens = (
            [Generator("x%d" % (i + 1), 0) for i in range(n)]
            + [Generator("dx%d" % (i + 1), 1) for i in range(n)]
            + [Generator("p%d" % (i + 1), 1) for i in range(n)]
            + [Generator("t", 0)]
        )
        self.alphabet = Alphabet(gens)
        self._gens = [NCSeries.gen(self.alphabet, i, max_weight) for i in range(len(gens))]

    # index layout: x_i = i, dx_i = n+i, p_i = 2n+i, t = 3n
    def x(self, i: int) -> int:
        return i

    def dx(self, i: int) -> int:
        return self.n + i

    def p(self, i: int) -> int:
        return 2 * self.n + i

    @property
    def t(self) -> int:
        return 3 * self.n

    def kind(self, idx: int) -> str:
        if idx < self.n:
            return "x"
        if idx < 2 * self.n:
            return "dx"
        if idx < 3 * self.n:
            return "p"
        return "t"

    def gen_series(self, idx: int) -> NCSeries:
        return self._gens[idx]

    def zero_nc(self) -> NCSeries:
        return NCSeries.zero(self.alphabet, self.max_weight)

    def zero_cyc(self) -> CyclicSeries:
        return CyclicSeries.zero(self.alphabet, self.max_weight)

    def x_letters(self):
        return range(self.n)

    def dx_letters(self):
        return range(self.n, 2 * self.n)

    def p_letters(self):
        return range(2 * self.n, 3 * self.n)

    def rho(self) -> NCSeries:
        """Canonical action vector field sum_i [x_i, p_i]."""
        out = self.zero_nc()
        for i in range(self.n):
            out = out + lie_bracket(self.gen_series(self.x(i)), self.gen_series(self.p(i)))
        return out

    # -- degree bookkeeping -------------------------------------------------
    def form_degree(self, f: CyclicSeries) -> int:
        degs = set(f.letter_count(self.dx_letters()).keys())
        if len(degs) > 1:
            raise ValueError("form degree is not homogeneous")
        return degs.pop() if degs else 0

    def poly_degree(self, f: CyclicSeries) -> int:
        degs = set(f.letter_count(self.p_letters()).keys())
        if len(degs) > 1:
            raise ValueError("polyvector degree is not homogeneous")
        return degs.pop() if degs else 0

    def check_form(self, f: CyclicSeries):
        bad = f.support_letters() & (set(self.p_letters()) | {self.t})
        if bad:
            raise ValueError("not a form: contains dual/separator letters")

    def check_poly(self, f: CyclicSeries):
        bad = f.support_letters() & (set(self.dx_letters()) | {self.t})
        if bad:
            raise ValueError("not a polyvector field: contains dx/t letters")


_LIE_WORLD_CACHE: dict = {}


def lie_world_basis(ctx: LieSpaceContext, weight: int, letters, slot_letters=None, slot_count=None):
    """Basis of the weight-w functions spanned by pairings of Lie elements.

    The function space is the span of <a, b> with a, b in the free Lie
    algebra on the given letters; this is strictly smaller than the span
    of all necklaces (which realizes the associative-world functions).
    Optionally restrict to pairings with a prescribed number of letters
    from slot_letters (form or polyvector degree).
    """
    from .nc import lie_basis

    letters = tuple(letters)
    key = (ctx.alphabet, ctx.max_weight, weight, letters, tuple(slot_letters or ()), slot_count)
    got = _LIE_WORLD_CACHE.get(key)
    if got is not None:
        return got
    sset = set(slot_letters) if slot_letters is not None else None

    def slots_of(series):
        # theta-built basis elements are homogeneous in the letter multiset
        w = next(iter(series.terms))
        return sum(1 for z in w if z in sset)

    cands = []
    for w1 in range(1, weight):
        w2 = weight - w1
        if w2 < w1:
            break
        for e in lie_basis(ctx.alphabet, w1, ctx.max_weight, letters=letters):
            se = slots_of(e) if sset is not None else 0
            for f in lie_basis(ctx.alphabet, w2, ctx.max_weight, letters=letters):
                if sset is not None and slot_count is not None:
                    if se + slots_of(f) != slot_count:
                        continue
                c = pair(e, f)
                if not c.is_zero():
                    cands.append(c)
    keep = linalg.independent_subset([c.terms for c in cands])
    basis = [cands[i] for i in keep]
    _LIE_WORLD_CACHE[key] = basis
    return basis


# -- Schouten bracket --------------------------------------------------------


def schouten_images(ctx: LieSpaceContext, comp: CyclicSeries, parity: int):
    """Derivation images of the odd bracket with a parity-homogeneous
    polyvector component."""
    images = {}
    for i in range(ctx.n):
        dz = comp.right_cyclic_derivative(ctx.p(i))
        if not dz.is_zero():
            images[ctx.x(i)] = dz
        dp = comp.right_cyclic_derivative(ctx.x(i))
        if not dp.is_zero():
            images[ctx.p(i)] = -dp
    return images, (parity + 1) & 1


def schouten(ctx: LieSpaceContext, a: CyclicSeries, b):
    """Odd graded Lie bracket on polyvector functions; with an NCSeries as
    second argument this is the mixed action on the coordinate algebra."""
    if isinstance(b, CyclicSeries):
        out = ctx.zero_cyc()
    else:
        out = ctx.zero_nc()
    for par, comp in a.parity_components():
        images, dpar = schouten_images(ctx, comp, par)
        if not images:
            continue
        if isinstance(b, CyclicSeries):
            out = out + apply_derivation(b, images, dpar)
        else:
            out = out + der_apply(images, dpar, b)
    return out


def poisson_bracket(ctx: LieSpaceContext, biv: CyclicSeries, f, g):
    """{f,g} = [f, [biv, g]]; g may be a function or a coordinate series."""
    return schouten(ctx, f, schouten(ctx, biv, g))


# -- de Rham complex ---------------------------------------------------------


def de_rham(ctx: LieSpaceContext, f: CyclicSeries) -> CyclicSeries:
    ctx.check_form(f)
    images = {ctx.x(i): ctx.gen_series(ctx.dx(i)) for i in range(ctx.n)}
    return apply_derivation(f, images, 1)


def d_series(ctx: LieSpaceContext, s: NCSeries) -> NCSeries:
    """The derivation x_i -> dx_i on coordinate series (no projection)."""
    images = {ctx.x(i): ctx.gen_series(ctx.dx(i)) for i in range(ctx.n)}
    return der_apply(images, 1, s)


def lie_derivative(ctx: LieSpaceContext, vf: CyclicSeries, f: CyclicSeries) -> CyclicSeries:
    """Action of a degree-1 polyvector field on forms via the tangent lift
    of its coordinate derivation."""
    if ctx.poly_degree(vf) != 1:
        raise ValueError("Lie derivative needs a degree-1 polyvector field")
    images = {}
    for i in range(ctx.n):
        xi = schouten(ctx, vf, ctx.gen_series(ctx.x(i)))
        images[ctx.x(i)] = xi
        images[ctx.dx(i)] = d_series(ctx, xi)
    return apply_derivation(f, images, 0)


# -- contractions ------------------------------------------------------------


def iota_coordinate(ctx: LieSpaceContext, i: int, omega: CyclicSeries) -> NCSeries:
    """Contraction with the i-th coordinate dual: replace dx_i by t as an
    odd derivation, then strip the separator."""
    phi = apply_derivation(omega, {ctx.dx(i): ctx.gen_series(ctx.t)}, 1)
    return phi.cyclic_derivative(ctx.t)


def iota_rho_t(ctx: LieSpaceContext, omega) -> CyclicSeries | NCSeries:
    """Contraction with the canonical action field, separator version:
    the odd derivation dx_i -> [x_i, t]."""
    images = {
        ctx.dx(i): lie_bracket(ctx.gen_series(ctx.x(i)), ctx.gen_series(ctx.t))
        for i in range(ctx.n)
    }
    if isinstance(omega, CyclicSeries):
        return apply_derivation(omega, images, 1)
    return der_apply(images, 1, omega)


def iota_rho(ctx: LieSpaceContext, omega: CyclicSeries) -> NCSeries:
    """Separator-free contraction: iota_rho_t(omega) = <t, iota_rho(omega)>.

    The separator insertion passes through weight N+1 before the strip
    returns to weight N, so the computation runs one weight higher.
    """
    big = LieSpaceContext(ctx.n, ctx.max_weight + 1)
    om_b = CyclicSeries(big.alphabet, big.max_weight, dict(omega.terms), _canonical=True)
    out = iota_rho_t(big, om_b).cyclic_derivative(big.t)
    return NCSeries(ctx.alphabet, ctx.max_weight, dict(out.truncate(ctx.max_weight).terms))


def bracket_with_t(ctx: LieSpaceContext, alpha: CyclicSeries) -> CyclicSeries:
    """[alpha, t] = <t, sum_i [dalpha/dx_i, x_i]> for an x-only function."""
    ctx.check_form(alpha)
    if ctx.form_degree(alpha) != 0:
        raise ValueError("defined on functions of the coordinates only")
    acc = ctx.zero_nc()
    for i in range(ctx.n):
        di = alpha.cyclic_derivative(ctx.x(i))
        acc = acc + lie_bracket(di, ctx.gen_series(ctx.x(i)))
    return pair(ctx.gen_series(ctx.t), acc)


# -- forms/bivectors as matrices ---------------------------------------------


def one_form_components(ctx: LieSpaceContext, alpha: CyclicSeries):
    """<dx_i, a_i> -> (a_1..a_n); exact inverse of components_one_form."""
    ctx.check_form(alpha)
    if not alpha.is_zero() and ctx.form_degree(alpha) != 1:
        raise ValueError("needs a 1-form")
    return tuple(alpha.cyclic_derivative(ctx.dx(i)) for i in range(ctx.n))


def components_one_form(ctx: LieSpaceContext, comps) -> CyclicSeries:
    out = ctx.zero_cyc()
    for i, a in enumerate(comps):
        out = out + pair(ctx.gen_series(ctx.dx(i)), a)
    return out


def _strip_decompose(ctx: LieSpaceContext, xi: NCSeries, letters):
    """Write a degree-1 element as sum_j Ad_{b_j}(slot_j) by collecting the
    words that end with a slot letter; verifies the decomposition."""
    letters = list(letters)
    lset = set(letters)
    entries = {j: {} for j in letters}
    for w, c in xi.terms.items():
        inner = [z for z in w if z in lset]
        if len(inner) != 1:
            raise InternalInvariantError("not a degree-1 element in the slot letters")
        if w and w[-1] in lset:
            entries[w[-1]][w[:-1]] = entries[w[-1]].get(w[:-1], Q(0)) + c
    out = {j: NCSeries(ctx.alphabet, ctx.max_weight, t) for j, t in entries.items()}
    recon = ctx.zero_nc()
    for j in letters:
        recon = recon + ad_apply(out[j], ctx.gen_series(j))
    if recon != xi:
        raise InternalInvariantError("strip decomposition failed to reconstruct")
    return out


def two_form_matrix(ctx: LieSpaceContext, omega: CyclicSeries) -> "SeriesMatrix":
    """Skew-adjoint matrix of a 2-form via coordinate contractions."""
    ctx.check_form(omega)
    if not omega.is_zero() and ctx.form_degree(omega) != 2:
        raise ValueError("needs a 2-form")
    rows = []
    for i in range(ctx.n):
        xi = iota_coordinate(ctx, i, omega)
        dec = _strip_decompose(ctx, xi, ctx.dx_letters())
        rows.append([dec[ctx.dx(j)] for j in range(ctx.n)])
    m = SeriesMatrix(ctx, rows)
    if not m.is_skew():
        raise InternalInvariantError("2-form matrix is not skew-adjoint")
    return m


def matrix_two_form(ctx: LieSpaceContext, m: "SeriesMatrix") -> CyclicSeries:
    out = ctx.zero_cyc()
    for i in range(ctx.n):
        for j in range(ctx.n):
            e = m.entries[i][j]
            if not e.is_zero():
                out = out + pair(
                    ctx.gen_series(ctx.dx(i)), ad_apply(e, ctx.gen_series(ctx.dx(j)))
                )
    return out.scale(Q(1, 2))


def bivector_matrix(ctx: LieSpaceContext, biv: CyclicSeries) -> "SeriesMatrix":
    """Skew-adjoint matrix of a bivector field (dual-slot contractions)."""
    ctx.check_poly(biv)
    if not biv.is_zero() and ctx.poly_degree(biv) != 2:
        raise ValueError("needs a bivector field")
    rows = []
    for i in range(ctx.n):
        phi = apply_derivation(biv, {ctx.p(i): ctx.gen_series(ctx.t)}, 1)
        xi = phi.cyclic_derivative(ctx.t)
        dec = _strip_decompose(ctx, xi, ctx.p_letters())
        rows.append([dec[ctx.p(j)] for j in range(ctx.n)])
    m = SeriesMatrix(ctx, rows)
    if not m.is_skew():
        raise InternalInvariantError("bivector matrix is not skew-adjoint")
    return m


def matrix_bivector(ctx: LieSpaceContext, m: "SeriesMatrix") -> CyclicSeries:
    out = ctx.zero_cyc()
    for i in range(ctx.n):
        for j in range(ctx.n):
            e = m.entries[i][j]
            if not e.is_zero():
                out = out + pair(ctx.gen_series(ctx.p(i)), ad_apply(e, ctx.gen_series(ctx.p(j))))
    return out.scale(Q(1, 2))


# -- matrices of series ------------------------------------------------------


class SeriesMatrix:
    """Square matrix of coordinate-only series over the master alphabet."""

    def __init__(self, ctx: LieSpaceContext, entries):
        self.ctx = ctx
        self.entries = [list(row) for row in entries]
        n = ctx.n
        if len(self.entries) != n or any(len(r) != n for r in self.entries):
            raise ValueError("matrix must be n x n")
        xl = set(ctx.x_letters())
        for row in self.entries:
            for e in row:
                if e.support_letters() - xl:
                    raise ValueError("matrix entries must be series in the coordinates")

    @staticmethod
    def identity(ctx: LieSpaceContext) -> "SeriesMatrix":
        one = NCSeries.unit(ctx.alphabet, ctx.max_weight)
        zero = ctx.zero_nc()
        return SeriesMatrix(
            ctx, [[one if i == j else zero for j in range(ctx.n)] for i in range(ctx.n)]
        )

    @staticmethod
    def zero(ctx: LieSpaceContext) -> "SeriesMatrix":
        z = ctx.zero_nc()
        return SeriesMatrix(ctx, [[z for _ in range(ctx.n)] for _ in range(ctx.n)])

    def __add__(self, other):
        return SeriesMatrix(
            self.ctx,
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)],
        )

    def __sub__(self, other):
        return SeriesMatrix(
            self.ctx,
            [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)],
        )

    def __neg__(self):
        return SeriesMatrix(self.ctx, [[-a for a in row] for row in self.entries])

    def scale(self, c):
        return SeriesMatrix(self.ctx, [[a.scale(c) for a in row] for row in self.entries])

    def __matmul__(self, other):
        n = self.ctx.n
        z = self.ctx.zero_nc()
        out = [[z for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for j in range(n):
                acc = z
                for k in range(n):
                    a, b = self.entries[i][k], other.entries[k][j]
                    if not a.is_zero() and not b.is_zero():
                        acc = acc + a * b
                out[i][j] = acc
        return SeriesMatrix(self.ctx, out)

    def __eq__(self, other):
        return isinstance(other, SeriesMatrix) and self.entries == other.entries

    def is_skew(self) -> bool:
        n = self.ctx.n
        for i in range(n):
            for j in range(n):
                if not (self.entries[i][j] + self.entries[j][i].antipode()).is_zero():
                    return False
        return True

    def constant_part(self):
        return [[e.constant_term() for e in row] for row in self.entries]

    def map_entries(self, fn) -> "SeriesMatrix":
        return SeriesMatrix(self.ctx, [[fn(e) for e in row] for row in self.entries])

    def neumann_inverse(self) -> "SeriesMatrix":
        """Exact inverse when the constant part is invertible over Q: split
        A = A0 + A+, invert A0, expand the weight-nilpotent remainder."""
        ctx = self.ctx
        a0 = self.constant_part()
        a0inv = linalg.mat_inverse(a0)
        if a0inv is None:
            raise ValueError("matrix has singular constant part")
        unit = NCSeries.unit(ctx.alphabet, ctx.max_weight)
        a0inv_m = SeriesMatrix(ctx, [[unit.scale(v) for v in row] for row in a0inv])
        aplus = self - SeriesMatrix(
            ctx, [[unit.scale(v) for v in row] for row in a0]
        )
        k = a0inv_m @ aplus  # strictly positive minimum weight
        acc = SeriesMatrix.identity(ctx)
        term = SeriesMatrix.identity(ctx)
        for _ in range(ctx.max_weight):
            term = (term @ k).scale(-1)
            if all(e.is_zero() for row in term.entries for e in row):
                break
            acc = acc + term
        return acc @ a0inv_m


def gauge_transform(P: SeriesMatrix, W: SeriesMatrix) -> SeriesMatrix:
    """New bivector matrix (1 - P W)^{-1} P for a closed-2-form matrix W."""
    ctx = P.ctx
    m = SeriesMatrix.identity(ctx) - (P @ W)
    out = m.neumann_inverse() @ P
    if not out.is_skew():
        raise InternalInvariantError("gauge transform broke skew-adjointness")
    return out


def sigma_to_omega(P: SeriesMatrix, S: SeriesMatrix) -> SeriesMatrix:
    """Solve P - P S P = (1 - P W)^{-1} P for W: W = S (1 - P S)^{-1}."""
    ctx = P.ctx
    m = SeriesMatrix.identity(ctx) - (P @ S)
    return S @ m.neumann_inverse()


def omega_to_sigma(P: SeriesMatrix, W: SeriesMatrix) -> SeriesMatrix:
    ctx = P.ctx
    m = SeriesMatrix.identity(ctx) + (W @ P)
    return m.neumann_inverse() @ W


# -- Poisson structures ------------------------------------------------------


class PoissonStructure:
    """A bivector field with its matrix and cached musical data."""

    def __init__(self, ctx: LieSpaceContext, cyclic: CyclicSeries = None, matrix: SeriesMatrix = None):
        if cyclic is None and matrix is None:
            raise ValueError("need a cyclic series or a matrix")
        self.ctx = ctx
        self._cyc = cyclic
        self._mat = matrix
        self._musical = None
        self._sharp_cols = {}

    @property
    def cyclic(self) -> CyclicSeries:
        if self._cyc is None:
            self._cyc = matrix_bivector(self.ctx, self._mat)
        return self._cyc

    @property
    def matrix(self) -> SeriesMatrix:
        if self._mat is None:
            self._mat = bivector_matrix(self.ctx, self.cyclic)
        return self._mat

    def musical_images(self):
        """dx_i -> [Pi, x_i], the substitution defining the sharp map."""
        if self._musical is None:
            ctx = self.ctx
            self._musical = {
                ctx.dx(i): schouten(ctx, self.cyclic, ctx.gen_series(ctx.x(i)))
                for i in range(ctx.n)
            }
        return self._musical

    def sharp(self, f):
        """Forms to polyvector fields: substitute dx_i -> [Pi, x_i]."""
        ctx = self.ctx
        if isinstance(f, CyclicSeries):
            return apply_hom(f, self.musical_images())
        return hom_apply(self.musical_images(), f)

    def sharp_preimage(self, target: CyclicSeries, form_degree: int) -> CyclicSeries:
        """Solve sharp(gamma) = target for a form of the given degree.

        The solve runs over the Lie-world form basis (pairings of Lie
        elements), where the musical map is injective in degree >= 2, and
        globally over weights since the substitution may shift them.
        """
        ctx = self.ctx
        cached = self._sharp_cols.get(form_degree)
        if cached is None:
            basis = []
            letters = list(ctx.x_letters()) + list(ctx.dx_letters())
            for w in range(form_degree, ctx.max_weight + 1):
                basis.extend(
                    lie_world_basis(
                        ctx, w, letters, slot_letters=ctx.dx_letters(), slot_count=form_degree
                    )
                )
            cols = [self.sharp(e).terms for e in basis]
            cached = (basis, cols)
            self._sharp_cols[form_degree] = cached
        basis, cols = cached
        x = linalg.solve(cols, target.terms)
        if x is None:
            raise InternalInvariantError("no preimage under the musical map")
        out = ctx.zero_cyc()
        for c, e in zip(x, basis):
            if c:
                out = out + e.scale(c)
        return out


def kks_structure(ctx: LieSpaceContext) -> PoissonStructure:
    """Linear structure (1/2) sum_i <x_i, [p_i, p_i]> on n coordinates."""
    terms = {(ctx.x(i), ctx.p(i), ctx.p(i)): Q(1) for i in range(ctx.n)}
    return PoissonStructure(ctx, cyclic=CyclicSeries(ctx.alphabet, ctx.max_weight, terms))


def symplectic_structure(ctx: LieSpaceContext) -> PoissonStructure:
    """Constant structure sum_k <p_{2k-1}, p_{2k}> (n must be even)."""
    if ctx.n % 2:
        raise ValueError("constant symplectic structure needs an even number of coordinates")
    terms = {(ctx.p(2 * k), ctx.p(2 * k + 1)): Q(1) for k in range(ctx.n // 2)}
    return PoissonStructure(ctx, cyclic=CyclicSeries(ctx.alphabet, ctx.max_weight, terms))


def direct_sum_structure(ctx: LieSpaceContext, kks_indices, symp_pairs) -> PoissonStructure:
    terms = {}
    for i in kks_indices:
        terms[(ctx.x(i), ctx.p(i), ctx.p(i))] = Q(1)
    for i, j in symp_pairs:
        terms[(ctx.p(i), ctx.p(j))] = Q(1)
    return PoissonStructure(ctx, cyclic=CyclicSeries(ctx.alphabet, ctx.max_weight, terms))


# -- bracket on forms --------------------------------------------------------


def one_form_bracket(ctx: LieSpaceContext, P: PoissonStructure, alpha: CyclicSeries, beta: CyclicSeries) -> CyclicSeries:
    """Bracket of 1-forms:

        [<a_i,dx_i>, <b_j,dx_j>] =
            <[a^#, b_i] - [b^#, a_i], dx_i> - <a_i, Ad_{dP_ij} b_j>.

    The coefficient of the differentiated-matrix term is -1 under this
    package's matrix normalization; it is pinned jointly by the Jacobi
    identity, d{f,g} = [df,dg], compatibility of the musical map with
    brackets, and agreement with the tangential-derivation bracket.
    """
    a = one_form_components(ctx, alpha)
    b = one_form_components(ctx, beta)
    asharp = P.sharp(alpha)
    bsharp = P.sharp(beta)
    out = ctx.zero_cyc()
    for i in range(ctx.n):
        w = schouten(ctx, asharp, b[i]) - schouten(ctx, bsharp, a[i])
        if not w.is_zero():
            out = out + pair(w, ctx.gen_series(ctx.dx(i)))
    for i in range(ctx.n):
        if a[i].is_zero():
            continue
        for j in range(ctx.n):
            if b[j].is_zero():
                continue
            e = d_series(ctx, P.matrix.entries[i][j])
            if e.is_zero():
                continue
            out = out - pair(a[i], ad_apply(e, b[j]))
    return out


def form_bracket(ctx: LieSpaceContext, P: PoissonStructure, alpha: CyclicSeries, beta: CyclicSeries) -> CyclicSeries:
    """Bracket on higher forms, transported through the musical map (which
    is injective on form degree >= 2 for non-degenerate structures).

    The musical substitution may raise weight (it does for the linear
    structure), so the dual-side computation runs at an extended
    truncation before the preimage is cut back down.
    """
    ka, kb = ctx.form_degree(alpha), ctx.form_degree(beta)
    if ka + kb - 1 < 2:
        return one_form_bracket(ctx, P, alpha, beta)
    gain = 0
    for im in P.musical_images().values():
        for w in im.terms:
            gain = max(gain, ctx.alphabet.word_weight(w) - 1)
    pad = (ka + kb - 1) * gain
    if pad == 0:
        x = schouten(ctx, P.sharp(alpha), P.sharp(beta))
        return P.sharp_preimage(x, ka + kb - 1)
    big = LieSpaceContext(ctx.n, ctx.max_weight + pad)
    embed = lambda f: CyclicSeries(big.alphabet, big.max_weight, dict(f.terms), _canonical=True)
    Pbig = PoissonStructure(big, cyclic=embed(P.cyclic))
    x = schouten(big, Pbig.sharp(embed(alpha)), Pbig.sharp(embed(beta)))
    gamma = Pbig.sharp_preimage(x, ka + kb - 1)
    return CyclicSeries(ctx.alphabet, ctx.max_weight, dict(gamma.truncate(ctx.max_weight).terms), _canonical=True)


# -- automorphisms and their cotangent lift ----------------------------------


def left_collect(ctx: LieSpaceContext, s: NCSeries):
    """Write a constant-free coordinate series as sum_j x_j * r_j."""
    rows = {j: {} for j in ctx.x_letters()}
    for w, c in s.terms.items():
        if not w or ctx.kind(w[0]) != "x":
            raise ValueError("series must be constant-free in the coordinates")
        rows[w[0]][w[1:]] = rows[w[0]].get(w[1:], Q(0)) + c
    return [NCSeries(ctx.alphabet, ctx.max_weight, rows[j]) for j in ctx.x_letters()]


def right_collect(ctx: LieSpaceContext, s: NCSeries):
    """Write a constant-free coordinate series as sum_j r_j * x_j."""
    rows = {j: {} for j in ctx.x_letters()}
    for w, c in s.terms.items():
        if not w or ctx.kind(w[-1]) != "x":
            raise ValueError("series must be constant-free in the coordinates")
        rows[w[-1]][w[:-1]] = rows[w[-1]].get(w[:-1], Q(0)) + c
    return [NCSeries(ctx.alphabet, ctx.max_weight, rows[j]) for j in ctx.x_letters()]


class CoordinateAutomorphism:
    """An automorphism of the coordinate Lie algebra together with its lift
    to forms (dx_i -> d image) and polyvectors (dual slots transported so
    that the canonical action field is preserved)."""

    def __init__(self, ctx: LieSpaceContext, images):
        self.ctx = ctx
        self.x_images = list(images)
        if len(self.x_images) != ctx.n:
            raise ValueError("need one image per coordinate")
        # R[j][i] with image_i = sum_j x_j R[j][i]
        r = [[None] * ctx.n for _ in range(ctx.n)]
        for i, im in enumerate(self.x_images):
            col = left_collect(ctx, im)
            for j in range(ctx.n):
                r[j][i] = col[j]
        self._rmat = SeriesMatrix(ctx, r)
        self._b = self._rmat.neumann_inverse()
        self._full_images = None

    def full_images(self):
        if self._full_images is None:
            ctx = self.ctx
            imgs = {}
            for i in range(ctx.n):
                imgs[ctx.x(i)] = self.x_images[i]
                imgs[ctx.dx(i)] = d_series(ctx, self.x_images[i])
                acc = ctx.zero_nc()
                for m in range(ctx.n):
                    acc = acc + ad_apply(self._b.entries[i][m], ctx.gen_series(ctx.p(m)))
                imgs[ctx.p(i)] = acc
            self._full_images = imgs
        return self._full_images

    def apply_series(self, s: NCSeries) -> NCSeries:
        return hom_apply(self.full_images(), s)

    def apply_cyclic(self, f: CyclicSeries) -> CyclicSeries:
        return apply_hom(f, self.full_images())

    def apply_poisson(self, P: PoissonStructure) -> PoissonStructure:
        return PoissonStructure(self.ctx, cyclic=self.apply_cyclic(P.cyclic))


# -- non-degeneracy bookkeeping ----------------------------------------------


class NondegeneracyReport:
    """Constant-part pairing data of a bivector matrix."""

    def __init__(self, ctx: LieSpaceContext, P: SeriesMatrix):
        self.constant_pairing = P.constant_part()
        self.kernel_basis = linalg.mat_nullspace(self.constant_pairing)
        self.rank = linalg.mat_rank(self.constant_pairing)
        self.constant_nondegenerate = not self.kernel_basis
        self.ctx = ctx

    def complement_indices(self):
        """Standard basis vectors completing the kernel to a basis of V."""
        n = self.ctx.n
        cols = []
        for v in self.kernel_basis:
            cols.append({i: v[i] for i in range(n) if v[i]})
        for i in range(n):
            cols.append({i: Q(1)})
        keep = linalg.independent_subset(cols)
        return [k - len(self.kernel_basis) for k in keep if k >= len(self.kernel_basis)]

    def quadratic_nondegenerate_mod_kernel(self, mu2: NCSeries) -> bool:
        """Whether a weight-2 Lie element induces a non-degenerate skew form
        on a complement of the kernel of the constant pairing."""
        n = self.ctx.n
        m = [[Q(0)] * n for _ in range(n)]
        for w, c in mu2.terms.items():
            if len(w) != 2:
                raise ValueError("need the weight-2 component")
            m[w[0]][w[1]] += c
        idx = self.complement_indices()
        if not idx:
            return True
        sub = [[m[i][j] for j in idx] for i in idx]
        return linalg.mat_rank(sub) == len(idx)
