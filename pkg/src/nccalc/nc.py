"""Truncated free graded associative series with exact rational coefficients.

Everything is computed inside the free associative algebra on a fixed
alphabet of graded generators, truncated at a weight N.  Lie elements are
represented by their associative expansion; membership in the free Lie
algebra is certified with the Dynkin (left bracketing) idempotent rather
than by storing a bracket basis.

Conventions used throughout the package:

* parity of a generator is its cohomological degree mod 2,
* the graded bracket is ``[a,b] = ab - (-1)^{|a||b|} ba``,
* the antipode reverses words with a factor ``(-1)^len``,
* the weight of a word is the sum of the generator weights (all paper-level
  generators have weight 1, so the weight is just the word length).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

Q = Fraction
Word = tuple  # tuple of generator indices


@dataclass(frozen=True)
class Generator:
    """A free generator: name, cohomological degree and filtration weight."""

    name: str
    degree: int = 0
    weight: int = 1

    def __post_init__(self):
        if self.weight <= 0:
            raise ValueError("generator weight must be positive")


class Alphabet:
    """Ordered list of generators; the order fixes the monomial order."""

    def __init__(self, generators: Iterable[Generator]):
        self.generators = tuple(generators)
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise ValueError("generator names must be unique")
        self.index = {g.name: i for i, g in enumerate(self.generators)}
        self.degrees = tuple(g.degree for g in self.generators)
        self.weights = tuple(g.weight for g in self.generators)
        self._uniform = all(w == 1 for w in self.weights)

    def __len__(self):
        return len(self.generators)

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.generators == other.generators

    def __hash__(self):
        return hash(self.generators)

    def __repr__(self):
        return "Alphabet(%s)" % ",".join(g.name for g in self.generators)

    def word_weight(self, word: Word) -> int:
        if self._uniform:
            return len(word)
        return sum(self.weights[i] for i in word)

    def word_degree(self, word: Word) -> int:
        return sum(self.degrees[i] for i in word)

    def word_parity(self, word: Word) -> int:
        return self.word_degree(word) & 1

    def sort_key(self, word: Word):
        return (self.word_weight(word), word)


class AlphabetMismatch(ValueError):
    pass


class ParityMismatch(ValueError):
    pass


def _check_compatible(a: "NCSeries", b: "NCSeries"):
    if a.alphabet != b.alphabet:
        raise AlphabetMismatch("series live on different alphabets")
    if a.max_weight != b.max_weight:
        raise AlphabetMismatch(
            "series have different truncation orders (%d vs %d)" % (a.max_weight, b.max_weight)
        )


class NCSeries:
    """Sparse truncated series ``sum c_w * w`` over noncommutative words."""

    __slots__ = ("alphabet", "max_weight", "terms")

    def __init__(self, alphabet: Alphabet, max_weight: int, terms: Mapping[Word, Q] | None = None):
        self.alphabet = alphabet
        self.max_weight = max_weight
        tt = {}
        if terms:
            for w, c in terms.items():
                c = Q(c)
                if c and alphabet.word_weight(w) <= max_weight:
                    tt[w] = c
        self.terms = tt

    # -- constructors -------------------------------------------------
    @staticmethod
    def zero(alphabet: Alphabet, max_weight: int) -> "NCSeries":
        return NCSeries(alphabet, max_weight)

    @staticmethod
    def unit(alphabet: Alphabet, max_weight: int, coeff=1) -> "NCSeries":
        return NCSeries(alphabet, max_weight, {(): Q(coeff)})

    @staticmethod
    def gen(alphabet: Alphabet, i: int, max_weight: int) -> "NCSeries":
        return NCSeries(alphabet, max_weight, {(i,): Q(1)})

    def copy_with(self, terms) -> "NCSeries":
        return NCSeries(self.alphabet, self.max_weight, terms)

    # -- basic queries ------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def constant_term(self) -> Q:
        return self.terms.get((), Q(0))

    def min_weight(self) -> int:
        if not self.terms:
            return self.max_weight + 1
        return min(self.alphabet.word_weight(w) for w in self.terms)

    def weight_component(self, w: int) -> "NCSeries":
        ww = self.alphabet.word_weight
        return self.copy_with({k: c for k, c in self.terms.items() if ww(k) == w})

    def weight_split(self) -> dict:
        out: dict[int, dict] = {}
        ww = self.alphabet.word_weight
        for k, c in self.terms.items():
            out.setdefault(ww(k), {})[k] = c
        return {w: self.copy_with(t) for w, t in sorted(out.items())}

    def parity_components(self):
        """Split into (parity, series) pairs by cohomological parity of words."""
        even, odd = {}, {}
        wp = self.alphabet.word_parity
        for k, c in self.terms.items():
            (odd if wp(k) else even)[k] = c
        out = []
        if even:
            out.append((0, self.copy_with(even)))
        if odd:
            out.append((1, self.copy_with(odd)))
        return out

    def support_letters(self) -> set:
        s: set[int] = set()
        for w in self.terms:
            s.update(w)
        return s

    # -- linear structure ----------------------------------------------
    def __add__(self, other: "NCSeries") -> "NCSeries":
        _check_compatible(self, other)
        tt = dict(self.terms)
        for w, c in other.terms.items():
            nc = tt.get(w, Q(0)) + c
            if nc:
                tt[w] = nc
            else:
                tt.pop(w, None)
        return self.copy_with(tt)

    def __sub__(self, other: "NCSeries") -> "NCSeries":
        return self + (-other)

    def __neg__(self) -> "NCSeries":
        return self.copy_with({w: -c for w, c in self.terms.items()})

    def scale(self, c) -> "NCSeries":
        c = Q(c)
        if not c:
            return NCSeries.zero(self.alphabet, self.max_weight)
        return self.copy_with({w: c * v for w, v in self.terms.items()})

    def __rmul__(self, c):
        if isinstance(c, (int, Q)):
            return self.scale(c)
        return NotImplemented

    # -- multiplicative structure ---------------------------------------
    def __mul__(self, other):
        if isinstance(other, (int, Q)):
            return self.scale(other)
        _check_compatible(self, other)
        nmax = self.max_weight
        ww = self.alphabet.word_weight
        tt: dict[Word, Q] = {}
        for wa, ca in self.terms.items():
            ra = nmax - ww(wa)
            for wb, cb in other.terms.items():
                if ww(wb) > ra:
                    continue
                w = wa + wb
                nc = tt.get(w, Q(0)) + ca * cb
                if nc:
                    tt[w] = nc
                else:
                    tt.pop(w, None)
        return self.copy_with(tt)

    def antipode(self) -> "NCSeries":
        tt = {}
        for w, c in self.terms.items():
            wr = w[::-1]
            cc = -c if len(w) & 1 else c
            tt[wr] = tt.get(wr, Q(0)) + cc
        return self.copy_with({w: c for w, c in tt.items() if c})

    def truncate(self, new_max: int) -> "NCSeries":
        if new_max > self.max_weight:
            raise ValueError("cannot extend a truncated series")
        ww = self.alphabet.word_weight
        return NCSeries(
            self.alphabet, new_max, {w: c for w, c in self.terms.items() if ww(w) <= new_max}
        )

    # -- comparisons -----------------------------------------------------
    def __eq__(self, other):
        return (
            isinstance(other, NCSeries)
            and self.alphabet == other.alphabet
            and self.max_weight == other.max_weight
            and self.terms == other.terms
        )

    def __repr__(self):
        from .exprio import nc_text

        return nc_text(self)


# -- graded Lie operations -------------------------------------------------


def lie_bracket(a: NCSeries, b: NCSeries) -> NCSeries:
    """Graded commutator ``ab - (-1)^{|a||b|} ba`` computed term by term."""
    _check_compatible(a, b)
    alpha = a.alphabet
    nmax = a.max_weight
    ww, wp = alpha.word_weight, alpha.word_parity
    tt: dict[Word, Q] = {}

    def _acc(w, c):
        nc = tt.get(w, Q(0)) + c
        if nc:
            tt[w] = nc
        else:
            tt.pop(w, None)

    for wa, ca in a.terms.items():
        ra = nmax - ww(wa)
        pa = wp(wa)
        for wb, cb in b.terms.items():
            if ww(wb) > ra:
                continue
            c = ca * cb
            _acc(wa + wb, c)
            _acc(wb + wa, -c if not (pa and wp(wb)) else c)
    return a.copy_with(tt)


def ad_apply(pi: NCSeries, b: NCSeries) -> NCSeries:
    """Adjoint action of the enveloping algebra: a word acts as the
    composition of ``ad`` operators of its letters, ``Ad_1 = id``."""
    _check_compatible(pi, b)
    out = NCSeries.zero(b.alphabet, b.max_weight)
    gens = _gen_cache(b.alphabet, b.max_weight)
    for w, c in pi.terms.items():
        v = b
        for z in reversed(w):
            v = lie_bracket(gens[z], v)
            if v.is_zero():
                break
        if not v.is_zero():
            out = out + v.scale(c)
    return out


_GEN_CACHE: dict = {}


def _gen_cache(alphabet: Alphabet, nmax: int):
    key = (alphabet, nmax)
    got = _GEN_CACHE.get(key)
    if got is None:
        got = [NCSeries.gen(alphabet, i, nmax) for i in range(len(alphabet))]
        _GEN_CACHE[key] = got
    return got


def exp_nc(a: NCSeries) -> NCSeries:
    """exp of a constant-free series, truncated."""
    if a.constant_term():
        raise ValueError("exp needs a zero constant term")
    one = NCSeries.unit(a.alphabet, a.max_weight)
    e = one
    for k in range(a.max_weight, 0, -1):
        e = one + (a * e).scale(Q(1, k))
    return e


def log_nc(s: NCSeries) -> NCSeries:
    """log of a series with constant term 1, truncated."""
    if s.constant_term() != 1:
        raise ValueError("log needs constant term 1")
    u = s - NCSeries.unit(s.alphabet, s.max_weight)
    acc = NCSeries.zero(s.alphabet, s.max_weight)
    for k in range(s.max_weight, 0, -1):
        acc = NCSeries.unit(s.alphabet, s.max_weight, Q(1, k)) - u * acc
    return u * acc


def bch(a: NCSeries, b: NCSeries) -> NCSeries:
    """log(exp(a) exp(b)) truncated; inputs must be constant-free."""
    if a.constant_term() or b.constant_term():
        raise ValueError("bch needs zero constant terms")
    return log_nc(exp_nc(a) * exp_nc(b))


# -- algebra maps and derivations -------------------------------------------


def hom_apply(
    images: Mapping[int, NCSeries],
    s: NCSeries,
    target_alphabet: Alphabet | None = None,
    check_parity: bool = True,
) -> NCSeries:
    """Unique algebra-map extension of generator images, truncated.

    Generators without an explicit image are matched by name in the target
    alphabet.  Images must preserve parity and must not lower weight, so
    that truncation commutes with the substitution.
    """
    tgt = target_alphabet if target_alphabet is not None else s.alphabet
    nmax = s.max_weight
    gens = _gen_cache(tgt, nmax)
    img: dict[int, NCSeries] = {}
    for i, g in enumerate(s.alphabet.generators):
        if i in images:
            im = images[i]
            if im.alphabet != tgt or im.max_weight != nmax:
                raise AlphabetMismatch("image series must live on the target alphabet")
            if check_parity:
                for w in im.terms:
                    if tgt.word_parity(w) != (g.degree & 1):
                        raise ParityMismatch("image of %s has wrong parity" % g.name)
                    if tgt.word_weight(w) < g.weight:
                        raise ValueError("image of %s lowers weight" % g.name)
            img[i] = im
        else:
            j = tgt.index.get(g.name)
            if j is None:
                img[i] = None  # only an error if the letter actually occurs
            else:
                img[i] = gens[j]
    out_terms: dict[Word, Q] = {}
    one = NCSeries.unit(tgt, nmax)
    for w, c in s.terms.items():
        v = one
        for z in w:
            iz = img[z]
            if iz is None:
                raise AlphabetMismatch(
                    "no image for generator %r" % s.alphabet.generators[z].name
                )
            v = v * iz
            if v.is_zero():
                break
        for ww_, cc in v.terms.items():
            nc = out_terms.get(ww_, Q(0)) + c * cc
            if nc:
                out_terms[ww_] = nc
            else:
                out_terms.pop(ww_, None)
    return NCSeries(tgt, nmax, out_terms)


def der_apply(
    images: Mapping[int, NCSeries],
    parity: int,
    s: NCSeries,
    check_parity: bool = True,
) -> NCSeries:
    """Graded-Leibniz extension of generator images as a derivation.

    On a word the letter at position k is replaced by its image with the
    Koszul sign (-1)^(parity * degree of the prefix).  Missing images are
    zero.
    """
    alpha = s.alphabet
    nmax = s.max_weight
    if check_parity:
        for i, im in images.items():
            want = (alpha.degrees[i] + parity) & 1
            for w in im.terms:
                if alpha.word_parity(w) != want:
                    raise ParityMismatch(
                        "derivation image of %s has wrong parity" % alpha.generators[i].name
                    )
    ww = alpha.word_weight
    degs = alpha.degrees
    out: dict[Word, Q] = {}
    for w, c in s.terms.items():
        pref_deg = 0
        for k, z in enumerate(w):
            im = images.get(z)
            if im is not None and not im.is_zero():
                sign = -1 if (parity and (pref_deg & 1)) else 1
                pre, suf = w[:k], w[k + 1 :]
                base = ww(pre) + ww(suf)
                for wi, ci in im.terms.items():
                    if base + ww(wi) > nmax:
                        continue
                    nw = pre + wi + suf
                    nc = out.get(nw, Q(0)) + sign * c * ci
                    if nc:
                        out[nw] = nc
                    else:
                        out.pop(nw, None)
            pref_deg += degs[z]
    return NCSeries(alpha, nmax, out)


# -- Dynkin projection -------------------------------------------------------


def dynkin_theta_word(alphabet: Alphabet, word: Word, nmax: int) -> NCSeries:
    """Left bracketing map on a single word: z1...zk -> [[..[z1,z2]..],zk]."""
    gens = _gen_cache(alphabet, nmax)
    cur = gens[word[0]]
    for z in word[1:]:
        cur = lie_bracket(cur, gens[z])
    return cur


def dynkin_theta(s: NCSeries) -> NCSeries:
    out = NCSeries.zero(s.alphabet, s.max_weight)
    for w, c in s.terms.items():
        if not w:
            raise ValueError("theta undefined on the constant term")
        out = out + dynkin_theta_word(s.alphabet, w, s.max_weight).scale(c)
    return out


def dynkin_project(s: NCSeries):
    """Weight-wise left-bracketing projection onto Lie elements.

    Returns ``(projection, was_lie)``: the projection divides the theta
    image of the weight-d component by d, and the flag reports whether the
    input was already primitive (fixed by the projection).
    """
    if s.constant_term():
        raise ValueError("Lie projection needs a zero constant term")
    proj = NCSeries.zero(s.alphabet, s.max_weight)
    ww = s.alphabet.word_weight
    for w, c in s.terms.items():
        proj = proj + dynkin_theta_word(s.alphabet, w, s.max_weight).scale(Q(c, ww(w)))
    return proj, proj == s


def is_lie(s: NCSeries) -> bool:
    if s.is_zero():
        return True
    if s.constant_term():
        return False
    return dynkin_project(s)[1]


# -- word and Lie bases -------------------------------------------------------

_LIE_BASIS_CACHE: dict = {}


def words_of_weight(alphabet: Alphabet, weight: int, letters=None):
    """All words of the given weight over a subset of letters (weight-1 only)."""
    letters = tuple(range(len(alphabet))) if letters is None else tuple(letters)
    for i in letters:
        if alphabet.weights[i] != 1:
            raise ValueError("word enumeration assumes weight-1 generators")
    words = [()]
    for _ in range(weight):
        words = [w + (i,) for w in words for i in letters]
    return words


def lie_basis(alphabet: Alphabet, weight: int, nmax: int, letters=None):
    """A basis of the weight-homogeneous Lie component, as NCSeries.

    Built by reducing the theta images of all words of that weight.
    """
    letters = tuple(range(len(alphabet))) if letters is None else tuple(letters)
    key = (alphabet, weight, nmax, letters)
    got = _LIE_BASIS_CACHE.get(key)
    if got is not None:
        return got
    from .linalg import independent_subset

    cands = [
        dynkin_theta_word(alphabet, w, nmax) for w in words_of_weight(alphabet, weight, letters)
    ]
    vecs = [c.terms for c in cands if not c.is_zero()]
    series = [c for c in cands if not c.is_zero()]
    keep = independent_subset(vecs)
    basis = [series[i] for i in keep]
    _LIE_BASIS_CACHE[key] = basis
    return basis
