"""Functions as sign-normalized necklaces (cyclic words).

A necklace is the class of a word under rotation with Koszul signs: moving
a prefix u past a suffix v costs (-1)^{deg u * deg v}.  Classes whose
self-rotation carries sign -1 are 2-torsion and are dropped eagerly (the
ground field is Q).  The pairing <a,b> of two series is the class of a*b;
cyclic derivatives rotate one occurrence of a letter to the front and
delete it.
"""

from __future__ import annotations

from fractions import Fraction

from .nc import Alphabet, NCSeries, Word, _check_compatible

Q = Fraction


def normalize_necklace(alphabet: Alphabet, word: Word):
    """Canonical rotation and accumulated sign, or None for a zero class.

    Returns (canonical_word, sign) with word == sign * canonical in the
    cyclic quotient; None when some self-rotation has sign -1.
    """
    if not word:
        return word, 1
    degs = alphabet.degrees
    total = sum(degs[z] for z in word) & 1
    best = None
    best_sign = 0
    pref = 0  # parity of the degree of word[:r]
    for r in range(len(word)):
        if r:
            pref ^= degs[word[r - 1]] & 1
        rot = word[r:] + word[:r]
        sign = -1 if pref and ((total ^ pref) & 1) else 1
        if best is None or rot < best:
            best, best_sign = rot, sign
        elif rot == best and sign != best_sign:
            return None
    return best, best_sign


class CyclicSeries:
    """Sparse series over canonical necklaces with rational coefficients."""

    __slots__ = ("alphabet", "max_weight", "terms")

    def __init__(self, alphabet: Alphabet, max_weight: int, terms=None, _canonical=False):
        self.alphabet = alphabet
        self.max_weight = max_weight
        tt: dict[Word, Q] = {}
        if terms:
            if _canonical:
                tt = {w: Q(c) for w, c in terms.items() if c}
            else:
                for w, c in terms.items():
                    c = Q(c)
                    if not c or alphabet.word_weight(w) > max_weight:
                        continue
                    norm = normalize_necklace(alphabet, w)
                    if norm is None:
                        continue
                    cw, s = norm
                    nc = tt.get(cw, Q(0)) + s * c
                    if nc:
                        tt[cw] = nc
                    else:
                        tt.pop(cw, None)
        self.terms = tt

    @staticmethod
    def zero(alphabet: Alphabet, max_weight: int) -> "CyclicSeries":
        return CyclicSeries(alphabet, max_weight)

    def copy_with(self, terms, _canonical=True) -> "CyclicSeries":
        return CyclicSeries(self.alphabet, self.max_weight, terms, _canonical=_canonical)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "CyclicSeries") -> "CyclicSeries":
        _check_compatible(self, other)
        tt = dict(self.terms)
        for w, c in other.terms.items():
            nc = tt.get(w, Q(0)) + c
            if nc:
                tt[w] = nc
            else:
                tt.pop(w, None)
        return self.copy_with(tt)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return self.copy_with({w: -c for w, c in self.terms.items()})

    def scale(self, c) -> "CyclicSeries":
        c = Q(c)
        if not c:
            return CyclicSeries.zero(self.alphabet, self.max_weight)
        return self.copy_with({w: c * v for w, v in self.terms.items()})

    def __rmul__(self, c):
        if isinstance(c, (int, Q)):
            return self.scale(c)
        return NotImplemented

    def __eq__(self, other):
        return (
            isinstance(other, CyclicSeries)
            and self.alphabet == other.alphabet
            and self.max_weight == other.max_weight
            and self.terms == other.terms
        )

    def truncate(self, new_max: int) -> "CyclicSeries":
        if new_max > self.max_weight:
            raise ValueError("cannot extend a truncated series")
        ww = self.alphabet.word_weight
        return CyclicSeries(
            self.alphabet,
            new_max,
            {w: c for w, c in self.terms.items() if ww(w) <= new_max},
            _canonical=True,
        )

    def weight_component(self, w: int) -> "CyclicSeries":
        ww = self.alphabet.word_weight
        return self.copy_with({k: c for k, c in self.terms.items() if ww(k) == w})

    def weight_split(self):
        out: dict[int, dict] = {}
        ww = self.alphabet.word_weight
        for k, c in self.terms.items():
            out.setdefault(ww(k), {})[k] = c
        return {w: self.copy_with(t) for w, t in sorted(out.items())}

    def parity_components(self):
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

    def letter_count(self, letters) -> dict:
        """Split by the number of letters from the given index set."""
        letters = set(letters)
        out: dict[int, dict] = {}
        for w, c in self.terms.items():
            k = sum(1 for z in w if z in letters)
            out.setdefault(k, {})[w] = c
        return {k: self.copy_with(t) for k, t in sorted(out.items())}

    def max_letter_count(self, letters) -> int:
        letters = set(letters)
        return max((sum(1 for z in w if z in letters) for w in self.terms), default=0)

    def support_letters(self) -> set:
        s: set[int] = set()
        for w in self.terms:
            s.update(w)
        return s

    def as_nc(self) -> NCSeries:
        """Canonical representative words as a plain series."""
        return NCSeries(self.alphabet, self.max_weight, dict(self.terms))

    def cyclic_derivative(self, gidx: int) -> NCSeries:
        """Left cyclic derivative: rotate each occurrence of the letter to
        the front (with the Koszul sign) and delete it."""
        degs = self.alphabet.degrees
        out: dict[Word, Q] = {}
        for w, c in self.terms.items():
            total = sum(degs[z] for z in w) & 1
            pref = 0
            for k, z in enumerate(w):
                if z == gidx:
                    sign = -1 if pref and ((total ^ pref) & 1) else 1
                    nw = w[k + 1 :] + w[:k]
                    nc = out.get(nw, Q(0)) + sign * c
                    if nc:
                        out[nw] = nc
                    else:
                        out.pop(nw, None)
                pref ^= degs[z] & 1
        return NCSeries(self.alphabet, self.max_weight, out)

    def right_cyclic_derivative(self, gidx: int) -> NCSeries:
        """Right cyclic derivative, equal to the left one weighted by
        (-1)^{|g| (|w| - |g|)} per necklace."""
        degs = self.alphabet.degrees
        g = degs[gidx] & 1
        out = NCSeries.zero(self.alphabet, self.max_weight)
        if not g:
            return self.cyclic_derivative(gidx)
        for par, comp in self.parity_components():
            d = comp.cyclic_derivative(gidx)
            out = out + (d if (par ^ g) == 0 else -d)
        return out

    def __repr__(self):
        from .exprio import cyclic_text

        return cyclic_text(self)


def project_cyclic(s: NCSeries) -> CyclicSeries:
    """Linear extension of necklace normalization (the trace map)."""
    return CyclicSeries(s.alphabet, s.max_weight, s.terms)


def pair(a: NCSeries, b: NCSeries) -> CyclicSeries:
    """Universal invariant pairing <a,b>: the class of a*b."""
    return project_cyclic(a * b)


def apply_derivation(f: CyclicSeries, images, parity: int, check_parity=True) -> CyclicSeries:
    """A derivation of the underlying algebra descends to necklaces."""
    from .nc import der_apply

    out = CyclicSeries.zero(f.alphabet, f.max_weight)
    for w, c in f.terms.items():
        rep = NCSeries(f.alphabet, f.max_weight, {w: c})
        out = out + project_cyclic(der_apply(images, parity, rep, check_parity=check_parity))
    return out


def apply_hom(f: CyclicSeries, images, target_alphabet=None, check_parity=True) -> CyclicSeries:
    """An algebra map applied necklace-wise (covariant functoriality)."""
    from .nc import hom_apply

    tgt = target_alphabet if target_alphabet is not None else f.alphabet
    out = CyclicSeries.zero(tgt, f.max_weight)
    for w, c in f.terms.items():
        rep = NCSeries(f.alphabet, f.max_weight, {w: c})
        out = out + project_cyclic(hom_apply(images, rep, tgt, check_parity=check_parity))
    return out


def necklace_basis(alphabet: Alphabet, weight: int, letters=None, predicate=None):
    """All canonical nonzero necklaces of a weight over a letter subset."""
    from .nc import words_of_weight

    seen = set()
    out = []
    for w in words_of_weight(alphabet, weight, letters):
        norm = normalize_necklace(alphabet, w)
        if norm is None:
            continue
        cw, _ = norm
        if cw in seen:
            continue
        seen.add(cw)
        if predicate is None or predicate(cw):
            out.append(cw)
    return sorted(out)
