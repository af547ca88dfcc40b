"""Text grammar, printers and document serialization.

Grammar (whitespace-insensitive):

    series  ::= ['-'] term (('+'|'-') term)*
    term    ::= factor ('*' factor)*            (scalars multiply anything)
    factor  ::= rational | ident | '[' series ',' series ']'
              | '<' series ',' series '>'       (pairing; yields a necklace series)
              | 'ad' '(' series ')' ['^' int] factor
              | 'bch' '(' series ',' series ')'
              | 'exp' '(' series ')' | 'd' '(' series ')'
              | '(' series ')'

Identifiers are generator names (x1, dx2, p3 for the third dual slot, t).
Printing is deterministic under the graded-lexicographic monomial order and
parse(print(s)) == s on canonical printouts.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction

from .nc import Alphabet, Generator, NCSeries, ad_apply, bch, der_apply, exp_nc, lie_bracket
from .cyclic import CyclicSeries, pair, project_cyclic

Q = Fraction


# -- printing -----------------------------------------------------------------


def _coeff_str(c: Q) -> str:
    return str(c)


def _word_str(alphabet: Alphabet, w) -> str:
    return "*".join(alphabet.generators[i].name for i in w)


def _joined(alphabet, items, render):
    """items: list of (word, coeff) already sorted; render(word) -> str."""
    if not items:
        return "0"
    parts = []
    for k, (w, c) in enumerate(items):
        neg = c < 0
        ac = -c if neg else c
        body = render(w)
        if body:
            cs = "" if ac == 1 else _coeff_str(ac) + "*"
            chunk = cs + body
        else:
            chunk = _coeff_str(ac)
        if k == 0:
            parts.append(("-" if neg else "") + chunk)
        else:
            parts.append((" - " if neg else " + ") + chunk)
    return "".join(parts)


def nc_text(s: NCSeries) -> str:
    items = sorted(s.terms.items(), key=lambda kv: s.alphabet.sort_key(kv[0]))
    return _joined(s.alphabet, items, lambda w: _word_str(s.alphabet, w))


def cyclic_text(c: CyclicSeries) -> str:
    def render(w):
        if not w:
            return ""
        head = c.alphabet.generators[w[0]].name
        tail = _word_str(c.alphabet, w[1:]) if len(w) > 1 else "1"
        return "<%s, %s>" % (head, tail)

    items = sorted(c.terms.items(), key=lambda kv: c.alphabet.sort_key(kv[0]))
    return _joined(c.alphabet, items, render)


def lie_text(s: NCSeries) -> str:
    """Print a Lie series as a combination of left-normed brackets.

    Each weight component is resolved against the canonical bracket basis
    (theta images of the first independent words); non-Lie input falls
    back to the word printer.
    """
    from . import linalg
    from .nc import dynkin_theta_word, words_of_weight

    if s.is_zero():
        return "0"
    letters = sorted(s.support_letters())
    items = []
    acc = NCSeries.zero(s.alphabet, s.max_weight)
    for wt, comp in s.weight_split().items():
        words = []
        cols = []
        elim = linalg._Elim()
        for w in words_of_weight(s.alphabet, wt, letters):
            th = dynkin_theta_word(s.alphabet, w, s.max_weight)
            if th.is_zero():
                continue
            if elim.reduce(th.terms, {len(words): Q(1)}) is not None:
                words.append(w)
                cols.append(th.terms)
        sol = linalg.solve(cols, comp.terms)
        if sol is None:
            return nc_text(s)
        for c, w in zip(sol, words):
            if c:
                items.append((w, c))
                acc = acc + dynkin_theta_word(s.alphabet, w, s.max_weight).scale(c)
    if acc != s:
        return nc_text(s)
    names = [g.name for g in s.alphabet.generators]

    def render(w):
        if len(w) == 1:
            return names[w[0]]
        out = "[%s,%s]" % (names[w[0]], names[w[1]])
        for z in w[2:]:
            out = "[%s,%s]" % (out, names[z])
        return out

    items.sort(key=lambda kv: s.alphabet.sort_key(kv[0]))
    return _joined(s.alphabet, items, render)


# -- parsing -------------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, msg, pos):
        super().__init__("%s (at position %d)" % (msg, pos))
        self.pos = pos


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<sym>[\[\]<>(),*+^-]))"
)


def _tokenize(text):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ParseError("unexpected character %r" % text[pos], pos)
        if m.group("num"):
            toks.append(("num", m.group("num"), m.start("num")))
        elif m.group("name"):
            toks.append(("name", m.group("name"), m.start("name")))
        else:
            toks.append(("sym", m.group("sym"), m.start("sym")))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


_FUNCS = {"ad", "bch", "exp", "d"}


class _Parser:
    """Recursive-descent parser producing NCSeries or CyclicSeries values."""

    def __init__(self, text: str, alphabet: Alphabet, max_weight: int):
        self.toks = _tokenize(text)
        self.i = 0
        self.alphabet = alphabet
        self.nmax = max_weight

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, sym):
        t = self.next()
        if t[0] != "sym" or t[1] != sym:
            raise ParseError("expected %r" % sym, t[2])
        return t

    # -- value algebra: values are Q, NCSeries or CyclicSeries
    def _add(self, a, b, pos, sub=False):
        a, b = self._promote_pair(a, b, pos)
        return a - b if sub else a + b

    def _promote_pair(self, a, b, pos):
        if isinstance(a, Q) and isinstance(b, Q):
            return a, b
        if isinstance(a, Q):
            a = self._scalar_like(a, b)
        if isinstance(b, Q):
            b = self._scalar_like(b, a)
        if isinstance(a, NCSeries) and isinstance(b, CyclicSeries):
            a = project_cyclic(a)
        if isinstance(b, NCSeries) and isinstance(a, CyclicSeries):
            b = project_cyclic(b)
        return a, b

    def _scalar_like(self, c, like):
        if isinstance(like, NCSeries):
            return NCSeries.unit(self.alphabet, self.nmax, c)
        return CyclicSeries(self.alphabet, self.nmax, {(): c})

    def _mul(self, a, b, pos):
        if isinstance(a, Q) and isinstance(b, Q):
            return a * b
        if isinstance(a, Q):
            return b.scale(a)
        if isinstance(b, Q):
            return a.scale(b)
        if isinstance(a, NCSeries) and isinstance(b, NCSeries):
            return a * b
        raise ParseError("necklace values cannot be multiplied", pos)

    def parse(self):
        v = self.series()
        t = self.next()
        if t[0] != "end":
            raise ParseError("trailing input", t[2])
        return v

    def series(self):
        t = self.peek()
        neg = False
        if t[0] == "sym" and t[1] == "-":
            self.next()
            neg = True
        v = self.term()
        if neg:
            v = -v if not isinstance(v, Q) else -v
        while True:
            t = self.peek()
            if t[0] == "sym" and t[1] in "+-":
                self.next()
                rhs = self.term()
                v = self._add(v, rhs, t[2], sub=(t[1] == "-"))
            else:
                return v

    def term(self):
        t0 = self.peek()
        v = self.factor()
        while True:
            t = self.peek()
            if t[0] == "sym" and t[1] == "*":
                self.next()
                rhs = self.factor()
                v = self._mul(v, rhs, t[2])
            elif t[0] in ("name", "num") or (t[0] == "sym" and t[1] in "[<("):
                # juxtaposition binds like '*' (after ad(...) etc.)
                rhs = self.factor()
                v = self._mul(v, rhs, t[2])
            else:
                return v

    def factor(self):
        t = self.next()
        if t[0] == "num":
            if "/" in t[1]:
                a, b = t[1].split("/")
                return Q(int(a), int(b))
            return Q(int(t[1]))
        if t[0] == "name":
            if t[1] in _FUNCS:
                return self._func(t)
            idx = self.alphabet.index.get(t[1])
            if idx is None:
                raise ParseError("unknown identifier %r" % t[1], t[2])
            return NCSeries.gen(self.alphabet, idx, self.nmax)
        if t[0] == "sym" and t[1] == "(":
            v = self.series()
            self.expect(")")
            return v
        if t[0] == "sym" and t[1] == "[":
            a = self.series()
            self.expect(",")
            b = self.series()
            self.expect("]")
            a, b = self._as_nc(a, t[2]), self._as_nc(b, t[2])
            return lie_bracket(a, b)
        if t[0] == "sym" and t[1] == "<":
            a = self.series()
            self.expect(",")
            b = self.series()
            self.expect(">")
            a, b = self._as_nc(a, t[2]), self._as_nc(b, t[2])
            return pair(a, b)
        raise ParseError("unexpected token %r" % (t[1],), t[2])

    def _as_nc(self, v, pos):
        if isinstance(v, Q):
            return NCSeries.unit(self.alphabet, self.nmax, v)
        if isinstance(v, CyclicSeries):
            raise ParseError("necklace value used where a series is needed", pos)
        return v

    def _func(self, t):
        name = t[1]
        self.expect("(")
        a = self.series()
        if name == "bch":
            self.expect(",")
            b = self.series()
            self.expect(")")
            return bch(self._as_nc(a, t[2]), self._as_nc(b, t[2]))
        self.expect(")")
        if name == "exp":
            return exp_nc(self._as_nc(a, t[2]))
        if name == "d":
            return self._d_value(a, t[2])
        if name == "ad":
            k = 1
            nt = self.peek()
            if nt[0] == "sym" and nt[1] == "^":
                self.next()
                kt = self.next()
                if kt[0] != "num" or "/" in kt[1]:
                    raise ParseError("expected an integer power", kt[2])
                k = int(kt[1])
            arg = self.factor()
            arg = self._as_nc(arg, t[2])
            base = self._as_nc(a, t[2])
            for _ in range(k):
                arg = lie_bracket(base, arg)
            return arg
        raise ParseError("unknown function %r" % name, t[2])

    def _d_value(self, v, pos):
        images = {}
        for nm, idx in self.alphabet.index.items():
            if nm.startswith("x") and ("d" + nm) in self.alphabet.index:
                images[idx] = NCSeries.gen(self.alphabet, self.alphabet.index["d" + nm], self.nmax)
        if isinstance(v, Q):
            return self._scalar_like(Q(0), NCSeries.unit(self.alphabet, self.nmax))
        if isinstance(v, CyclicSeries):
            from .cyclic import apply_derivation

            return apply_derivation(v, images, 1)
        return der_apply(images, 1, v)


def parse(text: str, alphabet: Alphabet, max_weight: int):
    """Parse an expression; returns Fraction, NCSeries or CyclicSeries."""
    v = _Parser(text, alphabet, max_weight).parse()
    return v


def parse_nc(text: str, alphabet: Alphabet, max_weight: int) -> NCSeries:
    v = parse(text, alphabet, max_weight)
    if isinstance(v, Q):
        return NCSeries.unit(alphabet, max_weight, v)
    if isinstance(v, CyclicSeries):
        raise ParseError("expected a word series, got a necklace series", 0)
    return v

def parse_cyclic(text: str, alphabet: Alphabet, max_weight: int) -> CyclicSeries:
    v = parse(text, alphabet, max_weight)
    if isinstance(v, Q):
        return CyclicSeries(alphabet, max_weight, {(): v})
    if isinstance(v, NCSeries):
        return project_cyclic(v)
    return v


# -- documents -----------------------------------------------------------------


def alphabet_doc(alphabet: Alphabet):
    return [[g.name, g.degree, g.weight] for g in alphabet.generators]


def alphabet_from_doc(doc) -> Alphabet:
    return Alphabet(Generator(nm, int(dg), int(wt)) for nm, dg, wt in doc)


def series_doc(s) -> dict:
    kind = "cyclic" if isinstance(s, CyclicSeries) else "series"
    return {
        "kind": kind,
        "alphabet": alphabet_doc(s.alphabet),
        "max_weight": s.max_weight,
        "terms": sorted(
            ([str(c), [s.alphabet.generators[i].name for i in w]] for w, c in s.terms.items()),
            key=lambda e: (len(e[1]), e[1]),
        ),
    }


def series_from_doc(doc):
    alphabet = alphabet_from_doc(doc["alphabet"])
    terms = {}
    for cstr, names in doc["terms"]:
        w = tuple(alphabet.index[nm] for nm in names)
        terms[w] = terms.get(w, Q(0)) + Q(cstr)
    if doc["kind"] == "cyclic":
        return CyclicSeries(alphabet, int(doc["max_weight"]), terms)
    return NCSeries(alphabet, int(doc["max_weight"]), terms)


def matrix_doc(m) -> dict:
    return {
        "kind": "matrix",
        "size": m.ctx.n,
        "entries": [[series_doc(e) for e in row] for row in m.entries],
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True)
