"""Sparse commutative polynomials in the jet variables x^i_{-j}.

A monomial is a tuple of ``(i, j, e)`` triples sorted by ``(i, j)``:
basis index ``i``, depth ``j >= 1`` (the variable x^i_{-j}) and exponent
``e >= 1``. Degree is the sum of exponents, weight the sum of ``j * e``.
"""

from __future__ import annotations

from fractions import Fraction

from .scalars import Field, Scalar


def mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    d = dict(((i, j), e) for i, j, e in a)
    for i, j, e in b:
        d[(i, j)] = d.get((i, j), 0) + e
    return tuple((i, j, e) for (i, j), e in sorted(d.items()))


def mono_degree(m: tuple) -> int:
    return sum(e for _, _, e in m)


def mono_weight(m: tuple) -> int:
    return sum(j * e for _, j, e in m)


def mono_depth(m: tuple) -> int:
    return max((j for _, j, _ in m), default=0)


class DiffPoly:
    """Element of k[J_m g*] (``trunc = m``) or k[J_infty g*] (``trunc = None``)."""

    __slots__ = ("field", "terms", "trunc")

    def __init__(self, field: Field, terms=None, trunc=None):
        self.field = field
        self.trunc = trunc
        t = {}
        if terms:
            norm = field.norm
            for m, c in terms.items():
                c = norm(c)
                if c:
                    t[m] = c
        self.terms = t

    # -- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, field: Field, c=1, trunc=None):
        return cls(field, {(): field(c)}, trunc)

    @classmethod
    def variable(cls, field: Field, i: int, j: int = 1, trunc=None):
        if j < 1:
            raise ValueError("depth must be >= 1")
        if trunc is not None and j > trunc + 1:
            from .errors import TruncationOverflow
            raise TruncationOverflow(f"x^{i}_(-{j}) beyond truncation {trunc}")
        return cls(field, {((i, j, 1),): 1}, trunc)

    def _like(self, terms, trunc=None):
        out = DiffPoly.__new__(DiffPoly)
        out.field = self.field
        out.trunc = self.trunc if trunc is None else trunc
        out.terms = terms
        return out

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, DiffPoly):
            if other.field != self.field:
                from .errors import CharacteristicMismatch
                raise CharacteristicMismatch(f"{self.field} vs {other.field}")
            return other
        return DiffPoly.constant(self.field, other, self.trunc)

    def _join_trunc(self, other):
        if self.trunc is None or other.trunc is None:
            return None
        return max(self.trunc, other.trunc)

    def __add__(self, other):
        other = self._coerce(other)
        norm = self.field.norm
        t = dict(self.terms)
        for m, c in other.terms.items():
            v = norm(t.get(m, 0) + c)
            if v:
                t[m] = v
            else:
                t.pop(m, None)
        return self._like(t, self._join_trunc(other))

    __radd__ = __add__

    def __neg__(self):
        norm = self.field.norm
        return self._like({m: norm(-c) for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c):
        norm = self.field.norm
        c = self.field(c)
        if not c:
            return self._like({})
        t = {}
        for m, v in self.terms.items():
            w = norm(v * c)
            if w:
                t[m] = w
        return self._like(t)

    def __mul__(self, other):
        if not isinstance(other, DiffPoly):
            return self.scale(other)
        other = self._coerce(other)
        t: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                t[m] = t.get(m, 0) + c1 * c2
        return DiffPoly(self.field, t, self._join_trunc(other))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = DiffPoly.constant(self.field, 1, self.trunc)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, DiffPoly):
            return self.field == other.field and self.terms == other.terms
        if isinstance(other, (int, Fraction, Scalar)):
            return self == self._coerce(other)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # -- structure --------------------------------------------------------

    def degree(self) -> int:
        return max((mono_degree(m) for m in self.terms), default=-1)

    def weights(self) -> set:
        return {mono_weight(m) for m in self.terms}

    def depth(self) -> int:
        return max((mono_depth(m) for m in self.terms), default=0)

    def homogeneous_part(self, degree: int) -> "DiffPoly":
        return self._like({m: c for m, c in self.terms.items()
                           if mono_degree(m) == degree})

    def coefficient(self, mono: tuple):
        return self.terms.get(mono, 0)

    def variables(self) -> set:
        return {(i, j) for m in self.terms for i, j, _ in m}

    def diff(self, i: int, j: int) -> "DiffPoly":
        """Partial derivative with respect to x^i_{-j}."""
        norm = self.field.norm
        t: dict = {}
        for m, c in self.terms.items():
            for pos, (a, b, e) in enumerate(m):
                if a == i and b == j:
                    rest = m[:pos] + (((a, b, e - 1),) if e > 1 else ()) \
                        + m[pos + 1:]
                    t[rest] = norm(t.get(rest, 0) + e * c)
        return DiffPoly(self.field, t, self.trunc)

    def evaluate(self, point: dict):
        """Value at ``point`` ({(i, j): value}); missing variables are 0."""
        f = self.field
        total = 0
        for m, c in self.terms.items():
            v = c
            for i, j, e in m:
                x = point.get((i, j), 0)
                if not x:
                    v = 0
                    break
                v = v * (pow(x, e, f.p) if f.p else x ** e)
            total += v
        return f.norm(total)

    def substitute(self, images: dict) -> "DiffPoly":
        """Algebra map sending x^i_{-j} to ``images[(i, j)]`` (default itself)."""
        out = self._like({})
        cache: dict = {}
        for m, c in self.terms.items():
            term = DiffPoly.constant(self.field, 1, self.trunc)
            for i, j, e in m:
                img = images.get((i, j))
                if img is None:
                    term = term * DiffPoly(self.field, {((i, j, e),): 1},
                                           self.trunc)
                    continue
                key = (i, j, e)
                if key not in cache:
                    cache[key] = img ** e
                term = term * cache[key]
            out = out + term.scale(c)
        return out

    def is_pth_power_shape(self) -> bool:
        """True iff every monomial has all exponents divisible by p."""
        p = self.field.p
        return bool(p) and all(e % p == 0 for m in self.terms for _, _, e in m)

    # -- serialisation ----------------------------------------------------

    def sorted_terms(self):
        return sorted(self.terms.items(),
                      key=lambda kv: (mono_degree(kv[0]), mono_weight(kv[0]),
                                      kv[0]))

    def to_document(self):
        return {
            "characteristic": self.field.p,
            "truncation": self.trunc,
            "terms": [[[list(t) for t in m],
                       str(c) if isinstance(c, Fraction) else c]
                      for m, c in self.sorted_terms()],
        }

    @classmethod
    def from_document(cls, doc):
        f = Field(doc["characteristic"])
        terms = {}
        for m, c in doc["terms"]:
            terms[tuple(tuple(t) for t in m)] = f(Fraction(c) if isinstance(
                c, str) else c)
        return cls(f, terms, doc.get("truncation"))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            vs = "*".join(f"x{i}_{-j}" + (f"^{e}" if e > 1 else "")
                          for i, j, e in m)
            parts.append(f"{c}" + (f"*{vs}" if vs else ""))
        return " + ".join(parts)
