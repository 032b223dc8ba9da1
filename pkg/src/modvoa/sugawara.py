"""Segal-Sugawara vectors: construction, modular reduction and verification."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import permutations

from .diffpoly import DiffPoly
from .errors import DenominatorDivisibleByP, UnsupportedFamily
from .jets import P_series, build_invariant_P, series_product
from .liealg import LieAlgebraSpec, build_classical, dual_basis
from .report import Report
from .scalars import Field, reduce_rational
from .vacuum import VacuumModule, VState


@dataclass
class SSFamily:
    """Vectors S_{i,-1}, i = 1..len(vectors), in a vacuum module."""

    spec: LieAlgebraSpec
    module: VacuumModule
    vectors: list
    provenance: str                  # "casimir" or "cdet"
    degrees: list
    scalars: list = dc_field(default_factory=list)
    preimage: "SSFamily | None" = None

    @property
    def level(self):
        return self.module.level

    def derived(self, i: int, j: int) -> VState:
        """S_{i,-j} = T^(j-1) S_{i,-1} (i is 1-based)."""
        return self.module.translate(j - 1, self.vectors[i - 1])

    def to_document(self):
        doc = {
            "family": self.spec.family,
            "size": self.spec.N,
            "characteristic": self.spec.p,
            "level": self.level,
            "provenance": self.provenance,
            "degrees": self.degrees,
            "normalisation": self.scalars,
            "vectors": [v.to_document() for v in self.vectors],
        }
        if self.preimage is not None:
            doc["preimage"] = self.preimage.to_document()
        return doc


def casimir_vector(spec: LieAlgebraSpec, level=None,
                   module: VacuumModule | None = None) -> VState:
    """(1/2) sum_a x_{a,-1} x^a_{-1}|0> over kappa-dual bases."""
    dual = dual_basis(spec)
    if module is None:
        module = VacuumModule(spec, spec.critical_level() if level is None
                              else level)
    f = spec.field
    half = f(Fraction(1, 2))
    out = module.zero()
    for a in range(spec.dim):
        for b, c in dual[a].items():
            out = out + module.monomial_state([(a, 1), (b, 1)], f.norm(c * half))
    return out


# -- column determinant ------------------------------------------------------

TAU = ("tau",)


def _normal_order_tau(word: tuple) -> dict:
    """Rewrite a word in tau and E[-m] letters with every tau moved right,
    using tau E[-m] = E[-m] tau + m E[-m-1]. Returns {word: int}."""
    for pos in range(len(word) - 1):
        if word[pos] == TAU and word[pos + 1] != TAU:
            _, i, j, m = word[pos + 1]
            left, right = word[:pos], word[pos + 2:]
            out: dict = {}
            for w, c in _normal_order_tau(left + (word[pos + 1], TAU) + right).items():
                out[w] = out.get(w, 0) + c
            for w, c in _normal_order_tau(left + (("E", i, j, m + 1),) + right).items():
                out[w] = out.get(w, 0) + m * c
            return {w: c for w, c in out.items() if c}
    return {word: 1}


def cdet_words(N: int) -> dict:
    """Column determinant of tau + E[-1], normal ordered: {(word, tau power): int}."""
    total: dict = {}
    for perm in permutations(range(N)):
        sign = _sign(perm)
        # factors A_{perm(c), c} for c = 0..N-1, left to right
        words = {(): sign}
        for c in range(N):
            r = perm[c]
            letters = [(("E", r, c, 1), 1)]
            if r == c:
                letters.append((TAU, 1))
            new: dict = {}
            for w, k in words.items():
                for letter, lc in letters:
                    nw = w + (letter,)
                    new[nw] = new.get(nw, 0) + k * lc
            words = new
        for w, k in words.items():
            for w2, c2 in _normal_order_tau(w).items():
                ntau = sum(1 for x in w2 if x == TAU)
                core = tuple(x for x in w2 if x != TAU)
                key = (core, ntau)
                total[key] = total.get(key, 0) + k * c2
    return {k: v for k, v in total.items() if v}


def _sign(perm) -> int:
    s = 1
    for a in range(len(perm)):
        for b in range(a + 1, len(perm)):
            if perm[a] > perm[b]:
                s = -s
    return s


def molev_cdet(N: int, characteristic: int = 0) -> SSFamily:
    """S_1..S_N in V^{-N}(gl_N) from the column determinant.

    Built over Q from integer words, then reduced when a prime is given.
    """
    spec = build_classical("gl", N, 0)
    module = VacuumModule(spec, -N)
    words = cdet_words(N)
    vectors = []
    for i in range(1, N + 1):
        v = module.zero()
        for (core, ntau), c in sorted(words.items()):
            if ntau != N - i:
                continue
            # apply the word to |0>, rightmost letter first
            ops = [(r * N + col, m) for _, r, col, m in core]
            v = v + module.monomial_state(ops, c)
        vectors.append(v)
    fam = SSFamily(spec, module, vectors, "cdet", list(spec.degrees))
    fam.scalars = normalisation_scalars(fam)
    if characteristic:
        return reduce_family(fam, characteristic)
    return fam


def casimir_family(family: str, N: int, characteristic: int = 0) -> SSFamily:
    """The quadratic Segal-Sugawara vector alone, built over Q and reduced."""
    if family == "gl":
        raise UnsupportedFamily("gl uses the column-determinant family")
    spec = build_classical(family, N, 0)
    module = VacuumModule(spec, spec.critical_level())
    fam = SSFamily(spec, module, [casimir_vector(spec, module=module)],
                   "casimir", [spec.degrees[0]])
    fam.scalars = normalisation_scalars(fam)
    if characteristic:
        return reduce_family(fam, characteristic)
    return fam


def build_family(family: str, N: int, characteristic: int = 0) -> SSFamily:
    if family == "gl":
        return molev_cdet(N, characteristic)
    return casimir_family(family, N, characteristic)


def reduce_family(fam: SSFamily, p: int) -> SSFamily:
    """Coefficient-wise reduction of a characteristic-0 family modulo p."""
    if fam.spec.p:
        raise ValueError("family is already in positive characteristic")
    spec_p = build_classical(fam.spec.family, fam.spec.N, p)
    level = fam.module.level
    module = VacuumModule(spec_p, reduce_rational(level, p)
                          if isinstance(level, Fraction) else level % p,
                          fam.module.weight_cap)
    vectors = []
    for v in fam.vectors:
        terms = {}
        for mono, c in v.sorted_terms():
            try:
                terms[mono] = reduce_rational(c, p)
            except DenominatorDivisibleByP as exc:
                raise DenominatorDivisibleByP(
                    c, p, witness=[[i, -n] for n, i in mono]) from exc
        vectors.append(VState(module, terms))
    red = SSFamily(spec_p, module, vectors, fam.provenance, list(fam.degrees),
                   [_reduce_scalar(s, p) for s in fam.scalars], fam)
    return red


def _reduce_scalar(s, p):
    if s is None:
        return None
    return reduce_rational(s, p) if isinstance(s, Fraction) else s % p


def normalisation_scalars(fam: SSFamily) -> list:
    """c_i with symbol(S_i) = c_i P_i, or None when not proportional."""
    out = []
    for i, v in enumerate(fam.vectors, start=1):
        out.append(proportionality(v.module.symbol(v),
                                   build_invariant_P(fam.spec, i),
                                   fam.spec.field))
    return out


def proportionality(a: DiffPoly, b: DiffPoly, f: Field):
    """c with a = c b, or None."""
    if b.is_zero():
        return None
    mono, bc = b.sorted_terms()[0]
    c = f.div(a.coefficient(mono), bc)
    if not c or a != b.scale(c):
        return None
    return c


def verify_family(fam: SSFamily, jmax: int = 2) -> Report:
    """Centrality and symbol checks for S_{i,-j}, j <= jmax."""
    spec = fam.spec
    rep = Report("sugawara-family", {
        "family": spec.family, "size": spec.N, "characteristic": spec.p,
        "level": fam.level, "provenance": fam.provenance, "jmax": jmax})
    rep.check("level_is_critical", fam.module.critical, level=fam.level)
    for i, v in enumerate(fam.vectors, start=1):
        rep.check(f"S{i}_weight_{fam.degrees[i - 1]}",
                  v.weights() == {fam.degrees[i - 1]},
                  weights=sorted(v.weights()))
        c = fam.scalars[i - 1] if i - 1 < len(fam.scalars) else None
        rep.check(f"S{i}_symbol_proportional_to_P", c is not None, scalar=c)
        for j in range(1, jmax + 1):
            s = fam.derived(i, j)
            w = fam.module.central_witness(s)
            rep.check(f"S{i}_{j}_central", w is None,
                      witness=None if w is None else
                      {"basis": spec.names[w[0]], "mode": w[1]})
            if c is not None:
                P = P_series(spec, i, j)
                rep.check(f"S{i}_{j}_symbol", fam.module.symbol(s) == P.scale(c),
                          scalar=c)
    return rep


def predicted_centre_dimensions(spec: LieAlgebraSpec, p: int, d: int,
                                degrees=None) -> list[int]:
    """Restricted monomials in S_{i,-j} (weight d_i + j - 1, exponents < p)
    times monomials in the p-centre generators (dim g of weight p j)."""
    degrees = spec.degrees if degrees is None else degrees
    factors = []
    for deg in degrees:
        for w in range(deg, d + 1):
            factors.append((p * w if p else None, w))
    if p:
        for j in range(1, d // p + 1):
            factors += [(None, p * j)] * spec.dim
    return series_product(factors, d)
