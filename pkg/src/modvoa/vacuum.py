"""The vacuum module V^k(g) with exact PBW straightening.

States are sparse combinations of canonical PBW monomials. A monomial is a
tuple of ``(n, i)`` pairs meaning the creation operator x^i_{-n} (n >= 1),
sorted ascending, i.e. leftmost operator has the smallest |mode| and ties
are broken by basis index. The vacuum is the empty tuple.

All operator results are memoised per module on ``(operator, monomial)``.
"""

from __future__ import annotations

import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from .diffpoly import DiffPoly
from .errors import CapacityExceeded, CharacteristicMismatch
from .linalg import Echelon
from .liealg import LieAlgebraSpec
from .scalars import Field, Scalar

DEFAULT_WEIGHT_CAP = 24
MAX_BASIS = 50000


def mono_weight(m) -> int:
    return sum(n for n, _ in m)


def pbw_basis(dim: int, weight: int) -> list:
    """Canonical PBW monomials of the given weight, in lexicographic order."""
    out = []

    def rec(prefix, lo, remaining):
        if remaining == 0:
            out.append(tuple(prefix))
            return
        n0, i0 = lo
        for n in range(n0, remaining + 1):
            for i in range(i0 if n == n0 else 0, dim):
                prefix.append((n, i))
                rec(prefix, (n, i), remaining - n)
                prefix.pop()

    rec([], (1, 0), weight)
    return out


def pbw_dimension(dim: int, weight: int) -> int:
    """Coefficient of q^weight in prod_n (1 - q^n)^(-dim)."""
    series = [1] + [0] * weight
    for n in range(1, weight + 1):
        for _ in range(dim):
            for w in range(n, weight + 1):
                series[w] += series[w - n]
    return series[weight]


class VState:
    """An element of V^k(g): canonical monomial -> raw coefficient."""

    __slots__ = ("module", "terms")

    def __init__(self, module: "VacuumModule", terms=None):
        self.module = module
        norm = module.field.norm
        self.terms = {m: norm(c) for m, c in (terms or {}).items() if norm(c)}

    @classmethod
    def _raw(cls, module, terms):
        v = cls.__new__(cls)
        v.module = module
        v.terms = terms
        return v

    def _check(self, other):
        if not isinstance(other, VState):
            raise TypeError("expected a VState")
        if other.module.field != self.module.field:
            raise CharacteristicMismatch(
                f"{self.module.field} vs {other.module.field}")
        return other

    def __add__(self, other):
        other = self._check(other)
        return VState._raw(self.module,
                           _combine(self.terms, other.terms, 1,
                                    self.module.field))

    def __sub__(self, other):
        other = self._check(other)
        return VState._raw(self.module,
                           _combine(self.terms, other.terms, -1,
                                    self.module.field))

    def __neg__(self):
        return self * -1

    def __mul__(self, c):
        f = self.module.field
        c = f(c)
        return VState._raw(self.module, {m: f.norm(v * c)
                                         for m, v in self.terms.items()
                                         if f.norm(v * c)})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, VState):
            return NotImplemented
        return self.module.field == other.module.field and \
            self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, mono):
        return self.terms.get(tuple(mono), 0)

    def weights(self) -> set:
        return {mono_weight(m) for m in self.terms}

    def max_weight(self) -> int:
        return max(self.weights(), default=0)

    def is_homogeneous(self) -> bool:
        return len(self.weights()) <= 1

    def pbw_length(self) -> int:
        return max((len(m) for m in self.terms), default=-1)

    def sorted_terms(self):
        return sorted(self.terms.items(),
                      key=lambda kv: (mono_weight(kv[0]), kv[0]))

    def to_document(self):
        return [[[[i, -n] for n, i in m],
                 str(c) if isinstance(c, Fraction) else c]
                for m, c in self.sorted_terms()]

    def __repr__(self):
        if not self.terms:
            return "0"
        names = self.module.spec.names
        parts = []
        for m, c in self.sorted_terms():
            ops = "".join(f"{names[i]}({-n})" for n, i in m)
            parts.append(f"{c}*{ops}|0>" if ops else f"{c}|0>")
        return " + ".join(parts)


def _combine(a: dict, b: dict, sign, f: Field) -> dict:
    out = dict(a)
    norm = f.norm
    for m, c in b.items():
        v = norm(out.get(m, 0) + sign * c)
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


class VacuumModule:
    """Workspace for V^k(g) at a fixed level with a hard weight cap."""

    def __init__(self, spec: LieAlgebraSpec, level, weight_cap=DEFAULT_WEIGHT_CAP):
        self.spec = spec
        self.field = spec.field
        if isinstance(level, Scalar) and level.characteristic != spec.p:
            raise CharacteristicMismatch(
                f"level in char {level.characteristic}, algebra in char {spec.p}")
        self.level = self.field(level)
        self.weight_cap = weight_cap
        self.dim = spec.dim
        self._br = spec.bracket
        self._form = spec.form
        self._create_memo: dict = {}
        self._ann_memo: dict = {}
        self._prod_memo: dict = {}
        self._trans_memo: dict = {}

    def __getstate__(self):
        return {"spec": self.spec, "level": self.level,
                "weight_cap": self.weight_cap}

    def __setstate__(self, st):
        self.__init__(st["spec"], st["level"], st["weight_cap"])

    @property
    def critical(self) -> bool:
        return self.field.norm(self.level + self.spec.dual_coxeter) == 0

    # -- states -------------------------------------------------------------

    def vacuum(self) -> VState:
        return VState._raw(self, {(): 1})

    def zero(self) -> VState:
        return VState._raw(self, {})

    def state(self, terms) -> VState:
        return VState(self, {tuple(sorted(tuple(o) for o in m)): self.field(c)
                             for m, c in dict(terms).items()})

    def generator(self, i: int, n: int = 1) -> VState:
        """x^i_{-n}|0>."""
        return VState._raw(self, {((n, i),): 1})

    def monomial_state(self, ops, coeff=1) -> VState:
        """Apply creation operators right-to-left: ops = [(i, n), ...] means
        x^{i_1}_{-n_1} ... x^{i_m}_{-n_m}|0>, straightened."""
        v = self.vacuum()
        for i, n in reversed(list(ops)):
            v = self.apply_mode(i, -n, v)
        return v * coeff

    def _cap(self, w):
        if self.weight_cap is not None and w > self.weight_cap:
            raise CapacityExceeded(w, self.weight_cap)

    # -- straightening core -------------------------------------------------

    def _create(self, i: int, n: int, mono: tuple) -> dict:
        """x^i_{-n} applied to a canonical monomial, as a dict."""
        if not mono or (n, i) <= mono[0]:
            return {((n, i),) + mono: 1}
        key = (i, n, mono)
        memo = self._create_memo
        hit = memo.get(key)
        if hit is not None:
            return hit
        y = mono[0]
        n1, j = y
        rest = mono[1:]
        # every factor produced below is >= y, so y is simply prepended
        out = {(y,) + m2: c for m2, c in self._create(i, n, rest).items()}
        for k, c in self._br[i][j]:
            for m2, c2 in self._create(k, n + n1, rest).items():
                out[m2] = out.get(m2, 0) + c * c2
        out = self._clean(out)
        memo[key] = out
        return out

    def _annihilate(self, i: int, m: int, mono: tuple) -> dict:
        """x^i_m (m >= 0) applied to a canonical monomial."""
        if not mono:
            return {}
        key = (i, m, mono)
        memo = self._ann_memo
        hit = memo.get(key)
        if hit is not None:
            return hit
        if m > 0 and m > mono_weight(mono):
            memo[key] = {}
            return memo[key]
        n1, j = mono[0]
        rest = mono[1:]
        out: dict = {}
        for m2, c in self._annihilate(i, m, rest).items():
            for m3, c3 in self._create(j, n1, m2).items():
                out[m3] = out.get(m3, 0) + c * c3
        d = m - n1
        for k, c in self._br[i][j]:
            part = self._annihilate(k, d, rest) if d >= 0 \
                else self._create(k, -d, rest)
            for m2, c2 in part.items():
                out[m2] = out.get(m2, 0) + c * c2
        if d == 0 and m:
            cent = self._form[i][j]
            if cent:
                out[rest] = out.get(rest, 0) + m * cent * self.level
        out = self._clean(out)
        memo[key] = out
        return out

    def _op(self, i: int, m: int, mono: tuple) -> dict:
        if m < 0:
            return self._create(i, -m, mono)
        return self._annihilate(i, m, mono)

    def _clean(self, d: dict) -> dict:
        p = self.field.p
        if p:
            return {k: v % p for k, v in d.items() if v % p}
        norm = self.field.norm
        return {k: norm(v) for k, v in d.items() if v}

    def _apply_terms(self, i, m, terms: dict) -> dict:
        out: dict = {}
        for mono, c in terms.items():
            for m2, c2 in self._op(i, m, mono).items():
                out[m2] = out.get(m2, 0) + c * c2
        return self._clean(out)

    # -- public operations --------------------------------------------------

    def apply_mode(self, i: int, n: int, v: VState) -> VState:
        """The action of x^i_n = x^i t^n on a state."""
        self._own(v)
        self._cap(v.max_weight() - n)
        return VState._raw(self, self._apply_terms(i, n, v.terms))

    def _own(self, v: VState):
        if v.module is not self:
            if v.module.field != self.field:
                raise CharacteristicMismatch(
                    f"{v.module.field} vs {self.field}")

    def _translate(self, k: int, mono: tuple) -> dict:
        if k == 0:
            return {mono: 1}
        if not mono:
            return {}
        key = (k, mono)
        hit = self._trans_memo.get(key)
        if hit is not None:
            return hit
        n1, i = mono[0]
        rest = mono[1:]
        binom = self.field.binom
        out: dict = {}
        for j in range(k + 1):
            coef = binom(n1 - 1 + j, j)
            if not coef:
                continue
            for m2, c in self._translate(k - j, rest).items():
                for m3, c3 in self._create(i, n1 + j, m2).items():
                    out[m3] = out.get(m3, 0) + coef * c * c3
        out = self._clean(out)
        self._trans_memo[key] = out
        return out

    def translate(self, k: int, v: VState) -> VState:
        """Divided-power translation T^(k)."""
        if k < 0:
            raise ValueError("translation order must be nonnegative")
        self._own(v)
        self._cap(v.max_weight() + k)
        out: dict = {}
        for mono, c in v.terms.items():
            for m2, c2 in self._translate(k, mono).items():
                out[m2] = out.get(m2, 0) + c * c2
        return VState._raw(self, self._clean(out))

    def _prod(self, amono: tuple, n: int, bmono: tuple, wa: int,
              wb: int) -> dict:
        """(amono)_(n) applied to bmono; wa, wb are their weights."""
        if not amono:
            return {bmono: 1} if n == -1 else {}
        if n >= wa + wb:
            return {}
        key = (amono, n, bmono)
        memo = self._prod_memo
        hit = memo.get(key)
        if hit is not None:
            return hit
        nx, i = amono[0]
        c = amono[1:]
        wc = wa - nx
        nn = nx - 1
        binom = self.field.binom
        create = self._create
        prod = self._prod
        out = defaultdict(int)
        # creation part of the derivative field times c(z)
        for j in range(max(0, wc + wb - n)):
            coef = binom(nn + j, j)
            if not coef:
                continue
            for m2, c2 in prod(c, n + j, bmono, wc, wb).items():
                c2 *= coef
                for m3, c3 in create(i, nn + 1 + j, m2).items():
                    out[m3] += c2 * c3
        # c(z) times annihilation part
        sign = -1 if nn % 2 else 1
        for j in range(wb + 1):
            coef = sign * binom(nn + j, j)
            if not coef:
                continue
            for m2, c2 in self._annihilate(i, j, bmono).items():
                c2 *= coef
                for m3, c3 in prod(c, n - nn - 1 - j, m2, wc, wb - j).items():
                    out[m3] += c2 * c3
        out = self._clean(out)
        memo[key] = out
        return out

    def _apply_state(self, i: int, m: int, terms: dict) -> dict:
        out: dict = {}
        get = out.get
        op = self._create if m < 0 else self._annihilate
        mm = -m if m < 0 else m
        for mono, c in terms.items():
            for m2, c2 in op(i, mm, mono).items():
                out[m2] = get(m2, 0) + c * c2
        return self._clean(out)

    def _prod_state(self, amono, n, word, ctx) -> dict:
        """(amono)_(n) applied to the state ctx.states[word].

        ``word`` records the annihilation modes already applied to the
        original right-hand state, so intermediate states are shared.
        """
        B, wb = ctx.states[word]
        if not amono:
            return B if n == -1 else {}
        wa = ctx.weights[amono]
        if n >= wa + wb or not B:
            return {}
        key = (amono, n, word)
        hit = ctx.memo.get(key)
        if hit is not None:
            return hit
        nx, i = amono[0]
        c = amono[1:]
        wc = wa - nx
        nn = nx - 1
        binom = self.field.binom
        out: dict = {}
        get = out.get
        for j in range(max(0, wc + wb - n)):
            coef = binom(nn + j, j)
            if not coef:
                continue
            inner = self._prod_state(c, n + j, word, ctx)
            if not inner:
                continue
            for m3, c3 in self._apply_state(i, -(nn + 1 + j), inner).items():
                out[m3] = get(m3, 0) + coef * c3
        sign = -1 if nn % 2 else 1
        for j in range(wb + 1):
            coef = sign * binom(nn + j, j)
            if not coef:
                continue
            w2 = word + ((i, j),)
            if w2 not in ctx.states:
                st = self._apply_state(i, j, B)
                ctx.states[w2] = (st, max((mono_weight(x) for x in st),
                                          default=0))
            for m3, c3 in self._prod_state(c, n - nn - 1 - j, w2, ctx).items():
                out[m3] = get(m3, 0) + coef * c3
        out = self._clean(out)
        ctx.memo[key] = out
        return out

    def nth_product_by_states(self, a: VState, n: int, b: VState) -> VState:
        """Same as :meth:`nth_product`, computed on whole states.

        The right-hand state is acted on by the annihilation parts of the
        fields of ``a`` first, so identical intermediate states are
        straightened once; no memo outlives the call. Kept as an
        independent route for cross-checks.
        """
        self._own(a)
        self._own(b)
        if not a.terms or not b.terms:
            return self.zero()
        self._cap(a.max_weight() + b.max_weight() - n - 1)
        ctx = _ProductContext(b.terms, b.max_weight())
        out: dict = {}
        for am, ac in a.terms.items():
            for k in range(len(am) + 1):
                ctx.weights.setdefault(am[k:], mono_weight(am[k:]))
            for m2, c2 in self._prod_state(am, n, (), ctx).items():
                out[m2] = out.get(m2, 0) + ac * c2
        return VState._raw(self, self._clean(out))

    def nth_product(self, a: VState, n: int, b: VState) -> VState:
        """a_(n) b, the coefficient of z^(-n-1) in Y(a, z) b.

        Expanded monomial by monomial; results are memoised per module.
        """
        self._own(a)
        self._own(b)
        if a.terms and b.terms:
            self._cap(a.max_weight() + b.max_weight() - n - 1)
        out = defaultdict(int)
        bterms = [(bm, bc, mono_weight(bm)) for bm, bc in b.terms.items()]
        for am, ac in a.terms.items():
            wam = mono_weight(am)
            for bm, bc, wbm in bterms:
                abc = ac * bc
                for m2, c2 in self._prod(am, n, bm, wam, wbm).items():
                    out[m2] += abc * c2
        return VState._raw(self, self._clean(out))

    def borcherds_residual(self, a: VState, b: VState, c: VState,
                           m: int, n: int, k: int) -> VState:
        """LHS - RHS of the Borcherds identity applied to c."""
        f = self.field
        binom = f.binom
        wa, wb, wc = a.max_weight(), b.max_weight(), c.max_weight()
        lhs = self.zero()
        sign_n = -1 if n % 2 else 1
        # b_(k+j) c = 0 once k + j >= wb + wc; a_(m+j) c = 0 once m + j >= wa + wc
        jmax = max(wb + wc - k, wa + wc - m, 0)
        if n >= 0:
            jmax = min(jmax, n + 1)
        for j in range(jmax):
            coef = binom(n, j)
            if not coef:
                continue
            sj = -coef if j % 2 else coef
            t1 = self.nth_product(a, m + n - j, self.nth_product(b, k + j, c))
            t2 = self.nth_product(b, n + k - j, self.nth_product(a, m + j, c))
            lhs = lhs + (t1 - t2 * sign_n) * sj
        rhs = self.zero()
        jmax = max(wa + wb - n, 0)
        if m >= 0:
            jmax = min(jmax, m + 1)
        for j in range(jmax):
            coef = binom(m, j)
            if not coef:
                continue
            rhs = rhs + self.nth_product(self.nth_product(a, n + j, b),
                                         m + k - j, c) * coef
        return lhs - rhs

    def is_central(self, v: VState) -> bool:
        """True iff x_n v = 0 for every basis x and 0 <= n <= weight(v).

        Modes n > weight(v) lower weight below zero and act as zero, so the
        finite check is complete.
        """
        return self.central_witness(v) is None

    def central_witness(self, v: VState):
        """First (basis index, mode) with x_n v != 0, or None."""
        w = v.max_weight()
        for n in range(w + 1):
            for i in range(self.dim):
                if self._apply_terms(i, n, v.terms):
                    return (i, n)
        return None

    def pcentre_state(self, i: int, j: int) -> VState:
        """(x^i_{-j})^p|0> - (x^i^[p])_{-pj}|0>."""
        p = self.field.p
        if not p:
            raise ValueError("the p-centre needs positive characteristic")
        if j < 1:
            raise ValueError("j must be positive")
        self._cap(p * j)
        v = self.vacuum()
        for _ in range(p):
            v = self.apply_mode(i, -j, v)
        xp = self.spec.restricted[i]
        corr = VState._raw(self, {((p * j, k),): c for k, c in xp.items()})
        return v - corr

    def symbol(self, v: VState) -> DiffPoly:
        """Top PBW-length part, as a polynomial in the jet variables."""
        return symbol(v)

    # -- centre solver ------------------------------------------------------

    def weight_space_images(self, monos) -> list[dict]:
        """For each basis monomial of weight w, the concatenated images
        under x_n for all basis x and 0 <= n <= w, keyed (n, x, out_mono)."""
        cols = []
        for mono in monos:
            w = mono_weight(mono)
            col = {}
            for n in range(w + 1):
                for i in range(self.dim):
                    for m2, c in self._annihilate(i, n, mono).items():
                        col[(n, i, m2)] = c
            cols.append(col)
        return cols

    def centre_dimension(self, weight_cap: int, workers: int = 1,
                         max_basis: int | None = None) -> list[int]:
        """Per-weight dimensions of the g[[t]]-invariants, weights 0..cap."""
        dims = []
        for w in range(weight_cap + 1):
            dims.append(self.centre_dimension_at(w, workers, max_basis))
        return dims

    def centre_dimension_at(self, w: int, workers: int = 1,
                            max_basis: int | None = None) -> int:
        if max_basis is None:
            max_basis = MAX_BASIS
        if pbw_dimension(self.dim, w) > max_basis:
            raise CapacityExceeded(w, f"{max_basis} basis states")
        self._cap(w)
        monos = pbw_basis(self.dim, w)
        cols = _parallel_images(self, monos, workers)
        ech = Echelon(self.field)
        for col in cols:
            ech.add(col)
        return len(monos) - ech.rank


class _ProductContext:
    __slots__ = ("states", "weights", "memo")

    def __init__(self, terms, weight):
        self.states = {(): (terms, weight)}
        self.weights = {}
        self.memo = {}


def _images_chunk(args):
    module, monos = args
    return module.weight_space_images(monos)


def _parallel_images(module: VacuumModule, monos, workers: int):
    workers = resolve_workers(workers)
    if workers <= 1 or len(monos) < 2 * workers:
        return module.weight_space_images(monos)
    size = -(-len(monos) // workers)
    chunks = [monos[k:k + size] for k in range(0, len(monos), size)]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        parts = list(ex.map(_images_chunk, [(module, c) for c in chunks]))
    return [col for part in parts for col in part]


def resolve_workers(workers) -> int:
    if workers is None:
        workers = int(os.environ.get("MODVOA_WORKERS", "1"))
    return max(1, int(workers))


def symbol(v: VState) -> DiffPoly:
    """Leading PBW-length component as a commutative polynomial."""
    f = v.module.field
    top = v.pbw_length()
    terms = {}
    for mono, c in v.terms.items():
        if len(mono) != top:
            continue
        counts: dict = {}
        for n, i in mono:
            counts[(i, n)] = counts.get((i, n), 0) + 1
        key = tuple((i, n, e) for (i, n), e in sorted(counts.items()))
        terms[key] = c
    return DiffPoly(f, terms)
