"""Differential polynomials on the jet space of g*.

Variables are x^c_{-j} for a basis index ``c`` and depth ``j >= 1``; the
depth-1 variables are the coordinates on g* (identified with g through the
invariant form), deeper ones are their jets. Everything here is exact and
division-free apart from the 1/k! in exponentials of nilpotent
derivations, which only occur below the characteristic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from itertools import combinations, permutations

from .diffpoly import DiffPoly, mono_degree, mono_depth, mono_weight
from .errors import (CapacityExceeded, NilpotencyOrderTooLarge,
                     TruncationOverflow, UnsupportedFamily)
from .linalg import Echelon, dense_rank
from .liealg import (LieAlgebraSpec, dual_basis, mat_mul, mat_trace,
                     mat_unit, trace_form_matrix)
from .scalars import Field

MAX_MONOMIALS = 20000


# -- Hasse-Schmidt derivation ------------------------------------------------

def _derive_mono(k: int, mono: tuple, field: Field, memo: dict) -> dict:
    """d^(k) of a monomial as {monomial: coefficient} (no truncation)."""
    if k == 0:
        return {mono: 1}
    if not mono:
        return {}
    key = (k, mono)
    hit = memo.get(key)
    if hit is not None:
        return hit
    i, j, e = mono[0]
    rest = mono[1:] if e == 1 else ((i, j, e - 1),) + mono[1:]
    out: dict = {}
    for a in range(k + 1):
        c = field.binom(j - 1 + a, a)
        if not c:
            continue
        var = ((i, j + a, 1),)
        for m2, c2 in _derive_mono(k - a, rest, field, memo).items():
            m3 = _mono_mul(var, m2)
            out[m3] = out.get(m3, 0) + c * c2
    out = {m: field.norm(c) for m, c in out.items() if field.norm(c)}
    memo[key] = out
    return out


def _mono_mul(a, b):
    from .diffpoly import mono_mul
    return mono_mul(a, b)


_DERIVE_MEMO: dict = {}


def hasse_derive(k: int, f: DiffPoly) -> DiffPoly:
    """The divided-power derivation d^(k), with d^(k) x_{-j} = C(j-1+k, k) x_{-j-k}."""
    if k < 0:
        raise ValueError("order must be nonnegative")
    field = f.field
    memo = _DERIVE_MEMO.setdefault(field.p, {})
    out: dict = {}
    for m, c in f.terms.items():
        for m2, c2 in _derive_mono(k, m, field, memo).items():
            out[m2] = out.get(m2, 0) + c * c2
    res = DiffPoly(field, out, f.trunc)
    if f.trunc is not None and res.depth() > f.trunc + 1:
        raise TruncationOverflow(
            f"d^({k}) reaches depth {res.depth()} beyond truncation {f.trunc}")
    return res


def with_trunc(f: DiffPoly, trunc) -> DiffPoly:
    if trunc is not None and f.depth() > trunc + 1:
        raise TruncationOverflow(f"depth {f.depth()} beyond truncation {trunc}")
    return DiffPoly(f.field, f.terms, trunc)


# -- invariant polynomials ---------------------------------------------------

def trace_dictionary(spec: LieAlgebraSpec) -> list[list[dict]]:
    """For each matrix position (a, b), the element z of g with
    Tr(z y) = y_ab for all y in g, as basis coordinates.

    The coordinate function X_ab on g* then corresponds to the linear
    polynomial sum_c z_c x^c_{-1}.
    """
    f = spec.field
    N = spec.N
    gram = trace_form_matrix(spec)
    dual = dual_basis(spec, gram)
    out = []
    for a in range(N):
        row = []
        for b in range(N):
            eba = mat_unit(N, b, a)
            z: dict = {}
            for c in range(spec.dim):
                t = mat_trace(mat_mul(eba, spec.basis[c], f), f)
                if t:
                    for d, v in dual[c].items():
                        z[d] = f.norm(z.get(d, 0) + t * v)
            row.append({d: v for d, v in z.items() if v})
        out.append(row)
    return out


def coordinate_matrix(spec: LieAlgebraSpec, depth: int = 1, trunc=None):
    """The generic element X of g* as an N x N matrix of linear DiffPolys."""
    f = spec.field
    out = []
    for row in trace_dictionary(spec):
        out.append([DiffPoly(f, {((d, depth, 1),): v for d, v in z.items()},
                             trunc) for z in row])
    return out


def _det(mat, field, trunc=None) -> DiffPoly:
    n = len(mat)
    total = DiffPoly(field, {}, trunc)
    for perm in permutations(range(n)):
        sign = _perm_sign(perm)
        term = DiffPoly.constant(field, sign, trunc)
        for r in range(n):
            term = term * mat[r][perm[r]]
            if term.is_zero():
                break
        total = total + term
    return total


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def elementary_invariant(mat, d: int, field: Field, trunc=None) -> DiffPoly:
    """Sum of principal d x d minors (e_d of the eigenvalues)."""
    n = len(mat)
    total = DiffPoly(field, {}, trunc)
    for rows in combinations(range(n), d):
        sub = [[mat[r][c] for c in rows] for r in rows]
        total = total + _det(sub, field, trunc)
    return total


def pfaffian(mat, field: Field, trunc=None) -> DiffPoly:
    """Pfaffian of an antisymmetric matrix by the perfect-matching sum."""
    n = len(mat)
    if n % 2:
        return DiffPoly(field, {}, trunc)

    def rec(idx):
        if not idx:
            return DiffPoly.constant(field, 1, trunc)
        first = idx[0]
        total = DiffPoly(field, {}, trunc)
        for pos in range(1, len(idx)):
            partner = idx[pos]
            entry = mat[first][partner]
            if entry.is_zero():
                continue
            rest = idx[1:pos] + idx[pos + 1:]
            sign = -1 if (pos - 1) % 2 else 1
            total = total + (entry * rec(rest)).scale(sign)
        return total

    return rec(tuple(range(n)))


def build_invariant_P(spec: LieAlgebraSpec, i: int, trunc=None) -> DiffPoly:
    """The i-th basic invariant (1-based) in the depth-1 variables.

    P of degree d is minus the coefficient of lambda^(N-d) in det(lambda - X),
    i.e. (-1)^(d+1) e_d(X). In even orthogonal type the last generator is
    the Pfaffian of J X, J the antidiagonal form matrix.
    """
    if spec.family not in ("gl", "sl", "sp", "so"):
        raise UnsupportedFamily(spec.family)
    if not 1 <= i <= spec.rank:
        raise ValueError(f"invariant index {i} outside 1..{spec.rank}")
    f = spec.field
    d = spec.degrees[i - 1]
    X = coordinate_matrix(spec, 1, trunc)
    if spec.family == "so" and spec.N % 2 == 0 and i == spec.rank:
        N = spec.N
        JX = [[X[N - 1 - r][c] for c in range(N)] for r in range(N)]
        return pfaffian(JX, f, trunc)
    e = elementary_invariant(X, d, f, trunc)
    return e if d % 2 else e.scale(-1)


def P_series(spec: LieAlgebraSpec, i: int, j: int, trunc=None) -> DiffPoly:
    """P_{i,-j} = d^(j-1) P_i."""
    if j < 1:
        raise ValueError("j must be positive")
    if trunc is not None and j > trunc + 1:
        raise TruncationOverflow(f"P_(-{j}) beyond truncation {trunc}")
    return hasse_derive(j - 1, build_invariant_P(spec, i, trunc))


# -- coadjoint current action ------------------------------------------------

def _apply_derivation(f: DiffPoly, image) -> DiffPoly:
    """Extend ``image(i, j) -> {monomial: c} or None`` by the Leibniz rule."""
    field = f.field
    out: dict = {}
    cache: dict = {}
    for m, c in f.terms.items():
        for pos, (i, j, e) in enumerate(m):
            key = (i, j)
            if key not in cache:
                cache[key] = image(i, j)
            img = cache[key]
            if not img:
                continue
            rest = m[:pos] + (((i, j, e - 1),) if e > 1 else ()) + m[pos + 1:]
            for vm, vc in img.items():
                m2 = _mono_mul(rest, vm)
                out[m2] = out.get(m2, 0) + e * c * vc
    return DiffPoly(field, out, f.trunc)


def coadjoint_derivation(spec: LieAlgebraSpec, x: int, m: int,
                         f: DiffPoly) -> DiffPoly:
    """Action of x t^m: y_{-j} -> [x, y]_{m-j} if m < j, else 0 (no central term)."""
    if m < 0:
        raise ValueError("mode must be nonnegative")

    def image(i, j):
        if m >= j:
            return None
        return {((k, j - m, 1),): c for k, c in spec.bracket[x][i]}

    return _apply_derivation(f, image)


def _linear_image(spec: LieAlgebraSpec, alpha: int, m: int, i: int, j: int):
    """exp-coefficients of a variable: list over k of {(idx, depth): coeff}
    for the term D^k(x^i_{-j}) / k!  (D = action of x_alpha t^m)."""
    f = spec.field
    p = f.p
    terms = []
    cur = {(i, j): 1}
    k = 0
    while cur:
        terms.append(cur)
        k += 1
        nxt: dict = {}
        for (a, depth), c in cur.items():
            if m >= depth:
                continue
            for b, cb in spec.bracket[alpha][a]:
                key = (b, depth - m)
                nxt[key] = nxt.get(key, 0) + c * cb
        if any(f.norm(v) for v in nxt.values()) and p and k >= p:
            raise NilpotencyOrderTooLarge(
                f"ad({spec.names[alpha]})^{k} nonzero with p={p}")
        inv_k = f.inv(k)
        cur = {key: f.norm(v * inv_k) for key, v in nxt.items() if f.norm(v)}
    return terms


def one_param_action(spec: LieAlgebraSpec, alpha: int, m: int, s,
                     f: DiffPoly) -> DiffPoly:
    """Substitute each variable by exp(s D) of it, D the action of x_alpha t^m."""
    fld = spec.field
    s = fld(s)
    images = {}
    for (i, j) in f.variables():
        img: dict = {}
        spow = 1
        for part in _linear_image(spec, alpha, m, i, j):
            for (b, depth), c in part.items():
                key = ((b, depth, 1),)
                img[key] = img.get(key, 0) + c * spow
            spow = fld.norm(spow * s)
        images[(i, j)] = DiffPoly(fld, img, f.trunc)
    return f.substitute(images)


FORMAL = -1  # basis index reserved for the formal group parameter


def one_param_action_formal(spec: LieAlgebraSpec, alpha: int, m: int,
                            f: DiffPoly) -> dict:
    """exp(s D) f with s formal; returns {power of s: DiffPoly coefficient}."""
    fld = spec.field
    images = {}
    for (i, j) in f.variables():
        img: dict = {}
        for k, part in enumerate(_linear_image(spec, alpha, m, i, j)):
            for (b, depth), c in part.items():
                key = (((FORMAL, 1, k),) if k else ()) + ((b, depth, 1),)
                img[key] = img.get(key, 0) + c
        images[(i, j)] = DiffPoly(fld, img, None)
    g = DiffPoly(fld, f.terms, None).substitute(images)
    out: dict = {}
    for mono, c in g.terms.items():
        if mono and mono[0][0] == FORMAL:
            k, rest = mono[0][2], mono[1:]
        else:
            k, rest = 0, mono
        out.setdefault(k, {})[rest] = c
    return {k: DiffPoly(fld, t, f.trunc) for k, t in sorted(out.items())}


# -- Jacobian criterion ------------------------------------------------------

def _all_P(spec, m):
    return {(i, j): P_series(spec, i, j, m)
            for i in range(1, spec.rank + 1) for j in range(1, m + 2)}


def jacobian_matrix(spec: LieAlgebraSpec, m: int, point: dict):
    """Rows (c, s) for the variable x^c_{-s}, columns (i, j) for P_{i,-j}."""
    Ps = _all_P(spec, m)
    rows = [(c, s) for s in range(1, m + 2) for c in range(spec.dim)]
    cols = sorted(Ps, key=lambda ij: (ij[1], ij[0]))
    partials = {(c, s, ij): Ps[ij].diff(c, s) for c, s in rows for ij in cols}
    mat = [[partials[(c, s, ij)].evaluate(point) for ij in cols]
           for c, s in rows]
    return rows, cols, mat, partials


def jacobian_rank(spec: LieAlgebraSpec, m: int, point: dict) -> int:
    _, _, mat, _ = jacobian_matrix(spec, m, point)
    return dense_rank(mat, spec.field)


def jacobian_block_structure(spec: LieAlgebraSpec, m: int):
    """Check dP_{i,-j}/dx^c_{-s} = 0 for s > j and that the diagonal blocks
    (s = j) equal dP_i/dx^c_{-1} for every j. Returns (ok, witness)."""
    Ps = _all_P(spec, m)
    for (i, j), P in sorted(Ps.items()):
        base = Ps[(i, 1)]
        for c in range(spec.dim):
            for s in range(1, m + 2):
                d = P.diff(c, s)
                if s > j and not d.is_zero():
                    return False, {"P": [i, j], "variable": [c, s]}
                if s == j and d != base.diff(c, 1):
                    return False, {"P": [i, j], "variable": [c, s],
                                   "diagonal": True}
    return True, None


def rewriteders_residual(spec: LieAlgebraSpec, P: DiffPoly, i: int, s: int,
                         m: int) -> DiffPoly:
    """d/dx^i_{-1-s} d^(m) P  minus  d^(m-s) dP/dx^i_{-1} (or minus 0 if m < s)."""
    lhs = hasse_derive(m, DiffPoly(P.field, P.terms, None)).diff(i, 1 + s)
    if m < s:
        return lhs
    rhs = hasse_derive(m - s, DiffPoly(P.field, P.terms, None).diff(i, 1))
    return lhs - rhs


# -- jet ideals --------------------------------------------------------------

@dataclass
class JetIdeal:
    generators: list
    trunc: int
    seeds: list = dc_field(default_factory=list)

    def to_document(self):
        return {"truncation": self.trunc,
                "generators": [g.to_document() for g in self.generators]}


def jet_ideal(gens, m: int) -> JetIdeal:
    """Generators d^(i) a for a in gens and 0 <= i <= m."""
    out = []
    for g in gens:
        g0 = DiffPoly(g.field, g.terms, m)
        for i in range(m + 1):
            out.append(hasse_derive(i, g0))
    return JetIdeal(out, m, list(gens))


# -- invariant ring dimensions ----------------------------------------------

def jet_variables(spec: LieAlgebraSpec, m: int) -> list:
    return [(c, j) for j in range(1, m + 2) for c in range(spec.dim)]


def monomials_of_degree(variables, degree: int) -> list:
    out = []
    n = len(variables)

    def rec(start, left, acc):
        if left == 0:
            out.append(tuple(sorted((i, j, e) for (i, j), e in acc.items())))
            return
        for k in range(start, n):
            v = variables[k]
            acc[v] = acc.get(v, 0) + 1
            rec(k, left - 1, acc)
            acc[v] -= 1
            if not acc[v]:
                del acc[v]

    rec(0, degree, {})
    return sorted(out)


def _count_monomials(nvars: int, degree: int) -> int:
    from math import comb
    return comb(nvars + degree - 1, degree)


MODES = ("lie", "group", "group-formal", "pquot")


def _invariant_basis(spec, m, degree, mode, ech_track=True):
    """Kernel basis (list of DiffPoly) of the invariance conditions in one degree."""
    fld = spec.field
    variables = jet_variables(spec, m)
    if _count_monomials(len(variables), degree) > MAX_MONOMIALS:
        raise CapacityExceeded(degree, f"{MAX_MONOMIALS} monomials")
    monos = monomials_of_degree(variables, degree)
    cols = []
    for mono in monos:
        f = DiffPoly(fld, {mono: 1}, m)
        col: dict = {}
        if mode in ("lie", "pquot"):
            for x in range(spec.dim):
                for mm in range(m + 1):
                    for k, c in coadjoint_derivation(spec, x, mm, f).terms.items():
                        col[(x, mm, k)] = c
        elif mode == "group":
            if not fld.p:
                raise ValueError("group mode needs a finite field; use group-formal")
            for _, alpha in spec.root_vectors:
                for mm in range(m + 1):
                    for s in range(1, fld.p):
                        g = one_param_action(spec, alpha, mm, s, f) - f
                        for k, c in g.terms.items():
                            col[(alpha, mm, s, k)] = c
        elif mode == "group-formal":
            for _, alpha in spec.root_vectors:
                for mm in range(m + 1):
                    for k, g in one_param_action_formal(spec, alpha, mm, f).items():
                        if k == 0:
                            continue
                        for mk, c in g.terms.items():
                            col[(alpha, mm, k, mk)] = c
        else:
            raise ValueError(f"unknown mode {mode!r}")
        cols.append(col)
    ech = Echelon(fld, track=True)
    for col in cols:
        ech.add(col)
    basis = [DiffPoly(fld, {monos[k]: v for k, v in vec.items()}, m)
             for vec in ech.kernel]
    return basis


def invariant_ring_dimensions(spec: LieAlgebraSpec, m: int, d: int,
                              mode: str = "lie") -> list[int]:
    """Per-degree dimensions 0..d of the invariants in k[J_m g*]."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if mode != "pquot":
        return [len(_invariant_basis(spec, m, e, mode)) for e in range(d + 1)]
    p = spec.field.p
    if not p:
        raise ValueError("pquot mode needs positive characteristic")
    fld = spec.field
    bases = [_invariant_basis(spec, m, e, "lie") for e in range(d + 1)]
    variables = jet_variables(spec, m)
    dims = []
    for e in range(d + 1):
        ech = Echelon(fld)
        for q in range(1, e // p + 1):
            for mono in monomials_of_degree(variables, q):
                power = tuple((i, j, k * p) for i, j, k in mono)
                for b in bases[e - p * q]:
                    ech.add((b * DiffPoly(fld, {power: 1}, m)).terms)
        dims.append(len(bases[e]) - ech.rank)
    return dims


def series_product(factors, d: int) -> list[int]:
    """Coefficients 0..d of prod (1 - t^a)/(1 - t^b) * prod (1 - t^c)^(-1).

    ``factors`` is a list of (numerator exponent or None, denominator exponent).
    """
    series = [1] + [0] * d
    for num, den in factors:
        for w in range(den, d + 1):
            series[w] += series[w - den]
        if num is not None:
            for w in range(d, num - 1, -1):
                series[w] -= series[w - num]
    return series


def predicted_jet_dimensions(spec: LieAlgebraSpec, m: int, d: int,
                             mode: str = "lie") -> list[int]:
    """Monomial counts in the P_{i,-j} (j <= m+1), restricted to exponents
    below p, times arbitrary p-th powers of the (m+1) dim g variables
    (the latter omitted in pquot mode and in characteristic 0)."""
    p = spec.field.p
    factors = []
    for deg in spec.degrees:
        for _ in range(m + 1):
            factors.append((p * deg if p else None, deg))
    if p and mode != "pquot":
        factors += [(None, p)] * ((m + 1) * spec.dim)
    return series_product(factors, d)


# -- sampling points ---------------------------------------------------------

def centralizer_dimension(spec: LieAlgebraSpec, y: dict) -> int:
    d = spec.dim
    cols = []
    for j in range(d):
        cols.append(spec.bracket_vec(y, {j: 1}))
    ech = Echelon(spec.field)
    for c in cols:
        ech.add(c)
    return d - ech.rank


def functional_of(spec: LieAlgebraSpec, y: dict) -> dict:
    """Depth-1 coordinates of kappa(y, .): x^c -> kappa(y, x_c)."""
    return {c: spec.kappa_vec(y, {c: 1}) for c in range(spec.dim)}


def principal_nilpotent(spec: LieAlgebraSpec) -> dict:
    if spec.family not in ("gl", "sl"):
        raise UnsupportedFamily("principal nilpotent only built for gl/sl")
    N = spec.N
    mat = [[1 if j == i + 1 else 0 for j in range(N)] for i in range(N)]
    return spec.coords(mat)


def regular_semisimple(spec: LieAlgebraSpec) -> dict | None:
    if spec.family not in ("gl", "sl"):
        return None
    N = spec.N
    vals = list(range(N))
    shift = sum(vals)
    f = spec.field
    if spec.family == "sl":
        # distinct diagonal entries summing to zero: 0..N-1 shifted
        vals = [N * v - shift for v in vals]
    mat = [[vals[i] if i == j else 0 for j in range(N)] for i in range(N)]
    mat = [[f.norm(x) for x in row] for row in mat]
    if len({mat[i][i] for i in range(N)}) < N:
        return None
    return spec.coords(mat)


def sample_regular_points(spec: LieAlgebraSpec, m: int, count: int,
                          rng: random.Random, max_tries: int = 2000) -> list:
    """Points of J_m g* whose depth-1 part is kappa(y, .) for a regular y.

    The first points use the principal nilpotent and a regular semisimple
    element when available; the rest draw y at random and keep it when its
    centralizer has dimension equal to the rank.
    """
    fld = spec.field
    span = fld.p if fld.p else 7
    ys = []
    for y in (principal_nilpotent(spec) if spec.family in ("gl", "sl") else None,
              regular_semisimple(spec)):
        if y is not None and centralizer_dimension(spec, y) == spec.rank:
            ys.append(y)
    tries = 0
    while len(ys) < count:
        tries += 1
        if tries > max_tries:
            raise RuntimeError("could not sample regular elements")
        y = {c: v for c in range(spec.dim)
             if (v := fld(rng.randrange(-span + 1, span)))}
        if centralizer_dimension(spec, y) == spec.rank:
            ys.append(y)
    points = []
    for y in ys[:count]:
        pt = {(c, 1): v for c, v in functional_of(spec, y).items() if v}
        for j in range(2, m + 2):
            for c in range(spec.dim):
                v = fld(rng.randrange(-span + 1, span))
                if v:
                    pt[(c, j)] = v
        points.append(pt)
    return points


def random_diffpoly(spec_or_field, nvars: int, depth: int, degree: int,
                    nterms: int, rng: random.Random, trunc=None) -> DiffPoly:
    """Random polynomial in x^c_{-j}, c < nvars, j <= depth, degree <= degree."""
    fld = spec_or_field.field if isinstance(spec_or_field, LieAlgebraSpec) \
        else spec_or_field
    variables = [(c, j) for j in range(1, depth + 1) for c in range(nvars)]
    terms: dict = {}
    for _ in range(nterms):
        deg = rng.randint(0, degree)
        acc: dict = {}
        for _ in range(deg):
            v = rng.choice(variables)
            acc[v] = acc.get(v, 0) + 1
        mono = tuple(sorted((i, j, e) for (i, j), e in acc.items()))
        terms[mono] = terms.get(mono, 0) + rng.randint(1, 6)
    return DiffPoly(fld, terms, trunc)


# -- Poisson vertex structure ------------------------------------------------

class PVA:
    """Lambda-bracket n-products on k[J_infty g*] at a given level.

    Built from x_{-1} (n) y_{-j} = [x, y]_{n-j} (n < j) + delta_{nj} n k kappa(x, y),
    sesquilinearity (d^(k) a)_(n) c = (-1)^k C(n, k) a_(n-k) c and the
    left and right Leibniz rules. No division is needed.
    """

    def __init__(self, spec: LieAlgebraSpec, level):
        self.spec = spec
        self.field = spec.field
        self.level = self.field(level)
        self._memo: dict = {}
        self._dmemo: dict = {}

    def _var_var(self, i, a, n, k, b) -> dict:
        """(x^i_{-a}) (n) (x^k_{-b}) as {mono: c}."""
        f = self.field
        # x_{-a} = d^(a-1) x_{-1}
        t = a - 1
        if n < t:
            return {}
        coef = f.binom(n, t)
        if t % 2:
            coef = -coef
        if not coef:
            return {}
        nn = n - t
        out: dict = {}
        if nn < b:
            for q, c in self.spec.bracket[i][k]:
                key = ((q, b - nn, 1),)
                out[key] = out.get(key, 0) + coef * c
        elif nn == b:
            c = self.spec.form[i][k]
            if c:
                out[()] = coef * nn * c * self.level
        return {m: f.norm(v) for m, v in out.items() if f.norm(v)}

    def _derive(self, k, mono) -> dict:
        return _derive_mono(k, mono, self.field, self._dmemo)

    def _var_mono(self, i, a, n, mono) -> dict:
        """Right Leibniz: a variable acting on a monomial."""
        out: dict = {}
        for pos, (k, b, e) in enumerate(mono):
            piece = self._var_var(i, a, n, k, b)
            if not piece:
                continue
            rest = mono[:pos] + (((k, b, e - 1),) if e > 1 else ()) + mono[pos + 1:]
            for m2, c in piece.items():
                m3 = _mono_mul(rest, m2)
                out[m3] = out.get(m3, 0) + e * c
        return out

    def _mono_mono(self, amono, n, cmono) -> dict:
        if not amono:
            return {}
        key = (amono, n, cmono)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        f = self.field
        i, a, e = amono[0]
        first = ((i, a, 1),)
        rest = amono[1:] if e == 1 else ((i, a, e - 1),) + amono[1:]
        bound = mono_weight(amono) + mono_weight(cmono)
        out: dict = {}
        if not rest:
            out = self._var_mono(i, a, n, cmono)
        else:
            for j in range(max(0, bound - n)):
                # (first (n+j) c) d^(j) rest + (rest (n+j) c) d^(j) first
                p1 = self._var_mono(i, a, n + j, cmono)
                if p1:
                    dr = self._derive(j, rest)
                    for m1, c1 in p1.items():
                        for m2, c2 in dr.items():
                            m3 = _mono_mul(m1, m2)
                            out[m3] = out.get(m3, 0) + c1 * c2
                p2 = self._mono_mono(rest, n + j, cmono)
                if p2:
                    df = self._derive(j, first)
                    for m1, c1 in p2.items():
                        for m2, c2 in df.items():
                            m3 = _mono_mul(m1, m2)
                            out[m3] = out.get(m3, 0) + c1 * c2
        out = {m: f.norm(v) for m, v in out.items() if f.norm(v)}
        self._memo[key] = out
        return out

    def product(self, a: DiffPoly, n: int, b: DiffPoly) -> DiffPoly:
        if n < 0:
            raise ValueError("n-products are defined for n >= 0")
        out: dict = {}
        for am, ac in a.terms.items():
            for bm, bc in b.terms.items():
                for m2, c2 in self._mono_mono(am, n, bm).items():
                    out[m2] = out.get(m2, 0) + ac * bc * c2
        trunc = None if a.trunc is None or b.trunc is None \
            else max(a.trunc, b.trunc)
        res = DiffPoly(self.field, out, None)
        return with_trunc(res, trunc)


def pva_product(spec: LieAlgebraSpec, level, a: DiffPoly, n: int,
                b: DiffPoly) -> DiffPoly:
    return PVA(spec, level).product(a, n, b)


def lift(module, f: DiffPoly):
    """Monomial-wise canonical PBW lift of a DiffPoly into a vacuum module."""
    from .vacuum import VState
    terms = {}
    for mono, c in f.terms.items():
        ops = []
        for i, j, e in mono:
            ops += [(j, i)] * e
        terms[tuple(sorted(ops))] = c
    return VState(module, terms)


def filtered_part(v, length: int) -> DiffPoly:
    """PBW-length ``length`` part of a state as a DiffPoly."""
    f = v.module.field
    terms = {}
    for mono, c in v.terms.items():
        if len(mono) != length:
            continue
        counts: dict = {}
        for n, i in mono:
            counts[(i, n)] = counts.get((i, n), 0) + 1
        terms[tuple((i, n, e) for (i, n), e in sorted(counts.items()))] = c
    return DiffPoly(f, terms)


__all__ = [
    "hasse_derive", "build_invariant_P", "P_series", "coadjoint_derivation",
    "one_param_action", "one_param_action_formal", "jacobian_rank",
    "jacobian_matrix", "jacobian_block_structure", "rewriteders_residual",
    "jet_ideal", "JetIdeal", "invariant_ring_dimensions",
    "predicted_jet_dimensions", "pva_product", "PVA", "lift",
    "filtered_part", "sample_regular_points", "trace_dictionary",
    "random_diffpoly", "mono_degree", "mono_depth",
]
