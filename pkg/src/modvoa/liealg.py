"""Classical matrix Lie algebras gl_N, sl_N, so_N, sp_N with exact tables.

Basis orders (fixed, so that PBW monomials serialise reproducibly):

* ``gl``: ``E_ij`` in row-major order.
* ``sl``: ``E_ij`` with ``i < j`` row-major, then ``H_i = E_ii - E_(i+1)(i+1)``,
  then ``E_ij`` with ``i > j`` row-major. For N = 2 this is (e, h, f).
* ``so`` / ``sp``: antidiagonal realisation. With ``i' = N + 1 - i`` the basis
  element indexed by (i, j) is ``E_ij - s E_j'i'`` (``s = 1`` for so,
  ``s = eps_i eps_j`` for sp, ``eps = +1`` on the first half), one per
  orbit of (i, j) -> (j', i'); ordered positive, Cartan, negative as for sl.
  For sp the elements with ``i + j = N + 1`` are ``E_ii'``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product

from .errors import BadCharacteristic, BadSize, DegenerateForm
from .linalg import Echelon, solve_square
from .report import Report
from .scalars import Field

FAMILIES = ("gl", "sl", "so", "sp")


def coxeter_number(family: str, N: int) -> int:
    if family in ("gl", "sl"):
        return N
    if family == "so":
        return N - 1 if N % 2 else N - 2
    if family == "sp":
        return N
    raise BadSize(family)


def dual_coxeter_number(family: str, N: int) -> int:
    return {"gl": N, "sl": N, "so": N - 2, "sp": N // 2 + 1}[family]


def lie_rank(family: str, N: int) -> int:
    return {"gl": N, "sl": N - 1, "so": N // 2, "sp": N // 2}[family]


def invariant_degrees(family: str, N: int) -> list[int]:
    """Degrees of the basic invariants, in the order P_1, ..., P_r."""
    if family == "gl":
        return list(range(1, N + 1))
    if family == "sl":
        return list(range(2, N + 1))
    n = N // 2
    if family == "sp" or (family == "so" and N % 2):
        return [2 * i for i in range(1, n + 1)]
    # so_2n: Pfaffian in place of the top char-poly coefficient
    return [2 * i for i in range(1, n)] + [n]


# -- dense matrix helpers (lists of lists of raw field values) ------------

def mat_zero(N):
    return [[0] * N for _ in range(N)]


def mat_unit(N, i, j, c=1):
    m = mat_zero(N)
    m[i][j] = c
    return m


def mat_mul(a, b, f: Field):
    n = len(a)
    return [[f.norm(sum(a[i][k] * b[k][j] for k in range(n)))
             for j in range(n)] for i in range(n)]


def mat_add(a, b, f: Field, c=1):
    return [[f.norm(x + c * y) for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_bracket(a, b, f: Field):
    return mat_add(mat_mul(a, b, f), mat_mul(b, a, f), f, -1)


def mat_trace(a, f: Field):
    return f.norm(sum(a[i][i] for i in range(len(a))))


def mat_pow(a, e, f: Field):
    n = len(a)
    out = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    base = a
    while e:
        if e & 1:
            out = mat_mul(out, base, f)
        base = mat_mul(base, base, f)
        e >>= 1
    return out


def _freeze(m):
    return tuple(tuple(r) for r in m)


@dataclass
class LieAlgebraSpec:
    """A matrix Lie algebra with its structure tables over a fixed field."""

    family: str
    N: int
    field: Field
    names: list
    basis: list                       # matrices (tuples of tuples)
    bracket: list                     # bracket[i][j] = tuple of (k, c)
    form: list                        # Gram matrix of kappa
    restricted: list | None           # x_i^[p] as dict {k: c}, char p only
    rank: int
    coxeter: int
    dual_coxeter: int
    root_vectors: list                # (label, basis index)
    degrees: list
    _coord: tuple = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def p(self) -> int:
        return self.field.p

    def index(self, name: str) -> int:
        return self.names.index(name)

    def kappa(self, i: int, j: int):
        return self.form[i][j]

    def critical_level(self):
        return self.field.norm(-self.dual_coxeter)

    def is_simple(self) -> bool:
        return self.family != "gl"

    def coords(self, matrix) -> dict:
        """Coordinates of a matrix in the basis; raises if it is not in g."""
        f = self.field
        positions, inv = self._coord
        N = self.N
        flat = [matrix[i][j] for i in range(N) for j in range(N)]
        rhs = [flat[q] for q in positions]
        c = [f.norm(sum(inv[a][b] * rhs[b] for b in range(len(rhs))))
             for a in range(len(rhs))]
        recon = [0] * (N * N)
        for a, ca in enumerate(c):
            if ca:
                bm = self.basis[a]
                for i in range(N):
                    for j in range(N):
                        if bm[i][j]:
                            recon[i * N + j] += ca * bm[i][j]
        if any(f.norm(x - y) for x, y in zip(recon, flat)):
            raise ValueError("matrix does not lie in the Lie algebra")
        return {a: ca for a, ca in enumerate(c) if ca}

    def element_matrix(self, vec: dict):
        m = mat_zero(self.N)
        for a, c in vec.items():
            m = mat_add(m, [list(r) for r in self.basis[a]], self.field, c)
        return m

    def bracket_vec(self, u: dict, v: dict) -> dict:
        out: dict = {}
        for i, a in u.items():
            for j, b in v.items():
                for k, c in self.bracket[i][j]:
                    out[k] = out.get(k, 0) + a * b * c
        return {k: self.field.norm(x) for k, x in out.items()
                if self.field.norm(x)}

    def kappa_vec(self, u: dict, v: dict):
        return self.field.norm(sum(a * b * self.form[i][j]
                                   for i, a in u.items() for j, b in v.items()))

    def ad_matrix(self, i: int):
        """ad(x_i) as a dim x dim list of rows (row = output coordinate)."""
        d = self.dim
        m = [[0] * d for _ in range(d)]
        for j in range(d):
            for k, c in self.bracket[i][j]:
                m[k][j] = c
        return m

    def corrupted(self, i: int, j: int, k: int, delta=1) -> "LieAlgebraSpec":
        """Copy with c^k_ij and c^k_ji shifted antisymmetrically (test fixture)."""
        f = self.field
        br = [list(row) for row in self.bracket]

        def bump(a, b, d):
            terms = dict(br[a][b])
            terms[k] = f.norm(terms.get(k, 0) + d)
            br[a][b] = tuple((kk, c) for kk, c in sorted(terms.items()) if c)

        bump(i, j, delta)
        bump(j, i, -delta)
        return replace(self, bracket=[tuple(r) for r in br])

    def to_document(self) -> dict:
        return {
            "family": self.family,
            "N": self.N,
            "characteristic": self.p,
            "names": list(self.names),
            "basis": [[[_raw(x) for x in row] for row in m] for m in self.basis],
            "structure_constants": [
                [i, j, k, _raw(c)]
                for i in range(self.dim) for j in range(self.dim)
                for k, c in self.bracket[i][j]],
            "form": [[_raw(x) for x in row] for row in self.form],
            "restricted_powers": None if self.restricted is None else [
                [[k, _raw(c)] for k, c in sorted(r.items())]
                for r in self.restricted],
            "rank": self.rank,
            "coxeter": self.coxeter,
            "dual_coxeter": self.dual_coxeter,
            "root_vectors": [[lab, i] for lab, i in self.root_vectors],
            "degrees": list(self.degrees),
        }

    @classmethod
    def from_document(cls, doc: dict) -> "LieAlgebraSpec":
        f = Field(doc["characteristic"])
        d = len(doc["names"])
        br = [[{} for _ in range(d)] for _ in range(d)]
        for i, j, k, c in doc["structure_constants"]:
            br[i][j][k] = f(_unraw(c))
        spec = cls(
            family=doc["family"], N=doc["N"], field=f,
            names=list(doc["names"]),
            basis=[_freeze([[f(_unraw(x)) for x in row] for row in m])
                   for m in doc["basis"]],
            bracket=[[tuple(sorted(br[i][j].items())) for j in range(d)]
                     for i in range(d)],
            form=[[f(_unraw(x)) for x in row] for row in doc["form"]],
            restricted=None if doc["restricted_powers"] is None else [
                {k: f(_unraw(c)) for k, c in r}
                for r in doc["restricted_powers"]],
            rank=doc["rank"], coxeter=doc["coxeter"],
            dual_coxeter=doc["dual_coxeter"],
            root_vectors=[(lab, i) for lab, i in doc["root_vectors"]],
            degrees=list(doc["degrees"]),
        )
        spec._coord = _coordinate_system(spec.basis, spec.N, f)
        return spec


def _raw(x):
    return str(x) if isinstance(x, Fraction) else x


def _unraw(x):
    return Fraction(x) if isinstance(x, str) else x


def _coordinate_system(basis, N, f: Field):
    """Pick dim-many matrix positions on which the basis is invertible."""
    flat = [[m[i][j] for i in range(N) for j in range(N)] for m in basis]
    ech = Echelon(f)
    positions = []
    for q in range(N * N):
        row = {a: flat[a][q] for a in range(len(basis)) if flat[a][q]}
        if row and ech.add(row):
            positions.append(q)
        if len(positions) == len(basis):
            break
    sub = [[flat[a][q] for a in range(len(basis))] for q in positions]
    inv = solve_square(sub, f)
    if inv is None:
        raise ValueError("basis matrices are linearly dependent")
    return positions, inv


def _basis_gl(N):
    names, mats = [], []
    for i, j in product(range(N), repeat=2):
        names.append(f"E{i + 1}{j + 1}")
        mats.append(mat_unit(N, i, j))
    return names, mats


def _basis_sl(N):
    names, mats = [], []
    for i, j in product(range(N), repeat=2):
        if i < j:
            names.append(f"E{i + 1}{j + 1}")
            mats.append(mat_unit(N, i, j))
    for i in range(N - 1):
        m = mat_unit(N, i, i)
        m[i + 1][i + 1] = -1
        names.append(f"H{i + 1}")
        mats.append(m)
    for i, j in product(range(N), repeat=2):
        if i > j:
            names.append(f"E{i + 1}{j + 1}")
            mats.append(mat_unit(N, i, j))
    return names, mats


def _basis_orthosymplectic(family, N):
    n = N // 2
    eps = [1] * N if family == "so" else [1] * n + [-1] * n
    pos, cart, neg = [], [], []
    for i, j in product(range(N), repeat=2):
        ip, jp = N - 1 - i, N - 1 - j
        s = i + j
        if s > N - 1 or (family == "so" and s == N - 1):
            continue
        m = mat_zero(N)
        if s == N - 1:
            # sp only: E_ii' (the two terms coincide)
            m[i][j] = 1
        else:
            m[i][j] += 1
            m[jp][ip] -= 1 if family == "so" else eps[i] * eps[j]
        name = f"X{i + 1}{j + 1}"
        if i < j:
            pos.append((name, m))
        elif i == j:
            cart.append((name, m))
        else:
            neg.append((name, m))
    items = pos + cart + neg
    return [a for a, _ in items], [b for _, b in items]


def build_classical(family: str, N: int, characteristic: int = 0) -> LieAlgebraSpec:
    """Build gl_N, sl_N, so_N or sp_N over Q (0) or F_p."""
    if family not in FAMILIES:
        raise BadSize(f"unknown family {family!r}")
    if N < 1:
        raise BadSize(f"N must be positive, got {N}")
    if family == "sl" and N < 2:
        raise BadSize("sl_N needs N >= 2")
    if family == "sp" and (N % 2 or N < 2):
        raise BadSize("sp_N needs even N >= 2")
    if family == "so" and (N < 3 or N == 4):
        raise BadSize("so_N is supported for N = 3 and N >= 5")
    h = coxeter_number(family, N)
    p = characteristic
    if p and family != "gl" and p <= h:
        raise BadCharacteristic(f"need p > h = {h}, got p = {p}")
    if p and family == "gl" and p <= N and N > 1:
        raise BadCharacteristic(f"need p > N = {N}, got p = {p}")
    f = Field(p)

    if family == "gl":
        names, mats = _basis_gl(N)
    elif family == "sl":
        names, mats = _basis_sl(N)
    else:
        names, mats = _basis_orthosymplectic(family, N)
    mats = [[[f(x) for x in row] for row in m] for m in mats]
    basis = [_freeze(m) for m in mats]
    positions, inv = _coordinate_system(basis, N, f)
    spec = LieAlgebraSpec(
        family=family, N=N, field=f, names=names, basis=basis,
        bracket=[], form=[], restricted=None,
        rank=lie_rank(family, N), coxeter=h,
        dual_coxeter=dual_coxeter_number(family, N),
        root_vectors=[], degrees=invariant_degrees(family, N),
        _coord=(positions, inv),
    )
    d = len(basis)
    spec.bracket = [
        [tuple(sorted(spec.coords(mat_bracket(mats[i], mats[j], f)).items()))
         for j in range(d)] for i in range(d)]

    # trace form scaled to the normalised Killing form; so_N carries 1/2
    scale = f(Fraction(1, 2)) if family == "so" else 1
    trace = [[mat_trace(mat_mul(mats[i], mats[j], f), f) for j in range(d)]
             for i in range(d)]
    if family == "gl":
        tr = [mat_trace(m, f) for m in mats]
        invN = f(Fraction(1, N))
        spec.form = [[f.norm(trace[i][j] - invN * tr[i] * tr[j])
                      for j in range(d)] for i in range(d)]
    else:
        spec.form = [[f.norm(scale * trace[i][j]) for j in range(d)]
                     for i in range(d)]

    if p:
        spec.restricted = [spec.coords(mat_pow(m, p, f)) for m in mats]
    roots = []
    for a, m in enumerate(mats):
        diag = any(m[i][i] for i in range(N))
        if not diag and any(any(r) for r in m):
            roots.append((names[a], a))
    if family == "gl" and N == 1:
        roots = []
    spec.root_vectors = roots
    return spec


def trace_form_matrix(spec: LieAlgebraSpec):
    """Gram matrix of (x, y) -> Tr(xy) in the natural representation."""
    f = spec.field
    return [[mat_trace(mat_mul(spec.basis[i], spec.basis[j], f), f)
             for j in range(spec.dim)] for i in range(spec.dim)]


def dual_basis(spec: LieAlgebraSpec, gram=None) -> list[dict]:
    """kappa-dual basis {x^a} with kappa(x_a, x^b) = delta_ab.

    Pass ``gram`` to dualise against a different symmetric form.
    """
    g = spec.form if gram is None else gram
    inv = solve_square(g, spec.field)
    if inv is None:
        raise DegenerateForm(f"{spec.family}_{spec.N}: form is degenerate")
    # x^b = sum_c inv[c][b] x_c, since sum_c G[a][c] inv[c][b] = delta_ab
    return [{c: inv[c][b] for c in range(spec.dim) if inv[c][b]}
            for b in range(spec.dim)]


def ad_nilpotency_order(spec: LieAlgebraSpec, i: int, limit: int = 64) -> int:
    """Least k with ad(x_i)^k = 0, or raise if none up to ``limit``."""
    f = spec.field
    ad = spec.ad_matrix(i)
    cur = ad
    for k in range(1, limit + 1):
        if not any(any(r) for r in cur):
            return k
        cur = mat_mul(ad, cur, f)
    raise ValueError(f"ad({spec.names[i]}) not nilpotent below {limit}")


def validate_spec(spec: LieAlgebraSpec) -> Report:
    """Check every structural invariant; failures carry witnesses."""
    f = spec.field
    d = spec.dim
    rep = Report("validate", {"family": spec.family, "N": spec.N,
                              "characteristic": spec.p})
    vec = [{i: 1} for i in range(d)]

    bad = None
    for i in range(d):
        for j in range(i, d):
            s = spec.bracket_vec(vec[i], vec[j])
            t = spec.bracket_vec(vec[j], vec[i])
            if any(f.norm(s.get(k, 0) + t.get(k, 0)) for k in set(s) | set(t)):
                bad = bad or [spec.names[i], spec.names[j]]
    rep.check("antisymmetry", bad is None, bad)

    bad = None
    for i in range(d):
        for j in range(i + 1, d):
            for k in range(j + 1, d):
                tot: dict = {}
                for u, v, w in ((i, j, k), (j, k, i), (k, i, j)):
                    inner = spec.bracket_vec(vec[v], vec[w])
                    for a, c in spec.bracket_vec(vec[u], inner).items():
                        tot[a] = tot.get(a, 0) + c
                if any(f.norm(c) for c in tot.values()):
                    bad = [spec.names[i], spec.names[j], spec.names[k]]
                    break
            if bad:
                break
        if bad:
            break
    rep.check("jacobi", bad is None, bad)

    bad = None
    for i in range(d):
        for j in range(d):
            mij = mat_bracket(spec.basis[i], spec.basis[j], f)
            if spec.element_matrix(spec.bracket_vec(vec[i], vec[j])) != \
                    [list(r) for r in mij]:
                bad = bad or [spec.names[i], spec.names[j]]
    rep.check("matrix_brackets", bad is None, bad)

    sym = all(spec.form[i][j] == spec.form[j][i]
              for i in range(d) for j in range(d))
    rep.check("form_symmetric", sym)

    bad = None
    for x in range(d):
        for y in range(d):
            bxy = spec.bracket_vec(vec[x], vec[y])
            for z in range(d):
                bxz = spec.bracket_vec(vec[x], vec[z])
                val = spec.kappa_vec(bxy, vec[z]) + spec.kappa_vec(vec[y], bxz)
                if f.norm(val):
                    bad = bad or [spec.names[x], spec.names[y], spec.names[z]]
    rep.check("form_invariant", bad is None, bad)

    if spec.is_simple():
        rep.check("form_nondegenerate",
                  solve_square(spec.form, f) is not None)
        # independent route: (1/2h^vee) Tr(ad x ad y)
        two_h = f(2 * spec.dual_coxeter)
        ads = [spec.ad_matrix(i) for i in range(d)]
        bad = None
        for i in range(d):
            for j in range(i, d):
                kil = mat_trace(mat_mul(ads[i], ads[j], f), f)
                if f.norm(kil - two_h * spec.form[i][j]):
                    bad = bad or [spec.names[i], spec.names[j]]
        rep.check("form_is_normalised_killing", bad is None, bad)

    if spec.p:
        p = spec.p
        bad_pow, bad_ad = None, None
        for i in range(d):
            xp = spec.restricted[i]
            mp = mat_pow([list(r) for r in spec.basis[i]], p, f)
            if spec.element_matrix(xp) != mp:
                bad_pow = bad_pow or spec.names[i]
            lhs = _ad_of_vec(spec, xp)
            rhs = mat_pow(spec.ad_matrix(i), p, f)
            if lhs != rhs:
                bad_ad = bad_ad or spec.names[i]
        rep.check("restricted_power_is_matrix_power", bad_pow is None, bad_pow)
        rep.check("restrictedness_ad", bad_ad is None, bad_ad)

    bad = None
    orders = {}
    for label, i in spec.root_vectors:
        try:
            k = ad_nilpotency_order(spec, i)
        except ValueError:
            bad = bad or label
            continue
        orders[label] = k
        if k > 2 * spec.coxeter - 1 or (spec.p and k >= spec.p):
            bad = bad or label
    rep.check("root_vectors_ad_nilpotent", bad is None, bad,
              orders=dict(sorted(orders.items())))
    return rep


def _ad_of_vec(spec: LieAlgebraSpec, v: dict):
    d = spec.dim
    m = [[0] * d for _ in range(d)]
    for j in range(d):
        for k, c in spec.bracket_vec(v, {j: 1}).items():
            m[k][j] = c
    return m
