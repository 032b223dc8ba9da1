"""Sparse exact Gaussian elimination over a :class:`~modvoa.scalars.Field`.

Vectors are dicts ``{row_key: value}``. Columns are fed to an
:class:`Echelon` in a fixed order, so ranks and kernel bases are
deterministic regardless of how the columns were produced.
"""

from __future__ import annotations

from .scalars import Field


class Echelon:
    """Incremental column echelon form with optional kernel tracking."""

    def __init__(self, field: Field, track: bool = False):
        self.field = field
        self.track = track
        # pivot row key -> (normalised vector, combination of input columns)
        self.pivots: dict = {}
        self.order: list = []
        self.kernel: list[dict] = []
        self.ncols = 0

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def _key(self, vec):
        # smallest key in a fixed total order over repr-able row keys
        return min(vec)

    def add(self, vec: dict) -> bool:
        """Insert a column; return True iff it was independent."""
        f = self.field
        p = f.p
        v = {k: x for k, x in vec.items() if x}
        combo = {self.ncols: 1} if self.track else None
        self.ncols += 1
        while v:
            k = self._key(v)
            piv = self.pivots.get(k)
            if piv is None:
                c = f.inv(v[k])
                if p:
                    v = {kk: x * c % p for kk, x in v.items()}
                    if combo is not None:
                        combo = {kk: x * c % p for kk, x in combo.items()}
                else:
                    v = {kk: f.norm(x * c) for kk, x in v.items()}
                    if combo is not None:
                        combo = {kk: f.norm(x * c) for kk, x in combo.items()}
                self.pivots[k] = (v, combo)
                self.order.append(k)
                return True
            pv, pc = piv
            c = v[k]
            for kk, x in pv.items():
                y = v.get(kk, 0) - c * x
                if p:
                    y %= p
                else:
                    y = f.norm(y)
                if y:
                    v[kk] = y
                else:
                    v.pop(kk, None)
            if combo is not None:
                for kk, x in pc.items():
                    y = combo.get(kk, 0) - c * x
                    y = y % p if p else f.norm(y)
                    if y:
                        combo[kk] = y
                    else:
                        combo.pop(kk, None)
        if combo is not None:
            self.kernel.append(combo)
        return False


def rank(columns, field: Field) -> int:
    ech = Echelon(field)
    for col in columns:
        ech.add(col)
    return ech.rank


def nullspace(columns, field: Field) -> list[dict]:
    """Basis of {c : sum_i c_i * columns[i] = 0}, as dicts index -> value."""
    ech = Echelon(field, track=True)
    for col in columns:
        ech.add(col)
    return ech.kernel


def dense_rank(rows, field: Field) -> int:
    """Rank of a dense matrix given as a list of row lists."""
    cols = []
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    for j in range(ncols):
        cols.append({i: field.norm(rows[i][j]) for i in range(nrows)
                     if rows[i][j]})
    return rank(cols, field)


def solve_square(matrix, field: Field):
    """Inverse of a square matrix (list of lists) or None if singular."""
    n = len(matrix)
    a = [[field.norm(x) for x in row] + [1 if i == j else 0 for j in range(n)]
         for i, row in enumerate(matrix)]
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c]), None)
        if piv is None:
            return None
        a[c], a[piv] = a[piv], a[c]
        inv = field.inv(a[c][c])
        a[c] = [field.norm(x * inv) for x in a[c]]
        for r in range(n):
            if r != c and a[r][c]:
                f = a[r][c]
                a[r] = [field.norm(x - f * y) for x, y in zip(a[r], a[c])]
    return [row[n:] for row in a]
