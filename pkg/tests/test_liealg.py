from __future__ import annotations

from fractions import Fraction

import pytest

from modvoa.errors import BadCharacteristic, BadSize, DegenerateForm
from modvoa.liealg import (LieAlgebraSpec, ad_nilpotency_order, build_classical,
                           dual_basis, mat_mul, mat_trace, validate_spec)
from modvoa.linalg import dense_rank, nullspace, rank, solve_square
from modvoa.scalars import QQ, Field

SPECS = [("sl", 2, 5), ("sl", 3, 5), ("sl", 3, 7), ("gl", 2, 5), ("gl", 1, 5),
         ("sp", 4, 7), ("so", 5, 7), ("so", 6, 7), ("sl", 2, 0), ("gl", 2, 0),
         ("sp", 4, 0), ("so", 3, 5)]


@pytest.mark.parametrize("family,N,p", SPECS)
def test_validate_passes(family, N, p):
    rep = validate_spec(build_classical(family, N, p))
    assert rep.passed, [c.to_document() for c in rep.failures()]


def test_sl2_form_from_matrices():
    s = build_classical("sl", 2, 0)
    e, h, f = (s.index(n) for n in ("E12", "H1", "E21"))
    # trace of explicit 2x2 products
    tr = lambda a, b: mat_trace(mat_mul(s.basis[a], s.basis[b], QQ), QQ)
    assert s.kappa(e, f) == tr(e, f) == 1
    assert s.kappa(h, h) == tr(h, h) == 2
    assert s.kappa(e, e) == 0


def test_gl1_form_vanishes_and_has_no_dual():
    s = build_classical("gl", 1, 5)
    assert s.form == [[0]]
    with pytest.raises(DegenerateForm):
        dual_basis(s)


def test_sl2_restricted_powers():
    s = build_classical("sl", 2, 5)
    e, h, f = (s.index(n) for n in ("E12", "H1", "E21"))
    assert s.restricted[e] == {}
    assert s.restricted[f] == {}
    assert s.restricted[h] == {h: 1}


def test_sl2_dual_basis():
    s = build_classical("sl", 2, 0)
    assert dual_basis(s) == [{2: 1}, {1: Fraction(1, 2)}, {0: 1}]


def test_sl3_dual_basis_property():
    s = build_classical("sl", 3, 0)
    dual = dual_basis(s)
    for a in range(s.dim):
        for b in range(s.dim):
            assert s.kappa_vec({a: 1}, dual[b]) == (1 if a == b else 0)


def test_bad_inputs():
    with pytest.raises(BadCharacteristic):
        build_classical("sl", 2, 2)
    with pytest.raises(BadCharacteristic):
        build_classical("sl", 3, 3)
    with pytest.raises(BadSize):
        build_classical("sp", 3, 7)
    with pytest.raises(BadSize):
        build_classical("so", 4, 7)


def test_corrupted_structure_constant_fails_jacobi():
    s = build_classical("sl", 3, 7)
    bad = s.corrupted(0, 1, 2, 1)
    rep = validate_spec(bad)
    failed = {c.name for c in rep.failures()}
    assert "jacobi" in failed
    jac = next(c for c in rep.checks if c.name == "jacobi")
    assert jac.witness and len(jac.witness) == 3


def test_root_vector_nilpotency_below_p():
    for family, N, p in [("sl", 2, 5), ("sl", 3, 5), ("sp", 4, 7)]:
        s = build_classical(family, N, p)
        for _, i in s.root_vectors:
            k = ad_nilpotency_order(s, i)
            assert k < p and k <= 2 * s.coxeter - 1


def test_sl_gram_invertible_mod_p():
    for N, p in [(2, 3), (3, 5), (4, 5), (4, 7)]:
        s = build_classical("sl", N, p)
        assert solve_square(s.form, s.field) is not None


def test_document_roundtrip():
    s = build_classical("sp", 4, 7)
    t = LieAlgebraSpec.from_document(s.to_document())
    assert t.bracket == s.bracket and t.form == s.form
    assert t.restricted == s.restricted


def test_dual_coxeter_and_critical_level():
    assert build_classical("sl", 3, 0).critical_level() == -3
    assert build_classical("sp", 4, 0).dual_coxeter == 3
    assert build_classical("so", 5, 0).dual_coxeter == 3
    assert build_classical("gl", 2, 5).critical_level() == 3


def test_linalg_helpers():
    f = Field(5)
    cols = [{0: 1, 1: 2}, {0: 2, 1: 4}, {1: 1}]
    assert rank(cols, f) == 2
    ker = nullspace(cols, f)
    assert len(ker) == 1
    combo = ker[0]
    total = {}
    for idx, c in combo.items():
        for k, v in cols[idx].items():
            total[k] = (total.get(k, 0) + c * v) % 5
    assert not any(total.values())
    assert dense_rank([[1, 2], [2, 4]], f) == 1
    assert dense_rank([[1, 2], [2, 4]], QQ) == 1
    assert solve_square([[1, 2], [2, 4]], QQ) is None
    inv = solve_square([[2, 1], [1, 1]], QQ)
    assert inv == [[1, -1], [-1, 2]]
