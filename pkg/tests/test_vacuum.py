from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from modvoa.errors import CapacityExceeded, CharacteristicMismatch
from modvoa.jets import P_series, hasse_derive
from modvoa.liealg import build_classical
from modvoa.diffpoly import DiffPoly
from modvoa.vacuum import (VacuumModule, pbw_basis, pbw_dimension, symbol)

E, H, F = 0, 1, 2  # sl_2 basis order (E12, H1, E21)


def sl2(p=5, level=-2, cap=24):
    return VacuumModule(build_classical("sl", 2, p), level, weight_cap=cap)


def random_state(V, rng, max_weight=3, terms=2):
    w = rng.randint(0, max_weight)
    basis = pbw_basis(V.dim, w)
    return V.state({rng.choice(basis): rng.randint(1, 4) for _ in range(terms)})


# -- basis and mode action ----------------------------------------------------

def test_pbw_basis_counts_match_generating_function():
    for dim in (1, 3, 4):
        for w in range(7):
            basis = pbw_basis(dim, w)
            assert len(basis) == len(set(basis)) == pbw_dimension(dim, w)
            assert basis == sorted(basis)


def test_annihilators_kill_vacuum():
    V = sl2()
    for i in range(3):
        for n in range(4):
            assert V.apply_mode(i, n, V.vacuum()).is_zero()


def test_single_bracket_and_central_term():
    V = sl2(p=0, level=Fraction(7, 3))
    f = V.generator(F)
    assert V.apply_mode(E, 0, f) == V.generator(H)
    assert V.apply_mode(E, 1, f) == V.vacuum() * Fraction(7, 3)
    assert V.apply_mode(F, 0, V.generator(E)) == V.generator(H) * -1


def test_canonical_order_of_stored_monomials():
    V = sl2()
    v = V.monomial_state([(F, 1), (E, 2), (H, 1), (E, 1)])
    for mono in v.terms:
        assert list(mono) == sorted(mono)
        assert all(n >= 1 for n, _ in mono)
    assert v.weights() == {5}


def test_straightening_confluence():
    """[x_m, y_n] acting on a state equals the bracket field, in every order."""
    rng = random.Random(11)
    spec = build_classical("sl", 3, 7)
    V = VacuumModule(spec, 3)
    for _ in range(40):
        v = random_state(V, rng, 3)
        x, y = rng.randrange(spec.dim), rng.randrange(spec.dim)
        m, n = rng.randint(-3, 3), rng.randint(-3, 3)
        lhs = V.apply_mode(x, m, V.apply_mode(y, n, v)) - \
            V.apply_mode(y, n, V.apply_mode(x, m, v))
        rhs = V.zero()
        for k, c in spec.bracket[x][y]:
            rhs = rhs + V.apply_mode(k, m + n, v) * c
        if m + n == 0 and m:
            rhs = rhs + v * (m * spec.form[x][y] * V.level)
        assert lhs == rhs


def test_mismatched_characteristic_rejected():
    V5, V7 = sl2(5), sl2(7)
    with pytest.raises(CharacteristicMismatch):
        V5.apply_mode(E, 0, V7.generator(F))
    with pytest.raises(CharacteristicMismatch):
        _ = V5.generator(E) + V7.generator(E)


def test_weight_cap_fails_loudly():
    V = sl2(cap=3)
    v = V.monomial_state([(E, 1), (F, 1)])
    with pytest.raises(CapacityExceeded):
        V.apply_mode(H, -2, v)
    with pytest.raises(CapacityExceeded):
        V.translate(2, v)


# -- translation --------------------------------------------------------------

def test_translation_examples():
    V = sl2()
    assert V.translate(1, V.generator(E)) == V.generator(E, 2)
    for k in range(4):
        assert V.translate(k + 1, V.vacuum()).is_zero()
    assert V.translate(1, V.generator(H, 5)).is_zero()  # C(5, 1) = 0 mod 5
    assert V.translate(2, V.generator(H, 2)) == V.generator(H, 4) * 3


def test_translation_is_minus_one_minus_k_product():
    rng = random.Random(2)
    for p in (5, 0):
        V = sl2(p, 1)
        for _ in range(20):
            a = random_state(V, rng, 3)
            k = rng.randint(0, 4)
            assert V.translate(k, a) == V.nth_product(a, -k - 1, V.vacuum())


def test_translation_composition():
    rng = random.Random(3)
    for p in (5, 7, 0):
        V = sl2(p, 2)
        for _ in range(15):
            a = random_state(V, rng, 3)
            i, j = rng.randint(0, 4), rng.randint(0, 4)
            lhs = V.translate(i, V.translate(j, a))
            rhs = V.translate(i + j, a) * V.field.binom(i + j, i)
            assert lhs == rhs


# -- n-th products ------------------------------------------------------------

def test_vacuum_axioms():
    rng = random.Random(4)
    V = sl2(7, 3)
    for _ in range(10):
        b = random_state(V, rng, 3)
        for n in range(-3, 4):
            want = b if n == -1 else V.zero()
            assert V.nth_product(V.vacuum(), n, b) == want
        assert V.nth_product(b, -1, V.vacuum()) == b


def test_generator_product_is_mode_action():
    rng = random.Random(5)
    spec = build_classical("sl", 3, 5)
    V = VacuumModule(spec, 2)
    for _ in range(20):
        b = random_state(V, rng, 3)
        x = rng.randrange(spec.dim)
        n = rng.randint(-3, 3)
        assert V.nth_product(V.generator(x), n, b) == V.apply_mode(x, n, b)


def test_e_one_product_f_is_level():
    V = sl2(0, Fraction(-5, 2))
    assert V.nth_product(V.generator(E), 1, V.generator(F)) == \
        V.vacuum() * Fraction(-5, 2)


def test_two_product_routes_agree():
    rng = random.Random(6)
    for family, N, p in [("sl", 2, 5), ("gl", 2, 0), ("sl", 3, 7)]:
        spec = build_classical(family, N, p)
        V = VacuumModule(spec, 1, weight_cap=None)
        for _ in range(15):
            a, b = random_state(V, rng, 3), random_state(V, rng, 3)
            n = rng.randint(-3, 3)
            assert V.nth_product(a, n, b) == V.nth_product_by_states(a, n, b)


def test_derivative_field_consistency():
    rng = random.Random(7)
    for p in (5, 0):
        V = sl2(p, -1)
        for _ in range(20):
            a, b = random_state(V, rng, 3), random_state(V, rng, 2)
            k, n = rng.randint(0, 3), rng.randint(-2, 4)
            lhs = V.nth_product(V.translate(k, a), n, b)
            sign = -1 if k % 2 else 1
            rhs = V.nth_product(a, n - k, b) * (sign * V.field.binom(n, k))
            assert lhs == rhs


# -- Borcherds identity -------------------------------------------------------

def test_borcherds_vacuum_triple():
    V = sl2()
    c = V.monomial_state([(E, 1), (F, 2)])
    for m, n, k in [(0, 0, 0), (-1, 2, -2), (1, -1, 0)]:
        assert V.borcherds_residual(V.vacuum(), V.vacuum(), c, m, n, k).is_zero()


def test_borcherds_named_instance():
    for p in (5, 0):
        V = sl2(p, 3)
        r = V.borcherds_residual(V.generator(E), V.generator(F),
                                 V.generator(H, 2), 0, 0, -1)
        assert r.is_zero()


def test_borcherds_small_random():
    rng = random.Random(8)
    for family, N in [("sl", 2), ("sl", 3), ("gl", 2)]:
        for p in (5, 7, 0):
            V = VacuumModule(build_classical(family, N, p), rng.randint(-3, 3),
                             weight_cap=None)
            for _ in range(8):
                a, b, c = (random_state(V, rng, 2) for _ in range(3))
                m, n, k = (rng.randint(-2, 2) for _ in range(3))
                assert V.borcherds_residual(a, b, c, m, n, k).is_zero()


def test_borcherds_detects_corrupted_bracket():
    spec = build_classical("sl", 3, 7).corrupted(0, 1, 2, 1)
    V = VacuumModule(spec, 1, weight_cap=None)
    rng = random.Random(9)
    found = False
    for _ in range(40):
        a, b, c = (random_state(V, rng, 2) for _ in range(3))
        m, n, k = (rng.randint(-2, 2) for _ in range(3))
        if not V.borcherds_residual(a, b, c, m, n, k).is_zero():
            found = True
            break
    assert found


# -- centre ---------------------------------------------------------------------

def test_central_examples():
    V = sl2(5, -2)
    assert V.is_central(V.vacuum())
    v = V.generator(E)
    assert not V.is_central(v)
    assert V.apply_mode(F, 0, v) == V.generator(H) * -1


def test_casimir_centrality_depends_on_level():
    for p, crit in ((5, -2), (0, -2)):
        for level, expected in ((crit, True), (0, False)):
            V = sl2(p, level)
            half = V.field(Fraction(1, 2))
            S = (V.monomial_state([(E, 1), (F, 1)]) +
                 V.monomial_state([(F, 1), (E, 1)]) +
                 V.monomial_state([(H, 1), (H, 1)], half)) * half
            assert V.is_central(S) is expected


def test_pcentre_states():
    V = sl2(5, 1)
    e5 = V.pcentre_state(E, 1)
    assert e5 == V.monomial_state([(E, 1)] * 5)
    h5 = V.pcentre_state(H, 1)
    assert h5 == V.monomial_state([(H, 1)] * 5) - V.generator(H, 5)
    for level in (0, 1, 3):
        W = sl2(5, level)
        for x in (E, H, F):
            for j in (1, 2):
                assert W.is_central(W.pcentre_state(x, j))
    assert symbol(h5) == DiffPoly(V.field, {((H, 1, 5),): 1})


def test_centre_dimension_sl2():
    V = sl2(5, -2)
    assert V.centre_dimension(5) == [1, 0, 1, 1, 2, 5]


def test_centre_dimension_noncritical_is_smaller():
    crit = sl2(5, -2).centre_dimension(4)
    non = sl2(5, 0).centre_dimension(4)
    assert non[0] == 1
    assert all(non[w] < crit[w] for w in (2, 3, 4))


def test_centre_dimension_gl():
    V1 = VacuumModule(build_classical("gl", 1, 5), 0)
    assert V1.centre_dimension(3) == [1, 1, 2, 3]
    V2 = VacuumModule(build_classical("gl", 2, 5), -2)
    assert V2.centre_dimension(3) == [1, 1, 3, 5]


def test_centre_dimension_capacity():
    V = sl2(5, -2)
    with pytest.raises(CapacityExceeded):
        V.centre_dimension_at(12, max_basis=1000)


def test_centre_dimension_worker_independent():
    V = VacuumModule(build_classical("sl", 2, 5), -2)
    assert V.centre_dimension(4, workers=1) == V.centre_dimension(4, workers=2)


def test_centre_closed_under_products():
    V = sl2(5, -2)
    half = V.field(Fraction(1, 2))
    S = (V.monomial_state([(E, 1), (F, 1)]) + V.monomial_state([(F, 1), (E, 1)])
         + V.monomial_state([(H, 1), (H, 1)], half)) * half
    T = V.pcentre_state(H, 1)
    for u, v in ((S, S), (S, T), (V.translate(1, S), S)):
        assert V.is_central(V.nth_product(u, -1, v))


# -- symbols --------------------------------------------------------------------

def test_symbol_examples():
    V = sl2(0, 1)
    v = V.state({((1, E), (1, F)): 1, ((2, H),): 1})
    assert symbol(v) == DiffPoly(V.field, {((E, 1, 1), (F, 1, 1)): 1})
    assert symbol(V.vacuum()) == DiffPoly.constant(V.field, 1)


def test_symbol_multiplicative_on_top_lengths():
    rng = random.Random(10)
    V = sl2(7, 2)
    for _ in range(15):
        a = V.state({rng.choice(pbw_basis(3, rng.randint(1, 3))): 1})
        b = V.state({rng.choice(pbw_basis(3, rng.randint(1, 3))): 1})
        prod = V.nth_product(a, -1, b)
        assert prod.pbw_length() == a.pbw_length() + b.pbw_length()
        assert symbol(prod) == symbol(a) * symbol(b)


def test_symbol_of_translation_is_hasse_derivative():
    V = sl2(5, -2)
    half = V.field(Fraction(1, 2))
    S = (V.monomial_state([(E, 1), (F, 1)]) + V.monomial_state([(F, 1), (E, 1)])
         + V.monomial_state([(H, 1), (H, 1)], half)) * half
    for k in range(5):
        assert symbol(V.translate(k, S)) == hasse_derive(k, symbol(S))
    assert symbol(V.translate(1, S)) == P_series(V.spec, 1, 2)


def test_state_serialisation_order():
    V = sl2(5, 1)
    v = V.generator(H, 2) + V.monomial_state([(E, 1), (F, 1)]) + V.vacuum()
    doc = v.to_document()
    assert doc[0] == [[], 1]
    assert doc[1][0] == [[E, -1], [F, -1]]
    assert doc[-1][0] == [[H, -2]]


@settings(max_examples=60, deadline=None,
          suppress_health_check=[HealthCheck.too_slow])
@given(seed=st.integers(0, 10 ** 6), p=st.sampled_from([5, 7, 0]),
       m=st.integers(-2, 2), n=st.integers(-2, 2))
def test_commutator_formula_property(seed, p, m, n):
    """[a_(m), b_(n)] c = sum_j C(m, j) (a_(j) b)_(m+n-j) c for small states."""
    rng = random.Random(seed)
    V = VacuumModule(build_classical("sl", 2, p), rng.randint(-3, 3))
    a, b, c = (random_state(V, rng, max_weight=2) for _ in range(3))
    assert not V.borcherds_residual(a, b, c, m, n, 0)
