import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chronolab.errors import InvalidParameter, NoTailBound, PreconditionViolation, WrongBuilder
from chronolab.exact import GaussRat
from chronolab.spectra import from_list, make_harmonic, make_power_law, with_exactness
from chronolab.timeop import (
    Arithmetic,
    FiniteVector,
    PerturbationKind,
    PerturbationSequence,
    apply_hamiltonian,
    apply_to_finite,
    build_t1,
    build_tm,
    build_truncation,
    hamiltonian_matrix,
    operator_norm_bound,
    parse_alpha,
    perturb,
    sample_perturbations,
)

g = GaussRat


def random_vector(rng, L, M=1, exact=True):
    entries = {}
    for s in range(1, L + 1):
        for r in range(1, M + 1):
            re, im = Fraction(rng.randint(-9, 9), rng.randint(1, 5)), Fraction(rng.randint(-9, 9), 3)
            entries[(s, r)] = g(re, im) if exact else complex(re, im)
    return FiniteVector(entries, M, exact)


# -- FiniteVector -------------------------------------------------------------

def test_vector_basics():
    v = FiniteVector({(1, 1): 1, (3, 1): Fraction(-1, 2), (2, 1): 0}, exact=True)
    assert v.support_horizon == 3
    assert list(v.entries) == [(1, 1), (3, 1)]
    assert v[2] == 0 and v[(3, 1)] == g(Fraction(-1, 2))
    assert v.norm_sq() == Fraction(5, 4)
    assert v.l1() == Fraction(3, 2)
    assert v.column_sums() == {1: g(Fraction(1, 2))}
    assert (v - v).is_zero()
    assert FiniteVector.from_dense(list(v.to_dense(3)), 1, True) == v


def test_vector_refuses_complex_floats_in_exact_mode():
    with pytest.raises(TypeError):
        FiniteVector({(1, 1): 1j}, exact=True)


def test_vector_mismatch():
    with pytest.raises(InvalidParameter):
        FiniteVector.basis(1, exact=True) + FiniteVector.basis(1, exact=False)
    with pytest.raises(PreconditionViolation):
        FiniteVector.basis(4).to_dense(3)


# -- builders -----------------------------------------------------------------

def test_t1_harmonic_two_levels():
    T = build_t1(make_harmonic(1), 2)
    assert T.arithmetic is Arithmetic.EXACT
    assert T.entry((1, 1), (2, 1)) == g(0, -1)
    assert T.entry((2, 1), (1, 1)) == g(0, 1)
    assert T.entry((1, 1), (1, 1)) == 0 and T.entry((2, 1), (2, 1)) == 0
    assert np.array_equal(T.complex_matrix(), np.array([[0, -1j], [1j, 0]]))


def test_t1_power_law_entry():
    T = build_t1(make_power_law(1, 2), 2)
    assert T.entry((1, 1), (2, 1)) == g(0, Fraction(-1, 3))


def test_t1_rejects_degenerate_and_small():
    with pytest.raises(WrongBuilder):
        build_t1(make_power_law(1, 2, M=2), 3)
    with pytest.raises(WrongBuilder):
        build_tm(make_power_law(1, 2), 3)
    with pytest.raises(PreconditionViolation):
        build_t1(make_power_law(1, 2), 1)


def test_tm_independent_exclusion():
    T = build_tm(make_power_law(1, 2, M=2), 2)
    assert T.entry((1, 1), (2, 2)) == g(0, Fraction(-1, 3))
    assert T.entry((1, 1), (2, 1)) == 0
    for s in (1, 2):
        assert T.entry((s, 1), (s, 2)) == 0 and T.entry((s, 2), (s, 1)) == 0
    assert len(T.nonzeros()) == 4


def test_tm_frobenius_m3():
    T = build_tm(make_power_law(1, 2, M=3), 2)
    assert T.frobenius_sq() == Fraction(4, 3)


@pytest.mark.parametrize("M", [2, 3, 4])
def test_tm_is_kron_of_t1(M):
    spec = make_power_law(1.0, 2.0, M=M)
    T1 = build_t1(make_power_law(1.0, 2.0), 6).matrix
    Tm = build_tm(spec, 6).matrix
    assert np.array_equal(Tm, np.kron(T1, np.ones((M, M)) - np.eye(M)))


@given(st.integers(1, 3), st.integers(1, 3), st.integers(2, 12), st.integers(1, 3))
def test_exact_and_float_builders_agree(c, p, N, M):
    exact = make_power_law(c, p, M=M)
    T = build_truncation(exact, N)
    F = build_truncation(with_exactness(exact, "float64"), N)
    assert T.is_hermitian() and F.is_hermitian()
    np.testing.assert_allclose(T.complex_matrix(), F.matrix, rtol=1e-15, atol=0)
    assert float(T.frobenius_sq()) == pytest.approx(F.frobenius_sq(), rel=1e-13)


@given(st.lists(st.floats(0.01, 1e4), min_size=2, max_size=40, unique=True))
def test_float_hermitian_bitwise(values):
    E = sorted(values)
    if any(b <= a for a, b in zip(E, E[1:])):
        return
    T = build_truncation(from_list(E), len(E))
    assert np.array_equal(T.matrix, T.matrix.conj().T)
    assert np.all(T.matrix.real == 0)


# -- perturbations ------------------------------------------------------------

def test_perturb_constant():
    T = perturb(build_t1(make_harmonic(1), 2), PerturbationSequence.constant(5, exact=True))
    assert np.array_equal(T.complex_matrix(), np.array([[5, -1j], [1j, 5]]))
    assert T.alpha_applied is not None and T.is_hermitian()


def test_perturb_custom():
    base = build_t1(make_harmonic(1), 2)
    T = perturb(base, PerturbationSequence.custom([1, -1], exact=True))
    assert T.entry((1, 1), (1, 1)) == 1 and T.entry((2, 1), (2, 1)) == -1
    assert T.entry((1, 1), (2, 1)) == base.entry((1, 1), (2, 1))


def test_perturb_arithmetic_mismatch():
    with pytest.raises(InvalidParameter):
        perturb(build_t1(make_harmonic(1), 2), PerturbationSequence.constant(1.0))


def test_square_summable_needs_exponent_above_half():
    with pytest.raises(InvalidParameter):
        PerturbationSequence.square_summable(1, 0.5)
    a = PerturbationSequence.square_summable(3, 1, exact=True)
    assert a.value(3) == 1 and a.bound == 3


def test_parse_alpha():
    a = parse_alpha("const:5/2", exact=True)
    assert a.kind is PerturbationKind.CONSTANT and a.value(7) == Fraction(5, 2)
    b = parse_alpha("sqsum:2,1.5")
    assert b.value(4) == pytest.approx(2 * 4 ** -1.5)
    c = parse_alpha("custom:1,-2,3")
    assert c.value(2) == -2 and c.value(9) == 0 and c.bound == 3
    with pytest.raises(InvalidParameter):
        parse_alpha("wobble:1")
    with pytest.raises(InvalidParameter):
        parse_alpha("const:1,2")


def test_alpha_id_distinguishes():
    assert parse_alpha("const:1").alpha_id != parse_alpha("const:2").alpha_id
    assert parse_alpha("const:1").alpha_id == parse_alpha("const:1").alpha_id


@given(st.integers(0, 10**6), st.booleans())
def test_sampled_perturbations_respect_bound(seed, exact):
    members = sample_perturbations(random.Random(seed), 6, exact)
    assert {m.kind for m in members} == set(PerturbationKind)
    for m in members:
        for s in range(1, 12):
            assert abs(m.value(s, 1, 1)) <= m.bound


def test_sampled_family_follows_template():
    base = parse_alpha("sqsum:2,3", exact=True)
    members = sample_perturbations(random.Random(0), 5, True, base)
    assert members[0] is base
    assert all(m.kind is base.kind and m.params[1] == 3 and m.bound <= 2 for m in members)


# -- lazy application ---------------------------------------------------------

def test_apply_two_level_hand_value():
    spec = make_harmonic(1)
    phi = FiniteVector({(1, 1): 1, (2, 1): -1}, exact=True)
    res = apply_to_finite(spec, phi, 2)
    assert res.image == FiniteVector({(1, 1): g(0, 1), (2, 1): g(0, 1)}, exact=True)
    assert res.tail_norm_bound > 0


def test_apply_zero_vector():
    res = apply_to_finite(make_power_law(1, 2), FiniteVector.zero(exact=True), 5)
    assert res.image.is_zero() and res.tail_norm_bound == 0


def test_apply_without_condition_raises_with_prefix():
    spec = make_power_law(1, 0.5)
    phi = FiniteVector({(1, 1): 1.0, (2, 1): -1.0})
    with pytest.raises(NoTailBound) as err:
        apply_to_finite(spec, phi, 4)
    assert err.value.image.support_horizon == 4
    assert apply_to_finite(spec, phi, 4, require_tail=False).tail_norm_bound is None


def test_apply_horizon_below_support():
    with pytest.raises(PreconditionViolation):
        apply_to_finite(make_power_law(1, 2), FiniteVector.basis(5, exact=True), 3)


@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(2, 8))
def test_lazy_matches_dense(seed, M, L):
    spec = make_power_law(1, 2, M=M)
    phi = random_vector(random.Random(seed), L, M)
    S = L + 4
    lazy = apply_to_finite(spec, phi, S).image
    T = build_truncation(spec, S)
    dense = FiniteVector.from_dense(list(T.matrix.dot(phi.to_dense(S))), M, True)
    assert lazy == dense


@given(st.integers(0, 10**6), st.integers(1, 2), st.integers(2, 6))
def test_tail_bound_dominates_far_tail(seed, M, L):
    spec = make_power_law(1.0, 2.0, M=M)
    phi = random_vector(random.Random(seed), L, M, exact=False)
    S = L + 1
    res = apply_to_finite(spec, phi, S)
    far = apply_to_finite(spec, phi, 40 * S, require_tail=False).image
    measured = math.sqrt(sum(abs(v) ** 2 for k, v in far.items() if k.s > S))
    assert measured <= res.tail_norm_bound


def test_apply_hamiltonian():
    spec = make_harmonic(1)
    phi = FiniteVector({(1, 1): 2, (3, 1): 1}, exact=True)
    assert apply_hamiltonian(spec, phi) == FiniteVector({(1, 1): 1, (3, 1): Fraction(5, 2)},
                                                      exact=True)
    H = hamiltonian_matrix(spec, 3)
    assert H[2, 2] == Fraction(5, 2) and H[0, 1] == 0


# -- norm bound ----------------------------------------------------------------

def test_norm_bound_values():
    assert operator_norm_bound(make_power_law(1, 2), 3) == pytest.approx(49 / math.sqrt(7200),
                                                                         rel=1e-15)
    assert operator_norm_bound(make_power_law(1, 2, M=2), 3) == pytest.approx(
        2 * 49 / math.sqrt(7200), rel=1e-15)


@pytest.mark.parametrize("N", [3, 10, 50])
@pytest.mark.parametrize("M", [1, 2])
def test_norm_bound_dominates_spectrum(N, M):
    spec = make_power_law(1.0, 2.0, M=M)
    vals = np.linalg.eigvalsh(build_truncation(spec, N).matrix)
    assert np.max(np.abs(vals)) <= operator_norm_bound(spec, N)


def test_norm_bound_with_tail():
    spec = make_power_law(1.0, 2.0)
    assert operator_norm_bound(spec, 10, include_tail=True) > operator_norm_bound(spec, 10)
    with pytest.raises(NoTailBound):
        operator_norm_bound(make_harmonic(1.0), 10, include_tail=True)
