from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from chronolab.exact import GaussRat, I, ZERO, as_fraction, to_complex

rationals = st.fractions(max_denominator=50).filter(lambda q: abs(q) < 10**6)
gauss = st.builds(GaussRat, rationals, rationals)


def test_as_fraction_inputs():
    assert as_fraction("3/4") == Fraction(3, 4)
    assert as_fraction(" 0.25 ") == Fraction(1, 4)
    assert as_fraction(0.1) == Fraction(0.1)
    assert as_fraction(7) == 7
    with pytest.raises(TypeError):
        as_fraction(True)
    with pytest.raises(ValueError):
        as_fraction(float("inf"))


def test_unit_arithmetic():
    assert I * I == -1
    assert (GaussRat(1, 2) * GaussRat(3, -1)) == GaussRat(5, 5)
    assert GaussRat(1, 1) / GaussRat(0, 1) == GaussRat(1, -1)
    assert 1 / GaussRat(0, 2) == GaussRat(0, Fraction(-1, 2))
    assert ZERO == 0 and not ZERO
    assert GaussRat(3) == 3 and hash(GaussRat(3)) == hash(3)


def test_abs_exact_on_axes():
    assert abs(GaussRat(0, Fraction(-3, 2))) == Fraction(3, 2)
    assert isinstance(abs(GaussRat(Fraction(2, 3))), Fraction)
    assert abs(GaussRat(3, 4)) == pytest.approx(5.0)


def test_refuses_float_mixing():
    with pytest.raises(TypeError):
        GaussRat(1) + 0.5
    with pytest.raises(TypeError):
        1j * GaussRat(1)


def test_complex_conversion():
    assert complex(GaussRat(Fraction(1, 2), -3)) == complex(0.5, -3)
    assert to_complex(GaussRat(0, 1)) == 1j


@given(gauss, gauss, gauss)
def test_field_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    assert a - a == 0
    if b != 0:
        assert (a / b) * b == a


@given(gauss, gauss)
def test_conjugation_and_modulus(a, b):
    assert (a * b).conjugate() == a.conjugate() * b.conjugate()
    assert (a * a.conjugate()) == GaussRat(a.abs2())
    assert (a * b).abs2() == a.abs2() * b.abs2()


@given(gauss)
def test_matches_complex_floats(a):
    z = complex(a)
    assert complex(a * a) == pytest.approx(z * z, rel=1e-12, abs=1e-12)
