import random
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from chronolab import sa_analysis as sa
from chronolab.errors import InvalidParameter, InvalidProbeShape, PreconditionViolation
from chronolab.exact import GaussRat
from chronolab.spectra import make_box, make_harmonic, make_power_law
from chronolab.timeop import (
    FiniteVector,
    PerturbationSequence,
    build_truncation,
    perturb,
)


def test_two_level_eigenvalues():
    s = sa.eigen_summary(build_truncation(make_harmonic(1), 2))
    np.testing.assert_allclose(s.eigenvalues, [-1.0, 1.0], atol=1e-15)
    assert s.max_imag_part <= 1e-15 and s.extreme_abs == pytest.approx(1.0)


def test_constant_shift():
    spec = make_power_law(1.0, 2.0)
    T = build_truncation(spec, 12)
    base = sa.eigen_summary(T).eigenvalues
    shifted = sa.eigen_summary(perturb(T, PerturbationSequence.constant(2.5))).eigenvalues
    np.testing.assert_allclose(shifted, base + 2.5, atol=1e-13)


def test_small_truncation_under_norm_bound():
    s = sa.eigen_summary(build_truncation(make_power_law(1, 2), 3))
    assert s.extreme_abs <= 0.57750
    assert s.eigenvalues.shape == (3,)


def test_spectrum_symmetric_about_zero():
    # T is purely imaginary and Hermitian, so conj(T) = -T: eigenvalues pair as +-lambda.
    vals = sa.eigen_summary(build_truncation(make_power_law(1.0, 2.0, M=2), 15)).eigenvalues
    np.testing.assert_allclose(np.sort(vals), np.sort(-vals), atol=1e-12)


def test_eigen_summary_matches_scipy():
    T = build_truncation(make_harmonic(1.0), 40)
    ours = sa.eigen_summary(T).eigenvalues
    theirs = scipy.linalg.eigvalsh(T.matrix)
    np.testing.assert_allclose(ours, theirs, atol=1e-12)


def test_convergence_p2():
    rows = sa.convergence_study(make_power_law(1.0, 2.0), [25, 50, 100, 200], K=5)
    assert rows[0].diffs is None
    diffs = np.array([r.diffs for r in rows[1:]])
    assert np.all(diffs[1:] < diffs[:-1])
    assert np.all(diffs[-1] < 1e-3)
    for r in rows:
        assert r.extreme_abs <= r.norm_bound


def test_growth_p1():
    rows = sa.convergence_study(make_power_law(1.0, 1.0), [25, 50, 100, 200], K=3)
    ext = [r.extreme_abs for r in rows]
    assert all(b > a for a, b in zip(ext, ext[1:]))


def test_convergence_single_row_and_order():
    rows = sa.convergence_study(make_power_law(1.0, 2.0), [10])
    assert len(rows) == 1 and rows[0].diffs is None
    with pytest.raises(PreconditionViolation):
        sa.convergence_study(make_power_law(1.0, 2.0), [10, 10])


@pytest.mark.parametrize("sign", [1, -1])
@pytest.mark.parametrize("spec", [make_harmonic(1.0), make_power_law(1.0, 2.0),
                                  make_power_law(1.0, 1.0), make_box(1.0)],
                         ids=["harmonic", "p2", "p1", "box"])
def test_deficiency_small(spec, sign):
    assert sa.deficiency_probe(spec, 2, 4, sign).sigma_min >= 1 - 1e-12


def test_deficiency_p2_against_scipy():
    spec = make_power_law(1.0, 2.0)
    probe = sa.deficiency_probe(spec, 50, 150, +1)
    A = build_truncation(spec, 150).matrix[:, :50].copy()
    A[np.arange(50), np.arange(50)] += 1j
    assert probe.sigma_min == pytest.approx(scipy.linalg.svdvals(A)[-1], rel=1e-12)
    assert probe.sigma_min >= 1 - 1e-10
    assert np.linalg.norm(probe.candidate) == pytest.approx(1.0)
    assert 0 <= probe.high_level_mass <= 1


@pytest.mark.parametrize("channel", sa.CHANNELS)
def test_degenerate_channels(channel):
    probe = sa.deficiency_probe(make_power_law(1.0, 2.0, M=2), 20, 60, -1, channel)
    assert probe.sigma_min >= 1 - 1e-10


def test_deficiency_shape_errors():
    with pytest.raises(InvalidProbeShape):
        sa.deficiency_probe(make_power_law(1.0, 2.0), 10, 10)
    with pytest.raises(InvalidParameter):
        sa.deficiency_probe(make_power_law(1.0, 2.0), 10, 30, channel="difference")
    with pytest.raises(InvalidParameter):
        sa.deficiency_probe(make_power_law(1.0, 2.0), 10, 30, sign=2)


@given(st.integers(0, 10**6), st.integers(2, 12))
def test_pythagoras_on_rectangular_system(seed, N):
    # ||(T + i) phi||**2 = ||T phi||**2 + ||phi||**2 for phi on the first N levels.
    rng = np.random.default_rng(seed)
    T = build_truncation(make_power_law(1.0, 2.0), 3 * N).matrix[:, :N]
    phi = rng.normal(size=N) + 1j * rng.normal(size=N)
    A = T.copy()
    A[np.arange(N), np.arange(N)] += 1j
    lhs = np.linalg.norm(A @ phi) ** 2
    rhs = np.linalg.norm(T @ phi) ** 2 + np.linalg.norm(phi) ** 2
    assert lhs == pytest.approx(rhs, rel=1e-12)


def _rational_vector(rng, L):
    entries = {}
    for s in range(1, L + 1):
        re, im = Fraction(rng.randint(-9, 9), rng.randint(1, 6)), Fraction(rng.randint(-9, 9), 2)
        entries[(s, 1)] = GaussRat(re, im)
    return FiniteVector(entries, 1, True)


def test_symmetry_form_basis():
    e1, e2 = FiniteVector.basis(1, exact=True), FiniteVector.basis(2, exact=True)
    assert sa.symmetry_form_check(make_harmonic(1), e1, e2) == 0


@given(st.integers(0, 10**6))
def test_symmetry_form_random(seed):
    rng = random.Random(seed)
    phi, psi = _rational_vector(rng, 8), _rational_vector(rng, 8)
    assert sa.symmetry_form_check(make_power_law(1, 2), phi, psi) == 0
    fphi = FiniteVector({k: complex(v) for k, v in phi.items()})
    fpsi = FiniteVector({k: complex(v) for k, v in psi.items()})
    gap = sa.symmetry_form_check(make_power_law(1.0, 2.0), fphi, fpsi)
    assert gap <= 1e-13 * fphi.norm() * fpsi.norm()
