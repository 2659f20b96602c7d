"""Canonical-domain subspaces and exact verification of ``[T, H]``.

Elements of the canonical domain are finite combinations of difference
vectors ``|i, k> - |j, k>`` (``j < i``), i.e. vectors whose coefficients sum
to zero separately for every degeneracy label ``k``.  That zero-sum
property is what keeps ``(TH - HT) phi`` finitely supported: beyond the
support every coefficient of the commutator is ``-i hbar`` times a sum of
column sums.

The commutator is evaluated through the operators themselves,
``T(H phi) - H(T phi)``, with :func:`chronolab.timeop.image_coefficient`;
:func:`matrix_commutator_apply` is the independent dense-matrix route.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from . import conditions
from .errors import EmptySubspace, InvalidGenerator, InvalidParameter, NotInCommutatorDomain
from .exact import GaussRat
from .spectra import Spectrum
from .timeop import (
    FiniteVector,
    PerturbationSequence,
    build_truncation,
    hamiltonian_matrix,
    imag_unit,
    image_coefficient,
    perturb,
)

# Float-mode tolerance on per-label column sums, relative to sum |phi|.
COLUMN_SUM_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class DcElement:
    """``sum a_{i,j,k} (|i,k> - |j,k>)`` over ``1 <= j < i <= L``, ``1 <= k <= M``."""

    coefficients: Mapping[tuple, object]
    L: int
    M: int = 1
    exact: bool = True
    _expansion: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.L < 2:
            raise EmptySubspace(f"canonical domain needs L >= 2, got {self.L}")
        for key in self.coefficients:
            i, j, k = key if len(key) == 3 else (*key, 1)
            if not (1 <= j < i <= self.L and 1 <= k <= self.M):
                raise InvalidGenerator(
                    f"generator index {key} outside 1 <= j < i <= {self.L}, 1 <= k <= {self.M}")

    def items(self):
        for key, val in self.coefficients.items():
            yield (key if len(key) == 3 else (*key, 1)), val

    @property
    def expansion(self) -> FiniteVector:
        if not self._expansion:
            self._expansion.append(expand(self))
        return self._expansion[0]


def expand(d: DcElement) -> FiniteVector:
    """Coefficients ``phi_{s,k} = sum_{l<s} a_{s,l,k} - sum_{l>s} a_{l,s,k}``."""
    zero = GaussRat() if d.exact else 0j
    phi = {(s, k): zero for s in range(1, d.L + 1) for k in range(1, d.M + 1)}
    for (i, j, k), a in d.items():
        a = GaussRat(a) if d.exact and not isinstance(a, GaussRat) else a
        phi[(i, k)] = phi[(i, k)] + a
        phi[(j, k)] = phi[(j, k)] - a
    return FiniteVector(phi, d.M, d.exact)


def dc_generators(L: int, M: int = 1, exact: bool = True) -> list[DcElement]:
    """All ``M L (L - 1) / 2`` difference generators up to level ``L``."""
    if L < 2:
        raise EmptySubspace(f"canonical domain needs L >= 2, got {L}")
    one = 1 if exact else 1.0
    return [DcElement({(i, j, k): one}, L, M, exact)
            for k in range(1, M + 1) for j in range(1, L) for i in range(j + 1, L + 1)]


def random_rational(rng: random.Random, span: int = 9, denom: int = 7) -> Fraction:
    return Fraction(rng.randint(-span, span), rng.randint(1, denom))


def random_dc_element(rng: random.Random, L: int, M: int = 1, exact: bool = True,
                      complex_coeffs: bool = True, symmetric_labels: bool = False,
                      density: float = 1.0) -> DcElement:
    """Seeded random element with (Gaussian-)rational coefficients.

    ``symmetric_labels`` copies each coefficient to every label, producing
    ``phi_{s,1} = ... = phi_{s,M}``.
    """
    coeffs = {}
    for j in range(1, L):
        for i in range(j + 1, L + 1):
            if rng.random() > density:
                continue
            shared = None
            for k in range(1, M + 1):
                if shared is None or not symmetric_labels:
                    re = random_rational(rng)
                    im = random_rational(rng) if complex_coeffs else Fraction(0)
                    shared = GaussRat(re, im) if exact else complex(float(re), float(im))
                coeffs[(i, j, k)] = shared
    return DcElement(coeffs, L, M, exact)


def rowmix(phi: FiniteVector) -> FiniteVector:
    """Replace ``phi_{s,r}`` by ``sum_{r' != r} phi_{s,r'}``; identity when ``M = 1``.

    For ``M = 1`` the non-degenerate operator has no label exclusion, so the
    commutator law reduces to ``i hbar phi`` and the mixing is the identity.
    """
    if phi.M == 1:
        return phi
    zero = GaussRat() if phi.exact else 0j
    levels = sorted({k.s for k in phi.entries})
    out = {}
    for s in levels:
        row = [phi[(s, r)] for r in range(1, phi.M + 1)]
        total = sum(row, zero)
        for r in range(1, phi.M + 1):
            out[(s, r)] = total - row[r - 1]
    return FiniteVector(out, phi.M, phi.exact)


def check_commutator_domain(phi: FiniteVector) -> None:
    sums = phi.column_sums()
    if phi.exact:
        bad = {r: v for r, v in sums.items() if v != 0}
    else:
        scale = max(float(phi.l1()), 1.0)
        bad = {r: v for r, v in sums.items() if abs(v) > COLUMN_SUM_RTOL * scale}
    if bad:
        raise NotInCommutatorDomain(
            "per-label coefficient sums must vanish; nonzero for labels "
            + ", ".join(f"r={r}: {v}" for r, v in sorted(bad.items())))


def commutator_coefficient(spec: Spectrum, phi: FiniteVector, s: int, r: int = 1,
                           alpha: Optional[PerturbationSequence] = None):
    """``((T H - H T) phi)_{s,r}`` for any level ``s``, inside or beyond the support."""
    h_phi = phi.map_values(lambda k, v: v * spec.eigenvalue(k.s))
    th = image_coefficient(spec, h_phi, s, r, alpha)
    ht = image_coefficient(spec, phi, s, r, alpha) * spec.eigenvalue(s)
    return th - ht


def commutator_apply(spec: Spectrum, phi: FiniteVector,
                     alpha: Optional[PerturbationSequence] = None,
                     extra_levels: int = 0) -> FiniteVector:
    """``(T H - H T) phi`` on levels ``1..support + extra_levels``.

    Raises :class:`NotInCommutatorDomain` unless every per-label column sum
    of ``phi`` vanishes (exactly, or to ``COLUMN_SUM_RTOL`` in float mode).
    """
    if phi.M != spec.M or phi.exact != spec.is_exact:
        raise InvalidParameter("vector does not match the spectrum's degeneracy/arithmetic")
    check_commutator_domain(phi)
    top = phi.support_horizon + extra_levels
    energies = {s: spec.eigenvalue(s) for s in range(1, top + 1)}
    # Precompute H phi once; image_coefficient is linear in its vector.
    h_phi = phi.map_values(lambda k, v: v * energies[k.s])
    out = {}
    for s in range(1, top + 1):
        Es = energies[s]
        for r in range(1, spec.M + 1):
            out[(s, r)] = (image_coefficient(spec, h_phi, s, r, alpha, energies.__getitem__)
                           - image_coefficient(spec, phi, s, r, alpha, energies.__getitem__) * Es)
    return FiniteVector(out, spec.M, spec.is_exact)


def closed_form_commutator(spec: Spectrum, phi: FiniteVector, levels: int) -> FiniteVector:
    """``-i hbar sum_{s' != s, r' != r} phi_{s',r'}`` (no label exclusion at ``M = 1``)."""
    ih = imag_unit(spec.is_exact) * spec.hbar_value()
    out = {}
    zero = GaussRat() if spec.is_exact else 0j
    for s in range(1, levels + 1):
        for r in range(1, spec.M + 1):
            acc = zero
            for (sp, rp), v in phi.items():
                if sp != s and (spec.M == 1 or rp != r):
                    acc = acc + v
            out[(s, r)] = -(ih * acc)
    return FiniteVector(out, spec.M, spec.is_exact)


def matrix_commutator_apply(spec: Spectrum, phi: FiniteVector, N: int,
                            alpha: Optional[PerturbationSequence] = None) -> FiniteVector:
    """Dense route: ``(T_N H_N - H_N T_N)`` times the embedded ``phi``."""
    T = build_truncation(spec, N)
    if alpha is not None:
        T = perturb(T, alpha)
    H = hamiltonian_matrix(spec, N)
    C = T.matrix.dot(H) - H.dot(T.matrix)
    v = C.dot(phi.to_dense(N))
    return FiniteVector.from_dense(list(v), spec.M, spec.is_exact)


@dataclass(frozen=True)
class CommutatorResidual:
    commutator: FiniteVector
    residual: FiniteVector
    defect_vector: FiniteVector
    exact: bool

    @property
    def exact_zero(self) -> Optional[bool]:
        return self.residual.is_zero() if self.exact else None

    @property
    def defect_zero(self) -> Optional[bool]:
        return self.defect_vector.is_zero() if self.exact else None

    @property
    def residual_norm(self) -> float:
        return self.residual.norm()

    @property
    def defect_norm(self) -> float:
        return self.defect_vector.norm()

    @property
    def max_abs(self) -> float:
        return self.residual.max_abs()


def ccr_residual(spec: Spectrum, phi: FiniteVector,
                 alpha: Optional[PerturbationSequence] = None) -> CommutatorResidual:
    """Residual against ``i hbar phi`` and defect against ``i hbar rowmix(phi)``."""
    comm = commutator_apply(spec, phi, alpha)
    ih = imag_unit(spec.is_exact) * spec.hbar_value()
    residual = comm - phi.scale(ih)
    defect = comm - rowmix(phi).scale(ih)
    return CommutatorResidual(comm, residual, defect, spec.is_exact)


def closure_holds(spec: Spectrum, phi: FiniteVector, beyond: int = 10,
                  alpha: Optional[PerturbationSequence] = None) -> bool:
    """Commutator image vanishes on the ``beyond`` levels past the support."""
    top = phi.support_horizon
    for s in range(top + 1, top + beyond + 1):
        for r in range(1, spec.M + 1):
            c = commutator_coefficient(spec, phi, s, r, alpha)
            if c != 0:
                return False
    return True


def generator_suite(L: int, M: int, exact: bool, rng: Optional[random.Random] = None,
                    n_random: int = 0, min_L: int = 2) -> list[tuple[str, DcElement]]:
    """Named suite: every generator up to ``L`` plus ``n_random`` random elements."""
    suite = []
    for g in dc_generators(L, M, exact):
        ((i, j, k), _), = g.items()
        suite.append((f"gen({i},{j},{k})", g))
    if n_random:
        rng = rng or random.Random(0)
        for n in range(n_random):
            Ln = rng.randint(min_L, L)
            suite.append((f"rand{n}(L={Ln})", random_dc_element(rng, Ln, M, exact)))
    return suite


# ---------------------------------------------------------------------------
# tail inequalities (non-degenerate case)
# ---------------------------------------------------------------------------

# Relative slack when a side is a float (moduli of Gaussian rationals are
# generally irrational); rational sides are compared exactly.
TAIL_FLOAT_RTOL = 1e-12


@dataclass(frozen=True)
class TailCheck:
    """One side-by-side comparison ``measured <= bound``."""

    level: int
    measured: object
    bound: object

    @property
    def exact(self) -> bool:
        return isinstance(self.measured, Fraction) and isinstance(self.bound, Fraction)

    @property
    def holds(self) -> bool:
        if self.exact:
            return self.measured <= self.bound
        return self.measured <= self.bound * (1 + TAIL_FLOAT_RTOL)


def _resolvent_sum(spec: Spectrum, phi: FiniteVector, s: int):
    """``sum_{s'} phi_{s'} / (E_s - E_s')`` (the image coefficient without ``i hbar``)."""
    Es = spec.eigenvalue(s)
    total = GaussRat() if spec.is_exact else 0j
    for (sp, _), v in phi.items():
        total = total + v / (Es - spec.eigenvalue(sp))
    return total


def _abs2(z):
    return z.abs2() if isinstance(z, GaussRat) else abs(z) ** 2


def a_tail_checks(spec: Spectrum, phi: FiniteVector, S: int) -> list[TailCheck]:
    """For every ``N < S' <= S``: ``sum_{N<s<=S'} |sum_{s'} phi_{s'}/(E_s - E_s')|**2``
    against ``A_N**2 (sum |phi|)**2 sum_{N<s<=S'} E_s**-2``, ``N`` the support horizon.

    Exact on rational input whenever ``sum |phi|`` is rational.
    """
    if spec.M != 1:
        raise InvalidParameter("tail inequalities are stated for M = 1")
    N = phi.support_horizon
    zero = Fraction(0) if spec.is_exact else 0.0
    if N == 0:
        return [TailCheck(level, zero, zero) for level in range(1, S + 1)]
    if S <= N:
        raise InvalidParameter(f"need S > support horizon {N}, got S={S}")
    A = conditions.bound_constant_A(spec, N)
    scale = A * A * phi.l1() ** 2
    measured, inv_sq, out = zero, zero, []
    for s in range(N + 1, S + 1):
        measured += _abs2(_resolvent_sum(spec, phi, s))
        inv_sq += 1 / spec.eigenvalue(s) ** 2
        out.append(TailCheck(s, measured, scale * inv_sq))
    return out


def a_tail_check(spec: Spectrum, phi: FiniteVector, S: int) -> TailCheck:
    """The :func:`a_tail_checks` comparison at horizon ``S`` alone."""
    return a_tail_checks(spec, phi, S)[-1]


def b_tail_checks(spec: Spectrum, d: DcElement, S: int) -> list[TailCheck]:
    """Per level ``L < s <= S``: ``|sum phi_{s'}/(E_s - E_s')|`` squared against
    ``(B_L sum |a| / E_s**2)**2``, for a canonical-domain element of horizon ``L``.

    Squares are compared so that Gaussian-rational coefficients stay exact.
    """
    if spec.M != 1 or d.M != 1:
        raise InvalidParameter("tail inequalities are stated for M = 1")
    phi = d.expansion
    L = d.L
    B = conditions.bound_constant_B(spec, L)
    weight = sum((abs(a) for _, a in d.items()), Fraction(0) if d.exact else 0.0)
    out = []
    for s in range(L + 1, S + 1):
        Es = spec.eigenvalue(s)
        out.append(TailCheck(s, _abs2(_resolvent_sum(spec, phi, s)),
                             (B * weight / (Es * Es)) ** 2))
    return out
