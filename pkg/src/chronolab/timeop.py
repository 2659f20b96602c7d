"""The characteristic time operator and its bounded diagonal perturbations.

Matrix elements between distinct levels are ``i*hbar/(E_s - E_s')``.  For
``M >= 2`` an element is nonzero only when both the level and the
degeneracy label differ (independent exclusion), so the degenerate builder
is ``kron(T_1, J - I)`` with ``J`` the all-ones ``M x M`` matrix.

Two representations are provided: dense truncations to the first ``N``
levels (:class:`TruncatedOperator`) and lazy application to finite-support
vectors (:func:`apply_to_finite`), which evaluates the exact image on any
requested set of levels.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from . import conditions
from .errors import InvalidParameter, NoTailBound, PreconditionViolation, WrongBuilder
from .exact import GaussRat, as_fraction
from .spectra import BasisIndex, Spectrum, check_index


class Arithmetic(str, Enum):
    EXACT = "ExactRational"
    FLOAT = "Float64Complex"


def imag_unit(exact: bool):
    return GaussRat(0, 1) if exact else 1j


def _coerce_scalar(value, exact: bool):
    if exact:
        if isinstance(value, GaussRat):
            return value
        if isinstance(value, complex):
            raise TypeError("complex floats are not allowed in an exact vector")
        return GaussRat(as_fraction(value))
    return complex(value)


# ---------------------------------------------------------------------------
# finite-support vectors
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FiniteVector:
    """Sparse vector over kets ``|s, r>``; zero entries are dropped."""

    entries: Mapping[BasisIndex, object]
    M: int = 1
    exact: bool = False

    def __post_init__(self):
        clean = {}
        for key, val in self.entries.items():
            key = check_index(key if isinstance(key, tuple) else (key, 1), self.M)
            val = _coerce_scalar(val, self.exact)
            if val != 0:
                clean[key] = val
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    @classmethod
    def zero(cls, M: int = 1, exact: bool = False) -> "FiniteVector":
        return cls({}, M, exact)

    @classmethod
    def basis(cls, s: int, r: int = 1, M: int = 1, exact: bool = False) -> "FiniteVector":
        return cls({(s, r): 1}, M, exact)

    @classmethod
    def from_dense(cls, values: Sequence, M: int = 1, exact: bool = False) -> "FiniteVector":
        """Inverse of :meth:`to_dense` (level-major flat layout)."""
        if len(values) % M:
            raise InvalidParameter(f"dense length {len(values)} not a multiple of M={M}")
        entries = {}
        for flat, val in enumerate(values):
            entries[(flat // M + 1, flat % M + 1)] = val
        return cls(entries, M, exact)

    @property
    def support_horizon(self) -> int:
        return max((k.s for k in self.entries), default=0)

    def __getitem__(self, key):
        key = BasisIndex(*key) if isinstance(key, tuple) else BasisIndex(key, 1)
        return self.entries.get(key, GaussRat() if self.exact else 0j)

    def items(self):
        return self.entries.items()

    def to_dense(self, N: int) -> np.ndarray:
        if self.support_horizon > N:
            raise PreconditionViolation(f"vector support {self.support_horizon} exceeds N={N}")
        if self.exact:
            out = np.empty(N * self.M, dtype=object)
            out[:] = [GaussRat() for _ in range(N * self.M)]
        else:
            out = np.zeros(N * self.M, dtype=complex)
        for (s, r), val in self.entries.items():
            out[(s - 1) * self.M + (r - 1)] = val
        return out

    def norm_sq(self):
        if self.exact:
            return sum((v.abs2() for v in self.entries.values()), Fraction(0))
        return math.fsum(abs(v) ** 2 for v in self.entries.values())

    def norm(self) -> float:
        return math.sqrt(float(self.norm_sq()))

    def max_abs(self) -> float:
        return max((float(abs(v)) for v in self.entries.values()), default=0.0)

    def l1(self):
        """``sum |phi|`` (exact when every modulus is rational)."""
        return sum((abs(v) for v in self.entries.values()), Fraction(0) if self.exact else 0.0)

    def column_sums(self) -> dict:
        """``sum_s phi_{s,r}`` for each label ``r``."""
        zero = GaussRat() if self.exact else 0j
        sums = {r: zero for r in range(1, self.M + 1)}
        for (s, r), val in self.entries.items():
            sums[r] = sums[r] + val
        return sums

    def is_zero(self) -> bool:
        return not self.entries

    def _check_compatible(self, other: "FiniteVector"):
        if other.M != self.M or other.exact != self.exact:
            raise InvalidParameter("vectors differ in degeneracy or arithmetic mode")

    def __add__(self, other: "FiniteVector") -> "FiniteVector":
        self._check_compatible(other)
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out[k] + v if k in out else v
        return FiniteVector(out, self.M, self.exact)

    def __sub__(self, other: "FiniteVector") -> "FiniteVector":
        return self + other.scale(-1)

    def scale(self, factor) -> "FiniteVector":
        return FiniteVector({k: v * factor for k, v in self.entries.items()}, self.M, self.exact)

    def map_values(self, fn: Callable) -> "FiniteVector":
        return FiniteVector({k: fn(k, v) for k, v in self.entries.items()}, self.M, self.exact)

    def restrict(self, levels: int) -> "FiniteVector":
        return FiniteVector({k: v for k, v in self.entries.items() if k.s <= levels},
                            self.M, self.exact)

    def __eq__(self, other):
        if not isinstance(other, FiniteVector):
            return NotImplemented
        return self.M == other.M and self.entries == other.entries

    def __repr__(self):
        body = ", ".join(f"{tuple(k)}: {v}" for k, v in self.entries.items())
        return f"FiniteVector({{{body}}}, M={self.M}, exact={self.exact})"


# ---------------------------------------------------------------------------
# diagonal perturbations
# ---------------------------------------------------------------------------

class PerturbationKind(str, Enum):
    CONSTANT = "Constant"
    SQUARE_SUMMABLE = "SquareSummable"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class PerturbationSequence:
    """Bounded real sequence ``alpha_{s,r}`` added on the diagonal.

    * ``Constant(tau)``: ``alpha = tau`` everywhere;
    * ``SquareSummable(amplitude, exponent)``: ``alpha_{s,r} = amplitude * s**-exponent``
      with ``exponent > 1/2`` so that ``sum alpha**2`` is finite;
    * ``Custom(values)``: flat level-major list, zero beyond its end.

    ``bound`` is the certified ``sup |alpha|``.
    """

    kind: PerturbationKind
    params: tuple
    exact: bool = False

    def __post_init__(self):
        if self.kind is PerturbationKind.SQUARE_SUMMABLE:
            amp, expo = self.params
            if not expo > 0.5:
                raise InvalidParameter("square-summable perturbation needs exponent > 1/2")
            if self.exact and not float(expo).is_integer():
                raise InvalidParameter("exact square-summable perturbation needs an integer exponent")

    @classmethod
    def constant(cls, tau, exact: bool = False):
        return cls(PerturbationKind.CONSTANT, (_num(tau, exact),), exact)

    @classmethod
    def square_summable(cls, amplitude, exponent, exact: bool = False):
        expo = int(exponent) if exact else float(exponent)
        return cls(PerturbationKind.SQUARE_SUMMABLE, (_num(amplitude, exact), expo), exact)

    @classmethod
    def custom(cls, values: Sequence, exact: bool = False):
        return cls(PerturbationKind.CUSTOM, tuple(_num(v, exact) for v in values), exact)

    @property
    def bound(self):
        if self.kind is PerturbationKind.CUSTOM:
            return max((abs(v) for v in self.params), default=0)
        return abs(self.params[0])

    def value(self, s: int, r: int = 1, M: int = 1):
        if self.kind is PerturbationKind.CONSTANT:
            return self.params[0]
        if self.kind is PerturbationKind.SQUARE_SUMMABLE:
            amp, expo = self.params
            if self.exact:
                return amp / Fraction(s) ** expo
            return amp * float(s) ** (-expo)
        flat = (s - 1) * M + (r - 1)
        if flat < len(self.params):
            return self.params[flat]
        return Fraction(0) if self.exact else 0.0

    @property
    def alpha_id(self) -> str:
        blob = json.dumps([self.kind.value, [str(p) for p in self.params], self.exact])
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def describe(self) -> str:
        return f"{self.kind.value}({', '.join(str(p) for p in self.params)})"


def _num(x, exact: bool):
    return as_fraction(x) if exact else float(x)


def parse_alpha(text: str, exact: bool = False) -> PerturbationSequence:
    """Parse ``const:TAU``, ``sqsum:AMP,EXP`` or ``custom:V1,V2,...``."""
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    parts = [p.strip() for p in rest.split(",") if p.strip()]
    try:
        if kind in ("const", "constant"):
            (tau,) = parts
            return PerturbationSequence.constant(_parse_num(tau, exact), exact)
        if kind in ("sqsum", "squaresummable", "square_summable"):
            amp, expo = parts
            return PerturbationSequence.square_summable(_parse_num(amp, exact),
                                                        _parse_num(expo, exact), exact)
        if kind == "custom":
            return PerturbationSequence.custom([_parse_num(p, exact) for p in parts], exact)
    except ValueError as exc:
        raise InvalidParameter(f"bad alpha spec {text!r}: {exc}") from None
    raise InvalidParameter(f"unknown alpha kind {kind!r} in {text!r}")


def _parse_num(token: str, exact: bool):
    value = Fraction(token)
    return value if exact else float(value)


def sample_perturbations(rng: random.Random, K: int, exact: bool = False,
                         base: Optional[PerturbationSequence] = None,
                         custom_length: int = 8) -> list[PerturbationSequence]:
    """``K`` seeded bounded perturbations.

    With ``base``, the first member is ``base`` itself and the rest share its
    family, with parameters drawn inside its bound (same exponent, same
    custom length).  Without ``base`` the kinds cycle Constant,
    SquareSummable, Custom with small rational parameters.
    """
    def draw(bound) -> Fraction:
        bound = as_fraction(bound) if exact else Fraction(float(bound))
        return bound * Fraction(rng.randint(-64, 64), 64)

    def make(kind, bound, expo, length):
        if kind is PerturbationKind.CONSTANT:
            return PerturbationSequence.constant(draw(bound), exact)
        if kind is PerturbationKind.SQUARE_SUMMABLE:
            return PerturbationSequence.square_summable(draw(bound), expo, exact)
        return PerturbationSequence.custom([draw(bound) for _ in range(length)], exact)

    out = [] if base is None else [base]
    kinds = list(PerturbationKind)
    while len(out) < K:
        if base is not None:
            expo = base.params[1] if base.kind is PerturbationKind.SQUARE_SUMMABLE else 1
            out.append(make(base.kind, base.bound, expo, len(base.params)))
        else:
            kind = kinds[len(out) % 3]
            expo = rng.randint(1, 3)
            out.append(make(kind, rng.randint(1, 10), expo, custom_length))
    return out[:K]


# ---------------------------------------------------------------------------
# truncations
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    matrix: np.ndarray
    index_map: tuple
    spectrum_id: str
    N: int
    M: int
    hbar: object
    arithmetic: Arithmetic
    alpha_applied: Optional[str] = None
    alpha: Optional[PerturbationSequence] = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.N * self.M

    @property
    def is_exact(self) -> bool:
        return self.arithmetic is Arithmetic.EXACT

    def flat_index(self, s: int, r: int = 1) -> int:
        return (s - 1) * self.M + (r - 1)

    def entry(self, row: tuple, col: tuple):
        return self.matrix[self.flat_index(*row), self.flat_index(*col)]

    def complex_matrix(self) -> np.ndarray:
        if self.is_exact:
            return np.vectorize(complex, otypes=[complex])(self.matrix)
        return self.matrix

    def is_hermitian(self) -> bool:
        """Exact equality with the conjugate transpose, in both modes."""
        if self.is_exact:
            A = self.matrix
            n = A.shape[0]
            return all(A[i, j] == A[j, i].conjugate() for i in range(n) for j in range(i, n))
        return bool(np.array_equal(self.matrix, self.matrix.conj().T))

    def frobenius_sq(self):
        if self.is_exact:
            return sum((v.abs2() for v in self.matrix.flat), Fraction(0))
        return math.fsum(np.abs(self.matrix.ravel()) ** 2)

    def trace(self):
        diag = [self.matrix[i, i] for i in range(self.dim)]
        return sum(diag, GaussRat()) if self.is_exact else complex(np.sum(diag))

    def block(self, N: int) -> np.ndarray:
        """Top-left ``(N*M)``-square block (whole levels only)."""
        return self.matrix[: N * self.M, : N * self.M]

    def sub_labels(self, r: int, rp: int) -> np.ndarray:
        """Level-by-level sub-matrix between labels ``r`` (rows) and ``rp`` (columns)."""
        return self.matrix[r - 1::self.M, rp - 1::self.M]

    def nonzeros(self):
        """``(row, col, value)`` with 0-based flat indices, sorted by (row, col)."""
        out = []
        for i in range(self.dim):
            for j in range(self.dim):
                v = self.matrix[i, j]
                if v != 0:
                    out.append((i, j, v))
        return out


def _index_map(N: int, M: int) -> tuple:
    return tuple(BasisIndex(s, r) for s in range(1, N + 1) for r in range(1, M + 1))


def _t1_matrix(spec: Spectrum, N: int) -> np.ndarray:
    if spec.is_exact:
        E = spec.eigenvalues(N)
        h = spec.hbar
        A = np.empty((N, N), dtype=object)
        for i in range(N):
            for j in range(N):
                A[i, j] = GaussRat() if i == j else GaussRat(0, h / (E[i] - E[j]))
        return A
    E = spec.array(N)
    D = E[:, None] - E[None, :]
    np.fill_diagonal(D, np.inf)
    A = np.zeros((N, N), dtype=complex)
    # hbar/(E_s - E_s') and hbar/(E_s' - E_s) are exact negatives in IEEE
    # arithmetic, so Hermiticity holds bit-for-bit.
    A.imag = float(spec.hbar) / D
    return A


def _finish(spec: Spectrum, N: int, M: int, matrix: np.ndarray) -> TruncatedOperator:
    arith = Arithmetic.EXACT if spec.is_exact else Arithmetic.FLOAT
    return TruncatedOperator(matrix, _index_map(N, M), spec.spectrum_id, N, M,
                             spec.hbar_value(), arith)


def _check_N(spec: Spectrum, N: int) -> None:
    if N < 2:
        raise PreconditionViolation(f"truncation needs N >= 2, got {N}")
    spec.check_level(N)


def build_t1(spec: Spectrum, N: int) -> TruncatedOperator:
    """``N x N`` truncation of the non-degenerate operator."""
    if spec.M != 1:
        raise WrongBuilder(f"build_t1 needs M = 1 (got M = {spec.M}); use build_tm")
    _check_N(spec, N)
    return _finish(spec, N, 1, _t1_matrix(spec, N))


def build_tm(spec: Spectrum, N: int) -> TruncatedOperator:
    """``(N M) x (N M)`` truncation of the degenerate operator (``M >= 2``)."""
    M = spec.M
    if M < 2:
        raise WrongBuilder("build_tm needs M >= 2; at M = 1 independent exclusion "
                           "leaves the zero operator, use build_t1")
    _check_N(spec, N)
    T1 = _t1_matrix(spec, N)
    if spec.is_exact:
        A = np.empty((N * M, N * M), dtype=object)
        zero = GaussRat()
        for i in range(N):
            for r in range(M):
                for j in range(N):
                    for rp in range(M):
                        A[i * M + r, j * M + rp] = T1[i, j] if r != rp else zero
        return _finish(spec, N, M, A)
    mix = np.ones((M, M)) - np.eye(M)
    A = np.zeros((N * M, N * M), dtype=complex)
    A.imag = np.kron(T1.imag, mix)
    return _finish(spec, N, M, A)


def build_truncation(spec: Spectrum, N: int) -> TruncatedOperator:
    return build_t1(spec, N) if spec.M == 1 else build_tm(spec, N)


def perturb(T: TruncatedOperator, alpha: PerturbationSequence) -> TruncatedOperator:
    """``T + diag(alpha)`` over the truncation window."""
    if alpha.exact != T.is_exact:
        raise InvalidParameter("perturbation arithmetic does not match the truncation")
    A = T.matrix.copy()
    for idx, (s, r) in enumerate(T.index_map):
        a = alpha.value(s, r, T.M)
        A[idx, idx] = A[idx, idx] + (GaussRat(a) if T.is_exact else a)
    return TruncatedOperator(A, T.index_map, T.spectrum_id, T.N, T.M, T.hbar,
                             T.arithmetic, alpha.alpha_id, alpha)


def hamiltonian_matrix(spec: Spectrum, N: int) -> np.ndarray:
    """Diagonal ``H`` on the first ``N`` levels, same layout and mode as the truncations."""
    M = spec.M
    if spec.is_exact:
        H = np.empty((N * M, N * M), dtype=object)
        H[:] = [[GaussRat() for _ in range(N * M)] for _ in range(N * M)]
        for i, e in enumerate(spec.eigenvalues(N)):
            for r in range(M):
                H[i * M + r, i * M + r] = GaussRat(e)
        return H
    return np.diag(np.repeat(spec.array(N), M)).astype(complex)


# ---------------------------------------------------------------------------
# lazy application
# ---------------------------------------------------------------------------

class ApplyResult(NamedTuple):
    image: FiniteVector
    tail_norm_bound: Optional[float]


def _check_vector(spec: Spectrum, phi: FiniteVector) -> None:
    if phi.M != spec.M:
        raise InvalidParameter(f"vector has M={phi.M}, spectrum has M={spec.M}")
    if phi.exact != spec.is_exact:
        raise InvalidParameter("vector arithmetic does not match the spectrum")


def image_coefficient(spec: Spectrum, phi: FiniteVector, s: int, r: int = 1,
                      alpha: Optional[PerturbationSequence] = None, energies=None):
    """``(T phi)_{s,r}`` evaluated exactly from the defining double sum."""
    Es = spec.eigenvalue(s) if energies is None else energies(s)
    acc = GaussRat() if spec.is_exact else 0j
    for (sp, rp), val in phi.items():
        if sp == s or (spec.M > 1 and rp == r):
            continue
        Esp = spec.eigenvalue(sp) if energies is None else energies(sp)
        acc = acc + val / (Es - Esp)
    # i*hbar is common to every off-diagonal term.
    total = acc * (imag_unit(spec.is_exact) * spec.hbar_value())
    if alpha is not None:
        diag = phi[(s, r)]
        if diag != 0:
            total = total + diag * alpha.value(s, r, spec.M)
    return total


def _tail_norm_bound(spec: Spectrum, phi: FiniteVector, S: int) -> float:
    report = conditions.inverse_square_sum(spec, max(S, 1))
    if report.verdict is not conditions.Verdict.CONVERGES or report.tail_bound is None:
        raise NoTailBound(f"inverse-square condition verdict is {report.verdict.value}; "
                          "no rigorous tail bound")
    if phi.is_zero():
        return 0.0
    A = float(conditions.bound_constant_A(spec, phi.support_horizon))
    if spec.M == 1:
        weight = float(phi.l1()) ** 2
    else:
        weight = 0.0
        for r in range(1, spec.M + 1):
            weight += math.fsum(float(abs(v)) for (sp, rp), v in phi.items() if rp != r) ** 2
    return float(spec.hbar) * A * math.sqrt(weight * report.tail_bound)


def apply_to_finite(spec: Spectrum, phi: FiniteVector, S: int,
                    alpha: Optional[PerturbationSequence] = None,
                    require_tail: bool = True) -> ApplyResult:
    """Image of ``phi`` on levels ``1..S`` plus a bound on the norm beyond ``S``.

    ``tail_norm_bound`` bounds ``||P_{>S} T phi||`` via
    ``hbar * A_N * sqrt(W * sum_{s>S} E_s**-2)``, where ``N`` is the support
    horizon and ``W = (sum |phi|)**2`` (for ``M >= 2`` the sum over labels
    of the squared off-label ``l1`` masses).  If the inverse-square condition
    is not certified, :class:`NoTailBound` is raised carrying ``.image``
    unless ``require_tail`` is false, in which case the bound is ``None``.
    """
    _check_vector(spec, phi)
    if S < phi.support_horizon:
        raise PreconditionViolation(f"S={S} below support horizon {phi.support_horizon}")
    cache = {}

    def energies(s):
        if s not in cache:
            cache[s] = spec.eigenvalue(s)
        return cache[s]

    coeffs = {}
    for s in range(1, S + 1):
        for r in range(1, spec.M + 1):
            coeffs[(s, r)] = image_coefficient(spec, phi, s, r, alpha, energies)
    image = FiniteVector(coeffs, spec.M, spec.is_exact)
    try:
        tail = _tail_norm_bound(spec, phi, S)
    except NoTailBound as exc:
        if require_tail:
            raise NoTailBound(str(exc), image=image) from None
        tail = None
    return ApplyResult(image, tail)


def apply_hamiltonian(spec: Spectrum, phi: FiniteVector) -> FiniteVector:
    return phi.map_values(lambda k, v: v * spec.eigenvalue(k.s))


def operator_norm_bound(spec: Spectrum, N: int, M: Optional[int] = None,
                        include_tail: bool = False) -> float:
    """``M * hbar * sqrt(HS partial sum)``: bounds the truncation's operator norm.

    With ``include_tail`` the certified Hilbert-Schmidt tail is added, giving
    a bound valid for every truncation; raises if no tail is certified.
    """
    M = spec.M if M is None else M
    hs = float(conditions.hs_partial(spec, N))
    if include_tail:
        tail = conditions.hs_tail(spec, N)
        if tail is None:
            raise NoTailBound("Hilbert-Schmidt condition not certified for this spectrum")
        hs += tail
    return M * float(spec.hbar) * math.sqrt(hs)
