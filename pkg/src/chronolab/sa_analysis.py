"""Numerical evidence for symmetry and spectral reality of the time operator.

Nothing here proves essential self-adjointness (a statement about the
infinite operator).  The module produces finite-dimensional diagnostics:
real spectra of truncations, convergence of leading eigenvalues under the
Hilbert-Schmidt condition, and the ``sigma_min >= 1`` law for rectangular
``(T +- i)`` systems, which any symmetric operator must satisfy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParameter, InvalidProbeShape, NumericalFailure, PreconditionViolation
from .exact import GaussRat
from .spectra import Spectrum
from .timeop import (
    FiniteVector,
    TruncatedOperator,
    apply_to_finite,
    build_truncation,
    operator_norm_bound,
)


@dataclass(frozen=True)
class SpectralSummary:
    N: int
    M: int
    eigenvalues: np.ndarray  # sorted ascending
    max_imag_part: float
    extreme_abs: float

    def top(self, K: int) -> np.ndarray:
        """The ``K`` algebraically largest eigenvalues, descending."""
        return self.eigenvalues[::-1][:K]


def eigen_summary(T: TruncatedOperator) -> SpectralSummary:
    """Eigenvalues of a truncation.

    Sorted values come from the Hermitian solver.  ``max_imag_part`` is
    measured independently with the general (non-symmetric) solver, so a
    construction bug that broke Hermiticity would show up there.
    """
    A = T.complex_matrix()
    try:
        vals = np.linalg.eigvalsh(A)
        general = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(vals)) or not np.all(np.isfinite(general)):
        raise NumericalFailure("eigensolver returned non-finite values")
    max_imag = float(np.max(np.abs(general.imag))) if len(general) else 0.0
    extreme = float(np.max(np.abs(vals))) if len(vals) else 0.0
    return SpectralSummary(T.N, T.M, vals, max_imag, extreme)


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    leading: np.ndarray
    diffs: Optional[np.ndarray]  # |lambda_k(N_j) - lambda_k(N_{j-1})|; None on the first row
    max_imag_part: float
    extreme_abs: float
    norm_bound: float


def convergence_study(spec: Spectrum, N_list: Sequence[int], K: int = 5) -> list[ConvergenceRow]:
    """Leading eigenvalues of successive truncations and their increments."""
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise PreconditionViolation("N_list must be strictly increasing")
    rows, prev = [], None
    for N in N_list:
        summary = eigen_summary(build_truncation(spec, N))
        lead = summary.top(K)
        diffs = None
        if prev is not None:
            k = min(len(lead), len(prev))
            diffs = np.abs(lead[:k] - prev[:k])
        rows.append(ConvergenceRow(N, lead, diffs, summary.max_imag_part, summary.extreme_abs,
                                   operator_norm_bound(spec, N)))
        prev = lead
    return rows


# ---------------------------------------------------------------------------
# deficiency probe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeficiencyProbe:
    sign: int
    rows: int  # R, in levels
    cols: int  # N, in levels
    channel: str
    sigma_min: float
    candidate: np.ndarray
    high_level_mass: float  # fraction of |candidate|**2 on levels > N/2

    def to_dict(self) -> dict:
        return {
            "sign": self.sign,
            "R": self.rows,
            "N": self.cols,
            "channel": self.channel,
            "sigma_min": self.sigma_min,
            "high_level_mass": self.high_level_mass,
            "candidate_re": [float(x) for x in self.candidate.real],
            "candidate_im": [float(x) for x in self.candidate.imag],
        }


CHANNELS = ("full", "difference", "symmetric")


def _channel_matrix(spec: Spectrum, R: int, channel: str) -> tuple[np.ndarray, int]:
    """Operator on ``R`` levels for the chosen channel, and its labels per level.

    ``difference``: the coupled equations for ``eta_{s,k} - eta_{s,l}`` reduce
    to the non-degenerate operator with reversed sign.  ``symmetric``: for
    label-independent ``eta`` they reduce to ``(M - 1)`` times that operator.
    """
    T = build_truncation(spec, R)
    if channel == "full":
        return T.complex_matrix(), spec.M
    if spec.M < 2:
        raise InvalidParameter(f"channel {channel!r} needs M >= 2")
    T1 = T.complex_matrix()[0::spec.M, 1::spec.M]  # labels (1, 2): equals the M = 1 operator
    if channel == "difference":
        return -T1, 1
    if channel == "symmetric":
        return -(spec.M - 1) * T1, 1
    raise InvalidParameter(f"unknown channel {channel!r}; expected one of {CHANNELS}")


def deficiency_probe(spec: Spectrum, N: int, R: Optional[int] = None, sign: int = +1,
                     channel: str = "full") -> DeficiencyProbe:
    """Smallest singular value of the rectangular system ``(T + sign*i) phi``.

    Columns are the kets on levels ``<= N``; rows are levels ``<= R``, so rows
    beyond ``N`` capture leakage into discarded levels.  For any symmetric
    operator ``||(T +- i) phi||**2 = ||T phi||**2 + ||phi||**2``, hence
    ``sigma_min >= 1``.
    """
    R = 3 * N if R is None else R
    if sign not in (1, -1):
        raise InvalidParameter("sign must be +1 or -1")
    if N < 2:
        raise PreconditionViolation(f"probe needs N >= 2, got {N}")
    if R <= N:
        raise InvalidProbeShape(f"rectangular probe needs R > N (got R={R}, N={N})")
    A, m = _channel_matrix(spec, R, channel)
    cols = N * m
    system = A[:, :cols].copy()
    system[np.arange(cols), np.arange(cols)] += sign * 1j
    try:
        _, sv, vh = np.linalg.svd(system, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD failed: {exc}") from exc
    cand = vh[-1].conj()
    weights = np.abs(cand) ** 2
    levels = np.repeat(np.arange(1, N + 1), m)
    high = float(np.sum(weights[levels > N / 2]) / np.sum(weights))
    return DeficiencyProbe(sign, R, N, channel, float(sv[-1]), cand, high)


# ---------------------------------------------------------------------------
# symmetry of the sesquilinear form
# ---------------------------------------------------------------------------

def _inner(psi: FiniteVector, phi: FiniteVector):
    zero = GaussRat() if psi.exact else 0j
    total = zero
    for key, v in psi.items():
        w = phi.entries.get(key)
        if w is not None:
            total = total + v.conjugate() * w
    return total


def symmetry_form_check(spec: Spectrum, phi: FiniteVector, psi: FiniteVector):
    """``|<psi, T phi> - <T psi, phi>|`` for finite-support ``phi``, ``psi``.

    Both inner products only involve levels inside the supports, so the
    common horizon evaluation is complete and no tail correction enters.
    Exact (a :class:`~fractions.Fraction` or 0) in rational mode.
    """
    S = max(phi.support_horizon, psi.support_horizon, 1)
    t_phi = apply_to_finite(spec, phi, S, require_tail=False).image
    t_psi = apply_to_finite(spec, psi, S, require_tail=False).image
    diff = _inner(psi, t_phi) - _inner(t_psi, phi)
    return abs(diff)
