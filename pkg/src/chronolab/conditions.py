"""Summability hypotheses and the explicit bound constants ``A_N`` and ``B_L``.

Two conditions are tracked:

* inverse-square: ``sum_s E_s**-2`` finite (zero levels skipped in zero mode);
* Hilbert-Schmidt: ``sum over ordered pairs s != s' of (E_s - E_s')**-2`` finite.

Verdicts are three-valued.  ``Converges``/``Diverges`` are only issued for
parameter families where a rigorous argument is available; finite explicit
lists always get ``Unknown``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import BoundScanMismatch, IndexOutOfRange, InvalidParameter, PreconditionViolation
from .spectra import Kind, Spectrum

# Exact partial sums are also reported (as "p/q") up to these horizons.
EXACT_INVERSE_LIMIT = 256
EXACT_HS_LIMIT = 48
# Relative slack allowed between scan and analytic argmax in float mode.
SCAN_RTOL = 1e-12


class Verdict(str, Enum):
    CONVERGES = "Converges"
    DIVERGES = "Diverges"
    UNKNOWN = "Unknown"


class Method(str, Enum):
    CLOSED_FORM_EXPONENT = "ClosedFormExponent"
    INTEGRAL_TEST = "IntegralTest"
    PARTIAL_SUMS_ONLY = "PartialSumsOnly"


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    horizon: int
    partial_sums: list  # [(N, float value)], N increasing
    tail_bound: Optional[float]
    verdict: Verdict
    method: Method
    exact_value: Optional[Fraction] = None
    notes: list = field(default_factory=list)

    @property
    def value(self) -> float:
        return self.partial_sums[-1][1]

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "horizon": self.horizon,
            "partial_sums": [[n, v] for n, v in self.partial_sums],
            "tail_bound": self.tail_bound,
            "verdict": self.verdict.value,
            "method": self.method.value,
            "exact_value": None if self.exact_value is None else str(self.exact_value),
            "notes": list(self.notes),
        }


def checkpoints(N: int) -> list[int]:
    """Powers of two up to ``N``, always ending at ``N``."""
    pts, n = [], 1
    while n < N:
        pts.append(n)
        n *= 2
    pts.append(N)
    return pts


def _power_params(spec: Spectrum) -> Optional[tuple[float, float]]:
    """``(c, p)`` when ``E_s = c * s**p`` exactly, else ``None``."""
    if spec.kind is Kind.POWER_LAW:
        c, p = spec.params
        return float(c), float(p)
    if spec.kind is Kind.BOX:
        return float(spec.params[0]), 2.0
    return None


def _require_horizon(spec: Spectrum, N: int, minimum: int) -> None:
    if N < minimum:
        raise PreconditionViolation(f"horizon must be >= {minimum}, got {N}")
    if spec.length is not None and N > spec.length:
        raise IndexOutOfRange(f"horizon {N} beyond explicit spectrum of length {spec.length}")


# ---------------------------------------------------------------------------
# inverse-square condition
# ---------------------------------------------------------------------------

def inverse_square_partial(spec: Spectrum, N: int):
    """``sum_{s<=N, E_s != 0} E_s**-2`` in the spectrum's arithmetic mode."""
    _require_horizon(spec, N, 1)
    if spec.is_exact:
        return sum((1 / (e * e) for e in spec.eigenvalues(N) if e != 0), Fraction(0))
    E = spec.array(N)
    E = E[E != 0]
    return math.fsum(1.0 / (E * E))


def inverse_square_tail(spec: Spectrum, N: int) -> Optional[float]:
    """Integral-test bound on ``sum_{s>N} E_s**-2``; ``None`` when unavailable.

    Summands of every built-in family decrease monotonically, so the tail is
    bounded by the integral of the summand from ``N`` to infinity.
    """
    pw = _power_params(spec)
    if pw is not None:
        c, p = pw
        if p <= 0.5:
            return None
        return N ** (1.0 - 2.0 * p) / (c * c * (2.0 * p - 1.0))
    if spec.kind is Kind.HARMONIC:
        a = float(spec.hbar) * float(spec.params[0])
        # integral_N^inf (a (x - 1/2))**-2 dx
        return 1.0 / (a * a * (N - 0.5))
    return None


def inverse_square_sum(spec: Spectrum, N: int) -> ConditionReport:
    _require_horizon(spec, N, 1)
    pts = checkpoints(N)
    E = spec.array(N)
    terms = np.where(E != 0, 1.0 / np.where(E != 0, E, 1.0) ** 2, 0.0)
    cums = np.cumsum(terms)
    partial = [(n, float(cums[n - 1])) for n in pts]
    exact = None
    if spec.is_exact and N <= EXACT_INVERSE_LIMIT:
        exact = inverse_square_partial(spec, N)
        partial[-1] = (N, float(exact))
    notes = []
    if spec.zero_mode and np.any(E == 0):
        notes.append("zero eigenvalue skipped")

    pw = _power_params(spec)
    if pw is not None:
        verdict = Verdict.CONVERGES if pw[1] > 0.5 else Verdict.DIVERGES
        tail = inverse_square_tail(spec, N)
        method = Method.INTEGRAL_TEST if tail is not None else Method.CLOSED_FORM_EXPONENT
    elif spec.kind is Kind.HARMONIC:
        verdict, tail, method = Verdict.CONVERGES, inverse_square_tail(spec, N), Method.INTEGRAL_TEST
    else:
        verdict, tail, method = Verdict.UNKNOWN, None, Method.PARTIAL_SUMS_ONLY
        if spec.length is not None and N < spec.length:
            notes.append(f"truncated at {N} of {spec.length} explicit levels")
    return ConditionReport("inverse_square", N, partial, tail, verdict, method, exact, notes)


# ---------------------------------------------------------------------------
# Hilbert-Schmidt condition
# ---------------------------------------------------------------------------

def hs_partial(spec: Spectrum, N: int):
    """``sum_{s != s' <= N} (E_s - E_s')**-2`` over ordered pairs (energy units)."""
    _require_horizon(spec, N, 2)
    if spec.is_exact:
        E = spec.eigenvalues(N)
        total = Fraction(0)
        for k in range(1, N):
            for j in range(k):
                d = E[k] - E[j]
                total += 1 / (d * d)
        return 2 * total
    return float(_hs_cumulative(spec.array(N))[-1])


def _hs_cumulative(E: np.ndarray) -> np.ndarray:
    """Entry ``n-1`` holds the ordered-pair sum over levels ``<= n``."""
    inc = np.zeros(len(E))
    for k in range(1, len(E)):
        d = E[k] - E[:k]
        inc[k] = 2.0 * np.sum(1.0 / (d * d))
    return np.cumsum(inc)


def hs_tail(spec: Spectrum, N: int) -> Optional[float]:
    """Bound on the ordered-pair sum over pairs with ``max(s, s') > N``.

    For ``E_s = c s**p`` with ``p >= 1``, ``E_k - E_j >= c (k - j) k**(p-1)``
    for ``j < k``; summing over ``j`` and then ``k`` by the integral test gives
    ``(pi**2 / 3) N**(3 - 2p) / (c**2 (2p - 3))`` when ``p > 3/2``.
    """
    pw = _power_params(spec)
    if pw is None:
        return None
    c, p = pw
    if p <= 1.5:
        return None
    return (math.pi ** 2 / 3.0) * N ** (3.0 - 2.0 * p) / (c * c * (2.0 * p - 3.0))


def hilbert_schmidt_sum(spec: Spectrum, N: int) -> ConditionReport:
    _require_horizon(spec, N, 2)
    pts = [n for n in checkpoints(N) if n >= 2]
    cums = _hs_cumulative(spec.array(N))
    partial = [(n, float(cums[n - 1])) for n in pts]
    exact = None
    if spec.is_exact and N <= EXACT_HS_LIMIT:
        exact = hs_partial(spec, N)
        partial[-1] = (N, float(exact))
    notes = []
    pw = _power_params(spec)
    tail = None
    if pw is not None:
        p = pw[1]
        if p > 1.5:
            verdict, method, tail = Verdict.CONVERGES, Method.CLOSED_FORM_EXPONENT, hs_tail(spec, N)
        else:
            # Nearest-neighbour gaps alone: (E_{s+1} - E_s)**-2 >= const * s**(2 - 2p).
            verdict, method = Verdict.DIVERGES, Method.CLOSED_FORM_EXPONENT
    elif spec.kind is Kind.HARMONIC:
        # Constant gaps: every level contributes at least 2 * (hbar*omega0)**-2.
        verdict, method = Verdict.DIVERGES, Method.CLOSED_FORM_EXPONENT
    else:
        verdict, method = Verdict.UNKNOWN, Method.PARTIAL_SUMS_ONLY
    return ConditionReport("hilbert_schmidt", N, partial, tail, verdict, method, exact, notes)


# ---------------------------------------------------------------------------
# bound constants
# ---------------------------------------------------------------------------

def _ratio_term(e_low, e_high):
    if e_high == 0:
        raise InvalidParameter("bound constant undefined: zero eigenvalue in the outer range")
    return 1 / (1 - e_low / e_high)


def _scan_limit(spec: Spectrum, lo: int, probe_horizon: int) -> int:
    hi = max(probe_horizon, lo)
    if spec.length is not None:
        hi = min(hi, spec.length)
    return hi


def _beats(scan, analytic, exact: bool) -> bool:
    if exact:
        return scan > analytic
    return scan > analytic * (1 + SCAN_RTOL) + SCAN_RTOL


def bound_constant_A(spec: Spectrum, N: int, probe_horizon: Optional[int] = None):
    """Tail constant ``A_N = max (1 - E_s'/E_s)**-1`` over ``s' <= N < s``.

    The analytic maximiser is ``s' = N, s = N + 1``; a finite scan over
    ``s <= probe_horizon`` cross-checks it and a disagreement raises
    :class:`BoundScanMismatch`.
    """
    if N < 1:
        raise PreconditionViolation(f"N must be >= 1, got {N}")
    spec.check_level(N + 1)
    E = spec.eigenvalues(N + 1)
    analytic = _ratio_term(E[N - 1], E[N])
    hi = _scan_limit(spec, N + 1, probe_horizon if probe_horizon is not None else 4 * N + 8)
    outer = spec.eigenvalues(hi)[N:]
    scan = max(_ratio_term(el, eh) for eh in outer for el in E[:N])
    if _beats(scan, analytic, spec.is_exact):
        raise BoundScanMismatch(
            f"A_{N}: scan value {scan} exceeds analytic value {analytic}; "
            "eigenvalues are not positive and increasing on this window")
    return analytic


def _b_cell(e_k, e_sp, e_s):
    return (e_k - e_sp) * _ratio_term(e_k, e_s) * _ratio_term(e_sp, e_s)


def bound_constant_B(spec: Spectrum, L: int, probe_horizon: Optional[int] = None):
    """Energy-weighted constant ``B_L``.

    Maximum of ``(E_k - E_s') / ((1 - E_k/E_s)(1 - E_s'/E_s))`` over
    ``1 <= s' < k <= L < s``; the sup over ``s`` sits at ``s = L + 1``.
    """
    if L < 2:
        raise PreconditionViolation(f"L must be >= 2, got {L}")
    spec.check_level(L + 1)
    E = spec.eigenvalues(L + 1)
    cells = [(k, sp) for sp in range(L - 1) for k in range(sp + 1, L)]
    analytic = max(_b_cell(E[k], E[sp], E[L]) for k, sp in cells)
    hi = _scan_limit(spec, L + 1, probe_horizon if probe_horizon is not None else 4 * L + 8)
    outer = spec.eigenvalues(hi)[L:]
    scan = max(_b_cell(E[k], E[sp], es) for es in outer for k, sp in cells)
    if _beats(scan, analytic, spec.is_exact):
        raise BoundScanMismatch(
            f"B_{L}: scan value {scan} exceeds analytic value {analytic}; "
            "eigenvalues are not positive and increasing on this window")
    return analytic
