"""Hamiltonian spectral data: the only input every operator is built from.

Levels are indexed from ``s = 1``.  Each level carries ``M`` orthonormal
eigenvectors labelled ``r = 1..M``; flat matrix indices are level-major,
``(s - 1) * M + (r - 1)``, so truncating in ``s`` never splits a block.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .errors import (
    IndexOutOfRange,
    InvalidParameter,
    NotStrictlyIncreasing,
    ZeroEigenvalue,
)
from .exact import as_fraction

Number = Union[int, float, Fraction]


class Kind(str, Enum):
    POWER_LAW = "power_law"
    HARMONIC = "harmonic"
    BOX = "box"
    EXPLICIT = "explicit"


class Exactness(str, Enum):
    EXACT = "exact"
    FLOAT64 = "float64"


class BasisIndex(NamedTuple):
    """Ket label ``|s, r>``; plain ``(s, r)`` tuples compare equal."""

    s: int
    r: int = 1


def check_index(index, M: int) -> BasisIndex:
    s, r = index
    if not (isinstance(s, (int, np.integer)) and isinstance(r, (int, np.integer))):
        raise InvalidParameter(f"basis index {index!r} must be integers")
    if s < 1 or not 1 <= r <= M:
        raise InvalidParameter(f"basis index {index!r} outside s>=1, 1<=r<={M}")
    return BasisIndex(int(s), int(r))


def _is_rational_input(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def _parse_exactness(exactness) -> Optional[Exactness]:
    if exactness is None or isinstance(exactness, Exactness):
        return exactness
    try:
        return Exactness(str(exactness).lower())
    except ValueError:
        aliases = {"exactrational": Exactness.EXACT, "rational": Exactness.EXACT,
                   "float": Exactness.FLOAT64}
        key = str(exactness).lower().replace("_", "")
        if key in aliases:
            return aliases[key]
        raise InvalidParameter(f"unknown exactness {exactness!r}") from None


def _positive(name: str, value) -> None:
    try:
        ok = value > 0
    except TypeError:
        raise InvalidParameter(f"{name} must be a number, got {value!r}") from None
    if not ok:
        raise InvalidParameter(f"{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class Spectrum:
    """Immutable eigenvalue sequence ``E_1 < E_2 < ...`` with degeneracy ``M``.

    ``params`` holds the family parameters as stored numbers: ``(c, p)`` for
    power laws, ``(omega0,)`` for the oscillator, ``(scale,)`` for the box,
    and nothing for explicit lists (their energies live in ``values``).
    In exact mode all stored numbers are :class:`Fraction`.
    """

    kind: Kind
    params: tuple = ()
    M: int = 1
    hbar: Number = 1
    exactness: Exactness = Exactness.FLOAT64
    zero_mode: bool = False
    values: tuple = field(default=())

    @property
    def is_exact(self) -> bool:
        return self.exactness is Exactness.EXACT

    @property
    def length(self) -> Optional[int]:
        """Number of available levels; ``None`` for infinite families."""
        return len(self.values) if self.kind is Kind.EXPLICIT else None

    def check_level(self, s: int) -> None:
        if s < 1:
            raise IndexOutOfRange(f"level s={s} must be >= 1")
        if self.length is not None and s > self.length:
            raise IndexOutOfRange(f"level s={s} beyond explicit spectrum of length {self.length}")

    def eigenvalue(self, s: int):
        """``E_s`` in the spectrum's arithmetic mode."""
        self.check_level(s)
        if self.kind is Kind.EXPLICIT:
            return self.values[s - 1]
        if self.kind is Kind.POWER_LAW:
            c, p = self.params
            if self.is_exact:
                return c * Fraction(s) ** int(p)
            return float(c) * float(s) ** float(p)
        if self.kind is Kind.BOX:
            (scale,) = self.params
            if self.is_exact:
                return scale * s * s
            return float(scale) * float(s) ** 2
        (omega0,) = self.params
        if self.is_exact:
            return self.hbar * omega0 * (s - Fraction(1, 2))
        return float(self.hbar) * float(omega0) * (s - 0.5)

    def eigenvalues(self, n: int) -> list:
        """``[E_1, ..., E_n]`` in the arithmetic mode."""
        if n > 0:
            self.check_level(n)
        return [self.eigenvalue(s) for s in range(1, n + 1)]

    def array(self, n: int) -> np.ndarray:
        """Float64 view of the first ``n`` eigenvalues."""
        return np.array([float(e) for e in self.eigenvalues(n)], dtype=float)

    def hbar_value(self):
        return self.hbar if self.is_exact else float(self.hbar)

    def to_dict(self) -> dict:
        def num(x):
            return str(x) if isinstance(x, Fraction) else x

        return {
            "kind": self.kind.value,
            "params": [num(x) for x in self.params],
            "M": self.M,
            "hbar": num(self.hbar),
            "exactness": self.exactness.value,
            "zero_mode": self.zero_mode,
            "values": [num(x) for x in self.values],
        }

    @property
    def spectrum_id(self) -> str:
        """Content hash; equal spectra share an id across runs."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"),
                          default=repr)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _resolve_mode(requested: Optional[Exactness], representable: bool, what: str) -> Exactness:
    if requested is Exactness.EXACT and not representable:
        raise InvalidParameter(f"{what}: eigenvalues are not exact rationals; use float64")
    if requested is None:
        return Exactness.EXACT if representable else Exactness.FLOAT64
    return requested


def _store(x, mode: Exactness):
    return as_fraction(x) if mode is Exactness.EXACT else float(x)


def _check_common(M, hbar) -> None:
    if not isinstance(M, (int, np.integer)) or isinstance(M, bool) or M < 1:
        raise InvalidParameter(f"degeneracy M must be a positive integer, got {M!r}")
    _positive("hbar", hbar)


def make_power_law(c: Number, p: Number, M: int = 1, hbar: Number = 1,
                   exactness=None) -> Spectrum:
    """``E_s = c * s**p``.

    Exact mode is chosen automatically when ``c`` and ``hbar`` are given as
    ints/Fractions and ``p`` is integral; requesting it otherwise raises.
    """
    _positive("c", c)
    _positive("p", p)
    _check_common(M, hbar)
    mode = _parse_exactness(exactness)
    integral_p = float(p).is_integer()
    auto_ok = _is_rational_input(c) and _is_rational_input(hbar) and integral_p
    if mode is Exactness.EXACT and not integral_p:
        raise InvalidParameter("power law with non-integer p has irrational eigenvalues")
    mode = _resolve_mode(mode, auto_ok or (mode is Exactness.EXACT), "power_law")
    params = (_store(c, mode), int(p) if mode is Exactness.EXACT else float(p))
    return Spectrum(Kind.POWER_LAW, params, int(M), _store(hbar, mode), mode)


def make_harmonic(omega0: Number, M: int = 1, hbar: Number = 1, exactness=None) -> Spectrum:
    """Oscillator levels ``E_s = hbar * omega0 * (s - 1/2)``, ground state at ``s = 1``."""
    _positive("omega0", omega0)
    _check_common(M, hbar)
    mode = _parse_exactness(exactness)
    auto_ok = _is_rational_input(omega0) and _is_rational_input(hbar)
    mode = _resolve_mode(mode, auto_ok or mode is Exactness.EXACT, "harmonic")
    return Spectrum(Kind.HARMONIC, (_store(omega0, mode),), int(M), _store(hbar, mode), mode)


def make_box(scale: Number, M: int = 1, hbar: Number = 1, exactness=None) -> Spectrum:
    """Particle-in-a-box levels ``E_s = scale * s**2``."""
    _positive("scale", scale)
    _check_common(M, hbar)
    mode = _parse_exactness(exactness)
    auto_ok = _is_rational_input(scale) and _is_rational_input(hbar)
    mode = _resolve_mode(mode, auto_ok or mode is Exactness.EXACT, "box")
    return Spectrum(Kind.BOX, (_store(scale, mode),), int(M), _store(hbar, mode), mode)


def _parse_value(v) -> Fraction | float:
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except ValueError:
            raise InvalidParameter(f"cannot parse energy literal {v!r}") from None
    if isinstance(v, bool):
        raise InvalidParameter(f"energy {v!r} is not a number")
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise InvalidParameter(f"energy {v!r} is not finite")
        return v
    raise InvalidParameter(f"energy {v!r} is not a number")


def from_list(values: Sequence, M: int = 1, hbar: Number = 1, exactness=None,
              zero_mode: bool = False) -> Spectrum:
    """Finite explicit spectrum, validated eagerly.

    Indices in errors are 1-based level numbers.  Strings may be decimal or
    ``"p/q"`` literals; these (and ints) keep exact mode available.
    """
    if len(values) == 0:
        raise InvalidParameter("explicit spectrum needs at least one value")
    _check_common(M, hbar)
    parsed = [_parse_value(v) for v in values]
    mode = _parse_exactness(exactness)
    auto_ok = all(isinstance(v, Fraction) for v in parsed) and _is_rational_input(hbar)
    mode = _resolve_mode(mode, auto_ok or mode is Exactness.EXACT, "explicit")
    stored = tuple(_store(v, mode) for v in parsed)
    for idx in range(1, len(stored)):
        if not stored[idx] > stored[idx - 1]:
            raise NotStrictlyIncreasing(idx + 1)
    if not zero_mode:
        for idx, v in enumerate(stored, start=1):
            if v == 0:
                raise ZeroEigenvalue(idx)
    return Spectrum(Kind.EXPLICIT, (), int(M), _store(hbar, mode), mode, bool(zero_mode), stored)


def read_levels_file(path: Union[str, Path]) -> list[str]:
    """One energy per line; blank lines and ``#`` comments are skipped."""
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out


def eigenvalue(spec: Spectrum, s: int):
    return spec.eigenvalue(s)


def omega(spec: Spectrum, s: int, sp: int):
    """Transition frequency ``(E_s - E_s') / hbar``."""
    return (spec.eigenvalue(s) - spec.eigenvalue(sp)) / spec.hbar_value()


def with_exactness(spec: Spectrum, exactness) -> Spectrum:
    """Rebuild ``spec`` in another arithmetic mode (same family and parameters)."""
    mode = _parse_exactness(exactness)
    if mode is spec.exactness:
        return spec
    if spec.kind is Kind.POWER_LAW:
        c, p = spec.params
        return make_power_law(c, p, spec.M, spec.hbar, mode)
    if spec.kind is Kind.HARMONIC:
        return make_harmonic(spec.params[0], spec.M, spec.hbar, mode)
    if spec.kind is Kind.BOX:
        return make_box(spec.params[0], spec.M, spec.hbar, mode)
    return from_list(list(spec.values), spec.M, spec.hbar, mode, spec.zero_mode)
