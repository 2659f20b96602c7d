"""Configuration-space kernel of the truncated time operator.

With real orthonormal eigenfunctions ``phi_{s,r}(q)`` on ``Omega``, the
truncation acts as the integral operator with kernel
``K_N(q, q') = sum T_{(s,r),(s',r')} phi_{s,r}(q) phi_{s',r'}(q')``.
Orthonormality turns ``int int |K_N|**2`` into the Frobenius norm of the
truncation, which :func:`hs_identity_check` compares against the
eigenvalue series computed directly from the spectrum.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Union

import numpy as np

from . import conditions
from .errors import InvalidParameter, PreconditionViolation, QuadratureUnderResolved
from .spectra import Spectrum
from .timeop import build_truncation

# Relative change allowed when the node count is doubled.
DOUBLING_RTOL = 1e-10


class BasisFamily(str, Enum):
    BOX_SINE = "BoxSine"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class EigenfunctionBasis:
    """Real orthonormal basis on ``[0, length]``.

    ``M`` labels per level are realised by interleaving sine modes:
    ``phi_{s,r}`` is the sine of mode ``(s - 1) * M + r``.  At ``M = 1`` that
    is the ordinary box basis.
    """

    length: float
    count: int
    M: int = 1
    family: BasisFamily = BasisFamily.BOX_SINE

    def mode(self, s: int, r: int = 1) -> int:
        return (s - 1) * self.M + r

    def eval(self, s: int, q, r: int = 1):
        if not 1 <= s <= self.count or not 1 <= r <= self.M:
            raise InvalidParameter(f"basis index ({s}, {r}) outside count={self.count}, M={self.M}")
        n = self.mode(s, r)
        q = np.asarray(q, dtype=float)
        return math.sqrt(2.0 / self.length) * np.sin(n * math.pi * q / self.length)

    def matrix(self, N: int, q: np.ndarray) -> np.ndarray:
        """Rows: flat level-major index ``(s, r)`` for ``s <= N``; columns: points."""
        if N > self.count:
            raise PreconditionViolation(f"basis has {self.count} levels, asked for {N}")
        modes = np.arange(1, N * self.M + 1)[:, None]
        return math.sqrt(2.0 / self.length) * np.sin(modes * math.pi * np.asarray(q)[None, :]
                                                     / self.length)


def box_basis(length: float, count: int, M: int = 1) -> EigenfunctionBasis:
    """Box eigenfunctions ``sqrt(2/L) sin(s pi q / L)``."""
    if not length > 0:
        raise InvalidParameter(f"box length must be positive, got {length}")
    if count < 1:
        raise InvalidParameter(f"basis count must be >= 1, got {count}")
    return EigenfunctionBasis(float(length), int(count), int(M))


def gauss_legendre(nodes: int, length: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * length * (x + 1.0), 0.5 * length * w


def orthonormality_error(basis: EigenfunctionBasis, N: int, nodes: int) -> float:
    """``max |G - I|`` for the quadrature Gram matrix of levels ``<= N``."""
    q, w = gauss_legendre(nodes, basis.length)
    P = basis.matrix(N, q)
    G = (P * w) @ P.T
    return float(np.max(np.abs(G - np.eye(len(G)))))


def _check_compatible(basis: EigenfunctionBasis, spec: Spectrum, N: int) -> None:
    if basis.M != spec.M:
        raise InvalidParameter(f"basis has M={basis.M}, spectrum has M={spec.M}")
    if N < 2:
        raise PreconditionViolation(f"kernel needs N >= 2, got {N}")


def _coefficients(spec: Spectrum, N: int) -> np.ndarray:
    return build_truncation(spec, N).complex_matrix()


def kernel_eval(basis: EigenfunctionBasis, spec: Spectrum, N: int, q: float, qp: float) -> complex:
    """``K_N(q, q')`` as the explicit double sum over levels and labels."""
    _check_compatible(basis, spec, N)
    C = _coefficients(spec, N)
    a = basis.matrix(N, np.array([q]))[:, 0]
    b = basis.matrix(N, np.array([qp]))[:, 0]
    return complex(a @ C @ b)


def kernel_grid(basis: EigenfunctionBasis, spec: Spectrum, N: int,
                q: np.ndarray, qp: np.ndarray) -> np.ndarray:
    _check_compatible(basis, spec, N)
    C = _coefficients(spec, N)
    return basis.matrix(N, q).T @ C @ basis.matrix(N, qp)


@dataclass(frozen=True)
class KernelProbe:
    N: int
    M: int
    nodes: int
    quadrature_value: float
    series_value: float
    rel_err: float
    doubled_value: float

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "M": self.M,
            "nodes": self.nodes,
            "quadrature_value": self.quadrature_value,
            "series_value": self.series_value,
            "rel_err": self.rel_err,
            "doubled_value": self.doubled_value,
        }


def min_nodes(basis: EigenfunctionBasis, N: int) -> int:
    """Conservative node count: two per highest sine mode plus four."""
    return 2 * N * basis.M + 4


def _quadrature(basis, spec, N, nodes) -> float:
    q, w = gauss_legendre(nodes, basis.length)
    K = kernel_grid(basis, spec, N, q, q)
    return float(np.einsum("i,ij,j->", w, np.abs(K) ** 2, w))


def series_value(spec: Spectrum, N: int) -> float:
    """``factor * hbar**2 * sum'(E_s - E_s')**-2`` with factor 1 or ``M (M - 1)``."""
    factor = 1 if spec.M == 1 else spec.M * (spec.M - 1)
    return factor * float(spec.hbar) ** 2 * float(conditions.hs_partial(spec, N))


def hs_identity_check(basis: EigenfunctionBasis, spec: Spectrum, N: int, nodes: int) -> KernelProbe:
    """Tensor-product Gauss-Legendre value of ``int int |K_N|**2`` vs. the series.

    Raises :class:`QuadratureUnderResolved` when ``nodes`` is below
    :func:`min_nodes` or when doubling the nodes moves the value by more than
    ``DOUBLING_RTOL`` relative to the series value.
    """
    _check_compatible(basis, spec, N)
    need = min_nodes(basis, N)
    if nodes < need:
        raise QuadratureUnderResolved(f"{nodes} nodes per axis; at least {need} needed for N={N}")
    series = series_value(spec, N)
    quad = _quadrature(basis, spec, N, nodes)
    doubled = _quadrature(basis, spec, N, 2 * nodes)
    if abs(doubled - quad) > DOUBLING_RTOL * series:
        raise QuadratureUnderResolved(
            f"value changed by {abs(doubled - quad):.3e} when doubling {nodes} nodes")
    return KernelProbe(N, spec.M, nodes, quad, series, abs(quad - series) / series, doubled)


def dump_grid(basis: EigenfunctionBasis, spec: Spectrum, N: int, nodes: int,
              path: Union[str, Path]) -> None:
    """Write ``q, q', Re K, Im K`` on the quadrature grid as CSV."""
    q, _ = gauss_legendre(nodes, basis.length)
    K = kernel_grid(basis, spec, N, q, q)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["q", "q_prime", "re_K", "im_K"])
        for i, qi in enumerate(q):
            for j, qj in enumerate(q):
                writer.writerow([f"{qi:.17g}", f"{qj:.17g}",
                                 f"{K[i, j].real:.17g}", f"{K[i, j].imag:.17g}"])
