"""Distinguishability measures for density matrices.

``fidelity`` uses the square-root (Uhlmann) convention
``F = Tr sqrt(sqrt(rho) sigma sqrt(rho))``, which equals ``|<a|b>|`` for
pure states; ``fidelity_squared`` returns ``F**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import NEG_EIG_TOL, DensityMatrix
from .errors import InvalidInputError, UndefinedAngleError, UnsupportedDimensionError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

SQRT = "sqrt"
SQUARED = "squared"
CONVENTIONS = (SQRT, SQUARED)

# eigenvalues below this multiple of eps * dim are treated as exact zeros
_RANK_EPS_FACTOR = 64.0
# Helstrom eigenvalues with |lambda| <= this count as zero and go to outcome A
_HELSTROM_ZERO_TOL = 1e-12


def _operator(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.entries
    return DensityMatrix(rho).entries


def _pair(rho, sigma):
    a, b = _operator(rho), _operator(sigma)
    if a.shape != b.shape:
        raise InvalidInputError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a, b


def psd_factor(rho) -> np.ndarray:
    """Return A with rho = A A^dagger, built from the clamped spectral decomposition.

    Eigenvalues in [-1e-9, 0) are clamped to zero and rounding-level
    positive eigenvalues are dropped so that a numerically rank-deficient
    operator yields an exactly rank-deficient factor.
    """
    return _factor(_operator(rho))


def _factor(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    if w[0] < -NEG_EIG_TOL:
        raise InvalidInputError(f"operator has negative eigenvalue {w[0]:.3g}")
    cut = _RANK_EPS_FACTOR * np.finfo(float).eps * m.shape[0] * max(w[-1], 1.0)
    keep = w > cut
    return v[:, keep] * np.sqrt(w[keep])


def fidelity_from_factors(fa: np.ndarray, fb: np.ndarray) -> float:
    """Trace norm of fa^dagger fb, clipped to [0, 1]."""
    if fa.shape[1] == 0 or fb.shape[1] == 0:
        return 0.0
    s = np.linalg.svd(fa.conj().T @ fb, compute_uv=False)
    return float(min(max(s.sum(), 0.0), 1.0))


def sqrtm_psd(rho) -> np.ndarray:
    """Principal square root of a PSD Hermitian operator, negatives clamped."""
    w, v = np.linalg.eigh(_operator(rho))
    if w[0] < -NEG_EIG_TOL:
        raise InvalidInputError(f"operator has negative eigenvalue {w[0]:.3g}")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity in the square-root convention.

    With rho = A A^dagger and sigma = B B^dagger, Tr sqrt(sqrt(rho) sigma sqrt(rho))
    is the trace norm of A^dagger B. Taking singular values of that product
    avoids square-rooting rounding noise in the zero eigenvalues.
    """
    a, b = _pair(rho, sigma)
    return fidelity_from_factors(_factor(a), _factor(b))


def fidelity_squared(rho, sigma) -> float:
    return fidelity(rho, sigma) ** 2


def fidelity_in(convention: str, rho, sigma) -> float:
    if convention == SQRT:
        return fidelity(rho, sigma)
    if convention == SQUARED:
        return fidelity_squared(rho, sigma)
    raise InvalidInputError(f"unknown fidelity convention {convention!r}; use one of {CONVENTIONS}")


def check_convention(convention: str) -> str:
    if convention not in CONVENTIONS:
        raise InvalidInputError(f"unknown fidelity convention {convention!r}; use one of {CONVENTIONS}")
    return convention


def sphere_grid(resolution: int) -> np.ndarray:
    """Fibonacci-sphere unit vectors with angular spacing about pi/resolution.

    Both poles are always included. The point count is ceil(4 R^2 / pi),
    i.e. an equal-area cell of side pi/R.
    """
    if int(resolution) != resolution or resolution < 1:
        raise InvalidInputError(f"grid resolution must be a positive integer, got {resolution!r}")
    n = max(2, math.ceil(4 * resolution**2 / math.pi))
    i = np.arange(n)
    z = 1.0 - 2.0 * i / (n - 1)
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def fidelity_povm_oracle(rho, sigma, grid_resolution: int = 200) -> float:
    """Minimize the Bhattacharyya overlap over two-outcome projective qubit measurements.

    Every candidate measurement gives an upper bound on the fidelity; the
    returned grid minimum converges to it as the resolution grows.
    """
    a, b = _pair(rho, sigma)
    if a.shape[0] != 2:
        raise UnsupportedDimensionError(f"POVM oracle supports qubits only, got dimension {a.shape[0]}")
    axes = sphere_grid(grid_resolution)
    pa = 0.5 * (1.0 + axes @ bloch_vector(a))
    pb = 0.5 * (1.0 + axes @ bloch_vector(b))
    pa, pb = np.clip(pa, 0.0, 1.0), np.clip(pb, 0.0, 1.0)
    overlap = np.sqrt(pa * pb) + np.sqrt((1.0 - pa) * (1.0 - pb))
    return float(overlap.min())


def trace_distance(rho, sigma) -> float:
    a, b = _pair(rho, sigma)
    return float(0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum())


@dataclass(frozen=True, eq=False)
class HelstromResult:
    error: float
    projector_a: np.ndarray
    projector_b: np.ndarray


def helstrom(rho, sigma, p: float = 0.5) -> HelstromResult:
    """Optimal single-copy discrimination of rho (prior p) against sigma.

    The guess-A projector covers the nonnegative eigenspace of
    p rho - (1-p) sigma; zero eigenvalues are assigned to A.
    """
    if not 0.0 < p < 1.0:
        raise InvalidInputError(f"prior p must lie in (0, 1), got {p!r}")
    a, b = _pair(rho, sigma)
    w, v = np.linalg.eigh(p * a - (1.0 - p) * b)
    to_a = w >= -_HELSTROM_ZERO_TOL
    proj_a = v[:, to_a] @ v[:, to_a].conj().T
    proj_b = v[:, ~to_a] @ v[:, ~to_a].conj().T
    err = 0.5 * (1.0 - np.abs(w).sum())
    return HelstromResult(float(err), proj_a, proj_b)


def helstrom_error(rho, sigma, p: float = 0.5) -> float:
    return helstrom(rho, sigma, p).error


def bloch_vector(rho) -> np.ndarray:
    m = _operator(rho)
    if m.shape != (2, 2):
        raise UnsupportedDimensionError(f"Bloch vectors need a single spin, got dimension {m.shape[0]}")
    return np.array([np.trace(m @ s).real for s in PAULIS])


def relative_angle(r1, r2) -> float:
    r1, r2 = np.asarray(r1, dtype=float), np.asarray(r2, dtype=float)
    n1, n2 = np.linalg.norm(r1), np.linalg.norm(r2)
    if n1 <= 1e-12 or n2 <= 1e-12:
        raise UndefinedAngleError("relative angle is undefined for a (near-)zero Bloch vector")
    return float(np.arccos(np.clip(r1 @ r2 / (n1 * n2), -1.0, 1.0)))
