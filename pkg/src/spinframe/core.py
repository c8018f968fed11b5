"""Pure N-spin states, density matrices and partial traces.

Basis convention: spin 1 is the most significant bit of the basis index,
so ``|eta_1 eta_2 ... eta_N>`` sits at index ``sum(eta_i * 2**(N - i))``.
Subsystems are ordered tuples of 1-based spin indices; the first entry of
the tuple becomes the most significant bit of the reduced operator.
"""

from __future__ import annotations

import json
import os
from dataclasses import InitVar, dataclass
from functools import reduce as _fold
from typing import Iterable, Sequence

import numpy as np

from ._random import as_generator
from .errors import (
    CapExceededError,
    InvalidInputError,
    LengthMismatchError,
    MalformedDocumentError,
    NormViolationError,
)

HARD_MAX_SPINS = 14
DEFAULT_MAX_SPINS = 10
MAX_SPINS_ENV = "SPINFRAME_MAX_SPINS"

NORM_TOL = 1e-10
PARSE_NORM_TOL = 1e-8
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
NEG_EIG_TOL = 1e-9

SubsystemSpec = tuple  # ordered tuple of distinct 1-based spin indices


def max_spins(limit: int | None = None) -> int:
    """Effective spin cap: `limit` (default 10, at most 14), lowered by the env var."""
    cap = DEFAULT_MAX_SPINS if limit is None else int(limit)
    if not 1 <= cap <= HARD_MAX_SPINS:
        raise CapExceededError(f"spin cap must lie in [1, {HARD_MAX_SPINS}], got {cap}")
    env = os.environ.get(MAX_SPINS_ENV)
    if env:
        try:
            cap = min(cap, int(env))
        except ValueError:
            raise InvalidInputError(f"{MAX_SPINS_ENV} must be an integer, got {env!r}") from None
    return cap


def check_spin_count(n: int, limit: int | None = None) -> int:
    if int(n) != n or n < 1:
        raise InvalidInputError(f"spin count must be a positive integer, got {n!r}")
    cap = max_spins(limit)
    if n > cap:
        raise CapExceededError(f"{n} spins exceeds the cap of {cap}")
    return int(n)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class SpinState:
    """Normalized pure state of ``num_spins`` spin-1/2 particles."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        n = amps.size.bit_length() - 1
        if amps.size < 2 or amps.size != 1 << n:
            raise InvalidInputError(f"amplitude count {amps.size} is not 2**N with N >= 1")
        check_spin_count(n, HARD_MAX_SPINS)
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidInputError(f"state norm {norm!r} differs from 1 by more than {NORM_TOL}")
        object.__setattr__(self, "amplitudes", _readonly(amps))

    @property
    def num_spins(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def normalized(cls, amplitudes) -> SpinState:
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise InvalidInputError("cannot normalize the zero vector")
        return cls(amps / norm)

    def __repr__(self):
        return f"SpinState(num_spins={self.num_spins})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator on 2**k dims."""

    entries: np.ndarray
    check: InitVar[bool] = True

    def __post_init__(self, check):
        rho = np.array(self.entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise InvalidInputError(f"density matrix must be square, got shape {rho.shape}")
        d = rho.shape[0]
        if d < 2 or d & (d - 1):
            raise InvalidInputError(f"density matrix dimension {d} is not 2**k with k >= 1")
        if check:
            dev = np.max(np.abs(rho - rho.conj().T))
            if dev > HERMITIAN_TOL:
                raise InvalidInputError(f"matrix is not Hermitian (deviation {dev:.3g})")
            tr = np.trace(rho).real
            if abs(tr - 1.0) > TRACE_TOL:
                raise InvalidInputError(f"trace {tr!r} differs from 1")
            lo = np.linalg.eigvalsh(rho)[0]
            if lo < -NEG_EIG_TOL:
                raise InvalidInputError(f"matrix has negative eigenvalue {lo:.3g}")
        object.__setattr__(self, "entries", _readonly(rho))

    @property
    def num_spins(self) -> int:
        return self.entries.shape[0].bit_length() - 1

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def purity(self) -> float:
        return float(np.real(np.vdot(self.entries, self.entries)))

    def __repr__(self):
        return f"DensityMatrix(num_spins={self.num_spins})"


def as_matrix(rho) -> np.ndarray:
    return rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def validate_spec(spec: Iterable[int], n: int) -> tuple[int, ...]:
    """Return `spec` as a tuple after checking range and distinctness."""
    try:
        idx = tuple(int(i) for i in spec)
    except (TypeError, ValueError):
        raise InvalidInputError(f"subsystem spec must be a sequence of integers, got {spec!r}") from None
    if not idx:
        raise InvalidInputError("subsystem spec is empty")
    if len(set(idx)) != len(idx):
        raise InvalidInputError(f"subsystem spec {idx} repeats an index")
    bad = [i for i in idx if not 1 <= i <= n]
    if bad:
        raise InvalidInputError(f"subsystem indices {bad} out of range 1..{n}")
    return idx


def basis_state(bits: Sequence[int]) -> SpinState:
    bits = tuple(bits)
    if not bits:
        raise InvalidInputError("basis_state needs at least one bit")
    if any(b not in (0, 1) for b in bits):
        raise InvalidInputError(f"bits must be 0 or 1, got {bits}")
    amps = np.zeros(1 << len(bits), dtype=complex)
    amps[int("".join(map(str, bits)), 2)] = 1.0
    return SpinState(amps)


def tensor(*states: SpinState) -> SpinState:
    """Kronecker product; earlier factors occupy the more significant bits."""
    if not states:
        raise InvalidInputError("tensor needs at least one state")
    for s in states:
        if not isinstance(s, SpinState):
            raise InvalidInputError(f"tensor expects SpinState operands, got {type(s).__name__}")
    return SpinState(_fold(np.kron, [s.amplitudes for s in states]))


def density(s: SpinState, max_spins: int | None = None) -> DensityMatrix:
    check_spin_count(s.num_spins, max_spins)
    a = s.amplitudes
    return DensityMatrix(np.outer(a, a.conj()), check=False)


def marginal_factor(s: SpinState, spec: Iterable[int]) -> np.ndarray:
    """Matrix M with reduce(s, spec) = M M^dagger (rows: kept spins in spec order)."""
    n = s.num_spins
    idx = validate_spec(spec, n)
    keep = [i - 1 for i in idx]
    rest = [i for i in range(n) if i not in keep]
    t = s.amplitudes.reshape((2,) * n).transpose(keep + rest)
    return t.reshape(1 << len(keep), -1)


def reduce(s: SpinState, spec: Iterable[int]) -> DensityMatrix:
    """Partial trace over every spin not in `spec`, kept spins in tuple order."""
    m = marginal_factor(s, spec)
    rho = m @ m.conj().T
    return DensityMatrix(0.5 * (rho + rho.conj().T), check=False)


def apply_unitary(s: SpinState, u) -> SpinState:
    u = np.asarray(u, dtype=complex)
    if u.shape != (s.dim, s.dim):
        raise InvalidInputError(f"unitary of shape {u.shape} does not act on dimension {s.dim}")
    return SpinState(u @ s.amplitudes)


def random_state(n: int, seed=None) -> SpinState:
    """Haar-random pure state on n spins."""
    check_spin_count(n, HARD_MAX_SPINS)
    rng = as_generator(seed)
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return SpinState(v / np.linalg.norm(v))


def structured_states(n: int) -> dict[str, SpinState]:
    """Deterministic library of basis, uniform, single-excitation, GHZ and W states."""
    check_spin_count(n, HARD_MAX_SPINS)
    d = 1 << n
    lib = {}
    basis = range(d) if n <= 4 else [0, d - 1] + [1 << (n - i) for i in range(1, n + 1)]
    for i in basis:
        lib[f"basis:{i:0{n}b}"] = basis_state([int(c) for c in f"{i:0{n}b}"])
    lib["uniform"] = SpinState(np.full(d, d**-0.5, dtype=complex))
    for i in range(1, n + 1):
        v = np.zeros(d, dtype=complex)
        v[0] = v[1 << (n - i)] = 2**-0.5
        lib[f"excitation:{i}"] = SpinState(v)
    ghz = np.zeros(d, dtype=complex)
    ghz[0] = ghz[-1] = 2**-0.5
    lib["ghz"] = SpinState(ghz)
    w = np.zeros(d, dtype=complex)
    w[[1 << j for j in range(n)]] = n**-0.5
    lib["w"] = SpinState(w)
    return lib


# --- state file (JSON) -----------------------------------------------------


def state_to_dict(s: SpinState) -> dict:
    return {
        "num_spins": s.num_spins,
        "amplitudes": [[float(z.real), float(z.imag)] for z in s.amplitudes],
    }


def state_from_dict(doc) -> SpinState:
    if not isinstance(doc, dict) or "num_spins" not in doc or "amplitudes" not in doc:
        raise MalformedDocumentError("state document needs 'num_spins' and 'amplitudes'")
    n, raw = doc["num_spins"], doc["amplitudes"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise MalformedDocumentError(f"num_spins must be a positive integer, got {n!r}")
    if not isinstance(raw, list):
        raise MalformedDocumentError("amplitudes must be a list of [re, im] pairs")
    try:
        amps = np.array([complex(float(re), float(im)) for re, im in raw], dtype=complex)
    except (TypeError, ValueError):
        raise MalformedDocumentError("each amplitude must be a [re, im] pair of numbers") from None
    if n > HARD_MAX_SPINS:
        raise CapExceededError(f"{n} spins exceeds the hard cap of {HARD_MAX_SPINS}")
    if amps.size != 1 << n:
        raise LengthMismatchError(f"expected {1 << n} amplitudes for {n} spins, got {amps.size}")
    if not np.all(np.isfinite(amps)):
        raise MalformedDocumentError("amplitudes must be finite")
    norm = np.linalg.norm(amps)
    if abs(norm - 1.0) > PARSE_NORM_TOL:
        raise NormViolationError(f"state norm {norm!r} differs from 1 by more than {PARSE_NORM_TOL}")
    if abs(norm - 1.0) > NORM_TOL:
        amps = amps / norm
    return SpinState(amps)


def serialize_state(s: SpinState) -> bytes:
    return (json.dumps(state_to_dict(s)) + "\n").encode()


def parse_state(data: bytes | str) -> SpinState:
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedDocumentError(f"state file is not valid JSON: {exc}") from None
    return state_from_dict(doc)
