"""Collective unitaries V^{(x)N} and numerical probes of fidelity preservation."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import reduce as _fold

import numpy as np
from scipy.optimize import minimize

from ._random import as_generator, named_seed, substreams
from .core import SpinState, apply_unitary, check_spin_count, random_state, structured_states
from .errors import InvalidInputError, NumericalConsistencyError
from .fidelity import PAULIS, SQRT
from .signature import PairFamily, signature, signature_distance

UNITARY_TOL = 1e-10
FALSIFICATION_THRESHOLD = 1e-3
CONTROL_TOL = 1e-9


def is_unitary(u, tol=None) -> bool:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    tol = UNITARY_TOL * max(1, u.shape[0] // 2) if tol is None else tol
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


def _check_single(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.shape != (2, 2):
        raise InvalidInputError(f"single-spin unitary must be 2x2, got shape {v.shape}")
    if not is_unitary(v):
        raise InvalidInputError("matrix is not unitary within 1e-10")
    return v


def rz(theta):
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def ry(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def u2_from_params(phase, theta1, theta2, theta3) -> np.ndarray:
    """e^{i phase} Rz(theta1) Ry(theta2) Rz(theta3)."""
    return np.exp(1j * phase) * (rz(theta1) @ ry(theta2) @ rz(theta3))


def haar_random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar unitary from QR of a complex Ginibre matrix with R's diagonal phases removed."""
    if int(dim) != dim or dim < 1:
        raise InvalidInputError(f"dimension must be a positive integer, got {dim!r}")
    if dim > 1 and dim & (dim - 1) == 0:
        check_spin_count(dim.bit_length() - 1)
    rng = as_generator(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_random_u2(seed=None) -> np.ndarray:
    return haar_random_unitary(2, seed)


def collective(v, n: int, max_spins: int | None = None) -> np.ndarray:
    """N-fold Kronecker power V (x) V (x) ... (x) V."""
    v = _check_single(v)
    check_spin_count(n, max_spins)
    return _fold(np.kron, [v] * n)


def pu2_to_so3(v) -> np.ndarray:
    """Rotation R_ij = Tr[s_i V s_j V^dagger] / 2 induced on Bloch vectors."""
    v = _check_single(v)
    vd = v.conj().T
    r = np.array([[0.5 * np.trace(si @ v @ sj @ vd) for sj in PAULIS] for si in PAULIS])
    residue = np.max(np.abs(r.imag))
    if residue > 1e-8:
        raise NumericalConsistencyError(f"rotation has imaginary residue {residue:.3g}")
    return r.real


def verify_collective_invariance(
    s: SpinState, v, family: PairFamily | None = None, convention: str = SQRT
) -> float:
    """Signature change caused by applying V^{(x)N}; zero up to rounding in theory."""
    u = collective(v, s.num_spins)
    return signature_distance(
        signature(s, family, convention), signature(apply_unitary(s, u), family, convention)
    )


def signature_change(u, s: SpinState, family: PairFamily | None = None, convention: str = SQRT) -> float:
    """Per-state probe: how much U moves the signature of one particular state."""
    return signature_distance(
        signature(s, family, convention), signature(apply_unitary(s, u), family, convention)
    )


def universal_preservation(
    u, family: PairFamily | None = None, samples: int = 20, seed=0, convention: str = SQRT
) -> dict:
    """Universal probe: largest signature change over structured and random states.

    A unitary can leave one state's signature untouched (per-state
    preservation) while moving others; only the maximum over many states
    speaks to preservation for all states.
    """
    u = np.asarray(u, dtype=complex)
    n = u.shape[0].bit_length() - 1
    states = list(structured_states(n).items())
    for i, rng in enumerate(substreams(named_seed(seed, "universal"), samples)):
        states.append((f"random:{i}", random_state(n, rng)))
    worst_name, worst = None, 0.0
    for name, s in states:
        dev = signature_change(u, s, family, convention)
        if dev > worst:
            worst_name, worst = name, dev
    return {"max_deviation": worst, "worst_state": worst_name, "states_checked": len(states)}


@dataclass
class FalsificationReport:
    num_spins: int
    trials: int
    seed: int
    family: PairFamily
    convention: str
    threshold: float
    haar_deviations: list = field(default_factory=list)
    control_deviations: list = field(default_factory=list)

    @property
    def fraction_above(self) -> float:
        return sum(d > self.threshold for d in self.haar_deviations) / len(self.haar_deviations)

    @property
    def max_control_deviation(self) -> float:
        return max(self.control_deviations)

    @property
    def passed(self) -> bool:
        return self.max_control_deviation < CONTROL_TOL and self.fraction_above >= 0.99

    def to_dict(self) -> dict:
        return {
            "num_spins": self.num_spins,
            "trials": self.trials,
            "seed": self.seed,
            "family": self.family.to_dict(),
            "convention": self.convention,
            "threshold": self.threshold,
            "records": [
                {"trial": i, "haar_deviation": h, "control_deviation": c}
                for i, (h, c) in enumerate(zip(self.haar_deviations, self.control_deviations))
            ],
            "summary": {
                "fraction_above_threshold": self.fraction_above,
                "max_control_deviation": self.max_control_deviation,
                "min_haar_deviation": min(self.haar_deviations),
                "passed": self.passed,
            },
        }


def falsification_experiment(
    n: int,
    trials: int,
    family: PairFamily | None = None,
    seed: int = 0,
    convention: str = SQRT,
    threshold: float = FALSIFICATION_THRESHOLD,
    workers: int = 1,
    max_spins: int | None = None,
) -> FalsificationReport:
    """Apply Haar global unitaries (and collective controls) to Haar states.

    Each trial draws from its own stream keyed by (seed, trial), so the
    report is reproducible regardless of `workers`.
    """
    check_spin_count(n, max_spins)
    if trials < 1:
        raise InvalidInputError("trials must be >= 1")
    family = family or PairFamily()

    def trial(rng):
        s = random_state(n, rng)
        u = haar_random_unitary(1 << n, rng)
        v = haar_random_u2(rng)
        return (
            signature_change(u, s, family, convention),
            signature_change(collective(v, n, max_spins), s, family, convention),
        )

    rngs = substreams(seed, trials)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(trial, rngs))
    else:
        results = [trial(r) for r in rngs]
    return FalsificationReport(
        n, trials, seed, family, convention, threshold,
        [h for h, _ in results], [c for _, c in results],
    )


@dataclass
class CollectiveFit:
    distance: float
    best_v: np.ndarray
    params: np.ndarray
    iterations: int
    converged: bool
    phase_optimized: bool
    restarts: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "distance": self.distance,
            "best_v": [[[z.real, z.imag] for z in row] for row in self.best_v],
            "params": [float(x) for x in self.params],
            "iterations": self.iterations,
            "converged": self.converged,
            "phase_optimized": self.phase_optimized,
            "restarts": self.restarts,
        }


def _phase_aligned(u, w):
    overlap = np.vdot(w, u)
    return w if overlap == 0 else w * (overlap / abs(overlap))


def collective_distance(u, v, phase_optimized=False) -> float:
    u = np.asarray(u, dtype=complex)
    n = u.shape[0].bit_length() - 1
    w = _fold(np.kron, [np.asarray(v, dtype=complex)] * n)
    if phase_optimized:
        w = _phase_aligned(u, w)
    return float(np.linalg.norm(u - w))


def distance_to_collective(
    u,
    restarts: int = 8,
    seed: int = 0,
    phase_optimized: bool = False,
    max_iters: int = 2000,
    xatol: float = 1e-9,
    workers: int = 1,
    max_spins: int | None = None,
) -> CollectiveFit:
    """Best-found min over V in U(2) of ||U - V^{(x)N}||_F (an upper bound).

    Nelder-Mead over the (phase, theta1, theta2, theta3) chart from
    `restarts` random starts; a run converges when the simplex shrinks
    below `xatol` before `max_iters` iterations.
    """
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    if u.shape != (d, d) or d < 2 or d & (d - 1):
        raise InvalidInputError(f"global unitary must be square with dimension 2**N, got {u.shape}")
    n = d.bit_length() - 1
    check_spin_count(n, max_spins)
    if restarts < 1:
        raise InvalidInputError("restarts must be >= 1")

    def objective(x):
        w = _fold(np.kron, [u2_from_params(*x)] * n)
        if phase_optimized:
            w = _phase_aligned(u, w)
        diff = u - w
        return float(np.vdot(diff, diff).real)

    def run(rng):
        x0 = rng.uniform([0, 0, 0, 0], [2 * np.pi, 2 * np.pi, np.pi, 2 * np.pi])
        res = minimize(
            objective, x0, method="Nelder-Mead",
            options={"maxiter": max_iters, "xatol": xatol, "fatol": np.inf},
        )
        return res

    rngs = substreams(seed, restarts)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, rngs))
    else:
        results = [run(r) for r in rngs]

    records = []
    for i, res in enumerate(results):
        v = u2_from_params(*res.x)
        records.append({
            "restart": i,
            "distance": collective_distance(u, v, phase_optimized),
            "iterations": int(res.nit),
            "converged": bool(res.status == 0),
        })
    best = min(records, key=lambda r: (r["distance"], r["restart"]))
    res = results[best["restart"]]
    return CollectiveFit(
        distance=best["distance"],
        best_v=u2_from_params(*res.x),
        params=np.asarray(res.x),
        iterations=best["iterations"],
        converged=best["converged"],
        phase_optimized=phase_optimized,
        restarts=records,
    )
