"""Micro/macro superposition states, the basis relabelling, and state search.

``micro_state`` is |0...0>(a|0> + b|1>): a magnet of M-1 spins with the
last spin in superposition. ``macro_state`` is (a|0...0> + b|1...1>)|0>.
The relabelling permutation complements every basis string except
0...0 and 1...1, and maps one onto the other.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ._random import named_seed, substreams
from .core import SpinState, check_spin_count, random_state, reduce, structured_states
from .errors import InvalidInputError
from .fidelity import SQRT, SQUARED, check_convention, fidelity
from .signature import FidelitySignature, PairFamily, SignatureEvaluator, enumerate_pairs
from .symmetry import signature_change

NORMALIZATION_TOL = 1e-12
WITNESS_THRESHOLD = 1e-3

EXCLUDE = "exclude_M"
IN_ONE = "M_in_one"
DIFFERENT_SITES = "M_different_sites"
SAME_SITE = "M_same_site"
ROWS = (EXCLUDE, IN_ONE, DIFFERENT_SITES, SAME_SITE)


@dataclass(frozen=True)
class MicroMacroConfig:
    M: int
    alpha: complex
    beta: complex | None = None

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 2:
            raise InvalidInputError(f"M must be an integer >= 2, got {self.M!r}")
        check_spin_count(self.M)
        alpha = complex(self.alpha)
        if self.beta is None:
            if abs(alpha) > 1:
                raise InvalidInputError(f"|alpha| = {abs(alpha)} exceeds 1")
            beta = complex(math.sqrt(max(0.0, 1.0 - abs(alpha) ** 2)))
        else:
            beta = complex(self.beta)
        if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > NORMALIZATION_TOL:
            raise InvalidInputError("alpha and beta must satisfy |alpha|^2 + |beta|^2 = 1")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)


def micro_state(cfg: MicroMacroConfig) -> SpinState:
    amps = np.zeros(1 << cfg.M, dtype=complex)
    amps[0], amps[1] = cfg.alpha, cfg.beta
    return SpinState(amps)


def macro_state(cfg: MicroMacroConfig) -> SpinState:
    amps = np.zeros(1 << cfg.M, dtype=complex)
    amps[0], amps[(1 << cfg.M) - 2] = cfg.alpha, cfg.beta
    return SpinState(amps)


def relabel_permutation(m: int) -> np.ndarray:
    """perm[i] = image of basis index i: bitwise complement except for 0...0 and 1...1."""
    check_spin_count(m)
    full = (1 << m) - 1
    perm = full ^ np.arange(1 << m)
    perm[0], perm[full] = 0, full
    return perm


def relabel_unitary(m: int) -> np.ndarray:
    perm = relabel_permutation(m)
    u = np.zeros((1 << m, 1 << m), dtype=complex)
    u[perm, np.arange(1 << m)] = 1.0
    return u


def classify_pair(a, b, m: int) -> str:
    if m in a and m in b:
        return SAME_SITE if a.index(m) == b.index(m) else DIFFERENT_SITES
    if m in a or m in b:
        return IN_ONE
    return EXCLUDE


def claimed_value(row: str, alpha) -> float:
    """Common value claimed for both states (squared-fidelity numbers)."""
    p = abs(alpha) ** 2
    return {EXCLUDE: 1.0, IN_ONE: p, DIFFERENT_SITES: p * p, SAME_SITE: 1.0}[row]


def expected_value(row: str, alpha, convention: str) -> float:
    """The table value expressed in `convention` (square root of it for sqrt)."""
    v = claimed_value(row, alpha)
    return v if convention == SQUARED else math.sqrt(v)


def micromacro_table(
    cfg: MicroMacroConfig,
    family: PairFamily | None = None,
    convention: str = SQRT,
    tol: float = 1e-10,
) -> list[dict]:
    """Compare both states pair by pair against the claimed common fidelity.

    ``match`` is true when both states hit the expected value for the
    pair's row in `convention`. ``claimed_value_conventions`` lists the
    conventions in which both states reproduce the literal table number.
    """
    family = family or PairFamily()
    check_convention(convention)
    phi, phi_prime = micro_state(cfg), macro_state(cfg)
    rows = []
    for a, b in enumerate_pairs(cfg.M, family):
        row = classify_pair(a, b, cfg.M)
        f_phi = fidelity(reduce(phi, a), reduce(phi, b))
        f_prime = fidelity(reduce(phi_prime, a), reduce(phi_prime, b))
        by_conv = {SQRT: (f_phi, f_prime), SQUARED: (f_phi**2, f_prime**2)}
        value_phi, value_prime = by_conv[convention]
        expected = expected_value(row, cfg.alpha, convention)
        literal = claimed_value(row, cfg.alpha)
        rows.append({
            "pair": [list(a), list(b)],
            "row": row,
            "convention": convention,
            "value_phi": value_phi,
            "value_phi_prime": value_prime,
            "expected": expected,
            "match": abs(value_phi - expected) <= tol and abs(value_prime - expected) <= tol,
            "states_agree": abs(value_phi - value_prime) <= tol,
            "claimed_value": literal,
            "claimed_value_conventions": [
                c for c, (x, y) in by_conv.items() if abs(x - literal) <= tol and abs(y - literal) <= tol
            ],
        })
    return rows


@dataclass(eq=False)
class WitnessResult:
    found: bool
    witness: SpinState
    deviation: float
    source: str
    states_checked: int
    threshold: float

    def to_dict(self) -> dict:
        from .core import state_to_dict

        return {
            "found": self.found,
            "deviation": self.deviation,
            "source": self.source,
            "states_checked": self.states_checked,
            "threshold": self.threshold,
            "witness": state_to_dict(self.witness),
        }


def non_collectivity_witness(
    u,
    family: PairFamily | None = None,
    attempts: int = 100,
    seed: int = 0,
    convention: str = SQRT,
    threshold: float = WITNESS_THRESHOLD,
) -> WitnessResult:
    """Look for a state whose signature moves under `u` by more than `threshold`.

    The structured library is scanned first, then `attempts` Haar-random
    states; the largest deviation seen is returned. Not finding one is a
    result, not an error.
    """
    if attempts < 1:
        raise InvalidInputError("attempts must be >= 1")
    u = np.asarray(u, dtype=complex)
    n = u.shape[0].bit_length() - 1
    candidates = list(structured_states(n).items())
    candidates += [(f"random:{i}", random_state(n, rng))
                   for i, rng in enumerate(substreams(named_seed(seed, "witness"), attempts))]
    best_name, best_state, best_dev = candidates[0][0], candidates[0][1], -1.0
    for name, s in candidates:
        dev = signature_change(u, s, family, convention)
        if dev > best_dev:
            best_name, best_state, best_dev = name, s, dev
    return WitnessResult(best_dev > threshold, best_state, max(best_dev, 0.0), best_name,
                         len(candidates), threshold)


# --- signature-constrained state search -----------------------------------


def _amplitudes(x: np.ndarray) -> np.ndarray:
    d = x.size // 2
    z = x[:d] + 1j * x[d:]
    norm = np.linalg.norm(z)
    return z / norm if norm > 0 else np.full(d, d**-0.5, dtype=complex)


def fix_global_phase(amps: np.ndarray) -> np.ndarray:
    """Rotate so the first largest-magnitude amplitude is real and nonnegative."""
    k = int(np.argmax(np.abs(amps)))
    if amps[k] == 0:
        return amps
    out = amps * (abs(amps[k]) / amps[k])
    out[k] = abs(amps[k])
    return out


@dataclass
class SearchResult:
    state: SpinState
    residual: float
    best_restart: int
    restarts: list = field(default_factory=list)

    def to_dict(self) -> dict:
        from .core import state_to_dict

        return {
            "residual": self.residual,
            "best_restart": self.best_restart,
            "state": state_to_dict(self.state),
            "restarts": self.restarts,
        }


def search_state_with_signature(
    target: FidelitySignature,
    n: int | None = None,
    restarts: int = 16,
    max_iters: int = 20_000,
    seed: int = 0,
    stop_residual: float | None = None,
    xatol: float = 1e-6,
    fatol: float = 1e-12,
    workers: int = 1,
) -> SearchResult:
    """Find a pure state whose signature matches `target` (best effort).

    The state is parameterized by the real and imaginary parts of its
    amplitudes and projected onto the unit sphere; the objective is the
    sum of squared per-key signature differences. Each restart is a
    Nelder-Mead run from a Haar-random start. If `stop_residual` is set,
    later restarts are skipped once a run reaches it.
    """
    n = target.num_spins if n is None else n
    if n != target.num_spins:
        raise InvalidInputError(f"target signature is for {target.num_spins} spins, not {n}")
    check_spin_count(n)
    if restarts < 1:
        raise InvalidInputError("restarts must be >= 1")
    evaluate = SignatureEvaluator(n, target.family, target.convention)
    if set(evaluate.pairs) != set(target.entries):
        raise InvalidInputError("target entries do not match its pair family")
    goal = np.array([target.entries[k] for k in evaluate.pairs])

    def objective(x):
        return float(np.sum((np.array(evaluate(_amplitudes(x))) - goal) ** 2))

    def run(index, rng):
        x0 = random_state(n, rng).amplitudes
        x0 = np.concatenate([x0.real, x0.imag])
        trace = []

        def record(intermediate_result):
            trace.append(float(intermediate_result.fun))

        res = minimize(
            objective, x0, method="Nelder-Mead", callback=record,
            options={"maxiter": max_iters, "xatol": xatol, "fatol": fatol, "adaptive": True},
        )
        return {
            "restart": index,
            "residual": float(res.fun),
            "iterations": int(res.nit),
            "converged": bool(res.status == 0),
            "trace": trace,
            "x": res.x,
        }

    rngs = substreams(seed, restarts)
    runs = []
    if workers > 1 and stop_residual is None:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(run, range(restarts), rngs))
    else:
        for i, rng in enumerate(rngs):
            runs.append(run(i, rng))
            if stop_residual is not None and runs[-1]["residual"] <= stop_residual:
                break
    best = min(runs, key=lambda r: (r["residual"], r["restart"]))
    state = SpinState(fix_global_phase(_amplitudes(best["x"])))
    for r in runs:
        r.pop("x")
    return SearchResult(state, best["residual"], best["restart"], runs)
