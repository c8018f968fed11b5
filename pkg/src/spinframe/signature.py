"""Fidelity signatures: fidelities between equal-size subsystem pairs.

A signature maps canonical pair keys ``(A, B)`` (``A < B`` as tuples) to
the fidelity of the two reduced states. Which pairs enter is controlled
by a :class:`PairFamily`.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import HARD_MAX_SPINS, SpinState, check_spin_count, validate_spec
from .errors import (
    EnumerationTooLargeError,
    IncomparableSignaturesError,
    InvalidInputError,
    MalformedDocumentError,
)
from .fidelity import SQRT, _factor, check_convention, fidelity_from_factors

SINGLE = "single"
SUBSETS = "subsets"
TUPLES = "tuples"
EXPLICIT = "explicit"
MODES = (SINGLE, SUBSETS, TUPLES, EXPLICIT)
DEFAULT_PAIR_CAP = 20_000


def _canonical(a, b):
    a, b = tuple(a), tuple(b)
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class PairFamily:
    mode: str = SINGLE
    k: int = 1
    overlap_allowed: bool = True
    cap: int = DEFAULT_PAIR_CAP
    pairs: tuple = field(default=())

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidInputError(f"unknown pair-family mode {self.mode!r}")
        if int(self.k) != self.k or self.k < 1:
            raise InvalidInputError(f"subsystem size k must be >= 1, got {self.k!r}")
        if int(self.cap) != self.cap or self.cap < 1:
            raise InvalidInputError(f"enumeration cap must be >= 1, got {self.cap!r}")
        if self.mode == SINGLE and self.k != 1:
            object.__setattr__(self, "k", 1)
        if self.mode == EXPLICIT:
            canon = set()
            for pair in self.pairs:
                try:
                    a, b = pair
                    a, b = tuple(int(i) for i in a), tuple(int(i) for i in b)
                except (TypeError, ValueError):
                    raise InvalidInputError(f"explicit pair {pair!r} is not two index tuples") from None
                if len(a) != len(b):
                    raise InvalidInputError(f"explicit pair {a}, {b} has unequal sizes")
                if a != b:
                    canon.add(_canonical(a, b))
            object.__setattr__(self, "pairs", tuple(sorted(canon)))
        elif self.pairs:
            raise InvalidInputError("only explicit families carry a pair list")

    @classmethod
    def single_spin(cls):
        return cls(SINGLE)

    @classmethod
    def sorted_subsets(cls, k, overlap_allowed=True, cap=DEFAULT_PAIR_CAP):
        return cls(SUBSETS, k, overlap_allowed, cap)

    @classmethod
    def ordered_tuples(cls, k, overlap_allowed=True, cap=DEFAULT_PAIR_CAP):
        return cls(TUPLES, k, overlap_allowed, cap)

    @classmethod
    def explicit(cls, pairs, cap=DEFAULT_PAIR_CAP):
        return cls(EXPLICIT, 1, True, cap, tuple(pairs))

    def to_dict(self) -> dict:
        doc = {"mode": self.mode, "k": self.k, "overlap_allowed": self.overlap_allowed, "cap": self.cap}
        if self.mode == EXPLICIT:
            doc["pairs"] = [[list(a), list(b)] for a, b in self.pairs]
        return doc

    @classmethod
    def from_dict(cls, doc) -> PairFamily:
        if not isinstance(doc, dict) or "mode" not in doc:
            raise MalformedDocumentError("family document needs a 'mode'")
        try:
            return cls(
                doc["mode"],
                doc.get("k", 1),
                bool(doc.get("overlap_allowed", True)),
                doc.get("cap", DEFAULT_PAIR_CAP),
                tuple(doc.get("pairs", ())),
            )
        except InvalidInputError as exc:
            raise MalformedDocumentError(str(exc)) from None


def count_pairs(n: int, family: PairFamily) -> int:
    k = family.k
    if family.mode == EXPLICIT:
        return len(family.pairs)
    if k > n:
        return 0
    if family.mode == TUPLES:
        m, disjoint_partners = math.perm(n, k), math.perm(n - k, k)
    else:
        m, disjoint_partners = math.comb(n, k), math.comb(n - k, k)
    if family.overlap_allowed:
        return math.comb(m, 2)
    return m * disjoint_partners // 2


def enumerate_pairs(n: int, family: PairFamily | None = None) -> list[tuple[tuple, tuple]]:
    """Deterministic, duplicate-free list of canonical subsystem pairs."""
    family = family or PairFamily()
    check_spin_count(n, HARD_MAX_SPINS)
    count = count_pairs(n, family)
    if count > family.cap:
        raise EnumerationTooLargeError(count, family.cap)
    if family.mode == EXPLICIT:
        for a, b in family.pairs:
            validate_spec(a, n)
            validate_spec(b, n)
        return list(family.pairs)
    if family.k > n:
        raise InvalidInputError(f"subsystem size {family.k} exceeds spin count {n}")
    spins = range(1, n + 1)
    if family.mode == TUPLES:
        subsystems = list(itertools.permutations(spins, family.k))
    else:
        subsystems = list(itertools.combinations(spins, family.k))
    pairs = [
        (a, b)
        for a, b in itertools.combinations(sorted(subsystems), 2)
        if family.overlap_allowed or not set(a) & set(b)
    ]
    return pairs


@dataclass(frozen=True, eq=False)
class FidelitySignature:
    num_spins: int
    convention: str
    family: PairFamily
    entries: dict

    def values(self) -> np.ndarray:
        return np.fromiter(self.entries.values(), dtype=float, count=len(self.entries))

    def to_dict(self) -> dict:
        return {
            "num_spins": self.num_spins,
            "convention": self.convention,
            "family": self.family.to_dict(),
            "entries": [{"a": list(a), "b": list(b), "value": v} for (a, b), v in self.entries.items()],
        }

    @classmethod
    def from_dict(cls, doc) -> FidelitySignature:
        try:
            n = doc["num_spins"]
            convention = doc["convention"]
            family = PairFamily.from_dict(doc["family"])
            raw = doc["entries"]
            entries = {}
            for e in raw:
                key = _canonical(e["a"], e["b"])
                entries[key] = float(e["value"])
        except (KeyError, TypeError, ValueError):
            raise MalformedDocumentError("signature document is missing or has malformed fields") from None
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise MalformedDocumentError(f"num_spins must be a positive integer, got {n!r}")
        try:
            check_convention(convention)
        except InvalidInputError as exc:
            raise MalformedDocumentError(str(exc)) from None
        return cls(n, convention, family, dict(sorted(entries.items())))


class SignatureEvaluator:
    """Precomputed pair list and axis permutations for repeated evaluation.

    Calling it on an amplitude vector returns the signature values in
    canonical key order, without building intermediate objects.
    """

    def __init__(self, n: int, family: PairFamily | None = None, convention: str = SQRT):
        self.num_spins = n
        self.family = family or PairFamily()
        self.convention = check_convention(convention)
        self.pairs = enumerate_pairs(n, self.family)
        subsystems = sorted({x for pair in self.pairs for x in pair})
        self._slot = {spec: i for i, spec in enumerate(subsystems)}
        self._axes = []
        for spec in subsystems:
            keep = [i - 1 for i in spec]
            self._axes.append((keep + [i for i in range(n) if i not in keep], 1 << len(spec)))

    def factors(self, amplitudes: np.ndarray, workers: int = 1) -> list:
        t = np.asarray(amplitudes, dtype=complex).reshape((2,) * self.num_spins)

        def one(axes):
            perm, d = axes
            m = t.transpose(perm).reshape(d, -1)
            rho = m @ m.conj().T
            return _factor(0.5 * (rho + rho.conj().T))

        return _map(one, self._axes, workers)

    def __call__(self, amplitudes: np.ndarray, workers: int = 1) -> list:
        fac = self.factors(amplitudes, workers)
        slot = self._slot

        def value(pair):
            f = fidelity_from_factors(fac[slot[pair[0]]], fac[slot[pair[1]]])
            return f * f if self.convention != SQRT else f

        return _map(value, self.pairs, workers)


def signature(
    s: SpinState, family: PairFamily | None = None, convention: str = SQRT, workers: int = 1
) -> FidelitySignature:
    """Fidelity of the reduced states for every pair enumerated by `family`."""
    ev = SignatureEvaluator(s.num_spins, family, convention)
    values = ev(s.amplitudes, workers)
    return FidelitySignature(s.num_spins, convention, ev.family, dict(zip(ev.pairs, values)))


def _map(fn, items, workers):
    if workers and workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _check_comparable(s1: FidelitySignature, s2: FidelitySignature):
    if s1.num_spins != s2.num_spins:
        raise IncomparableSignaturesError(f"spin counts differ: {s1.num_spins} vs {s2.num_spins}")
    if s1.convention != s2.convention:
        raise IncomparableSignaturesError(f"conventions differ: {s1.convention} vs {s2.convention}")
    if s1.family != s2.family or s1.entries.keys() != s2.entries.keys():
        raise IncomparableSignaturesError("signatures were built from different pair families")


def signature_differences(s1: FidelitySignature, s2: FidelitySignature) -> dict:
    """Per-key difference s1 - s2."""
    _check_comparable(s1, s2)
    return {key: s1.entries[key] - s2.entries[key] for key in s1.entries}


def signature_distance(s1: FidelitySignature, s2: FidelitySignature) -> float:
    diffs = signature_differences(s1, s2)
    return float(max((abs(d) for d in diffs.values()), default=0.0))


def signatures_equal(s1: FidelitySignature, s2: FidelitySignature, tol: float) -> bool:
    return signature_distance(s1, s2) <= tol


def serialize_signature(sig: FidelitySignature) -> bytes:
    return (json.dumps(sig.to_dict(), indent=2) + "\n").encode()


def parse_signature(data: bytes | str) -> FidelitySignature:
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedDocumentError(f"signature file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise MalformedDocumentError("signature document must be a JSON object")
    return FidelitySignature.from_dict(doc)
