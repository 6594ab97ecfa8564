"""Exact statevector simulation with synthetic readout noise.

Amplitudes are stored as a dense complex vector of length 2**n with qubit 0 as
the least significant bit of the basis index, so basis index 5 on three qubits
is the bitstring "101" (qubit 0 and qubit 2 set).  The gate set is deliberately
small: RX, RY, RZ and CZ, which is enough for every circuit built elsewhere in
the package and keeps inverses trivial (negate the rotation angles, reverse the
gate order).

Noise is modeled at readout only: an optional global depolarizing mix toward
the uniform distribution followed by independent per-qubit bit flips with
asymmetric rates p01 (read 1 given true 0) and p10 (read 0 given true 1).
Amplitudes stay exact; noise acts on the outcome distribution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_QUBITS = 24

_ROTATIONS = {
    "rx": lambda t: np.array(
        [[np.cos(t / 2), -1j * np.sin(t / 2)],
         [-1j * np.sin(t / 2), np.cos(t / 2)]], dtype=complex),
    "ry": lambda t: np.array(
        [[np.cos(t / 2), -np.sin(t / 2)],
         [np.sin(t / 2), np.cos(t / 2)]], dtype=complex),
    "rz": lambda t: np.array(
        [[np.exp(-1j * t / 2), 0],
         [0, np.exp(1j * t / 2)]], dtype=complex),
}

_weights_cache: dict[int, np.ndarray] = {}


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"qubit count {n} outside supported range 1..{MAX_QUBITS}")


@dataclass(frozen=True)
class GateOp:
    """One gate: a rotation ("rx"/"ry"/"rz") on a qubit or a "cz" on a pair."""

    name: str
    qubits: tuple[int, ...]
    angle: float = 0.0

    def inverse(self) -> "GateOp":
        if self.name == "cz":
            return self
        return GateOp(self.name, self.qubits, -self.angle)


def rx(q: int, angle: float) -> GateOp:
    return GateOp("rx", (q,), angle)


def ry(q: int, angle: float) -> GateOp:
    return GateOp("ry", (q,), angle)


def rz(q: int, angle: float) -> GateOp:
    return GateOp("rz", (q,), angle)


def cz(q1: int, q2: int) -> GateOp:
    if q1 == q2:
        raise ValueError("cz needs two distinct qubits")
    return GateOp("cz", (min(q1, q2), max(q1, q2)))


@dataclass
class Circuit:
    """Ordered gate list on a fixed register."""

    n_qubits: int
    gates: list[GateOp] = field(default_factory=list)

    def __post_init__(self):
        _check_n(self.n_qubits)

    def add(self, gate: GateOp) -> "Circuit":
        for q in gate.qubits:
            if not 0 <= q < self.n_qubits:
                raise ValueError(f"gate on qubit {q} outside register of {self.n_qubits}")
        self.gates.append(gate)
        return self

    def extend(self, gates) -> "Circuit":
        for g in gates:
            self.add(g)
        return self

    def inverse(self) -> "Circuit":
        inv = Circuit(self.n_qubits)
        inv.gates = [g.inverse() for g in reversed(self.gates)]
        return inv

    def count(self, name: str) -> int:
        return sum(1 for g in self.gates if g.name == name)


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def zero_state(n: int) -> StateVector:
    _check_n(n)
    amps = np.zeros(2 ** n, dtype=complex)
    amps[0] = 1.0
    return StateVector(n, amps)


def _apply_rotation(amps: np.ndarray, n: int, q: int, mat: np.ndarray) -> np.ndarray:
    # qubit q lives on axis n-1-q of the (2,)*n view
    view = amps.reshape((2,) * n)
    moved = np.moveaxis(view, n - 1 - q, 0)
    out = np.tensordot(mat, moved, axes=([1], [0]))
    return np.moveaxis(out, 0, n - 1 - q).reshape(-1)


def _apply_cz(amps: np.ndarray, n: int, q1: int, q2: int) -> np.ndarray:
    out = amps.copy().reshape((2,) * n)
    idx = [slice(None)] * n
    idx[n - 1 - q1] = 1
    idx[n - 1 - q2] = 1
    out[tuple(idx)] *= -1
    return out.reshape(-1)


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    """Apply one gate and return a new state (the input is not mutated)."""
    n = state.n_qubits
    for q in gate.qubits:
        if not 0 <= q < n:
            raise ValueError(f"gate on qubit {q} outside register of {n}")
    if gate.name == "cz":
        amps = _apply_cz(state.amplitudes, n, *gate.qubits)
    elif gate.name in _ROTATIONS:
        amps = _apply_rotation(state.amplitudes, n, gate.qubits[0], _ROTATIONS[gate.name](gate.angle))
    else:
        raise ValueError(f"unknown gate {gate.name!r}")
    return StateVector(n, amps)


def run_circuit(circuit: Circuit, initial: StateVector | None = None) -> StateVector:
    """Run a circuit from |0...0> (or a caller-supplied initial state)."""
    state = zero_state(circuit.n_qubits) if initial is None else StateVector(
        circuit.n_qubits, initial.amplitudes.copy())
    if initial is not None and initial.n_qubits != circuit.n_qubits:
        raise ValueError("initial state size does not match circuit register")
    amps = state.amplitudes
    n = circuit.n_qubits
    for gate in circuit.gates:
        if gate.name == "cz":
            amps = _apply_cz(amps, n, *gate.qubits)
        else:
            amps = _apply_rotation(amps, n, gate.qubits[0], _ROTATIONS[gate.name](gate.angle))
    return StateVector(n, amps)


@dataclass(frozen=True)
class NoiseModel:
    """Readout bit flips plus an optional global depolarizing mix.

    p01 is the probability of reading 1 when the true bit is 0 and p10 the
    reverse; depolarizing mixes the exact distribution with the uniform one
    before the flips are applied.
    """

    p01: float = 0.0
    p10: float = 0.0
    depolarizing: float = 0.0

    def __post_init__(self):
        for name in ("p01", "p10", "depolarizing"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")

    def is_trivial(self) -> bool:
        return self.p01 == 0.0 and self.p10 == 0.0 and self.depolarizing == 0.0


def apply_readout_noise(probs: np.ndarray, n: int, noise: NoiseModel) -> np.ndarray:
    """Push an exact outcome distribution through the noise model."""
    p = probs
    if noise.depolarizing > 0.0:
        p = (1.0 - noise.depolarizing) * p + noise.depolarizing / p.shape[-1]
    if noise.p01 == 0.0 and noise.p10 == 0.0:
        return np.array(p, copy=True) if p is probs else p
    # column = true bit, row = observed bit
    t = np.array([[1.0 - noise.p01, noise.p10],
                  [noise.p01, 1.0 - noise.p10]])
    batched = p.ndim == 2
    lead = p.shape[0] if batched else 1
    out = p.reshape((lead,) + (2,) * n)
    for q in range(n):
        axis = 1 + n - 1 - q
        out = np.moveaxis(np.tensordot(t, out, axes=([1], [axis])), 0, axis)
    out = out.reshape(lead, -1)
    return out if batched else out[0]


def outcome_distribution(state: StateVector, noise: NoiseModel | None = None) -> np.ndarray:
    """Measurement distribution over all 2**n outcomes, noise included."""
    probs = np.abs(state.amplitudes) ** 2
    if noise is None or noise.is_trivial():
        return probs
    return apply_readout_noise(probs, state.n_qubits, noise)


@dataclass
class ShotCounts:
    n_qubits: int
    shots: int
    counts: dict[str, int]

    def total(self) -> int:
        return sum(self.counts.values())


def _draw_multinomial(dist: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    total = dist.sum()
    if abs(total - 1.0) > 1e-8:
        raise ValueError(f"distribution sums to {total}, not 1")
    return rng.multinomial(shots, dist / total)


def sample_counts(dist: np.ndarray, n: int, shots: int, seed) -> ShotCounts:
    """Draw shot counts from an outcome distribution, deterministically by seed."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    if dist.shape[0] != 2 ** n:
        raise ValueError("distribution length does not match qubit count")
    draws = _draw_multinomial(dist, shots, np.random.default_rng(seed))
    hits = np.nonzero(draws)[0]
    counts = {format(int(i), f"0{n}b"): int(draws[i]) for i in hits}
    return ShotCounts(n, shots, counts)


def hamming_weights(n: int) -> np.ndarray:
    """Hamming weight of every basis index on n qubits (cached)."""
    _check_n(n)
    if n not in _weights_cache:
        idx = np.arange(2 ** n, dtype=np.uint32)
        _weights_cache[n] = np.bitwise_count(idx).astype(np.int64)
    return _weights_cache[n]


def hamming_mass(dist: np.ndarray, n: int, max_weight: int) -> float:
    """Total probability mass on outcomes with Hamming weight <= max_weight."""
    if dist.shape[-1] != 2 ** n:
        raise ValueError("distribution length does not match qubit count")
    if max_weight < 0:
        return 0.0
    mask = hamming_weights(n) <= max_weight
    return float(dist[..., mask].sum(axis=-1))


def weight_mass_profile(dist: np.ndarray, n: int) -> np.ndarray:
    """Cumulative mass at each Hamming weight 0..n; last entry is the total."""
    if dist.shape[-1] != 2 ** n:
        raise ValueError("distribution length does not match qubit count")
    w = hamming_weights(n)
    if dist.ndim == 1:
        per = np.bincount(w, weights=dist, minlength=n + 1)
        return np.cumsum(per)
    per = np.zeros(dist.shape[:-1] + (n + 1,))
    for v in range(n + 1):
        cols = np.nonzero(w == v)[0]
        if cols.size:
            per[..., v] = dist[..., cols].sum(axis=-1)
    return np.cumsum(per, axis=-1)


def states_equal(a: StateVector, b: StateVector, tol: float = 1e-10) -> bool:
    """Equality up to a global phase."""
    if a.n_qubits != b.n_qubits:
        return False
    inner = np.vdot(a.amplitudes, b.amplitudes)
    return bool(abs(abs(inner) - 1.0) <= tol)
