"""Fidelity-kernel estimation with bit-flip tolerance.

The kernel between two samples is the probability that the kernel circuit
returns an outcome of Hamming weight at most ``tolerance`` (a plain partial
sum over accepted outcomes, no renormalization).  Tolerance 0 is the usual
all-zeros fidelity kernel; raising the tolerance trades specificity for
robustness against readout bit flips.

Matrices are assembled from the upper triangle only and mirrored, with one
RNG stream per entry derived from (master_seed, tag, i, j), so assembly order
and parallelism cannot change sampled results, and re-running at a different
tolerance reuses identical counts.

Two evaluation routes exist and are tested against each other: an explicit
circuit simulation, and a fast contraction that exploits the fact that the
embedding layers collapse to one product rotation per qubit whose angle is
the difference of the two samples' embedding angles.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import simcore as sc
from .featuremap import FeatureMapSpec, build_fiducial, build_kernel_circuit, embedding_angles, line_coupling, make_feature_map

_CHUNK_AMPS = 2 ** 21  # complex amplitudes per batch chunk


@dataclass(frozen=True)
class KernelConfig:
    """How kernel entries are estimated.

    ``shots=None`` means exact outcome distributions; otherwise each entry is
    sampled with its own deterministic RNG stream.  ``estimate_diagonal``
    keeps diagonal entries estimated like any other (their circuits are
    identity-equivalent, which is what calibration exploits); switching it off
    pins them to exact 1.
    """

    tolerance: int = 0
    shots: int | None = None
    estimate_diagonal: bool = True
    master_seed: int = 0

    def __post_init__(self):
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")
        if self.shots is not None and self.shots <= 0:
            raise ValueError("shots must be positive when given")


@dataclass
class KernelMatrixEstimate:
    values: np.ndarray
    tolerance: int
    shots: int | None
    psd_projected: bool = False
    min_eigenvalue_before: float | None = None


# ---------------------------------------------------------------------------
# fast route: product-rotation overlaps against a fixed fiducial state
# ---------------------------------------------------------------------------

def _wht(vec: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform (length must be a power of two)."""
    a = np.array(vec)
    m = a.shape[0]
    h = 1
    while h < m:
        a = a.reshape(-1, 2, h)
        top = a[:, 0, :] + a[:, 1, :]
        bot = a[:, 0, :] - a[:, 1, :]
        a = np.stack([top, bot], axis=1).reshape(m)
        h *= 2
    return a


def _rz_all(psi: np.ndarray, n: int, angle: float) -> np.ndarray:
    """Apply RZ(angle) on every qubit of a flat amplitude vector."""
    state = sc.StateVector(n, psi.copy())
    for q in range(n):
        state = sc.apply_gate(state, sc.rz(q, angle))
    return state.amplitudes


def product_rotation_overlaps(psi: np.ndarray, deltas: np.ndarray, axis: str = "x") -> np.ndarray:
    """|<psi| prod_q R_axis(delta_q) |psi>|^2 for a batch of angle rows.

    ``deltas`` has one row per evaluation and one column per qubit.  This is
    the collapsed form of embed(x)^-1 then embed(y): per qubit the two
    rotations share an axis, so only the angle difference matters.
    """
    deltas = np.atleast_2d(np.asarray(deltas, dtype=float))
    n = deltas.shape[1]
    if psi.shape[0] != 2 ** n:
        raise ValueError("state size does not match the number of angle columns")
    if axis == "y":
        # RZ(pi/2)^dag Y RZ(pi/2) = X, so fold the basis change into the state
        psi = _rz_all(psi, n, -np.pi / 2)
        axis = "x"
    if axis == "x":
        f = _wht(psi)
        t = _wht((f.conj() * f).real) / (2 ** n)
        half = deltas / 2.0
        v0 = np.cos(half).astype(complex)
        v1 = -1j * np.sin(half)
    elif axis == "z":
        t = (psi.conj() * psi).real
        half = deltas / 2.0
        v0 = np.exp(-1j * half)
        v1 = np.exp(1j * half)
    else:
        raise ValueError(f"unknown rotation axis {axis!r}")

    out = np.empty(deltas.shape[0])
    chunk = max(1, _CHUNK_AMPS // (2 ** n))
    for lo in range(0, deltas.shape[0], chunk):
        hi = min(lo + chunk, deltas.shape[0])
        cur = t.astype(complex).reshape(1, -1)
        cur = np.broadcast_to(cur, (hi - lo, cur.shape[1]))
        for q in range(n - 1, -1, -1):
            half_len = 2 ** q
            view = cur.reshape(hi - lo, -1, 2, half_len)
            cur = (v0[lo:hi, q, None, None] * view[:, :, 0, :]
                   + v1[lo:hi, q, None, None] * view[:, :, 1, :]).reshape(hi - lo, -1)
        vals = cur[:, 0]
        out[lo:hi] = (vals.conj() * vals).real
    return out


def overlap_kernel_from_state(psi: np.ndarray, angles_a: np.ndarray,
                              angles_b: np.ndarray | None = None,
                              axis: str = "x") -> np.ndarray:
    """Kernel matrix K[i, j] = |<psi| prod R(b_j - a_i) |psi>|^2.

    Takes per-qubit embedding angles directly, which is handy for analytic
    constructions where the feature values are the rotation angles.
    """
    angles_a = np.atleast_2d(np.asarray(angles_a, dtype=float))
    angles_b = angles_a if angles_b is None else np.atleast_2d(np.asarray(angles_b, dtype=float))
    ra, cb = angles_a.shape[0], angles_b.shape[0]
    deltas = (angles_b[None, :, :] - angles_a[:, None, :]).reshape(ra * cb, -1)
    return product_rotation_overlaps(psi, deltas, axis).reshape(ra, cb)


# ---------------------------------------------------------------------------
# general route: batched circuit evolution, noise, tolerance profiles
# ---------------------------------------------------------------------------

def _fiducial_state(spec: FeatureMapSpec, params) -> np.ndarray:
    return sc.run_circuit(build_fiducial(spec, params)).amplitudes


def _apply_rotation_batched(states, n, q, axis, cos_half, sin_half):
    """Rotation with per-row angles; cos_half/sin_half are (B,) or scalars."""
    b = states.shape[0]
    view = states.reshape(b, 2 ** (n - 1 - q), 2, 2 ** q)
    a0 = view[:, :, 0, :]
    a1 = view[:, :, 1, :]
    c = np.reshape(cos_half, (-1, 1, 1))
    s = np.reshape(sin_half, (-1, 1, 1))
    if axis == "x":
        n0 = c * a0 - 1j * s * a1
        n1 = -1j * s * a0 + c * a1
    elif axis == "y":
        n0 = c * a0 - s * a1
        n1 = s * a0 + c * a1
    elif axis == "z":
        phase0 = c - 1j * s
        phase1 = c + 1j * s
        n0 = phase0 * a0
        n1 = phase1 * a1
    else:
        raise ValueError(f"unknown rotation axis {axis!r}")
    return np.stack([n0, n1], axis=2).reshape(b, -1)


def _apply_gates_batched(states: np.ndarray, n: int, gates) -> np.ndarray:
    idx = np.arange(2 ** n)
    for g in gates:
        if g.name == "cz":
            q1, q2 = g.qubits
            mask = ((idx >> q1) & 1).astype(bool) & ((idx >> q2) & 1).astype(bool)
            states[:, mask] *= -1
        else:
            half = g.angle / 2.0
            states = _apply_rotation_batched(states, n, g.qubits[0], g.name[1],
                                             np.cos(half), np.sin(half))
    return states


def _pair_profiles(psi, spec, fid_inverse_gates, deltas, noise, shots, seeds):
    """Cumulative weight-mass profile (n+1 columns) per delta row."""
    n = spec.n_qubits
    b = deltas.shape[0]
    out = np.empty((b, n + 1))
    weights = sc.hamming_weights(n)
    chunk = max(1, _CHUNK_AMPS // (2 ** n))
    axis = spec.embed_axis
    for lo in range(0, b, chunk):
        hi = min(lo + chunk, b)
        states = np.tile(psi, (hi - lo, 1))
        half = deltas[lo:hi] / 2.0
        for q in range(n):
            states = _apply_rotation_batched(states, n, q, axis,
                                             np.cos(half[:, q]), np.sin(half[:, q]))
        states = _apply_gates_batched(states, n, fid_inverse_gates)
        probs = (states.conj() * states).real
        if noise is not None and not noise.is_trivial():
            probs = sc.apply_readout_noise(probs, n, noise)
        if shots is None:
            out[lo:hi] = sc.weight_mass_profile(probs, n)
        else:
            for r in range(lo, hi):
                rng = np.random.default_rng(seeds[r])
                draws = rng.multinomial(shots, probs[r - lo] / probs[r - lo].sum())
                per = np.bincount(weights, weights=draws, minlength=n + 1)
                out[r] = np.cumsum(per) / shots
    return out


def _delta_rows(spec: FeatureMapSpec, xs_a: np.ndarray, xs_b: np.ndarray) -> np.ndarray:
    cols = np.array(spec.assignment)
    a = spec.angle_scale * xs_a[:, cols]
    b = spec.angle_scale * xs_b[:, cols]
    return b - a


def _check_features(spec: FeatureMapSpec, xs: np.ndarray) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2:
        raise ValueError("feature array must be two-dimensional (samples x features)")
    if xs.shape[1] <= max(spec.assignment):
        raise ValueError(
            f"{xs.shape[1]} feature columns cannot serve assignment {spec.assignment}")
    return xs


def assemble_profiles(xs, spec: FeatureMapSpec, params, config: KernelConfig,
                      noise: sc.NoiseModel | None = None) -> np.ndarray:
    """Kernel values at every tolerance at once: (m, m, n+1) cumulative masses.

    ``profiles[i, j, d]`` is the kernel estimate between samples i and j at
    tolerance d.  Sampled entries use one multinomial draw per (i, j), so all
    tolerances of an entry come from the same counts.
    """
    xs = _check_features(spec, xs)
    m = xs.shape[0]
    n = spec.n_qubits
    psi = _fiducial_state(spec, params)
    fid_inv = build_fiducial(spec, params).inverse().gates

    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    if config.estimate_diagonal:
        pairs.extend((i, i) for i in range(m))
    rows_a = np.array([p[0] for p in pairs], dtype=int)
    rows_b = np.array([p[1] for p in pairs], dtype=int)
    deltas = _delta_rows(spec, xs[rows_a], xs[rows_b]) if pairs else np.zeros((0, n))
    seeds = [(config.master_seed, 0, i, j) for i, j in pairs]
    prof = _pair_profiles(psi, spec, fid_inv, deltas, noise, config.shots, seeds)

    out = np.ones((m, m, n + 1))
    for (i, j), row in zip(pairs, prof):
        out[i, j] = row
        out[j, i] = row
    return out


def matrix_from_profiles(profiles: np.ndarray, config: KernelConfig) -> KernelMatrixEstimate:
    n = profiles.shape[2] - 1
    if config.tolerance > n:
        raise ValueError(f"tolerance {config.tolerance} exceeds qubit count {n}")
    return KernelMatrixEstimate(np.array(profiles[:, :, config.tolerance]),
                                config.tolerance, config.shots)


def assemble_matrix(xs, spec: FeatureMapSpec, params, config: KernelConfig,
                    noise: sc.NoiseModel | None = None) -> KernelMatrixEstimate:
    """Symmetric kernel matrix over one sample set.

    Entries (i, j) and (j, i) come from the single evaluation with i < j.  The
    noiseless exact zero-tolerance case runs through the fast contraction
    route; everything else goes through batched circuit simulation.
    """
    xs = _check_features(spec, xs)
    m = xs.shape[0]
    noiseless = noise is None or noise.is_trivial()
    if noiseless and config.shots is None and config.tolerance == 0:
        psi = _fiducial_state(spec, params)
        angles = spec.angle_scale * xs[:, np.array(spec.assignment)]
        values = overlap_kernel_from_state(psi, angles, angles, spec.embed_axis)
        values = (values + values.T) / 2.0
        if not config.estimate_diagonal:
            np.fill_diagonal(values, 1.0)
        return KernelMatrixEstimate(values, 0, None)
    if config.tolerance > spec.n_qubits:
        raise ValueError(f"tolerance {config.tolerance} exceeds qubit count {spec.n_qubits}")
    profiles = assemble_profiles(xs, spec, params, config, noise)
    return matrix_from_profiles(profiles, config)


def assemble_cross(xs_rows, xs_cols, spec: FeatureMapSpec, params, config: KernelConfig,
                   noise: sc.NoiseModel | None = None) -> np.ndarray:
    """Rectangular kernel block K[i, j] = k(rows_i, cols_j) (e.g. test x train)."""
    xs_rows = _check_features(spec, xs_rows)
    xs_cols = _check_features(spec, xs_cols)
    mr, mc = xs_rows.shape[0], xs_cols.shape[0]
    noiseless = noise is None or noise.is_trivial()
    if noiseless and config.shots is None and config.tolerance == 0:
        psi = _fiducial_state(spec, params)
        cols = np.array(spec.assignment)
        return overlap_kernel_from_state(psi, spec.angle_scale * xs_rows[:, cols],
                                         spec.angle_scale * xs_cols[:, cols],
                                         spec.embed_axis)
    if config.tolerance > spec.n_qubits:
        raise ValueError(f"tolerance {config.tolerance} exceeds qubit count {spec.n_qubits}")
    psi = _fiducial_state(spec, params)
    fid_inv = build_fiducial(spec, params).inverse().gates
    pairs = [(i, j) for i in range(mr) for j in range(mc)]
    rows_a = np.array([p[0] for p in pairs], dtype=int)
    rows_b = np.array([p[1] for p in pairs], dtype=int)
    deltas = _delta_rows(spec, xs_rows[rows_a], xs_cols[rows_b])
    seeds = [(config.master_seed, 1, i, j) for i, j in pairs]
    prof = _pair_profiles(psi, spec, fid_inv, deltas, noise, config.shots, seeds)
    return prof[:, config.tolerance].reshape(mr, mc)


def kernel_entry(spec: FeatureMapSpec, params, x, y, config: KernelConfig,
                 noise: sc.NoiseModel | None = None, seed=None) -> float:
    """Single kernel entry; mostly a readable reference for the batched paths."""
    circ = build_kernel_circuit(spec, params, x, y)
    dist = sc.outcome_distribution(sc.run_circuit(circ), noise)
    if config.shots is None:
        return sc.hamming_mass(dist, spec.n_qubits, config.tolerance)
    counts = sc.sample_counts(dist, spec.n_qubits, config.shots,
                              seed if seed is not None else (config.master_seed,))
    hits = sum(c for bits, c in counts.counts.items()
               if bits.count("1") <= config.tolerance)
    return hits / config.shots


# ---------------------------------------------------------------------------
# positive semidefinite repair and diagnostics
# ---------------------------------------------------------------------------

def psd_project(values: np.ndarray) -> tuple[np.ndarray, float]:
    """Nearest PSD matrix in Frobenius norm, plus the original minimum eigenvalue.

    Clips negative eigenvalues to zero; PSD input comes back unchanged.
    """
    values = np.asarray(values, dtype=float)
    sym = (values + values.T) / 2.0
    w, v = np.linalg.eigh(sym)
    min_eig = float(w[0])
    if min_eig >= 0.0:
        return np.array(values), min_eig
    clipped = np.clip(w, 0.0, None)
    proj = (v * clipped) @ v.T
    return (proj + proj.T) / 2.0, min_eig


def repair_psd(estimate: KernelMatrixEstimate) -> KernelMatrixEstimate:
    projected, min_eig = psd_project(estimate.values)
    return replace(estimate, values=projected, psd_projected=True,
                   min_eigenvalue_before=min_eig)


def psd_distance(values: np.ndarray) -> float:
    """Frobenius distance between the matrix and its PSD projection, after
    normalizing both to unit Frobenius norm.  Exactly 0.0 for PSD input."""
    values = np.asarray(values, dtype=float)
    norm = np.linalg.norm(values)
    if norm == 0.0:
        raise ValueError("zero matrix has no normalized PSD distance")
    projected, min_eig = psd_project(values)
    if min_eig >= 0.0:
        return 0.0
    pnorm = np.linalg.norm(projected)
    if pnorm == 0.0:
        raise ValueError("PSD projection collapsed to zero; distance undefined")
    return float(np.linalg.norm(values / norm - projected / pnorm))


def average_diagonal(values: np.ndarray) -> float:
    return float(np.mean(np.diag(values)))


# ---------------------------------------------------------------------------
# readout calibration
# ---------------------------------------------------------------------------

@dataclass
class CalibrationReport:
    """Sweep of average diagonal and PSD distance over tolerance and width.

    ``rows`` holds (n_qubits, tolerance, avg_diagonal, psd_distance) tuples;
    ``recommended[(n, threshold)]`` is the smallest tolerance whose average
    diagonal reaches the threshold, or None when no tolerance does.
    """

    noise: sc.NoiseModel
    shots: int | None
    thresholds: tuple[float, ...]
    rows: list[tuple[int, int, float, float]]
    recommended: dict[tuple[int, float], int | None]

    def avg_diagonal(self, n: int, tolerance: int) -> float:
        for rn, rd, avg, _ in self.rows:
            if rn == n and rd == tolerance:
                return avg
        raise KeyError(f"no calibration row for n={n}, tolerance={tolerance}")

    def recommended_tolerance(self, n: int, threshold: float) -> int | None:
        return self.recommended[(n, float(threshold))]


def calibrate(ns, noise: sc.NoiseModel, shots: int | None = None,
              thresholds=(0.9,), samples: int = 15, seed: int = 7,
              angle_scale: float = 2 * np.pi) -> CalibrationReport:
    """Measure how readout noise empties the accepted-outcome mass.

    For each register width, a random dataset and random fiducial parameters
    are drawn, the full kernel matrix is estimated at every tolerance, and the
    average diagonal is recorded.  Diagonal circuits are identity-equivalent,
    so under pure readout noise the average diagonal at tolerance d is the
    binomial CDF of d flips; the recommended tolerance is the smallest one
    whose average diagonal reaches each threshold.
    """
    thresholds = tuple(float(t) for t in thresholds)
    if any(not 0.0 < t <= 1.0 for t in thresholds):
        raise ValueError("thresholds must lie in (0, 1]")
    rows: list[tuple[int, int, float, float]] = []
    recommended: dict[tuple[int, float], int | None] = {}
    for n in ns:
        rng = np.random.default_rng((seed, n))
        xs = rng.uniform(0.0, 1.0, size=(samples, n))
        params = rng.uniform(0.0, 2 * np.pi, size=3 * n)
        spec = make_feature_map(line_coupling(n), n, angle_scale=angle_scale)
        config = KernelConfig(tolerance=0, shots=shots, master_seed=seed + 1000 * n)
        profiles = assemble_profiles(xs, spec, params, config, noise)
        avgs = []
        for d in range(n + 1):
            values = profiles[:, :, d]
            avg = average_diagonal(values)
            avgs.append(avg)
            rows.append((n, d, avg, psd_distance(values)))
        for t in thresholds:
            hit = next((d for d, avg in enumerate(avgs) if avg >= t), None)
            recommended[(n, t)] = hit
    return CalibrationReport(noise, shots, thresholds, rows, recommended)


# ---------------------------------------------------------------------------
# CSV import/export
# ---------------------------------------------------------------------------

def save_matrix_csv(values: np.ndarray, path, ids=None) -> None:
    """Matrix with row/column ids; floats via repr so reloads are bit-exact."""
    import csv

    values = np.asarray(values)
    m, k = values.shape
    ids_r = [str(i) for i in range(m)] if ids is None else [str(i) for i in ids]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([""] + [str(j) for j in range(k)])
        for rid, row in zip(ids_r, values):
            w.writerow([rid] + [repr(float(v)) for v in row])


def load_matrix_csv(path) -> tuple[np.ndarray, list[str]]:
    import csv

    with open(path, newline="") as fh:
        reader = list(csv.reader(fh))
    if not reader:
        raise ValueError("matrix file is empty")
    ids = []
    rows = []
    for rec in reader[1:]:
        ids.append(rec[0])
        rows.append([float(v) for v in rec[1:]])
    return np.array(rows), ids


def save_calibration_csv(report: CalibrationReport, path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n_qubits", "tolerance", "avg_diagonal", "psd_distance"])
        for n, d, avg, dist in report.rows:
            w.writerow([n, d, repr(avg), repr(dist)])
