"""Low-precision HHL matrix inversion on an SES data register.

Register layout: the data register (dimension n) plus m phase qubits
(qubits 0..m-1 of the ancilla register) and one rotation ancilla (qubit m).
Phase qubit j controls exp(i A t0 2^j), so an eigenvalue lambda is read
out as k = 2^m lambda t0 / (2 pi) (mod 2^m).
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import compiler, numerics, simulator
from .device import DeviceGraph, Schedule, Segment, total_duration
from .errors import ImpossibleOutcome, InvalidInput
from .gates import Gate, apply_gate


def gamma_angles(m: int) -> np.ndarray:
    if m < 1:
        raise InvalidInput("m must be >= 1")
    k = np.arange(2**m, dtype=float)
    out = np.zeros(2**m)
    out[1:] = 2 * np.arcsin(1 / k[1:])
    return out


def gray(j: int) -> int:
    return j ^ (j >> 1)


def ucr_matrix(m: int) -> np.ndarray:
    """M[k, j] = (-1)^(popcount(k & gray(j))); M^T M = 2^m I."""
    N = 2**m
    return np.array([[(-1) ** bin(k & gray(j)).count("1") for j in range(N)] for k in range(N)], dtype=float)


def ucr_angles(gamma) -> np.ndarray:
    """Rotation angles theta with ucr_matrix(m) @ theta = gamma."""
    gamma = np.asarray(gamma, dtype=float)
    N = len(gamma)
    if N < 1 or N & (N - 1):
        raise InvalidInput(f"length {N} is not a power of two")
    m = N.bit_length() - 1
    return ucr_matrix(m).T @ gamma / N


def ucr_circuit(theta, controls, target: int) -> list[Gate]:
    """R_y(theta_j) then a CNOT from the control whose Gray-code bit flips next."""
    theta = np.asarray(theta, dtype=float)
    N = len(theta)
    controls = list(controls)
    if N != 2 ** len(controls):
        raise InvalidInput("need 2^m angles for m controls")
    ops = []
    for j in range(N):
        ops.append(Gate("ry", (target,), (theta[j],)))
        if N > 1:
            bit = (gray(j) ^ gray((j + 1) % N)).bit_length() - 1
            ops.append(Gate("cx", (controls[bit], target)))
    return ops


@dataclass(frozen=True)
class RotationAngles:
    """Target angles gamma_k and the circuit angles theta realizing them."""

    gamma: np.ndarray
    theta: np.ndarray

    @classmethod
    def for_m(cls, m: int) -> "RotationAngles":
        g = gamma_angles(m)
        return cls(g, ucr_angles(g))

    def circuit(self, controls, target: int) -> list[Gate]:
        return ucr_circuit(self.theta, controls, target)


def qft_circuit(qubits) -> list[Gate]:
    """|x> -> 2^(-m/2) sum_k exp(2 pi i x k / 2^m) |k>, little-endian over ``qubits``."""
    q = list(qubits)
    m = len(q)
    ops = []
    for j in reversed(range(m)):
        ops.append(Gate("h", (q[j],)))
        for l in reversed(range(j)):
            ops.append(Gate("cphase", (q[l], q[j]), (np.pi / 2 ** (j - l),)))
    for j in range(m // 2):
        ops.append(Gate("swap", (q[j], q[m - 1 - j])))
    return ops


def inverse_qft_circuit(qubits) -> list[Gate]:
    return [g.dagger() for g in reversed(qft_circuit(qubits))]


@dataclass(frozen=True)
class ControlledEvolution:
    """exp(i * scale * A) on the data register when ancilla-register qubit ``control`` is 1."""

    control: int
    scale: float


@dataclass(frozen=True)
class HHLInstance:
    A: np.ndarray
    b: np.ndarray
    m: int
    t0: float = 2 * np.pi

    def __post_init__(self):
        A = numerics.check_real_symmetric(self.A)
        b = np.asarray(self.b, dtype=complex).reshape(-1)
        lam = np.linalg.eigvalsh(A)
        if lam[0] <= 0 or lam[-1] >= 1:
            raise InvalidInput("eigenvalues of A must lie in (0, 1)")
        if b.shape[0] != A.shape[0] or abs(np.linalg.norm(b) - 1) > 1e-10:
            raise InvalidInput("b must be a unit vector matching A")
        if self.m < 1:
            raise InvalidInput("m must be >= 1")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def x_ideal(self) -> np.ndarray:
        x = np.linalg.solve(self.A, self.b)
        return x / np.linalg.norm(x)

    def evolution(self, scale: float) -> tuple[np.ndarray, np.ndarray]:
        """Spectral pair (V, D) with exp(i scale A) = V exp(-i D) V^T."""
        lam, Q = np.linalg.eigh(self.A)
        return Q, numerics.principal_angle(-scale * lam)

    def to_dict(self) -> dict:
        return {
            "A": self.A.tolist(),
            "b": [[z.real, z.imag] for z in self.b],
            "m": self.m,
            "t0": self.t0,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HHLInstance":
        b = np.array([complex(re, im) for re, im in d["b"]])
        return cls(np.array(d["A"], dtype=float), b, int(d["m"]), float(d.get("t0", 2 * np.pi)))


def build_hhl_circuit(inst: HHLInstance) -> list:
    m = inst.m
    phase = list(range(m))
    ops = [Gate("h", tuple(phase))]
    ops += [ControlledEvolution(j, inst.t0 * 2**j) for j in range(m)]
    ops += inverse_qft_circuit(phase)
    ops += RotationAngles.for_m(m).circuit(phase, m)
    ops += qft_circuit(phase)
    ops += [ControlledEvolution(j, -inst.t0 * 2**j) for j in reversed(range(m))]
    ops.append(Gate("h", tuple(phase)))
    return ops


def phase_readout(inst: HHLInstance) -> np.ndarray:
    """Distribution of the phase register just before the controlled rotation."""
    ops = build_hhl_circuit(inst)
    n_pre = 1 + inst.m + len(inverse_qft_circuit(range(inst.m)))
    reg = _run_register(inst, ops[:n_pre])
    probs = np.sum(np.abs(reg) ** 2, axis=0)
    return probs[: 2**inst.m]


def _run_register(inst: HHLInstance, ops) -> np.ndarray:
    nq = inst.m + 1
    reg = np.zeros((inst.n, 2**nq), dtype=complex)
    reg[:, 0] = inst.b
    idx = np.arange(2**nq)
    for op in ops:
        if isinstance(op, Gate):
            reg = apply_gate(reg, op, nq)
        else:
            V, D = inst.evolution(op.scale)
            W = (V * np.exp(-1j * D)) @ V.T
            sel = idx[(idx >> op.control) & 1 == 1]
            reg[:, sel] = W @ reg[:, sel]
    return reg


def compile_hhl_schedule(
    inst: HHLInstance,
    graph: DeviceGraph | None = None,
    cnot_mode: str = "ideal",
    params: compiler.EntanglerParams | None = None,
) -> Schedule:
    """Device schedule on a complete graph of n + m + 1 qubits.

    Ancilla-register gates become ideal gates; every controlled evolution
    goes through the controlled-unitary protocol.
    """
    graph = graph or DeviceGraph.with_ancillas(inst.n, inst.m + 1)
    if graph.n_data != inst.n or len(graph.ancilla_ids) != inst.m + 1:
        raise InvalidInput("graph does not match the instance registers")
    anc = graph.ancilla_ids
    out = Schedule(graph)
    for op in build_hhl_circuit(inst):
        if isinstance(op, Gate):
            g = Gate(op.name, tuple(anc[q] for q in op.qubits), op.params, op.matrix)
            out = out + Schedule(graph, (Segment("ideal_gate", gate=g, label=op.name),))
        else:
            V, D = inst.evolution(op.scale)
            W = (V * np.exp(-1j * D)) @ V.T
            spec = compiler.ControlledUnitarySpec.build(W, anc[op.control], spectral=(V, D))
            out = out + compiler.schedule_controlled_unitary(spec, graph, cnot_mode, params, controlled_on=1)
    return out


@dataclass(frozen=True)
class HHLResult:
    e_algorithm: float
    p_postselect: float
    rho_data: np.ndarray
    x_estimate: np.ndarray
    x_ideal: np.ndarray
    p_uncompute: float
    register: np.ndarray = field(repr=False)
    schedule_time: float | None = None
    leakage: float = 0.0


def _analyze(inst: HHLInstance, reg: np.ndarray, schedule_time=None, leakage=0.0) -> HHLResult:
    m = inst.m
    idx = np.arange(reg.shape[1])
    post = reg[:, (idx >> m) & 1 == 1]
    p = float(np.vdot(post, post).real)
    if p <= 1e-300:
        raise ImpossibleOutcome(f"rotation ancilla never reads 1 (eigenvalues {np.linalg.eigvalsh(inst.A)})")
    rho = post @ post.conj().T / p
    x = inst.x_ideal()
    e = float(1 - np.vdot(x, rho @ x).real)
    w, v = np.linalg.eigh(rho)
    est = v[:, -1]
    ov = np.vdot(est, x)
    if abs(ov) > 0:
        est = est * ov / abs(ov)
    zero = reg[:, (idx & (2**m - 1)) == 0]
    p_unc = float(np.vdot(zero, zero).real)
    return HHLResult(e, p, rho, est, x, p_unc, reg, schedule_time, leakage)


def run_hhl(
    inst: HHLInstance,
    level: str = "abstract",
    counter_rotating: bool = False,
    cnot_mode: str = "ideal",
    graph: DeviceGraph | None = None,
) -> HHLResult:
    """Run the circuit, postselect the rotation ancilla on |1> and trace the phase register."""
    if level == "abstract":
        return _analyze(inst, _run_register(inst, build_hhl_circuit(inst)))
    if level == "two_level_device":
        if inst.n + inst.m + 1 > 14:
            raise InvalidInput("device-level runs are limited to 14 qubits")
        graph = graph or DeviceGraph.with_ancillas(inst.n, inst.m + 1)
        sched = compile_hhl_schedule(inst, graph, cnot_mode)
        reg0 = np.zeros((inst.n, 2 ** (inst.m + 1)), dtype=complex)
        reg0[:, 0] = inst.b
        full = simulator.evolve_two_level(simulator.register_to_full(reg0, graph), sched, counter_rotating)
        reg = simulator.full_to_register(full, graph)
        leakage = float(1 - np.vdot(reg, reg).real)
        return _analyze(inst, reg, total_duration(sched), leakage)
    raise InvalidInput(f"unknown level {level!r}")


def _k_bins(lam, m: int, t0: float) -> np.ndarray:
    return np.round(2**m * lam * t0 / (2 * np.pi)).astype(int) % 2**m


def random_instance(n: int, m: int, rng, t0: float = 2 * np.pi, reject_m: int | None = None) -> HHLInstance:
    """Haar eigenvectors, eigenvalues uniform on (0, 1), b Haar on the complex sphere.

    Eigenvalue sets with any eigenvalue in the k = 0 phase bin of a
    ``reject_m``-qubit register (default ``m``) are redrawn.
    """
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    rm = m if reject_m is None else reject_m
    while True:
        Q = numerics.haar_orthogonal(n, rng)
        lam = rng.uniform(0.0, 1.0, size=n)
        if np.all(lam > 0) and np.all(_k_bins(lam, rm, t0) != 0):
            break
    A = (Q * lam) @ Q.T
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return HHLInstance(0.5 * (A + A.T), z / np.linalg.norm(z), m, t0)


def exact_phase_instance(n: int, m: int, ks, rng, t0: float = 2 * np.pi) -> HHLInstance:
    """Instance whose eigenvalues are k / 2^m exactly (k >= 1)."""
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    ks = np.asarray(ks)
    if len(ks) != n or np.any(ks < 1) or np.any(ks >= 2**m):
        raise InvalidInput("need n integers 1 <= k < 2^m")
    Q = numerics.haar_orthogonal(n, rng)
    A = (Q * (ks / 2**m)) @ Q.T
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return HHLInstance(0.5 * (A + A.T), z / np.linalg.norm(z), m, t0)


def trial_rng(seed: int, n: int, trial: int) -> np.random.Generator:
    """Per-trial stream: SeedSequence entropy (seed, n, trial); independent of m."""
    return np.random.default_rng([seed, n, trial])


@dataclass(frozen=True)
class TrialRow:
    n: int
    m: int
    trial: int
    e_algorithm: float
    p_postselect: float
    schedule_time_s: float | None

    COLUMNS = ("n", "m", "trial", "e_algorithm", "p_postselect", "schedule_time_s")


@dataclass(frozen=True)
class SweepRow:
    n: int
    m: int
    trials: int
    mean_e_algorithm: float
    stderr: float
    mean_p_postselect: float

    COLUMNS = ("n", "m", "trials", "mean_e_algorithm", "stderr", "mean_p_postselect")


def _one_trial(args) -> TrialRow:
    n, m, trial, seed, level, reject_m, cnot_mode = args
    inst = random_instance(n, m, trial_rng(seed, n, trial), reject_m=reject_m)
    if level == "device_timing":
        sched = compile_hhl_schedule(inst, cnot_mode=cnot_mode)
        res = run_hhl(inst)
        return TrialRow(n, m, trial, res.e_algorithm, res.p_postselect, total_duration(sched))
    res = run_hhl(inst, level, cnot_mode=cnot_mode)
    return TrialRow(n, m, trial, res.e_algorithm, res.p_postselect, res.schedule_time)


def worker_count() -> int:
    cap = os.environ.get("SES_FORGE_THREADS")
    n = os.cpu_count() or 1
    return max(1, min(n, int(cap))) if cap else n


def _map(fn, items):
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def hhl_trials(
    n_values,
    m: int,
    trials: int,
    seed: int,
    level: str = "abstract",
    reject_m: int | None = None,
    cnot_mode: str = "ideal",
) -> list[TrialRow]:
    """Per-trial results, ordered by (n, trial); identical for any worker count."""
    if trials < 1:
        raise InvalidInput("trials must be >= 1")
    jobs = [(int(n), m, t, seed, level, reject_m, cnot_mode) for n in n_values for t in range(trials)]
    return _map(_one_trial, jobs)


def summarize(rows: list[TrialRow]) -> list[SweepRow]:
    out = []
    for n in sorted({r.n for r in rows}):
        sub = [r for r in rows if r.n == n]
        e = np.array([r.e_algorithm for r in sub])
        p = np.array([r.p_postselect for r in sub])
        se = float(e.std(ddof=1) / np.sqrt(len(e))) if len(e) > 1 else 0.0
        out.append(SweepRow(n, sub[0].m, len(sub), float(e.mean()), se, float(p.mean())))
    return out


def sweep_fig7(n_range, m: int, trials: int, seed: int, level: str = "abstract", reject_m: int | None = None) -> list[SweepRow]:
    """Mean algorithm error versus matrix size over random instances."""
    return summarize(hhl_trials(n_range, m, trials, seed, level, reject_m))
