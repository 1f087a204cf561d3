"""Schedule execution at register, two-level and three-level fidelity, plus
the error metrics used by the benchmarks."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg

from . import compiler, numerics
from .device import TWO_PI, DeviceGraph, Schedule, Segment, build_hamiltonian
from .errors import ImpossibleOutcome, IntegrationFailure, InvalidInput, InvalidSegment
from .gates import apply_gate

DENSE_LIMIT = 4096
NORM_TOL = 1e-8


def _bits(dim_qubits: int) -> np.ndarray:
    idx = np.arange(2**dim_qubits)
    return (idx[:, None] >> np.arange(dim_qubits)) & 1


def _expi_herm(H: np.ndarray, t: float) -> np.ndarray:
    """exp(-2*pi*i*H*t) for Hermitian H in Hz."""
    w, v = np.linalg.eigh(H)
    return (v * np.exp(-1j * TWO_PI * w * t)) @ v.conj().T


def _local_op(op: np.ndarray, q: int, n: int, d: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for k in reversed(range(n)):
        out = np.kron(out, op if k == q else np.eye(d))
    return out


def driven_propagator(H0, drive_ops, drives, duration: float, steps_per_period: int) -> np.ndarray:
    """Propagator of H0 + sum_k Omega_k cos(2 pi f_k t) X_k over [0, duration].

    Midpoint-exponential stepping. When every drive shares one carrier and
    the duration is a whole number of its periods, one period is
    integrated and raised to that power.
    """
    freqs = {dr.frequency for dr in drives}
    f = max(freqs)
    cycles = duration * f
    periodic = len(freqs) == 1 and abs(cycles - round(cycles)) < 1e-6 and round(cycles) >= 1
    span = 1 / f if periodic else duration
    n_steps = steps_per_period if periodic else max(1, math.ceil(cycles * steps_per_period))
    dt = span / n_steps
    U = np.eye(H0.shape[0], dtype=complex)
    for s in range(n_steps):
        tm = (s + 0.5) * dt
        H = H0 + sum(dr.amplitude * np.cos(TWO_PI * dr.frequency * tm) * X for dr, X in zip(drives, drive_ops))
        U = _expi_herm(H, dt) @ U
    if periodic:
        U = np.linalg.matrix_power(U, int(round(cycles)))
    return U


def _z_vector(seg: Segment, n: int) -> np.ndarray:
    return np.exp(1j * (_bits(n) @ np.asarray(seg.z_phases)))


def _coherent_step(psi, seg, graph, counter_rotating, steps_per_period):
    n = graph.n_total
    if seg.drives:
        H0 = build_hamiltonian(
            Segment("coherent", seg.duration, seg.epsilons, seg.couplings), graph, counter_rotating
        )
        X = np.array([[0, 1], [1, 0]], dtype=complex)
        ops = [_local_op(X, dr.qubit, n, 2) for dr in seg.drives]
        return driven_propagator(H0, ops, seg.drives, seg.duration, steps_per_period) @ psi
    if graph.dim <= DENSE_LIMIT:
        return _expi_herm(build_hamiltonian(seg, graph, counter_rotating), seg.duration) @ psi
    H = build_hamiltonian(seg, graph, counter_rotating, sparse=True)
    if not counter_rotating:
        # excitation number commutes with H here, so the parking energy
        # factors out exactly and the Krylov problem stays non-stiff
        nexc = _bits(n).sum(axis=1)
        psi = np.exp(-1j * TWO_PI * graph.eps0 * nexc * seg.duration) * psi
        H = H - scipy.sparse.diags(graph.eps0 * nexc.astype(complex))
    return scipy.sparse.linalg.expm_multiply(-1j * TWO_PI * seg.duration * H, psi)


def evolve_two_level(
    state,
    schedule: Schedule,
    counter_rotating: bool = True,
    steps_per_period: int = 128,
) -> np.ndarray:
    """Run a schedule on the full 2^N qubit register.

    Coherent segments are exponentiated exactly (dense below 4096 states,
    Krylov above). Driven segments are integrated. With
    ``counter_rotating=False`` the X X couplings keep only their
    excitation-conserving part.
    """
    graph = schedule.graph
    n = graph.n_total
    psi = np.array(state, dtype=complex).reshape(-1)
    if psi.shape[0] != graph.dim:
        raise InvalidSegment(f"state has length {psi.shape[0]}, schedule needs {graph.dim}")
    norm0 = np.linalg.norm(psi)
    for k, seg in enumerate(schedule.segments):
        if seg.kind == "coherent":
            if seg.duration == 0:
                continue
            psi = _coherent_step(psi, seg, graph, counter_rotating, steps_per_period)
        elif seg.kind == "ideal_gate":
            psi = apply_gate(psi, seg.gate, n)
        else:
            psi = _z_vector(seg, n) * psi
        drift = abs(np.linalg.norm(psi) - norm0)
        if drift > NORM_TOL:
            raise IntegrationFailure(f"norm drift {drift:.2e} after segment {k} ({seg.label})")
    return psi


# ---------------------------------------------------------------- qutrit model


@dataclass(frozen=True)
class QutritModel:
    """Duffing-truncated transmon: levels (0, eps, 2 eps - eta), X with <1|X|2> = sqrt(2)."""

    eps0: float
    eta: float
    levels: int = 3

    def __post_init__(self):
        if self.eta <= 0 or self.levels not in (2, 3):
            raise InvalidInput("need eta > 0 and 2 or 3 levels")

    def x_op(self) -> np.ndarray:
        d = self.levels
        X = np.zeros((d, d))
        for k in range(d - 1):
            X[k, k + 1] = X[k + 1, k] = np.sqrt(k + 1)
        return X

    def energies(self, eps: float) -> np.ndarray:
        return np.array([0.0, eps, 2 * eps - self.eta])[: self.levels]


def computational_indices(n: int, d: int) -> np.ndarray:
    """Positions of the 2^n qubit basis states inside a d^n register, in binary order."""
    b = _bits(n)
    return b @ (d ** np.arange(n))


def _embed_qubit_op(U2: np.ndarray, n: int, d: int) -> np.ndarray:
    if d == 2:
        return U2
    comp = computational_indices(n, d)
    out = np.eye(d**n, dtype=complex)
    out[np.ix_(comp, comp)] = U2
    return out


@dataclass(frozen=True)
class QutritRun:
    propagator: np.ndarray
    steps_per_period: int
    e_gate: float | None = None


def _qutrit_segment(seg: Segment, model: QutritModel, n: int, steps: int) -> np.ndarray:
    d = model.levels
    X = model.x_op()
    H0 = np.zeros((d**n, d**n), dtype=complex)
    for q in range(n):
        H0 += _local_op(np.diag(model.energies(seg.epsilons[q])), q, n, d)
    Xs = [_local_op(X, q, n, d) for q in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if seg.couplings[i, j]:
                H0 += seg.couplings[i, j] * Xs[i] @ Xs[j]
    if not seg.drives:
        return _expi_herm(H0, seg.duration)
    return driven_propagator(H0, [Xs[dr.qubit] for dr in seg.drives], seg.drives, seg.duration, steps)


def _qutrit_schedule(schedule: Schedule, model: QutritModel, steps: int) -> np.ndarray:
    n = schedule.graph.n_total
    d = model.levels
    U = np.eye(d**n, dtype=complex)
    for seg in schedule.segments:
        if seg.kind == "coherent":
            U = _qutrit_segment(seg, model, n, steps) @ U
        elif seg.kind == "ideal_gate":
            G = apply_gate(np.eye(2**n, dtype=complex), seg.gate, n).T
            U = _embed_qubit_op(G, n, d) @ U
        else:
            U = _embed_qubit_op(np.diag(_z_vector(seg, n)), n, d) @ U
    return U


def evolve_qutrit(
    schedule: Schedule,
    model: QutritModel,
    ideal: np.ndarray | None = None,
    tol: float = 1e-4,
    steps_per_period: int = 16,
    max_halvings: int = 12,
) -> QutritRun:
    """Lab-frame propagator of a (driven) schedule in the d-level model.

    The step is halved until the gate error against ``ideal`` (or, without
    an ideal, the propagator's max-norm) changes by less than ``tol``.
    """
    n = schedule.graph.n_total
    comp = computational_indices(n, model.levels)
    metric = (lambda U: gate_error(U[np.ix_(comp, comp)], ideal).e_gate) if ideal is not None else None
    steps = steps_per_period
    U = _qutrit_schedule(schedule, model, steps)
    prev = metric(U) if metric else None
    for _ in range(max_halvings):
        steps *= 2
        U_new = _qutrit_schedule(schedule, model, steps)
        if metric:
            cur = metric(U_new)
            change = abs(cur - prev)
            prev = cur
        else:
            change = float(np.max(np.abs(U_new - U)))
        U = U_new
        if change < tol:
            return QutritRun(U, steps, prev)
    raise IntegrationFailure(f"no convergence after {max_halvings} halvings (last change {change:.2e})")


# ---------------------------------------------------------------- gate error


@dataclass(frozen=True)
class GateErrorReport:
    e_gate: float
    samples: int = 0
    stderr: float = 0.0
    leakage: float = 0.0
    n: int | None = None
    eta: float | None = None
    t_gate: float | None = None
    omega: float | None = None
    g: float | None = None
    steps_per_period: int | None = None
    step_size: float | None = None  # integrator step, seconds

    def row(self) -> dict:
        return {
            "n": self.n,
            "eta_mhz": self.eta / 1e6,
            "tgate_ns": self.t_gate * 1e9,
            "omega_mhz": self.omega / 1e6,
            "g_mhz": self.g / 1e6,
            "e_gate": self.e_gate,
        }


def gate_error(U, U_ideal, mode: str = "subspace_average", samples: int = 100_000, seed=0) -> GateErrorReport:
    """State-averaged 1 - |<psi| U_ideal^dag U |psi>|^2 over the ideal's subspace.

    ``U`` may be the computational block of a larger propagator; norm lost
    from that block (leakage) counts as error.
    """
    U = np.asarray(U, dtype=complex)
    U_ideal = np.asarray(U_ideal, dtype=complex)
    d = U_ideal.shape[0]
    M = U_ideal.conj().T @ U
    leakage = float(1 - np.trace(M.conj().T @ M).real / d)
    if mode == "subspace_average":
        F = (np.trace(M @ M.conj().T).real + abs(np.trace(M)) ** 2) / (d * (d + 1))
        return GateErrorReport(e_gate=float(1 - F), leakage=leakage)
    if mode == "monte_carlo":
        rng = np.random.default_rng(seed)
        total = total_sq = 0.0
        chunk = 20_000
        done = 0
        while done < samples:
            k = min(chunk, samples - done)
            psi = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
            psi /= np.linalg.norm(psi, axis=0)
            err = 1 - np.abs(np.einsum("ik,ij,jk->k", psi.conj(), M, psi)) ** 2
            total += err.sum()
            total_sq += (err**2).sum()
            done += k
        mean = total / samples
        var = max(total_sq / samples - mean**2, 0.0)
        return GateErrorReport(e_gate=float(mean), samples=samples, stderr=float(np.sqrt(var / samples)), leakage=leakage)
    raise InvalidInput(f"unknown gate_error mode {mode!r}")


def ideal_entangler(n_targets: int) -> np.ndarray:
    """exp(-i pi/4 S_x X_a) on n targets (qubits 0..n-1) and ancilla qubit n."""
    N = n_targets + 1
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Xa = _local_op(X, n_targets, N, 2)
    U = np.eye(2**N, dtype=complex)
    for i in range(n_targets):
        XX = _local_op(X, i, N, 2) @ Xa
        U = (np.eye(2**N) - 1j * XX) / np.sqrt(2) @ U
    return U


# published gate-error benchmarks: (n, eta Hz, t_gate s, E_gate)
REFERENCE_CNOT_ROWS = (
    (3, 300e6, 30e-9, 0.017),
    (3, 300e6, 40e-9, 0.011),
    (3, 400e6, 30e-9, 0.011),
    (3, 400e6, 40e-9, 0.009),
    (4, 300e6, 30e-9, 0.028),
    (4, 300e6, 40e-9, 0.021),
    (4, 400e6, 30e-9, 0.022),
    (4, 400e6, 40e-9, 0.019),
)


def table_orderings(rows) -> list[tuple[str, bool]]:
    """Pairwise checks on gate-error rows (dicts keyed like GateErrorReport.row()).

    Error should fall with eta and with t_gate and grow with n; each pair of
    rows differing in exactly one of those parameters gives one check.
    """
    key = lambda r: (r["n"], round(r["eta_mhz"], 6), round(r["tgate_ns"], 6))
    table = {key(r): r["e_gate"] for r in rows}
    out = []
    for (n, eta, t), e in sorted(table.items()):
        for (n2, eta2, t2), e2 in sorted(table.items()):
            diff = [n2 > n, eta2 > eta, t2 > t]
            same = [n2 == n, eta2 == eta, t2 == t]
            if sum(diff) != 1 or sum(same) != 2:
                continue
            if diff[0]:
                out.append((f"n {n}->{n2} at eta={eta:g} MHz t={t:g} ns: error grows", e2 > e))
            elif diff[1]:
                out.append((f"eta {eta:g}->{eta2:g} MHz at n={n} t={t:g} ns: error falls", e2 < e))
            else:
                out.append((f"t_gate {t:g}->{t2:g} ns at n={n} eta={eta:g} MHz: error falls", e2 < e))
    return out


def cnot_gate_error(params: compiler.EntanglerParams, levels: int = 3, tol: float = 1e-4) -> GateErrorReport:
    """Entangler error of the driven multi-target segment in the d-level model."""
    n = params.n_targets
    graph = DeviceGraph.with_ancillas(n, 1, eps0=params.eps0, g_max=max(params.g, 50e6))
    sched = compiler.entangler_schedule(graph, params)
    model = QutritModel(params.eps0, params.eta, levels)
    ideal = ideal_entangler(n)
    run = evolve_qutrit(sched, model, ideal=ideal, tol=tol)
    comp = computational_indices(n + 1, levels)
    rep = gate_error(run.propagator[np.ix_(comp, comp)], ideal)
    return GateErrorReport(
        e_gate=rep.e_gate,
        leakage=rep.leakage,
        n=n,
        eta=params.eta,
        t_gate=params.t_gate,
        omega=params.omega,
        g=params.g,
        steps_per_period=run.steps_per_period,
        step_size=1.0 / (params.eps0 * run.steps_per_period),
    )


# ---------------------------------------------------------------- protocol check


def register_to_full(reg: np.ndarray, graph: DeviceGraph) -> np.ndarray:
    """Embed a (n_data, 2**n_ancilla) SES register state into the full 2^N state."""
    reg = np.asarray(reg)
    full = np.zeros(graph.dim, dtype=complex)
    for i in range(graph.n_data):
        for a in range(reg.shape[1]):
            full[graph.ses_index(i, a)] = reg[i, a]
    return full


def full_to_register(full: np.ndarray, graph: DeviceGraph) -> np.ndarray:
    n_anc = len(graph.ancilla_ids)
    reg = np.zeros((graph.n_data, 2**n_anc), dtype=complex)
    for i in range(graph.n_data):
        for a in range(2**n_anc):
            reg[i, a] = full[graph.ses_index(i, a)]
    return reg


def controlled_unitary_register(spec: compiler.ControlledUnitarySpec, reg: np.ndarray) -> np.ndarray:
    """Apply the protocol's operator algebra to a (n, 2) data-ancilla register."""
    A, B = spec.aba.A, spec.aba.B
    Vdag = numerics.expi_sym(A, -1) @ numerics.expi_sym(B, +1) @ numerics.expi_sym(A, +1)
    V = numerics.expi_sym(A, -1) @ numerics.expi_sym(B, -1) @ numerics.expi_sym(A, +1)
    half = np.exp(-0.5j * spec.D)
    out = Vdag @ reg
    out = out * np.stack([half, half.conj()], axis=1)
    out = half[:, None] * out
    return V @ out


def run_protocol_check(
    U,
    psi,
    alpha: complex,
    beta: complex,
    graph: DeviceGraph | None = None,
    level: str = "abstract",
    counter_rotating: bool = True,
    cnot_mode: str = "ideal",
) -> float:
    """Fidelity of the controlled-unitary protocol against alpha U|psi>|0> + beta |psi>|1>."""
    U = numerics.check_unitary(U)
    psi = np.asarray(psi, dtype=complex)
    n = U.shape[0]
    if abs(np.linalg.norm(psi) - 1) > 1e-10 or abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1) > 1e-10:
        raise InvalidInput("psi and (alpha, beta) must be normalized")
    graph = graph or DeviceGraph.with_ancillas(n, 1)
    anc = graph.ancilla_ids[0]
    spec = compiler.ControlledUnitarySpec.build(U, anc)
    reg0 = np.stack([alpha * psi, beta * psi], axis=1)
    target = np.stack([alpha * (U @ psi), beta * psi], axis=1)
    if level == "abstract":
        final = controlled_unitary_register(spec, reg0)
        return float(abs(np.vdot(target.reshape(-1), final.reshape(-1))) ** 2)
    if level == "two_level":
        if len(graph.ancilla_ids) != 1:
            raise InvalidInput("protocol check uses a single-ancilla graph")
        sched = compiler.schedule_controlled_unitary(spec, graph, cnot_mode)
        final = evolve_two_level(register_to_full(reg0, graph), sched, counter_rotating)
        return float(abs(np.vdot(register_to_full(target, graph), final)) ** 2)
    raise InvalidInput(f"unknown level {level!r}")


# ---------------------------------------------------------------- measurement


def _dims(state_len: int, dims) -> list[int]:
    if dims is None:
        n = int(round(math.log2(state_len)))
        if 2**n != state_len:
            raise InvalidInput("state length is not a power of two; pass dims")
        return [2] * n
    dims = [int(x) for x in dims]
    if int(np.prod(dims)) != state_len:
        raise InvalidInput("dims do not match the state length")
    return dims


def postselect(state, subsystem: int, outcome: int, dims=None) -> tuple[np.ndarray, float]:
    """Project ``subsystem`` onto ``outcome``; returns (renormalized state, probability).

    Subsystem 0 is the least significant digit of the basis index.
    """
    psi = np.asarray(state, dtype=complex)
    dims = _dims(psi.shape[0], dims)
    stride = int(np.prod(dims[:subsystem]))
    digit = (np.arange(psi.shape[0]) // stride) % dims[subsystem]
    out = np.where(digit == outcome, psi, 0)
    p = float(np.vdot(out, out).real)
    if p <= 1e-300:
        raise ImpossibleOutcome(f"outcome {outcome} on subsystem {subsystem} has zero probability")
    return out / np.sqrt(p), p


def partial_trace(state, keep, dims=None) -> np.ndarray:
    """Reduced density matrix of the ``keep`` subsystems (little-endian order)."""
    psi = np.asarray(state, dtype=complex)
    dims = _dims(psi.shape[0], dims)
    S = len(dims)
    keep = sorted(set(int(k) for k in keep))
    t = psi.reshape(dims[::-1])
    kept_axes = [S - 1 - s for s in reversed(keep)]
    traced = [ax for ax in range(S) if ax not in kept_axes]
    t = np.transpose(t, kept_axes + traced)
    dk = int(np.prod([dims[s] for s in keep]))
    m = t.reshape(dk, -1)
    return m @ m.conj().T
