"""Schedule compilation: standard-form programs, the controlled-unitary
protocol and the multi-target CNOT."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .device import TWO_PI, DeviceGraph, Drive, FramePhase, Schedule, Segment, phase_of
from .errors import InvalidParams
from .gates import Gate


@dataclass(frozen=True)
class StandardFormResult:
    """A = theta*K + c*I with |K_ij| <= 1; ``t`` is the evolution time in seconds."""

    K: np.ndarray
    c: float
    theta: float
    t: float

    @property
    def is_empty(self) -> bool:
        return self.theta == 0.0


def standard_form(A, g_max: float) -> StandardFormResult:
    A = numerics.check_real_symmetric(A)
    d = np.diag(A)
    c = float((d.min() + d.max()) / 2)
    shifted = A - c * np.eye(len(A))
    theta = float(np.max(np.abs(shifted)))
    if theta == 0.0:
        return StandardFormResult(np.zeros_like(A), c, 0.0, 0.0)
    return StandardFormResult(shifted / theta, c, theta, theta / (TWO_PI * g_max))


def _program(G, graph: DeviceGraph, label: str) -> Schedule:
    """One coherent segment whose SES block implements exp(-iG) up to a phase."""
    sf = standard_form(G, graph.g_max)
    if sf.is_empty and sf.c == 0.0:
        return Schedule(graph)
    # G = c I still matters under control: a zero-time segment carries the shift
    data = list(graph.data_ids)
    eps = np.full(graph.n_total, graph.eps0)
    eps[data] = graph.eps0 + graph.g_max * np.diag(sf.K)
    g = np.zeros((graph.n_total, graph.n_total))
    g[np.ix_(data, data)] = graph.g_max * sf.K
    np.fill_diagonal(g, 0.0)
    seg = Segment("coherent", sf.t, eps, g, label=label)
    entry = FramePhase(
        segment=0,
        duration=sf.t,
        eps0_phase=float(phase_of(graph.eps0, sf.t)),
        filled_band_phase=float(phase_of(np.sum(eps[data]), sf.t)),
        shift=sf.c,
    )
    return Schedule(graph, (seg,), (entry,))


def schedule_sym_unitary(A, sign: int, graph: DeviceGraph, label: str = "") -> Schedule:
    """Program exp(sign * i * A) on the data register (ancilla couplings off)."""
    A = numerics.check_real_symmetric(A)
    if A.shape[0] != graph.n_data:
        raise InvalidParams(f"generator is {A.shape[0]}x{A.shape[0]}, data register has {graph.n_data} qubits")
    return _program(-sign * A, graph, label or f"exp({'+' if sign > 0 else '-'}iA)")


def schedule_diagonal_half(D, graph: DeviceGraph) -> Schedule:
    """Uncoupled step giving exp(-iD/2) on SES states and exp(+iD/2) on dual states."""
    D = np.asarray(D, dtype=float).reshape(-1)
    if D.shape[0] != graph.n_data:
        raise InvalidParams("diagonal length does not match the data register")
    return _program(np.diag(D / 2), graph, "diag-half")


def frame_correction(entry: FramePhase, graph: DeviceGraph, control: int | None = None, dual: bool = False) -> np.ndarray:
    """Per-qubit z phases removing the ledger phases of one coherent segment.

    Data qubits get the SES-sector phase. The control ancilla gets either
    its own eps0 phase or, when its |1> branch holds the data in the dual
    sector, whatever makes that branch's filled-band phase come out right.
    """
    n = graph.n_data
    ses = entry.eps0_phase - entry.shift
    z = np.full(graph.n_total, entry.eps0_phase)
    z[list(graph.data_ids)] = ses
    if control is not None and dual:
        z[control] = entry.filled_band_phase + entry.shift - (n - 1) * ses
    return numerics.principal_angle(z)


def with_frame_correction(stage: Schedule, control: int | None, dual: bool = False) -> Schedule:
    if not stage.ledger:
        return stage
    z = np.zeros(stage.graph.n_total)
    for entry in stage.ledger:
        z = z + frame_correction(entry, stage.graph, control, dual)
    fix = Segment("z_correction", z_phases=numerics.principal_angle(z), label="frame")
    return stage + Schedule(stage.graph, (fix,))


@dataclass(frozen=True)
class EntanglerParams:
    n_targets: int
    eps0: float
    t_gate: float
    l_a: int
    l_b: int
    omega: float
    g: float
    eta: float = 300e6

    @classmethod
    def from_timing(cls, n_targets: int, t_gate: float, eps0: float = 5.5e9, l_b: int = 2, eta: float = 300e6):
        """Quantized parameters for a requested gate time.

        t_gate must be an integer number of carrier periods; the Rabi
        frequency is l_b * 2 / t_gate and the coupling 1 / (4 t_gate) (Hz).
        """
        cycles = t_gate * eps0
        l_a = int(round(cycles))
        if l_a < 1 or abs(cycles - l_a) > 1e-6:
            raise InvalidParams(f"t_gate * eps0 = {cycles:.6f} is not an integer")
        if int(l_b) != l_b or l_b < 1:
            raise InvalidParams("l_b must be a positive integer")
        t_gate = l_a / eps0
        return cls(n_targets, eps0, t_gate, l_a, int(l_b), 2 * l_b / t_gate, 1 / (4 * t_gate), eta)

    def __post_init__(self):
        if self.n_targets < 1 or self.eps0 <= 0 or self.t_gate <= 0 or self.eta <= 0:
            raise InvalidParams("entangler parameters must be positive")
        rel = lambda a, b: abs(a - b) <= 1e-9 * abs(b)
        if not rel(self.t_gate, self.l_a / self.eps0):
            raise InvalidParams("t_gate must equal l_a carrier periods")
        if not rel(self.omega, 2 * self.l_b / self.t_gate):
            raise InvalidParams("Omega must equal l_b * 2 / t_gate")
        if not rel(self.g, 1 / (4 * self.t_gate)):
            raise InvalidParams("g must equal 1 / (4 t_gate)")


def _cnot_roles(graph: DeviceGraph, control, targets):
    control = graph.ancilla_ids[0] if control is None else control
    targets = graph.data_ids if targets is None else tuple(targets)
    return control, tuple(targets)


def entangler_schedule(graph: DeviceGraph, params: EntanglerParams, control=None, targets=None) -> Schedule:
    """The driven segment realizing exp(-i pi/4 S_x X_control)."""
    control, targets = _cnot_roles(graph, control, targets)
    if params.n_targets != len(targets):
        raise InvalidParams(f"params are for {params.n_targets} targets, got {len(targets)}")
    if abs(params.eps0 - graph.eps0) > 1e-9 * graph.eps0:
        raise InvalidParams("entangler carrier must match the parking frequency")
    eps = np.full(graph.n_total, graph.eps0)
    g = np.zeros((graph.n_total, graph.n_total))
    g[list(targets), control] = params.g
    g[control, list(targets)] = params.g
    seg = Segment(
        "coherent",
        params.t_gate,
        eps,
        g,
        (Drive(control, params.omega, params.eps0),),
        label="entangler",
    )
    phi0 = float(phase_of(graph.eps0, params.t_gate))
    entry = FramePhase(0, params.t_gate, phi0, float(phase_of(graph.eps0 * len(targets), params.t_gate)), 0.0)
    return Schedule(graph, (seg,), (entry,))


def schedule_multitarget_cnot(graph: DeviceGraph, params: EntanglerParams, control=None, targets=None) -> Schedule:
    control, targets = _cnot_roles(graph, control, targets)
    gate = lambda name, qs, *p: Segment("ideal_gate", gate=Gate(name, qs, p), label=name)
    # the |1> branch picks up i^n from the target corrections; phase(-n pi/2)
    # is diag(1, -i) for a single target
    return (
        Schedule(graph, (gate("h", (control,)),))
        + with_frame_correction(entangler_schedule(graph, params, control, targets), None)
        + Schedule(
            graph,
            (
                gate("h", (control,)),
                gate("xquarter", targets),
                gate("phase", (control,), -len(targets) * np.pi / 2),
            ),
        )
    )


def ideal_multitarget_cnot(graph: DeviceGraph, control=None, targets=None) -> Schedule:
    control, targets = _cnot_roles(graph, control, targets)
    return Schedule(graph, (Segment("ideal_gate", gate=Gate("mcx", (control,) + targets), label="mcx"),))


@dataclass(frozen=True)
class ControlledUnitarySpec:
    """U on the data register, controlled by ``ancilla``, with cached decompositions.

    U = V exp(-i diag(D)) V^dag and V = exp(-iA) exp(-iB) exp(iA).
    """

    U: np.ndarray
    ancilla: int
    V: np.ndarray
    D: np.ndarray
    aba: numerics.ABADecomposition

    @classmethod
    def build(cls, U, ancilla: int, spectral=None) -> "ControlledUnitarySpec":
        U = numerics.check_unitary(U)
        if spectral is None:
            V, D = numerics.spectral_unitary(U)
        else:
            V, D = (np.asarray(x) for x in spectral)
            D = numerics.principal_angle(D)
            if np.max(np.abs((V * np.exp(-1j * D)) @ V.conj().T - U)) > 1e-9:
                raise numerics.NumericalFailure("supplied spectral form does not reproduce U")
        return cls(U, ancilla, V, D, numerics.aba_decompose(V))


def schedule_controlled_unitary(
    spec: ControlledUnitarySpec,
    graph: DeviceGraph,
    cnot_mode: str = "ideal",
    params: EntanglerParams | None = None,
    controlled_on: int = 0,
) -> Schedule:
    """U on the data when the ancilla is |controlled_on>, identity otherwise.

    Order: V^dag as exp(iA) exp(iB) exp(-iA); CNOT; diagonal half step;
    CNOT; diagonal half step; V as exp(iA) exp(-iB) exp(-iA). Each coherent
    stage is followed by its frame correction.
    """
    anc = spec.ancilla
    if anc not in graph.ancilla_ids:
        raise InvalidParams(f"qubit {anc} is not an ancilla of the graph")
    if spec.U.shape[0] != graph.n_data:
        raise InvalidParams("unitary dimension does not match the data register")
    if cnot_mode == "ideal":
        cnot = ideal_multitarget_cnot(graph, anc)
    elif cnot_mode == "pulsed":
        if params is None:
            params = EntanglerParams.from_timing(graph.n_data, 30e-9, graph.eps0)
        cnot = schedule_multitarget_cnot(graph, params, anc)
    else:
        raise InvalidParams(f"unknown cnot_mode {cnot_mode!r}")
    A, B = spec.aba.A, spec.aba.B
    sym = lambda G, s, lab: with_frame_correction(schedule_sym_unitary(G, s, graph, lab), anc)
    out = Schedule(graph)
    if controlled_on == 1:
        out = out + Schedule(graph, (Segment("ideal_gate", gate=Gate("x", (anc,)), label="x"),))
    elif controlled_on != 0:
        raise InvalidParams("controlled_on must be 0 or 1")
    out = (
        out
        + sym(A, +1, "Vdag:exp(+iA)")
        + sym(B, +1, "Vdag:exp(+iB)")
        + sym(A, -1, "Vdag:exp(-iA)")
        + cnot
        + with_frame_correction(schedule_diagonal_half(spec.D, graph), anc, dual=True)
        + cnot
        + with_frame_correction(schedule_diagonal_half(spec.D, graph), anc, dual=False)
        + sym(A, +1, "V:exp(+iA)")
        + sym(B, -1, "V:exp(-iB)")
        + sym(A, -1, "V:exp(-iA)")
    )
    if controlled_on == 1:
        out = out + Schedule(graph, (Segment("ideal_gate", gate=Gate("x", (anc,)), label="x"),))
    return out


def controlled_pair(U0, U1, graph: DeviceGraph, ancilla: int | None = None, cnot_mode: str = "ideal") -> Schedule:
    """U0 on the data when the ancilla is |0>, U1 when it is |1>."""
    anc = graph.ancilla_ids[0] if ancilla is None else ancilla
    s0 = schedule_controlled_unitary(ControlledUnitarySpec.build(U0, anc), graph, cnot_mode, controlled_on=0)
    s1 = schedule_controlled_unitary(ControlledUnitarySpec.build(U1, anc), graph, cnot_mode, controlled_on=1)
    return s0 + s1
