"""Complete-graph device model and schedule data types.

Energies are stored as frequencies (E/h, in Hz) and durations in
seconds, so an energy E held for time t contributes the phase 2*pi*E*t.
Qubit ``q`` is bit ``q`` of the full basis index.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from .errors import InvalidInput, InvalidSegment
from .gates import Gate

TWO_PI = 2 * np.pi
BIT_ORDERING = "little-endian-qubit1-lsb"
EPS0_HZ = 5.5e9
GMAX_HZ = 50e6


def phase_of(energy_hz, duration_s):
    """Dynamical phase 2*pi*E*t for an energy given in Hz."""
    return TWO_PI * np.asarray(energy_hz) * duration_s


@dataclass(frozen=True)
class DeviceGraph:
    n_total: int
    data_ids: tuple[int, ...]
    ancilla_ids: tuple[int, ...]
    eps0: float = EPS0_HZ
    g_max: float = GMAX_HZ

    def __post_init__(self):
        object.__setattr__(self, "data_ids", tuple(int(q) for q in self.data_ids))
        object.__setattr__(self, "ancilla_ids", tuple(int(q) for q in self.ancilla_ids))
        ids = set(self.data_ids) | set(self.ancilla_ids)
        if set(self.data_ids) & set(self.ancilla_ids):
            raise InvalidInput("data and ancilla partitions overlap")
        if len(self.data_ids) + len(self.ancilla_ids) != self.n_total or ids != set(range(self.n_total)):
            raise InvalidInput("partitions must cover qubits 0..n_total-1 exactly once")
        if not self.data_ids:
            raise InvalidInput("data partition is empty")
        if self.g_max <= 0 or self.eps0 <= 0:
            raise InvalidInput("eps0 and g_max must be positive")

    @classmethod
    def with_ancillas(cls, n_data: int, n_ancilla: int = 1, eps0: float = EPS0_HZ, g_max: float = GMAX_HZ):
        """Data on qubits 0..n_data-1, ancillas after them."""
        return cls(
            n_total=n_data + n_ancilla,
            data_ids=tuple(range(n_data)),
            ancilla_ids=tuple(range(n_data, n_data + n_ancilla)),
            eps0=eps0,
            g_max=g_max,
        )

    @property
    def n_data(self) -> int:
        return len(self.data_ids)

    @property
    def dim(self) -> int:
        return 2**self.n_total

    def ses_index(self, i: int, ancilla_bits: int = 0) -> int:
        """Full-register index of SES state |i) with the given ancilla bitmask."""
        return (1 << self.data_ids[i]) | self._ancilla_mask(ancilla_bits)

    def dual_index(self, i: int, ancilla_bits: int = 0) -> int:
        data_mask = sum(1 << q for q in self.data_ids)
        return (data_mask ^ (1 << self.data_ids[i])) | self._ancilla_mask(ancilla_bits)

    def _ancilla_mask(self, ancilla_bits: int) -> int:
        return sum(1 << a for k, a in enumerate(self.ancilla_ids) if (ancilla_bits >> k) & 1)

    def to_dict(self) -> dict:
        return {
            "n_total": self.n_total,
            "data_ids": list(self.data_ids),
            "ancilla_ids": list(self.ancilla_ids),
            "eps0_hz": self.eps0,
            "g_max_hz": self.g_max,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DeviceGraph":
        return cls(d["n_total"], tuple(d["data_ids"]), tuple(d["ancilla_ids"]), d["eps0_hz"], d["g_max_hz"])


@dataclass(frozen=True)
class Drive:
    qubit: int
    amplitude: float  # Hz, multiplies cos(2*pi*frequency*t) sigma_x
    frequency: float  # Hz


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Segment:
    """One step of a schedule.

    ``coherent`` segments hold a Hamiltonian program for ``duration``
    seconds. ``ideal_gate`` segments apply ``gate`` instantaneously.
    ``z_correction`` segments apply diag(1, exp(i*z_phases[q])) to each qubit.
    """

    kind: str
    duration: float = 0.0
    epsilons: np.ndarray | None = None
    couplings: np.ndarray | None = None
    drives: tuple[Drive, ...] = ()
    gate: Gate | None = None
    z_phases: np.ndarray | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("coherent", "ideal_gate", "z_correction"):
            raise InvalidSegment(f"unknown segment kind {self.kind!r}")
        if self.duration < 0 or not np.isfinite(self.duration):
            raise InvalidSegment("duration must be finite and >= 0")
        if self.kind == "coherent":
            eps = _frozen(self.epsilons)
            g = _frozen(self.couplings)
            if eps.ndim != 1 or g.shape != (len(eps), len(eps)):
                raise InvalidSegment("epsilons / couplings dimension mismatch")
            if np.any(np.diag(g) != 0) or np.any(g != g.T):
                raise InvalidSegment("couplings must be symmetric with zero diagonal")
            object.__setattr__(self, "epsilons", eps)
            object.__setattr__(self, "couplings", g)
            object.__setattr__(self, "drives", tuple(self.drives))
        else:
            if self.duration != 0:
                raise InvalidSegment(f"{self.kind} segments take zero time")
        if self.kind == "ideal_gate" and self.gate is None:
            raise InvalidSegment("ideal_gate segment needs a gate")
        if self.kind == "z_correction":
            object.__setattr__(self, "z_phases", _frozen(self.z_phases))

    @property
    def n_qubits(self) -> int | None:
        if self.kind == "coherent":
            return len(self.epsilons)
        if self.kind == "z_correction":
            return len(self.z_phases)
        return None

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "duration_s": self.duration, "label": self.label}
        if self.kind == "coherent":
            d["epsilons_hz"] = self.epsilons.tolist()
            d["couplings_hz"] = self.couplings.tolist()
            d["drives"] = [
                {"qubit": dr.qubit, "amplitude_hz": dr.amplitude, "frequency_hz": dr.frequency}
                for dr in self.drives
            ]
        elif self.kind == "ideal_gate":
            d["gate"] = self.gate.to_dict()
        else:
            d["z_phases_rad"] = self.z_phases.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Segment":
        kind = d["kind"]
        if kind == "coherent":
            drives = tuple(Drive(x["qubit"], x["amplitude_hz"], x["frequency_hz"]) for x in d.get("drives", []))
            return cls(kind, d["duration_s"], d["epsilons_hz"], d["couplings_hz"], drives, label=d.get("label", ""))
        if kind == "ideal_gate":
            return cls(kind, gate=Gate.from_dict(d["gate"]), label=d.get("label", ""))
        return cls(kind, z_phases=d["z_phases_rad"], label=d.get("label", ""))


@dataclass(frozen=True)
class FramePhase:
    """Analytic phase bookkeeping for one coherent segment.

    ``eps0_phase`` is 2*pi*eps0*t, ``filled_band_phase`` is 2*pi*E_n*t with
    E_n the summed data frequencies, and ``shift`` the generator offset c
    removed by the standard form (radians).
    """

    segment: int
    duration: float
    eps0_phase: float
    filled_band_phase: float
    shift: float = 0.0


@dataclass(frozen=True)
class Schedule:
    graph: DeviceGraph
    segments: tuple[Segment, ...] = ()
    ledger: tuple[FramePhase, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "ledger", tuple(self.ledger))
        for k, seg in enumerate(self.segments):
            if seg.n_qubits is not None and seg.n_qubits != self.graph.n_total:
                raise InvalidSegment(f"segment {k} acts on {seg.n_qubits} qubits, graph has {self.graph.n_total}")
            if seg.kind == "coherent":
                if np.max(np.abs(seg.couplings), initial=0.0) > self.graph.g_max * (1 + 1e-12):
                    raise InvalidSegment(f"segment {k} exceeds g_max")
            if seg.kind == "ideal_gate" and max(seg.gate.qubits) >= self.graph.n_total:
                raise InvalidSegment(f"segment {k} gate outside the graph")
        covered = {e.segment for e in self.ledger}
        missing = [k for k, s in enumerate(self.segments) if s.kind == "coherent" and k not in covered]
        if missing:
            raise InvalidSegment(f"frame ledger misses coherent segments {missing}")

    @property
    def total_coherent_time(self) -> float:
        return total_duration(self)

    def __add__(self, other: "Schedule") -> "Schedule":
        if other.graph != self.graph:
            raise InvalidInput("cannot concatenate schedules on different graphs")
        off = len(self.segments)
        shifted = tuple(
            FramePhase(e.segment + off, e.duration, e.eps0_phase, e.filled_band_phase, e.shift) for e in other.ledger
        )
        return Schedule(self.graph, self.segments + other.segments, self.ledger + shifted)

    def to_dict(self) -> dict:
        return {
            "bit_ordering": BIT_ORDERING,
            "graph": self.graph.to_dict(),
            "segments": [s.to_dict() for s in self.segments],
            "ledger": [vars(e) for e in self.ledger],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "Schedule":
        if d.get("bit_ordering") != BIT_ORDERING:
            raise InvalidInput(f"bit_ordering must be {BIT_ORDERING!r}")
        return cls(
            DeviceGraph.from_dict(d["graph"]),
            tuple(Segment.from_dict(s) for s in d["segments"]),
            tuple(FramePhase(**e) for e in d.get("ledger", [])),
        )

    @classmethod
    def from_json(cls, text: str) -> "Schedule":
        return cls.from_dict(json.loads(text))


def total_duration(schedule: Schedule) -> float:
    return float(sum(s.duration for s in schedule.segments if s.kind == "coherent"))


def _hamiltonian_terms(eps, g, counter_rotating: bool):
    n = len(eps)
    idx = np.arange(2**n)
    bits = (idx[:, None] >> np.arange(n)) & 1
    diag = bits @ np.asarray(eps, dtype=float)
    rows, cols, vals = [], [], []
    for i in range(n):
        for j in range(i + 1, n):
            if g[i, j] == 0:
                continue
            src = idx
            if not counter_rotating:
                src = idx[bits[:, i] != bits[:, j]]
            rows.append(src ^ ((1 << i) | (1 << j)))
            cols.append(src)
            vals.append(np.full(len(src), g[i, j]))
    return diag, rows, cols, vals


def build_hamiltonian(seg: Segment, graph: DeviceGraph, counter_rotating: bool = True, sparse: bool = False):
    """Full 2^N device Hamiltonian (in Hz) for a drive-free coherent segment.

    H = sum_i eps_i |1><1|_i + 1/2 sum_{i != i'} g_ii' X_i X_i'. With
    ``counter_rotating=False`` each X X is replaced by its
    excitation-conserving part (sigma+ sigma- + h.c.).
    """
    if seg.kind != "coherent":
        raise InvalidSegment("only coherent segments have a Hamiltonian")
    if seg.drives:
        raise InvalidSegment("driven segments are time dependent")
    if seg.n_qubits != graph.n_total:
        raise InvalidSegment(f"segment has {seg.n_qubits} qubits, graph has {graph.n_total}")
    diag, rows, cols, vals = _hamiltonian_terms(seg.epsilons, seg.couplings, counter_rotating)
    dim = graph.dim
    if sparse:
        H = scipy.sparse.diags(diag.astype(complex), format="csr")
        if rows:
            off = scipy.sparse.csr_matrix(
                (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
            )
            H = H + off
        return H
    H = np.diag(diag).astype(complex)
    for r, c, v in zip(rows, cols, vals):
        H[r, c] += v
    return H


def project_ses(H, graph: DeviceGraph) -> np.ndarray:
    """Matrix of H over the SES basis |i) of the data partition, ancillas in |0>."""
    idx = [graph.ses_index(i) for i in range(graph.n_data)]
    return np.asarray(H[np.ix_(idx, idx)] if not scipy.sparse.issparse(H) else H[idx][:, idx].toarray())


def project_dual(H, graph: DeviceGraph, ancilla_state: int = 0) -> np.ndarray:
    """Matrix of H over the single-hole dual basis; ``ancilla_state`` is an ancilla bitmask."""
    idx = [graph.dual_index(i, ancilla_state) for i in range(graph.n_data)]
    return np.asarray(H[np.ix_(idx, idx)] if not scipy.sparse.issparse(H) else H[idx][:, idx].toarray())


def filled_band_energy(epsilons, graph: DeviceGraph) -> float:
    return float(np.sum(np.asarray(epsilons)[list(graph.data_ids)]))
