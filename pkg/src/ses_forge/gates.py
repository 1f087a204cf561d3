"""Ideal gate library and statevector application.

Basis convention everywhere: qubit ``q`` is bit ``q`` of the basis index
(qubit 0 least significant). A k-qubit gate matrix uses the same
convention over its own ``qubits`` tuple.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput

_S2 = 1 / np.sqrt(2)

_FIXED = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "h": np.array([[1, 1], [1, -1]], dtype=complex) * _S2,
    # r = |0><0| + i|1><1|
    "s": np.array([[1, 0], [0, 1j]], dtype=complex),
    "sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
    # exp(+i pi/4 sigma_x), the local correction of the multi-target CNOT
    "xquarter": np.array([[1, 1j], [1j, 1]], dtype=complex) * _S2,
}


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def phase(phi: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * phi)])


_PARAM1 = {"ry": ry, "rx": rx, "rz": rz, "phase": phase}


def _controlled(u: np.ndarray) -> np.ndarray:
    # qubits = (control, target): control is bit 0
    out = np.eye(4, dtype=complex)
    out[np.ix_([1, 3], [1, 3])] = u
    return out


@dataclass(frozen=True)
class Gate:
    """An ideal gate on a tuple of qubits.

    Single-qubit names given several qubits act as a layer (the same gate
    on each). ``mcx`` is a multi-target CNOT with ``qubits[0]`` the control.
    ``unitary`` carries an explicit matrix.
    """

    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    matrix: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(set(self.qubits)) != len(self.qubits):
            raise InvalidInput(f"gate {self.name} has repeated qubits {self.qubits}")
        if self.name == "unitary":
            if self.matrix is None:
                raise InvalidInput("unitary gate needs a matrix")
            m = np.array(self.matrix, dtype=complex)
            if m.shape != (2 ** len(self.qubits),) * 2:
                raise InvalidInput(f"matrix shape {m.shape} does not match {len(self.qubits)} qubits")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)
        elif self.name not in _FIXED and self.name not in _PARAM1 and self.name not in (
            "cx", "cphase", "swap", "mcx",
        ):
            raise InvalidInput(f"unknown gate {self.name!r}")

    @property
    def is_layer(self) -> bool:
        return self.name in _FIXED or self.name in _PARAM1

    def single(self) -> np.ndarray:
        if self.name in _FIXED:
            return _FIXED[self.name]
        return _PARAM1[self.name](*self.params)

    def unitary(self) -> np.ndarray:
        """Dense matrix over ``self.qubits`` (little-endian)."""
        if self.name == "unitary":
            return np.array(self.matrix)
        if self.is_layer:
            u = self.single()
            out = np.ones((1, 1), dtype=complex)
            for _ in self.qubits:
                out = np.kron(u, out)
            return out
        if self.name == "cx":
            return _controlled(_FIXED["x"])
        if self.name == "cphase":
            return _controlled(phase(self.params[0]))
        if self.name == "swap":
            return np.eye(4, dtype=complex)[[0, 2, 1, 3]]
        if self.name == "mcx":
            k = len(self.qubits)
            idx = np.arange(2**k)
            flip = (2**k - 1) ^ 1
            perm = np.where(idx & 1, idx ^ flip, idx)
            return np.eye(2**k, dtype=complex)[perm]
        raise InvalidInput(self.name)

    def dagger(self) -> "Gate":
        if self.name in ("x", "y", "z", "h", "i", "cx", "swap", "mcx"):
            return self
        if self.name in _PARAM1 or self.name == "cphase":
            return Gate(self.name, self.qubits, tuple(-p for p in self.params))
        if self.name == "s":
            return Gate("sdg", self.qubits)
        if self.name == "sdg":
            return Gate("s", self.qubits)
        return Gate("unitary", self.qubits, matrix=self.unitary().conj().T)

    def to_dict(self) -> dict:
        d = {"name": self.name, "qubits": list(self.qubits), "params": list(self.params)}
        if self.name == "unitary":
            d["matrix"] = [[[z.real, z.imag] for z in row] for row in self.matrix]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Gate":
        matrix = None
        if "matrix" in d:
            matrix = np.array([[complex(re, im) for re, im in row] for row in d["matrix"]])
        return cls(d["name"], tuple(d["qubits"]), tuple(d.get("params", ())), matrix)


def apply_matrix(state: np.ndarray, mat: np.ndarray, targets, n_qubits: int) -> np.ndarray:
    """Apply a little-endian k-qubit matrix to ``targets`` of a qubit register.

    ``state`` may carry leading batch axes; the last axis has length
    ``2**n_qubits``.
    """
    targets = list(targets)
    k = len(targets)
    batch = state.shape[:-1]
    nb = len(batch)
    psi = state.reshape(batch + (2,) * n_qubits)
    axes = [nb + n_qubits - 1 - t for t in reversed(targets)]
    g = np.asarray(mat).reshape((2,) * (2 * k))
    out = np.tensordot(g, psi, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return out.reshape(state.shape)


def apply_gate(state: np.ndarray, gate: Gate, n_qubits: int) -> np.ndarray:
    if gate.name == "mcx":
        ctrl = 1 << gate.qubits[0]
        mask = sum(1 << q for q in gate.qubits[1:])
        idx = np.arange(2**n_qubits)
        perm = np.where(idx & ctrl, idx ^ mask, idx)
        out = np.empty_like(state)
        out[..., perm] = state
        return out
    if gate.is_layer:
        u = gate.single()
        for q in gate.qubits:
            state = apply_matrix(state, u, [q], n_qubits)
        return state
    return apply_matrix(state, gate.unitary(), gate.qubits, n_qubits)


def embed(gate: Gate, n_qubits: int) -> np.ndarray:
    """Dense 2^N matrix of a gate; for tests and small registers."""
    eye = np.eye(2**n_qubits, dtype=complex)
    return apply_gate(eye.T, gate, n_qubits).T
