"""Rotationally invariant Hamiltonians and their behavior under frame changes.

A joint Hamiltonian lives on A1 x A2 x A3 x B.  Rotational invariance means it
commutes with every common rotation (the same SO(3) element represented on all
four subsystems); the frame-change check verifies that matrix elements between
realized coherent-state products are unchanged when the ket frame's classical
rotation is inserted, which is the finite-j face of the larger invariance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .frames import Frame, axis_angle_from_matrix, matrix_from_frames
from .qrf import SystemB, direction_angles
from .spincore import (
    Spin,
    UnitaryOperator,
    angular_momentum_ops,
    apply_on_subsystem,
    rotation_operator,
    scs,
)

INVARIANCE_TOL = 1e-8


class NonInvariantHamiltonianError(ValueError):
    """Raised when a Hamiltonian fails the rotational-invariance precheck."""

    def __init__(self, deviation: float):
        super().__init__(f"Hamiltonian is not rotationally invariant (deviation {deviation:.3e})")
        self.deviation = deviation


@dataclass(frozen=True)
class JointHamiltonian:
    """Dense Hermitian operator on the four-subsystem space."""

    matrix: np.ndarray
    spin_a: Spin
    spin_b: Spin

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        d, ds = self.spin_a.dim, self.spin_b.dim
        total = d**3 * ds
        if mat.shape != (total, total):
            raise ValueError(f"matrix shape {mat.shape} does not match dims {(d, d, d, ds)}")
        dev = np.max(np.abs(mat - mat.conj().T))
        if dev > 1e-10:
            raise ValueError(f"Hamiltonian deviates from Hermiticity by {dev}")
        mat = mat.copy()
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @property
    def dims(self) -> tuple[int, int, int, int]:
        d = self.spin_a.dim
        return (d, d, d, self.spin_b.dim)


def heisenberg_like_hamiltonian(j, s, couplings) -> JointHamiltonian:
    """Sum over frame slots of c_i (J_Ai . J_B), built by subsystem contractions."""
    spin_a = Spin.coerce(j)
    spin_b = Spin.coerce(s)
    couplings = [float(c) for c in couplings]
    if len(couplings) != 3:
        raise ValueError("expected one coupling per frame slot")
    dims = (spin_a.dim,) * 3 + (spin_b.dim,)
    total = spin_a.dim**3 * spin_b.dim
    ops_a = [op.matrix for op in angular_momentum_ops(spin_a)]
    ops_b = [op.matrix for op in angular_momentum_ops(spin_b)]
    h = np.zeros((total, total), dtype=complex)
    eye = np.eye(total, dtype=complex)
    for slot, c in enumerate(couplings):
        if c == 0.0:
            continue
        for ja, jb in zip(ops_a, ops_b):
            term = apply_on_subsystem(eye, jb, 3, dims)
            term = apply_on_subsystem(term, ja, slot, dims)
            h += c * term
    h = (h + h.conj().T) / 2.0
    return JointHamiltonian(h, spin_a, spin_b)


def single_axis_hamiltonian(j, s, axis=2) -> JointHamiltonian:
    """J^B along one canonical axis, tensored with identities: not invariant.

    Serves as the negative control for the invariance checks.
    """
    spin_a = Spin.coerce(j)
    spin_b = Spin.coerce(s)
    dims = (spin_a.dim,) * 3 + (spin_b.dim,)
    total = spin_a.dim**3 * spin_b.dim
    op = angular_momentum_ops(spin_b)[axis].matrix
    h = apply_on_subsystem(np.eye(total, dtype=complex), op, 3, dims)
    return JointHamiltonian(h, spin_a, spin_b)


@dataclass(frozen=True)
class CommonRotation:
    """The same SO(3) element represented on each of the four subsystems."""

    axis: np.ndarray
    angle: float
    factors: tuple[UnitaryOperator, UnitaryOperator, UnitaryOperator, UnitaryOperator]

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        axis = axis.copy()
        axis.flags.writeable = False
        object.__setattr__(self, "axis", axis)


def common_rotation(j, s, axis, angle: float) -> CommonRotation:
    """Active rotation operators about `axis` by `angle` on A1, A2, A3 and B."""
    spin_a = Spin.coerce(j)
    spin_b = Spin.coerce(s)
    ua = rotation_operator(spin_a, axis, angle, sense="active")
    ub = rotation_operator(spin_b, axis, angle, sense="active")
    factors = (
        UnitaryOperator(ua.matrix, subsystem="A1"),
        UnitaryOperator(ua.matrix, subsystem="A2"),
        UnitaryOperator(ua.matrix, subsystem="A3"),
        UnitaryOperator(ub.matrix, subsystem="B"),
    )
    return CommonRotation(np.asarray(axis, dtype=float), float(angle), factors)


def _apply_rotation(rot: CommonRotation, state: np.ndarray, dims, dagger: bool = False) -> np.ndarray:
    out = state
    for slot, factor in enumerate(rot.factors):
        mat = factor.matrix.conj().T if dagger else factor.matrix
        out = apply_on_subsystem(out, mat, slot, dims)
    return out


def check_rotational_invariance(h: JointHamiltonian, rot: CommonRotation,
                                block: int = 64) -> float:
    """Max over basis columns of || (R H R^dag - H) e_k ||.

    Columns are swept in blocks; the conjugated matrix is never formed whole.
    """
    dims = h.dims
    total = h.matrix.shape[0]
    worst = 0.0
    for start in range(0, total, block):
        stop = min(start + block, total)
        cols = np.zeros((total, stop - start), dtype=complex)
        cols[np.arange(start, stop), np.arange(stop - start)] = 1.0
        x = _apply_rotation(rot, cols, dims, dagger=True)
        y = h.matrix @ x
        z = _apply_rotation(rot, y, dims)
        diff = z - h.matrix[:, start:stop]
        worst = max(worst, float(np.max(np.linalg.norm(diff, axis=0))))
    return worst


# fixed probe rotations for the invariance precheck: canonical and mixed axes
_PROBE_ROTATIONS = (
    (np.array([1.0, 0.0, 0.0]), 0.9),
    (np.array([0.0, 1.0, 0.0]), 0.9),
    (np.array([0.0, 0.0, 1.0]), 0.9),
    (np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0), 2.2),
)


def _realize_product(frame: Frame, b_state: SystemB, j) -> np.ndarray:
    parts = []
    for vec in frame.vectors():
        theta, phi = direction_angles(vec)
        parts.append(scs(j, theta, phi).amplitudes)
    out = parts[0]
    for p in parts[1:]:
        out = np.kron(out, p)
    return np.kron(out, b_state.to_vector())


def check_qrf_invariance(h: JointHamiltonian, ket_frame: Frame, bra_frame: Frame,
                         b_states, tol: float = INVARIANCE_TOL) -> tuple[complex, complex]:
    """Matrix-element pair certifying invariance under the frame change.

    Computes <g'| R H R^dag |g> and <g'| H |g> on realized coherent-state
    products, with R the common rotation for the ket frame's classical matrix
    (label bookkeeping is numerically trivial).  The Hamiltonian must pass the
    rotational-invariance precheck first; failures raise with the measured
    deviation.
    """
    if ket_frame.chirality < 0 or bra_frame.chirality < 0:
        raise ValueError("frame-change check requires proper frames")
    b_ket, b_bra = b_states
    if b_ket.spin != h.spin_b or b_bra.spin != h.spin_b:
        raise ValueError("B states must match the Hamiltonian's B spin")

    m_mat = matrix_from_frames(ket_frame)
    axis, angle = axis_angle_from_matrix(m_mat)
    probes = list(_PROBE_ROTATIONS) + [(axis, angle)]
    deviation = max(
        check_rotational_invariance(h, common_rotation(h.spin_a, h.spin_b, ax, an))
        for ax, an in probes
    )
    if deviation > tol:
        raise NonInvariantHamiltonianError(deviation)

    rot = common_rotation(h.spin_a, h.spin_b, axis, angle)
    g_ket = _realize_product(ket_frame, b_ket, h.spin_a)
    g_bra = _realize_product(bra_frame, b_bra, h.spin_a)
    dims = h.dims
    v = _apply_rotation(rot, g_ket, dims, dagger=True)
    v = h.matrix @ v
    v = _apply_rotation(rot, v, dims)
    lhs = complex(np.vdot(g_bra, v))
    rhs = complex(np.vdot(g_bra, h.matrix @ g_ket))
    return lhs, rhs
