"""Quantum reference frames as coherent-state triples and the change-of-frame map.

Two levels of description coexist:

* branch-exact semantics, where each superposition branch carries a classical
  frame and the transformation evaluates Euler angles as scalars, and
* finite-j semantics, where the Euler angles are Hermitian operators acting on
  the frame's three spin-j subsystems (slots A1, A2, A3) and the transformation
  is a genuine unitary on A1 x A2 x A3 x B.

The finite-j operators converge to the branch-exact scalars as j grows; the
convergence harness quantifies the gap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .frames import (
    GIMBAL_THRESHOLD,
    EulerAngles,
    Frame,
    compose_improper,
    compose_proper,
    euler_from_frame,
)
from .spincore import (
    DomainError,
    HermitianOperator,
    Spin,
    angular_momentum_ops,
    cosine_operator,
    reduced_density,
    rotation_operator,
    scs,
)

MERGE_TOL = 1e-9
_E3 = np.array([0.0, 0.0, 1.0])


class UnsupportedReflectionError(ValueError):
    """Improper frame change requested for a vector-form system state.

    A reflection has no linear unitary representative on spin states, so
    improper branches only transform label-form descriptions.
    """


def direction_angles(n) -> tuple[float, float]:
    """Polar and azimuthal angles of a unit vector, with phi in [-pi, pi)."""
    n = np.asarray(n, dtype=float)
    theta = math.acos(max(-1.0, min(1.0, float(n[2]))))
    phi = math.atan2(float(n[1]), float(n[0]))
    if phi >= math.pi:
        phi -= 2.0 * math.pi
    return theta, phi


def angles_to_direction(theta: float, phi: float) -> np.ndarray:
    return np.array(
        [math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)]
    )


@dataclass(frozen=True)
class SystemB:
    """State of the described spin system, in label or vector form.

    Label form records an eigenstate |n, m> of the angular momentum along n;
    vector form records explicit amplitudes in the z-basis.
    """

    spin: Spin
    n: np.ndarray | None = None
    m: float | None = None
    amps: np.ndarray | None = None

    def __post_init__(self):
        if (self.n is None) == (self.amps is None):
            raise ValueError("exactly one of label (n, m) or vector amplitudes must be set")
        if self.n is not None:
            n = np.asarray(self.n, dtype=float)
            if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > 1e-9:
                raise ValueError("label direction must be a unit 3-vector")
            if self.m is None:
                raise ValueError("label form requires the quantum number m")
            m = float(self.m)
            if abs(m) > self.spin.j + 1e-12 or abs((self.spin.j - m) - round(self.spin.j - m)) > 1e-9:
                raise ValueError(f"m = {m} is not a magnetic quantum number for spin {self.spin.j}")
            n = n.copy()
            n.flags.writeable = False
            object.__setattr__(self, "n", n)
            object.__setattr__(self, "m", m)
        else:
            amps = np.asarray(self.amps, dtype=complex)
            if amps.shape != (self.spin.dim,):
                raise ValueError(f"expected {self.spin.dim} amplitudes for spin {self.spin.j}")
            norm = np.linalg.norm(amps)
            if abs(norm - 1.0) > 1e-6:
                raise ValueError(f"vector-form state norm {norm} deviates from 1")
            amps = amps / norm
            amps.flags.writeable = False
            object.__setattr__(self, "amps", amps)

    @classmethod
    def label(cls, n, m, s) -> "SystemB":
        return cls(Spin.coerce(s), n=np.asarray(n, dtype=float), m=float(m))

    @classmethod
    def vector(cls, amps, s) -> "SystemB":
        return cls(Spin.coerce(s), amps=np.asarray(amps, dtype=complex))

    @property
    def is_label(self) -> bool:
        return self.n is not None

    def to_vector(self) -> np.ndarray:
        """Z-basis amplitudes with the coherent-state phase convention.

        For m = s this is the coherent state itself; lower m are obtained by
        rotating |s, m> with the same geodesic rotation that carries the z axis
        to n, which reproduces the coherent-state phases at m = s.
        """
        if not self.is_label:
            return np.array(self.amps)
        theta, phi = direction_angles(self.n)
        if self.m == self.spin.j:
            return np.array(scs(self.spin, theta, phi).amplitudes)
        axis = np.array([-math.sin(phi), math.cos(phi), 0.0])
        u = rotation_operator(self.spin, axis, theta, sense="active")
        basis = np.zeros(self.spin.dim, dtype=complex)
        basis[int(round(self.spin.j - self.m))] = 1.0
        return u.matrix @ basis

    def close_to(self, other: "SystemB", tol: float = MERGE_TOL) -> bool:
        if self.spin != other.spin or self.is_label != other.is_label:
            return False
        if self.is_label:
            return self.m == other.m and float(np.max(np.abs(self.n - other.n))) <= tol
        return float(np.max(np.abs(self.amps - other.amps))) <= tol


@dataclass(frozen=True)
class Branch:
    """One term of a frame superposition: amplitude, frame, and B state."""

    amplitude: complex
    frame: Frame
    system: SystemB

    def __post_init__(self):
        object.__setattr__(self, "amplitude", complex(self.amplitude))


@dataclass(frozen=True)
class BranchState:
    """Weighted branches plus the label of the frame the description lives in."""

    branches: tuple[Branch, ...]
    perspective_label: str = "C"

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))

    def norm_squared(self) -> float:
        return float(sum(abs(b.amplitude) ** 2 for b in self.branches))

    def validate_normalized(self, tol: float = 1e-10) -> None:
        nsq = self.norm_squared()
        if abs(nsq - 1.0) > tol:
            raise ValueError(f"branch weights sum to {nsq}, not 1")

    def deduplicate(self, tol: float = MERGE_TOL) -> "BranchState":
        """Merge branches whose frames and B states agree within tol."""
        merged: list[Branch] = []
        for br in self.branches:
            for k, existing in enumerate(merged):
                if existing.frame.close_to(br.frame, tol) and existing.system.close_to(br.system, tol):
                    merged[k] = Branch(existing.amplitude + br.amplitude, existing.frame, existing.system)
                    break
            else:
                merged.append(br)
        return BranchState(tuple(merged), self.perspective_label)


def _swap_label(label: str) -> str:
    return {"C": "A", "A": "C"}.get(label, label)


@dataclass(frozen=True)
class EulerAngleOperators:
    """Operator-valued zxz Euler angles at finite j.

    alpha_op and beta_op act on slot A3.  gamma factors as a diagonal operator
    on A1 times a diagonal operator on A2 x A3 (diagonal because the canonical
    axes make every constituent a function of Jz), so only its diagonals are
    stored; `gamma_op` materializes the full matrix and is meant for small j.
    """

    spin: Spin
    alpha_op: HermitianOperator
    beta_op: HermitianOperator
    gamma_axis1: np.ndarray
    gamma_axes23: np.ndarray

    @classmethod
    def zero(cls, j) -> "EulerAngleOperators":
        spin = Spin.coerce(j)
        d = spin.dim
        z = HermitianOperator(np.zeros((d, d)), subsystem="A3")
        return cls(spin, z, z, np.zeros(d), np.zeros((d, d)))

    def gamma_diagonal(self) -> np.ndarray:
        """Diagonal of gamma over A1 x A2 x A3, shape (d, d, d)."""
        return self.gamma_axis1[:, None, None] * self.gamma_axes23[None, :, :]

    def gamma_op(self) -> HermitianOperator:
        return HermitianOperator(np.diag(self.gamma_diagonal().reshape(-1)), subsystem="A1A2A3")


_CANONICAL_AXES = np.eye(3)


def euler_angle_operators(j, basis=None) -> EulerAngleOperators:
    """Hermitian Euler-angle operators built from direction-cosine operators.

    The arccos argument of alpha is symmetrized as B^(1/2) A B^(1/2) (A the
    negated e2-cosine, B the inverse square root of 1 minus the e3-cosine
    squared) and its eigenvalues are clamped into [-1, 1] before arccos; the
    two alpha factors are combined with the Jordan product so the result stays
    Hermitian at every finite j.  Only the canonical axes are supported: they
    make beta and both gamma factors diagonal in the z-basis.
    """
    spin = Spin.coerce(j)
    if spin.twice_j < 1:
        raise ValueError("Euler angle operators require j >= 1/2")
    if basis is not None:
        basis = np.asarray(basis, dtype=float)
        if basis.shape != (3, 3) or np.max(np.abs(basis - _CANONICAL_AXES)) > 1e-12:
            raise NotImplementedError("only the canonical axes are supported")
    root = math.sqrt(spin.j * (spin.j + 1.0))
    jx, jy, _ = (op.matrix for op in angular_momentum_ops(spin))
    c3_diag = spin.m_values() / root            # cosine operator along e3, diagonal
    c1 = jx / root
    c2 = jy / root

    beta_mat = np.diag(np.arccos(np.clip(c3_diag, -1.0, 1.0)).astype(complex))

    # alpha: (2/pi) arctan(j c1) Jordan-multiplied with arccos of the
    # symmetrized -c2 (1 - c3^2)^(-1/2)
    wx, vx = np.linalg.eigh(c1)
    f_mat = (vx * ((2.0 / math.pi) * np.arctan(spin.j * wx))) @ vx.conj().T
    binv_sqrt = (1.0 - c3_diag**2) ** -0.25
    s_mat = binv_sqrt[:, None] * (-c2) * binv_sqrt[None, :]
    ws, vs = np.linalg.eigh(s_mat)
    g_mat = (vs * np.arccos(np.clip(ws, -1.0, 1.0))) @ vs.conj().T
    alpha_mat = (f_mat @ g_mat + g_mat @ f_mat) / 2.0
    alpha_mat = (alpha_mat + alpha_mat.conj().T) / 2.0

    gamma_axis1 = (2.0 / math.pi) * np.arctan(spin.j * c3_diag)
    binv = (1.0 - c3_diag**2) ** -0.5
    # rows index the e3-cosine on A2, columns the inverse-root factor on A3
    gamma_axes23 = np.arccos(np.clip(np.outer(c3_diag, binv), -1.0, 1.0))

    return EulerAngleOperators(
        spin,
        HermitianOperator(alpha_mat, subsystem="A3"),
        HermitianOperator(beta_mat, subsystem="A3"),
        gamma_axis1,
        gamma_axes23,
    )


def _apply_to_axis(mat: np.ndarray, work: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(mat, work, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def u_transform_finite_j(joint, ops: EulerAngleOperators, s) -> np.ndarray:
    """Apply exp(i gamma J_e3) exp(i beta J_e1) exp(i alpha J_e3) on B.

    The angle operators act on the frame slots, the angular momenta on B; each
    exponential is applied by iterating over the angle operator's eigenbasis on
    its slots, so the joint operator is never materialized.
    """
    spin_b = Spin.coerce(s)
    d = ops.spin.dim
    ds = spin_b.dim
    joint = np.asarray(joint, dtype=complex)
    if joint.shape != (d * d * d * ds,):
        raise ValueError(f"joint vector length {joint.shape} does not match dims ({d},{d},{d},{ds})")
    work = joint.reshape(d, d, d, ds).copy()
    mz = spin_b.m_values()                      # Jz^B eigenvalues, basis order

    # alpha factor: dense on A3, Jz on B
    wa, va = np.linalg.eigh(ops.alpha_op.matrix)
    work = _apply_to_axis(va.conj().T, work, 2)
    work *= np.exp(1j * np.outer(wa, mz))[None, None, :, :]
    work = _apply_to_axis(va, work, 2)

    # beta factor: diagonal on A3, Jx on B
    beta_diag = np.real(np.diag(ops.beta_op.matrix))
    jxb = angular_momentum_ops(spin_b)[0].matrix
    wb, vb = np.linalg.eigh(jxb)
    work = _apply_to_axis(vb.conj().T, work, 3)
    work *= np.exp(1j * np.outer(beta_diag, wb))[None, None, :, :]
    work = _apply_to_axis(vb, work, 3)

    # gamma factor: diagonal on A1 x A2 x A3, Jz on B
    gamma_diag = ops.gamma_diagonal()
    work *= np.exp(1j * gamma_diag[:, :, :, None] * mz[None, None, None, :])

    return work.reshape(-1)


def scalar_euler_unitary(s, e: EulerAngles):
    """Passive spin-s rotation exp(i gamma Jz) exp(i beta Jx) exp(i alpha Jz)."""
    ex = np.array([1.0, 0.0, 0.0])
    u3a = rotation_operator(s, _E3, e.alpha, sense="passive").matrix
    u1b = rotation_operator(s, ex, e.beta, sense="passive").matrix
    u3g = rotation_operator(s, _E3, e.gamma, sense="passive").matrix
    return u3g @ u1b @ u3a


def branch_transform(state: BranchState) -> BranchState:
    """Change of frame evaluated branch by branch with scalar Euler angles.

    Per branch: extract Euler angles (gimbal fallback included), recompose the
    proper or improper matrix M according to the branch chirality, map the B
    state (labels by M n, vectors by the scalar-angle unitary), relabel the
    frame to the columns of M, keep the amplitude.  Perspective labels swap.
    """
    new_branches = []
    for br in state.branches:
        e = euler_from_frame(br.frame)
        proper = br.frame.chirality > 0
        m_mat = compose_proper(e) if proper else compose_improper(e)
        sys_b = br.system
        if sys_b.is_label:
            new_sys = SystemB.label(m_mat @ sys_b.n, sys_b.m, sys_b.spin)
        else:
            if not proper:
                raise UnsupportedReflectionError(
                    "vector-form B cannot be carried through an improper frame change"
                )
            new_sys = SystemB.vector(scalar_euler_unitary(sys_b.spin, e) @ sys_b.amps, sys_b.spin)
        new_frame = Frame.from_columns(m_mat)
        new_branches.append(Branch(br.amplitude, new_frame, new_sys))
    out = BranchState(tuple(new_branches), _swap_label(state.perspective_label))
    return out.deduplicate()


def realize_finite_j(state: BranchState, j, normalize: bool = True) -> np.ndarray:
    """Joint vector on A1 x A2 x A3 x B with each frame axis a finite-j coherent state.

    Branch overlaps are not exactly zero at finite j, so the sum is
    renormalized unless `normalize` is False.
    """
    spin = Spin.coerce(j)
    if not state.branches:
        raise ValueError("cannot realize an empty branch state")
    spin_b = state.branches[0].system.spin
    total = None
    for br in state.branches:
        if br.system.spin != spin_b:
            raise ValueError("all branches must carry the same B spin")
        parts = []
        for vec in br.frame.vectors():
            theta, phi = direction_angles(vec)
            parts.append(scs(spin, theta, phi).amplitudes)
        parts.append(br.system.to_vector())
        joint = br.amplitude * reduce(np.kron, parts)
        total = joint if total is None else total + joint
    if normalize:
        total = total / np.linalg.norm(total)
    return total


def entanglement_diagnostic(state: BranchState) -> float:
    """Entanglement entropy (base 2) of B across the frame/B split.

    Works in the infinite-j idealization where distinct frames are orthogonal
    flags: branches are grouped by frame, B amplitudes are summed coherently
    within a group, and the reduced B state is the weighted mixture of the
    group vectors.
    """
    if not state.branches:
        raise ValueError("empty branch state")
    spin_b = state.branches[0].system.spin
    groups: list[tuple[Frame, np.ndarray]] = []
    for br in state.branches:
        if br.system.spin != spin_b:
            raise ValueError("all branches must carry the same B spin")
        contrib = br.amplitude * br.system.to_vector()
        for k, (frame, vec) in enumerate(groups):
            if frame.close_to(br.frame):
                groups[k] = (frame, vec + contrib)
                break
        else:
            groups.append((br.frame, contrib))
    rho = np.zeros((spin_b.dim, spin_b.dim), dtype=complex)
    for _, vec in groups:
        rho += np.outer(vec, vec.conj())
    trace = float(np.real(np.trace(rho)))
    if trace <= 0.0:
        raise ValueError("branch state has zero weight")
    rho /= trace
    evals = np.linalg.eigvalsh(rho)
    evals = evals[evals > 1e-15]
    return float(-np.sum(evals * np.log2(evals))) + 0.0


def _wrapped_angle_error(value: float, target: float) -> float:
    """Absolute angle difference on the circle."""
    return abs(math.remainder(value - target, 2.0 * math.pi))


@dataclass(frozen=True)
class ConvergenceRow:
    j: float
    alpha_err: float
    beta_err: float
    gamma_err: float
    cos_op_err: float
    b_fidelity: float


def check_nonincreasing(values, slack: float = 0.05, floor: float = 1e-12) -> bool:
    """Nonincreasing up to a relative slack per step and an absolute floor.

    The floor keeps identically-zero error columns (pure rounding noise) from
    failing the monotonicity check.
    """
    values = [float(v) for v in values]
    return all(b <= max(a * (1.0 + slack), floor) for a, b in zip(values, values[1:]))


def convergence_study(frame: Frame, theta: float, phi: float, j_list, s=0.5) -> list[ConvergenceRow]:
    """Finite-j Euler-operator expectations and transform fidelity versus j.

    For each j: expectation values of the three angle operators on the realized
    coherent-state triple against the classical angles, the signed gap between
    cos(theta) and the direction-cosine expectation on a coherent state at
    (theta, phi), and the fidelity of the reduced B state after the finite-j
    unitary against the branch-exact B output.
    """
    if frame.chirality < 0:
        raise DomainError("convergence study requires a proper frame")
    c3 = float(frame.f3 @ _E3)
    if 1.0 - c3 * c3 <= GIMBAL_THRESHOLD:
        raise DomainError("convergence study rejects gimbal-locked frames")
    e_cl = euler_from_frame(frame)
    spin_b = Spin.coerce(s)
    n_b = angles_to_direction(theta, phi)
    branch_state = BranchState(
        (Branch(1.0, frame, SystemB.label(n_b, spin_b.j, spin_b)),)
    )
    exact = branch_transform(branch_state)
    b_exact = exact.branches[0].system.to_vector()

    rows = []
    for jv in j_list:
        spin = Spin.coerce(jv)
        ops = euler_angle_operators(spin)
        states = []
        for vec in frame.vectors():
            t, p = direction_angles(vec)
            states.append(scs(spin, t, p))
        psi1, psi2, psi3 = states
        alpha_exp = psi3.expectation(ops.alpha_op).real
        beta_exp = psi3.expectation(ops.beta_op).real
        w1 = np.abs(psi1.amplitudes) ** 2
        w2 = np.abs(psi2.amplitudes) ** 2
        w3 = np.abs(psi3.amplitudes) ** 2
        gamma_exp = float(w1 @ ops.gamma_axis1) * float(w2 @ ops.gamma_axes23 @ w3)

        cos_state = scs(spin, theta, phi)
        cos_exp = cos_state.expectation(cosine_operator(spin, _E3)).real
        cos_op_err = math.cos(theta) - cos_exp

        joint = realize_finite_j(branch_state, spin)
        out = u_transform_finite_j(joint, ops, spin_b)
        d = spin.dim
        rho = reduced_density(out, (d, d, d, spin_b.dim), keep=3)
        fid = float(np.real(np.vdot(b_exact, rho @ b_exact)))

        rows.append(
            ConvergenceRow(
                j=spin.j,
                alpha_err=_wrapped_angle_error(alpha_exp, e_cl.alpha),
                beta_err=abs(beta_exp - e_cl.beta),
                gamma_err=_wrapped_angle_error(gamma_exp, e_cl.gamma),
                cos_op_err=cos_op_err,
                b_fidelity=fid,
            )
        )
    return rows
