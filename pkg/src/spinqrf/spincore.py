"""Finite-dimensional angular-momentum algebra.

Spin operators, spin coherent states, rotation unitaries and scalar functions
of Hermitian operators, with hbar = 1 throughout.  The |j, m> basis is ordered
by descending m (index 0 is m = +j), so Jz is diag(j, j-1, ..., -j).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
UNIT_VECTOR_TOL = 1e-9
NORM_TOL = 1e-12
CLAMP_TOL = 1e-9


class DomainError(ValueError):
    """An eigenvalue fell outside the domain of a scalar operator function."""


@dataclass(frozen=True, order=True)
class Spin:
    """Spin quantum number, stored as 2j so half-integer values stay exact."""

    twice_j: int

    def __post_init__(self):
        if not isinstance(self.twice_j, (int, np.integer)) or self.twice_j < 0:
            raise ValueError(f"2j must be a non-negative integer, got {self.twice_j!r}")
        object.__setattr__(self, "twice_j", int(self.twice_j))

    @classmethod
    def coerce(cls, j) -> "Spin":
        """Accept a Spin, or a number equal to an integer or half-integer."""
        if isinstance(j, Spin):
            return j
        twice = 2.0 * float(j)
        if abs(twice - round(twice)) > 1e-9:
            raise ValueError(f"spin must be integer or half-integer, got {j}")
        return cls(int(round(twice)))

    @property
    def j(self) -> float:
        return self.twice_j / 2.0

    @property
    def dim(self) -> int:
        return self.twice_j + 1

    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers in basis order: j, j-1, ..., -j."""
        return (self.twice_j - 2.0 * np.arange(self.dim)) / 2.0

    def __repr__(self):
        return f"Spin({self.j:g})"


def _as_matrix(op) -> np.ndarray:
    if isinstance(op, (HermitianOperator, UnitaryOperator)):
        return op.matrix
    return np.asarray(op, dtype=complex)


@dataclass(frozen=True)
class SpinState:
    """Normalized amplitude vector over |j, m> with m descending from +j."""

    spin: Spin
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.spin.dim,):
            raise ValueError(f"expected {self.spin.dim} amplitudes, got shape {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm} deviates from 1 by more than {NORM_TOL}")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    def overlap(self, other: "SpinState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def expectation(self, op) -> complex:
        mat = _as_matrix(op)
        return complex(np.vdot(self.amplitudes, mat @ self.amplitudes))


@dataclass(frozen=True)
class HermitianOperator:
    """Dense Hermitian matrix tagged with the tensor slot it acts on."""

    matrix: np.ndarray
    subsystem: str | None = None

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {mat.shape}")
        dev = np.max(np.abs(mat - mat.conj().T)) if mat.size else 0.0
        if dev > HERMITIAN_TOL:
            raise ValueError(f"matrix deviates from Hermiticity by {dev}")
        mat = mat.copy()
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.matrix, dtype=dtype)


@dataclass(frozen=True)
class UnitaryOperator:
    """Dense unitary matrix tagged with the tensor slot it acts on."""

    matrix: np.ndarray
    subsystem: str | None = None

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {mat.shape}")
        dev = np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])))
        if dev > UNITARY_TOL:
            raise ValueError(f"matrix deviates from unitarity by {dev}")
        mat = mat.copy()
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.matrix, dtype=dtype)


def angular_momentum_ops(j) -> tuple[HermitianOperator, HermitianOperator, HermitianOperator]:
    """Standard ladder-operator construction of (Jx, Jy, Jz) at spin j.

    Jz is diagonal with entries m = j, ..., -j; Jx = (J+ + J-)/2 and
    Jy = (J+ - J-)/(2i) with J+|j,m> = sqrt(j(j+1) - m(m+1)) |j,m+1>.
    """
    spin = Spin.coerce(j)
    m = spin.m_values()
    jz = np.diag(m.astype(complex))
    # raising operator: nonzero entries connect index i (m_i) to i-1 (m_i + 1)
    jj = spin.j * (spin.j + 1.0)
    up = np.sqrt(jj - m[1:] * (m[1:] + 1.0))
    jplus = np.zeros((spin.dim, spin.dim), dtype=complex)
    jplus[np.arange(spin.dim - 1), np.arange(1, spin.dim)] = up
    jminus = jplus.conj().T
    jx = (jplus + jminus) / 2.0
    jy = (jplus - jminus) / 2.0j
    return (
        HermitianOperator(jx),
        HermitianOperator(jy),
        HermitianOperator(jz),
    )


def _check_unit(n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if n.shape != (3,):
        raise ValueError(f"direction must be a 3-vector, got shape {n.shape}")
    if abs(np.linalg.norm(n) - 1.0) > UNIT_VECTOR_TOL:
        raise ValueError(f"direction must be a unit vector, |n| = {np.linalg.norm(n)}")
    return n


def j_along(ops, n) -> HermitianOperator:
    """Angular momentum component n_x Jx + n_y Jy + n_z Jz along unit vector n."""
    n = _check_unit(n)
    jx, jy, jz = (_as_matrix(op) for op in ops)
    return HermitianOperator(n[0] * jx + n[1] * jy + n[2] * jz)


def scs(j, theta: float, phi: float) -> SpinState:
    """Spin coherent state along the direction with polar/azimuthal angles (theta, phi).

    The amplitude at m is sqrt(C(2j, j+m)) cos(theta/2)^(j+m) sin(theta/2)^(j-m)
    e^{i(j-m)phi}, the +j eigenstate of the angular momentum component along
    (sin(theta)cos(phi), sin(theta)sin(phi), cos(theta)).  Binomial weights are
    evaluated in log space, so large j does not overflow.
    """
    spin = Spin.coerce(j)
    if not (0.0 <= theta <= math.pi):
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    if not (-math.pi <= phi < math.pi):
        raise ValueError(f"phi must lie in [-pi, pi), got {phi}")
    dim = spin.dim
    tj = spin.twice_j
    cos_half = math.cos(theta / 2.0)
    sin_half = math.sin(theta / 2.0)
    amps = np.zeros(dim, dtype=complex)
    if sin_half == 0.0:
        amps[0] = 1.0
        return SpinState(spin, amps)
    # index i corresponds to m = j - i, so j+m = 2j-i and j-m = i
    i = np.arange(dim)
    log_binom = math.lgamma(tj + 1) - np.array(
        [math.lgamma(k + 1) + math.lgamma(tj - k + 1) for k in range(dim)]
    )
    log_mag = 0.5 * log_binom + (tj - i) * math.log(cos_half) + i * math.log(sin_half)
    amps = np.exp(log_mag) * np.exp(1j * phi * i)
    amps /= np.linalg.norm(amps)
    return SpinState(spin, amps)


def rotation_operator(j, n, phi: float, sense: str = "passive") -> UnitaryOperator:
    """exp(+i phi J_n) for a passive rotation, exp(-i phi J_n) for an active one.

    Built through the Hermitian eigendecomposition of J_n.
    """
    if sense not in ("passive", "active"):
        raise ValueError(f"sense must be 'passive' or 'active', got {sense!r}")
    ops = angular_momentum_ops(j)
    jn = j_along(ops, n)
    w, v = np.linalg.eigh(jn.matrix)
    sign = 1.0 if sense == "passive" else -1.0
    phases = np.exp(1j * sign * phi * w)
    return UnitaryOperator((v * phases) @ v.conj().T)


def operator_function(h, f, domain: tuple[float, float] | None = None,
                      clamp_tol: float = CLAMP_TOL) -> HermitianOperator:
    """Apply a real scalar function to a Hermitian operator via its eigenbasis.

    Eigenvalues within clamp_tol of the domain boundary are clipped into the
    domain; eigenvalues farther outside raise DomainError.
    """
    mat = _as_matrix(h)
    dev = np.max(np.abs(mat - mat.conj().T))
    if dev > HERMITIAN_TOL:
        raise ValueError(f"operator_function requires a Hermitian input, deviation {dev}")
    w, v = np.linalg.eigh(mat)
    if domain is not None:
        lo, hi = domain
        if np.any(w < lo - clamp_tol) or np.any(w > hi + clamp_tol):
            worst = w[np.argmax(np.maximum(lo - w, w - hi))]
            raise DomainError(f"eigenvalue {worst} outside domain [{lo}, {hi}]")
        w = np.clip(w, lo, hi)
    fw = np.asarray([f(x) for x in w], dtype=float)
    return HermitianOperator((v * fw) @ v.conj().T)


def cosine_operator(j, l) -> HermitianOperator:
    """J_l / sqrt(j(j+1)): the direction-cosine estimator along unit vector l.

    Its spectrum is {m / sqrt(j(j+1))}, strictly inside (-1, 1), and its
    expectation value on a coherent state along n is j (n.l) / sqrt(j(j+1)).
    """
    spin = Spin.coerce(j)
    ops = angular_momentum_ops(spin)
    jn = j_along(ops, l)
    return HermitianOperator(jn.matrix / math.sqrt(spin.j * (spin.j + 1.0)))


def apply_on_subsystem(state, op, slot: int, dims) -> np.ndarray:
    """Apply (I x ... x op x ... x I) |state> by strided contraction.

    The full Kronecker-product matrix is never materialized.  `state` is a
    joint vector whose length is the product of `dims`; a trailing batch axis
    (shape (N, k)) is also accepted.
    """
    mat = _as_matrix(op)
    state = np.asarray(state, dtype=complex)
    dims = tuple(int(d) for d in dims)
    total = math.prod(dims)
    if state.shape[0] != total:
        raise ValueError(f"state length {state.shape[0]} != product of dims {dims}")
    if not (0 <= slot < len(dims)):
        raise ValueError(f"slot {slot} out of range for {len(dims)} subsystems")
    if mat.shape != (dims[slot], dims[slot]):
        raise ValueError(f"operator shape {mat.shape} does not match dim {dims[slot]} of slot {slot}")
    tail = state.shape[1:]
    work = state.reshape(dims + tail)
    out = np.tensordot(mat, work, axes=([1], [slot]))
    out = np.moveaxis(out, 0, slot)
    return np.ascontiguousarray(out).reshape(state.shape)


def reduced_density(state, dims, keep: int) -> np.ndarray:
    """Reduced density matrix of subsystem `keep` from a pure joint state."""
    state = np.asarray(state, dtype=complex)
    dims = tuple(int(d) for d in dims)
    if state.shape != (math.prod(dims),):
        raise ValueError(f"state shape {state.shape} does not match dims {dims}")
    work = np.moveaxis(state.reshape(dims), keep, -1)
    x = work.reshape(-1, dims[keep])
    return x.T @ x.conj()
