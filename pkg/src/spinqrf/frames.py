"""Classical O(3) frame mathematics.

Rotation matrices between orthonormal frames, zxz Euler-angle extraction with
a gimbal-lock fallback, and proper/improper recomposition.  Frames are triples
of unit vectors {f1, f2, f3}; the frame "we are in" always carries the
canonical axes e1 = (1,0,0), e2 = (0,1,0), e3 = (0,0,1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ORTHONORMAL_TOL = 1e-9
GIMBAL_THRESHOLD = 1e-10

_E1 = np.array([1.0, 0.0, 0.0])
_E2 = np.array([0.0, 1.0, 0.0])
_E3 = np.array([0.0, 0.0, 1.0])


def _sign_neg0(x: float) -> float:
    """Sign with the convention sign(0) = -1."""
    return 1.0 if x > 0.0 else -1.0


def _wrap_half_open(x: float) -> float:
    """Fold an angle into [-pi, pi)."""
    x = math.remainder(x, 2.0 * math.pi)
    if x >= math.pi:
        x -= 2.0 * math.pi
    return x + 0.0  # normalize -0.0


@dataclass(frozen=True)
class Frame:
    """Three pairwise-orthonormal unit vectors; chirality is det[f1 f2 f3]."""

    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray

    def __post_init__(self):
        vecs = []
        for name in ("f1", "f2", "f3"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,):
                raise ValueError(f"{name} must be a 3-vector, got shape {v.shape}")
            v = v.copy()
            v.flags.writeable = False
            object.__setattr__(self, name, v)
            vecs.append(v)
        gram = np.array([[float(a @ b) for b in vecs] for a in vecs])
        dev = np.max(np.abs(gram - np.eye(3)))
        if dev > ORTHONORMAL_TOL:
            raise ValueError(f"frame vectors not orthonormal (deviation {dev})")
        det = float(np.linalg.det(np.column_stack(vecs)))
        if min(abs(det - 1.0), abs(det + 1.0)) > ORTHONORMAL_TOL:
            raise ValueError(f"frame determinant {det} is neither +1 nor -1")

    @classmethod
    def canonical(cls) -> "Frame":
        return cls(_E1, _E2, _E3)

    @classmethod
    def from_rows(cls, rows) -> "Frame":
        rows = np.asarray(rows, dtype=float).reshape(3, 3)
        return cls(rows[0], rows[1], rows[2])

    @classmethod
    def from_columns(cls, mat) -> "Frame":
        mat = np.asarray(mat, dtype=float)
        return cls(mat[:, 0], mat[:, 1], mat[:, 2])

    @property
    def chirality(self) -> int:
        det = float(np.linalg.det(np.column_stack([self.f1, self.f2, self.f3])))
        return 1 if det > 0.0 else -1

    def vectors(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.f1, self.f2, self.f3

    def close_to(self, other: "Frame", tol: float = ORTHONORMAL_TOL) -> bool:
        return all(
            np.max(np.abs(a - b)) <= tol
            for a, b in zip(self.vectors(), other.vectors())
        )


@dataclass(frozen=True)
class EulerAngles:
    """zxz Euler angles with alpha, gamma in [-pi, pi) and beta in [0, pi].

    alpha and gamma are folded into range on construction; beta must already
    lie in [0, pi] (arccos output does).
    """

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", _wrap_half_open(float(self.alpha)))
        object.__setattr__(self, "gamma", _wrap_half_open(float(self.gamma)))
        beta = float(self.beta) + 0.0
        if not (0.0 <= beta <= math.pi):
            raise ValueError(f"beta must lie in [0, pi], got {beta}")
        object.__setattr__(self, "beta", beta)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)


def matrix_from_frames(frame: Frame) -> np.ndarray:
    """Matrix taking a vector's components in this frame's parent to components
    in the frame itself: row i holds the components of f_i, so M f_i = e_i."""
    return np.vstack([frame.f1, frame.f2, frame.f3])


def gimbal_euler(frame: Frame) -> EulerAngles:
    """Fallback Euler angles for frames with f3 . e3 = +-1.

    alpha = 0, beta = (1 - f3.e3) pi/2, and gamma carries the in-plane
    rotation, with sign(0) = -1.
    """
    c3 = float(frame.f3 @ _E3)
    alpha = 0.0
    beta = (1.0 - c3) * math.pi / 2.0
    arg = max(-1.0, min(1.0, c3 * float(frame.f2 @ _E2)))
    gamma = _sign_neg0(c3 * float(frame.f1 @ _E2)) * math.acos(arg)
    return EulerAngles(alpha, min(max(beta, 0.0), math.pi), gamma)


def euler_from_frame(frame: Frame) -> EulerAngles:
    """zxz Euler angles of a frame, with sign(0) = -1.

    Routes to `gimbal_euler` when 1 - (f3 . e3)^2 falls at or below the gimbal
    threshold, so callers never see the degenerate division.
    """
    c3 = float(frame.f3 @ _E3)
    denom_sq = 1.0 - c3 * c3
    if denom_sq <= GIMBAL_THRESHOLD:
        return gimbal_euler(frame)
    denom = math.sqrt(denom_sq)
    arg_a = max(-1.0, min(1.0, -float(frame.f3 @ _E2) / denom))
    alpha = _sign_neg0(float(frame.f3 @ _E1)) * math.acos(arg_a)
    beta = math.acos(max(-1.0, min(1.0, c3)))
    arg_g = max(-1.0, min(1.0, float(frame.f2 @ _E3) / denom))
    gamma = _sign_neg0(float(frame.f1 @ _E3)) * math.acos(arg_g)
    return EulerAngles(alpha, beta, gamma)


def _rz(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def _rx_block(beta: float, reflect: bool) -> np.ndarray:
    c, s = math.cos(beta), math.sin(beta)
    first = -1.0 if reflect else 1.0
    return np.array([[first, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])


def compose_proper(e: EulerAngles) -> np.ndarray:
    """Rz(gamma) . Rx(beta) . Rz(alpha); determinant +1."""
    return _rz(e.gamma) @ _rx_block(e.beta, reflect=False) @ _rz(e.alpha)


def compose_improper(e: EulerAngles) -> np.ndarray:
    """Rz(gamma) . [reflection along e1 combined with Rx(beta)] . Rz(alpha);
    determinant -1."""
    return _rz(e.gamma) @ _rx_block(e.beta, reflect=True) @ _rz(e.alpha)


def rotation_about(axis, angle: float) -> np.ndarray:
    """Active rotation matrix (Rodrigues) by `angle` about unit vector `axis`."""
    axis = np.asarray(axis, dtype=float)
    if abs(np.linalg.norm(axis) - 1.0) > ORTHONORMAL_TOL:
        raise ValueError("rotation axis must be a unit vector")
    x, y, z = axis
    k = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)


def axis_angle_from_matrix(mat) -> tuple[np.ndarray, float]:
    """Axis and angle of a proper rotation matrix in the active convention."""
    mat = np.asarray(mat, dtype=float)
    if np.max(np.abs(mat.T @ mat - np.eye(3))) > 1e-9 or np.linalg.det(mat) < 0.0:
        raise ValueError("expected a proper orthogonal matrix")
    cos_angle = max(-1.0, min(1.0, (np.trace(mat) - 1.0) / 2.0))
    angle = math.acos(cos_angle)
    if angle < 1e-12:
        return np.array([0.0, 0.0, 1.0]), 0.0
    if math.pi - angle < 1e-6:
        # near angle pi the skew part vanishes; use M + I column structure
        b = (mat + np.eye(3)) / 2.0
        axis = np.sqrt(np.maximum(np.diag(b), 0.0))
        k = int(np.argmax(axis))
        axis = b[:, k] / axis[k]
        return axis / np.linalg.norm(axis), angle
    axis = np.array([mat[2, 1] - mat[1, 2], mat[0, 2] - mat[2, 0], mat[1, 0] - mat[0, 1]])
    return axis / (2.0 * math.sin(angle)), angle
