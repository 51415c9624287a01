"""Worked frame-change scenarios: rotated, superposed, and entangled frames.

Each builder returns the input branch state seen from frame C; feeding it to
`branch_transform` produces the corresponding description from frame A.
"""
from __future__ import annotations

import math

import numpy as np

from .frames import EulerAngles, Frame, compose_proper
from .qrf import Branch, BranchState, SystemB, angles_to_direction

THETA_DEFAULT = math.pi / 3
PHI_DEFAULT = math.pi / 4
REL_PHASE_DEFAULT = math.pi / 2

# default frame for the rotated-frame scenario: a generic proper rotation
ROTATED_FRAME_ANGLES = EulerAngles(0.9, 1.2, -0.7)

_E1 = np.array([1.0, 0.0, 0.0])
_E2 = np.array([0.0, 1.0, 0.0])
_E3 = np.array([0.0, 0.0, 1.0])

# the two oppositely handed frames of the superposed/entangled scenarios
_FRAME_RIGHT = Frame(_E1, _E2, _E3)
_FRAME_SWAPPED = Frame(_E1, _E3, _E2)


def rotated_frame_example(theta: float = THETA_DEFAULT, phi: float = PHI_DEFAULT,
                          frame: Frame | None = None) -> BranchState:
    """Single proper branch: frame A rotated with respect to C, B a spin-1/2."""
    if frame is None:
        frame = Frame.from_rows(compose_proper(ROTATED_FRAME_ANGLES))
    system = SystemB.label(angles_to_direction(theta, phi), 0.5, 0.5)
    return BranchState((Branch(1.0, frame, system),), "C")


def superposed_frame_example(theta: float = THETA_DEFAULT, phi: float = PHI_DEFAULT,
                             rel_phase: float = REL_PHASE_DEFAULT) -> BranchState:
    """Frame A in an equal superposition of two oppositely handed orientations.

    The right-handed amplitude coincides with C's axes; the left-handed one has
    the y and z axes swapped.  B is a common spin-1/2 factor, so the input is a
    product state.
    """
    system = SystemB.label(angles_to_direction(theta, phi), 0.5, 0.5)
    amp = 1.0 / math.sqrt(2.0)
    return BranchState(
        (
            Branch(amp, _FRAME_RIGHT, system),
            Branch(amp * np.exp(1j * rel_phase), _FRAME_SWAPPED, system),
        ),
        "C",
    )


def entangled_frame_example(rel_phase: float = REL_PHASE_DEFAULT) -> BranchState:
    """Frame A entangled with B: each branch's B points along that branch's z axis."""
    amp = 1.0 / math.sqrt(2.0)
    return BranchState(
        (
            Branch(amp, _FRAME_RIGHT, SystemB.label(_E3, 0.5, 0.5)),
            Branch(amp * np.exp(1j * rel_phase), _FRAME_SWAPPED, SystemB.label(_E2, 0.5, 0.5)),
        ),
        "C",
    )


def build_example(name: str, theta: float = THETA_DEFAULT, phi: float = PHI_DEFAULT,
                  rel_phase: float = REL_PHASE_DEFAULT, frame: Frame | None = None) -> BranchState:
    if name == "a":
        return rotated_frame_example(theta, phi, frame)
    if name == "b":
        return superposed_frame_example(theta, phi, rel_phase)
    if name == "c":
        return entangled_frame_example(rel_phase)
    raise ValueError(f"unknown example {name!r} (expected a, b, or c)")
