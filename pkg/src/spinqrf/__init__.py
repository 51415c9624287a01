"""Quantum reference frames for spin.

Frames are triples of spin coherent states; frame changes act branch by branch
with classical Euler angles in the infinite-spin limit, and as operator-valued
Euler angles at finite spin.  See the README for the command-line interface.
"""

from .frames import (
    EulerAngles,
    Frame,
    compose_improper,
    compose_proper,
    euler_from_frame,
    gimbal_euler,
    matrix_from_frames,
    rotation_about,
)
from .qrf import (
    Branch,
    BranchState,
    ConvergenceRow,
    EulerAngleOperators,
    SystemB,
    UnsupportedReflectionError,
    branch_transform,
    check_nonincreasing,
    convergence_study,
    entanglement_diagnostic,
    euler_angle_operators,
    realize_finite_j,
    scalar_euler_unitary,
    u_transform_finite_j,
)
from .spincore import (
    DomainError,
    HermitianOperator,
    Spin,
    SpinState,
    UnitaryOperator,
    angular_momentum_ops,
    apply_on_subsystem,
    cosine_operator,
    j_along,
    operator_function,
    reduced_density,
    rotation_operator,
    scs,
)
from .symmetry import (
    CommonRotation,
    JointHamiltonian,
    NonInvariantHamiltonianError,
    check_qrf_invariance,
    check_rotational_invariance,
    common_rotation,
    heisenberg_like_hamiltonian,
    single_axis_hamiltonian,
)

__version__ = "0.1.0"
