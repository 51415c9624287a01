"""Command-line front end: state transforms, worked examples, convergence
tables, and invariance reports.

Exit codes: 0 success, 1 input error, 2 unsupported/domain error,
3 verification failure.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .examples import (
    PHI_DEFAULT,
    REL_PHASE_DEFAULT,
    THETA_DEFAULT,
    build_example,
)
from .frames import EulerAngles, Frame, compose_proper
from .qrf import (
    BranchState,
    UnsupportedReflectionError,
    branch_transform,
    convergence_study,
    euler_angle_operators,
    realize_finite_j,
    u_transform_finite_j,
)
from .rng import SplitMix64
from .spincore import DomainError, Spin, reduced_density
from .statefile import (
    StateFileError,
    dumps,
    fmt_float,
    loads,
    state_from_dict,
    state_to_dict,
    write_state,
)
from .symmetry import (
    NonInvariantHamiltonianError,
    SystemB,
    check_qrf_invariance,
    check_rotational_invariance,
    common_rotation,
    heisenberg_like_hamiltonian,
    single_axis_hamiltonian,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_DOMAIN = 2
EXIT_VERIFY = 3

SYMMETRY_COUPLINGS = (1.0, 0.7, 0.4)
SYMMETRY_THRESHOLD = 1e-8

# default frame for convergence runs: generic, away from gimbal lock and from
# the symmetry axes that make individual angle errors vanish identically
CONVERGE_FRAME_ANGLES = EulerAngles(0.4, 1.1, -0.6)


class CLIError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError(message, EXIT_INPUT)


def _load_frame_file(path) -> Frame:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = loads(fh.read())
    except OSError as exc:
        raise CLIError(f"cannot read frame file: {exc}", EXIT_INPUT) from None
    rows = data.get("frame") if isinstance(data, dict) else data
    try:
        rows = [float(x) for x in rows]
        if len(rows) != 9:
            raise ValueError("frame must hold 9 numbers (row-major f1 f2 f3)")
        return Frame.from_rows(np.array(rows).reshape(3, 3))
    except (TypeError, ValueError) as exc:
        raise CLIError(f"invalid frame file: {exc}", EXIT_INPUT) from None


def _render_state_text(doc: dict, lines: list[str], indent: str = "  ") -> None:
    lines.append(f"{indent}j = {doc['j']}")
    lines.append(f"{indent}perspective = {doc['perspective']}")
    for idx, br in enumerate(doc["branches"]):
        lines.append(f"{indent}branch {idx}: amp = ({br['amp'][0]}, {br['amp'][1]})")
        fr = br["frame"]
        for k in range(3):
            lines.append(f"{indent}  f{k + 1} = ({fr[3 * k]}, {fr[3 * k + 1]}, {fr[3 * k + 2]})")
        system = br["system"]
        if system["form"] == "label":
            lines.append(
                f"{indent}  B: label n = ({system['n'][0]}, {system['n'][1]}, {system['n'][2]})"
                f", m = {system['m']}, s = {system['s']}"
            )
        else:
            amps = "; ".join(f"({a[0]}, {a[1]})" for a in system["amps"])
            lines.append(f"{indent}  B: vector s = {system['s']}, amps = {amps}")


def cmd_transform(args, global_opts) -> int:
    try:
        with open(args.input, "r", encoding="utf-8") as fh:
            doc = loads(fh.read())
    except OSError as exc:
        raise CLIError(f"cannot read input: {exc}", EXIT_INPUT) from None
    warn = None if global_opts.quiet else lambda msg: print(f"warning: {msg}", file=sys.stderr)
    state, _ = state_from_dict(doc, warn=warn)
    out_state = branch_transform(state)
    extra = None
    if args.finite_j is not None:
        spin = Spin.coerce(args.finite_j)
        fidelity = _finite_j_fidelity(state, out_state, spin)
        extra = {"finite_j": {"j": spin.j, "b_fidelity": fidelity}}
    write_state(args.output, out_state, "infinite", extra=extra)
    return EXIT_OK


def _finite_j_fidelity(state: BranchState, out_state: BranchState, spin: Spin) -> float:
    """Uhlmann fidelity between the finite-j reduced B state and the
    branch-exact one."""
    if any(br.frame.chirality < 0 for br in state.branches):
        raise UnsupportedReflectionError(
            "finite-j comparison is not defined for improper branches"
        )
    spin_b = state.branches[0].system.spin
    joint = realize_finite_j(state, spin)
    ops = euler_angle_operators(spin)
    transformed = u_transform_finite_j(joint, ops, spin_b)
    d = spin.dim
    rho = reduced_density(transformed, (d, d, d, spin_b.dim), keep=3)
    sigma = _branch_reduced_density(out_state)
    return _uhlmann_fidelity(rho, sigma)


def _branch_reduced_density(state: BranchState) -> np.ndarray:
    spin_b = state.branches[0].system.spin
    groups: list[tuple[Frame, np.ndarray]] = []
    for br in state.branches:
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
    return rho / np.real(np.trace(rho))


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(mat)
    w = np.sqrt(np.maximum(w, 0.0))
    return (v * w) @ v.conj().T


def _uhlmann_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    root = _psd_sqrt(rho)
    inner = _psd_sqrt(root @ sigma @ root)
    return float(np.real(np.trace(inner)) ** 2)


def cmd_example(args, global_opts) -> int:
    frame = _load_frame_file(args.frame) if args.frame else None
    try:
        state = build_example(args.name, args.theta, args.phi, args.Phi, frame)
    except ValueError as exc:
        raise CLIError(str(exc), EXIT_INPUT) from None
    out_state = branch_transform(state)
    doc = {
        "example": args.name,
        "parameters": {"theta": float(args.theta), "phi": float(args.phi),
                       "Phi": float(args.Phi)},
        "input": state_to_dict(state, "infinite"),
        "output": state_to_dict(out_state, "infinite"),
    }
    if global_opts.format == "json":
        sys.stdout.write(dumps(doc))
    else:
        lines = [f"example {args.name}"]
        lines.append(
            f"parameters: theta = {fmt_float(args.theta)}, phi = {fmt_float(args.phi)}, "
            f"Phi = {fmt_float(args.Phi)}"
        )
        lines.append("input:")
        _render_state_text(doc["input"], lines)
        lines.append("output:")
        _render_state_text(doc["output"], lines)
        sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_converge(args, global_opts) -> int:
    try:
        j_values = [float(tok) for tok in args.j.split(",") if tok.strip()]
    except ValueError:
        raise CLIError(f"--j expects a comma-separated list of spins, got {args.j!r}") from None
    if not j_values:
        raise CLIError("--j list is empty")
    spins = []
    for jv in j_values:
        try:
            spin = Spin.coerce(jv)
        except ValueError as exc:
            raise CLIError(str(exc), EXIT_INPUT) from None
        if spin.twice_j < 1:
            raise CLIError(f"convergence requires j >= 1/2, got {jv}")
        spins.append(spin)
    frame = _load_frame_file(args.frame) if args.frame else Frame.from_rows(
        compose_proper(CONVERGE_FRAME_ANGLES)
    )
    rows = convergence_study(frame, args.theta, args.phi, spins)
    out = ["j,alpha_err,beta_err,gamma_err,cos_op_err,b_fidelity"]
    for row in rows:
        out.append(
            f"{row.j:g},{fmt_float(row.alpha_err)},{fmt_float(row.beta_err)},"
            f"{fmt_float(row.gamma_err)},{fmt_float(row.cos_op_err)},{fmt_float(row.b_fidelity)}"
        )
    sys.stdout.write("\n".join(out) + "\n")
    return EXIT_OK


def cmd_symmetry(args, global_opts) -> int:
    spin_a = Spin.coerce(args.j)
    spin_b = Spin.coerce(args.s)
    if args.break_invariance:
        ham = single_axis_hamiltonian(spin_a, spin_b)
    else:
        ham = heisenberg_like_hamiltonian(spin_a, spin_b, SYMMETRY_COUPLINGS)
    rng = SplitMix64(global_opts.seed)
    max_rotation = None
    max_diff = None
    rejected = None
    for _ in range(args.trials):
        axis = rng.unit_vector()
        angle = rng.uniform(0.0, math.pi)
        rot = common_rotation(spin_a, spin_b, axis, angle)
        dev = check_rotational_invariance(ham, rot)
        max_rotation = dev if max_rotation is None else max(max_rotation, dev)
        ket = rng.frame(proper=True)
        bra = rng.frame(proper=True)
        b_ket = SystemB.label(rng.unit_vector(), spin_b.j, spin_b)
        b_bra = SystemB.label(rng.unit_vector(), spin_b.j, spin_b)
        try:
            lhs, rhs = check_qrf_invariance(ham, ket, bra, (b_ket, b_bra))
        except NonInvariantHamiltonianError as exc:
            rejected = exc.deviation
            break
        diff = abs(lhs - rhs)
        max_diff = diff if max_diff is None else max(max_diff, diff)

    ok = rejected is None and (max_rotation is None or max_rotation < SYMMETRY_THRESHOLD) and (
        max_diff is None or max_diff < SYMMETRY_THRESHOLD
    )
    doc = {
        "j": spin_a.j,
        "s": spin_b.j,
        "trials": args.trials,
        "seed": global_opts.seed,
        "max_rotation_deviation": max_rotation,
        "max_qrf_element_diff": max_diff,
        "rejected_deviation": rejected,
        "pass": bool(ok),
    }
    if global_opts.format == "json":
        sys.stdout.write(dumps(doc))
    else:
        def show(x):
            return "null" if x is None else fmt_float(x)

        lines = [
            f"symmetry report (j = {spin_a.j:g}, s = {spin_b.j:g}, "
            f"trials = {args.trials}, seed = {global_opts.seed})"
        ]
        lines.append(f"max rotational-invariance deviation: {show(max_rotation)}")
        lines.append(f"max |LHS - RHS| matrix-element diff: {show(max_diff)}")
        if rejected is not None:
            lines.append(f"Hamiltonian rejected as non-invariant (deviation {show(rejected)})")
        lines.append(f"pass: {str(ok).lower()}")
        sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_VERIFY


def _add_global_flags(target, suppress: bool) -> None:
    # the subcommand copies use SUPPRESS defaults so a value given before the
    # subcommand is not clobbered when the subparser fills its namespace
    def dflt(value):
        return argparse.SUPPRESS if suppress else value

    target.add_argument("--format", choices=("json", "text"), default=dflt("json"),
                        help="output format for structured reports (default json)")
    target.add_argument("--seed", type=int, default=dflt(0),
                        help="seed for randomized trials")
    target.add_argument("--quiet", action="store_true", default=dflt(False),
                        help="suppress warnings")


def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    _add_global_flags(common, suppress=True)

    parser = _Parser(prog="spinqrf", description=__doc__)
    _add_global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p_transform = sub.add_parser("transform", parents=[common],
                                 help="transform a state file to the other frame")
    p_transform.add_argument("input")
    p_transform.add_argument("output")
    p_transform.add_argument("--finite-j", dest="finite_j", type=float, default=None,
                             help="also report finite-j reduced-B fidelity at this spin")

    p_example = sub.add_parser("example", parents=[common], help="emit a worked scenario and its transform")
    p_example.add_argument("name", choices=("a", "b", "c"))
    p_example.add_argument("--theta", type=float, default=THETA_DEFAULT)
    p_example.add_argument("--phi", type=float, default=PHI_DEFAULT)
    p_example.add_argument("--Phi", type=float, default=REL_PHASE_DEFAULT,
                           help="relative phase between superposed branches")
    p_example.add_argument("--frame", default=None,
                           help="frame file overriding the rotated-frame default (example a)")

    p_converge = sub.add_parser("converge", parents=[common], help="CSV convergence table over a list of spins")
    p_converge.add_argument("--j", required=True, help="comma-separated spins, e.g. 5,10,20")
    p_converge.add_argument("--theta", type=float, default=THETA_DEFAULT)
    p_converge.add_argument("--phi", type=float, default=PHI_DEFAULT)
    p_converge.add_argument("--frame", default=None, help="frame file (default: generic frame)")

    p_symmetry = sub.add_parser("symmetry", parents=[common], help="invariance report over seeded random trials")
    p_symmetry.add_argument("--j", type=float, default=1.0)
    p_symmetry.add_argument("--s", type=float, default=0.5)
    p_symmetry.add_argument("--trials", type=int, default=100)
    p_symmetry.add_argument("--break-invariance", action="store_true",
                            help=argparse.SUPPRESS)

    return parser


_COMMANDS = {
    "transform": cmd_transform,
    "example": cmd_example,
    "converge": cmd_converge,
    "symmetry": cmd_symmetry,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args, args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except StateFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DomainError, UnsupportedReflectionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NonInvariantHamiltonianError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
