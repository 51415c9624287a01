"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.  Thresholds marked "calibrated" were frozen from oracle runs of the
finite-j harness and must not drift.
"""
import json
import math
import subprocess
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from spinqrf.examples import build_example
from spinqrf.frames import (
    EulerAngles,
    Frame,
    compose_improper,
    compose_proper,
    euler_from_frame,
    matrix_from_frames,
)
from spinqrf.qrf import (
    Branch,
    BranchState,
    SystemB,
    angles_to_direction,
    branch_transform,
    check_nonincreasing,
    convergence_study,
    entanglement_diagnostic,
    euler_angle_operators,
    realize_finite_j,
    u_transform_finite_j,
)
from spinqrf.rng import SplitMix64
from spinqrf.spincore import Spin, cosine_operator, reduced_density, scs
from spinqrf.symmetry import (
    check_qrf_invariance,
    check_rotational_invariance,
    common_rotation,
    heisenberg_like_hamiltonian,
    single_axis_hamiltonian,
)

from test_qrf import paper_rotated_outputs

GOLDEN_DIR = Path(__file__).parent / "goldens"
E1, E2, E3 = np.eye(3)

# calibrated constants (frozen from the oracle runs)
BETA_ERR_J40_THRESHOLD = 1e-12   # observed ~1e-16: symmetric frame, exact expectation
FIDELITY_JSTAR = 24              # smallest j in the ladder with fidelity > 0.99


@contextmanager
def criterion(num: int, name: str):
    ok = False
    try:
        yield
        ok = True
    finally:
        print(f"ACCEPTANCE {num:02d} {name}: {'PASS' if ok else 'FAIL'}")


def test_criterion_01_rotated_frame_closed_forms():
    with criterion(1, "rotated-frame closed forms"):
        rng = SplitMix64(1001)
        start = time.time()
        for _ in range(100):
            e = rng.euler_angles()
            theta = math.acos(1 - 2 * rng.random())
            phi = rng.uniform(-math.pi, math.pi)
            frame = Frame.from_rows(compose_proper(e))
            state = BranchState(
                (Branch(1.0, frame, SystemB.label(angles_to_direction(theta, phi), 0.5, 0.5)),)
            )
            br = branch_transform(state).branches[0]
            k1, k2, k3, n_new = paper_rotated_outputs(e.alpha, e.beta, e.gamma, theta, phi)
            assert np.max(np.abs(br.frame.f1 - k1)) < 1e-10
            assert np.max(np.abs(br.frame.f2 - k2)) < 1e-10
            assert np.max(np.abs(br.frame.f3 - k3)) < 1e-10
            assert np.max(np.abs(br.system.n - n_new)) < 1e-10
        assert time.time() - start < 1.0


def test_criterion_02_superposed_frames():
    with criterion(2, "superposed frames entangle B"):
        theta, phi, rel = math.pi / 3, math.pi / 4, 1.3
        state = build_example("b", theta, phi, rel)
        assert entanglement_diagnostic(state) < 1e-12
        out = branch_transform(state)
        br1, br2 = out.branches
        assert np.max(np.abs(np.vstack(br1.frame.vectors()) - np.eye(3))) < 1e-12
        assert np.max(np.abs(np.vstack(br2.frame.vectors()) - np.array([E1, E3, E2]))) < 1e-12
        n1 = angles_to_direction(theta, phi)
        n2 = np.array([math.sin(theta) * math.cos(phi), math.cos(theta),
                       math.sin(theta) * math.sin(phi)])
        assert np.max(np.abs(br1.system.n - n1)) < 1e-12
        assert np.max(np.abs(br2.system.n - n2)) < 1e-12
        assert abs(br2.amplitude / br1.amplitude - np.exp(1j * rel)) < 1e-12
        assert entanglement_diagnostic(out) > 1e-3
        e2nd = euler_from_frame(Frame(E1, E3, E2))
        assert np.max(np.abs(np.array(e2nd.as_tuple()) - [-math.pi, math.pi / 2, 0.0])) < 1e-12


def test_criterion_03_entangled_frames_factorize():
    with criterion(3, "entangled frames factorize B"):
        state = build_example("c", rel_phase=0.8)
        assert entanglement_diagnostic(state) > 0.1
        out = branch_transform(state)
        for br in out.branches:
            assert np.max(np.abs(br.system.n - E3)) < 1e-12
            assert br.system.m == 0.5
        assert entanglement_diagnostic(out) < 1e-12


def test_criterion_04_cosine_operator_limit():
    with criterion(4, "direction-cosine expectation and 1/j decay"):
        rng = SplitMix64(1004)
        pairs = [(rng.unit_vector(), rng.unit_vector()) for _ in range(50)]
        for jv in (0.5, 1, 5, 20):
            scale = jv / math.sqrt(jv * (jv + 1))
            for n, l in pairs:
                theta = math.acos(max(-1.0, min(1.0, n[2])))
                phi = math.atan2(n[1], n[0])
                if phi >= math.pi:
                    phi -= 2 * math.pi
                val = scs(jv, theta, phi).expectation(cosine_operator(jv, l)).real
                assert abs(val - scale * float(n @ l)) < 1e-10
        # decay toward n.l: same pairs at each j so the prefactor cancels;
        # the 1/j law is asymptotic, so the smallest spin is left out
        js = [1.0, 5.0, 20.0]
        devs = []
        for jv in js:
            acc = 0.0
            for n, l in pairs:
                theta = math.acos(max(-1.0, min(1.0, n[2])))
                phi = math.atan2(n[1], n[0])
                if phi >= math.pi:
                    phi -= 2 * math.pi
                val = scs(jv, theta, phi).expectation(cosine_operator(jv, l)).real
                acc += abs(val - float(n @ l))
            devs.append(acc / len(pairs))
        slope = np.polyfit(np.log(js), np.log(devs), 1)[0]
        assert -1.2 <= slope <= -0.8


def test_criterion_05_euler_operator_convergence():
    with criterion(5, "Euler-operator expectations converge"):
        frame = Frame(E1, E3, -E2)
        assert euler_from_frame(frame).as_tuple() == (0.0, math.pi / 2, 0.0)
        start = time.time()
        rows = convergence_study(frame, math.pi / 3, math.pi / 4, [5, 10, 20, 40])
        elapsed = time.time() - start
        for field in ("alpha_err", "beta_err", "gamma_err"):
            assert check_nonincreasing([getattr(r, field) for r in rows]), field
        beta40 = rows[-1].beta_err
        assert beta40 < BETA_ERR_J40_THRESHOLD
        assert beta40 < 0.1
        assert elapsed < 300.0


def test_criterion_06_finite_j_matches_branch_exact():
    with criterion(6, "finite-j unitary matches branch-exact B"):
        frame = Frame(E1, E3, -E2)
        state = BranchState((Branch(1.0, frame, SystemB.label(E3, 0.5, 0.5)),))
        b_exact = branch_transform(state).branches[0].system.to_vector()
        fids = {}
        for jv in (3, 6, 12, FIDELITY_JSTAR):
            spin = Spin.coerce(jv)
            joint = realize_finite_j(state, spin)
            out = u_transform_finite_j(joint, euler_angle_operators(spin), 0.5)
            rho = reduced_density(out, (spin.dim,) * 3 + (2,), keep=3)
            fids[jv] = float(np.real(np.vdot(b_exact, rho @ b_exact)))
        assert fids[3] < fids[6] < fids[12]
        assert fids[FIDELITY_JSTAR] > 0.99
        # unitarity at j = 2
        rng = np.random.default_rng(1006)
        ops = euler_angle_operators(2)
        worst = 0.0
        for _ in range(50):
            v = rng.normal(size=250) + 1j * rng.normal(size=250)
            v /= np.linalg.norm(v)
            worst = max(worst, abs(np.linalg.norm(u_transform_finite_j(v, ops, 0.5)) - 1.0))
        assert worst < 1e-10


def test_criterion_07_euler_roundtrips():
    with criterion(7, "Euler roundtrips proper and improper"):
        start = time.time()
        rng = SplitMix64(1007)
        for proper, compose in ((True, compose_proper), (False, compose_improper)):
            for _ in range(1000):
                f = rng.frame(proper=proper)
                m = compose(euler_from_frame(f))
                assert np.max(np.abs(m - matrix_from_frames(f))) < 1e-10
        # gimbal-branch cases: aligned and flipped f3, both chiralities
        gimbal_cases = [
            Frame.canonical(),
            Frame.from_rows(compose_proper(EulerAngles(0.0, 0.0, 2.2))),
            Frame(E1, -E2, -E3),
            Frame(E2, E1, E3),
            Frame(E1, E2, -E3),
            Frame(-E2, E1, -E3),
        ]
        for f in gimbal_cases:
            compose = compose_proper if f.chirality > 0 else compose_improper
            m = compose(euler_from_frame(f))
            assert np.max(np.abs(m - matrix_from_frames(f))) < 1e-10
        assert time.time() - start < 1.0


def test_criterion_08_hamiltonian_invariance():
    with criterion(8, "Hamiltonian invariance under frame changes"):
        start = time.time()
        ham = heisenberg_like_hamiltonian(1, 0.5, (1.0, 0.7, 0.4))
        assert ham.matrix.shape == (54, 54)
        rng = SplitMix64(1008)
        worst_rot = 0.0
        for _ in range(100):
            rot = common_rotation(1, 0.5, rng.unit_vector(), rng.uniform(0.0, math.pi))
            worst_rot = max(worst_rot, check_rotational_invariance(ham, rot))
        assert worst_rot < 1e-10
        worst_diff = 0.0
        for _ in range(100):
            ket, bra = rng.frame(), rng.frame()
            b_ket = SystemB.label(rng.unit_vector(), 0.5, 0.5)
            b_bra = SystemB.label(rng.unit_vector(), 0.5, 0.5)
            lhs, rhs = check_qrf_invariance(ham, ket, bra, (b_ket, b_bra))
            worst_diff = max(worst_diff, abs(lhs - rhs))
        assert worst_diff < 1e-10
        # negative control fails both checks by a wide margin
        control = single_axis_hamiltonian(1, 0.5)
        rot = common_rotation(1, 0.5, E1, 0.9)
        assert check_rotational_invariance(control, rot) > 0.1
        try:
            check_qrf_invariance(control, rng.frame(), rng.frame(), (b_ket, b_bra))
            raise AssertionError("control Hamiltonian was not rejected")
        except Exception as exc:
            assert getattr(exc, "deviation", 0.0) > 0.1
        assert time.time() - start < 30.0


def test_criterion_09_gaussian_limit():
    with criterion(9, "coherent-state m-distribution Gaussian limit"):
        theta = math.pi / 3
        tvs = []
        for jv in (8, 32, 128):
            st = scs(jv, theta, 0.0)
            p = np.abs(st.amplitudes) ** 2
            m = Spin.coerce(jv).m_values()
            mean = float(p @ m)
            var = float(p @ m**2) - mean**2
            assert abs(mean - jv * math.cos(theta)) < 1e-9
            assert abs(var - (jv / 2) * math.sin(theta) ** 2) < 1e-9
            mu = jv * math.cos(theta)
            sigma = math.sqrt(jv / 2) * math.sin(theta)
            q = np.exp(-0.5 * ((m - mu) / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
            tvs.append(0.5 * float(np.sum(np.abs(p - q))))
        assert tvs[0] > tvs[1] > tvs[2]


def _run_cli(*args, **kwargs):
    return subprocess.run(
        [sys.executable, "-m", "spinqrf.cli", *args], capture_output=True, text=True, **kwargs
    )


def test_criterion_10_cli_determinism(tmp_path):
    with criterion(10, "CLI goldens, convergence CSV, symmetry gate"):
        for name in ("a", "b", "c"):
            result = _run_cli("example", name)
            assert result.returncode == 0
            assert result.stdout == (GOLDEN_DIR / f"example_{name}.json").read_text()
        # convergence CSV at the calibrated frame: criteria 4 and 5 columns
        frame_file = tmp_path / "frame.json"
        frame_file.write_text(json.dumps({"frame": [1, 0, 0, 0, 0, 1, 0, -1, 0]}))
        theta = math.pi / 3
        result = _run_cli("converge", "--j", "5,10,20,40", "--theta", str(theta),
                          "--frame", str(frame_file))
        assert result.returncode == 0
        lines = result.stdout.strip().split("\n")
        assert lines[0] == "j,alpha_err,beta_err,gamma_err,cos_op_err,b_fidelity"
        rows = [[float(x) for x in line.split(",")] for line in lines[1:]]
        for col in (1, 2, 3):
            assert check_nonincreasing([r[col] for r in rows])
        assert rows[-1][2] < BETA_ERR_J40_THRESHOLD
        cos_errs = []
        for r in rows:
            expected = math.cos(theta) * (1.0 - r[0] / math.sqrt(r[0] * (r[0] + 1)))
            assert abs(r[4] - expected) < 1e-12
            cos_errs.append(abs(r[4]))
        slope = np.polyfit(np.log([r[0] for r in rows]), np.log(cos_errs), 1)[0]
        assert -1.2 <= slope <= -0.8
        fs_angles = [math.acos(math.sqrt(r[5])) for r in rows]
        fs_slope = np.polyfit(np.log([r[0] for r in rows]), np.log(fs_angles), 1)[0]
        assert -0.8 <= fs_slope <= -0.3
        # symmetry gate
        result = _run_cli("symmetry", "--seed", "7", "--trials", "100")
        assert result.returncode == 0
        # determinism: repeated run byte-identical
        again = _run_cli("symmetry", "--seed", "7", "--trials", "100")
        assert again.stdout == result.stdout
