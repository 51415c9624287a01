"""End-to-end CLI tests: golden files, exit codes, determinism."""
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

GOLDEN_DIR = Path(__file__).parent / "goldens"


def run_cli(*args, **kwargs):
    return subprocess.run(
        [sys.executable, "-m", "spinqrf.cli", *args],
        capture_output=True, text=True, **kwargs,
    )


class TestExampleGoldens:
    @pytest.mark.parametrize("name", ["a", "b", "c"])
    def test_matches_golden_byte_for_byte(self, name):
        result = run_cli("example", name)
        assert result.returncode == 0
        golden = (GOLDEN_DIR / f"example_{name}.json").read_text()
        assert result.stdout == golden

    def test_unknown_example_exits_1(self):
        result = run_cli("example", "z")
        assert result.returncode == 1

    def test_text_format(self):
        result = run_cli("example", "c", "--format", "text")
        assert result.returncode == 0
        assert result.stdout.startswith("example c")
        assert "branch 0" in result.stdout

    def test_example_b_theta_zero(self):
        result = run_cli("example", "b", "--theta", "0")
        doc = json.loads(result.stdout)
        branches = doc["output"]["branches"]
        np.testing.assert_allclose(branches[0]["system"]["n"], [0, 0, 1], atol=1e-12)
        np.testing.assert_allclose(branches[1]["system"]["n"], [0, 1, 0], atol=1e-12)

    def test_example_c_output_directions(self):
        result = run_cli("example", "c")
        doc = json.loads(result.stdout)
        for br in doc["output"]["branches"]:
            np.testing.assert_allclose(br["system"]["n"], [0, 0, 1], atol=1e-12)

    def test_example_a_canonical_frame_is_identity(self, tmp_path):
        frame_file = tmp_path / "canonical.json"
        frame_file.write_text(json.dumps({"frame": [1, 0, 0, 0, 1, 0, 0, 0, 1]}))
        result = run_cli("example", "a", "--frame", str(frame_file))
        doc = json.loads(result.stdout)
        assert doc["input"]["branches"][0]["frame"] == doc["output"]["branches"][0]["frame"]
        assert doc["input"]["branches"][0]["system"]["n"] == doc["output"]["branches"][0]["system"]["n"]


class TestTransform:
    def test_golden_roundtrip(self, tmp_path):
        out = tmp_path / "out.json"
        result = run_cli("transform", str(GOLDEN_DIR / "example_a_input.json"), str(out))
        assert result.returncode == 0
        assert out.read_text() == (GOLDEN_DIR / "example_a_transformed.json").read_text()

    def test_golden_output_reparses_unchanged(self, tmp_path):
        # parse -> transform -> serialize on the golden input reproduces the
        # golden output; re-serializing the parsed golden output is stable
        from spinqrf.statefile import dumps, state_from_dict, state_to_dict

        golden_out = (GOLDEN_DIR / "example_a_transformed.json").read_text()
        state, j = state_from_dict(json.loads(golden_out))
        assert dumps(state_to_dict(state, j)) == golden_out

    @pytest.mark.parametrize("name", ["a", "b", "c"])
    def test_example_golden_states_reserialize_stably(self, name):
        from spinqrf.statefile import dumps, state_from_dict, state_to_dict

        doc = json.loads((GOLDEN_DIR / f"example_{name}.json").read_text())
        for part in ("input", "output"):
            state, j = state_from_dict(doc[part])
            reserialized = json.loads(dumps(state_to_dict(state, j)))
            assert reserialized == doc[part]

    def test_identity_frame_unchanged(self, tmp_path):
        doc = {
            "j": "infinite",
            "perspective": "C",
            "branches": [
                {
                    "amp": [1.0, 0.0],
                    "frame": [1, 0, 0, 0, 1, 0, 0, 0, 1],
                    "system": {"form": "label", "n": [0.0, 0.0, 1.0], "m": 0.5, "s": 0.5},
                }
            ],
        }
        src = tmp_path / "in.json"
        src.write_text(json.dumps(doc))
        out = tmp_path / "out.json"
        assert run_cli("transform", str(src), str(out)).returncode == 0
        parsed = json.loads(out.read_text())
        np.testing.assert_allclose(
            np.array(parsed["branches"][0]["frame"]).reshape(3, 3), np.eye(3), atol=1e-15
        )
        np.testing.assert_allclose(parsed["branches"][0]["system"]["n"], [0, 0, 1], atol=1e-15)

    def test_malformed_frame_exits_1_naming_branch(self, tmp_path):
        doc = json.loads((GOLDEN_DIR / "example_a_input.json").read_text())
        doc["branches"][0]["frame"][0] = 3.0
        src = tmp_path / "bad.json"
        src.write_text(json.dumps(doc))
        result = run_cli("transform", str(src), str(tmp_path / "out.json"))
        assert result.returncode == 1
        assert "branch 0" in result.stderr

    def test_improper_vector_form_exits_2(self, tmp_path):
        doc = {
            "j": "infinite",
            "perspective": "C",
            "branches": [
                {
                    "amp": [1.0, 0.0],
                    "frame": [1, 0, 0, 0, 0, 1, 0, 1, 0],
                    "system": {"form": "vector", "s": 0.5, "amps": [[1.0, 0.0], [0.0, 0.0]]},
                }
            ],
        }
        src = tmp_path / "improper.json"
        src.write_text(json.dumps(doc))
        result = run_cli("transform", str(src), str(tmp_path / "out.json"))
        assert result.returncode == 2

    def test_finite_j_fidelity_reported(self, tmp_path):
        out = tmp_path / "out.json"
        result = run_cli(
            "transform", str(GOLDEN_DIR / "example_a_input.json"), str(out), "--finite-j", "6"
        )
        assert result.returncode == 0
        doc = json.loads(out.read_text())
        assert 0.9 < doc["finite_j"]["b_fidelity"] < 1.0
        assert doc["finite_j"]["j"] == 6.0

    def test_missing_input_exits_1(self, tmp_path):
        result = run_cli("transform", str(tmp_path / "nope.json"), str(tmp_path / "out.json"))
        assert result.returncode == 1


class TestConverge:
    def test_csv_shape_and_monotonic_beta(self):
        result = run_cli("converge", "--j", "5,10,20")
        assert result.returncode == 0
        lines = result.stdout.strip().split("\n")
        assert lines[0] == "j,alpha_err,beta_err,gamma_err,cos_op_err,b_fidelity"
        assert len(lines) == 4
        betas = [float(line.split(",")[2]) for line in lines[1:]]
        assert betas[0] > betas[1] > betas[2]

    def test_cos_op_err_column_formula(self):
        theta = math.pi / 3
        result = run_cli("converge", "--j", "2,8", "--theta", str(theta))
        rows = [line.split(",") for line in result.stdout.strip().split("\n")[1:]]
        for row in rows:
            jv = float(row[0])
            expected = math.cos(theta) * (1.0 - jv / math.sqrt(jv * (jv + 1)))
            assert abs(float(row[4]) - expected) < 1e-12

    def test_smallest_spin_accepted(self):
        result = run_cli("converge", "--j", "0.5")
        assert result.returncode == 0
        row = result.stdout.strip().split("\n")[1].split(",")
        assert float(row[4]) > 0.01  # large error, no crash

    def test_gimbal_frame_exits_2(self, tmp_path):
        frame_file = tmp_path / "canon.json"
        frame_file.write_text(json.dumps({"frame": [1, 0, 0, 0, 1, 0, 0, 0, 1]}))
        result = run_cli("converge", "--j", "2", "--frame", str(frame_file))
        assert result.returncode == 2

    def test_bad_j_list_exits_1(self):
        assert run_cli("converge", "--j", "1,zebra").returncode == 1
        assert run_cli("converge", "--j", "0.3").returncode == 1


class TestSymmetry:
    def test_seed_7_passes(self):
        result = run_cli("symmetry", "--j", "1", "--s", "0.5", "--trials", "20", "--seed", "7")
        assert result.returncode == 0
        doc = json.loads(result.stdout)
        assert doc["pass"] is True
        assert float(doc["max_rotation_deviation"]) < 1e-8
        assert float(doc["max_qrf_element_diff"]) < 1e-8

    def test_break_invariance_exits_3(self):
        result = run_cli("symmetry", "--trials", "2", "--break-invariance")
        assert result.returncode == 3
        doc = json.loads(result.stdout)
        assert doc["pass"] is False
        assert float(doc["rejected_deviation"]) > 0.1

    def test_zero_trials_empty_report(self):
        result = run_cli("symmetry", "--trials", "0")
        assert result.returncode == 0
        doc = json.loads(result.stdout)
        assert doc["max_rotation_deviation"] is None
        assert doc["pass"] is True

    def test_seeded_determinism(self):
        a = run_cli("symmetry", "--trials", "5", "--seed", "123")
        b = run_cli("symmetry", "--trials", "5", "--seed", "123")
        assert a.stdout == b.stdout
        c = run_cli("--seed", "123", "symmetry", "--trials", "5")
        assert c.stdout == a.stdout

    def test_text_format(self):
        result = run_cli("symmetry", "--trials", "1", "--format", "text")
        assert result.returncode == 0
        assert result.stdout.startswith("symmetry report")
