import json
from pathlib import Path

import numpy as np
import pytest

from qhsynth.cli import main
from qhsynth.cnum import matrix_from_json, matrix_to_json, max_norm
from qhsynth.gates import qft_matrix

DATA = Path(__file__).resolve().parent.parent / "data"


def write_matrix(path, m):
    path.write_text(json.dumps(matrix_to_json(np.asarray(m, dtype=complex))))
    return str(path)


def load(path):
    return json.loads(Path(path).read_text())


class TestDecompose:
    def test_identity(self, tmp_path, capsys):
        src = write_matrix(tmp_path / "i3.json", np.eye(3))
        out = tmp_path / "d.json"
        assert main(["decompose", src, "--out", str(out)]) == 0
        d = load(out)
        assert d["gate"]["phases"] == [0.0, 0.0, 0.0]
        assert "residual (max-norm): 0.000e+00" in capsys.readouterr().out
        manifest = load(str(out) + ".manifest.json")
        assert manifest["command"] == "decompose"
        assert src in manifest["inputs"]

    @pytest.mark.parametrize("mode", ["standard", "generalized"])
    def test_su3_example(self, tmp_path, mode):
        out = tmp_path / "su3.json"
        args = ["decompose", str(DATA / "su3_example.json"), "--mode", mode, "--tol", "2e-3"]
        assert main(args + ["--out", str(out)]) == 0
        verify = ["verify", str(out), str(DATA / f"su3_{mode}_reference.json")]
        if mode == "generalized":
            # the printed second vector does not match its own matrix
            assert main(verify) == 2
            verify.append("--phases-only")
        assert main(verify) == 0

    def test_su3_example_default_tolerance(self, tmp_path, capsys):
        out = tmp_path / "su3.json"
        assert main(["decompose", str(DATA / "su3_example.json"), "--out", str(out)]) == 1
        assert "unitarity check failed" in capsys.readouterr().err

    def test_non_unitary(self, tmp_path, capsys):
        src = write_matrix(tmp_path / "bad.json", [[1, 1], [0, 1]])
        assert main(["decompose", src, "--out", str(tmp_path / "d.json")]) == 1
        assert "unitarity check failed" in capsys.readouterr().err

    def test_malformed_json(self, tmp_path, capsys):
        src = tmp_path / "bad.json"
        src.write_text("{not json")
        assert main(["decompose", str(src), "--out", str(tmp_path / "d.json")]) == 1
        assert "not valid JSON" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["decompose", str(tmp_path / "nope.json"), "--out", str(tmp_path / "d.json")]) == 1

    def test_bad_flag(self):
        assert main(["decompose", "--mode", "qr"]) == 1


class TestQft:
    def test_n2(self, tmp_path):
        assert main(["qft", "2", "--out", str(tmp_path)]) == 0
        d = load(tmp_path / "qft2_generalized.json")
        assert sum(f["phi"] != 0 for f in d["factors"]) == 1
        report = load(tmp_path / "qft2_generalized_report.json")
        assert report["fixture"]["products_equal"]
        m = matrix_from_json(load(tmp_path / "qft2_matrix.json"))
        assert max_norm(m - qft_matrix(2)) < 1e-15

    def test_n4_fixture_two_factors(self, tmp_path):
        assert main(["qft", "4", "--mode", "generalized", "--out", str(tmp_path)]) == 0
        fixture = load(tmp_path / "qft4_generalized_fixture.json")
        assert sum(f["phi"] != 0 for f in fixture["factors"]) == 2

    def test_n4_standard(self, tmp_path):
        assert main(["qft", "4", "--mode", "standard", "--out", str(tmp_path)]) == 0

    def test_n5_no_fixture(self, tmp_path):
        assert main(["qft", "5", "--out", str(tmp_path)]) == 0
        assert not (tmp_path / "qft5_generalized_fixture.json").exists()
        assert "fixture" not in load(tmp_path / "qft5_generalized_report.json")

    def test_n0(self, tmp_path):
        assert main(["qft", "0", "--out", str(tmp_path)]) == 1


def pulses(tmp_path, decomposition, *flags):
    out = tmp_path / "schedule.json"
    code = main(["pulses", str(decomposition), "--out", str(out), *flags])
    return code, out


class TestPulses:
    def test_qft3_generalized(self, tmp_path, capsys):
        main(["qft", "3", "--out", str(tmp_path)])
        code, out = pulses(tmp_path, tmp_path / "qft3_generalized_fixture.json")
        assert code == 0
        steps = load(out)["steps"]
        assert [s["tau"] for s in steps] == [-5.0, 5.0]
        by_factor = {s["factor"]: s for s in steps}
        assert by_factor[2]["delta0"] == pytest.approx(1.0, abs=1e-12)
        assert by_factor[1]["delta0"] == 0.0
        assert "delta0=" in capsys.readouterr().out

    def test_standard_resonant(self, tmp_path):
        main(["qft", "3", "--mode", "standard", "--out", str(tmp_path)])
        code, out = pulses(tmp_path, tmp_path / "qft3_standard.json", "--T", "2")
        assert code == 0
        sched = load(out)
        for s in sched["steps"]:
            assert s["delta0"] == 0.0
            assert np.sqrt(np.sum(np.square(s["chi"]))) * s["T"] == pytest.approx(2.0)
        assert [s["tau"] for s in sched["steps"]] == [-10.0, 10.0]
        assert sched["abstract_gate"] is not None

    def test_identity(self, tmp_path, capsys):
        src = write_matrix(tmp_path / "i.json", np.eye(3))
        main(["decompose", src, "--out", str(tmp_path / "d.json")])
        code, out = pulses(tmp_path, tmp_path / "d.json")
        assert code == 0
        assert load(out)["steps"] == []
        assert "notice:" in capsys.readouterr().out

    def test_bad_decomposition(self, tmp_path):
        src = tmp_path / "d.json"
        src.write_text(json.dumps({"kind": "qr"}))
        assert pulses(tmp_path, src)[0] == 1

    def test_bad_width(self, tmp_path):
        main(["qft", "2", "--out", str(tmp_path)])
        assert pulses(tmp_path, tmp_path / "qft2_generalized.json", "--T", "0")[0] == 1


def pipeline(tmp_path, n, mode="generalized"):
    main(["qft", str(n), "--mode", mode, "--out", str(tmp_path)])
    code, sched = pulses(tmp_path, tmp_path / f"qft{n}_{mode}_fixture.json")
    assert code == 0
    return sched, tmp_path / f"qft{n}_matrix.json"


class TestSimulate:
    @pytest.mark.parametrize("n", [2, 4])
    def test_qft(self, tmp_path, capsys, n):
        sched, target = pipeline(tmp_path, n)
        trace = tmp_path / "trace.csv"
        assert main(["simulate", str(sched), str(target), "--trace-out", str(trace)]) == 0
        assert trace.read_text().startswith("t,deviation,ancilla_pop\n")
        assert "final deviation" in capsys.readouterr().out

    def test_wrong_target(self, tmp_path):
        sched, _ = pipeline(tmp_path, 3)
        target = write_matrix(tmp_path / "i3.json", np.eye(3))
        assert main(["simulate", str(sched), target, "--trace-out", str(tmp_path / "t.csv")]) == 2

    def test_dimension_mismatch(self, tmp_path):
        sched, _ = pipeline(tmp_path, 3)
        target = write_matrix(tmp_path / "i4.json", np.eye(4))
        assert main(["simulate", str(sched), target, "--trace-out", str(tmp_path / "t.csv")]) == 1

    def test_bad_config(self, tmp_path):
        sched, target = pipeline(tmp_path, 2)
        args = ["simulate", str(sched), str(target), "--trace-out", str(tmp_path / "t.csv")]
        assert main(args + ["--dt", "0"]) == 1
        assert main(args + ["--window", "1"]) == 1

    def test_spacing_warning_on_stderr(self, tmp_path, capsys):
        sched, target = pipeline(tmp_path, 3)
        main(["simulate", str(sched), str(target), "--trace-out", str(tmp_path / "t.csv")])
        assert "warning: pulse spacing" in capsys.readouterr().err


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("mode", ["standard", "generalized"])
def test_round_trip(tmp_path, n, mode):
    u = tmp_path / "u.json"
    assert main(["random", str(n), "--seed", str(40 + n), "--out", str(u)]) == 0
    d = tmp_path / "d.json"
    assert main(["decompose", str(u), "--mode", mode, "--out", str(d)]) == 0
    code, sched = pulses(tmp_path, d)
    assert code == 0
    assert main(["simulate", str(sched), str(u), "--trace-out", str(tmp_path / "t.csv")]) == 0


def test_outputs_byte_stable(tmp_path):
    def run():
        main(["random", "4", "--seed", "9", "--out", str(tmp_path / "u.json")])
        main(["decompose", str(tmp_path / "u.json"), "--mode", "generalized", "--out", str(tmp_path / "d.json")])
        main(["pulses", str(tmp_path / "d.json"), "--out", str(tmp_path / "s.json")])
        main(["simulate", str(tmp_path / "s.json"), str(tmp_path / "u.json"), "--trace-out", str(tmp_path / "t.csv")])
        return {p.name: p.read_bytes() for p in sorted(tmp_path.iterdir())}

    first = run()
    assert len(first) == 8
    assert run() == first


def test_fig2(tmp_path, capsys):
    assert main(["fig2", "--out", str(tmp_path)]) == 0
    for n in (2, 3, 4):
        assert (tmp_path / f"fig2_qft{n}.csv").exists()
    assert capsys.readouterr().out.count("final deviation") == 3


def test_verify_rejects_kind_mismatch(tmp_path):
    main(["qft", "3", "--out", str(tmp_path)])
    args = ["verify", str(tmp_path / "qft3_generalized.json"), str(DATA / "su3_standard_reference.json")]
    assert main(args) == 1
