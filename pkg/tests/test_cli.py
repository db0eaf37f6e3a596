import csv
import io
import json

import pytest

from dehncan.cli import CSV_HEADER, SCHEMA_VERSION, Config, dumps, loads, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def torus_cert(tmp_path_factory):
    path = tmp_path_factory.mktemp("torus") / "t.json"
    assert main(["torus", "--pqr", "inf,0,-1", "--m", "4", "--theta", "0.2,0.2,auto",
                 "--json", str(path)]) == 0
    return path


@pytest.fixture(scope="module")
def wh_cert(tmp_path_factory):
    path = tmp_path_factory.mktemp("wh") / "out.json"
    assert main(["whitehead", "-k", "2", "-l", "1", "--json", str(path)]) == 0
    return path


class TestTorus:
    def test_certificate(self, torus_cert):
        cert = loads(torus_cert.read_text())
        assert cert["schema_version"] == SCHEMA_VERSION
        assert cert["kind"] == "torus"
        assert cert["verdict"] == "canonical"
        # 'auto' is the remaining angle
        assert sum(cert["input"]["theta"]) == pytest.approx(3.141592653589793)
        assert len(cert["z_star"]) == cert["N"] + 1
        assert all(f["margin"] > cert["margin_floor"] for f in cert["faces"])

    def test_stdout(self, capsys):
        code, out, _ = run(capsys, "torus", "--pqr", "inf,0,-1", "--m", "4",
                           "--theta", "0.2,0.2,auto")
        assert code == 0
        assert json.loads(out)["verdict"] == "canonical"

    def test_not_farey_edge(self, capsys):
        code, _, err = run(capsys, "torus", "--pqr", "inf,0,1", "--m", "4",
                           "--theta", "0.2,0.2,auto")
        assert code == 3

    def test_meridian_in_triangle(self, capsys):
        code, _, err = run(capsys, "torus", "--pqr", "0,inf,-1", "--m", "-1/1",
                           "--theta", "1,1,auto")
        assert code == 3
        assert "feasibility margin" in err

    def test_infeasible_angles(self, capsys):
        # m = 2 needs theta_r > theta_q
        code, _, err = run(capsys, "torus", "--pqr", "0,inf,-1", "--m", "2",
                           "--theta", "0.2,2.0,auto")
        assert code == 3

    @pytest.mark.parametrize("argv", [
        ("--pqr", "inf,0,-1", "--m", "4//3", "--theta", "1,1,auto"),
        ("--pqr", "inf,0", "--m", "4", "--theta", "1,1,auto"),
        ("--pqr", "inf,0,-1", "--m", "4", "--theta", "1,x,auto"),
        ("--pqr", "inf,0,-1", "--m", "4", "--theta", "auto,auto,auto"),
    ])
    def test_usage(self, capsys, argv):
        assert run(capsys, "torus", *argv)[0] == 2

    def test_bad_config(self, capsys):
        code, _, _ = run(capsys, "torus", "--pqr", "inf,0,-1", "--m", "4",
                         "--theta", "0.2,0.2,auto", "--grad-tol", "-1")
        assert code == 2

    def test_argparse_errors(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["torus", "--m", "4"])
        assert exc.value.code == 2

    def test_negative_slope_values(self, capsys):
        code, out, _ = run(capsys, "torus", "--pqr", "-1,inf,0", "--m", "-3",
                           "--theta", "0.3,0.3,auto")
        assert code == 0
        assert json.loads(out)["input"]["m"] == "-3"

    def test_env_precision(self, capsys, monkeypatch):
        monkeypatch.setenv("DEHNCAN_PRECISION", "extended")
        code, out, _ = run(capsys, "torus", "--pqr", "inf,0,-1", "--m", "3",
                           "--theta", "0.5,0.5,auto")
        cert = json.loads(out)
        assert code == 0
        assert cert["config"]["dps"] == 50
        assert cert["z_exact"] is not None
        monkeypatch.setenv("DEHNCAN_PRECISION", "double")
        code, out, _ = run(capsys, "torus", "--pqr", "inf,0,-1", "--m", "3",
                           "--theta", "0.5,0.5,auto")
        assert json.loads(out)["config"]["precision"] == "double"

    def test_env_precision_invalid(self, capsys, monkeypatch):
        monkeypatch.setenv("DEHNCAN_PRECISION", "quad")
        code, _, err = run(capsys, "torus", "--pqr", "inf,0,-1", "--m", "3",
                           "--theta", "0.5,0.5,auto")
        assert code == 2
        assert "quad" in err


class TestWhitehead:
    def test_even(self, capsys):
        code, out, _ = run(capsys, "whitehead", "-k", "11", "-l", "8")
        cert = json.loads(out)
        assert code == 0
        assert cert["input"]["parity"] == "even"
        assert cert["verdict"] == "canonical"
        assert {"extra-0", "extra-1", "extra-2"} <= {f["face_id"] for f in cert["faces"]}

    def test_exceptional(self, capsys):
        code, _, err = run(capsys, "whitehead", "-k", "1", "-l", "2")
        assert code == 3
        assert "(1,-2)" in err

    def test_negative_l(self, capsys):
        assert run(capsys, "whitehead", "-k", "3", "-l", "-1")[0] == 0

    def test_not_primitive(self, capsys):
        assert run(capsys, "whitehead", "-k", "4", "-l", "6")[0] == 2

    def test_file_roundtrip(self, wh_cert):
        text = wh_cert.read_text()
        cert = loads(text)
        assert cert["input"]["parity"] == "odd"
        assert dumps(cert) == text
        assert dumps(loads(dumps(cert))) == text


class TestSerialization:
    def test_float_format(self):
        text = dumps({"schema_version": 1, "x": 0.1, "y": [1.0, float("nan")]})
        assert '"x": 1.0000000000000001e-01' in text
        assert "null" in text
        assert loads(text)["x"] == 0.1

    def test_bit_exact(self, torus_cert):
        cert = loads(torus_cert.read_text())
        again = loads(dumps(cert))
        assert again == cert

    def test_rejects_other_schema(self):
        with pytest.raises(ValueError):
            loads('{"schema_version": 99}')

    def test_config_validation(self):
        with pytest.raises(ValueError):
            Config(grad_tol=0)
        with pytest.raises(ValueError):
            Config(margin_floor=-1.0)
        with pytest.raises(ValueError):
            Config(precision="single")


class TestBatch:
    def test_small_grid(self, capsys):
        code, out, _ = run(capsys, "batch", "-k", "1:5", "-l", "1:9", "--jobs", "2")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert tuple(rows[0]) == CSV_HEADER
        body = rows[1:]
        assert [(int(r[0]), int(r[1])) for r in body] == sorted(
            (int(r[0]), int(r[1])) for r in body)
        marked = {(int(r[0]), int(r[1])) for r in body if r[6] == "non-hyperbolic"}
        assert marked == {(1, 1), (1, 2)}
        for r in body:
            if r[6] != "non-hyperbolic":
                assert r[6] == "canonical"
                assert float(r[4]) < 3.6638623767088774
                assert "," not in r[4] and "e" in r[4]

    def test_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(capsys, "batch", "-k", "1:3", "-l=-4:4", "--csv", str(a))[0] == 0
        assert run(capsys, "batch", "-k", "1:3", "-l", "-4:4", "--csv", str(b),
                   "--jobs", "1")[0] == 0
        assert a.read_bytes() == b.read_bytes()

    @pytest.mark.parametrize("rng", ["5:1", "a:b", "1:2:3"])
    def test_bad_range(self, capsys, rng):
        assert run(capsys, "batch", "-k", rng, "-l", "1")[0] == 2


class TestVerify:
    def test_torus(self, capsys, torus_cert):
        code, out, _ = run(capsys, "verify", str(torus_cert))
        assert code == 0
        assert out.strip().endswith("verified")
        assert "FAIL" not in out

    def test_whitehead(self, capsys, wh_cert):
        assert run(capsys, "verify", str(wh_cert))[0] == 0

    def test_extended(self, capsys, tmp_path):
        path = tmp_path / "long.json"
        assert main(["whitehead", "-k", "1", "-l", "25", "--json", str(path)]) == 0
        assert loads(path.read_text())["config"]["dps"] == 50
        assert run(capsys, "verify", str(path))[0] == 0

    def test_tampered_point(self, capsys, torus_cert, tmp_path):
        cert = loads(torus_cert.read_text())
        cert["z_star"][2] += 0.05
        cert["z_exact"] = None
        bad = tmp_path / "bad.json"
        bad.write_text(dumps(cert))
        code, out, _ = run(capsys, "verify", str(bad))
        assert code == 1
        assert "NOT verified" in out

    def test_tampered_margin(self, capsys, wh_cert, tmp_path):
        cert = loads(wh_cert.read_text())
        cert["faces"][0]["margin"] = -1.0
        bad = tmp_path / "bad.json"
        bad.write_text(dumps(cert))
        code, out, _ = run(capsys, "verify", str(bad))
        assert code == 1
        assert "FAIL margins" in out

    def test_unreadable(self, capsys, tmp_path):
        p = tmp_path / "x.json"
        p.write_text("{not json")
        assert run(capsys, "verify", str(p))[0] == 2
        assert run(capsys, "verify", str(tmp_path / "missing.json"))[0] == 2


class TestCuspview:
    def test_deterministic(self, capsys, torus_cert):
        code, a, _ = run(capsys, "cuspview", str(torus_cert))
        _, b, _ = run(capsys, "cuspview", str(torus_cert))
        assert code == 0
        assert a == b
        assert a.startswith("<svg") and a.rstrip().endswith("</svg>")
        cert = loads(torus_cert.read_text())
        assert a.count("<polygon") == cert["N"]
        assert a.count('class="collapsed"') == 1

    def test_two_tetrahedra(self, capsys, tmp_path):
        path = tmp_path / "n2.json"
        assert main(["torus", "--pqr", "0,inf,-1", "--m", "1/2", "--theta",
                     "1.0,0.8,auto", "--json", str(path)]) == 0
        assert loads(path.read_text())["N"] == 2
        svg = tmp_path / "n2.svg"
        assert run(capsys, "cuspview", str(path), "--svg", str(svg))[0] == 0
        text = svg.read_text()
        assert text.count('class="hexagon"') + text.count('class="collapsed"') == 2
        assert text.count('class="collapsed"') == 1

    def test_missing_development(self, capsys, torus_cert, tmp_path):
        cert = loads(torus_cert.read_text())
        del cert["development"]
        p = tmp_path / "nodev.json"
        p.write_text(dumps(cert))
        assert run(capsys, "cuspview", str(p))[0] == 2
