import json
import os
import subprocess
import sys

import numpy as np
import pytest

from teachset.cli import main
from teachset.datasets import blobs_with_noise, case_study_gaussian
from teachset.errors import MalformedLineError, NonNumericCellError, ParseError
from teachset.io import (
    RawTable,
    file_digest,
    format_csv,
    format_libsvm,
    parse_csv,
    parse_libsvm,
    write_atomic,
)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestCsv:
    def test_plain(self, tmp_path):
        t = parse_csv(write(tmp_path, "a.csv", "0.1,0.2\n0.3,0.4\n"))
        assert t.rows.tolist() == [[0.1, 0.2], [0.3, 0.4]]
        assert t.labels is None

    def test_header_label(self, tmp_path):
        path = write(tmp_path, "a.csv", "x1,x2,y\n0.1,0.2,1\n0.3,0.4,0\n")
        t = parse_csv(path, label_column=2)
        assert t.rows.shape == (2, 2)
        assert t.labels.tolist() == [1, 0]
        assert t.header == ["x1", "x2", "y"]
        assert parse_csv(path, label_column="y") == t

    def test_non_numeric(self, tmp_path):
        path = write(tmp_path, "a.csv", "0.1,0.2\n0.3,abc\n")
        with pytest.raises(NonNumericCellError) as err:
            parse_csv(path)
        assert (err.value.row, err.value.col) == (2, 2)

    def test_ragged(self, tmp_path):
        with pytest.raises(ParseError):
            parse_csv(write(tmp_path, "a.csv", "0.1,0.2\n0.3\n"))

    def test_empty(self, tmp_path):
        with pytest.raises(ParseError):
            parse_csv(write(tmp_path, "a.csv", ""))

    def test_round_trip(self, tmp_path, rng):
        rows = rng.normal(size=(20, 3))
        labels = rng.integers(0, 3, 20)
        table = RawTable(rows, labels, ["a", "b", "c", "y"], 3)
        path = write(tmp_path, "r.csv", format_csv(table))
        assert parse_csv(path, label_column=3) == table


class TestLibsvm:
    def test_basic(self, tmp_path):
        t = parse_libsvm(write(tmp_path, "a.svm", "+1 1:0.5 3:0.2\n"))
        assert t.rows.tolist() == [[0.5, 0.0, 0.2]]
        assert t.labels.tolist() == [1]

    def test_densify(self, tmp_path):
        t = parse_libsvm(write(tmp_path, "a.svm", "-1 2:1\n+1 4:1\n"))
        assert t.rows.shape == (2, 4)
        assert t.rows[1].tolist() == [0, 0, 0, 1]

    def test_zero_index(self, tmp_path):
        with pytest.raises(MalformedLineError):
            parse_libsvm(write(tmp_path, "a.svm", "1 0:5\n"))

    def test_round_trip(self, tmp_path, rng):
        rows = np.where(rng.random((10, 5)) < 0.5, 0.0, rng.normal(size=(10, 5)))
        rows[:, -1] = 1.0
        table = RawTable(rows, rng.integers(-1, 2, 10))
        t = parse_libsvm(write(tmp_path, "r.svm", format_libsvm(table)))
        assert np.array_equal(t.rows, rows)
        assert np.array_equal(t.labels, table.labels)


class TestFiles:
    def test_atomic_and_digest(self, tmp_path):
        p = str(tmp_path / "out.txt")
        write_atomic(p, "hello\n")
        write_atomic(p, "world\n")
        assert open(p).read() == "world\n"
        assert file_digest(p).startswith("sha256:")
        assert os.listdir(tmp_path) == ["out.txt"]


class TestDatasets:
    def test_gaussian(self):
        x, y = case_study_gaussian(0)
        assert x.shape == (1400, 2)
        assert sorted(set(y.tolist())) == [0, 1, 2]

    def test_blobs_noise(self):
        x, y = blobs_with_noise(900, seed=1)
        assert x.shape == (900, 2)
        assert int(np.sum(y == 3)) == 45


@pytest.fixture
def gauss_csv(tmp_path):
    path = str(tmp_path / "g.csv")
    assert main(["synth", "gaussian", "--seed", "0", "--out", path]) == 0
    return path


class TestCli:
    def test_exclusive_sizing(self, gauss_csv, tmp_path, capsys):
        code = main(["teach", "--input", gauss_csv, "--label-column", "2",
                     "--halvings", "1", "--target-size", "5",
                     "--out-indices", str(tmp_path / "i"), "--out-report", str(tmp_path / "r")])
        assert code == 2
        assert "usage" in capsys.readouterr().err

    def test_missing_sizing(self, gauss_csv, tmp_path):
        code = main(["teach", "--input", gauss_csv,
                     "--out-indices", str(tmp_path / "i"), "--out-report", str(tmp_path / "r")])
        assert code == 2

    def test_parse_error_exit(self, tmp_path, capsys):
        bad = write(tmp_path, "bad.csv", "1,2\n3,x\n")
        code = main(["teach", "--input", bad, "--halvings", "0",
                     "--out-indices", str(tmp_path / "i"), "--out-report", str(tmp_path / "r")])
        assert code == 1
        assert "NonNumericCellError" in capsys.readouterr().err

    def test_identity(self, tmp_path, rng):
        path = write(tmp_path, "x.csv", "\n".join(
            f"{a},{b}" for a, b in rng.normal(size=(37, 2))) + "\n")
        out = tmp_path / "idx.txt"
        code = main(["teach", "--input", path, "--halvings", "0", "--surrogate-frac", "1.0",
                     "--out-indices", str(out), "--out-report", str(tmp_path / "r.json")])
        assert code == 0
        assert sorted(int(v) for v in out.read_text().split()) == list(range(37))

    def test_config_file_precedence(self, tmp_path, rng):
        path = write(tmp_path, "x.csv", "\n".join(
            f"{a},{b}" for a, b in rng.normal(size=(40, 2))) + "\n")
        cfg = write(tmp_path, "c.json", json.dumps({"halvings": 2, "radius": 0.3}))
        rep = tmp_path / "r.json"
        assert main(["teach", "--input", path, "--config", cfg, "--radius", "0.5",
                     "--out-indices", str(tmp_path / "i"), "--out-report", str(rep)]) == 0
        body = json.loads(rep.read_text())
        assert body["halving_count"] == 2
        assert body["config"]["radius"] == 0.5

    def test_density_and_figure(self, gauss_csv, tmp_path):
        out, fig = tmp_path / "d.csv", tmp_path / "d.png"
        assert main(["density", "--input", gauss_csv, "--label-column", "2",
                     "--out", str(out), "--figure", str(fig)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "index,score,neighbors" and len(lines) == 1401
        assert fig.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_threshold_demo(self, tmp_path):
        out = tmp_path / "t.json"
        assert main(["demo", "threshold", "--epsilon", "1e-4", "--repeats", "5",
                     "--out", str(out)]) == 0
        body = json.loads(out.read_text())
        assert body["teacher"]["examples"] == 2
        assert body["active"]["reference_queries"] == 13

    def test_risk_curve(self, gauss_csv, tmp_path):
        out = tmp_path / "rc.json"
        assert main(["eval", "risk-curve", "--input", gauss_csv, "--label-column", "2",
                     "--strategy", "random", "--costs", "19,38", "--out", str(out)]) == 0
        assert json.loads(out.read_text())["costs"] == [19, 38]

    @pytest.mark.slow
    def test_case_study(self, gauss_csv, tmp_path):
        rep, fig = tmp_path / "r.json", tmp_path / "f.png"
        assert main(["teach", "--input", gauss_csv, "--label-column", "2",
                     "--radius", "0.4", "--eta", "1e-4", "--halvings", "6",
                     "--surrogate-size", "1230", "--out-indices", str(tmp_path / "i"),
                     "--out-report", str(rep), "--figure", str(fig)]) == 0
        body = json.loads(rep.read_text())
        assert body["stage_sizes"] == [1230, 615, 307, 153, 76, 38, 19]
        assert body["manifest"]["input"]["digest"] == file_digest(gauss_csv)
        assert fig.stat().st_size > 0

    @pytest.mark.slow
    def test_thread_determinism(self, tmp_path):
        data = tmp_path / "b.csv"
        assert main(["synth", "blobs-noise", "--n", "300", "--out", str(data)]) == 0
        outputs = []
        for threads in ("1", "8"):
            d = tmp_path / threads
            d.mkdir()
            env = dict(os.environ, TEACHSET_THREADS=threads)
            subprocess.run(
                [sys.executable, "-m", "teachset.cli", "teach", "--input", str(data),
                 "--label-column", "2", "--target-size", "20",
                 "--out-indices", str(d / "i.txt"), "--out-report", str(d / "r.json")],
                check=True, env=env)
            outputs.append(((d / "i.txt").read_bytes(), (d / "r.json").read_bytes()))
        assert outputs[0][0] == outputs[1][0]
        assert outputs[0][1].replace(b"/1/", b"/8/") == outputs[1][1]
