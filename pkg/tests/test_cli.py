import csv
import json
import os

import pytest

from beb.cli import OrderedWriter, fmt, main, parse_grid, run_ordered
from beb.errors import ParameterError


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_json(d):
    with open(os.path.join(d, "summary.json")) as fh:
        return json.load(fh)


def test_classify_bn3(tmp_path):
    cfg = write(tmp_path, "bn3.cfg", "tau=2\ndelta=0.5\ngamma=-1\n")
    out = str(tmp_path / "o")
    assert main(["classify", "--config", cfg, "--out", out]) == 0
    s = read_json(out)
    assert s["label"] == "BN3"
    assert set(s) >= {"label", "bt_point", "gamma_hom0", "mu_hat_het", "checks"}


def test_diagram_layout_and_determinism(tmp_path):
    cfg = write(tmp_path, "bf.cfg", "tau=1\ndelta=1\ngamma=0.5\nhom_n=2\n")
    outs = []
    for name in ("a", "b"):
        out = str(tmp_path / name)
        assert main(["diagram", "--config", cfg, "--out", out, "--grid-gamma", "-1:2:7"]) == 0
        outs.append(out)
    blobs = [open(os.path.join(o, "curves.csv"), "rb").read() for o in outs]
    assert blobs[0] == blobs[1]
    rows = list(csv.DictReader(open(os.path.join(outs[0], "curves.csv"))))
    sn = [float(r["gamma"]) for r in rows if r["kind"] == "SN"]
    ah = [float(r["gamma"]) for r in rows if r["kind"] == "AH"]
    assert min(sn) > 0 and max(ah) <= 1.0
    bt = [r for r in rows if r["kind"] == "BT"][0]
    assert float(bt["gamma"]) == 1.0 and float(bt["mu_hat"]) == pytest.approx(2 ** 0.5)
    s = read_json(outs[0])
    assert s["bt_point"] == pytest.approx([1.0, 2 ** 0.5])
    assert all(c["pass"] for c in s["checks"])
    assert not os.path.exists(os.path.join(outs[0], "curves.csv.resume"))


def test_diagram_parallel_matches_serial(tmp_path):
    cfg = write(tmp_path, "bf.cfg", "tau=1\ndelta=1\ngamma=0.5\nhom_n=1\n")
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["diagram", "--config", cfg, "--out", a, "--grid-gamma", "-0.5:0.9:5"]) == 0
    assert main(["diagram", "--config", cfg, "--out", b, "--grid-gamma", "-0.5:0.9:5",
                 "--threads", "2"]) == 0
    assert open(os.path.join(a, "curves.csv")).read() == open(os.path.join(b, "curves.csv")).read()


def test_homoclinic_command_reports_gamma_hom0(tmp_path):
    cfg = write(tmp_path, "bf.cfg", "tau=1\ndelta=1\ngamma=0.5\n")
    out = str(tmp_path / "o")
    assert main(["homoclinic", "--config", cfg, "--out", out, "--grid-gamma", "0.9:0.99:2"]) == 0
    s = read_json(out)
    assert s["gamma_hom0"] == pytest.approx(0.0820631045901, abs=1e-11)
    rows = list(csv.DictReader(open(os.path.join(out, "curves.csv"))))
    assert [r["kind"] for r in rows] == ["HOM", "HOM"]


def test_simulate_writes_trajectory(tmp_path):
    cfg = write(tmp_path, "s.cfg", "tau=2\ndelta=0.5\ngamma=-1\nmu=-0.1\n"
                                   "x0=-1.2\ny0=-0.2\nside=minus\nt_end=20\n")
    out = str(tmp_path / "o")
    assert main(["simulate", "--config", cfg, "--out", out]) == 0
    rows = list(csv.DictReader(open(os.path.join(out, "trajectory.csv"))))
    assert rows[-1]["side"] == "sliding"
    assert float(rows[-1]["x"]) == pytest.approx(-0.1, abs=1e-6)


@pytest.mark.parametrize("text", ["tau=1\ndelta=1\n", "tau=1\ndelta=1\ngamma=1\nbogus=3\n",
                                  "tau=0\ndelta=1\ngamma=1\n", "tau=1\ndelta=1\ngamma=x\n"])
def test_invalid_config_exit_code(tmp_path, text):
    cfg = write(tmp_path, "bad.cfg", text)
    assert main(["classify", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_missing_config_exit_code(tmp_path):
    assert main(["classify", "--config", str(tmp_path / "nope.cfg")]) == 2


def test_bad_grid_exit_code(tmp_path):
    cfg = write(tmp_path, "bf.cfg", "tau=1\ndelta=1\ngamma=0.5\n")
    assert main(["diagram", "--config", cfg, "--out", str(tmp_path / "o"),
                 "--grid-gamma", "2:1:5"]) == 2


def test_numerical_failure_exit_code(tmp_path):
    # unstable node above the switching line: the orbit escapes to infinity
    cfg = write(tmp_path, "s.cfg", "tau=2\ndelta=0.5\ngamma=-1\nmu=0.1\n"
                                   "x0=1\ny0=1\nside=plus\nt_end=200\n")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 3


def test_io_failure_exit_code(tmp_path):
    cfg = write(tmp_path, "bn3.cfg", "tau=2\ndelta=0.5\ngamma=-1\n")
    blocker = write(tmp_path, "file", "x")
    assert main(["classify", "--config", cfg, "--out", blocker]) == 4


def test_grid_parser():
    assert list(parse_grid("0:1:3")) == [0.0, 0.5, 1.0]
    with pytest.raises(ParameterError):
        parse_grid("0:1")


def test_number_format_round_trips():
    for v in (0.1, 1 / 3, -2.5e-300, 12345.678):
        assert float(fmt(v)) == v


def _rows(i):
    return [[i, i * i]]


def test_resume_after_interruption(tmp_path):
    path = str(tmp_path / "t.csv")
    w = OrderedWriter(path, ["i", "sq"])
    w.append([0, 0])
    w.append([1, 1])          # interrupted here: no close()
    assert os.path.exists(path + ".resume")
    w2 = OrderedWriter(path, ["i", "sq"])
    assert w2.done == 2
    run_ordered(_rows, list(range(5)), w2, threads=1)
    w2.close()
    rows = list(csv.reader(open(path)))
    assert rows == [["i", "sq"]] + [[str(i), str(i * i)] for i in range(5)]
    assert not os.path.exists(path + ".resume")
