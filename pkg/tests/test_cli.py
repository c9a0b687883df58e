import csv
import json

import numpy as np
import pytest

from fxcov.cli import main, read_matrix
from fxcov.dgp import DgpSpec, sim_pair
from fxcov.errors import ParseError

FAST = ["--reps", "500", "--grid", "200"]


def save(path, arr, labels=None):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for i, row in enumerate(np.atleast_2d(arr)):
            w.writerow(([labels[i]] if labels is not None else []) + [repr(float(v)) for v in row])
    return str(path)


@pytest.fixture
def files(tmp_path):
    b = sim_pair(DgpSpec("iid", 0.0, 120, 20, 0, seed=3))
    return save(tmp_path / "x.csv", b.x.values), save(tmp_path / "y.csv", b.y.values), tmp_path


def load(path):
    with open(path) as fh:
        return json.load(fh)


def strip_times(d):
    d = json.loads(json.dumps(d))
    d["manifest"].pop("started")
    d["manifest"].pop("finished")
    return d


def test_test_report_schema(files):
    x, y, tmp = files
    out = tmp / "r.json"
    assert main(["test", x, y, "--out", str(out)] + FAST) == 0
    rep = load(out)
    assert [r["name"] for r in rep["results"]] == ["F_T", "F_T,p"]
    for r in rep["results"]:
        assert 0 < r["p_value"] <= 1
        assert set(r["quantiles"]) == {"0.90", "0.95", "0.99"}
        assert set(r["reject"]) == {"0.10", "0.05", "0.01"}
    sp = rep["spectrum"]
    assert sp["h"] == 3 and sp["p"] == 3 and len(sp["lambdas"]) == sp["q"] ** 2
    params = rep["manifest"]["parameters"]
    assert params["reps"] == {"value": 500, "default": 10000, "overridden": True}
    assert params["lag"] == {"value": 0, "default": 0, "overridden": False}
    assert rep["manifest"]["subcommand"] == "test" and rep["manifest"]["inputs"] == [x, y]


def test_duplicated_series_rejects(files):
    x, _, tmp = files
    out = tmp / "r.json"
    assert main(["test", x, x, "--out", str(out), "--reps", "2000"]) == 0
    for r in load(out)["results"]:
        assert r["p_value"] <= 0.001


def test_manifest_reproduces_report(files):
    x, y, tmp = files
    a, b = tmp / "a.json", tmp / "b.json"
    assert main(["test", x, y, "--out", str(a), "--seed", "9", "--lag", "1"] + FAST) == 0
    params = load(a)["manifest"]["parameters"]
    argv = ["test", x, y, "--out", str(b)]
    for name, entry in params.items():
        if name == "out" or entry["value"] is None or entry["value"] is False:
            continue
        flag = "--" + name.replace("_", "-")
        if entry["value"] is True:
            argv.append(flag)
        elif isinstance(entry["value"], list):
            argv += [flag, ",".join(str(v) for v in entry["value"])]
        else:
            argv += [flag, str(entry["value"])]
    assert main(argv) == 0
    ra, rb = strip_times(load(a)), strip_times(load(b))
    ra["manifest"]["parameters"].pop("out")
    rb["manifest"]["parameters"].pop("out")
    for r in (ra, rb):
        for v in r["manifest"]["parameters"].values():
            v.pop("overridden")
    assert ra == rb


def test_c0_flag(files):
    x, y, tmp = files
    c0 = save(tmp / "c0.csv", np.zeros((20, 20)))
    a, b = tmp / "a.json", tmp / "b.json"
    assert main(["test", x, y, "--out", str(a), "--c0", c0] + FAST) == 0
    assert main(["test", x, y, "--out", str(b)] + FAST) == 0
    assert load(a)["results"] == load(b)["results"]
    bad = save(tmp / "bad.csv", np.zeros((3, 3)))
    assert main(["test", x, y, "--c0", bad] + FAST) == 3


def test_parse_errors(tmp_path, capsys):
    x = tmp_path / "x.csv"
    x.write_text("1,2,3\n4,5,6\n7,8\n")
    assert main(["test", str(x), str(x)]) == 2
    assert "line 3" in capsys.readouterr().err
    x.write_text("1,2,3\n4,abc,6\n")
    assert main(["test", str(x), str(x)]) == 2
    assert "line 2, column 2" in capsys.readouterr().err
    assert main(["test", str(tmp_path / "missing.csv"), str(x)]) == 2
    with pytest.raises(ParseError, match="no data rows"):
        read_matrix(str(save(tmp_path / "e.csv", np.zeros((0, 2)))))


def test_conformability_errors(files, tmp_path):
    x, _, _ = files
    short = save(tmp_path / "s.csv", np.random.default_rng(0).standard_normal((50, 20)))
    narrow = save(tmp_path / "n.csv", np.random.default_rng(0).standard_normal((120, 15)))
    assert main(["test", x, short] + FAST) == 3
    assert main(["test", x, narrow] + FAST) == 3


def test_degenerate_spectrum_exit(tmp_path):
    const = save(tmp_path / "c.csv", np.ones((30, 5)))
    assert main(["test", const, const] + FAST) == 4


@pytest.mark.parametrize(
    "argv",
    [
        ["test"],
        ["test", "a", "b", "--stat", "median"],
        ["test", "a", "b", "--q", "zero"],
        ["test", "a", "b", "--level", "0.05,1.5"],
        ["bogus"],
        ["simulate", "--out", "t.csv", "--table", "3", "--seed", "1"],
    ],
)
def test_bad_flags(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 5


def test_simulate_requires_seed(tmp_path):
    assert main(["simulate", "--out", str(tmp_path / "t.csv")]) == 5


def test_changepoint_outputs(files):
    x, y, tmp = files
    out, chart = tmp / "cp.json", tmp / "cusum.csv"
    assert main(["changepoint", x, y, "--out", str(out), "--cusum", str(chart)] + FAST) == 0
    rep = load(out)
    assert [r["name"] for r in rep["results"]] == ["Z_T", "Z_T,p"]
    assert 0 <= rep["khat"] <= 120
    with open(chart) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 121
    assert float(rows[0]["Z_T"]) == 0.0 and float(rows[-1]["Z_T"]) == 0.0
    assert float(rows[0]["Z_T,p"]) == 0.0
    assert set(rows[0]) >= {"Z_T_q0.90", "Z_T_q0.95", "Z_T_q0.99", "fraction", "label"}


def test_changepoint_localizes_break(tmp_path):
    b = sim_pair(DgpSpec("iid", 0.7, 200, 20, 0, seed=5))
    y = b.y.values.copy()
    y[100:] *= -1
    labels = [f"day{i:03d}" for i in range(200)]
    x = save(tmp_path / "x.csv", b.x.values, labels)
    yf = save(tmp_path / "y.csv", y, labels)
    out = tmp_path / "cp.json"
    assert main(["changepoint", x, yf, "--row-labels", "--stat", "norm", "--out", str(out)] + FAST) == 0
    rep = load(out)
    assert abs(rep["khat"] - 100) <= 20
    assert rep["khat_label"] == labels[rep["khat"] - 1]
    assert rep["results"][0]["p_value"] < 0.01


def test_cidr_round_trip(tmp_path):
    P = np.exp(np.cumsum(np.random.default_rng(1).normal(0, 0.01, (5, 30)), axis=1)) * 100
    src = save(tmp_path / "p.csv", P)
    out = tmp_path / "c.csv"
    assert main(["cidr", src, "--out", str(out)]) == 0
    _, back = read_matrix(str(out))
    expected = 100 * (np.log(P) - np.log(P[:, :1]))
    np.testing.assert_allclose(back, expected, atol=1e-12, rtol=1e-11)
    assert np.all(back[:, 0] == 0.0)
    bad = P.copy()
    bad[2, 4] = -1.0
    assert main(["cidr", save(tmp_path / "b.csv", bad), "--out", str(out)]) == 1


def test_cidr_segment_workflow(tmp_path):
    rng = np.random.default_rng(7)
    T, R = 160, 24
    common = rng.normal(0, 1, (T, R))
    own_x, own_y = rng.normal(0, 1, (T, R)), rng.normal(0, 1, (T, R))
    sign = np.where(np.arange(T) < T // 2, 1.0, -1.0)[:, None]
    steps_x = (0.8 * common + 0.6 * own_x) * 0.02 / np.sqrt(R)
    steps_y = (0.8 * sign * common + 0.6 * own_y) * 0.02 / np.sqrt(R)
    Px = 100 * np.exp(np.cumsum(steps_x, axis=1))
    Py = 50 * np.exp(np.cumsum(steps_y, axis=1))
    labels = [f"2001-{1 + i // 28:02d}-{1 + i % 28:02d}" for i in range(T)]
    x = save(tmp_path / "px.csv", Px, labels)
    y = save(tmp_path / "py.csv", Py, labels)
    out, chart = tmp_path / "seg.json", tmp_path / "cusum.csv"
    argv = ["changepoint", x, y, "--cidr", "--row-labels", "--segment", "--stat", "norm",
            "--out", str(out), "--cusum", str(chart)] + FAST
    assert main(argv) == 0
    rep = load(out)
    assert abs(rep["khat"] - T // 2) <= T // 10
    assert rep["results"][0]["p_value"] < 0.01
    assert len(rep["segments"]) == 2
    kids = rep["segments"]
    assert kids[0]["start"] == 0 and kids[0]["stop"] == rep["khat"] == kids[1]["start"]
    assert kids[1]["stop"] == T
    with open(chart) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == (T + 1) + (kids[0]["stop"] + 1) + (T - kids[1]["start"] + 1)


def test_simulate_tables_are_reproducible(tmp_path):
    common = ["--T", "40", "--R", "15", "--sims", "4", "--reps", "200", "--grid", "100", "--seed", "2"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--table", "1", "--out", str(a)] + common) == 0
    assert main(["simulate", "--table", "1", "--out", str(b)] + common) == 0
    assert a.read_bytes() == b.read_bytes()
    with open(a) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["statistic", "kind", "T", "alpha", "10%", "5%", "1%"]
    assert len(rows) == 1 + 2 * 2
    man = load(tmp_path / "a.manifest.json")
    assert man["parameters"]["seed"]["value"] == 2 and man["design"]["q"] == 3
    t2 = tmp_path / "t2.csv"
    assert main(["simulate", "--table", "2", "--kind", "iid", "--out", str(t2)] + common) == 0
    with open(t2) as fh:
        rows = list(csv.reader(fh))
    assert {(r[0], r[3]) for r in rows[1:]} == {("Z", "0"), ("Z", "0.5"), ("Zp", "0"), ("Zp", "0.5")}


def test_simulate_power(tmp_path):
    out = tmp_path / "power.csv"
    argv = ["simulate", "--power", "--kind", "far1", "--T", "40", "--R", "15", "--sims", "5",
            "--reps", "200", "--seed", "1", "--out", str(out), "--alpha-step", "0.4"]
    assert main(argv) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["alpha"]) for r in rows if r["statistic"] == "F"] == [0.0, 0.4, 0.8]
    assert all(0.0 <= float(r["rate"]) <= 1.0 for r in rows)
