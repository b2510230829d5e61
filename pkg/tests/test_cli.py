import io
import json
import subprocess
import sys

import numpy as np
import pytest

from sigdetect import gof as G
from sigdetect import inference as I
from sigdetect.cli import main


def run(argv):
    buf = io.StringIO()
    code = main(argv, stdout=buf)
    return code, buf.getvalue()


def rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    head = lines[0].split(",")
    return [dict(zip(head, ln.split(","))) for ln in lines[1:]]


def config_of(text):
    first = text.splitlines()[0]
    assert first.startswith("# config: ")
    return json.loads(first[len("# config: "):])


def test_stat(tmp_path):
    p = np.sort(np.random.default_rng(3).random(100))
    f = tmp_path / "p.txt"
    f.write_text("\n".join(repr(float(x)) for x in p) + "\n")
    code, out = run(["stat", "--family", "hc2004", "--domain", "1:50", "--pvalues", str(f)])
    assert code == 0
    r = rows(out)[0]
    ref = G.statistic(G.HC2004, p, G.SupDomain(1, 50))
    assert float(r["statistic"]) == pytest.approx(ref.value, rel=1e-11)
    assert int(r["argmax_index"]) == ref.argmax_index


def test_critical_table_value():
    code, out = run(["critical", "--family", "bj", "--n", "100", "--k1", "50", "--level", "0.01"])
    assert code == 0
    assert float(rows(out)[0]["threshold"]) == pytest.approx(3.354, abs=0.005)
    assert config_of(out)["domain"] == "1:50"


def test_power_matches_library():
    code, out = run(["power", "--family", "hc2004", "--n", "100", "--k1", "50", "--level", "0.05",
                     "--h1", "normalmix:eps=0.05,mu=2", "--method", "exact"])
    assert code == 0
    ref = I.power(G.HC2004, G.SupDomain(1, 50), 100, 0.05, I.MixtureModel(0.05, I.Normal(), I.Normal(2, 1)))
    assert float(rows(out)[0]["power"]) == pytest.approx(ref, rel=1e-10)


def test_forced_route_agrees_with_auto():
    base = ["cdf", "--family", "bj", "--n", "40", "--b", "1:4:4", "--format", "json"]
    _, auto = run(base)
    _, forced = run(base + ["--method", "general"])
    a = json.loads(auto)["result"]
    f = json.loads(forced)["result"]
    assert all(abs(x["sf"] - y["sf"]) <= 1e-9 for x, y in zip(a, f))


@pytest.mark.parametrize("argv", [
    ["critical", "--family", "bj", "--n", "30", "--level", "0.05"],
    ["cdf", "--n", "20", "--b", "0.5,1.5", "--h1", "arw:alpha=0.6,r=0.2", "--side", "one-sided"],
    ["simulate", "--n", "20", "--reps", "300", "--seed", "5", "--b", "1,2"],
    ["pvalue", "--family", "phi:s=0.5", "--n", "25", "--observed", "2.2", "--format", "json"],
    ["boundary", "--n", "6", "--b", "1.0"],
])
def test_config_rerun_is_byte_identical(tmp_path, argv):
    code, out = run(argv)
    assert code == 0
    cfg = tmp_path / "cfg.json"
    if "--format" in argv:
        cfg.write_text(out)
    else:
        cfg.write_text(out.splitlines()[0])
    code2, out2 = run(["--config", str(cfg)])
    assert code2 == 0 and out2 == out


def test_pvalue_scientific():
    _, out = run(["pvalue", "--n", "100", "--k1", "50", "--observed", "4.723"])
    v = rows(out)[0]["pvalue"]
    assert "e-" in v and float(v) == pytest.approx(0.05, abs=5e-4)


@pytest.mark.parametrize("argv", [
    [],
    ["critical", "--n", "20"],
    ["critical", "--n", "20", "--level", "0.05", "--family", "nope"],
    ["critical", "--n", "20", "--level", "0.05", "--domain", "9"],
    ["stat", "--pvalues", "/nonexistent/file"],
    ["power", "--n", "20", "--level", "0.05", "--h1", "normalmix:mu=2"],
    ["critical", "--n", "20", "--level", "0.05", "--bogus"],
])
def test_usage_errors(argv):
    code, out = run(argv)
    assert code == 2
    assert json.loads(out.strip().splitlines()[-1])["error"]["type"] == "usage"


@pytest.mark.parametrize("argv", [
    ["critical", "--n", "20", "--level", "1.5"],
    ["cdf", "--n", "1000", "--b=-1", "--method", "poisson"],
    ["power", "--n", "20", "--level", "0.05", "--h1", "normalmix:eps=1.5,mu=2"],
])
def test_numeric_errors(argv):
    code, out = run(argv)
    assert code == 3
    err = json.loads(out)["error"]
    assert err["type"] == "numeric" and err["message"]


def test_sweep(tmp_path):
    grid = {"family": ["hc2004", "hc2008"], "n": 30, "models": [{"epsilon": 0.1, "mu": 1.5}]}
    f = tmp_path / "s.json"
    f.write_text(json.dumps(grid))
    code, out = run(["sweep", "--grid", str(f)])
    assert code == 0
    r = rows(out)
    assert [x["family"] for x in r] == ["hc2004", "hc2008"]
    assert list(r[0])[:3] == ["family", "s", "n"]


def test_simulate_dump(tmp_path):
    f = tmp_path / "d.bin"
    code, _ = run(["simulate", "--n", "15", "--reps", "50", "--dump", str(f)])
    assert code == 0 and f.stat().st_size == 400


def test_threads_env(monkeypatch):
    monkeypatch.setenv("SIGDETECT_THREADS", "1")
    argv = ["simulate", "--n", "20", "--reps", "400", "--chunk", "50", "--b", "1.5"]
    _, one = run(argv + ["--threads", "4"])
    monkeypatch.delenv("SIGDETECT_THREADS")
    _, four = run(argv + ["--threads", "4"])
    assert one == four


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "sigdetect", "critical", "--n", "10", "--level", "0.1"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "threshold" in r.stdout
