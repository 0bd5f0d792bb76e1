import json

import pytest

from npexec.cli import duration, main


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def cs(tmp_path):
    for u in (60, 90):
        assert run("generate", "--casestudy", u, "-o", tmp_path / f"cs{u}.json") == 0
    return tmp_path


@pytest.mark.parametrize("text,ns", [("0.12", 120_000), ("0.12ms", 120_000), ("120us", 120_000),
                                     ("500ns", 500), ("1s", 1_000_000_000), ("2.5 ms", 2_500_000)])
def test_duration(text, ns):
    assert duration(text) == ns


def test_generate(tmp_path, capsys):
    out = tmp_path / "ts.json"
    assert run("generate", "--utilization", 0.8, "--tasks", 50, "--seed", 7, "-o", out) == 0
    assert len(json.loads(out.read_text())["tasks"]) == 50
    assert "n=50" in capsys.readouterr().out


def test_generate_casestudy(cs):
    data = json.loads((cs / "cs60.json").read_text())
    assert len(data["tasks"]) == 7 and data["delta_ms"] == "0.12"


def test_generate_bad_utilization(tmp_path, capsys):
    assert run("generate", "--utilization", 1.2, "-o", tmp_path / "x.json") == 2
    assert "utilization" in capsys.readouterr().err


def test_env_seed(tmp_path, monkeypatch):
    monkeypatch.setenv("NPEXEC_SEED", "7")
    assert run("generate", "--tasks", 20, "-o", tmp_path / "a.json") == 0
    monkeypatch.delenv("NPEXEC_SEED")
    assert run("generate", "--tasks", 20, "--seed", 7, "-o", tmp_path / "b.json") == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_analyze_casestudy(cs):
    out = cs / "rep"
    assert run("analyze", cs / "cs60.json", "--policy", "rm", "--option", "ro", "--delta", 0.12,
               "-o", out) == 0
    rows = (out / "cs60-bounds.csv").read_text().splitlines()
    assert rows[7] == "6,0.84,1.84,12.68,30,true"


def test_analyze_zero_delta_smaller(cs):
    def bounds(delta, sub):
        run("analyze", cs / "cs60.json", "--delta", delta, "-o", cs / sub)
        rows = (cs / sub / "cs60-bounds.csv").read_text().splitlines()[1:]
        return [float(r.split(",")[3]) for r in rows]
    assert all(a < b for a, b in zip(bounds(0, "z"), bounds(0.12, "d")))


def test_analyze_edf_90(cs):
    assert run("analyze", cs / "cs90.json", "--policy", "edf", "--option", "ro", "--delta", 0.12,
               "-o", cs / "e") == 0


def test_analyze_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"tasks": [{"id": 0, "wcet_ms": 3, "period_ms": 4},
                                         {"id": 1, "wcet_ms": 3, "period_ms": 6}]}))
    assert run("analyze", bad, "-o", tmp_path) == 3
    sub = tmp_path / "sub.json"
    sub.write_text(json.dumps({"tasks": [
        {"id": 0, "wcet_ms": 1, "period_ms": 10, "publishes_to": 5},
        {"id": 1, "kind": "subscription", "wcet_ms": 1, "subscribes_to": 5}]}))
    assert run("analyze", sub, "-o", tmp_path) == 4
    assert run("analyze", tmp_path / "missing.json") == 2


def test_simulate_drops(cs):
    assert run("simulate", cs / "cs90.json", "--executor", "default", "--hyperperiods", 70,
               "-o", cs / "s") == 0
    rows = (cs / "s" / "cs90-default-drops.csv").read_text().splitlines()
    assert rows[0] == "task_id,skipped_at_ns,count"
    assert any(r.startswith("6,") for r in rows[1:])
    assert run("simulate", cs / "cs60.json", "--executor", "rm-ro", "--hyperperiods", 70,
               "-o", cs / "s") == 0
    assert (cs / "s" / "cs60-rm-ro-drops.csv").read_text().splitlines() == ["task_id,skipped_at_ns,count"]


def test_simulate_reference_equals_rm_ro_without_delta(cs):
    run("simulate", cs / "cs60.json", "--executor", "reference", "--policy", "rm", "-o", cs / "r")
    run("simulate", cs / "cs60.json", "--executor", "rm-ro", "--delta", 0, "-o", cs / "r")
    def cols(name):
        lines = (cs / "r" / f"cs60-{name}-trace.csv").read_text().splitlines()
        return [tuple(l.split(",")[i] for i in (0, 4, 5)) for l in lines]
    assert cols("reference") == cols("rm-ro")


def test_simulate_unknown_executor(cs):
    with pytest.raises(SystemExit) as exc:
        run("simulate", cs / "cs60.json", "--executor", "nope")
    assert exc.value.code == 2


def test_compare_identical_sources(cs):
    assert run("compare", cs / "cs60.json", "-a", "rm-ro", "-b", "rm-ro", "-o", cs / "c") == 0
    rows = (cs / "c" / "reduction.csv").read_text().splitlines()[1:]
    assert rows and all(r.endswith(",0.000000") for r in rows)


def test_compare_bound_dominates(cs):
    assert run("compare", cs / "cs60.json", "-a", "bound-rm-ro", "-b", "rm-ro",
               "--hyperperiods", 4, "-o", cs / "c") == 0
    rows = (cs / "c" / "reduction.csv").read_text().splitlines()[1:]
    assert all(float(r.split(",")[-1]) >= 0 for r in rows)
    hist = (cs / "c" / "histogram.csv").read_text().splitlines()
    assert hist[0] == "bin_lo,bin_hi,count" and len(hist) == 21


def test_compare_bad_source(cs):
    with pytest.raises(SystemExit):
        run("compare", cs / "cs60.json", "-a", "bound-xx-ro")


def test_parallel_matches_serial(cs):
    args = ["simulate", cs / "cs60.json", cs / "cs90.json", "--executor", "rm-re",
            "--executor", "events-fifo-re"]
    run(*args, "-o", cs / "p1")
    run(*args, "--jobs", 2, "-o", cs / "p2")
    for f in sorted((cs / "p1").iterdir()):
        assert f.read_bytes() == (cs / "p2" / f.name).read_bytes()
