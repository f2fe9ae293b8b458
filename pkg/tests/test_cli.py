import io
import json
import os
import subprocess
import sys

import pytest

from hmlift.cli import main

from conftest import system_path


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def meta(text):
    head = text.split("\n[", 1)[0]
    return dict(line.split("\t", 1) for line in head.splitlines() if "\t" in line)


def section(text, title):
    lines = text.splitlines()
    start = lines.index(f"[{title}]") + 1
    rows = []
    for line in lines[start:]:
        if line.startswith("["):
            break
        rows.append(line.split("\t"))
    return rows


def test_compute_sdw():
    code, out, _ = run("compute", "--lifting", "sdw", system_path("dfa-b"))
    assert code == 0
    rows = section(out, "gfp")
    assert rows[0] == ["", "p0", "p1", "p2"]
    assert rows[1] == ["p0", "0", "c", "1"]


def test_compute_sdw_numeric_c():
    code, out, _ = run("compute", "--lifting", "sdw", "--c", "1/3", system_path("dfa-b"))
    assert section(out, "gfp")[1] == ["p0", "0", "1/3", "1"]


def test_compute_divergence():
    code, out, _ = run("compute", "--lifting", "divergence", system_path("lts-d"))
    assert code == 0
    assert meta(out)["members"] == "s0, s1, s2"


def test_compute_simulation():
    code, out, _ = run("compute", "--lifting", "simulation", system_path("lts-s"))
    rows = {r[0]: r[1:] for r in section(out, "gfp")[1:]}
    names = section(out, "gfp")[0][1:]
    assert rows["y"][names.index("x")] == "1"
    assert rows["x"][names.index("y")] == "0"


def test_compute_trace_and_structured():
    code, out, _ = run("compute", "--lifting", "simulation", "--trace", "--format", "structured",
                       system_path("lts-s"))
    doc = json.loads(out)
    assert doc["meta"]["steps"] == 2
    assert "approximant 0" in doc["sections"]
    assert doc["sections"]["gfp"]["y"]["x"] == "1"


def test_check_similarity():
    code, out, _ = run("check", "--pipeline", "similarity", system_path("lts-s"))
    assert code == 0
    assert meta(out)["verdict"] == "HM theorem holds, depth 37"


def test_check_flags_non_stabilized_depth():
    code, out, _ = run("check", "--pipeline", "sdw", "--depth", "1", system_path("dfa-b"))
    assert code == 3
    assert meta(out)["stabilized"] == "no"
    assert "below stabilization" in meta(out)["verdict"]


def test_check_stabilized_at_depth_two():
    code, out, _ = run("check", "--pipeline", "sdw", "-k", "2", system_path("dfa-b"))
    assert code == 0 and meta(out)["stabilized"] == "yes"


def test_check_stage_divergence():
    code, out, _ = run("check", "--stage", "2", "--pipeline", "divergence")
    m = meta(out)
    assert m["stage"] == "2" and m["adequacy"] == "holds" and m["expressiveness"] == "fails"
    assert code == 3


def test_check_stage_sdw_and_mutant():
    code, out, _ = run("check", "--stage", "2", "--pipeline", "sdw")
    assert code == 0 and meta(out)["relation"] == "equal"
    code, out, _ = run("check", "--stage", "2", "--pipeline", "sdw", "--mutation", "drop-output")
    assert code == 3 and "formula=" in out


def test_check_bisimilarity_with_witness_failure():
    code, out, _ = run("check", "--pipeline", "bisimilarity", system_path("lts-s"))
    assert code == 0


def test_fuzz_small():
    code, out, _ = run("fuzz", "--count", "20", "--seed", "1", "--campaign", "sdw-oracle",
                       "--campaign", "simulation-oracle")
    assert code == 0
    rows = section(out, "campaigns")
    assert [r[3] for r in rows[1:]] == ["PASS", "PASS"]


def test_fuzz_failure_reports_shrunk_system():
    code, out, _ = run("fuzz", "--count", "60", "--campaign", "hm-bisimilarity")
    assert code == 3
    assert "[shrunk system: hm-bisimilarity]" in out


def test_laws():
    code, out, _ = run("laws", "--max-size", "2", "--max-labels", "1")
    assert code == 0
    code, out, _ = run("laws", "--lifting", "simulation", "--law", "lax", "--max-size", "2", "--max-labels", "1")
    assert code == 3
    assert "converse" in section(out, "counterexamples")[0][2]
    code, out, _ = run("laws", "--lifting", "simulation[size-guard]", "--law", "fibration", "--max-size", "2",
                       "--max-labels", "1")
    assert code == 3


def test_enumerate():
    code, out, _ = run("enumerate", "formulas", "--logic", "hm", "-k", "2")
    assert meta(out)["count"] == "4"
    code, out, _ = run("enumerate", "stage", "--kind", "dfa", "-k", "1", "--system", system_path("dfa-a"))
    assert section(out, "cone") == [["q0", "0", "(0; a: *)"], ["q1", "1", "(1; a: *)"]]
    code, out, _ = run("enumerate", "formulas", "--logic", "words", "-k", "3", "--system", system_path("dfa-b"))
    assert section(out, "formulas")[-1] == ["aa", "1", "1", "1"]


def test_eval():
    code, out, _ = run("eval", system_path("lts-s"), "<a>(<b>T & <c>T)")
    assert code == 0
    assert section(out, "satisfaction")[1] == ["x", "1"]


def test_figure(tmp_path):
    path = tmp_path / "sim.png"
    code, out, _ = run("compute", "--lifting", "simulation", "--trace", "--figure", str(path), system_path("lts-s"))
    assert code == 0 and path.stat().st_size > 1000
    path = tmp_path / "check.png"
    code, out, _ = run("check", "--pipeline", "sdw", "--figure", str(path), system_path("dfa-b"))
    assert path.exists() and meta(out)["figure"] == str(path)


@pytest.mark.parametrize("argv,code", [
    (("compute", "--lifting", "sdw", "missing.sys"), 1),
    (("compute", "--lifting", "sdw", "LTS_S"), 2),
    (("compute", "--lifting", "bogus", "LTS_S"), 2),
    (("compute", "--lifting", "divergence", "LTS_S"), 2),
    (("check", "--pipeline", "divergence", "LTS_S"), 2),
    (("check", "--pipeline", "similarity"), 1),
    (("eval", "LTS_S", "<a>("), 1),
    (("eval", "LTS_S", "<q>T"), 1),
    (("enumerate", "formulas", "--logic", "hm", "-k", "3", "--labels", "a,b"), 2),
    (("enumerate", "stage", "--kind", "lts", "-k", "3", "--labels", "a,b"), 2),
    (("laws", "--max-size", "4"), 2),
    (("compute",), 2),
])
def test_exit_codes(argv, code):
    argv = [system_path("lts-s") if a == "LTS_S" else a for a in argv]
    assert run(*argv)[0] == code


def test_bad_system_file(tmp_path):
    p = tmp_path / "bad.sys"
    p.write_text("lts\nlabels: a\nstates: s\ns: a -> {t}\n")
    code, _, err = run("compute", "--lifting", "simulation", str(p))
    assert code == 1 and "t" in err


def _cli(args, seed):
    env = dict(os.environ, PYTHONHASHSEED=str(seed))
    return subprocess.run([sys.executable, "-m", "hmlift.cli", *args], capture_output=True, env=env).stdout


@pytest.mark.parametrize("args", [
    ["fuzz", "--count", "15", "--seed", "5", "--campaign", "hm-similarity", "--campaign", "hm-bisimilarity"],
    ["check", "--pipeline", "similarity", "--format", "structured", system_path("lts-s")],
    ["check", "--stage", "2", "--pipeline", "similarity", "--labels", "a,b", "--mutation", "swap-forth"],
    ["enumerate", "formulas", "--logic", "hm", "-k", "2", "--labels", "b,a"],
])
def test_determinism_across_hash_seeds(args):
    assert _cli(args, 0) == _cli(args, 12345)
