import json
import subprocess
import sys
from pathlib import Path

import pytest

from autogrp import cli, gallery
from autogrp.files import load_structure


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out)


# ------------------------------------------------------------------ check

def test_check_ft_json(capsys):
    code, doc = run_json(capsys, "check", "ft", "--structure", "f2_shortlex.json", "--max-len", "4")
    assert code == 0
    assert doc["verdict"] == "constant" and doc["value"] == 1
    assert doc["growth_trace"][0] == [1, 1]


def test_check_ft_table(capsys):
    code, out, _ = run(capsys, "check", "ft", "--structure", "z_geo.json", "--format", "table")
    assert code == 0
    assert out.startswith("ft_constant: constant value=1")


def test_check_failure_exit_code(capsys):
    code, doc = run_json(capsys, "check", "ft", "--structure", "z_a2.json", "--max-len", "12")
    assert code == 2
    assert doc["verdict"] == "failure" and "witness" in doc


@pytest.mark.parametrize("kind,extra", [
    ("async_ft", []),
    ("departure", ["--radius", "2"]),
    ("kuniq", ["--radius", "3"]),
    ("section", ["--radius", "3"]),
])
def test_check_kinds(capsys, kind, extra):
    code, doc = run_json(capsys, "check", kind, "--structure", "z_geo.json", "--max-len", "6", *extra)
    assert code == 0
    assert doc["verdict"] == "constant"


def test_check_departure_values(capsys):
    code, doc = run_json(capsys, "check", "departure", "--structure", "z_geo.json",
                         "--radius", "2", "--max-len", "8")
    assert doc["value"] == {"0": 1, "1": 2, "2": 3}


def test_check_equivalence(capsys):
    code, doc = run_json(capsys, "check", "equivalence", "--left", "z_geo.json",
                         "--right", "z_L1.json", "--max-len", "6")
    assert code == 0 and doc["kind"] == "equivalence_asynchronous"


def test_output_file(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, stdout, _ = run(capsys, "check", "ft", "--structure", "z_geo.json", "-o", str(out))
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["value"] == 1


# -------------------------------------------------------------------- brp

def test_brp_sync(capsys):
    code, doc = run_json(capsys, "brp", "sync", "--hom", "inner_a.json",
                         "--structure", "f2_shortlex.json", "--max-len", "5")
    assert code == 0 and doc["value"] == 2


def test_brp_sync_failure(capsys):
    code, doc = run_json(capsys, "brp", "sync", "--hom", "square.json",
                         "--structure", "z_geo.json", "--max-len", "10")
    assert code == 2 and doc["witness"]["distance"] >= 4


def test_brp_ft(capsys):
    code, doc = run_json(capsys, "brp", "ft", "--hom", "inner_a.json",
                         "--structure", "f2_shortlex.json", "--max-len", "3", "--p", "1")
    assert code == 0 and doc["extra"]["p"] == 1


def test_decide_free(capsys):
    code, doc = run_json(capsys, "brp", "decide-free", "--hom", "inner_a.json")
    assert code == 0 and doc["sync_brp"] and doc["conjugator"] == "a"
    code, doc = run_json(capsys, "brp", "decide-free", "--hom", "collapse.json")
    assert code == 2 and not doc["sync_brp"]


def test_gromov(capsys):
    code, doc = run_json(capsys, "brp", "gromov", "--hom", "inner_a.json", "--radius", "3")
    assert code == 0 and doc["value"] <= 2


# --------------------------------------------------------------- pipeline

def test_pipeline_kernel(capsys):
    code, doc = run_json(capsys, "pipeline", "kernel", "--hom", "proj.json",
                         "--structure", "zz_astarbstar.json", "--max-len", "4")
    assert code == 0
    assert len(doc["ball"]) == 9


def test_pipeline_fixed(capsys):
    code, doc = run_json(capsys, "pipeline", "fixed", "--hom", "invert_b.json",
                         "--structure", "f2_shortlex.json", "--max-len", "4")
    assert code == 0 and set(doc["ball"]) == {"1", "a", "aa", "aaa", "aaaa",
                                                 "A", "AA", "AAA", "AAAA"}


def test_pipeline_equalizer(capsys):
    code, doc = run_json(capsys, "pipeline", "equalizer", "--hom", "swap.json",
                         "--hom2", "swap.json", "--structure", "f2_shortlex.json",
                         "--max-len", "2")
    assert code == 0 and len(doc["ball"]) == 17


def test_pipeline_centralizer(capsys):
    code, out, _ = run(capsys, "pipeline", "centralizer", "--elements", "a",
                       "--structure", "f2_shortlex.json", "--max-len", "3", "--format", "table")
    assert code == 0
    assert out.startswith("centralizer: 7 elements")


# -------------------------------------------------------------- construct

def test_construct_product_roundtrip(capsys, tmp_path):
    out = tmp_path / "p.json"
    code, _, _ = run(capsys, "construct", "product", "--left", "z_geo.json",
                     "--right", "z_geo.json", "-o", str(out))
    assert code == 0
    s = load_structure(out)
    assert len(s.alphabet) == 8
    code, doc = run_json(capsys, "check", "ft", "--structure", str(out), "--max-len", "5")
    assert code == 0 and doc["value"] == 1


def test_construct_induced_roundtrip(capsys, tmp_path):
    out = tmp_path / "i.json"
    code, _, _ = run(capsys, "construct", "induced", "--structure", "f2_shortlex.json",
                     "--hom", "inner_a.json", "--max-len", "4", "-o", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    path = tmp_path / "ind.json"
    path.write_text(json.dumps(doc["structure"]))
    code, rep = run_json(capsys, "check", "ft", "--structure", str(path), "--max-len", "4")
    assert code == 0 and rep["value"] == doc["report"]["value"]


def test_construct_rewrite(capsys):
    code, doc = run_json(capsys, "construct", "rewrite", "--structure", "f2_shortlex.json",
                         "--subgroup", "ab", "--max-len", "5")
    assert code == 0 and doc["k"] == 1
    assert doc["sandwich"]["verdict"] == "constant"


def test_construct_tilde(capsys):
    code, doc = run_json(capsys, "construct", "tilde", "--structure", "f2_shortlex.json",
                         "--hom", "inner_a.json", "--max-len", "5")
    assert code == 0 and doc["ok"]


def test_construct_tilde_infinite_kernel(capsys):
    code, _, err = run(capsys, "construct", "tilde", "--structure", "zz_astarbstar.json",
                       "--hom", "proj.json", "--max-len", "4")
    assert code == 1 and "kernel" in err


# ---------------------------------------------------------------- errors

def test_usage_errors(capsys):
    assert run(capsys, "check", "ft")[0] == 1
    assert run(capsys, "check", "nonsense")[0] == 1
    assert run(capsys, "check", "ft", "--structure", "missing.json")[0] == 1
    assert run(capsys, "check", "ft", "--structure", "z_geo.json", "--max-len", "0")[0] == 1
    assert run(capsys)[0] == 1


def test_resource_cap_is_exit_one(capsys, monkeypatch):
    monkeypatch.setenv("AUTOGRP_BALL_CAP", "10")
    code, _, err = run(capsys, "check", "section", "--structure", "f2_shortlex.json",
                       "--radius", "4")
    assert code == 1 and "cap" in err


def test_bad_json_file(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    code, _, err = run(capsys, "check", "ft", "--structure", str(p))
    assert code == 1


# ---------------------------------------------------------------- gallery

def test_gallery_only(capsys):
    code, out, _ = run(capsys, "gallery", "--only", "c8")
    assert code == 0
    assert "PASS" in out and "c8" in out and "1/1 rows pass" in out


def test_gallery_json(capsys):
    code, doc = run_json(capsys, "gallery", "--only", "c5", "--format", "json")
    assert code == 0 and doc[0]["id"] == "c5" and doc[0]["pass"]


def test_gallery_unknown_id(capsys):
    assert run(capsys, "gallery", "--only", "c99")[0] == 1


def test_gallery_missing_data(capsys, monkeypatch, tmp_path):
    monkeypatch.setattr(gallery, "gallery_dir", lambda: tmp_path / "nowhere")
    code, _, err = run(capsys, "gallery")
    assert code == 1 and "missing" in err


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "autogrp.cli", "check", "ft", "--structure",
                        "z_geo.json", "--max-len", "3"], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["value"] == 1
