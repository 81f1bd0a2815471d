"""Tests for the cubicdyn console entry."""
import json

import pytest

import app


def run(capsys, *argv):
    code = app.main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        app.main(["--version"])
    assert exc.value.code == 0
    assert "cubicdyn" in capsys.readouterr().out


def test_classify_word(capsys):
    code, out = run(capsys, "classify-word", "yzyzxyxyzyzxyx")
    payload = json.loads(out)
    assert code == 0
    assert payload["kind"] == "Hyperbolic"
    assert (payload["ind"], payload["attr"]) == ("v1", "v2")
    assert payload["length"] == 14


def test_classify_g_alphabet(capsys):
    code, out = run(capsys, "classify-word", "aBc")
    assert code == 0
    assert json.loads(out)["word"] == "zyzxyx"


def test_bad_word_is_usage_error(capsys):
    code, _ = run(capsys, "classify-word", "xxq")
    assert code == 2


def test_orbit_csv(capsys):
    code, out = run(capsys, "orbit", "--word", "zyx", "--point=-3,-3,-3")
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == "step,prefix,x,y,z,residual"
    assert len(lines) == 5


def test_orbit_bad_point(capsys):
    code, _ = run(capsys, "orbit", "--word", "zy", "--point", "1,2")
    assert code == 2


def test_unknown_family(capsys):
    code, _ = run(capsys, "certify-fatou", "--params", "bogus:1")
    assert code == 2


def test_certify_fatou_exit_codes(capsys):
    code, out = run(capsys, "certify-fatou", "--point=-3,-3,-3", "--depth", "4")
    assert code == 0
    assert json.loads(out)["status"] == "Certified"
    code, out = run(capsys, "certify-fatou", "--point", "0,0,0", "--depth", "4")
    assert code == 1
    assert json.loads(out)["status"] == "FailedWithWitness"


def test_certify_fatou_default_seed(capsys):
    code, out = run(capsys, "certify-fatou", "--depth", "4")
    assert code == 0
    assert json.loads(out)["seed"]["status"] == "Certified"


def test_bq_test(capsys):
    code, out = run(capsys, "bq-test", "--point=-3,-3,-3", "--depth", "4")
    assert code == 0
    assert json.loads(out)["condition1"] is True


def test_cascade_markoff(capsys):
    code, out = run(capsys, "cascade", "--levels", "1", "--samples", "64")
    payload = json.loads(out)
    assert code == 0
    assert payload["decay_ok"] is True
    assert len(payload["budget_line"]) == 2


def test_cascade_unknown_family(capsys):
    code, _ = run(capsys, "cascade", "--family", "picard")
    assert code == 2


def test_escape_dumps_lambda(capsys):
    code, out = run(capsys, "escape", "--levels", "1")
    payload = json.loads(out)
    assert code == 0
    assert 0 < payload["lambda"] < 1
    assert [lv["vertex"] for lv in payload["levels"]] == ["v3", "v2"]


def test_picard_verify(capsys):
    code, out = run(capsys, "picard-verify", "--word", "zyzx", "--samples", "200")
    payload = json.loads(out)
    assert code == 0
    assert payload["jacobian_identities"]["ok"] is True


def test_fiber_table(capsys):
    code, out = run(capsys, "fiber-table", "--values", "0,2.5")
    assert code == 0
    assert len(out.strip().splitlines()) == 3


def test_shear_census(capsys):
    code, out = run(capsys, "shear-census", "--samples", "50")
    assert code == 0
    assert json.loads(out)["counts"]["other"] == 0


def test_output_file(capsys, tmp_path):
    target = tmp_path / "w.json"
    code, out = run(capsys, "classify-word", "zy", "--out", str(target))
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text(encoding="utf-8"))["kind"] == "Parabolic"


SCAN = """
family: torus:0
axes:
  - target: D
    start: 0
    stop: 8
    num: 3
probes: [fatou]
fatou_depth: 4
"""


def test_scan_resume_and_heatmap(capsys, tmp_path):
    cfg = tmp_path / "scan.yaml"
    cfg.write_text(SCAN, encoding="utf-8")
    out = tmp_path / "scan.jsonl"
    code, _ = run(capsys, "scan", str(cfg), "--out", str(out), "--workers", "1")
    assert code == 1  # D = 4 has no escape root
    first = out.read_bytes()
    assert len(first.splitlines()) == 4
    code, _ = run(capsys, "scan", str(cfg), "--out", str(out), "--workers", "1", "--resume")
    assert code == 0
    assert out.read_bytes() == first
    ppm = tmp_path / "depth.ppm"
    code, _ = run(capsys, "heatmap", str(out), "--field", "fatou.depth", "--out", str(ppm))
    assert code == 0
    assert ppm.read_bytes().startswith(b"P6\n1 3\n255\n")


def test_scan_needs_output(capsys, tmp_path):
    cfg = tmp_path / "scan.yaml"
    cfg.write_text(SCAN, encoding="utf-8")
    code, _ = run(capsys, "scan", str(cfg))
    assert code == 2


def test_scan_missing_config(capsys, tmp_path):
    code, _ = run(capsys, "scan", str(tmp_path / "nope.yaml"), "--out", str(tmp_path / "o"))
    assert code == 2


def test_heatmap_missing_records(capsys, tmp_path):
    code, _ = run(
        capsys, "heatmap", str(tmp_path / "none.jsonl"), "--field", "x", "--out", str(tmp_path / "m.ppm")
    )
    assert code == 2
