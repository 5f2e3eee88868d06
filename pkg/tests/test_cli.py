import json
import subprocess
import sys

import numpy as np
import pytest

from esia.attack import generate_schedule, strip_map
from esia.cli import EXIT_IO, EXIT_MANIFEST, EXIT_USAGE, main
from esia.core import psnr
from esia.fixtures import gradient_image, strip_fixture_corpus
from esia.imageio import load_image, save_png
from esia.manifest import AttackManifest


@pytest.fixture
def corpus_dir(tmp_path):
    d = tmp_path / "corpus"
    save_png(d / "grad.png", gradient_image(100, 24, (0, 0, 0), (240, 180, 120), 90.0))
    save_png(d / "sub" / "flat.png", np.full((40, 16, 3), (30, 160, 90), np.uint8))
    return d


def run(*args):
    return main([str(a) for a in args])


def test_schedule_command(capsys):
    assert run("schedule", "--height", 224, "--n", 22, "--seed", 42, "--count", 3) == 0
    out = json.loads(capsys.readouterr().out)["schedules"]
    assert out[0]["rows"] == list(generate_schedule(224, 22, 42).rows)
    assert [s["seed"] for s in out] == [42, 43, 44]
    assert out[2]["rows"] == list(generate_schedule(224, 22, 44).rows)


def test_schedule_trivial(capsys):
    run("schedule", "--height", 100, "--n", 0)
    assert json.loads(capsys.readouterr().out)["schedules"][0]["rows"] == []
    run("schedule", "--height", 10, "--n", 10)
    assert json.loads(capsys.readouterr().out)["schedules"][0]["rows"] == list(range(10))


def test_schedule_usage_errors(capsys):
    assert run("schedule", "--height", 5, "--n", 6) == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        run("schedule", "--height", 5, "--n", -1)
    assert exc.value.code == EXIT_USAGE


def test_attack_n0_is_identity(corpus_dir, tmp_path):
    out = tmp_path / "out"
    assert run("attack", corpus_dir, out, "--mode", "pixel-loss", "--n", 0) == 0
    for name in ("grad.png", "sub/flat.png"):
        assert np.array_equal(load_image(out / name), load_image(corpus_dir / name))
    m = AttackManifest.from_json((out / "manifest.json").read_text())
    assert [e.image_id for e in m.entries] == ["grad.png", "sub/flat.png"]


def test_attack_deterministic(corpus_dir, tmp_path):
    for d in ("a", "b"):
        assert run("attack", corpus_dir, tmp_path / d, "--fraction", 0.15, "--seed", 5,
                   "--workers", 3) == 0
    for name in ("grad.png", "sub/flat.png", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    m = AttackManifest.from_json((tmp_path / "a" / "manifest.json").read_text())
    assert {e.image_id: e.n for e in m.entries} == {"grad.png": 15, "sub/flat.png": 6}


def test_attack_color_strips_match_strip_map(tmp_path):
    src = tmp_path / "src"
    img = np.full((48, 12, 3), (200, 30, 30), np.uint8)
    save_png(src / "red.png", img)
    assert run("attack", src, tmp_path / "out", "--n", 5, "--seed", 1) == 0
    entry = AttackManifest.from_json((tmp_path / "out" / "manifest.json").read_text()).entries[0]
    out = load_image(tmp_path / "out" / "red.png")
    sm = strip_map(entry.schedule)
    for j in sm.corrupted:
        if all(sm.statuses[k] == sm.statuses[j] for k in (j - 1, j + 1) if 0 <= k < len(sm)):
            assert not np.array_equal(out[j], img[j])
    for j in sm.rows_with("clean"):
        if all(sm.statuses[k] == sm.statuses[j] for k in (j - 1, j + 1) if 0 <= k < len(sm)):
            assert np.array_equal(out[j], img[j])


def test_attack_bad_inputs(tmp_path, capsys):
    assert run("attack", tmp_path / "nope", tmp_path / "o", "--n", 1) == EXIT_IO
    (tmp_path / "junk").mkdir()
    (tmp_path / "junk" / "x.png").write_bytes(b"not a png")
    assert run("attack", tmp_path / "junk", tmp_path / "o", "--n", 1) == EXIT_IO
    assert run("attack", tmp_path / "junk", tmp_path / "o") == EXIT_USAGE


def test_mitigate_roundtrip(corpus_dir, tmp_path):
    att, mit = tmp_path / "att", tmp_path / "mit"
    assert run("attack", corpus_dir, att, "--mode", "pixel-loss", "--n", 0) == 0
    assert run("mitigate", att, mit) == 0
    assert np.array_equal(load_image(mit / "grad.png"), load_image(corpus_dir / "grad.png"))


def test_mitigate_constant_and_gradient(tmp_path):
    src = tmp_path / "src"
    grad = gradient_image(100, 24, (0, 0, 0), (240, 180, 120), 90.0)
    flat = np.full((100, 24, 3), 77, np.uint8)
    save_png(src / "grad.png", grad)
    save_png(src / "flat.png", flat)
    att, mit = tmp_path / "att", tmp_path / "mit"
    assert run("attack", src, att, "--mode", "pixel-loss", "--n", 10, "--seed", 4) == 0
    assert run("mitigate", att, mit, "--manifest", att / "manifest.json") == 0
    assert np.array_equal(load_image(mit / "flat.png"), flat)
    assert psnr(grad, load_image(mit / "grad.png")) > psnr(grad, load_image(att / "grad.png"))


def test_mitigate_manifest_errors(corpus_dir, tmp_path, capsys):
    att = tmp_path / "att"
    run("attack", corpus_dir, att, "--n", 2)
    assert run("mitigate", att, tmp_path / "m", "--manifest", tmp_path / "missing.json") == EXIT_MANIFEST
    (tmp_path / "bad.json").write_text("{")
    assert run("mitigate", att, tmp_path / "m", "--manifest", tmp_path / "bad.json") == EXIT_MANIFEST
    save_png(att / "stray.png", np.zeros((4, 4, 3), np.uint8))
    assert run("mitigate", att, tmp_path / "m") == EXIT_MANIFEST
    assert "stray.png" in capsys.readouterr().err


def write_eval_inputs(tmp_path, levels):
    corpus = tmp_path / "fixture"
    labels = {}
    for item in strip_fixture_corpus():
        save_png(corpus / f"{item.image_id}.png", item.image)
        labels[f"{item.image_id}.png"] = item.label
    (tmp_path / "labels.json").write_text(json.dumps(labels))
    cfg = {"n_levels": levels, "base_seed": 7, "adapter": {"kind": "toy"}}
    (tmp_path / "config.json").write_text(json.dumps(cfg))
    return corpus


def test_eval_zero_level(tmp_path):
    corpus = write_eval_inputs(tmp_path, [0])
    assert run("eval", corpus, "--labels", tmp_path / "labels.json", "--config",
               tmp_path / "config.json", "--output", tmp_path / "rep") == 0
    rep = json.loads((tmp_path / "rep" / "degradation_report.json").read_text())
    assert rep["levels"][0]["total_degradation"] == 0.0
    assert rep["pooled_strip_share"] is None


def test_eval_deterministic_and_csv_labels(tmp_path):
    corpus = write_eval_inputs(tmp_path, [0, 6])
    labels = json.loads((tmp_path / "labels.json").read_text())
    (tmp_path / "labels.csv").write_text(
        "image_id,label\n" + "".join(f"{k},{v}\n" for k, v in labels.items()))
    for d, lab in (("r1", "labels.json"), ("r2", "labels.csv")):
        assert run("eval", corpus, "--labels", tmp_path / lab, "--config", tmp_path / "config.json",
                   "--output", tmp_path / d) == 0
    for name in ("corpus_result.json", "degradation_report.json"):
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()


def test_eval_label_mismatch(tmp_path, capsys):
    corpus = write_eval_inputs(tmp_path, [0])
    (tmp_path / "labels.json").write_text(json.dumps({"band_00.png": "red", "ghost.png": "red"}))
    assert run("eval", corpus, "--labels", tmp_path / "labels.json", "--config",
               tmp_path / "config.json", "--output", tmp_path / "rep") == EXIT_IO
    err = capsys.readouterr().err
    assert "ghost.png" in err and "band_01.png" in err


def test_eval_bad_config(tmp_path):
    corpus = write_eval_inputs(tmp_path, [0])
    (tmp_path / "config.json").write_text(json.dumps({"n_levels": [1], "adapter": {"kind": "nope"}}))
    assert run("eval", corpus, "--labels", tmp_path / "labels.json", "--config",
               tmp_path / "config.json", "--output", tmp_path / "rep") == EXIT_USAGE


def test_metrics(tmp_path, capsys):
    a = np.zeros((10, 10, 3), np.uint8)
    b = a.copy()
    b[0, 0, 0] = 1
    save_png(tmp_path / "x" / "a.png", a)
    save_png(tmp_path / "y" / "a.png", b)
    save_png(tmp_path / "y" / "same.png", a)
    save_png(tmp_path / "x" / "same.png", a)
    assert run("metrics", tmp_path / "x", tmp_path / "y") == 0
    out = capsys.readouterr().out.splitlines()
    assert out == ["a.png\t72.9020", "same.png\tidentical"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "esia", "schedule", "--height", "8", "--n", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "schedules" in proc.stdout
