import subprocess
import sys

import numpy as np
import pytest

from lesionseg.cli import main
from lesionseg.config import CONFIG_ENV_VAR, PipelineConfig
from lesionseg.evaluation import jaccard
from lesionseg.imgcore import load_image, load_mask, save_image
from lesionseg.synthetic import case_rng, make_case


@pytest.fixture(scope="module")
def suite(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli_suite")
    assert main(["generate", "--out", str(d), "--count", "3", "--seed", "5"]) == 0
    return d


def test_generate_counts(tmp_path):
    assert main(["generate", "--out", str(tmp_path), "--count", "5", "--seed", "1"]) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert len(names) == 10
    assert sum(n.endswith("_segmentation.png") for n in names) == 5


def test_generate_is_deterministic(tmp_path):
    for sub in ("a", "b"):
        assert main(["generate", "--out", str(tmp_path / sub), "--count", "2", "--seed", "9",
                     "--hair", "--vignette"]) == 0
    for p in (tmp_path / "a").iterdir():
        assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes()


def test_generated_truth_is_the_rasterized_ellipse(suite):
    for i in range(3):
        case = make_case(case_rng(5, i))
        truth = load_mask(suite / f"synth_{i:04d}_segmentation.png")
        assert jaccard(truth, case.ellipse.rasterize(*truth.shape)) == 1.0
        assert (load_image(suite / f"synth_{i:04d}.png") == case.image).all()


def test_generate_bad_arguments(tmp_path):
    assert main(["generate", "--out", str(tmp_path), "--count", "-1", "--seed", "1"]) == 2
    assert main(["generate", "--out", str(tmp_path)]) == 2
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["generate", "--out", str(blocker / "sub"), "--count", "1", "--seed", "1"]) == 2


@pytest.mark.parametrize("method", ["watershed", "meanshift"])
def test_segment_writes_mask(tmp_path, suite, method, capsys):
    out = tmp_path / "m.png"
    overlay = tmp_path / "o.png"
    code = main(["segment", "--method", method, "--in", str(suite / "synth_0000.png"),
                 "--out", str(out), "--overlay", str(overlay),
                 "--truth", str(suite / "synth_0000_segmentation.png")])
    assert code == 0
    assert capsys.readouterr().out == ""
    mask = load_mask(out)
    assert jaccard(mask, load_mask(suite / "synth_0000_segmentation.png")) >= 0.85
    assert load_image(overlay).shape == mask.shape + (3,)


def test_segment_exit_codes(tmp_path, capsys):
    assert main(["segment", "--in", str(tmp_path / "none.png"), "--out", str(tmp_path / "m.png")]) == 2
    assert "error" in capsys.readouterr().err
    flat = tmp_path / "flat.png"
    save_image(np.full((40, 40, 3), 120, np.uint8), flat)
    assert main(["segment", "--in", str(flat), "--out", str(tmp_path / "m.png")]) == 1
    assert main(["segment", "--method", "meanshift", "--in", str(flat),
                 "--out", str(tmp_path / "m.png")]) == 1
    assert main(["segment", "--in", str(flat)]) == 2
    assert main(["segment", "--method", "kmeans", "--in", str(flat), "--out", "x.png"]) == 2
    assert main([]) == 2


def test_segment_unwritable_output(tmp_path, suite):
    assert main(["segment", "--in", str(suite / "synth_0000.png"),
                 "--out", str(tmp_path / "no" / "m.png")]) == 2


def test_evaluate_report_and_stdout(tmp_path, suite, capsys):
    report = tmp_path / "r.csv"
    assert main(["evaluate", "--method", "watershed", "--images", str(suite), "--truth", str(suite),
                 "--report", str(report)]) == 0
    out = capsys.readouterr().out
    lines = report.read_text().splitlines()
    assert lines[0] == "image_id,method,variant,iou,runtime_ms,error"
    assert len(lines) == 5 and lines[-1].startswith("MEAN,,,")
    mean = float(lines[-1].split(",")[3])
    assert out == f"mean IoU: {mean * 100:.2f}%\n"


def test_evaluate_empty_dir(tmp_path):
    assert main(["evaluate", "--images", str(tmp_path), "--truth", str(tmp_path),
                 "--report", str(tmp_path / "r.csv")]) == 2
    assert main(["evaluate", "--images", str(tmp_path / "x"), "--truth", str(tmp_path),
                 "--report", str(tmp_path / "r.csv")]) == 2


def test_evaluate_jobs_identical(tmp_path, suite):
    for jobs in ("1", "4"):
        assert main(["evaluate", "--method", "meanshift", "--images", str(suite), "--truth", str(suite),
                     "--report", str(tmp_path / f"r{jobs}.csv"), "--jobs", jobs]) == 0
    assert (tmp_path / "r1.csv").read_bytes() == (tmp_path / "r4.csv").read_bytes()


def test_timings_fill_runtime(tmp_path, suite):
    report = tmp_path / "r.csv"
    assert main(["evaluate", "--images", str(suite), "--truth", str(suite),
                 "--report", str(report), "--timings"]) == 0
    row = report.read_text().splitlines()[1].split(",")
    assert float(row[4]) > 0


def test_dump_config_reflects_overrides(capsys):
    assert main(["segment", "--dump-config", "--set", "median_radius=4",
                 "--set", "color_mode=color", "--set", "fg_dist_fraction=0.5"]) == 0
    text = capsys.readouterr().out
    cfg = PipelineConfig.from_text(text)
    assert cfg == PipelineConfig(median_radius=4, color_mode="color", fg_dist_fraction=0.5)
    for line in ("median_radius = 4", "color_mode = color", "fg_dist_fraction = 0.5"):
        assert line in text.splitlines()


def test_unknown_key_is_an_error(capsys):
    assert main(["evaluate", "--dump-config", "--set", "median_raduis=4"]) == 2
    assert "median_raduis" in capsys.readouterr().err


def test_config_file_and_env_var(tmp_path, monkeypatch, capsys):
    path = tmp_path / "c.cfg"
    path.write_text("inpaint_method = diffusion\n")
    assert main(["segment", "--dump-config", "--config", str(path)]) == 0
    assert "inpaint_method = diffusion" in capsys.readouterr().out
    monkeypatch.setenv(CONFIG_ENV_VAR, str(path))
    assert main(["segment", "--dump-config", "--set", "median_radius=1"]) == 0
    cfg = PipelineConfig.from_text(capsys.readouterr().out)
    assert cfg.inpaint_method == "diffusion" and cfg.median_radius == 1
    monkeypatch.setenv(CONFIG_ENV_VAR, str(tmp_path / "missing.cfg"))
    assert main(["segment", "--dump-config"]) == 2


def test_module_entry_point_stdout_is_clean(tmp_path, suite):
    proc = subprocess.run(
        [sys.executable, "-m", "lesionseg", "segment", "--in", str(suite / "synth_0001.png"),
         "--out", str(tmp_path / "m.png")],
        capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout == ""
