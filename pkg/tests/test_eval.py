import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.extra.numpy import arrays

from lesionseg.evaluation import (
    CSV_HEADER, EvalRecord, EvalSummary, EvaluationError, evaluate_batch, find_truth, jaccard,
    list_images, render_overlay, score_masks, write_report,
)
from lesionseg.imgcore import save_mask
from lesionseg.morphology import disk, erode_b
from lesionseg.synthetic import generate_suite

from oracles import jaccard_count

masks = arrays(np.bool_, (9, 9))


def test_jaccard_examples():
    a = np.zeros((4, 4), bool)
    a[1:3, 1:3] = True
    b = np.zeros((4, 4), bool)
    b[0, 0] = True
    assert jaccard(a, a) == 1.0
    assert jaccard(a, b) == 0.0
    one = np.zeros((4, 4), bool)
    one[2, 2] = True
    two = one.copy()
    two[2, 3] = True
    assert jaccard(one, two) == 0.5
    empty = np.zeros((4, 4), bool)
    assert jaccard(empty, empty) == 1.0


def test_jaccard_shape_mismatch():
    with pytest.raises(ValueError):
        jaccard(np.zeros((3, 3), bool), np.zeros((3, 4), bool))


@settings(max_examples=200)
@given(masks, masks)
def test_jaccard_symmetric_identity_and_oracle(a, b):
    assert jaccard(a, b) == jaccard(b, a)
    assert jaccard(a, a) == 1.0
    assert jaccard(a, b) == pytest.approx(jaccard_count(a, b))
    assert 0.0 <= jaccard(a, b) <= 1.0


@settings(max_examples=200)
@given(masks, masks)
def test_single_flip_sensitivity(pred, truth):
    if not (pred | truth).any():
        return
    union = np.count_nonzero(pred | truth)
    base = jaccard(pred, truth)
    for y, x in [(0, 0), (4, 4), (8, 2)]:
        flipped = pred.copy()
        flipped[y, x] = not flipped[y, x]
        assert abs(jaccard(flipped, truth) - base) <= 1.0 / union + 1e-12


def test_record_rejects_bad_iou():
    with pytest.raises(ValueError):
        EvalRecord("a", "watershed", "telea", 1.5, 0.0)


def test_summary_mean():
    recs = [EvalRecord(str(i), "watershed", "telea", v, 1.0) for i, v in enumerate((0.2, 0.5, 0.8))]
    s = EvalSummary(recs)
    assert s.count == 3 and s.mean_iou == pytest.approx(0.5)
    assert EvalSummary().mean_iou == 0.0


def test_report_format(tmp_path):
    path = tmp_path / "r.csv"
    write_report(EvalSummary([EvalRecord("a", "watershed", "telea", 0.5, 12.0)]), path)
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode("utf-8").splitlines()
    assert lines == ["image_id,method,variant,iou,runtime_ms,error",
                     "a,watershed,telea,0.5,,", "MEAN,,,0.5,,"]


def test_report_with_runtime(tmp_path):
    path = tmp_path / "r.csv"
    write_report(EvalSummary([EvalRecord("a", "meanshift", "gray", 0.25, 12.0)]), path, include_runtime=True)
    rows = list(csv.reader(path.open()))
    assert rows[1][4] == "12.000"


def test_report_unwritable(tmp_path):
    with pytest.raises(EvaluationError):
        write_report(EvalSummary(), tmp_path / "missing" / "r.csv")


def test_truth_lookup(tmp_path):
    img = tmp_path / "x.png"
    img.write_bytes(b"")
    assert find_truth(img, tmp_path) is None  # never the image itself
    truth_dir = tmp_path / "t"
    truth_dir.mkdir()
    (truth_dir / "x.png").write_bytes(b"")
    assert find_truth(img, truth_dir) == truth_dir / "x.png"
    (truth_dir / "x_segmentation.png").write_bytes(b"")
    assert find_truth(img, truth_dir) == truth_dir / "x_segmentation.png"


@pytest.fixture(scope="module")
def suite(tmp_path_factory):
    d = tmp_path_factory.mktemp("suite")
    generate_suite(d, 3, seed=11)
    return d


def test_list_images_skips_truth(suite):
    assert [p.name for p in list_images(suite)] == ["synth_0000.png", "synth_0001.png", "synth_0002.png"]


@pytest.mark.parametrize("method", ["watershed", "meanshift"])
def test_batch_of_three(suite, method):
    s = evaluate_batch(suite, suite, method)
    assert s.count == 3
    assert [r.image_id for r in s.records] == ["synth_0000", "synth_0001", "synth_0002"]
    assert all(not r.error for r in s.records)
    assert s.mean_iou == pytest.approx(sum(r.iou for r in s.records) / 3)
    assert s.mean_iou >= 0.9


def test_unreadable_image_recorded(tmp_path, suite):
    for p in suite.iterdir():
        (tmp_path / p.name).write_bytes(p.read_bytes())
    (tmp_path / "synth_0001.png").write_bytes(b"\x89PNG\r\n\x1a\nbroken")
    s = evaluate_batch(tmp_path, tmp_path, "watershed")
    assert s.count == 3
    bad = s.records[1]
    assert bad.iou == 0.0 and bad.error.startswith("io:")
    assert not s.records[0].error and not s.records[2].error


def test_missing_truth_recorded(tmp_path, suite):
    (tmp_path / "synth_0000.png").write_bytes((suite / "synth_0000.png").read_bytes())
    s = evaluate_batch(tmp_path, tmp_path / ".", "watershed")
    assert s.records[0].error == "missing ground truth"


def test_batch_errors(tmp_path):
    with pytest.raises(EvaluationError):
        evaluate_batch(tmp_path, tmp_path, "watershed")
    with pytest.raises(EvaluationError):
        evaluate_batch(tmp_path / "nope", tmp_path, "watershed")
    with pytest.raises(EvaluationError):
        evaluate_batch(tmp_path, tmp_path, "snakes")


def test_self_score_is_perfect(tmp_path, suite):
    for p in suite.glob("*_segmentation.png"):
        (tmp_path / p.name).write_bytes(p.read_bytes())
    s = score_masks(tmp_path, tmp_path)
    assert s.count == 3 and s.mean_iou == 1.0


def test_overlay_counts():
    img = np.full((20, 20, 3), 128, np.uint8)
    assert (render_overlay(img, np.zeros((20, 20), bool)) == img).all()
    pred = np.zeros((20, 20), bool)
    pred[4:14, 5:15] = True
    truth = np.zeros((20, 20), bool)
    truth[8:18, 2:12] = True
    out = render_overlay(img, pred, truth)
    green = (out == (0, 255, 0)).all(axis=2)
    red = (out == (255, 0, 0)).all(axis=2)
    assert green.sum() == pred.sum() - erode_b(pred, disk(1)).sum()
    pb = pred & ~erode_b(pred, disk(1))
    tb = truth & ~erode_b(truth, disk(1))
    assert red.sum() == (tb & ~pb).sum()
    assert (out[~(pb | tb)] == 128).all()


def test_saved_masks_roundtrip_for_scoring(tmp_path):
    m = np.zeros((8, 8), bool)
    m[2:5, 3:6] = True
    save_mask(m, tmp_path / "a.png")
    truth = tmp_path / "t"
    truth.mkdir()
    save_mask(m, truth / "a.png")
    s = score_masks(tmp_path, truth)
    assert s.records[0].iou == 1.0
    assert CSV_HEADER[0] == "image_id"
