import json
import math
import random

import pytest

import egosocial as es


def test_hand_checked_ap():
    assert es.average_precision([0.9, 0.8, 0.7, 0.6], [1, 0, 1, 0]) == pytest.approx(5 / 6, abs=1e-12)


def test_ap_matches_oracle():
    rng = random.Random(3)
    for _ in range(200):
        n = rng.randint(1, 80)
        scores = [rng.randint(0, 8) / 8 for _ in range(n)]
        labels = [rng.random() < 0.4 for _ in range(n)]
        labels[0] = True
        assert es.average_precision(scores, labels) == pytest.approx(es.oracle_ap(scores, labels), abs=1e-9)


def test_undefined_metric_raises():
    with pytest.raises(es.UndefinedMetricError):
        es.average_precision([0.3, 0.2], [0, 0])
    assert issubclass(es.UndefinedMetricError, es.Error)


def test_accuracy_threshold_inclusive():
    assert es.top1_accuracy([0.5], [1]) == 1.0
    assert es.top1_accuracy([0.4, 0.6], [1, 0]) == 0.0


def test_fusion_algebra():
    rng = random.Random(5)
    for _ in range(1000):
        v, a = rng.random(), rng.random()
        assert es.fuse_segment(v, a, 0.5, "quality_weighted") == es.fuse_segment(v, a, 0.0, "average")
        assert es.fuse_segment(v, a, 1.0) == v
        assert es.fuse_segment(v, a, 0.0) == a


def test_filters():
    assert es.median_filter([0, 1, 0, 1, 0], 3) == [0.5, 0, 1, 0, 0.5]
    with pytest.raises(es.ConfigError):
        es.median_filter([0.1], 4)
    assert es.max_score_filter([10, 11, 12], [0.2, 0.9, 0.1], [(10, 12), (50, 60)]) == [(0.9, 3), (0.0, 0)]


def test_generate_validate_and_pipeline(tmp_path):
    data = tmp_path / "data"
    es.generate_scenario(str(data), seed=4, n_clips=3, frames_per_clip=300)
    report = es.validate(
        {"visual": str(data / "scores_visual.jsonl")},
        segments=str(data / "segments.jsonl"),
        quality=str(data / "quality.jsonl"),
        labels=str(data / "labels.jsonl"),
    )
    assert report["ok"] and report["errors"] == 0

    config = {
        "task": "ttm",
        "inputs": {
            "scores": {"visual": "data/scores_visual.jsonl"},
            "segments": "data/segments.jsonl",
            "quality": "data/quality.jsonl",
        },
        "stages": [{"op": "maxseg"}, {"op": "fuse"}, {"op": "median", "window": 5}, {"op": "evaluate"}],
        "outputs": {"report": "report.json"},
    }
    (tmp_path / "pipeline.json").write_text(json.dumps(config))
    first = es.run_pipeline(str(tmp_path / "pipeline.json"))
    assert 0.0 < first["map"] <= 1.0
    assert es.run_pipeline(str(tmp_path / "pipeline.json")) == first
    assert json.loads((tmp_path / "report.json").read_text())["map"] == first["map"]


def test_missing_file_raises(tmp_path):
    with pytest.raises(es.IoError, match="absent.jsonl"):
        es.validate({"visual": str(tmp_path / "absent.jsonl")})


def test_compare_methods_ordering():
    m = es.compare_ttm_methods(seed=1, n_clips=10)
    assert m["filtered_visual"] > m["raw_visual"]
    assert m["average"] > max(m["audio"], m["filtered_visual"])
    assert all(0.0 <= v <= 1.0 and not math.isnan(v) for v in m.values())
