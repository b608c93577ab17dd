import csv
import json
import os
import shutil

import pytest

from rhythmeter.errors import InsufficientSettings, InvalidConfig, MissingFile, NoSamplesFound
from rhythmeter.harness import (
    DEFAULT_GRID,
    evaluate,
    kendall_tau,
    rank_consistency,
    rank_methods,
    scan_dataset,
    setting_key,
    sweep,
)
from rhythmeter.report import (
    HISTOGRAM_EDGES,
    MetricsReport,
    SweepReport,
    emit,
    load_report,
    load_sweep,
    recompute_aggregates,
)
from rhythmeter.synth import SynthSpec, corpus, write_ground_truth
from rhythmeter.tracker import TrackerConfig


def _write(root, spec, n):
    for gt in corpus(spec, n):
        write_ground_truth(gt, os.path.join(root, gt.sample.sample_id))
    return root


@pytest.fixture(scope="module")
def small_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("ds")
    return _write(root, SynthSpec(jitter_sigma=0.01, track_offsets=(0, 0.02, 0, 0.02), seed=30), 3)


def test_scan(tmp_path, small_dataset):
    descs = scan_dataset(small_dataset)
    assert [d.sample_id for d in descs] == ["synth_000030", "synth_000031", "synth_000032"]
    assert all(len(d.stems) == 4 and not d.absent() for d in descs)
    with pytest.raises(NoSamplesFound):
        scan_dataset(tmp_path)
    with pytest.raises(MissingFile):
        scan_dataset(tmp_path / "nope")


def test_scan_flags_absent_stem(tmp_path, small_dataset):
    root = tmp_path / "copy"
    shutil.copytree(small_dataset, root)
    os.remove(root / "synth_000031" / "guitar.wav")
    d = {x.sample_id: x for x in scan_dataset(root)}
    assert d["synth_000031"].absent() == ["guitar"]
    rep = evaluate(list(d.values()))
    row = [r for r in rep.samples if r.sample_id.startswith("synth_000031")][0]
    assert row.status == "ok" and row.beat_counts["guitar"] == 0


def test_files_mode_matches_ground_truth(small_dataset):
    rep = evaluate(scan_dataset(small_dataset), beats_from="files")
    assert rep.config["tracker"] is None
    assert [r.sample_id for r in rep.samples] == ["synth_000030#000", "synth_000031#000", "synth_000032#000"]
    truth = corpus(SynthSpec(jitter_sigma=0.01, track_offsets=(0, 0.02, 0, 0.02), seed=30), 3)
    for row, gt in zip(rep.samples, truth):
        assert row.beat_counts == {t: len(s) for t, s in gt.sample.tracks.items()}


def test_full_length_ids(small_dataset):
    rep = evaluate(scan_dataset(small_dataset), beats_from="files", segment_seconds=None)
    assert [r.sample_id for r in rep.samples] == ["synth_000030", "synth_000031", "synth_000032"]


def test_failed_sample_does_not_abort(tmp_path, small_dataset):
    root = tmp_path / "broken"
    shutil.copytree(small_dataset, root)
    (root / "synth_000030" / "drums.wav").write_bytes(b"garbage")
    rep = evaluate(scan_dataset(root))
    assert rep.n_failed == 1
    bad = [r for r in rep.samples if r.status == "failed"]
    assert bad[0].sample_id == "synth_000030" and "CorruptHeader" in bad[0].error
    assert rep.cbs["value"] is not None


def test_short_sample_is_failed_row(tmp_path):
    _write(tmp_path, SynthSpec(duration=5.0, seed=1), 1)
    rep = evaluate(scan_dataset(tmp_path))
    assert rep.n_failed == 1
    assert rep.irs["bass"]["value"] is None


def test_report_self_consistency(small_dataset):
    rep = evaluate(scan_dataset(small_dataset), TrackerConfig(fps=100))
    again = recompute_aggregates(MetricsReport.from_dict(json.loads(rep.to_json())))
    for t in rep.tracks:
        assert again["irs"][t] == pytest.approx(rep.irs[t]["value"], abs=1e-9)
    assert again["cbs"] == pytest.approx(rep.cbs["value"], abs=1e-9)
    for k in ("mean", "std", "median"):
        assert again["cbd"][k] == pytest.approx(rep.cbd[k], abs=1e-9)
    assert again["histogram"] == rep.histogram
    assert sum(rep.histogram["counts"]) == rep.cbd["n"]
    assert rep.histogram["edges"] == HISTOGRAM_EDGES and len(rep.histogram["counts"]) == 20


def test_descriptor_order_invariance(small_dataset):
    descs = scan_dataset(small_dataset)
    a = evaluate(descs, beats_from="files").to_json()
    b = evaluate(descs[::-1], beats_from="files").to_json()
    assert a == b


def test_emit_roundtrip(tmp_path, small_dataset):
    rep = evaluate(scan_dataset(small_dataset))
    emit(rep, "json", tmp_path / "r.json")
    back = load_report(tmp_path / "r.json")
    assert back.to_dict() == rep.to_dict()
    emit(rep, "csv", tmp_path / "r.csv")
    with open(tmp_path / "r.csv") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == len(rep.samples) + 1
    assert rows[0][:3] == ["sample_id", "status", "error"]
    with pytest.raises(ValueError):
        emit(rep, "xml", tmp_path / "r.xml")


def test_more_jitter_more_irs(tmp_path):
    a = _write(tmp_path / "a", SynthSpec(jitter_sigma=0.01, seed=60), 6)
    b = _write(tmp_path / "b", SynthSpec(jitter_sigma=0.05, seed=60), 6)
    ra = evaluate(scan_dataset(a)).summary()["irs"]
    rb = evaluate(scan_dataset(b)).summary()["irs"]
    assert rb > ra


# -- ranking utilities


def test_kendall_tau_examples():
    assert kendall_tau(list("abcd"), list("abcd")) == 1.0
    assert kendall_tau(list("abcd"), list("abdc")) == pytest.approx(1 - 2 * 1 / 6)
    assert kendall_tau(["a", "b"], ["b", "a"]) == -1.0
    with pytest.raises(ValueError):
        kendall_tau(["a"], ["b"])


def test_rank_methods_directions_and_ties():
    assert rank_methods({"x": 0.2, "y": 0.1}, -1) == ["y", "x"]
    assert rank_methods({"x": 0.2, "y": 0.1}, +1) == ["x", "y"]
    assert rank_methods({"b": 0.5, "a": 0.5}, -1) == ["a", "b"]


def _fake_sweep(orders):
    grid = [[100.0 + i, 50.0] for i in range(len(orders))]
    rankings = {"irs": {setting_key(f, t): o for (f, t), o in zip(grid, orders)}}
    return SweepReport(grid=grid, methods=sorted(orders[0]), cells={}, failures={}, rankings=rankings)


def test_rank_consistency_cases():
    assert rank_consistency(_fake_sweep([["a", "b"], ["a", "b"]]), "irs") == {
        "consistent": True, "min_kendall_tau": 1.0, "n_settings": 2}
    res = rank_consistency(_fake_sweep([["a", "b"], ["b", "a"]]), "irs")
    assert (res["consistent"], res["min_kendall_tau"]) == (False, -1.0)
    res = rank_consistency(_fake_sweep([list("abcd"), list("abdc"), list("abcd")]), "irs")
    assert res["min_kendall_tau"] == pytest.approx(2 / 3)
    with pytest.raises(InsufficientSettings):
        rank_consistency(_fake_sweep([["a", "b"]]), "irs")


def test_sweep_preconditions(small_dataset):
    descs = scan_dataset(small_dataset)
    with pytest.raises(InvalidConfig):
        sweep({"only": descs})
    with pytest.raises(InvalidConfig):
        sweep({"a": descs, "b": descs}, [(100, 50)])
    assert len(DEFAULT_GRID) == 6


def test_sweep_small_and_deterministic(tmp_path):
    a = scan_dataset(_write(tmp_path / "a", SynthSpec(jitter_sigma=0.01, seed=70), 3))
    b = scan_dataset(_write(tmp_path / "b", SynthSpec(jitter_sigma=0.05, seed=70), 3))
    grid = [(100, 50), (150, 100)]
    r1 = sweep({"lo": a, "hi": b}, grid)
    r2 = sweep({"hi": b, "lo": a}, grid)
    assert r1.to_json() == r2.to_json()
    assert set(r1.cells) == {"fps@100 tl@50", "fps@150 tl@100"}
    assert all(r1.rankings["irs"][k] == ["lo", "hi"] for k in r1.cells)
    emit(r1, "json", tmp_path / "s.json")
    assert load_sweep(tmp_path / "s.json").to_json() == r1.to_json()


def test_sweep_records_failed_cells(tmp_path):
    a = scan_dataset(_write(tmp_path / "a", SynthSpec(seed=1), 1))
    b = scan_dataset(_write(tmp_path / "b", SynthSpec(seed=2), 1))
    # fps 0 is an invalid tracker config, so that whole cell fails
    with pytest.warns(UserWarning, match="GridCell|fps@0"):
        rep = sweep({"a": a, "b": b}, [(100, 50), (0, 50)])
    assert set(rep.failures["fps@0 tl@50"]) == {"a", "b"}
    assert rep.cells["fps@0 tl@50"] == {"a": None, "b": None}
    assert "fps@0 tl@50" not in rep.rankings["irs"]
    back = SweepReport.from_dict(json.loads(rep.to_json()))
    assert back.cells["fps@0 tl@50"]["a"] is None
    with pytest.raises(InsufficientSettings), pytest.warns(UserWarning):
        rank_consistency(rep, "irs")
