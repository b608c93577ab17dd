"""
Dataset walking, batch evaluation, hyperparameter sweeps and ranking checks.

A dataset root holds one directory per sample; each sample directory holds
``<track>.wav`` stems and, optionally, ``<track>.beats.txt`` annotations.
Evaluation runs load -> resample (16 kHz) -> segment -> onset envelope ->
beats -> metrics, or reads the annotation files directly when
``beats_from="files"``.

Per-sample failures become ``status="failed"`` rows and never abort a batch.
Samples are processed in parallel (thread count capped by the
``RHYTHMETER_THREADS`` environment variable) and folded in lexicographic
sample order, so results do not depend on completion order.
"""

from __future__ import annotations

import dataclasses
import itertools
import logging
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .audio import load_wav, resample, segment, wav_duration
from .beats import BeatSequence, read_beats
from .dsp import DEFAULT_HOP, DEFAULT_N_MELS, DEFAULT_WINDOW, OnsetEnvelope, onset_envelope, stft_mel
from .errors import (
    GridCellFailure,
    InsufficientSettings,
    InvalidConfig,
    MissingFile,
    NoSamplesFound,
    RhythmeterError,
)
from .metrics import (
    MetricsConfig,
    MultiTrackSample,
    beat_errors,
    cbs_detail,
    content_tracks,
    ibi_std,
    irs_detail,
    sample_cbs,
)
from .report import MetricsReport, SampleRow, SweepReport, error_histogram
from .synth import DEFAULT_TRACKS
from .tracker import ANALYSIS_RATE, TrackerConfig, beats_from_envelope

__all__ = [
    "SampleDescriptor",
    "scan_dataset",
    "prepare",
    "evaluate",
    "evaluate_prepared",
    "sweep",
    "rank_consistency",
    "kendall_tau",
    "rank_methods",
    "DEFAULT_GRID",
    "DEFAULT_SEGMENT",
    "METRIC_DIRECTIONS",
]

log = logging.getLogger(__name__)

DEFAULT_SEGMENT = 10.24
DEFAULT_GRID = [(float(fps), float(tl)) for fps in (100, 150, 200) for tl in (50, 100)]
# +1: higher is better, -1: lower is better
METRIC_DIRECTIONS = {"irs": -1, "cbs": +1, "cbd_mean": -1, "cbd_std": -1, "cbd_median": -1}


@dataclass(frozen=True)
class SampleDescriptor:
    """One sample directory: stem and annotation paths per track (None if absent)."""

    sample_id: str
    directory: str
    stems: Dict[str, Optional[str]]
    beat_files: Dict[str, Optional[str]]

    @property
    def tracks(self) -> List[str]:
        return list(self.stems)

    def absent(self) -> List[str]:
        return [t for t, p in self.stems.items() if p is None]


def scan_dataset(root, track_names: Sequence[str] = DEFAULT_TRACKS) -> List[SampleDescriptor]:
    """Find sample directories under ``root`` in lexicographic order.

    A subdirectory counts as a sample if it holds at least one
    ``<track>.wav`` or ``<track>.beats.txt`` for a requested track.
    """
    root = os.fspath(root)
    if not os.path.isdir(root):
        raise MissingFile(root)
    out = []
    for name in sorted(os.listdir(root)):
        d = os.path.join(root, name)
        if not os.path.isdir(d):
            continue
        stems = {}
        beats = {}
        for t in track_names:
            wav = os.path.join(d, f"{t}.wav")
            txt = os.path.join(d, f"{t}.beats.txt")
            stems[t] = wav if os.path.isfile(wav) else None
            beats[t] = txt if os.path.isfile(txt) else None
        if any(stems.values()) or any(beats.values()):
            out.append(SampleDescriptor(name, d, stems, beats))
    if not out:
        raise NoSamplesFound(f"no sample directories with stems under {root}")
    return out


def _threads():
    cap = os.environ.get("RHYTHMETER_THREADS")
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def _map(fn, items):
    items = list(items)
    n = _threads()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# -- preparation: everything that does not depend on tracker settings


@dataclass
class PreparedSegment:
    segment_id: str
    duration: float
    envelopes: Dict[str, Optional[OnsetEnvelope]]  # tracker mode
    beats: Dict[str, Optional[BeatSequence]]  # files mode


@dataclass
class PreparedSample:
    sample_id: str
    segments: List[PreparedSegment]
    error: Optional[str] = None


def _segment_ids(sample_id, n, segmented):
    if not segmented:
        return [sample_id]
    return [f"{sample_id}#{k:03d}" for k in range(n)]


def _prepare_tracker(desc: SampleDescriptor, segment_seconds, frontend) -> PreparedSample:
    per_track = {}
    for t, path in desc.stems.items():
        if path is None:
            per_track[t] = None
            continue
        clip = load_wav(path, label=t)
        if clip.sample_rate != ANALYSIS_RATE:
            clip = resample(clip, ANALYSIS_RATE)
        per_track[t] = segment(clip, segment_seconds) if segment_seconds else [clip]
    present = [v for v in per_track.values() if v is not None]
    if not present:
        raise MissingFile(f"{desc.sample_id}: no stems present")
    n_seg = min(len(v) for v in present)
    if n_seg == 0:
        raise RhythmeterError(f"{desc.sample_id}: shorter than one {segment_seconds} s segment")
    ids = _segment_ids(desc.sample_id, n_seg, bool(segment_seconds))
    segments = []
    for k in range(n_seg):
        envs = {}
        duration = None
        for t, clips in per_track.items():
            if clips is None:
                envs[t] = None
                continue
            clip = clips[k]
            duration = clip.duration if duration is None else min(duration, clip.duration)
            envs[t] = onset_envelope(stft_mel(clip, **frontend))
        segments.append(PreparedSegment(ids[k], duration, envs, {}))
    return PreparedSample(desc.sample_id, segments)


def _prepare_files(desc: SampleDescriptor, segment_seconds) -> PreparedSample:
    duration = None
    for path in desc.stems.values():
        if path is not None:
            d = wav_duration(path)
            duration = d if duration is None else min(duration, d)
    seqs = {t: (read_beats(p) if p is not None else None) for t, p in desc.beat_files.items()}
    if all(s is None for s in seqs.values()):
        raise MissingFile(f"{desc.sample_id}: no .beats.txt files present")
    if duration is None:
        duration = max(float(s.times[-1]) for s in seqs.values() if s is not None and len(s))
    if segment_seconds:
        n_seg = int(np.floor(duration / segment_seconds + 1e-9))
        if n_seg == 0:
            raise RhythmeterError(f"{desc.sample_id}: shorter than one {segment_seconds} s segment")
        bounds = [(k * segment_seconds, (k + 1) * segment_seconds) for k in range(n_seg)]
    else:
        bounds = [(0.0, duration)]
    ids = _segment_ids(desc.sample_id, len(bounds), bool(segment_seconds))
    segments = []
    for sid, (a, b) in zip(ids, bounds):
        beats = {}
        for t, s in seqs.items():
            if s is None:
                beats[t] = None
            elif segment_seconds:
                beats[t] = s.window(a, b)
            else:
                beats[t] = BeatSequence(s.times[s.times <= b], b)
        segments.append(PreparedSegment(sid, b - a, {}, beats))
    return PreparedSample(desc.sample_id, segments)


def prepare(
    descriptors: Sequence[SampleDescriptor],
    segment_seconds: Optional[float] = DEFAULT_SEGMENT,
    beats_from: str = "tracker",
    window: int = DEFAULT_WINDOW,
    hop: int = DEFAULT_HOP,
    n_mels: int = DEFAULT_N_MELS,
) -> List[PreparedSample]:
    """Load and front-end every descriptor once (reusable across tracker settings)."""
    if beats_from not in ("tracker", "files"):
        raise ValueError(f"beats_from must be 'tracker' or 'files', got {beats_from!r}")
    frontend = {"window": window, "hop": hop, "n_mels": n_mels}

    def one(desc):
        try:
            if beats_from == "tracker":
                return _prepare_tracker(desc, segment_seconds, frontend)
            return _prepare_files(desc, segment_seconds)
        except Exception as exc:  # per-sample failures are recorded, not raised
            log.warning("sample %s failed: %s", desc.sample_id, exc)
            return PreparedSample(desc.sample_id, [], f"{type(exc).__name__}: {exc}")

    ordered = sorted(descriptors, key=lambda d: d.sample_id)
    return _map(one, ordered)


def _segment_beats(seg: PreparedSegment, tracker_cfg: Optional[TrackerConfig]) -> MultiTrackSample:
    tracks = {}
    if seg.envelopes:
        for t, env in seg.envelopes.items():
            if env is None:
                tracks[t] = BeatSequence.empty(seg.duration)
            else:
                tracks[t] = beats_from_envelope(env, tracker_cfg, seg.duration)
    else:
        for t, b in seg.beats.items():
            tracks[t] = b if b is not None else BeatSequence.empty(seg.duration)
    return MultiTrackSample(seg.segment_id, tracks, seg.duration)


def _row(sample: MultiTrackSample, cfg: MetricsConfig) -> SampleRow:
    errors = []
    if len(content_tracks(sample, cfg)) >= 2:
        errors = [float(e) for e in beat_errors(sample, cfg)]
    return SampleRow(
        sample_id=sample.sample_id,
        beat_counts={t: len(s) for t, s in sample.tracks.items()},
        ibi_std={t: ibi_std(s, cfg.irs_min_intervals) for t, s in sample.tracks.items()},
        cbs=sample_cbs(sample, cfg),
        cbd_errors=errors,
    )


def evaluate_prepared(
    prepared: Sequence[PreparedSample],
    tracks: Sequence[str],
    tracker_cfg: Optional[TrackerConfig] = TrackerConfig(),
    metrics_cfg: MetricsConfig = MetricsConfig(),
    config_echo: Optional[dict] = None,
) -> MetricsReport:
    """Track beats on prepared samples and assemble a report."""

    def one(p: PreparedSample):
        if p.error is not None:
            return [SampleRow(p.sample_id, status="failed", error=p.error)], []
        try:
            samples = [_segment_beats(seg, tracker_cfg) for seg in p.segments]
            return [_row(s, metrics_cfg) for s in samples], samples
        except Exception as exc:
            log.warning("sample %s failed: %s", p.sample_id, exc)
            return [SampleRow(p.sample_id, status="failed", error=f"{type(exc).__name__}: {exc}")], []

    results = _map(one, sorted(prepared, key=lambda p: p.sample_id))
    rows: List[SampleRow] = []
    samples: List[MultiTrackSample] = []
    for r, s in results:
        rows.extend(r)
        samples.extend(s)

    irs = {}
    for t in tracks:
        res = irs_detail([s.tracks.get(t, BeatSequence.empty(s.clip_duration)) for s in samples], metrics_cfg)
        irs[t] = {"value": res.value, "n_used": res.n_used, "n_skipped": res.n_skipped}
    cbs_res = cbs_detail(samples, metrics_cfg)
    pool = np.sort(np.asarray([e for r in rows for e in r.cbd_errors], dtype=float))
    cbd = None
    if pool.size:
        cbd = {"mean": float(np.mean(pool)), "std": float(np.std(pool)),
               "median": float(np.median(pool)), "n": int(pool.size)}

    config = dict(config_echo or {})
    config["tracker"] = dataclasses.asdict(tracker_cfg) if tracker_cfg is not None else None
    config["metrics"] = dataclasses.asdict(metrics_cfg)
    return MetricsReport(
        config=config,
        tracks=list(tracks),
        irs=irs,
        cbs={"value": cbs_res.value, "n_used": cbs_res.n_used, "n_skipped": cbs_res.n_skipped},
        cbd=cbd,
        histogram=error_histogram(pool),
        samples=rows,
        n_failed=sum(r.status == "failed" for r in rows),
    )


def _tracks_of(descriptors):
    tracks = []
    for d in descriptors:
        for t in d.tracks:
            if t not in tracks:
                tracks.append(t)
    return tracks


def evaluate(
    descriptors: Sequence[SampleDescriptor],
    tracker_cfg: TrackerConfig = TrackerConfig(),
    metrics_cfg: MetricsConfig = MetricsConfig(),
    segment_seconds: Optional[float] = DEFAULT_SEGMENT,
    beats_from: str = "tracker",
    window: int = DEFAULT_WINDOW,
    hop: int = DEFAULT_HOP,
    n_mels: int = DEFAULT_N_MELS,
) -> MetricsReport:
    """Evaluate a dataset end to end.

    Parameters
    ----------
    descriptors : sequence of SampleDescriptor
        Usually from :func:`scan_dataset`.
    tracker_cfg : TrackerConfig
        Ignored (and echoed as null) when ``beats_from="files"``.
    metrics_cfg : MetricsConfig
    segment_seconds : float or None
        Segment length; None evaluates each file whole.
    beats_from : {"tracker", "files"}
        Run the beat tracker on the stems, or read ``<track>.beats.txt``.
    window, hop, n_mels : int
        Front-end parameters.

    Returns
    -------
    MetricsReport
    """
    if not descriptors:
        raise NoSamplesFound("evaluate() needs at least one descriptor")
    prepared = prepare(descriptors, segment_seconds, beats_from, window, hop, n_mels)
    echo = {
        "frontend": {"window": window, "hop": hop, "n_mels": n_mels, "sample_rate": ANALYSIS_RATE},
        "segment_seconds": segment_seconds,
        "beats_from": beats_from,
    }
    return evaluate_prepared(
        prepared,
        _tracks_of(descriptors),
        tracker_cfg if beats_from == "tracker" else None,
        metrics_cfg,
        echo,
    )


def setting_key(fps, tl) -> str:
    return f"fps@{fps:g} tl@{tl:g}"


def rank_methods(values: Mapping[str, float], direction: int) -> List[str]:
    """Methods ordered best first; equal values fall back to method name."""
    return sorted(values, key=lambda m: (-direction * values[m], m))


def _metric_value(report: MetricsReport, metric: str):
    return report.summary().get(metric)


def _direction(metric):
    base = metric.split(":", 1)[0]
    if base not in METRIC_DIRECTIONS:
        raise ValueError(f"unknown metric {metric!r}")
    return METRIC_DIRECTIONS[base]


def sweep(
    methods: Mapping[str, Sequence[SampleDescriptor]],
    grid: Sequence[Tuple[float, float]] = DEFAULT_GRID,
    base_cfg: TrackerConfig = TrackerConfig(),
    metrics_cfg: MetricsConfig = MetricsConfig(),
    segment_seconds: Optional[float] = DEFAULT_SEGMENT,
    window: int = DEFAULT_WINDOW,
    hop: int = DEFAULT_HOP,
    n_mels: int = DEFAULT_N_MELS,
) -> SweepReport:
    """Evaluate every method under every ``(fps, tl)`` setting and rank methods.

    The audio front end runs once per method; only tempo estimation and beat
    tracking repeat per grid cell. A cell that raises is recorded in
    ``failures`` and left out of the rankings.
    """
    if len(methods) < 2:
        raise InvalidConfig("sweep needs at least 2 methods")
    if len(grid) < 2:
        raise InvalidConfig("sweep needs at least 2 grid settings")
    names = sorted(methods)
    prepared = {m: prepare(methods[m], segment_seconds, "tracker", window, hop, n_mels) for m in names}
    tracks = {m: _tracks_of(methods[m]) for m in names}
    echo = {
        "frontend": {"window": window, "hop": hop, "n_mels": n_mels, "sample_rate": ANALYSIS_RATE},
        "segment_seconds": segment_seconds,
        "beats_from": "tracker",
    }

    cells, failures = {}, {}
    for fps, tl in grid:
        key = setting_key(fps, tl)
        cells[key], failures[key] = {}, {}
        for m in names:
            try:
                cfg = dataclasses.replace(base_cfg, fps=float(fps), transition_lambda=float(tl))
                cells[key][m] = evaluate_prepared(prepared[m], tracks[m], cfg, metrics_cfg, echo)
            except Exception as exc:
                err = GridCellFailure(f"{key} / {m}: {type(exc).__name__}: {exc}")
                warnings.warn(str(err))
                cells[key][m] = None
                failures[key][m] = str(err)

    metrics = list(METRIC_DIRECTIONS)
    all_tracks = []
    for m in names:
        all_tracks += [t for t in tracks[m] if t not in all_tracks]
    metrics += [f"irs:{t}" for t in all_tracks]

    rankings = {}
    for metric in metrics:
        rankings[metric] = {}
        for fps, tl in grid:
            key = setting_key(fps, tl)
            vals = {}
            for m in names:
                rep = cells[key][m]
                v = _metric_value(rep, metric) if rep is not None else None
                if v is None:
                    break
                vals[m] = v
            else:
                rankings[metric][key] = rank_methods(vals, _direction(metric))
    return SweepReport(
        grid=[[float(f), float(t)] for f, t in grid],
        methods=names,
        cells=cells,
        failures=failures,
        rankings=rankings,
    )


def kendall_tau(order_a: Sequence[str], order_b: Sequence[str]) -> float:
    """Kendall tau between two strict orderings of the same items.

    ``(concordant - discordant) / C(n, 2)``; orderings carry no ties because
    :func:`rank_methods` breaks them by name.
    """
    if sorted(order_a) != sorted(order_b):
        raise ValueError("orderings must contain the same items")
    n = len(order_a)
    if n < 2:
        return 1.0
    pos_b = {m: i for i, m in enumerate(order_b)}
    s = 0
    for i, j in itertools.combinations(range(n), 2):
        s += 1 if pos_b[order_a[i]] < pos_b[order_a[j]] else -1
    return s / (n * (n - 1) / 2)


def rank_consistency(report: SweepReport, metric: str) -> dict:
    """Does ``metric`` order the methods identically in every successful setting?

    Returns
    -------
    dict
        ``consistent`` (all orderings equal), ``min_kendall_tau`` over every
        pair of settings, and ``n_settings`` compared.

    Raises
    ------
    InsufficientSettings
        Fewer than two settings produced a ranking for ``metric``.
    """
    ranks = report.rankings.get(metric, {})
    orders = [ranks[setting_key(f, t)] for f, t in report.grid if setting_key(f, t) in ranks]
    skipped = len(report.grid) - len(orders)
    if skipped:
        warnings.warn(f"{skipped} grid setting(s) excluded from {metric} consistency check")
    if len(orders) < 2:
        raise InsufficientSettings(f"{metric}: only {len(orders)} setting(s) succeeded")
    taus = [kendall_tau(a, b) for a, b in itertools.combinations(orders, 2)]
    return {
        "consistent": all(o == orders[0] for o in orders),
        "min_kendall_tau": float(min(taus)),
        "n_settings": len(orders),
    }
