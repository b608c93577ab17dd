"""
Rhythm metrics over beat sequences: IRS, CBS and CBD.

IRS (inner-track rhythmic stability)
    Mean, over samples, of the standard deviation of a track's inter-beat
    intervals. Lower is steadier.
CBS (cross-track beat synchronization)
    The timeline is cut into fixed windows; each window gets the fraction of
    content tracks with at least one beat inside it. Per sample, the mean of
    those fractions over windows where any track has a beat; then the mean
    over samples. Higher is tighter.
CBD (cross-track beat dispersion)
    Every track serves as reference in turn. Each interior reference beat is
    matched to the nearest beat of every other track lying within half the
    neighbouring interval on either side, and the offset is divided by that
    half interval. The pooled errors are summarized by mean, std and median.
    Lower is tighter.

All standard deviations are population (divide-by-N) deviations. None of
these functions look at audio; beats may come from the tracker or from
annotation files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from .beats import BeatSequence
from .errors import EmptyErrorPool, NoContentTracks, NoQualifyingSamples

__all__ = [
    "MetricsConfig",
    "MultiTrackSample",
    "WindowCoverage",
    "IrsResult",
    "CbsResult",
    "CbdStats",
    "inter_beat_intervals",
    "ibi_std",
    "irs",
    "irs_detail",
    "content_tracks",
    "window_coverage",
    "sample_cbs",
    "cbs",
    "cbs_detail",
    "beat_errors",
    "cbd",
    "cbd_stats",
]

# decimals kept when mapping a time onto a window index, so that e.g. 0.3 / 0.1
# lands in window 3 rather than 2
_WINDOW_ROUND = 9


@dataclass(frozen=True)
class MetricsConfig:
    cbs_window: float = 0.1
    min_beats_content: int = 2
    irs_min_intervals: int = 2
    penalize_unmatched: bool = False

    def __post_init__(self):
        if not self.cbs_window > 0:
            raise ValueError("cbs_window must be positive")
        if self.min_beats_content < 1 or self.irs_min_intervals < 1:
            raise ValueError("count thresholds must be >= 1")


@dataclass(frozen=True)
class MultiTrackSample:
    """Beat sequences of every track of one clip, keyed by track name."""

    sample_id: str
    tracks: Mapping[str, BeatSequence]
    clip_duration: float

    def __post_init__(self):
        for name, seq in self.tracks.items():
            if not np.isclose(seq.clip_duration, self.clip_duration, rtol=0, atol=1e-9):
                raise ValueError(
                    f"track {name!r} duration {seq.clip_duration} != sample duration {self.clip_duration}"
                )
        object.__setattr__(self, "tracks", dict(self.tracks))

    @classmethod
    def from_times(cls, sample_id, tracks: Mapping[str, Iterable[float]], clip_duration):
        return cls(
            sample_id,
            {k: BeatSequence(np.asarray(list(v), dtype=float), clip_duration) for k, v in tracks.items()},
            clip_duration,
        )


@dataclass(frozen=True)
class WindowCoverage:
    window_seconds: float
    ratios: np.ndarray = field(compare=False)


@dataclass(frozen=True)
class IrsResult:
    value: Optional[float]
    n_used: int
    n_skipped: int


@dataclass(frozen=True)
class CbsResult:
    value: Optional[float]
    per_sample: List[Optional[float]]
    n_used: int
    n_skipped: int


@dataclass(frozen=True)
class CbdStats:
    mean: float
    std: float
    median: float
    n: int


def _times(beats) -> np.ndarray:
    if isinstance(beats, BeatSequence):
        return beats.times
    return np.asarray(beats, dtype=np.float64)


def inter_beat_intervals(beats) -> np.ndarray:
    """Differences between consecutive beat times; empty for fewer than 2 beats."""
    t = _times(beats)
    if t.shape[0] < 2:
        return np.zeros(0)
    return np.diff(t)


def ibi_std(beats, min_intervals: int = 1) -> Optional[float]:
    """Population std of the inter-beat intervals, or None if too few intervals."""
    ibi = inter_beat_intervals(beats)
    if ibi.shape[0] < min_intervals or ibi.shape[0] == 0:
        return None
    return float(np.std(ibi))


def irs_detail(per_sample_beats: Sequence, cfg: MetricsConfig = MetricsConfig()) -> IrsResult:
    """IRS for one track plus the count of samples used and skipped.

    ``value`` is None when every sample was skipped.
    """
    stds = []
    skipped = 0
    for beats in per_sample_beats:
        s = ibi_std(beats, cfg.irs_min_intervals)
        if s is None:
            skipped += 1
        else:
            stds.append(s)
    value = float(np.mean(np.sort(stds))) if stds else None
    return IrsResult(value, len(stds), skipped)


def irs(per_sample_beats: Sequence, cfg: MetricsConfig = MetricsConfig()) -> float:
    """Inner-track rhythmic stability of one track across samples.

    Parameters
    ----------
    per_sample_beats : sequence of BeatSequence or array-like
        The same track's beats in each sample.
    cfg : MetricsConfig
        ``irs_min_intervals`` sets how many intervals a sample needs to count.

    Returns
    -------
    float
        Mean over qualifying samples of the population std of the intervals.

    Raises
    ------
    NoQualifyingSamples
        If no sample has enough intervals.
    """
    res = irs_detail(per_sample_beats, cfg)
    if res.value is None:
        raise NoQualifyingSamples(f"IRS undefined: all {res.n_skipped} samples skipped")
    return res.value


def content_tracks(sample: MultiTrackSample, cfg: MetricsConfig = MetricsConfig()) -> Dict[str, np.ndarray]:
    """Tracks with at least ``min_beats_content`` beats, in sample order."""
    return {
        name: seq.times
        for name, seq in sample.tracks.items()
        if len(seq) >= cfg.min_beats_content
    }


def _window_index(times, width):
    return np.floor(np.round(times / width, _WINDOW_ROUND)).astype(np.int64)


def n_windows(clip_duration, width):
    return int(np.floor(np.round(clip_duration / width, _WINDOW_ROUND)))


def window_coverage(sample: MultiTrackSample, cfg: MetricsConfig = MetricsConfig()) -> WindowCoverage:
    """Fraction of content tracks with a beat in each window of ``cfg.cbs_window``.

    Windows tile ``[0, clip_duration)`` from zero; a trailing partial window is
    not counted, and beats falling in it are ignored.
    """
    tracks = content_tracks(sample, cfg)
    if not tracks:
        raise NoContentTracks(f"sample {sample.sample_id!r} has no content tracks")
    nw = n_windows(sample.clip_duration, cfg.cbs_window)
    hits = np.zeros(nw)
    for times in tracks.values():
        idx = _window_index(times, cfg.cbs_window)
        idx = np.unique(idx[(idx >= 0) & (idx < nw)])
        hits[idx] += 1.0
    return WindowCoverage(cfg.cbs_window, hits / len(tracks))


def sample_cbs(sample: MultiTrackSample, cfg: MetricsConfig = MetricsConfig()) -> Optional[float]:
    """Per-sample CBS, or None when fewer than two content tracks exist
    or no window holds a beat."""
    if len(content_tracks(sample, cfg)) < 2:
        return None
    ratios = window_coverage(sample, cfg).ratios
    occupied = ratios > 0
    if not occupied.any():
        return None
    return float(ratios[occupied].sum() / occupied.sum())


def cbs_detail(samples: Sequence[MultiTrackSample], cfg: MetricsConfig = MetricsConfig()) -> CbsResult:
    per_sample = [sample_cbs(s, cfg) for s in samples]
    used = [v for v in per_sample if v is not None]
    value = float(np.mean(np.sort(used))) if used else None
    return CbsResult(value, per_sample, len(used), len(per_sample) - len(used))


def cbs(samples: Sequence[MultiTrackSample], cfg: MetricsConfig = MetricsConfig()) -> float:
    """Cross-track beat synchronization, averaged with equal weight per sample.

    Samples with fewer than two content tracks are skipped.

    Raises
    ------
    NoQualifyingSamples
    """
    res = cbs_detail(samples, cfg)
    if res.value is None:
        raise NoQualifyingSamples(f"CBS undefined: all {res.n_skipped} samples skipped")
    return res.value


def _pair_errors(ref: np.ndarray, other: np.ndarray, penalize_unmatched: bool) -> List[float]:
    out = []
    if ref.shape[0] < 3:
        return out
    for t in range(1, ref.shape[0] - 1):
        b = ref[t]
        half_prev = (b - ref[t - 1]) / 2.0
        half_next = (ref[t + 1] - b) / 2.0
        # candidates: other[lo:hi] lie in [b - half_prev, b + half_next]
        lo = np.searchsorted(other, b - half_prev, side="left")
        hi = np.searchsorted(other, b + half_next, side="right")
        best = None
        for j in range(max(lo - 1, 0), min(hi + 1, other.shape[0])):
            d = other[j] - b
            half = half_prev if d < 0 else half_next
            if abs(d) > half:
                continue
            # strict '<' keeps the earlier of two equidistant candidates
            if best is None or abs(d) < abs(best):
                best = d
        if best is None:
            if penalize_unmatched:
                out.append(1.0)
            continue
        out.append(abs(best) / (half_prev if best < 0 else half_next))
    return out


def beat_errors(sample: MultiTrackSample, cfg: MetricsConfig = MetricsConfig()) -> np.ndarray:
    """Pooled normalized beat errors of one sample.

    For every ordered pair (reference, other) of content tracks and every
    reference beat that has both neighbours, find the nearest beat of the other
    track within ``[b - I_prev / 2, b + I_next / 2]`` (edges included). The
    error is ``|offset| / (I_prev / 2)`` for a match before the beat and
    ``|offset| / (I_next / 2)`` otherwise, so it lies in [0, 1]. Equidistant
    candidates resolve to the earlier one. Unmatched reference beats are
    skipped, or count as 1.0 when ``cfg.penalize_unmatched`` is set.

    Raises
    ------
    NoContentTracks
        If fewer than two content tracks exist.
    """
    tracks = content_tracks(sample, cfg)
    if len(tracks) < 2:
        raise NoContentTracks(
            f"sample {sample.sample_id!r}: need 2 content tracks, got {len(tracks)}"
        )
    errors: List[float] = []
    for ref_name, ref in tracks.items():
        for other_name, other in tracks.items():
            if other_name != ref_name:
                errors.extend(_pair_errors(ref, other, cfg.penalize_unmatched))
    return np.asarray(errors, dtype=np.float64)


def cbd_stats(errors) -> CbdStats:
    """Mean, population std and median of a pooled error array."""
    e = np.asarray(errors, dtype=np.float64)
    if e.size == 0:
        raise EmptyErrorPool("no matched beats; CBD undefined")
    # sort first so the statistics do not depend on pooling order
    e = np.sort(e)
    return CbdStats(float(np.mean(e)), float(np.std(e)), float(np.median(e)), int(e.size))


def cbd(samples: Sequence[MultiTrackSample], cfg: MetricsConfig = MetricsConfig()) -> CbdStats:
    """Cross-track beat dispersion over a set of samples.

    Errors are pooled over samples, reference tracks and beats before the
    statistics are taken. Samples with fewer than two content tracks add
    nothing to the pool.

    Raises
    ------
    EmptyErrorPool
    """
    pool = []
    for s in samples:
        if len(content_tracks(s, cfg)) >= 2:
            pool.append(beat_errors(s, cfg))
    if not pool:
        raise EmptyErrorPool("no sample has two content tracks")
    return cbd_stats(np.concatenate(pool))
