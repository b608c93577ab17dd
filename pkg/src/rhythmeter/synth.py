"""
Synthetic multi-track click audio with exact ground-truth beats.

Each track is an isochronous grid ``i * 60 / bpm`` shifted by a per-track
offset, perturbed by independent Gaussian jitter per beat and thinned by
random dropout. The audio is a decaying sine burst at every kept beat.

Randomness comes from numpy's PCG64 generator seeded with ``spec.seed``.
Draw order is fixed so corpora reproduce exactly: for each track in index
order, ``n_grid`` normal jitter draws followed by ``n_grid`` uniform dropout
draws. Silent tracks consume their draws too, so silencing one track never
changes another.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .audio import AudioClip, write_wav
from .beats import BeatSequence, write_beats
from .errors import InvalidSpec
from .metrics import MultiTrackSample

__all__ = ["SynthSpec", "GroundTruthSample", "generate", "corpus", "write_ground_truth", "DEFAULT_TRACKS"]

DEFAULT_TRACKS = ("bass", "drums", "guitar", "piano")
CLICK_AMPLITUDE = 0.5
# bursts are cut after this many decay constants (exp(-10) ~ 4.5e-5)
CLICK_LENGTH_DECAYS = 10.0


@dataclass(frozen=True)
class SynthSpec:
    bpm: float = 120.0
    duration: float = 10.24
    n_tracks: int = 4
    jitter_sigma: float = 0.0
    track_offsets: Optional[Tuple[float, ...]] = None
    drop_prob: float = 0.0
    silent_tracks: Tuple[int, ...] = ()
    seed: int = 0
    click_freq: float = 1000.0
    click_decay: float = 0.02
    sample_rate: int = 16000
    track_names: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if self.track_offsets is not None:
            object.__setattr__(self, "track_offsets", tuple(float(x) for x in self.track_offsets))
        object.__setattr__(self, "silent_tracks", tuple(sorted(int(i) for i in self.silent_tracks)))
        if self.track_names is not None:
            object.__setattr__(self, "track_names", tuple(self.track_names))

    def validate(self):
        problems = []
        if not self.bpm > 0:
            problems.append("bpm must be > 0")
        if not self.duration > 0:
            problems.append("duration must be > 0")
        if self.n_tracks < 1:
            problems.append("n_tracks must be >= 1")
        if not self.jitter_sigma >= 0:
            problems.append("jitter_sigma must be >= 0")
        if not 0 <= self.drop_prob < 1:
            problems.append("drop_prob must be in [0, 1)")
        if self.track_offsets is not None and len(self.track_offsets) != self.n_tracks:
            problems.append("track_offsets needs one entry per track")
        if self.track_names is not None and (
            len(self.track_names) != self.n_tracks or len(set(self.track_names)) != self.n_tracks
        ):
            problems.append("track_names needs n_tracks unique names")
        if any(not 0 <= i < self.n_tracks for i in self.silent_tracks):
            problems.append("silent_tracks index out of range")
        if self.sample_rate <= 0 or self.click_freq <= 0 or self.click_decay <= 0:
            problems.append("sample_rate, click_freq and click_decay must be > 0")
        if problems:
            raise InvalidSpec("; ".join(problems))

    @property
    def names(self) -> Tuple[str, ...]:
        if self.track_names is not None:
            return self.track_names
        if self.n_tracks == len(DEFAULT_TRACKS):
            return DEFAULT_TRACKS
        return tuple(f"track{k}" for k in range(self.n_tracks))

    @property
    def offsets(self) -> Tuple[float, ...]:
        return self.track_offsets if self.track_offsets is not None else (0.0,) * self.n_tracks

    def to_dict(self):
        d = dataclasses.asdict(self)
        for k in ("track_offsets", "silent_tracks", "track_names"):
            if d[k] is not None:
                d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidSpec(f"unknown SynthSpec fields: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class GroundTruthSample:
    sample: MultiTrackSample
    audio: Dict[str, AudioClip] = field(compare=False)


def _click_audio(times, spec: SynthSpec) -> np.ndarray:
    sr = spec.sample_rate
    n = int(round(spec.duration * sr))
    out = np.zeros(n)
    length = int(math.ceil(CLICK_LENGTH_DECAYS * spec.click_decay * sr))
    for b in times:
        start = int(math.ceil(b * sr))
        stop = min(n, start + length)
        if start >= stop:
            continue
        dt = np.arange(start, stop) / sr - b
        out[start:stop] += CLICK_AMPLITUDE * np.sin(2 * np.pi * spec.click_freq * dt) * np.exp(-dt / spec.click_decay)
    return out


def generate(spec: SynthSpec, sample_id: Optional[str] = None) -> GroundTruthSample:
    """Draw one multi-track sample from ``spec``.

    Track ``k`` gets beats ``i * 60 / bpm + offset_k + eps_ki`` kept when they
    fall in ``[0, duration)`` and survive dropout. Silent tracks get no beats
    and all-zero audio.
    """
    spec.validate()
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    period = 60.0 / spec.bpm
    n_grid = int(math.ceil(spec.duration / period)) + 1
    grid = np.arange(n_grid) * 60.0 / spec.bpm
    silent = set(spec.silent_tracks)
    duration = float(spec.duration)

    tracks, audio = {}, {}
    for k, (name, offset) in enumerate(zip(spec.names, spec.offsets)):
        eps = rng.normal(0.0, spec.jitter_sigma, size=n_grid)
        keep = rng.random(n_grid) >= spec.drop_prob
        if k in silent:
            times = np.zeros(0)
        else:
            times = grid + offset + eps
            times = np.unique(times[keep & (times >= 0) & (times < duration)])
        tracks[name] = BeatSequence(times, duration)
        audio[name] = AudioClip(_click_audio(times, spec), spec.sample_rate, name)

    if sample_id is None:
        sample_id = f"synth_{spec.seed:06d}"
    return GroundTruthSample(MultiTrackSample(sample_id, tracks, duration), audio)


def corpus(spec: SynthSpec, n_samples: int) -> List[GroundTruthSample]:
    """``n_samples`` independent draws with seeds ``spec.seed, spec.seed + 1, ...``."""
    if n_samples < 1:
        raise InvalidSpec("n_samples must be >= 1")
    return [generate(dataclasses.replace(spec, seed=spec.seed + i)) for i in range(n_samples)]


def write_ground_truth(gt: GroundTruthSample, directory) -> str:
    """Write ``<track>.wav`` and ``<track>.beats.txt`` for every track into ``directory``."""
    directory = os.fspath(directory)
    os.makedirs(directory, exist_ok=True)
    for name, clip in gt.audio.items():
        write_wav(os.path.join(directory, f"{name}.wav"), clip)
        write_beats(os.path.join(directory, f"{name}.beats.txt"), gt.sample.tracks[name])
    return directory
