"""
Tempo estimation and dynamic-programming beat tracking.

Tempo comes from the autocorrelation of the mean-removed onset envelope,
weighted by a log-normal prior over tempo. Beats are then the single best
path through the envelope under the recursion

    C(t) = O(t) + max(0, max_{d in [d_min, 2 tau]} C(t - d) - lam * log(d / tau)^2)

where ``O`` is the envelope rescaled by ``BEAT_MASS / (mean * tau)`` so an
average beat period carries a fixed onset mass, ``tau`` is the beat period in
frames and ``lam`` the transition lambda. The rescaling keeps ``lam``
comparable across loudness levels and frame rates. The ``max(0, .)`` lets a path start
fresh at its first onset instead of being dragged back to frame 0 through
silence. The path is read back from the frame with the highest ``C``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .audio import AudioClip, resample
from .beats import BeatSequence
from .dsp import (
    DEFAULT_HOP,
    DEFAULT_N_MELS,
    DEFAULT_WINDOW,
    OnsetEnvelope,
    onset_envelope,
    resample_envelope,
    stft_mel,
)
from .errors import EnvelopeTooShort, InvalidConfig

__all__ = [
    "TrackerConfig",
    "TempoEstimate",
    "estimate_tempo",
    "track_beats",
    "clip_envelope",
    "beats_from_envelope",
    "beats_from_clip",
    "ANALYSIS_RATE",
]

ANALYSIS_RATE = 16000
# envelope sum below SILENCE_LEVEL * n_frames counts as silence
SILENCE_LEVEL = 1e-6
# onset mass carried by one beat period after normalization; sets the scale on
# which transition_lambda values 25..200 move from onset-following to smoothing
BEAT_MASS = 10.0


@dataclass(frozen=True)
class TrackerConfig:
    fps: float = 150.0
    transition_lambda: float = 100.0
    bpm_min: float = 55.0
    bpm_max: float = 215.0
    tempo_prior_center: float = 120.0
    tempo_prior_spread: float = 1.0

    def __post_init__(self):
        if not self.fps > 0:
            raise InvalidConfig("fps must be > 0")
        if not self.transition_lambda >= 0:
            raise InvalidConfig("transition_lambda must be >= 0")
        if not 0 < self.bpm_min < self.bpm_max:
            raise InvalidConfig("need 0 < bpm_min < bpm_max")
        if not self.tempo_prior_center > 0 or not self.tempo_prior_spread > 0:
            raise InvalidConfig("tempo prior center and spread must be > 0")


@dataclass(frozen=True)
class TempoEstimate:
    bpm: float
    confidence: float
    flat: bool = False


def _autocorrelation(x):
    n = x.shape[0]
    size = 1 << int(2 * n - 1).bit_length()
    spec = np.fft.rfft(x, size)
    return np.fft.irfft(spec * np.conj(spec), size)[:n]


def estimate_tempo(env: OnsetEnvelope, cfg: TrackerConfig = TrackerConfig()) -> TempoEstimate:
    """Pick the autocorrelation lag that best matches a tempo prior.

    Parameters
    ----------
    env : OnsetEnvelope
        Must span at least two periods of ``cfg.bpm_min``.
    cfg : TrackerConfig

    Returns
    -------
    TempoEstimate
        ``bpm = 60 * fps / lag`` for the lag maximizing
        ``AC(lag) * exp(-0.5 * (log2(bpm / center) / spread) ** 2)``, refined
        by a parabola through the neighbouring lags. ``confidence`` is the
        normalized autocorrelation at that lag, clipped to [0, 1]. A constant
        envelope gives the prior center with confidence 0 and ``flat=True``.
    """
    fps = env.fps
    if env.duration < 2 * 60.0 / cfg.bpm_min:
        raise EnvelopeTooShort(
            f"envelope spans {env.duration:.3f} s, need {2 * 60.0 / cfg.bpm_min:.3f} s"
        )
    x = env.values - env.values.mean()
    energy = float(np.dot(x, x))
    if energy <= 0.0:
        return TempoEstimate(float(cfg.tempo_prior_center), 0.0, flat=True)

    ac = _autocorrelation(x) / energy
    lag_lo = max(1, int(math.ceil(fps * 60.0 / cfg.bpm_max)))
    lag_hi = min(len(x) - 1, int(math.floor(fps * 60.0 / cfg.bpm_min)))
    lags = np.arange(lag_lo, lag_hi + 1)
    bpms = 60.0 * fps / lags
    prior = np.exp(-0.5 * (np.log2(bpms / cfg.tempo_prior_center) / cfg.tempo_prior_spread) ** 2)
    score = ac[lags] * prior
    k = int(np.argmax(score))

    lag = float(lags[k])
    if 0 < k < len(lags) - 1:
        a, b, c = score[k - 1], score[k], score[k + 1]
        denom = a - 2 * b + c
        if denom < 0:
            lag += 0.5 * (a - c) / denom
    bpm = float(np.clip(60.0 * fps / lag, cfg.bpm_min, cfg.bpm_max))
    confidence = float(np.clip(ac[lags[k]], 0.0, 1.0))
    return TempoEstimate(bpm, confidence)


def track_beats(
    env: OnsetEnvelope,
    tempo: TempoEstimate,
    cfg: TrackerConfig = TrackerConfig(),
    clip_duration: Optional[float] = None,
) -> BeatSequence:
    """Globally optimal beat path through ``env`` for the given tempo.

    Predecessors of a beat lie between ``max(tau / 2, 60 fps / bpm_max)`` and
    ``2 tau`` frames back, so consecutive beats are never closer than
    ``60 / bpm_max`` seconds. Silent envelopes give an empty sequence.
    """
    if not cfg.bpm_min <= tempo.bpm <= cfg.bpm_max:
        raise InvalidConfig(f"tempo {tempo.bpm} outside [{cfg.bpm_min}, {cfg.bpm_max}]")
    fps = env.fps
    n = len(env)
    if clip_duration is None:
        clip_duration = max(n - 1, 0) / fps
    values = env.values
    if n == 0 or values.sum() < SILENCE_LEVEL * n:
        return BeatSequence.empty(clip_duration)

    tau = 60.0 * fps / tempo.bpm
    d_min = max(int(math.ceil(tau / 2)), int(math.ceil(60.0 * fps / cfg.bpm_max - 1e-9)), 1)
    d_max = max(int(math.floor(2 * tau)), d_min)
    deltas = np.arange(d_min, d_max + 1)
    penalty = cfg.transition_lambda * np.log(deltas / tau) ** 2

    onset = BEAT_MASS * values / (values.mean() * tau)
    score = np.empty(n)
    backlink = np.full(n, -1, dtype=np.int64)
    for t in range(n):
        hi = min(d_max, t)
        if hi < d_min:
            score[t] = onset[t]
            continue
        m = hi - d_min + 1
        # candidates t - d_min, t - d_min - 1, ..., t - hi
        cand = score[t - d_min::-1][:m] - penalty[:m]
        j = int(np.argmax(cand))
        if cand[j] > 0:
            score[t] = onset[t] + cand[j]
            backlink[t] = t - d_min - j
        else:
            score[t] = onset[t]

    frames = []
    t = int(np.argmax(score))
    while t >= 0:
        frames.append(t)
        t = int(backlink[t])
    frames = np.array(frames[::-1], dtype=np.float64)
    times = np.minimum(frames / fps, clip_duration)
    return BeatSequence(times, clip_duration)


def clip_envelope(
    clip: AudioClip,
    window: int = DEFAULT_WINDOW,
    hop: int = DEFAULT_HOP,
    n_mels: int = DEFAULT_N_MELS,
) -> OnsetEnvelope:
    """Onset envelope of ``clip`` at the analysis rate, before fps conversion."""
    if clip.sample_rate != ANALYSIS_RATE:
        clip = resample(clip, ANALYSIS_RATE)
    return onset_envelope(stft_mel(clip, window=window, hop=hop, n_mels=n_mels))


def beats_from_envelope(env: OnsetEnvelope, cfg: TrackerConfig, clip_duration: float) -> BeatSequence:
    """Convert to ``cfg.fps``, estimate tempo, and track."""
    env = resample_envelope(env, cfg.fps)
    if env.values.sum() < SILENCE_LEVEL * max(len(env), 1):
        return BeatSequence.empty(clip_duration)
    tempo = estimate_tempo(env, cfg)
    return track_beats(env, tempo, cfg, clip_duration)


def beats_from_clip(clip: AudioClip, cfg: TrackerConfig = TrackerConfig(), **frontend) -> BeatSequence:
    """Full audio-to-beats pipeline for one mono clip."""
    return beats_from_envelope(clip_envelope(clip, **frontend), cfg, clip.duration)
