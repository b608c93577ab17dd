"""Rhythmic stability and cross-track synchronization metrics for multi-track audio."""

__version__ = "0.1.0"

from .audio import AudioClip, load_wav, mix, resample, segment, write_wav  # noqa: E402
from .beats import BeatSequence, read_beats, write_beats  # noqa: E402
from .dsp import OnsetEnvelope, Spectrogram, onset_envelope, resample_envelope, stft_mel  # noqa: E402
from .metrics import (  # noqa: E402
    MetricsConfig,
    MultiTrackSample,
    beat_errors,
    cbd,
    cbs,
    inter_beat_intervals,
    irs,
    window_coverage,
)
from .tracker import TempoEstimate, TrackerConfig, beats_from_clip, estimate_tempo, track_beats  # noqa: E402
from .synth import GroundTruthSample, SynthSpec, corpus, generate  # noqa: E402

__all__ = [
    "AudioClip",
    "load_wav",
    "write_wav",
    "resample",
    "segment",
    "mix",
    "BeatSequence",
    "read_beats",
    "write_beats",
    "Spectrogram",
    "OnsetEnvelope",
    "stft_mel",
    "onset_envelope",
    "resample_envelope",
    "MetricsConfig",
    "MultiTrackSample",
    "inter_beat_intervals",
    "irs",
    "window_coverage",
    "cbs",
    "beat_errors",
    "cbd",
    "TrackerConfig",
    "TempoEstimate",
    "estimate_tempo",
    "track_beats",
    "beats_from_clip",
    "SynthSpec",
    "GroundTruthSample",
    "generate",
    "corpus",
]
