"""
Audio I/O: decode, resample, segment and mix multi-stem WAV audio.

Everything downstream works on :class:`AudioClip`, a mono float64 buffer with
its sample rate. Stereo (or wider) files are folded to mono by averaging the
channels, which keeps amplitudes in the nominal [-1, 1] range.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor
from typing import Optional, Sequence

import numpy as np
import scipy.signal
from scipy.io import wavfile

from .errors import (
    CorruptHeader,
    EmptyInput,
    InvalidLength,
    InvalidRate,
    LengthMismatch,
    MissingFile,
    RateMismatch,
    UnsupportedEncoding,
)

__all__ = ["AudioClip", "load_wav", "write_wav", "wav_duration", "resample", "segment", "mix"]

# full-scale divisors for integer PCM as returned by scipy (24-bit arrives
# left-justified in int32, so it shares the 32-bit divisor)
_PCM_SCALE = {np.dtype(np.int16): 32768.0, np.dtype(np.int32): 2147483648.0}


@dataclass(frozen=True, eq=False)
class AudioClip:
    """Mono PCM samples with a sample rate."""

    samples: np.ndarray
    sample_rate: int
    label: Optional[str] = field(default=None)

    def __post_init__(self):
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise InvalidRate(f"sample_rate must be a positive integer, got {self.sample_rate}")
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("AudioClip holds mono audio; samples must be 1-D")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    def __eq__(self, other):
        if not isinstance(other, AudioClip):
            return NotImplemented
        return (
            self.sample_rate == other.sample_rate
            and self.label == other.label
            and np.array_equal(self.samples, other.samples)
        )


def _check_riff(path):
    with open(path, "rb") as fh:
        head = fh.read(12)
    if len(head) < 12 or head[:4] not in (b"RIFF", b"RF64") or head[8:12] != b"WAVE":
        raise CorruptHeader(f"{path}: not a RIFF/WAVE file")


def load_wav(path, label: Optional[str] = None) -> AudioClip:
    """Read a WAV file as a mono float clip.

    Parameters
    ----------
    path : str or os.PathLike
        RIFF/WAVE file holding PCM-16, PCM-24, PCM-32, 8-bit unsigned or
        IEEE-float samples, any channel count.
    label : str, optional
        Track name to attach; defaults to the file stem.

    Returns
    -------
    AudioClip
        Channel-mean downmix, integer formats scaled by the type's maximum
        magnitude (so PCM-16 ``32767`` becomes ``32767 / 32768``).

    Raises
    ------
    MissingFile, UnsupportedEncoding, CorruptHeader
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise MissingFile(path)
    _check_riff(path)
    try:
        sr, data = wavfile.read(path, mmap=False)
    except ValueError as exc:
        msg = str(exc)
        if "Unknown wave file format" in msg or "Unsupported" in msg:
            raise UnsupportedEncoding(f"{path}: {msg}") from exc
        raise CorruptHeader(f"{path}: {msg}") from exc
    except Exception as exc:  # scipy surfaces truncation as struct/unbound errors
        raise CorruptHeader(f"{path}: {exc}") from exc

    if data.dtype == np.uint8:
        x = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype in _PCM_SCALE:
        x = data.astype(np.float64) / _PCM_SCALE[data.dtype]
    elif data.dtype.kind == "f":
        x = data.astype(np.float64)
    else:
        raise UnsupportedEncoding(f"{path}: sample type {data.dtype}")
    if x.ndim == 2:
        x = x.mean(axis=1)
    if label is None:
        label = os.path.splitext(os.path.basename(path))[0]
    return AudioClip(x, int(sr), label)


def wav_duration(path) -> float:
    """Duration in seconds from the header alone (used by beats-file mode)."""
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise MissingFile(path)
    _check_riff(path)
    try:
        sr, data = wavfile.read(path, mmap=True)
    except ValueError as exc:
        raise UnsupportedEncoding(f"{path}: {exc}") from exc
    except Exception as exc:
        raise CorruptHeader(f"{path}: {exc}") from exc
    n = data.shape[0]
    del data
    return n / sr


def write_wav(path, clip: AudioClip):
    """Write ``clip`` as 32-bit float WAV (float keeps unclipped mixes intact)."""
    wavfile.write(os.fspath(path), clip.sample_rate, clip.samples.astype(np.float32))


def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """Band-limited sample-rate conversion.

    Uses a Kaiser-windowed sinc polyphase filter. The output has
    ``round(len * target_rate / sample_rate)`` samples. Matching rates return
    the samples untouched.
    """
    if target_rate <= 0 or int(target_rate) != target_rate:
        raise InvalidRate(f"target_rate must be a positive integer, got {target_rate}")
    target_rate = int(target_rate)
    if target_rate == clip.sample_rate:
        return AudioClip(clip.samples.copy(), clip.sample_rate, clip.label)
    ratio = Fraction(target_rate, clip.sample_rate)
    n_out = int(np.round(len(clip) * target_rate / clip.sample_rate))
    if len(clip) == 0:
        return AudioClip(np.zeros(0), target_rate, clip.label)
    y = scipy.signal.resample_poly(clip.samples, ratio.numerator, ratio.denominator)
    # resample_poly yields ceil(n * up / down) samples; trim to the rounded count
    if y.shape[0] < n_out:
        y = np.pad(y, (0, n_out - y.shape[0]))
    return AudioClip(y[:n_out], target_rate, clip.label)


def segment(clip: AudioClip, segment_seconds: float) -> list:
    """Cut ``clip`` into contiguous, non-overlapping pieces from t = 0.

    A trailing remainder shorter than ``segment_seconds`` is dropped.
    """
    if not segment_seconds > 0:
        raise InvalidLength(f"segment_seconds must be positive, got {segment_seconds}")
    seg_len = int(round(segment_seconds * clip.sample_rate))
    if seg_len <= 0:
        raise InvalidLength("segment shorter than one sample")
    n_seg = len(clip) // seg_len
    return [
        AudioClip(clip.samples[i * seg_len:(i + 1) * seg_len], clip.sample_rate, clip.label)
        for i in range(n_seg)
    ]


def mix(clips: Sequence[AudioClip]) -> AudioClip:
    """Sample-wise sum of equally long clips at one sample rate.

    No normalization or clipping: four stems at 0.3 mix to 1.2. Summation runs
    left to right over ``clips`` in float64.
    """
    if len(clips) == 0:
        raise EmptyInput("mix() needs at least one clip")
    sr = clips[0].sample_rate
    n = len(clips[0])
    out = np.zeros(n)
    for c in clips:
        if c.sample_rate != sr:
            raise RateMismatch(f"{c.sample_rate} != {sr}")
        if len(c) != n:
            raise LengthMismatch(f"{len(c)} != {n}")
        out += c.samples
    return AudioClip(out, sr, "mix")


def n_segments(duration: float, segment_seconds: float) -> int:
    return int(floor(duration / segment_seconds + 1e-9))
