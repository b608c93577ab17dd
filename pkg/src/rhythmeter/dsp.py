"""
Log-mel spectrogram and spectral-flux onset envelope.

The onset envelope is the only thing the beat tracker sees. It is built as

1. Hann-windowed STFT magnitudes (center padded by reflection),
2. projected onto a triangular HTK-scale mel filter bank,
3. compressed with ``log(1 + m)``,
4. half-wave rectified frame-to-frame difference summed over mel bands,
5. minus a centered 0.5 s running mean, rectified again.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.ndimage import convolve1d

from .audio import AudioClip
from .errors import InvalidBand, InvalidRate, TooFewFrames, WindowTooLarge

__all__ = [
    "Spectrogram",
    "OnsetEnvelope",
    "hz_to_mel",
    "mel_to_hz",
    "mel_filterbank",
    "mel_center_frequencies",
    "stft_mel",
    "onset_envelope",
    "resample_envelope",
    "DEFAULT_WINDOW",
    "DEFAULT_HOP",
    "DEFAULT_N_MELS",
]

DEFAULT_WINDOW = 1024
DEFAULT_HOP = 160
DEFAULT_N_MELS = 64
DEFAULT_FMIN = 0.0
DEFAULT_FMAX = 8000.0
LOCAL_MEAN_SECONDS = 0.5


@dataclass(frozen=True, eq=False)
class Spectrogram:
    """Log-compressed mel magnitudes, shape ``(n_frames, n_mels)``."""

    frames: np.ndarray
    hop: int
    window: int
    sample_rate: int

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def fps(self) -> float:
        return self.sample_rate / self.hop


@dataclass(frozen=True, eq=False)
class OnsetEnvelope:
    """Non-negative onset strength per frame at ``fps`` frames per second."""

    values: np.ndarray
    fps: float

    def __post_init__(self):
        if not self.fps > 0:
            raise InvalidRate(f"fps must be positive, got {self.fps}")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))

    def __len__(self):
        return self.values.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.fps

    def __eq__(self, other):
        if not isinstance(other, OnsetEnvelope):
            return NotImplemented
        return self.fps == other.fps and np.array_equal(self.values, other.values)


def hz_to_mel(f):
    """HTK mel scale: ``2595 log10(1 + f / 700)``."""
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_center_frequencies(n_mels, fmin, fmax):
    """Center frequency (Hz) of each triangular filter."""
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))
    return edges[1:-1]


def mel_filterbank(sample_rate, n_fft, n_mels, fmin, fmax):
    """Triangular filters with unit peak, shape ``(n_mels, n_fft // 2 + 1)``."""
    fft_freqs = np.fft.rfftfreq(n_fft, d=1.0 / sample_rate)
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))
    lower, center, upper = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (fft_freqs[None, :] - lower) / (center - lower)
    falling = (upper - fft_freqs[None, :]) / (upper - center)
    return np.maximum(0.0, np.minimum(rising, falling))


def stft_mel(
    clip: AudioClip,
    window: int = DEFAULT_WINDOW,
    hop: int = DEFAULT_HOP,
    n_mels: int = DEFAULT_N_MELS,
    fmin: float = DEFAULT_FMIN,
    fmax: float = DEFAULT_FMAX,
) -> Spectrogram:
    """Log-mel spectrogram of ``clip``.

    Parameters
    ----------
    clip : AudioClip
    window : int
        FFT size and Hann window length in samples.
    hop : int
        Frame advance in samples.
    n_mels : int
        Number of triangular mel bands.
    fmin, fmax : float
        Band edges in Hz; ``fmax`` may not exceed Nyquist.

    Returns
    -------
    Spectrogram
        ``log(1 + M)`` where ``M`` is the mel-projected STFT magnitude.
        Frames are centered: the signal is reflect-padded by ``window // 2``
        on both sides, giving ``1 + (len + 2 * (window // 2) - window) // hop``
        frames.
    """
    if not (window >= hop > 0):
        raise ValueError(f"need window >= hop > 0, got window={window} hop={hop}")
    if n_mels < 1:
        raise ValueError("n_mels must be >= 1")
    if not (0 <= fmin < fmax):
        raise InvalidBand(f"need 0 <= fmin < fmax, got {fmin}, {fmax}")
    if fmax > clip.sample_rate / 2:
        raise InvalidBand(f"fmax {fmax} above Nyquist {clip.sample_rate / 2}")

    pad = window // 2
    x = clip.samples
    if len(x) > 1:
        padded = np.pad(x, pad, mode="reflect")
    else:
        padded = np.pad(x, pad, mode="constant")
    if window > len(padded):
        raise WindowTooLarge(f"window {window} exceeds padded signal length {len(padded)}")

    frames = sliding_window_view(padded, window)[::hop]
    spec = np.abs(np.fft.rfft(frames * np.hanning(window + 1)[:-1], axis=1))
    fb = mel_filterbank(clip.sample_rate, window, n_mels, fmin, fmax)
    mel = spec @ fb.T
    return Spectrogram(np.log1p(mel), hop, window, clip.sample_rate)


def onset_envelope(spec: Spectrogram) -> OnsetEnvelope:
    """Spectral flux with local-mean removal.

    ``values[t] = sum_b max(0, L[t, b] - L[t-1, b])`` with ``values[0] = 0``;
    then a centered running mean over 0.5 s is subtracted and the result is
    clipped at zero.
    """
    L = spec.frames
    if L.shape[0] < 2:
        raise TooFewFrames(f"need at least 2 frames, got {L.shape[0]}")
    flux = np.zeros(L.shape[0])
    flux[1:] = np.maximum(0.0, np.diff(L, axis=0)).sum(axis=1)

    fps = spec.fps
    width = max(1, int(round(LOCAL_MEAN_SECONDS * fps)))
    width += 1 - width % 2  # odd so the window is centered
    # direct sum rather than a running sum, so silent stretches stay exactly 0
    local_mean = convolve1d(flux, np.full(width, 1.0 / width), mode="reflect")
    values = np.maximum(0.0, flux - local_mean)
    return OnsetEnvelope(values, fps)


def resample_envelope(env: OnsetEnvelope, target_fps: float) -> OnsetEnvelope:
    """Linearly interpolate ``env`` onto a ``target_fps`` frame grid.

    The output grid is ``k / target_fps`` for every ``k`` that stays inside the
    span of the input frames.
    """
    if not target_fps > 0:
        raise InvalidRate(f"target_fps must be positive, got {target_fps}")
    if target_fps == env.fps:
        return OnsetEnvelope(env.values.copy(), env.fps)
    n = len(env)
    if n == 0:
        return OnsetEnvelope(np.zeros(0), float(target_fps))
    last = (n - 1) / env.fps
    n_out = int(np.floor(last * target_fps + 1e-9)) + 1
    t_out = np.arange(n_out) / target_fps
    t_in = np.arange(n) / env.fps
    return OnsetEnvelope(np.interp(t_out, t_in, env.values), float(target_fps))
