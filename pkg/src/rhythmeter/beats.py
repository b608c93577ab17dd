"""Beat sequences and their plain-text file format (one time in seconds per line)."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import MissingFile

__all__ = ["BeatSequence", "read_beats", "write_beats"]


@dataclass(frozen=True, eq=False)
class BeatSequence:
    """Strictly increasing beat instants (seconds) inside ``[0, clip_duration]``."""

    times: np.ndarray
    clip_duration: float

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64).reshape(-1)
        if t.size:
            if np.any(np.diff(t) <= 0):
                raise ValueError("beat times must be strictly increasing")
            if t[0] < 0 or t[-1] > self.clip_duration:
                raise ValueError(
                    f"beat times must lie in [0, {self.clip_duration}], got [{t[0]}, {t[-1]}]"
                )
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "clip_duration", float(self.clip_duration))

    def __len__(self):
        return self.times.shape[0]

    def __eq__(self, other):
        if not isinstance(other, BeatSequence):
            return NotImplemented
        return self.clip_duration == other.clip_duration and np.array_equal(self.times, other.times)

    @classmethod
    def empty(cls, clip_duration):
        return cls(np.zeros(0), clip_duration)

    def shifted(self, offset, clip_duration=None):
        return BeatSequence(self.times + offset, self.clip_duration if clip_duration is None else clip_duration)

    def window(self, start, stop):
        """Beats in ``[start, stop)`` re-referenced to ``start``."""
        t = self.times
        sel = t[(t >= start) & (t < stop)] - start
        return BeatSequence(np.clip(sel, 0.0, stop - start), stop - start)


def read_beats(path, clip_duration=None) -> BeatSequence:
    """Load a beats file. Blank lines and ``#`` comments are ignored.

    Only the first whitespace-separated column is used, so label files with a
    trailing beat-position column load too.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise MissingFile(path)
    times = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                times.append(float(line.split()[0]))
    times = np.array(times, dtype=np.float64)
    if clip_duration is None:
        clip_duration = float(times[-1]) if times.size else 0.0
    return BeatSequence(times, clip_duration)


def write_beats(path, beats: BeatSequence, decimals=None):
    """Write one time per line; full round-trip precision unless ``decimals`` is set."""
    with open(os.fspath(path), "w") as fh:
        for t in beats.times:
            fh.write(f"{t:.{decimals}f}\n" if decimals is not None else f"{float(t)!r}\n")
