# coding: utf-8

# # Rhythm metrics on hand-made beat lists
#
# IRS, CBS and CBD only need beat times, so we can build tiny samples by hand
# and check every number against arithmetic done by hand before any audio
# is involved.

import numpy as np

from rhythmeter.metrics import (
    MetricsConfig,
    MultiTrackSample,
    beat_errors,
    cbd,
    cbs,
    inter_beat_intervals,
    irs,
    window_coverage,
)

# ## IRS: how steady is one track?
#
# A drummer who alternates 0.5 s and 0.6 s intervals has a mean interval of
# 0.55 s and every deviation is 0.05 s, so the (population) std is 0.05.

drums = np.cumsum([0.0, 0.5, 0.6, 0.5, 0.6])
print("intervals:", inter_beat_intervals(drums))
print("IRS      :", irs([drums]))

# A metronome gets exactly zero.

print("IRS (metronome):", irs([np.arange(0, 5, 0.5)]))

# ## CBS: do tracks land in the same windows?
#
# Two tracks share a beat at the start, then each plays alone once. With
# 0.1 s windows the occupied windows have coverage 1.0, 0.5 and 0.5.

pair = MultiTrackSample.from_times("ab", {"A": [0.05, 1.05], "B": [0.06, 2.05]}, 3.0)
ratios = window_coverage(pair, MetricsConfig(cbs_window=0.1)).ratios
print("occupied windows:", np.flatnonzero(ratios), ratios[ratios > 0])
print("CBS:", cbs([pair]))

# ## CBD: how far apart are matched beats?
#
# Track B runs 50 ms behind track A at 120 BPM. Each interior beat's half
# interval is 0.25 s, so every error is 0.05 / 0.25 = 0.2, in both matching
# directions.

a = np.arange(0.5, 3.0, 0.5)
lagged = MultiTrackSample.from_times("lag", {"A": a, "B": a + 0.05}, 4.0)
print("errors:", beat_errors(lagged))
print("CBD   :", cbd([lagged]))

# Doubling the lag doubles the error, up to the half-interval limit of 1.0.

for delta in (0.02, 0.05, 0.10, 0.20):
    s = MultiTrackSample.from_times("lag", {"A": a, "B": a + delta}, 4.0)
    print(f"delta {delta:.2f} s -> CBD mean {cbd([s]).mean:.3f}")
