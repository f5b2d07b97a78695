"""Traditional per-page eye-tracking indices (fixations, saccades, AOIs)."""

from __future__ import annotations

import csv
import math
import statistics
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence, TextIO

from .aoi import AoiSet
from .errors import ValidationError
from .gaze_data import Recording

# Column order and display names for per-page exports.
INDEX_NAMES = {
    "fix_num": "number of fixations",
    "dur_mean": "mean of duration",
    "dur_std": "std of duration",
    "sacc_len_mean": "mean of saccade length",
    "sacc_len_std": "std of saccade length",
    "aoi_num": "number of AOIs",
    "aoi_fixnum_mean": "mean of AOI fixNum",
    "aoi_fixnum_std": "std of AOI fixNum",
}


@dataclass(frozen=True)
class DescriptiveIndices:
    fix_num: int
    dur_mean: float | None
    dur_std: float | None
    sacc_len_mean: float | None
    sacc_len_std: float | None
    aoi_num: int
    aoi_fixnum_mean: float | None
    aoi_fixnum_std: float | None

    def as_dict(self) -> dict:
        return asdict(self)


def saccade_lengths(recording: Recording) -> list[float]:
    fx = recording.fixations
    return [math.hypot(b.x_px - a.x_px, b.y_px - a.y_px) for a, b in zip(fx, fx[1:])]


def _mean(xs):
    return statistics.fmean(xs) if len(xs) else None


def _std(xs):
    # sample standard deviation; undefined below two values
    return statistics.stdev(xs) if len(xs) >= 2 else None


def descriptive_indices(recordings: Sequence[Recording], aoi_set: AoiSet) -> DescriptiveIndices:
    """All eight indices over the pooled fixations of one page.

    Saccades are taken within each recording only; AOI statistics come from
    the per-AOI fixation counts of ``aoi_set``.
    """
    if not recordings:
        raise ValidationError("descriptive indices need at least one recording")
    durations = [f.duration_ms for r in recordings for f in r.fixations]
    saccades = [s for r in recordings for s in saccade_lengths(r)]
    counts = [float(c) for c in aoi_set.counts]
    return DescriptiveIndices(
        fix_num=len(durations),
        dur_mean=_mean(durations),
        dur_std=_std(durations),
        sacc_len_mean=_mean(saccades),
        sacc_len_std=_std(saccades),
        aoi_num=len(aoi_set),
        aoi_fixnum_mean=_mean(counts),
        aoi_fixnum_std=_std(counts),
    )


def write_indices_csv(indices: Mapping[str, DescriptiveIndices], stream: TextIO) -> None:
    """One row per page; header uses the conventional index names."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["page_id", *INDEX_NAMES.values()])
    for page in sorted(indices):
        row = indices[page].as_dict()
        writer.writerow([page, *("" if row[k] is None else f"{row[k]:.12g}" for k in INDEX_NAMES)])
