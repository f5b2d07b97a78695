"""Areas of interest, AOI scanpaths and first-order gaze-transition entropy."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import ComputationError, ValidationError
from .gaze_data import Fixation, Recording, format_number

log = logging.getLogger(__name__)

DEFAULT_RADIUS_PX = 80.0
PRIOR_MODES = ("source", "occurrence", "first")


@dataclass(frozen=True)
class Aoi:
    label: int
    centroid: tuple[float, float]
    members: tuple[int, ...]  # indices into the clustered fixation sequence

    @property
    def count(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class AoiSet:
    aois: tuple[Aoi, ...]
    radius_px: float

    def __len__(self):
        return len(self.aois)

    @property
    def counts(self) -> list[int]:
        return [a.count for a in self.aois]

    def assign(self, x: float, y: float) -> int:
        """Label of the nearest centroid; ties go to the lower label."""
        if not self.aois:
            raise ValidationError("cannot assign fixations to an empty AOI set")
        best, best_d = 0, math.inf
        for aoi in self.aois:
            d = math.hypot(x - aoi.centroid[0], y - aoi.centroid[1])
            if d < best_d:
                best, best_d = aoi.label, d
        return best

    def write_tsv(self, stream: TextIO) -> None:
        stream.write("aoi_id\tcentroid_x\tcentroid_y\tfix_count\n")
        for a in self.aois:
            stream.write(f"{a.label}\t{format_number(a.centroid[0])}\t{format_number(a.centroid[1])}\t{a.count}\n")


class _Cluster:
    __slots__ = ("members", "cx", "cy")

    def __init__(self, members, fixations):
        self.members = list(members)
        self.recenter(fixations)

    def recenter(self, fixations):
        w = math.fsum(fixations[i].duration_ms for i in self.members)
        self.cx = math.fsum(fixations[i].duration_ms * fixations[i].x_px for i in self.members) / w
        self.cy = math.fsum(fixations[i].duration_ms * fixations[i].y_px for i in self.members) / w

    def distance(self, f: Fixation) -> float:
        return math.hypot(f.x_px - self.cx, f.y_px - self.cy)


def _greedy_assign(order, fixations, clusters, radius):
    for idx in order:
        f = fixations[idx]
        best, best_d = None, math.inf
        for c in clusters:
            d = c.distance(f)
            if d <= radius and d < best_d:
                best, best_d = c, d
        if best is None:
            clusters.append(_Cluster([idx], fixations))
        else:
            best.members.append(idx)
            best.recenter(fixations)


def cluster_aoi(fixations: Sequence[Fixation], radius_px: float = DEFAULT_RADIUS_PX, max_rounds: int = 100) -> AoiSet:
    """Greedy time-ordered centroid clustering.

    Each fixation, taken in onset order, joins the nearest AOI whose
    duration-weighted centroid lies within ``radius_px``, or opens a new
    AOI. Because centroids drift as members join, a follow-up pass evicts
    members left farther than ``radius_px`` from their final centroid and
    re-runs the same rule on them, until no member is out of range.
    Labels follow the onset of each AOI's earliest member.
    """
    if not radius_px > 0:
        raise ValidationError(f"radius_px must be positive, got {radius_px!r}")
    fixations = list(fixations)
    if not fixations:
        raise ValidationError("cannot cluster zero fixations")
    order = sorted(range(len(fixations)), key=lambda i: fixations[i].start_ms)
    rank = {idx: r for r, idx in enumerate(order)}

    clusters: list[_Cluster] = []
    _greedy_assign(order, fixations, clusters, radius_px)
    for _ in range(max_rounds):
        evicted = []
        for c in clusters:
            out = [i for i in c.members if c.distance(fixations[i]) > radius_px]
            if out:
                c.members = [i for i in c.members if i not in out]
                evicted.extend(out)
        if not evicted:
            break
        clusters = [c for c in clusters if c.members]
        for c in clusters:
            c.recenter(fixations)
        _greedy_assign(sorted(evicted, key=rank.__getitem__), fixations, clusters, radius_px)
    else:
        log.warning("AOI clustering did not settle after %d rounds", max_rounds)

    clusters.sort(key=lambda c: min(rank[i] for i in c.members))
    aois = tuple(
        Aoi(label, (c.cx, c.cy), tuple(sorted(c.members, key=rank.__getitem__)))
        for label, c in enumerate(clusters, start=1)
    )
    return AoiSet(aois, radius_px)


@dataclass(frozen=True)
class AoiSequence:
    subject_id: str
    labels: tuple[int, ...]

    def __str__(self):
        return " - ".join(map(str, self.labels))


def collapse_repeats(labels: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for lab in labels:
        if not out or out[-1] != lab:
            out.append(lab)
    return tuple(out)


def aoi_sequence(recording: Recording, aoi_set: AoiSet) -> AoiSequence:
    labels = (aoi_set.assign(f.x_px, f.y_px) for f in recording.fixations)
    return AoiSequence(recording.subject_id, collapse_repeats(labels))


def write_sequences_tsv(sequences: Iterable[AoiSequence], stream: TextIO) -> None:
    stream.write("subject_id\tsequence\n")
    for s in sequences:
        stream.write(f"{s.subject_id}\t{s}\n")


@dataclass(frozen=True, eq=False)
class TransitionModel:
    """First-order chain over AOIs ``1..n``; row/column ``k`` is AOI ``k + 1``."""

    matrix: np.ndarray
    priors: np.ndarray
    counts: np.ndarray | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        p = np.asarray(self.priors, dtype=float)
        n = m.shape[0]
        if m.shape != (n, n) or p.shape != (n,):
            raise ValidationError(f"matrix must be n x n and priors length n, got {m.shape} and {p.shape}")
        if np.any(m < 0) or np.any(p < 0):
            raise ValidationError("transition probabilities and priors must be non-negative")
        if np.any(np.diag(m) != 0):
            raise ValidationError("self-transitions must have probability 0")
        rows = m.sum(axis=1)
        if np.any((np.abs(rows - 1) > 1e-9) & (rows != 0)):
            raise ValidationError("every row with outgoing transitions must sum to 1")
        if abs(p.sum() - 1) > 1e-9:
            raise ValidationError(f"priors sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "priors", p)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def p(self, i: int, j: int) -> float:
        """Probability of a jump from AOI ``i`` to AOI ``j`` (1-based labels)."""
        return float(self.matrix[i - 1, j - 1])


def _labels(seq) -> tuple[int, ...]:
    return tuple(seq.labels) if isinstance(seq, AoiSequence) else tuple(seq)


def estimate_transition_model(sequences: Iterable, n: int, prior: str = "source") -> TransitionModel:
    """Count inter-AOI transitions and normalize each row.

    ``prior`` selects how P(i) is estimated: ``"source"`` counts how often
    AOI i starts a transition, ``"occurrence"`` counts every appearance of
    i in the sequences, ``"first"`` counts sequences that begin at i.
    """
    if n < 2:
        raise ValidationError(f"need at least 2 AOIs, got {n}")
    if prior not in PRIOR_MODES:
        raise ValidationError(f"prior must be one of {PRIOR_MODES}, got {prior!r}")
    counts = np.zeros((n, n), dtype=np.int64)
    occurrences = np.zeros(n, dtype=np.int64)
    firsts = np.zeros(n, dtype=np.int64)
    for seq in sequences:
        labels = _labels(seq)
        for lab in labels:
            if not (isinstance(lab, (int, np.integer)) and 1 <= lab <= n):
                raise ValidationError(f"AOI label {lab!r} outside 1..{n}")
            occurrences[lab - 1] += 1
        if labels:
            firsts[labels[0] - 1] += 1
        for a, b in zip(labels, labels[1:]):
            if a == b:
                raise ValidationError(f"sequence contains a self-transition {a} -> {b}; collapse repeats first")
            counts[a - 1, b - 1] += 1
    total = counts.sum()
    if total == 0:
        raise ComputationError("no inter-AOI transitions to estimate from")
    out = counts.sum(axis=1)
    matrix = np.divide(counts, out[:, None], out=np.zeros((n, n)), where=out[:, None] > 0)
    weights = {"source": out, "occurrence": occurrences, "first": firsts}[prior]
    return TransitionModel(matrix, weights / weights.sum(), counts)


@dataclass(frozen=True)
class MarkovEntropy:
    h_bits: float
    h_max_bits: float
    h_relative: float


def markov_entropy(model: TransitionModel) -> MarkovEntropy:
    """Prior-weighted row entropy, normalized by the uniform-chain maximum ``log2(n - 1)``.

    With only two AOIs the chain is forced to alternate; both entropies are
    then 0 and the relative value is reported as 0.
    """
    if model.n < 2:
        raise ValidationError(f"need at least 2 AOIs, got {model.n}")
    h = 0.0
    for i in range(model.n):
        row = model.matrix[i]
        nz = row[row > 0]
        if nz.size:
            h -= model.priors[i] * float(np.sum(nz * np.log2(nz)))
    h = max(h, 0.0)
    h_max = math.log2(model.n - 1)
    return MarkovEntropy(h, h_max, h / h_max if h_max > 0 else 0.0)
