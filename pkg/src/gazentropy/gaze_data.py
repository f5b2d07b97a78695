"""Fixation datasets: domain types, TSV/CSV ingestion and rating scores."""

from __future__ import annotations

import csv
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, TextIO

from .errors import ParseError, ValidationError

log = logging.getLogger(__name__)

FIXATION_COLUMNS = ("subject_id", "page_id", "start_ms", "duration_ms", "x", "y")
RATING_COLUMNS = ("subject_id", "page_id", "verdict")

GOOD, BAD, UNCLASSIFIED = "good", "bad", "unclassified"


@dataclass(frozen=True)
class Fixation:
    """A single fixation: onset and duration in ms, position in screen pixels."""

    start_ms: float
    duration_ms: float
    x_px: float
    y_px: float

    def __post_init__(self):
        for name in ("start_ms", "duration_ms", "x_px", "y_px"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite, got {getattr(self, name)!r}")
        if self.duration_ms <= 0:
            raise ValidationError(f"duration_ms must be positive, got {self.duration_ms!r}")
        if self.start_ms < 0:
            raise ValidationError(f"start_ms must be non-negative, got {self.start_ms!r}")

    @property
    def end_ms(self) -> float:
        return self.start_ms + self.duration_ms

    def on_screen(self, width: int, height: int) -> bool:
        return 0 <= self.x_px < width and 0 <= self.y_px < height


@dataclass(frozen=True)
class Recording:
    subject_id: str
    page_id: str
    fixations: tuple[Fixation, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "fixations", tuple(self.fixations))
        for a, b in zip(self.fixations, self.fixations[1:]):
            if not a.start_ms < b.start_ms:
                raise ValidationError(
                    f"fixations of ({self.subject_id}, {self.page_id}) are not strictly "
                    f"time-ordered: {a.start_ms} then {b.start_ms}"
                )

    def __len__(self):
        return len(self.fixations)

    @property
    def end_ms(self) -> float:
        return max((f.end_ms for f in self.fixations), default=0.0)


@dataclass(frozen=True)
class Screen:
    """Format descriptor: the pixel grid fixations are validated against."""

    width: int = 1280
    height: int = 800

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValidationError(f"screen dimensions must be positive, got {self.width}x{self.height}")

    @classmethod
    def parse(cls, text: str) -> "Screen":
        try:
            w, h = text.lower().split("x")
            return cls(int(w), int(h))
        except ValueError:
            raise ValidationError(f"screen must look like WIDTHxHEIGHT, got {text!r}") from None

    def __str__(self):
        return f"{self.width}x{self.height}"


@dataclass(frozen=True)
class Dataset:
    """All recordings of an experiment, ordered by (page_id, subject_id)."""

    screen_w: int
    screen_h: int
    recordings: tuple[Recording, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        recs = tuple(sorted(self.recordings, key=lambda r: (r.page_id, r.subject_id)))
        object.__setattr__(self, "recordings", recs)
        index = {}
        for rec in recs:
            key = (rec.subject_id, rec.page_id)
            if key in index:
                raise ValidationError(f"duplicate recording for subject {key[0]!r} on page {key[1]!r}")
            index[key] = rec
        object.__setattr__(self, "_index", index)

    @property
    def screen(self) -> Screen:
        return Screen(self.screen_w, self.screen_h)

    @property
    def pages(self) -> tuple[str, ...]:
        return tuple(sorted({r.page_id for r in self.recordings}))

    @property
    def subjects(self) -> tuple[str, ...]:
        return tuple(sorted({r.subject_id for r in self.recordings}))

    @property
    def off_screen_count(self) -> int:
        return sum(
            not f.on_screen(self.screen_w, self.screen_h)
            for r in self.recordings
            for f in r.fixations
        )

    def recording(self, subject_id: str, page_id: str) -> Recording:
        return self._index[(subject_id, page_id)]

    def page_recordings(self, page_id: str) -> tuple[Recording, ...]:
        return tuple(r for r in self.recordings if r.page_id == page_id)

    def restrict_subjects(self, subjects: Iterable[str]) -> "Dataset":
        keep = set(subjects)
        return replace(self, recordings=tuple(r for r in self.recordings if r.subject_id in keep))

    def sliced(self, t_ms: float) -> "Dataset":
        return replace(self, recordings=tuple(slice_recording(r, t_ms) for r in self.recordings))


def slice_recording(recording: Recording, t_ms: float) -> Recording:
    """Fixations that started before ``t_ms``, durations clipped at ``t_ms``."""
    if t_ms < 0:
        raise ValidationError(f"slice time must be non-negative, got {t_ms!r}")
    kept = []
    for f in recording.fixations:
        if f.start_ms >= t_ms:
            break
        if f.end_ms > t_ms:
            f = replace(f, duration_ms=t_ms - f.start_ms)
        kept.append(f)
    return replace(recording, fixations=tuple(kept))


def _number(text: str, column: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"column {column!r} is not numeric: {text!r}", line) from None
    if not math.isfinite(value):
        raise ParseError(f"column {column!r} is not finite: {text!r}", line)
    return value


def parse_fixation_table(stream: TextIO, screen: Screen = Screen()) -> Dataset:
    """Read a fixations TSV into a :class:`Dataset`.

    Rows may appear in any order; they are grouped by (subject, page) and
    sorted by onset. Off-screen fixations are kept and only counted.
    """
    header = stream.readline()
    if not header:
        raise ParseError("empty input, expected a header row", 1)
    cols = tuple(header.rstrip("\r\n").split("\t"))
    if cols != FIXATION_COLUMNS:
        expected = "\t".join(FIXATION_COLUMNS)
        raise ParseError(f"expected header {expected!r}, got {header.rstrip()!r}", 1)

    groups: dict[tuple[str, str], dict[float, Fixation]] = defaultdict(dict)
    for lineno, raw in enumerate(stream, start=2):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != len(FIXATION_COLUMNS):
            raise ParseError(f"expected {len(FIXATION_COLUMNS)} columns, got {len(parts)}", lineno)
        subject, page = parts[0], parts[1]
        start, dur, x, y = (_number(v, c, lineno) for v, c in zip(parts[2:], FIXATION_COLUMNS[2:]))
        try:
            fix = Fixation(start, dur, x, y)
        except ValidationError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
        bucket = groups[(subject, page)]
        if start in bucket:
            raise ValidationError(
                f"line {lineno}: duplicate fixation onset {start:g} ms for subject {subject!r} on page {page!r}"
            )
        bucket[start] = fix

    recordings = tuple(
        Recording(s, p, tuple(sorted(fixes.values(), key=lambda f: f.start_ms)))
        for (s, p), fixes in groups.items()
    )
    ds = Dataset(screen.width, screen.height, recordings)
    if ds.off_screen_count:
        log.warning("%d fixation(s) fall outside the %s screen", ds.off_screen_count, screen)
    return ds


def format_number(value: float) -> str:
    """Shortest text that parses back to exactly ``value``."""
    if float(value).is_integer() and abs(value) < 2**53:
        return str(int(value))
    return repr(float(value))


def serialize_fixation_table(dataset: Dataset, stream: TextIO) -> None:
    stream.write("\t".join(FIXATION_COLUMNS) + "\n")
    for rec in dataset.recordings:
        for f in rec.fixations:
            fields = (f.start_ms, f.duration_ms, f.x_px, f.y_px)
            stream.write("\t".join([rec.subject_id, rec.page_id, *map(format_number, fields)]) + "\n")


@dataclass(frozen=True)
class RatingTable:
    """Binary verdicts keyed by (subject_id, page_id); True means "good"."""

    judgments: Mapping[tuple[str, str], bool]

    @property
    def pages(self) -> tuple[str, ...]:
        return tuple(sorted({p for _, p in self.judgments}))


@dataclass(frozen=True)
class PageScore:
    score: float
    label: str
    n_judgments: int


def classify(score: float) -> str:
    if score > 0.5:
        return GOOD
    if score < 0.5:
        return BAD
    return UNCLASSIFIED


def aggregate_scores(table: RatingTable, pages: Iterable[str] | None = None) -> dict[str, PageScore]:
    """Fraction of "good" verdicts per page and the resulting class.

    When ``pages`` is given, every one of them must have at least one
    judgment; pages that are rated but not listed are still returned.
    """
    good: dict[str, int] = defaultdict(int)
    total: dict[str, int] = defaultdict(int)
    for (_, page), verdict in table.judgments.items():
        total[page] += 1
        good[page] += bool(verdict)
    if pages is not None:
        missing = sorted(set(pages) - set(total))
        if missing:
            raise ValidationError(f"no ratings for page(s): {', '.join(missing)}")
    out = {}
    for page in sorted(total):
        score = good[page] / total[page]
        out[page] = PageScore(score, classify(score), total[page])
    return out


def parse_ratings(stream: TextIO) -> RatingTable:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty ratings input, expected a header row", 1) from None
    if tuple(h.strip() for h in header) != RATING_COLUMNS:
        raise ParseError(f"expected header {','.join(RATING_COLUMNS)!r}, got {','.join(header)!r}", 1)
    judgments: dict[tuple[str, str], bool] = {}
    for row in reader:
        lineno = reader.line_num
        if not row or not "".join(row).strip():
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 columns, got {len(row)}", lineno)
        subject, page, verdict = (c.strip() for c in row)
        if verdict not in (GOOD, BAD):
            raise ValidationError(f"line {lineno}: verdict must be 'good' or 'bad', got {verdict!r}")
        if (subject, page) in judgments:
            raise ValidationError(f"line {lineno}: duplicate rating by {subject!r} for page {page!r}")
        judgments[(subject, page)] = verdict == GOOD
    return RatingTable(judgments)


def serialize_ratings(table: RatingTable, stream: TextIO) -> None:
    stream.write(",".join(RATING_COLUMNS) + "\n")
    for (subject, page), verdict in sorted(table.judgments.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        stream.write(f"{subject},{page},{GOOD if verdict else BAD}\n")
