"""Seeded synthetic fixation data and a brute-force entropy reference.

Each synthetic page is a mixture of Gaussian hotspots plus a uniform
"noise" component covering the whole screen. A fixation comes from the
noise component with probability ``noise_level``. Durations are log-normal.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .gaze_data import Dataset, Fixation, RatingTable, Recording, Screen

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass(frozen=True)
class Hotspot:
    x: float
    y: float
    spread: float
    weight: float = 1.0

    def __post_init__(self):
        if not self.spread > 0:
            raise ValidationError(f"hotspot spread must be positive, got {self.spread!r}")
        if not self.weight > 0:
            raise ValidationError(f"hotspot weight must be positive, got {self.weight!r}")


@dataclass(frozen=True)
class SyntheticPageSpec:
    page_id: str
    hotspots: tuple[Hotspot, ...] = ()
    noise_level: float = 0.0
    quality: str = "good"
    good_prob: float | None = None
    fixations_per_subject: int | None = None
    viewing_ms: float = 3000.0
    duration_median_ms: float = 250.0
    duration_sigma_log: float = 0.5
    saccade_ms: float = 30.0

    def __post_init__(self):
        object.__setattr__(self, "hotspots", tuple(self.hotspots))
        if not 0.0 <= self.noise_level <= 1.0:
            raise ValidationError(f"{self.page_id}: noise_level must lie in [0, 1], got {self.noise_level!r}")
        if not self.hotspots and self.noise_level < 1.0:
            raise ValidationError(f"{self.page_id}: no hotspots, so noise_level must be 1")
        if self.quality not in ("good", "bad"):
            raise ValidationError(f"{self.page_id}: quality must be 'good' or 'bad', got {self.quality!r}")
        if self.good_prob is not None and not 0.0 <= self.good_prob <= 1.0:
            raise ValidationError(f"{self.page_id}: good_prob must lie in [0, 1], got {self.good_prob!r}")
        if self.fixations_per_subject is not None and self.fixations_per_subject < 1:
            raise ValidationError(f"{self.page_id}: fixations_per_subject must be >= 1")
        if not (self.viewing_ms > 0 and self.duration_median_ms > 0 and self.duration_sigma_log >= 0):
            raise ValidationError(f"{self.page_id}: viewing and duration parameters must be positive")
        if self.saccade_ms < 0:
            raise ValidationError(f"{self.page_id}: saccade_ms must be non-negative")

    @property
    def rating_prob(self) -> float:
        if self.good_prob is not None:
            return self.good_prob
        return 0.8 if self.quality == "good" else 0.2


@dataclass(frozen=True)
class Scenario:
    pages: tuple[SyntheticPageSpec, ...]
    n_subjects: int = 30
    screen: Screen = field(default_factory=Screen)

    def __post_init__(self):
        object.__setattr__(self, "pages", tuple(self.pages))
        if self.n_subjects < 2:
            raise ValidationError(f"n_subjects must be >= 2, got {self.n_subjects}")
        if not self.pages:
            raise ValidationError("scenario has no pages")
        ids = [p.page_id for p in self.pages]
        if len(set(ids)) != len(ids):
            raise ValidationError("page ids must be unique")


def subject_ids(n: int) -> list[str]:
    width = len(str(n))
    return [f"s{i:0{width}d}" for i in range(1, n + 1)]


def _stream(seed: int, page_index: int, subject_index: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, page_index, subject_index, purpose]))


def _tenth(v: float) -> float:
    return math.floor(v * 10.0) / 10.0


def _simulate(spec: SyntheticPageSpec, screen: Screen, rng: np.random.Generator) -> tuple[Fixation, ...]:
    if spec.hotspots:
        w = np.array([h.weight for h in spec.hotspots])
        cum = np.cumsum(w / w.sum())
    fixations = []
    t = 0.0
    while t < spec.viewing_ms:
        if spec.fixations_per_subject is not None and len(fixations) >= spec.fixations_per_subject:
            break
        dur = max(1.0, float(round(rng.lognormal(math.log(spec.duration_median_ms), spec.duration_sigma_log))))
        dur = min(dur, spec.viewing_ms - t)
        u, a, b = rng.random(3)
        if u < spec.noise_level:
            x, y = a * screen.width, b * screen.height
        else:
            h = spec.hotspots[min(int(np.searchsorted(cum, a, side="right")), len(spec.hotspots) - 1)]
            x, y = rng.normal(h.x, h.spread), rng.normal(h.y, h.spread)
        fixations.append(Fixation(t, dur, _tenth(x), _tenth(y)))
        t += dur + spec.saccade_ms
    return tuple(fixations)


def generate_dataset(
    specs: Sequence[SyntheticPageSpec], n_subjects: int, screen: Screen = Screen(), seed: int = 0
) -> Dataset:
    """Fixations for every (subject, page); each pair draws from its own seeded stream."""
    scenario = Scenario(tuple(specs), n_subjects, screen)
    recordings = []
    for p, spec in enumerate(scenario.pages):
        for s, subject in enumerate(subject_ids(n_subjects)):
            recordings.append(Recording(subject, spec.page_id, _simulate(spec, screen, _stream(seed, p, s, 0))))
    return Dataset(screen.width, screen.height, tuple(recordings))


def generate_ratings(specs: Sequence[SyntheticPageSpec], n_subjects: int, seed: int = 0) -> RatingTable:
    """One binary verdict per (subject, page), "good" with the page's rating probability."""
    judgments = {}
    for p, spec in enumerate(specs):
        for s, subject in enumerate(subject_ids(n_subjects)):
            judgments[(subject, spec.page_id)] = bool(_stream(seed, p, s, 1).random() < spec.rating_prob)
    return RatingTable(judgments)


def generate(scenario: Scenario, seed: int = 0) -> tuple[Dataset, RatingTable]:
    return (
        generate_dataset(scenario.pages, scenario.n_subjects, scenario.screen, seed),
        generate_ratings(scenario.pages, scenario.n_subjects, seed),
    )


def oracle_full_grid_entropy(fixations: Sequence[Fixation], sigma: float, width: int, height: int) -> float:
    """Entropy of the untruncated kernel mixture, evaluated cell by cell on the whole grid.

    Deliberately slow: every fixation touches all ``width * height`` cells.
    """
    from .attention_map import shannon_entropy
    from .errors import ComputationError

    if len(fixations) == 0:
        raise ValidationError("cannot build an attention map from zero fixations")
    yy, xx = np.mgrid[0:height, 0:width].astype(float)
    grid = np.zeros((height, width))
    for f in fixations:
        grid += f.duration_ms * np.exp(-((xx - f.x_px) ** 2 + (yy - f.y_px) ** 2) / (2.0 * sigma * sigma))
    total = grid.sum()
    if not total > 0:
        raise ComputationError("all kernel mass falls outside the screen grid")
    return shannon_entropy(grid / total)


# ---------------------------------------------------------------------------
# scenario files

_PAGE_KEYS = {
    "id": "page_id",
    "noise": "noise_level",
    "quality": "quality",
    "good_prob": "good_prob",
    "fixations_per_subject": "fixations_per_subject",
    "viewing_ms": "viewing_ms",
    "duration_median_ms": "duration_median_ms",
    "duration_sigma_log": "duration_sigma_log",
    "saccade_ms": "saccade_ms",
}
_DEFAULTABLE = ("viewing_ms", "duration_median_ms", "duration_sigma_log", "saccade_ms", "fixations_per_subject")
_HOTSPOT_KEYS = ("x", "y", "spread", "weight")


def parse_scenario(text: str) -> Scenario:
    """Build a :class:`Scenario` from TOML text.

    Top-level keys: ``n_subjects``, ``screen`` ("WxH") and page defaults
    (``viewing_ms``, ``duration_median_ms``, ``duration_sigma_log``,
    ``saccade_ms``, ``fixations_per_subject``). Each ``[[pages]]`` table
    takes ``id``, ``noise``, ``quality``, optional ``good_prob`` and a
    ``hotspots`` array of ``{x, y, spread, weight}`` tables.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"scenario is not valid TOML: {exc}") from None
    unknown = set(doc) - {"n_subjects", "screen", "pages", *_DEFAULTABLE}
    if unknown:
        raise ValidationError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")
    n_subjects = doc.get("n_subjects", 30)
    if not isinstance(n_subjects, int):
        raise ValidationError(f"n_subjects must be an integer, got {n_subjects!r}")
    screen = Screen.parse(doc["screen"]) if "screen" in doc else Screen()
    defaults = {k: doc[k] for k in _DEFAULTABLE if k in doc}

    pages = []
    for k, page in enumerate(doc.get("pages", [])):
        where = f"pages[{k}]"
        bad = set(page) - set(_PAGE_KEYS) - {"hotspots"}
        if bad:
            raise ValidationError(f"{where}: unknown key(s): {', '.join(sorted(bad))}")
        if "id" not in page:
            raise ValidationError(f"{where}: missing 'id'")
        kwargs = {_PAGE_KEYS[key]: value for key, value in {**defaults, **page}.items() if key != "hotspots"}
        hotspots = []
        for j, h in enumerate(page.get("hotspots", [])):
            bad = set(h) - set(_HOTSPOT_KEYS)
            missing = {"x", "y", "spread"} - set(h)
            if bad or missing:
                raise ValidationError(f"{where}.hotspots[{j}]: bad keys {sorted(bad)}, missing {sorted(missing)}")
            hotspots.append(Hotspot(**{key: float(v) for key, v in h.items()}))
        try:
            pages.append(SyntheticPageSpec(hotspots=tuple(hotspots), **kwargs))
        except TypeError as exc:
            raise ValidationError(f"{where}: {exc}") from None
    return Scenario(tuple(pages), n_subjects, screen)


def _toml_value(v) -> str:
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v)


def scenario_to_toml(scenario: Scenario) -> str:
    lines = [f"n_subjects = {scenario.n_subjects}", f'screen = "{scenario.screen}"', ""]
    inverse = {v: k for k, v in _PAGE_KEYS.items()}
    for spec in scenario.pages:
        lines.append("[[pages]]")
        for attr, key in inverse.items():
            value = getattr(spec, attr)
            if value is not None:
                lines.append(f"{key} = {_toml_value(value)}")
        spots = ", ".join(
            "{ " + ", ".join(f"{k} = {_toml_value(getattr(h, k))}" for k in _HOTSPOT_KEYS) + " }"
            for h in spec.hotspots
        )
        lines.append(f"hotspots = [{spots}]")
        lines.append("")
    return "\n".join(lines)


def paper_like_scenario(
    n_subjects: int = 30,
    pages_per_level: int = 4,
    noise_levels: Sequence[float] = tuple(i / 10 for i in range(10)),
    screen: Screen = Screen(),
    layout_seed: int = 2024,
    viewing_ms: float = 3000.0,
) -> Scenario:
    """Forty pages over ten noise levels: the low-noise half "good", the rest "bad".

    Hotspot layouts (3 to 6 spots per page) are drawn from ``layout_seed``;
    the probability of a "good" verdict falls linearly from 0.9 at the
    lowest noise level to 0.1 at the highest.
    """
    rng = np.random.default_rng(layout_seed)
    lo, hi = min(noise_levels), max(noise_levels)
    mid = sorted(noise_levels)[len(noise_levels) // 2]
    pages = []
    for level in noise_levels:
        for k in range(pages_per_level):
            spots = tuple(
                Hotspot(
                    x=float(round(rng.uniform(0.1, 0.9) * screen.width)),
                    y=float(round(rng.uniform(0.1, 0.9) * screen.height)),
                    spread=float(round(rng.uniform(25, 60))),
                    weight=float(round(rng.uniform(0.5, 2.0), 2)),
                )
                for _ in range(int(rng.integers(3, 7)))
            )
            frac = 0.0 if hi == lo else (level - lo) / (hi - lo)
            pages.append(
                SyntheticPageSpec(
                    page_id=f"n{round(level * 100):03d}_{k + 1}",
                    hotspots=spots,
                    noise_level=float(level),
                    quality="good" if level < mid else "bad",
                    good_prob=round(0.9 - 0.8 * frac, 6),
                    viewing_ms=viewing_ms,
                )
            )
    return Scenario(tuple(pages), n_subjects, screen)
