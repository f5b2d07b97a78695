"""Duration-weighted Gaussian attention maps and their entropies.

A fixation at ``(x0, y0)`` lasting ``d`` ms contributes
``d * exp(-((x - x0)**2 + (y - y0)**2) / (2 * sigma**2))`` to every pixel
cell within ``truncation_radius * sigma`` of it (a square box, clipped to
the screen). The accumulated grid is normalized to a probability map and
its base-2 Shannon entropy is the visual attention entropy (VAE) of the
fixations.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ComputationError, ValidationError
from .gaze_data import Fixation, Recording

log = logging.getLogger(__name__)

SUM_TOLERANCE = 1e-9
_BLOCK = 256  # fixations per matrix product


@dataclass(frozen=True)
class KernelConfig:
    sigma_px: float = 30.0
    truncation_radius: float = 5.0

    def __post_init__(self):
        if not self.sigma_px > 0:
            raise ValidationError(f"sigma_px must be positive, got {self.sigma_px!r}")
        if not self.truncation_radius >= 3:
            raise ValidationError(f"truncation_radius must be >= 3, got {self.truncation_radius!r}")

    @property
    def reach_px(self) -> float:
        return self.truncation_radius * self.sigma_px


@dataclass(frozen=True, eq=False)
class AttentionMap:
    """Probability grid indexed ``cells[y, x]``; row 0 is the top of the screen."""

    cells: np.ndarray

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    def argmax(self) -> tuple[int, int]:
        y, x = np.unravel_index(int(np.argmax(self.cells)), self.cells.shape)
        return int(x), int(y)


def shannon_entropy(probabilities) -> float:
    """Base-2 entropy ``-sum(p * log2(p))`` with ``0 * log2(0) = 0``."""
    p = np.asarray(probabilities, dtype=float).ravel()
    if p.size == 0:
        raise ValidationError("entropy of an empty distribution is undefined")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValidationError("probabilities must be finite and non-negative")
    total = p.sum()
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise ValidationError(f"probabilities sum to {total!r}, not 1")
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz))) + 0.0


def _axis_span(center: float, reach: float, size: int) -> tuple[int, int]:
    if not math.isfinite(reach):
        return 0, size - 1
    return max(0, math.ceil(center - reach)), min(size - 1, math.floor(center + reach))


def accumulate_mass(fixations: Iterable[Fixation], config: KernelConfig, width: int, height: int) -> np.ndarray:
    """Unnormalized kernel mass on the ``height x width`` grid.

    The kernel is separable, so each block of fixations is summed as one
    matrix product of per-fixation row and column profiles (zero outside the
    truncation box). Blocks are taken in input order with a fixed size, so
    the result is bit-reproducible for a given fixation order.
    """
    grid = np.zeros((height, width))
    fixations = list(fixations)
    reach = config.reach_px
    two_var = 2.0 * config.sigma_px**2
    for b in range(0, len(fixations), _BLOCK):
        block = fixations[b : b + _BLOCK]
        rows = np.zeros((len(block), height))
        cols = np.zeros((len(block), width))
        for k, f in enumerate(block):
            x0, x1 = _axis_span(f.x_px, reach, width)
            y0, y1 = _axis_span(f.y_px, reach, height)
            if x0 > x1 or y0 > y1:
                continue
            cols[k, x0 : x1 + 1] = np.exp(-((np.arange(x0, x1 + 1) - f.x_px) ** 2) / two_var)
            rows[k, y0 : y1 + 1] = f.duration_ms * np.exp(-((np.arange(y0, y1 + 1) - f.y_px) ** 2) / two_var)
        grid += rows.T @ cols
    return grid


def build_attention_map(
    fixations: Sequence[Fixation], config: KernelConfig, width: int, height: int
) -> AttentionMap:
    if len(fixations) == 0:
        raise ValidationError("cannot build an attention map from zero fixations")
    grid = accumulate_mass(fixations, config, width, height)
    total = grid.sum()
    if not total > 0:
        raise ComputationError("all kernel mass falls outside the screen grid")
    grid /= total
    grid.setflags(write=False)
    return AttentionMap(grid)


def vae(attention_map: AttentionMap) -> float:
    return shannon_entropy(attention_map.cells)


def max_entropy(width: int, height: int) -> float:
    return math.log2(width * height)


@dataclass(frozen=True)
class PageVaeSummary:
    page_id: str
    vae: float
    individual_vaes: dict[str, float]
    bvae: float
    rvae: float
    excluded: tuple[str, ...] = field(default=())

    @property
    def n_subjects(self) -> int:
        return len(self.individual_vaes)


def page_vae_summary(
    recordings: Sequence[Recording], config: KernelConfig, width: int, height: int
) -> PageVaeSummary:
    """Pooled VAE, base VAE (mean per-subject VAE) and their ratio for one page.

    Subjects whose fixations yield no on-grid mass are skipped with a
    warning. At least two usable subjects are required.
    """
    pages = {r.page_id for r in recordings}
    if len(pages) != 1:
        raise ValidationError(f"recordings must belong to exactly one page, got {sorted(pages)}")
    (page_id,) = pages

    individual: dict[str, float] = {}
    used: list[Recording] = []
    excluded = []
    for rec in sorted(recordings, key=lambda r: r.subject_id):
        try:
            individual[rec.subject_id] = vae(build_attention_map(rec.fixations, config, width, height))
        except (ValidationError, ComputationError):
            log.warning("page %s: subject %s has no usable fixations, excluded", page_id, rec.subject_id)
            excluded.append(rec.subject_id)
            continue
        used.append(rec)
    if len(used) < 2:
        raise ComputationError(f"page {page_id}: {len(used)} usable subject(s), need at least 2")

    pooled = [f for rec in used for f in rec.fixations]
    page_vae = vae(build_attention_map(pooled, config, width, height))
    bvae = math.fsum(individual.values()) / len(individual)
    if not bvae > 0:
        raise ComputationError(f"page {page_id}: base VAE is zero, relative VAE undefined")
    return PageVaeSummary(page_id, page_vae, individual, bvae, page_vae / bvae, tuple(excluded))


def _summary_task(args):
    page_id, recordings, config, width, height = args
    try:
        return page_id, page_vae_summary(recordings, config, width, height)
    except ComputationError as exc:
        return page_id, exc


def summarize_pages(dataset, config: KernelConfig, workers: int = 1) -> tuple[dict, dict]:
    """Per-page summaries for a whole dataset.

    Returns ``(summaries, failures)`` keyed by page id; a page lands in
    ``failures`` (with its error message) when it has fewer than two usable
    subjects. Results do not depend on ``workers``.
    """
    tasks = [
        (page, dataset.page_recordings(page), config, dataset.screen_w, dataset.screen_h)
        for page in dataset.pages
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_summary_task, tasks))
    else:
        results = [_summary_task(t) for t in tasks]
    summaries, failures = {}, {}
    for page, res in results:
        if isinstance(res, ComputationError):
            failures[page] = str(res)
        else:
            summaries[page] = res
    return summaries, failures


def to_pgm(attention_map: AttentionMap) -> bytes:
    """Binary 8-bit PGM, gray level ``floor(255 * p / max(p))``."""
    cells = attention_map.cells
    peak = cells.max()
    if peak > 0:
        gray = np.floor(255.0 * (cells / peak))
    else:
        gray = np.zeros_like(cells)
    header = f"P5\n{attention_map.width} {attention_map.height}\n255\n".encode("ascii")
    return header + np.clip(gray, 0, 255).astype(np.uint8).tobytes(order="C")


def read_pgm(data: bytes) -> np.ndarray:
    """Parse a binary P5 file with maxval 255 into a ``(height, width)`` uint8 array."""
    parts = data.split(b"\n", 3)
    if len(parts) != 4 or parts[0] != b"P5" or parts[2] != b"255":
        raise ValidationError("not an 8-bit binary PGM")
    width, height = map(int, parts[1].split())
    pixels = np.frombuffer(parts[3], dtype=np.uint8)
    if pixels.size != width * height:
        raise ValidationError(f"PGM payload has {pixels.size} bytes, expected {width * height}")
    return pixels.reshape(height, width)
