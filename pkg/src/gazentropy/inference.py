"""Correlation, one-way ANOVA and the stability sweeps over time, subjects and kernel width."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, TextIO

import numpy as np

from .attention_map import KernelConfig, PageVaeSummary, summarize_pages
from .errors import ComputationError, ValidationError
from .gaze_data import Dataset, RatingTable, aggregate_scores

log = logging.getLogger(__name__)

_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAXITER = 10_000


def pearson_r(xs, ys) -> float:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError(f"need two equal-length 1-d samples, got {x.shape} and {y.shape}")
    if x.size < 3:
        raise ValidationError(f"need at least 3 pairs, got {x.size}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise ComputationError("correlation is undefined when a variable has zero variance")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _CF_TINY else _CF_TINY)
    h = d
    for m in range(1, _CF_MAXITER + 1):
        m2 = 2 * m
        for aa in (
            m * (b - m) * x / ((qam + m2) * (a + m2)),
            -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2)),
        ):
            d = 1.0 + aa * d
            d = 1.0 / (d if abs(d) > _CF_TINY else _CF_TINY)
            c = 1.0 + aa / c
            if abs(c) < _CF_TINY:
                c = _CF_TINY
            step = d * c
            h *= step
        if abs(step - 1.0) < _CF_EPS:
            return h
    raise ComputationError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(x: float, a: float, b: float) -> float:
    """``I_x(a, b)`` for ``a, b > 0`` and ``0 <= x <= 1``."""
    if a <= 0 or b <= 0:
        raise ValidationError(f"beta parameters must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise ValidationError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def f_survival(f: float, df1: float, df2: float) -> float:
    """Upper tail ``P(F > f)`` of the F distribution."""
    if df1 <= 0 or df2 <= 0:
        raise ValidationError(f"degrees of freedom must be positive, got ({df1}, {df2})")
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return regularized_incomplete_beta(df2 / (df2 + df1 * f), df2 / 2.0, df1 / 2.0)


@dataclass(frozen=True)
class AnovaResult:
    ss_between: float
    ss_error: float
    ss_total: float
    df_between: int
    df_error: int
    ms_between: float
    ms_error: float
    f: float
    p: float

    @property
    def df(self) -> tuple[int, int]:
        return self.df_between, self.df_error

    def as_dict(self) -> dict:
        return {
            "ss_between": self.ss_between, "ss_error": self.ss_error, "ss_total": self.ss_total,
            "df_between": self.df_between, "df_error": self.df_error,
            "ms_between": self.ms_between, "ms_error": self.ms_error,
            "f": self.f, "p": self.p,
        }


def one_way_anova(*groups) -> AnovaResult:
    """Fixed-effects one-way ANOVA; two groups give the good-vs-bad design."""
    if len(groups) < 2:
        raise ValidationError("ANOVA needs at least two groups")
    arrays = [np.asarray(g, dtype=float).ravel() for g in groups]
    for k, g in enumerate(arrays):
        if g.size < 2:
            raise ValidationError(f"group {k} has {g.size} value(s), need at least 2")
    allv = np.concatenate(arrays)
    grand = allv.mean()
    ss_between = math.fsum(g.size * (g.mean() - grand) ** 2 for g in arrays)
    ss_error = math.fsum(float(((g - g.mean()) ** 2).sum()) for g in arrays)
    ss_total = float(((allv - grand) ** 2).sum())
    df_b = len(arrays) - 1
    df_e = allv.size - len(arrays)
    if not ss_error > 0:
        raise ComputationError("within-group variance is zero, F is undefined")
    ms_b = ss_between / df_b
    ms_e = ss_error / df_e
    f = ms_b / ms_e
    return AnovaResult(ss_between, ss_error, ss_total, df_b, df_e, ms_b, ms_e, f, f_survival(f, df_b, df_e))


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepCurve:
    axis: str  # "time_ms" | "sigma_px" | "subject_count"
    points: tuple[float, ...]
    r_vae: tuple[float, ...]
    r_rvae: tuple[float, ...]
    n_pages: tuple[int, ...]
    page_values: tuple[dict, ...] = field(default=())  # per point: page -> (vae, rvae)
    dropped: tuple[dict, ...] = field(default=())  # per point: page -> reason

    def write_csv(self, stream: TextIO) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["axis_value", "r_vae", "r_rvae", "n_pages"])
        for row in zip(self.points, self.r_vae, self.r_rvae, self.n_pages):
            w.writerow([_num(row[0]), _num(row[1]), _num(row[2]), row[3]])

    def write_page_curves_csv(self, stream: TextIO) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["axis_value", "page_id", "vae", "rvae"])
        for point, values in zip(self.points, self.page_values):
            for page in sorted(values):
                vae, rvae = values[page]
                w.writerow([_num(point), page, _num(vae), _num(rvae)])


def _num(v) -> str:
    return "nan" if isinstance(v, float) and math.isnan(v) else f"{v:.12g}"


def page_scores(dataset: Dataset, ratings: RatingTable | Mapping[str, float]) -> dict[str, float]:
    if isinstance(ratings, RatingTable):
        return {p: s.score for p, s in aggregate_scores(ratings, dataset.pages).items()}
    missing = sorted(set(dataset.pages) - set(ratings))
    if missing:
        raise ValidationError(f"no ratings for page(s): {', '.join(missing)}")
    return dict(ratings)


def correlate_with_scores(summaries: Mapping[str, PageVaeSummary], scores: Mapping[str, float]) -> tuple[float, float, int]:
    """(r_vae, r_rvae, n_pages); NaN where the correlation is undefined."""
    pages = sorted(p for p in summaries if p in scores)
    s = [scores[p] for p in pages]
    out = []
    for attr in ("vae", "rvae"):
        try:
            out.append(pearson_r([getattr(summaries[p], attr) for p in pages], s))
        except (ComputationError, ValidationError) as exc:
            log.warning("correlation of %s with scores undefined: %s", attr, exc)
            out.append(math.nan)
    return out[0], out[1], len(pages)


def _curve(axis, points, results) -> SweepCurve:
    return SweepCurve(
        axis,
        tuple(float(p) for p in points),
        tuple(r[0] for r in results),
        tuple(r[1] for r in results),
        tuple(r[2] for r in results),
        tuple(r[3] for r in results),
        tuple(r[4] for r in results),
    )


def _evaluate(dataset, scores, config, workers):
    summaries, failures = summarize_pages(dataset, config, workers=workers)
    r_vae, r_rvae, n = correlate_with_scores(summaries, scores)
    values = {p: (s.vae, s.rvae) for p, s in summaries.items()}
    return r_vae, r_rvae, n, values, failures


def sweep_time(dataset: Dataset, ratings, config: KernelConfig, t_grid: Sequence[float], workers: int = 1) -> SweepCurve:
    """Correlations of VAE and rVAE with scores using fixations accumulated up to each t."""
    t_grid = [float(t) for t in t_grid]
    if not t_grid:
        raise ValidationError("time grid is empty")
    if any(t <= 0 for t in t_grid) or any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise ValidationError("time grid must be positive and strictly increasing")
    scores = page_scores(dataset, ratings)
    results = [_evaluate(dataset.sliced(t), scores, config, workers) for t in t_grid]
    return _curve("time_ms", t_grid, results)


def sweep_sigma(
    dataset: Dataset, ratings, sigma_grid: Sequence[float], truncation_radius: float = 5.0, workers: int = 1
) -> SweepCurve:
    sigma_grid = [float(s) for s in sigma_grid]
    if not sigma_grid:
        raise ValidationError("sigma grid is empty")
    scores = page_scores(dataset, ratings)
    results = [
        _evaluate(dataset, scores, KernelConfig(s, truncation_radius), workers) for s in sigma_grid
    ]
    return _curve("sigma_px", sigma_grid, results)


def subset_rng(seed: int, size: int, repetition: int) -> np.random.Generator:
    """Independent stream per (size, repetition), so evaluation order never matters."""
    return np.random.default_rng(np.random.SeedSequence([seed, size, repetition]))


def sweep_subjects(
    dataset: Dataset,
    ratings,
    config: KernelConfig,
    sizes: Sequence[int],
    repetitions: int = 20,
    seed: int = 0,
    workers: int = 1,
) -> SweepCurve:
    """Mean correlation over random subject subsets of each size.

    Subsets are drawn without replacement. At the full size every subset
    is the whole panel, so it is evaluated once.
    """
    subjects = dataset.subjects
    if repetitions < 1:
        raise ValidationError(f"repetitions must be >= 1, got {repetitions}")
    for size in sizes:
        if not 2 <= size <= len(subjects):
            raise ValidationError(f"subset size {size} outside [2, {len(subjects)}]")
    scores = page_scores(dataset, ratings)
    results = []
    for size in sizes:
        if size == len(subjects):
            r_vae, r_rvae, n, _, failures = _evaluate(dataset, scores, config, workers)
            results.append((r_vae, r_rvae, n, {}, failures))
            continue
        rv, rr, ns, failures = [], [], [], {}
        for rep in range(repetitions):
            chosen = subset_rng(seed, size, rep).choice(len(subjects), size=size, replace=False)
            subset = dataset.restrict_subjects(subjects[i] for i in sorted(chosen))
            r_vae, r_rvae, n, _, fails = _evaluate(subset, scores, config, workers)
            rv.append(r_vae)
            rr.append(r_rvae)
            ns.append(n)
            for page, reason in fails.items():
                failures.setdefault(page, reason)
        results.append((_finite_mean(rv), _finite_mean(rr), min(ns), {}, failures))
    return _curve("subject_count", sizes, results)


def _finite_mean(values) -> float:
    vals = [v for v in values if math.isfinite(v)]
    return math.fsum(vals) / len(vals) if vals else math.nan
