"""End-to-end per-page metrics and the JSON metrics report."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .aoi import DEFAULT_RADIUS_PX, aoi_sequence, cluster_aoi, estimate_transition_model, markov_entropy
from .attention_map import KernelConfig, summarize_pages
from .descriptive import INDEX_NAMES, descriptive_indices
from .errors import ComputationError, ValidationError
from .gaze_data import BAD, GOOD, Dataset, RatingTable, aggregate_scores
from .inference import one_way_anova, pearson_r

CORRELATION_VARIABLES = ("score", "fix_num", "vae", "bvae", "rvae")


@dataclass(frozen=True)
class ReportConfig:
    sigma_px: float = 30.0
    truncation_radius: float = 5.0
    aoi_radius_px: float = DEFAULT_RADIUS_PX
    prior: str = "source"
    slice_ms: float | None = None
    seed: int = 0
    workers: int = 1

    @property
    def kernel(self) -> KernelConfig:
        return KernelConfig(self.sigma_px, self.truncation_radius)

    def echo(self) -> dict:
        # worker count never changes the output, so it is not echoed
        out = asdict(self)
        del out["workers"]
        return out


def _no_entropy(n_aois):
    return {"n_aois": n_aois, "h_bits": None, "h_max_bits": None, "h_relative": None}


def page_transition_metrics(recordings, radius_px: float, prior: str = "source"):
    """AOI clustering plus Markov entropy for one page.

    Returns ``(metrics, aoi_set)``, or None when the page has no fixations.
    Entropy fields are None when fewer than two AOIs or no transitions exist.
    """
    pooled = [f for r in recordings for f in r.fixations]
    if not pooled:
        return None
    aois = cluster_aoi(pooled, radius_px)
    if len(aois) < 2:
        return _no_entropy(len(aois)), aois
    seqs = [aoi_sequence(r, aois) for r in recordings]
    try:
        model = estimate_transition_model(seqs, len(aois), prior=prior)
    except ComputationError:
        return _no_entropy(len(aois)), aois
    h = markov_entropy(model)
    return {"n_aois": len(aois), "h_bits": h.h_bits, "h_max_bits": h.h_max_bits, "h_relative": h.h_relative}, aois


def _safe_pearson(xs, ys):
    try:
        return pearson_r(xs, ys)
    except (ComputationError, ValidationError):
        return None


def _safe_anova(good, bad):
    try:
        return one_way_anova(good, bad)
    except (ComputationError, ValidationError):
        return None


def build_report(dataset: Dataset, ratings: RatingTable, config: ReportConfig = ReportConfig(), inputs: dict | None = None) -> dict:
    scores = aggregate_scores(ratings, dataset.pages)
    if config.slice_ms is not None:
        dataset = dataset.sliced(config.slice_ms)
    summaries, failures = summarize_pages(dataset, config.kernel, workers=config.workers)

    pages = []
    for page in dataset.pages:
        recs = dataset.page_recordings(page)
        entry = {
            "page_id": page,
            "score": scores[page].score,
            "class": scores[page].label,
            "n_judgments": scores[page].n_judgments,
        }
        s = summaries.get(page)
        entry.update(
            vae=s.vae if s else None,
            bvae=s.bvae if s else None,
            rvae=s.rvae if s else None,
            n_subjects=s.n_subjects if s else 0,
            excluded_subjects=list(s.excluded) if s else [],
            error=failures.get(page),
        )
        markov = page_transition_metrics(recs, config.aoi_radius_px, config.prior)
        if markov is None:
            entry["markov"] = None
            entry["indices"] = None
        else:
            entry["markov"], aois = markov
            entry["indices"] = descriptive_indices(recs, aois).as_dict()
        pages.append(entry)

    return {
        "config": {**config.echo(), "screen": str(dataset.screen), "inputs": inputs or {}},
        "pages": pages,
        "off_screen_fixations": dataset.off_screen_count,
        "correlations": _correlation_block(pages),
        "metrics": _metric_table(pages),
    }


def _metric_values(entry: dict) -> dict:
    vals = {"vae": entry["vae"], "bvae": entry["bvae"], "rvae": entry["rvae"]}
    idx = entry["indices"] or {}
    for k in INDEX_NAMES:
        vals[k] = idx.get(k)
    vals["markov_h_relative"] = entry["markov"]["h_relative"] if entry["markov"] else None
    return vals


def _correlation_block(pages: list[dict]) -> dict:
    rows = []
    for e in pages:
        vals = {"score": e["score"], **_metric_values(e)}
        if all(vals[v] is not None for v in CORRELATION_VARIABLES):
            rows.append(vals)
    return {
        a: {b: _safe_pearson([r[a] for r in rows], [r[b] for r in rows]) for b in CORRELATION_VARIABLES}
        for a in CORRELATION_VARIABLES
    }


def _metric_table(pages: list[dict]) -> dict:
    """Per metric: correlation with score and good-vs-bad ANOVA (score 0.5 pages left out)."""
    names = ["vae", "bvae", "rvae", *INDEX_NAMES, "markov_h_relative"]
    table = {}
    for name in names:
        pairs = [(e["score"], e["class"], _metric_values(e)[name]) for e in pages]
        pairs = [p for p in pairs if p[2] is not None]
        good = [v for _, c, v in pairs if c == GOOD]
        bad = [v for _, c, v in pairs if c == BAD]
        anova = _safe_anova(good, bad)
        table[name] = {
            "r": _safe_pearson([v for _, _, v in pairs], [s for s, _, _ in pairs]),
            "n_pages": len(pairs),
            "anova": anova.as_dict() if anova else None,
        }
    return table


def _round(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}") if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def report_json(report: dict) -> str:
    """Deterministic serialization: sorted keys, floats at 12 significant digits."""
    return json.dumps(_round(report), sort_keys=True, indent=2, allow_nan=False) + "\n"
