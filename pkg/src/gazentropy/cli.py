"""Command-line interface: ``gazentropy {report,heatmap,sweep,synth,aoi}``.

Exit codes: 0 success, 1 usage error, 2 invalid input, 3 computation error.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import logging
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .aoi import aoi_sequence, cluster_aoi, write_sequences_tsv
from .attention_map import KernelConfig, build_attention_map, to_pgm
from .descriptive import DescriptiveIndices, write_indices_csv
from .errors import ComputationError, GazeError, ParseError, ValidationError
from .gaze_data import Screen, parse_fixation_table, parse_ratings, serialize_fixation_table, serialize_ratings
from .inference import sweep_sigma, sweep_subjects, sweep_time
from .report import ReportConfig, build_report, report_json
from .synth import generate, parse_scenario

log = logging.getLogger("gazentropy")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_COMPUTE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part:
                lo, hi = part.split("-")
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected integers or ranges like 2-29, got {part!r}") from None
    return out


def _screen(text: str) -> Screen:
    try:
        return Screen.parse(text)
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_kernel_opts(p):
    p.add_argument("--sigma", type=float, default=30.0, help="Gaussian kernel sigma in pixels (default 30)")
    p.add_argument("--truncation", type=float, default=5.0, help="kernel cutoff in multiples of sigma (default 5)")
    p.add_argument("--screen", type=_screen, default=Screen(), help="screen size WxH (default 1280x800)")


def _add_common_opts(p):
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes (output is identical)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gazentropy", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("report", help="per-page metrics, correlations and ANOVA as JSON")
    p.add_argument("fixations", type=Path)
    p.add_argument("ratings", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--indices-csv", type=Path, help="also write the descriptive indices per page")
    _add_kernel_opts(p)
    p.add_argument("--aoi-radius", type=float, default=80.0)
    p.add_argument("--prior", choices=("source", "occurrence", "first"), default="source")
    p.add_argument("--slice-ms", type=float, help="only use fixations accumulated up to this time")
    p.add_argument("--seed", type=int, default=0)
    _add_common_opts(p)

    p = sub.add_parser("heatmap", help="attention map of one page as an 8-bit PGM")
    p.add_argument("fixations", type=Path)
    p.add_argument("--page", required=True)
    p.add_argument("--subject", action="append", help="restrict to these subjects (repeatable); default pools all")
    p.add_argument("-o", "--output", type=Path, required=True)
    _add_kernel_opts(p)
    p.add_argument("--slice-ms", type=float)
    _add_common_opts(p)

    p = sub.add_parser("sweep", help="correlation curves over time, sigma or subject count as CSV")
    p.add_argument("kind", choices=("time", "sigma", "subjects"))
    p.add_argument("fixations", type=Path)
    p.add_argument("ratings", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--grid", type=_float_list, help="time points (ms) or sigma values (px)")
    p.add_argument("--sizes", type=_int_list, help="subject subset sizes, e.g. 2-29")
    p.add_argument("--repetitions", type=int, default=20)
    p.add_argument("--page-curves", type=Path, help="time sweep: also write per-page VAE/rVAE curves")
    _add_kernel_opts(p)
    p.add_argument("--seed", type=int, default=0)
    _add_common_opts(p)

    p = sub.add_parser("synth", help="generate synthetic fixations and ratings from a TOML scenario")
    p.add_argument("spec", type=Path)
    p.add_argument("-o", "--output-dir", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_common_opts(p)

    p = sub.add_parser("aoi", help="AOI table and per-subject AOI sequences of one page as TSV")
    p.add_argument("fixations", type=Path)
    p.add_argument("--page", required=True)
    p.add_argument("-o", "--output-dir", type=Path, required=True)
    p.add_argument("--aoi-radius", type=float, default=80.0)
    p.add_argument("--screen", type=_screen, default=Screen())
    _add_common_opts(p)
    return parser


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _write_atomic(path: Path, data: bytes | str) -> None:
    """Write via a sibling temp file so a failed run never leaves a partial output."""
    payload = data.encode("utf-8") if isinstance(data, str) else data
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load(args, with_ratings=True):
    fix_text = _read_text(args.fixations)
    dataset = parse_fixation_table(io.StringIO(fix_text), args.screen)
    if not with_ratings:
        return dataset, None, {"fixations_sha256": _digest(fix_text)}
    rat_text = _read_text(args.ratings)
    ratings = parse_ratings(io.StringIO(rat_text))
    return dataset, ratings, {"fixations_sha256": _digest(fix_text), "ratings_sha256": _digest(rat_text)}


def cmd_report(args) -> None:
    dataset, ratings, digests = _load(args)
    config = ReportConfig(
        sigma_px=args.sigma,
        truncation_radius=args.truncation,
        aoi_radius_px=args.aoi_radius,
        prior=args.prior,
        slice_ms=args.slice_ms,
        seed=args.seed,
        workers=args.workers,
    )
    report = build_report(dataset, ratings, config, inputs=digests)
    outputs = [(args.output, report_json(report))]
    if args.indices_csv:
        buf = io.StringIO()
        write_indices_csv(
            {e["page_id"]: DescriptiveIndices(**e["indices"]) for e in report["pages"] if e["indices"]}, buf
        )
        outputs.append((args.indices_csv, buf.getvalue()))
    for path, text in outputs:
        _write_atomic(path, text)


def cmd_heatmap(args) -> None:
    dataset, _, _ = _load(args, with_ratings=False)
    if args.slice_ms is not None:
        dataset = dataset.sliced(args.slice_ms)
    recs = dataset.page_recordings(args.page)
    if not recs:
        raise ValidationError(f"unknown page {args.page!r}")
    if args.subject:
        known = {r.subject_id for r in recs}
        unknown = sorted(set(args.subject) - known)
        if unknown:
            raise ValidationError(f"page {args.page!r} has no recording for subject(s): {', '.join(unknown)}")
        recs = [r for r in recs if r.subject_id in set(args.subject)]
    fixations = [f for r in recs for f in r.fixations]
    amap = build_attention_map(fixations, KernelConfig(args.sigma, args.truncation), dataset.screen_w, dataset.screen_h)
    _write_atomic(args.output, to_pgm(amap))


def cmd_sweep(args) -> None:
    if args.page_curves and args.kind != "time":
        raise UsageError("--page-curves only applies to the time sweep")
    dataset, ratings, _ = _load(args)
    kernel = KernelConfig(args.sigma, args.truncation)
    if args.kind == "time":
        grid = args.grid or [float(t) for t in range(250, 3001, 250)]
        curve = sweep_time(dataset, ratings, kernel, grid, workers=args.workers)
    elif args.kind == "sigma":
        grid = args.grid or [float(s) for s in range(10, 121, 10)]
        curve = sweep_sigma(dataset, ratings, grid, args.truncation, workers=args.workers)
    else:
        sizes = args.sizes or list(range(2, len(dataset.subjects) + 1))
        curve = sweep_subjects(dataset, ratings, kernel, sizes, args.repetitions, args.seed, workers=args.workers)
    buf = io.StringIO()
    curve.write_csv(buf)
    _write_atomic(args.output, buf.getvalue())
    if args.page_curves:
        buf = io.StringIO()
        curve.write_page_curves_csv(buf)
        _write_atomic(args.page_curves, buf.getvalue())


def cmd_synth(args) -> None:
    scenario = parse_scenario(_read_text(args.spec))
    dataset, ratings = generate(scenario, args.seed)
    fx, rt = io.StringIO(), io.StringIO()
    serialize_fixation_table(dataset, fx)
    serialize_ratings(ratings, rt)
    _write_atomic(args.output_dir / "fixations.tsv", fx.getvalue())
    _write_atomic(args.output_dir / "ratings.csv", rt.getvalue())


def cmd_aoi(args) -> None:
    dataset, _, _ = _load(args, with_ratings=False)
    recs = dataset.page_recordings(args.page)
    if not recs:
        raise ValidationError(f"unknown page {args.page!r}")
    aois = cluster_aoi([f for r in recs for f in r.fixations], args.aoi_radius)
    a, s = io.StringIO(), io.StringIO()
    aois.write_tsv(a)
    write_sequences_tsv((aoi_sequence(r, aois) for r in recs), s)
    _write_atomic(args.output_dir / f"{args.page}_aois.tsv", a.getvalue())
    _write_atomic(args.output_dir / f"{args.page}_sequences.tsv", s.getvalue())


COMMANDS = {"report": cmd_report, "heatmap": cmd_heatmap, "sweep": cmd_sweep, "synth": cmd_synth, "aoi": cmd_aoi}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if args.workers < 1:
        print("gazentropy: --workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"gazentropy: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ValidationError) as exc:
        print(f"gazentropy: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ComputationError, GazeError) as exc:
        print(f"gazentropy: computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
