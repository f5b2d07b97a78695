import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from gazentropy.attention_map import read_pgm
from gazentropy.cli import main
from gazentropy.descriptive import INDEX_NAMES

SCENARIO = """
n_subjects = 6
screen = "640x400"
viewing_ms = 1500
{pages}
"""
PAGE = """
[[pages]]
id = "{id}"
noise = {noise}
quality = "{quality}"
good_prob = {prob}
hotspots = [{{ x = 160, y = 100, spread = 20 }}, {{ x = 480, y = 300, spread = 25, weight = 1.5 }}]
"""


def scenario_text(n_pages=6):
    pages = "".join(
        PAGE.format(id=f"p{k}", noise=round(k / n_pages, 3), quality="good" if k < n_pages / 2 else "bad", prob=round(0.9 - 0.8 * k / (n_pages - 1), 3))
        for k in range(n_pages)
    )
    return SCENARIO.format(pages=pages)


@pytest.fixture(scope="module")
def inputs(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    spec = root / "scenario.toml"
    spec.write_text(scenario_text())
    assert main(["synth", str(spec), "-o", str(root / "data"), "--seed", "5"]) == 0
    return root / "data" / "fixations.tsv", root / "data" / "ratings.csv"


def run(*args):
    return main([str(a) for a in args])


def test_synth_output_shape(inputs):
    fix, rat = inputs
    rows = list(csv.reader(fix.open(), delimiter="\t"))
    assert rows[0] == ["subject_id", "page_id", "start_ms", "duration_ms", "x", "y"]
    assert {(r[0], r[1]) for r in rows[1:]} == {(f"s{i}", f"p{k}") for i in range(1, 7) for k in range(6)}
    ratings = list(csv.reader(rat.open()))
    assert ratings[0] == ["subject_id", "page_id", "verdict"] and len(ratings) == 1 + 36


def test_synth_paper_like_files(tmp_path):
    spec = "scenarios/paper_like.toml"
    assert run("synth", spec, "-o", tmp_path / "a", "--seed", "1") == 0
    assert run("synth", spec, "-o", tmp_path / "b", "--seed", "2") == 0
    rows = list(csv.reader((tmp_path / "a" / "fixations.tsv").open(), delimiter="\t"))[1:]
    assert len({r[1] for r in rows}) == 40 and len({r[0] for r in rows}) == 30
    assert len({(r[0], r[1]) for r in rows}) == 1200
    assert len((tmp_path / "a" / "ratings.csv").read_text().splitlines()) == 1201
    a, b = (tmp_path / d / "fixations.tsv" for d in "ab")
    assert a.read_bytes() != b.read_bytes()
    assert a.read_text().splitlines()[0] == b.read_text().splitlines()[0]


def test_synth_zero_subjects(tmp_path, capsys):
    spec = tmp_path / "bad.toml"
    spec.write_text("n_subjects = 0\n[[pages]]\nid = 'a'\nnoise = 1.0\n")
    assert run("synth", spec, "-o", tmp_path / "out") == 2
    assert "n_subjects" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_two_page_report_shape(tmp_path):
    spec = tmp_path / "two.toml"
    spec.write_text(scenario_text(2))
    assert run("synth", spec, "-o", tmp_path, "--seed", "1") == 0
    out = tmp_path / "report.json"
    assert run("report", tmp_path / "fixations.tsv", tmp_path / "ratings.csv", "-o", out, "--screen", "640x400") == 0
    report = json.loads(out.read_text())
    assert [p["page_id"] for p in report["pages"]] == ["p0", "p1"]
    block = report["correlations"]
    names = ["score", "fix_num", "vae", "bvae", "rvae"]
    assert sorted(block) == sorted(names) and all(sorted(row) == sorted(names) for row in block.values())
    assert report["config"]["sigma_px"] == 30 and report["config"]["screen"] == "640x400"


def test_report_contents_and_determinism(inputs, tmp_path):
    fix, rat = inputs
    a, b, c = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "c.json"
    assert run("report", fix, rat, "-o", a) == 0
    assert run("report", fix, rat, "-o", b) == 0
    assert run("report", fix, rat, "-o", c, "--workers", "2") == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()
    text = a.read_text()
    assert "NaN" not in text and "Infinity" not in text
    report = json.loads(text)
    assert list(report) == sorted(report)
    for page in report["pages"]:
        assert page["rvae"] == pytest.approx(page["vae"] / page["bvae"], abs=1e-9)
        assert page["n_subjects"] == 6
    rvae = report["metrics"]["rvae"]
    assert rvae["n_pages"] == 6 and rvae["anova"]["df_between"] == 1
    assert report["correlations"]["score"]["score"] == pytest.approx(1.0)


def test_report_indices_csv(inputs, tmp_path):
    fix, rat = inputs
    out = tmp_path / "indices.csv"
    assert run("report", fix, rat, "-o", tmp_path / "r.json", "--indices-csv", out) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0][:3] == ["page_id", "number of fixations", INDEX_NAMES["dur_mean"]]
    assert [r[0] for r in rows[1:]] == [f"p{k}" for k in range(6)]


def test_missing_ratings_page(inputs, tmp_path, capsys):
    fix, rat = inputs
    partial = tmp_path / "partial.csv"
    partial.write_text("".join(line for line in rat.open() if ",p3," not in line))
    out = tmp_path / "report.json"
    assert run("report", fix, partial, "-o", out) == 2
    assert "p3" in capsys.readouterr().err
    assert not out.exists()
    assert list(tmp_path.iterdir()) == [partial]


def test_missing_file_is_input_error(tmp_path):
    assert run("report", tmp_path / "nope.tsv", tmp_path / "nope.csv", "-o", tmp_path / "r.json") == 2


def test_malformed_fixations(tmp_path, capsys):
    fix = tmp_path / "f.tsv"
    fix.write_text("subject_id\tpage_id\tstart_ms\tduration_ms\tx\ty\ns1\tp1\t0\tlong\t1\t1\n")
    assert run("heatmap", fix, "--page", "p1", "-o", tmp_path / "h.pgm") == 2
    assert "line 2" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["report", "only-one-file"],
        ["heatmap", "f.tsv", "-o", "x.pgm"],
        ["report", "a", "b", "-o", "r.json", "--sigma", "wide"],
        ["report", "a", "b", "-o", "r.json", "--workers", "0"],
        ["sweep", "sigma", "a", "b", "-o", "s.csv", "--page-curves", "pc.csv"],
    ],
)
def test_usage_errors(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for name in ("a", "b"):
        (tmp_path / name).write_text("")
    assert main(argv) == 1
    assert sorted(p.name for p in tmp_path.iterdir()) == ["a", "b"]


def test_computation_error_exit_code(tmp_path):
    fix = tmp_path / "f.tsv"
    fix.write_text("subject_id\tpage_id\tstart_ms\tduration_ms\tx\ty\ns1\tp1\t0\t100\t-900\t-900\n")
    assert run("heatmap", fix, "--page", "p1", "-o", tmp_path / "h.pgm") == 3
    assert not (tmp_path / "h.pgm").exists()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "gazentropy.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "gazentropy" in proc.stdout


# -- heatmap ---------------------------------------------------------------------


def test_heatmap_peak_at_single_fixation(tmp_path):
    fix = tmp_path / "f.tsv"
    fix.write_text("subject_id\tpage_id\tstart_ms\tduration_ms\tx\ty\ns1\tp1\t0\t300\t321\t123\n")
    out = tmp_path / "h.pgm"
    assert run("heatmap", fix, "--page", "p1", "-o", out) == 0
    pixels = read_pgm(out.read_bytes())
    assert pixels.shape == (800, 1280)
    y, x = np.unravel_index(int(np.argmax(pixels)), pixels.shape)
    assert (x, y) == (321, 123) and pixels[y, x] == 255


def test_heatmap_subject_filter(inputs, tmp_path):
    fix, _ = inputs
    pooled, single, again = tmp_path / "all.pgm", tmp_path / "one.pgm", tmp_path / "again.pgm"
    assert run("heatmap", fix, "--page", "p2", "-o", pooled, "--screen", "640x400") == 0
    assert run("heatmap", fix, "--page", "p2", "--subject", "s1", "-o", single) == 0
    assert run("heatmap", fix, "--page", "p2", "-o", again, "--screen", "640x400", "--workers", "3") == 0
    assert pooled.read_bytes() != single.read_bytes()
    assert pooled.read_bytes() == again.read_bytes()
    # the single-subject map keeps the default screen
    assert single.read_bytes().startswith(b"P5\n1280 800\n255\n")
    assert pooled.read_bytes().startswith(b"P5\n640 400\n255\n")


@pytest.mark.parametrize("extra", [["--page", "nope"], ["--page", "p1", "--subject", "s99"]])
def test_heatmap_unknown_targets(inputs, tmp_path, extra, capsys):
    fix, _ = inputs
    assert run("heatmap", fix, *extra, "-o", tmp_path / "h.pgm") == 2
    assert ("nope" if "nope" in extra else "s99") in capsys.readouterr().err


# -- sweeps ----------------------------------------------------------------------


def read_curve(path):
    return list(csv.DictReader(path.open()))


def test_time_sweep_at_end_matches_report(inputs, tmp_path):
    fix, rat = inputs
    report = tmp_path / "r.json"
    curve = tmp_path / "t.csv"
    pages = tmp_path / "pages.csv"
    assert run("report", fix, rat, "-o", report) == 0
    assert run("sweep", "time", fix, rat, "-o", curve, "--grid", "3000", "--page-curves", pages) == 0
    (row,) = read_curve(curve)
    corr = json.loads(report.read_text())["correlations"]["score"]
    assert float(row["r_vae"]) == pytest.approx(corr["vae"], abs=1e-11)
    assert float(row["r_rvae"]) == pytest.approx(corr["rvae"], abs=1e-11)
    assert len(read_curve(pages)) == 6


def test_subject_sweep_reproducible(inputs, tmp_path):
    fix, rat = inputs
    outs = [tmp_path / f"{k}.csv" for k in range(3)]
    assert run("sweep", "subjects", fix, rat, "-o", outs[0], "--sizes", "2-3,6", "--repetitions", "2", "--seed", "9") == 0
    assert run("sweep", "subjects", fix, rat, "-o", outs[1], "--sizes", "2-3,6", "--repetitions", "2", "--seed", "9", "--workers", "2") == 0
    assert run("sweep", "subjects", fix, rat, "-o", outs[2], "--sizes", "2-3,6", "--repetitions", "2", "--seed", "10") == 0
    assert outs[0].read_bytes() == outs[1].read_bytes()
    assert outs[0].read_bytes() != outs[2].read_bytes()
    assert [r["axis_value"] for r in read_curve(outs[0])] == ["2", "3", "6"]


def test_subject_sweep_size_too_large(inputs, tmp_path):
    fix, rat = inputs
    assert run("sweep", "subjects", fix, rat, "-o", tmp_path / "s.csv", "--sizes", "7") == 2


def test_sigma_sweep(inputs, tmp_path):
    fix, rat = inputs
    out = tmp_path / "s.csv"
    assert run("sweep", "sigma", fix, rat, "-o", out, "--grid", "20,40,40") == 0
    rows = read_curve(out)
    assert [r["axis_value"] for r in rows] == ["20", "40", "40"]
    assert rows[1] == {**rows[2]}
    assert all(-1 <= float(r["r_rvae"]) <= 1 for r in rows if not math.isnan(float(r["r_rvae"])))


# -- aoi -------------------------------------------------------------------------


def test_aoi_export(inputs, tmp_path):
    fix, _ = inputs
    assert run("aoi", fix, "--page", "p0", "-o", tmp_path) == 0
    aois = list(csv.reader((tmp_path / "p0_aois.tsv").open(), delimiter="\t"))
    seqs = list(csv.reader((tmp_path / "p0_sequences.tsv").open(), delimiter="\t"))
    assert aois[0] == ["aoi_id", "centroid_x", "centroid_y", "fix_count"]
    assert seqs[0] == ["subject_id", "sequence"] and len(seqs) == 7
    labels = {str(k) for k in range(1, len(aois))}
    for _, seq in seqs[1:]:
        assert set(seq.split(" - ")) <= labels
    first = (tmp_path / "p0_aois.tsv").read_bytes()
    assert run("aoi", fix, "--page", "p0", "-o", tmp_path) == 0
    assert (tmp_path / "p0_aois.tsv").read_bytes() == first
