import sys
from pathlib import Path

import pytest

from gazentropy.gaze_data import Fixation, Recording
from gazentropy.synth import generate, paper_like_scenario

sys.path.insert(0, str(Path(__file__).parent))


def make_recording(subject, page, points, duration=200.0, gap=50.0):
    """Recording from (x, y) or (x, y, duration) tuples laid out back to back."""
    fixations, t = [], 0.0
    for pt in points:
        d = pt[2] if len(pt) > 2 else duration
        fixations.append(Fixation(t, d, float(pt[0]), float(pt[1])))
        t += d + gap
    return Recording(subject, page, tuple(fixations))


@pytest.fixture(scope="session")
def paper_like():
    """The 40-page, 30-subject synthetic scenario with its generated data (seed 7)."""
    scenario = paper_like_scenario()
    dataset, ratings = generate(scenario, seed=7)
    return scenario, dataset, ratings


@pytest.fixture(scope="session")
def small_synthetic():
    """Ten pages (one per noise level), ten subjects, a 640x400 screen and 2 s of viewing."""
    from gazentropy.gaze_data import Screen

    scenario = paper_like_scenario(n_subjects=10, pages_per_level=1, screen=Screen(640, 400), viewing_ms=2000)
    return generate(scenario, seed=3)
