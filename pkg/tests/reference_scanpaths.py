"""Thirty AOI scanpaths over an 11-AOI page and a reference transition
matrix for them, rounded to two decimals (some rows sum to 1.03)."""

SEQUENCES = [
    "6 - 7 - 11 - 3 - 11 - 10 - 9 - 2 - 3 - 4",
    "7 - 3 - 4 - 8 - 6 - 4 - 3 - 2",
    "3 - 5 - 9",
    "7 - 4 - 8 - 11 - 3 - 7 - 11",
    "7 - 4 - 8 - 11 - 4 - 7 - 2 - 9",
    "7 - 3 - 7 - 4 - 8 - 11 - 9 - 2 - 9",
    "7 - 8 - 4 - 7 - 11 - 2 - 9 - 2 - 3",
    "3 - 7 - 11 - 10 - 9 - 2 - 9 - 4",
    "7 - 11 - 2 - 6 - 7 - 8",
    "4 - 11 - 5 - 2",
    "7 - 3 - 11 - 4 - 8 - 7 - 2",
    "7 - 3 - 4 - 8 - 3 - 2 - 9",
    "6 - 3 - 4 - 8 - 3 - 10",
    "7 - 3 - 1 - 10 - 11 - 7",
    "7 - 11 - 8 - 4 - 7 - 8 - 9 - 2 - 6 - 2",
    "7 - 4 - 8 - 5 - 9 - 2 - 9",
    "11 - 7 - 11 - 10",
    "7 - 3 - 4 - 8 - 11 - 10 - 9 - 2",
    "7 - 11 - 10 - 2 - 9 - 4 - 8",
    "7 - 4 - 8 - 7 - 3 - 1 - 3",
    "7 - 11 - 10 - 2 - 9",
    "7 - 3 - 11 - 10 - 2",
    "3 - 4 - 1 - 3 - 8 - 4 - 11",
    "7 - 11 - 4 - 8 - 3 - 9 - 2 - 9",
    "7 - 4 - 8 - 3 - 2 - 9 - 8 - 4 - 11",
    "7 - 4 - 8 - 11 - 7 - 3 - 2",
    "7 - 3 - 4 - 8 - 11 - 7",
    "6 - 7 - 8 - 4 - 7 - 8 - 11 - 4 - 2",
    "7 - 11 - 7 - 3 - 11 - 8 - 4 - 8 - 7",
    "3 - 7 - 4",
]

PUBLISHED_MATRIX = [
    [0, 0, 0.67, 0, 0, 0, 0, 0, 0, 0.33, 0],
    [0, 0, 0.14, 0, 0, 0.14, 0, 0, 0.71, 0, 0],
    [0.08, 0.16, 0, 0.28, 0.04, 0, 0.16, 0.04, 0.04, 0.04, 0.16],
    [0.04, 0.04, 0.04, 0, 0, 0, 0.15, 0.63, 0, 0, 0.11],
    [0, 0.33, 0, 0, 0, 0, 0, 0, 0.67, 0, 0],
    [0, 0.17, 0.17, 0.17, 0, 0, 0.5, 0, 0, 0, 0],
    [0, 0.05, 0.3, 0.22, 0, 0, 0, 0.14, 0, 0, 0.3],
    [0, 0, 0.17, 0.26, 0.04, 0.04, 0.13, 0, 0.04, 0, 0.3],
    [0, 0.73, 0, 0.2, 0, 0, 0, 0.1, 0, 0, 0],
    [0, 0.43, 0, 0, 0, 0, 0, 0, 0.43, 0, 0.14],
    [0, 0.1, 0.1, 0.17, 0.04, 0, 0.21, 0.08, 0.04, 0.29, 0],
]


def parsed_sequences():
    return [[int(tok) for tok in s.split(" - ")] for s in SEQUENCES]
