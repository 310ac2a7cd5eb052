"""Python bindings for the moodtune recommendation core."""

import json

from ._core import (
    FixtureIoError,
    Mood,
    MoodtuneError,
    UnknownMoodError,
    ValidationError,
    category_of,
    knn_indices,
    mann_whitney,
    parse_mood,
    softmax_indices,
    softmax_probabilities,
    target_point,
)
from . import _core

__all__ = [
    "FixtureIoError",
    "Mood",
    "MoodtuneError",
    "UnknownMoodError",
    "ValidationError",
    "analyze",
    "analyze_csv",
    "category_of",
    "ingest",
    "knn_indices",
    "mann_whitney",
    "parse_mood",
    "simulate",
    "softmax_indices",
    "softmax_probabilities",
    "target_point",
]


def analyze_csv(text):
    """Rating analysis of an export given as CSV text."""
    return json.loads(_core.analyze_csv(text))


def analyze(path):
    """Rating analysis of an export file."""
    with open(path, encoding="utf-8") as handle:
        return analyze_csv(handle.read())


def ingest(path):
    """Validation report for a fixture catalog."""
    return json.loads(_core.ingest(str(path)))


def simulate(fixture, mood, trials, seed=0):
    """Offline pair simulation summary."""
    return json.loads(_core.simulate(str(fixture), mood, trials, seed))
