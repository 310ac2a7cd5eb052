#!/usr/bin/env python3
"""Regenerates the shipped fixture catalogs and the example ratings export.

    python3 tools/make_fixtures.py [output-root]

Output is deterministic; rerunning leaves the files byte-identical.
"""

import json
import random
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

# Example songs with their reference valence/energy placements.
REFERENCE_TRACKS = [
    ("a", "Last Words of a Shooting Star", "Mitski", 0.10, 0.17),
    ("b", "Talking to the Moon", "Bruno Mars", 0.08, 0.59),
    ("c", "Numb", "Linkin Park", 0.21, 0.87),
    ("d", "Love Me Not", "Ravyn Lenae", 0.82, 0.74),
    ("e", "I Wanna Be Yours", "Arctic Monkeys", 0.42, 0.48),
    ("f", "NOKIA", "Drake", 0.51, 0.73),
    ("g", "I'm Yours", "Jason Mraz", 0.71, 0.44),
]

EXTRA_SEEDS = [
    ("h", "Paper Lanterns", "The Quiet Harbors"),
    ("i", "Slow Satellite", "Juniper Vale"),
    ("j", "Northbound", "Marlow & the Tides"),
]

ADJECTIVES = [
    "Amber", "Silver", "Hollow", "Golden", "Quiet", "Electric", "Velvet", "Paper",
    "Broken", "Neon", "Midnight", "Crimson", "Gentle", "Restless", "Open", "Distant",
    "Lucid", "Wild", "Faded", "Bright",
]
NOUNS = [
    "Harbor", "Rivers", "Skyline", "Letters", "Garden", "Static", "Mirrors", "Highway",
    "Embers", "Orchard", "Signals", "Tides", "Lanterns", "Meadow", "Compass", "Winter",
    "Echoes", "Parade", "Horizon", "Weather",
]
ARTISTS = [
    "Hazel Fern", "The Low Arcs", "Odessa Gray", "Kite Season", "Mira Solano",
    "Glass Animals Club", "Beacon Hill", "Nora Vance", "Paper Moth", "Sundial",
    "Tomas Reyes", "The Pale Hours", "Ivy Lark", "Copper Coast",
]

CANDIDATES_PER_SEED = 7


def reference_fixture():
    tracks = []
    search = []
    for label, title, artist, valence, energy in REFERENCE_TRACKS:
        cid = f"ref-{label}"
        tracks.append({
            "canonical_id": cid,
            "title": title,
            "artist": artist,
            "feature_source_id": f"rb-ref-{label}",
            "valence": valence,
            "energy": energy,
        })
        search.append({"artist": artist, "title": title, "canonical_id": cid})
    return {"schema_version": 1, "tracks": tracks, "similarity": [], "search": search}


def spread_catalog():
    rng = random.Random(20251016)
    seeds = []
    for label, title, artist, valence, energy in REFERENCE_TRACKS:
        seeds.append({
            "canonical_id": f"seed-{label}",
            "title": title,
            "artist": artist,
            "feature_source_id": f"rb-seed-{label}",
            "valence": valence,
            "energy": energy,
        })
    for label, title, artist in EXTRA_SEEDS:
        seeds.append({"canonical_id": f"seed-{label}", "title": title, "artist": artist})

    # Candidates cycle through the nine mood cells so every seed's related
    # list spans most of the plane.
    names = [(a, n) for a in ADJECTIVES for n in NOUNS]
    rng.shuffle(names)
    candidates = []
    for k in range(CANDIDATES_PER_SEED * len(seeds)):
        cell = k % 9
        col, row = cell % 3, cell // 3
        valence = round((col + rng.uniform(0.05, 0.95)) / 3, 2)
        energy = round((row + rng.uniform(0.05, 0.95)) / 3, 2)
        adjective, noun = names[k]
        candidates.append({
            "canonical_id": f"cand-{k:03d}",
            "title": f"{adjective} {noun}",
            "artist": ARTISTS[k % len(ARTISTS)],
            "feature_source_id": f"rb-cand-{k:03d}",
            "valence": valence,
            "energy": energy,
        })

    # One candidate per seed exists on the taste service but not on the
    # feature service.
    unmapped = []
    for i, seed in enumerate(seeds):
        unmapped.append({
            "canonical_id": f"nofeat-{i:02d}",
            "title": f"Live Session {i + 1}",
            "artist": seed["artist"],
        })

    search = []
    for t in candidates + unmapped + seeds:
        search.append({"artist": t["artist"], "title": t["title"], "canonical_id": t["canonical_id"]})
    # A title shared by two artists; only the second hit belongs to the
    # descriptor's artist.
    search.insert(0, {"artist": "Someone Else", "title": candidates[0]["title"],
                      "canonical_id": "decoy-000"})

    similarity = []
    for i, seed in enumerate(seeds):
        own = candidates[i * CANDIDATES_PER_SEED:(i + 1) * CANDIDATES_PER_SEED]
        shared = candidates[((i + 1) % len(seeds)) * CANDIDATES_PER_SEED]
        related = [[seed["artist"], seed["title"]]]
        related += [[c["artist"], c["title"]] for c in own]
        related.append([shared["artist"], shared["title"]])
        related.append(["Unreleased Demos", f"Lost Tape {i + 1}"])
        related.append([unmapped[i]["artist"], unmapped[i]["title"]])
        similarity.append({"seed_id": seed["canonical_id"], "related": related})

    return {
        "schema_version": 1,
        "tracks": seeds + candidates + unmapped,
        "top_tracks": [s["canonical_id"] for s in seeds],
        "similarity": similarity,
        "search": search,
    }


# Three pairs per mood. Control and mood-assisted ratings reproduce both the
# reference per-mood means and the overall rating histograms.
STUDY = [
    ("relaxed", (3, 3, 1), (5, 5, 5)),
    ("sad", (2, 2, 2), (4, 4, 4)),
    ("tired", (3, 3, 1), (5, 3, 3)),
    ("distressed", (4, 2, 2), (1, 3, 4)),
    ("neutral", (5, 3, 2), (4, 4, 3)),
    ("happy", (4, 4, 3), (4, 4, 4)),
    ("angry", (1, 1, 1), (1, 2, 3)),
    ("stimulated", (5, 5, 4), (5, 5, 4)),
    ("excited", (3, 2, 1), (1, 3, 4)),
]

COMMENTS = {
    ("relaxed", 0, "treatment"): "Exactly the kind of calm I wanted",
    ("angry", 1, "control"): "Too upbeat, didn't fit",
    ("neutral", 2, "treatment"): 'Nice, but a bit "samey"',
    ("sad", 0, "control"): "",
}


def study_export():
    # Same layout the service exports: comments are always quoted, a missing
    # comment is an empty unquoted field.
    lines = ["session_id,pair_id,arm,mood,rating,comment,rated_at"]
    start = datetime(2025, 3, 3, 9, 0, tzinfo=timezone.utc)
    step = 0
    for n, (mood, control, treatment) in enumerate(
            (m, c[t], tr[t]) for m, c, tr in STUDY for t in range(3)):
        trial = n % 3
        session = f"session-p{n % 6 + 1:02d}"
        pair = f"pair-{mood}-{trial + 1}"
        arms = [("control", control), ("treatment", treatment)]
        if n % 2:
            arms.reverse()
        for arm, rating in arms:
            comment = COMMENTS.get((mood, trial, arm))
            field = "" if comment is None else '"' + comment.replace('"', '""') + '"'
            stamp = (start + timedelta(minutes=7 * step)).strftime("%Y-%m-%dT%H:%M:%SZ")
            step += 1
            lines.append(f"{session},{pair},{arm},{mood},{rating},{field},{stamp}")
    return "\n".join(lines) + "\n"


def main():
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent
    fixtures = root / "data" / "fixtures"
    exports = root / "data" / "exports"
    fixtures.mkdir(parents=True, exist_ok=True)
    exports.mkdir(parents=True, exist_ok=True)
    (fixtures / "reference_tracks.json").write_text(json.dumps(reference_fixture(), indent=2) + "\n")
    (fixtures / "catalog.json").write_text(json.dumps(spread_catalog(), indent=2) + "\n")
    (exports / "study_ratings.csv").write_text(study_export())


if __name__ == "__main__":
    main()
