#!/usr/bin/env python3
"""Writes a synthetic ratings file: 4 methods x 10 scenarios x 10 matches.

Relevance is rated by one rater, domain distance by two. Values are integers
on the 1-5 scale drawn around per-method centers.
"""
import csv
import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "synthetic" / "ratings.csv"

CENTERS = {
    "focus-abstracted": (3.4, 3.2),
    "focus-only": (3.0, 2.4),
    "overall-glove": (2.6, 2.0),
    "overall-purpmech": (2.5, 2.6),
}


def clip(x):
    return max(1, min(5, round(x)))


def main():
    rng = random.Random(7)
    with open(OUT, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["match_id", "scenario_id", "method", "rater_id", "measure", "value"])
        for s in range(1, 11):
            scenario = f"s{s:02d}"
            for method, (rel, dist) in CENTERS.items():
                for rank in range(1, 11):
                    match_id = f"{scenario}-{method}-{rank:02d}"
                    latent = rng.gauss(dist, 0.9)
                    w.writerow([match_id, scenario, method, "r1", "relevance", clip(rng.gauss(rel, 1.0) - 0.25 * (latent - dist))])
                    w.writerow([match_id, scenario, method, "r1", "distance", clip(latent + rng.gauss(0, 0.4))])
                    w.writerow([match_id, scenario, method, "r2", "distance", clip(latent + rng.gauss(0, 0.4))])


if __name__ == "__main__":
    main()
