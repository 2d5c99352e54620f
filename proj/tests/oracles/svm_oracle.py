#!/usr/bin/env python3
"""Features of the 4-example SVM toy set and an exhaustive separability check.

Each text uses only the terms "alpha" and "beta", so after L2-normalized
TfIdf the features live in two dimensions.
"""
import itertools
import math
from collections import Counter

TEXTS = [("alpha alpha alpha beta", 1), ("alpha alpha beta", 1), ("alpha beta beta", -1), ("alpha beta beta beta", -1)]


def features():
    n = len(TEXTS)
    df = Counter(t for text, _ in TEXTS for t in set(text.split()))
    rows = []
    for text, y in TEXTS:
        tf = Counter(text.split())
        v = [tf[t] * (math.log((n + 1) / (df[t] + 1)) + 1) for t in ("alpha", "beta")]
        norm = math.hypot(*v)
        rows.append(([x / norm for x in v], y))
    return rows


if __name__ == "__main__":
    rows = features()
    for x, y in rows:
        print(x, y)
    grid = [i / 10 for i in range(-20, 21)]
    separators = [(w1, w2, b) for w1, w2, b in itertools.product(grid, grid, grid)
                  if all(y * (w1 * x[0] + w2 * x[1] + b) > 0 for x, y in rows)]
    print("separating grid points:", len(separators), "e.g.", separators[:1])
