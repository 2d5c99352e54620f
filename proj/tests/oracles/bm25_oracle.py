#!/usr/bin/env python3
"""Direct-formula BM25 (Lucene idf) over whitespace-token corpora.

Writes bm25_cases.json: 200 seeded random corpora (<= 10 docs, queries of
<= 6 terms) with expected scores, and prints the 3-doc toy values.
"""
import json
import math
import random
from pathlib import Path


def bm25(docs, query, doc, k1=0.9, b=0.4):
    n = len(docs)
    avgdl = sum(len(d) for d in docs) / n
    d = docs[doc]
    total = 0.0
    for term in query:
        df = sum(1 for x in docs if term in x)
        idf = math.log(1 + (n - df + 0.5) / (df + 0.5))
        tf = d.count(term)
        norm = 1.0 if avgdl == 0 else (1 - b + b * len(d) / avgdl)
        total += idf * tf * (k1 + 1) / (tf + k1 * norm)
    return total


def main():
    toy = [["a", "b", "c"], ["b", "b", "d"], ["c", "d", "e", "e"]]
    for i in range(3):
        print(f"toy d{i + 1} query b: {bm25(toy, ['b'], i)!r}")
    print(f"toy k1=1.2 b=0.75 d2: {bm25(toy, ['b'], 1, 1.2, 0.75)!r}")

    rng = random.Random(20231)
    vocab = [f"t{i}" for i in range(12)]
    cases = []
    for c in range(200):
        n_docs = rng.randint(1, 10)
        docs = [[rng.choice(vocab) for _ in range(rng.randint(0, 12))] for _ in range(n_docs)]
        if all(not d for d in docs):
            docs[0] = [rng.choice(vocab)]
        k1 = 0.9 if c % 2 == 0 else round(rng.uniform(0.1, 2.0), 3)
        b = 0.4 if c % 2 == 0 else round(rng.uniform(0.0, 1.0), 3)
        queries = []
        for _ in range(3):
            q = [rng.choice(vocab) for _ in range(rng.randint(1, 6))]
            queries.append({"tokens": q, "scores": [bm25(docs, q, i, k1, b) for i in range(n_docs)]})
        cases.append({"docs": [" ".join(d) for d in docs], "k1": k1, "b": b, "queries": queries})
    out = Path(__file__).with_name("bm25_cases.json")
    out.write_text(json.dumps(cases, indent=0) + "\n")


if __name__ == "__main__":
    main()
