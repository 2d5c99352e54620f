#!/usr/bin/env python3
"""TfIdf cosine (idf = ln((N+1)/(df+1)) + 1, L2-normalized) and dense cosine."""
import math
import re
from collections import Counter


def tokens(text):
    return [t for t in re.split(r"[^a-z0-9]+", text.lower()) if t]


def tfidf(text, docs):
    n = len(docs)
    df = Counter(t for d in docs for t in set(tokens(d)))
    tf = Counter(tokens(text))
    vec = {t: c * (math.log((n + 1) / (df[t] + 1)) + 1) for t, c in tf.items()}
    norm = math.sqrt(sum(v * v for v in vec.values()))
    return {t: v / norm for t, v in vec.items()}


def cosine(a, b, docs):
    u, v = tfidf(a, docs), tfidf(b, docs)
    return sum(w * v.get(t, 0.0) for t, w in u.items())


PAIR1 = "If a person's domicile is unknown"
PAIR2 = "If a person does not have a domicile in Japan and regardless of whether the person is a Japanese national or a foreign national"
PAIR3 = PAIR2 + " and if the law of domicile is to be applied in accordance with the provisions of the laws that establish the governing law"

if __name__ == "__main__":
    docs = [PAIR1, PAIR2, PAIR3]
    print("cos(domicile unknown, pair1) =", repr(cosine("domicile unknown", PAIR1, docs)))
    print("cos(domicile unknown, pair3) =", repr(cosine("domicile unknown", PAIR3, docs)))
    u = [0.5, -1.25, 2.0, 0.75, -0.5, 1.5, -2.25, 0.25]
    v = [1.0, 0.5, -0.75, 2.5, 1.25, -1.0, 0.5, 2.0]
    dot = sum(a * b for a, b in zip(u, v))
    print("embedding cosine =", repr(dot / (math.sqrt(sum(a * a for a in u)) * math.sqrt(sum(b * b for b in v)))))
