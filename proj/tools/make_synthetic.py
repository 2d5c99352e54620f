#!/usr/bin/env python3
"""Writes the bundled synthetic corpora under data/.

statute/  canonical-jsonl statute corpus with splits, gold articles, YES/NO
          answers, a three-checkpoint scores.tsv, query embeddings and SRL
          annotations for every article sentence.
case/     coliee-task2-dir case corpus with labels and a two-checkpoint
          scores.tsv.

Output is a pure function of --seed.
"""
import argparse
import json
import random
from pathlib import Path

PARTIES = ["person", "minor", "guardian", "lessee", "lessor", "obligor", "obligee", "agent",
           "principal", "creditor", "debtor", "purchaser", "seller", "heir", "bailee", "surety"]
CONDITIONS = [
    "has lost legal capacity", "fails to perform the obligation", "acquires the property in good faith",
    "is unable to pay the debt", "manages the affairs of another", "conceals a defect in the object",
    "transfers the claim to a third party", "delays delivery beyond the agreed date",
    "revokes the mandate without cause", "receives a benefit without legal grounds",
    "damages the leased building", "abandons the inheritance", "exceeds the scope of authority",
    "holds a pledge over movables", "performs on behalf of the obligor", "omits the required notice",
]
CONSEQUENCES = [
    ("may", "rescind the contract"), ("is", "liable for compensation"), ("must", "return the benefit"),
    ("may", "demand a reasonable fee"), ("shall", "notify the other party"), ("is", "deemed to have consented"),
    ("may", "refuse to perform"), ("must", "bear the cost of repairs"), ("may", "claim reimbursement of expenses"),
    ("is", "obliged to preserve the object"), ("shall", "compensate the resulting damage"),
    ("may", "retain the object until paid"),
]
FILLER = ["in principle", "under the law", "as a rule", "in such a case", "according to the contract"]


def sentence(rng):
    p1, p2 = rng.sample(PARTIES, 2)
    cond = rng.choice(CONDITIONS)
    aux, rest = rng.choice(CONSEQUENCES)
    return p1, cond, p2, aux, rest


def article_of(noun):
    return "an" if noun[0] in "aeiou" else "a"


def render(p1, cond, p2, aux, rest, negate=False):
    verb = f"{aux} not" if negate else aux
    return f"If {article_of(p1)} {p1} {cond}, the {p2} {verb} {rest}."


def render_query(p1, cond, p2, aux, rest, negate, rng):
    verb = f"{aux} not" if negate else aux
    tail = " " + rng.choice(FILLER) if rng.random() < 0.5 else ""
    if rng.random() < 0.5:
        return f"Suppose that {article_of(p1)} {p1} {cond}. Then the {p2} {verb} {rest}{tail}."
    return f"If {article_of(p1)} {p1} {cond}, the {p2} {verb} {rest}{tail}."


def srl_for(p1, cond, p2, aux, rest):
    cond_tokens = ["If", article_of(p1), p1] + cond.split()
    tokens = cond_tokens + [","] + ["the", p2, aux] + rest.split() + ["."]
    start = len(cond_tokens) + 1
    verb = start + 2
    return tokens, {
        "verb": [verb, verb + 1],
        "args": [{"role": "ARG0", "span": [start, start + 2]},
                 {"role": "ARG1", "span": [verb + 1, len(tokens) - 1]}],
    }


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r, sort_keys=True, ensure_ascii=False) + "\n" for r in rows))


def statute(out, rng):
    out.mkdir(parents=True, exist_ok=True)
    n_articles, n_queries = 40, 90
    articles, facts, srl = [], {}, []
    for i in range(1, n_articles + 1):
        aid = f"A{i}"
        parts = [sentence(rng) for _ in range(rng.choice([1, 2]))]
        facts[aid] = parts
        articles.append({"id": aid, "number": str(i), "caption": "", "text": " ".join(render(*p) for p in parts),
                         "lang": "en"})
        for s_idx, p in enumerate(parts):
            tokens, pred = srl_for(*p)
            srl.append({"sentence_id": f"{aid}/{s_idx}", "tokens": tokens, "predicates": [pred]})

    queries, gold, answers, embeddings = [], {}, {}, []
    centroids = {a["id"]: [rng.gauss(0, 1) for _ in range(8)] for a in articles}
    for j in range(n_queries):
        qid = str(1001 + j)
        aid = rng.choice(articles)["id"]
        p1, cond, p2, aux, rest = rng.choice(facts[aid])
        negate = rng.random() < 0.5
        queries.append({"id": qid, "text": render_query(p1, cond, p2, aux, rest, negate, rng), "lang": "en"})
        gold[qid] = [aid]
        if rng.random() < 0.2:
            other = rng.choice(articles)["id"]
            if other != aid:
                gold[qid].append(other)
        answers[qid] = "NO" if negate else "YES"
        vec = [c + rng.gauss(0, 0.3) for c in centroids[aid]]
        embeddings.append({"id": qid, "vector": [round(v, 6) for v in vec]})

    write_jsonl(out / "articles.jsonl", articles)
    write_jsonl(out / "queries.jsonl", queries)
    write_jsonl(out / "srl.jsonl", srl)
    write_jsonl(out / "embeddings.jsonl", embeddings)
    (out / "gold.json").write_text(json.dumps({k: sorted(v) for k, v in gold.items()}, indent=1, sort_keys=True) + "\n")
    (out / "answers.json").write_text(json.dumps(answers, indent=1, sort_keys=True) + "\n")
    (out / "manifest.json").write_text(json.dumps(
        {"splits": {"train": ["1001..1060"], "validation": ["1061..1075"], "test": ["1076..1090"]}}, indent=1) + "\n")

    lines = []
    for ckpt, noise in (("ckpt-a", 0.18), ("ckpt-b", 0.22), ("ckpt-c", 0.26)):
        for q in queries:
            for a in articles:
                base = 0.72 if a["id"] in gold[q["id"]] else 0.3
                s = min(1.0, max(0.0, rng.gauss(base, noise)))
                lines.append(f"{ckpt}\t{q['id']}\t{a['id']}\t{s:.6f}\n")
    (out / "scores.tsv").write_text("".join(lines))


def cases(out, rng):
    root = out / "cases"
    root.mkdir(parents=True, exist_ok=True)
    labels, lines = {}, []
    for c in range(1, 16):
        cid = f"{c:03d}"
        paras = []
        for _ in range(10):
            paras.append(" ".join(render(*sentence(rng)) for _ in range(3)))
        relevant = sorted(rng.sample(range(10), rng.choice([1, 2])))
        src = paras[relevant[0]].split(". ")[0].rstrip(".")
        fragment = f"The court held that {src[0].lower() + src[1:]}, and the appeal was dismissed."
        cdir = root / cid
        (cdir / "paragraphs").mkdir(parents=True, exist_ok=True)
        (cdir / "fragment.txt").write_text(fragment + "\n")
        for k, text in enumerate(paras):
            (cdir / "paragraphs" / f"{k + 1:03d}.txt").write_text(text + "\n")
        labels[cid] = [f"{k + 1:03d}.txt" for k in relevant]
        for ckpt, noise in (("ckpt-a", 0.15), ("ckpt-b", 0.25)):
            for k in range(10):
                base = 0.75 if k in relevant else 0.3
                s = min(1.0, max(0.0, rng.gauss(base, noise)))
                lines.append(f"{ckpt}\t{cid}\t{k + 1:03d}\t{s:.6f}\n")
    (out / "labels.json").write_text(json.dumps(labels, indent=1, sort_keys=True) + "\n")
    (out / "manifest.json").write_text(json.dumps(
        {"splits": {"train": ["1..9"], "validation": ["10..12"], "test": ["13..15"]}}, indent=1) + "\n")
    (out / "scores.tsv").write_text("".join(sorted(lines)))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    ap.add_argument("--seed", type=int, default=2023)
    args = ap.parse_args()
    statute(args.out / "statute", random.Random(args.seed))
    cases(args.out / "case", random.Random(args.seed + 1))


if __name__ == "__main__":
    main()
