#!/usr/bin/env python3
"""Writes the demo corpus into demo/corpus.

A synthetic stand-in for a curated-database plus literature corpus: 120
concepts of four semantic types in six latent communities, 2000-2012.
Pairs enter the literature over time (in-community pairs far more often),
most of them are also curated, and a minority of pairs exist only in one of
the two sources. Documents cite earlier documents with a preference for
frequently cited ones. Deterministic for a given seed.
"""

import argparse
import random
from pathlib import Path

TYPES = ["Chemical", "Disease", "Gene", "Process"]


def write(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\t".join(header) + "\n")
        for r in rows:
            f.write("\t".join(str(x) for x in r) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent / "corpus")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    year_min, year_max = 2000, 2012
    n = 120
    ids = [f"D{i:04d}" for i in range(n)]
    community = {c: rng.randrange(6) for c in ids}
    types = {}
    for c in ids:
        t = {TYPES[rng.randrange(4)]}
        if rng.random() < 0.1:
            t.add(TYPES[rng.randrange(4)])
        types[c] = sorted(t)
    # Concepts enter the literature over the first years.
    born = {c: year_min + min(8, int(rng.expovariate(0.45))) for c in ids}

    first_year = {}
    for year in range(year_min, year_max + 1):
        alive = [c for c in ids if born[c] <= year]
        want = 30 + 6 * (year - year_min)
        added = tries = 0
        while added < want and tries < 20000:
            tries += 1
            x, y = rng.sample(alive, 2)
            p = tuple(sorted((x, y)))
            if p in first_year:
                continue
            same = community[x] == community[y]
            if rng.random() < (0.5 if same else 0.03):
                first_year[p] = year
                added += 1

    # Literature: each pair is mentioned in its first year and may recur.
    docs = {}
    mentions = []
    doc_counter = 0

    def new_doc(year):
        nonlocal doc_counter
        doc_counter += 1
        d = f"PM{doc_counter:06d}"
        docs[d] = year
        return d

    year_docs = {y: [] for y in range(year_min, year_max + 1)}
    for p, y0 in sorted(first_year.items()):
        years = [y0] + [y for y in range(y0 + 1, year_max + 1) if rng.random() < 0.25]
        for y in years:
            # Reuse a document of that year sometimes, so one document mentions
            # several pairs. A pair visits each year once, so (pair, doc) stays unique.
            pool = year_docs[y]
            if pool and rng.random() < 0.5:
                d = rng.choice(pool)
            else:
                d = new_doc(y)
                pool.append(d)
            a, b = p if rng.random() < 0.5 else (p[1], p[0])
            mentions.append((a, b, d, y))

    # Curated: most literature pairs plus some never mentioned.
    curated = []
    sources = ["CTD", "KEGG", "DisGeNET", "SemMedDB"]
    for p in sorted(first_year):
        if rng.random() < 0.85:
            for s in rng.sample(sources, 1 + (rng.random() < 0.2)):
                curated.append((p[0], p[1], s))
    for _ in range(40):
        x, y = rng.sample(ids, 2)
        p = tuple(sorted((x, y)))
        if p not in first_year:
            curated.append((p[0], p[1], rng.choice(sources)))
    seen = set()
    curated_rows = []
    for row in curated:
        if row not in seen:
            seen.add(row)
            curated_rows.append(row)

    # Citations: later documents cite earlier ones, preferring cited ones.
    ordered = sorted(docs, key=lambda d: (docs[d], d))
    indeg = {d: 0 for d in ordered}
    citations = set()
    for i, d in enumerate(ordered):
        earlier = [e for e in ordered[:i] if docs[e] < docs[d]]
        if not earlier:
            continue
        for _ in range(rng.randrange(4)):
            weights = [1 + indeg[e] for e in earlier]
            e = rng.choices(earlier, weights=weights)[0]
            if (d, e) not in citations:
                citations.add((d, e))
                indeg[e] += 1

    (out / "manifest.txt").write_text(
        "schema_version = 1\n"
        f"year_min = {year_min}\n"
        f"year_max = {year_max}\n"
        f"semantic_types = {';'.join(TYPES)}\n"
        f"notes = synthetic demo corpus, seed {args.seed}\n",
        encoding="utf-8",
    )
    write(out / "nodes.tsv", ["concept_id", "semantic_types", "display_name"],
          [(c, ";".join(types[c]), f"concept {i}") for i, c in enumerate(ids)])
    write(out / "curated.tsv", ["concept_a", "concept_b", "source_db"], curated_rows)
    write(out / "mentions.tsv", ["concept_a", "concept_b", "doc_id", "year"], mentions)
    write(out / "citations.tsv", ["citing_doc", "cited_doc"], sorted(citations))


if __name__ == "__main__":
    main()
