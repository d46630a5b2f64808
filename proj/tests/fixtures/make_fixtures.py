#!/usr/bin/env python3
"""Regenerates the corpus fixtures under tests/fixtures.

Output is deterministic; rerunning rewrites identical files.
"""

import itertools
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent


def write(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\t".join(header) + "\n")
        for r in rows:
            f.write("\t".join(str(x) for x in r) + "\n")


def manifest(path, year_min, year_max, types, feature_dim=0, notes=""):
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        "schema_version = 1",
        f"year_min = {year_min}",
        f"year_max = {year_max}",
        f"semantic_types = {';'.join(types)}",
    ]
    if feature_dim:
        lines.append(f"feature_dim = {feature_dim}")
    if notes:
        lines.append(f"notes = {notes}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def corpus(d, year_min, year_max, types, nodes, curated, mentions, citations):
    manifest(d / "manifest.txt", year_min, year_max, types)
    write(d / "nodes.tsv", ["concept_id", "semantic_types", "display_name"], nodes)
    write(d / "curated.tsv", ["concept_a", "concept_b", "source_db"], curated)
    write(d / "mentions.tsv", ["concept_a", "concept_b", "doc_id", "year"], mentions)
    write(d / "citations.tsv", ["citing_doc", "cited_doc"], citations)


def small():
    """5 nodes, 4 curated pairs, 6 mention rows over 3 distinct pairs."""
    d = HERE / "small"
    manifest(d / "manifest.txt", 2000, 2005, ["Chemical", "Disease", "Gene"], feature_dim=3,
             notes="hand-written fixture")
    write(d / "nodes.tsv", ["concept_id", "semantic_types", "display_name"], [
        ("C001", "Gene", "alpha"),
        ("C002", "Chemical", "beta"),
        ("C003", "Disease;Gene", "gamma"),
        ("C004", "Disease", "delta"),
        ("C005", "Chemical", ""),
    ])
    write(d / "curated.tsv", ["concept_a", "concept_b", "source_db"], [
        ("C001", "C002", "KEGG"),
        ("C003", "C001", "CTD"),
        ("C002", "C003", "CTD"),
        ("C004", "C005", "KEGG"),
        ("C002", "C001", "CTD"),
    ])
    write(d / "mentions.tsv", ["concept_a", "concept_b", "doc_id", "year"], [
        ("C001", "C002", "d1", 2001),
        ("C002", "C001", "d2", 2001),
        ("C001", "C002", "d3", 2004),
        ("C002", "C003", "d2", 2001),
        ("C003", "C002", "d4", 2003),
        ("C003", "C004", "d5", 2002),
    ])
    write(d / "citations.tsv", ["citing_doc", "cited_doc"], [
        ("d4", "d1"), ("d5", "d1"), ("d3", "d2"), ("d4", "d2"), ("d5", "d3"), ("d4", "d1"),
    ])
    write(d / "features.tsv", ["concept_id", "year", "vector"], [
        ("C001", 2000, "0.5,0.25,-1"),
        ("C001", 2003, "0.125,0.1,0.3333333333333333"),
        ("C002", 2000, "1,0,0"),
        ("C003", 2001, "0,1,0"),
        ("C004", 2000, "0,0,1"),
        ("C005", 2000, "-0.75,1e-3,2.5"),
    ])


def two_cluster():
    """Two 6-cliques joined by 3 cross edges. In-clique edges are spread over
    three years: 2001 holds the base graph, 2002 adds three edges per clique,
    2003 adds the three held-out edges per clique."""
    rng = random.Random(7)
    d = HERE / "two_cluster"
    a = [f"A{i}" for i in range(6)]
    b = [f"B{i}" for i in range(6)]
    year_of = {}
    for members in (a, b):
        pairs = list(itertools.combinations(members, 2))
        # Keep a spanning path in the base year so each clique stays connected.
        path = set(zip(members, members[1:]))
        rest = [p for p in pairs if p not in path]
        rng.shuffle(rest)
        for p in rest[:3]:
            year_of[p] = 2003
        for p in rest[3:6]:
            year_of[p] = 2002
        for p in pairs:
            year_of.setdefault(p, 2001)
    for p in [("A0", "B0"), ("A2", "B3"), ("A5", "B5")]:
        year_of[p] = 2001
    nodes = [(c, "Entity", "") for c in a + b]
    curated, mentions = [], []
    doc = 0
    for (x, y), year in sorted(year_of.items()):
        curated.append((x, y, "fixture"))
        for _ in range(1 + rng.randrange(2)):
            doc += 1
            mentions.append((x, y, f"t{doc}", year))
    corpus(d, 2000, 2003, ["Entity"], nodes, curated, mentions, [])


def drift():
    """Twenty-four concepts in four communities over 2000-2006. From 2003 on half
    of the concepts move to a different community, so the structure seen
    before 2003 goes stale."""
    rng = random.Random(11)
    d = HERE / "drift"
    n = 24
    ids = [f"N{i:02d}" for i in range(n)]
    early = {c: i % 4 for i, c in enumerate(ids)}
    late = dict(early)
    for i, c in enumerate(ids):
        if i % 2 == 1:
            late[c] = (early[c] + 1) % 4
    types = ["TypeA", "TypeB"]
    nodes = [(c, types[i % 2] if i % 5 else "TypeA;TypeB", "") for i, c in enumerate(ids)]
    seen = set()
    year_of = {}
    for year in range(2000, 2007):
        comm = early if year < 2003 else late
        want = 14 if year == 2000 else 9
        tries = 0
        added = 0
        while added < want and tries < 5000:
            tries += 1
            x, y = rng.sample(ids, 2)
            p = tuple(sorted((x, y)))
            if p in seen:
                continue
            same = comm[x] == comm[y]
            if rng.random() < (0.9 if same else 0.04):
                seen.add(p)
                year_of[p] = year
                added += 1
    curated, mentions = [], []
    doc = 0
    for p, year in sorted(year_of.items()):
        curated.append((p[0], p[1], "fixture"))
        for _ in range(1 + rng.randrange(3)):
            doc += 1
            mentions.append((p[0], p[1], f"r{doc}", year))
    corpus(d, 2000, 2006, types, nodes, curated, mentions, [])


def ig_graphs():
    """Edge lists and target pairs for attribution checks."""
    write(HERE / "ig4" / "edges.tsv", ["a", "b"], [("g0", "g1"), ("g1", "g2"), ("g2", "g3")])
    write(HERE / "ig4" / "targets.tsv", ["a", "b"], [("g0", "g2"), ("g1", "g3")])
    edges8 = [("h0", "h1"), ("h0", "h2"), ("h1", "h2"), ("h2", "h3"), ("h3", "h4"),
              ("h4", "h5"), ("h5", "h6"), ("h4", "h6"), ("h6", "h7")]
    write(HERE / "ig8" / "edges.tsv", ["a", "b"], edges8)
    write(HERE / "ig8" / "targets.tsv", ["a", "b"], [("h0", "h3"), ("h3", "h5"), ("h2", "h7")])


if __name__ == "__main__":
    small()
    two_cluster()
    drift()
    ig_graphs()
