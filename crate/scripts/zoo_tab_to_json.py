#!/usr/bin/env python3
"""Convert the tab-separated UCI Zoo table into the dataset JSON layout.

Each (attribute, value) pair becomes one hyperedge holding the animals that
share it. The class column is included, as in the usual hypergraph
construction of this dataset. Node features are the 16 raw attributes.
"""

import json
import sys


def main(src, dst):
    with open(src) as f:
        rows = [line.rstrip("\n").split("\t") for line in f]
    header, body = rows[0], [r for r in rows[3:] if r and r[0]]
    attrs = header[1:-1]
    class_col = len(header) - 1
    class_names = sorted({r[class_col] for r in body})

    hyperedges = []
    for col in range(1, len(header)):
        values = sorted({r[col] for r in body}, key=lambda v: (len(v), v))
        for v in values:
            hyperedges.append([i for i, r in enumerate(body) if r[col] == v])

    out = {
        "schema_version": 1,
        "num_nodes": len(body),
        "hyperedges": hyperedges,
        "features": [[float(r[c]) for c in range(1, len(attrs) + 1)] for r in body],
        "labels": [class_names.index(r[class_col]) for r in body],
        "class_names": class_names,
    }
    with open(dst, "w") as f:
        json.dump(out, f, indent=1)
        f.write("\n")
    members = sum(len(e) for e in hyperedges)
    print(f"{len(body)} nodes, {len(hyperedges)} hyperedges, {members} memberships")


if __name__ == "__main__":
    main(*(sys.argv[1:3] if len(sys.argv) > 2 else ("data/zoo.tab", "data/zoo.json")))
