"""
Reading and writing edge lists
==============================

Edge lists use the SNAP layout: ``#`` comments, then one ``u v`` pair per
line. Reciprocal pairs collapse, self-loops vanish and ids are remapped to
0..n-1 in increasing order.
"""

import io
import os

import numpy as np

from rcdiffusion import generate_small_world, load_edge_list, read_edge_list, write_edge_list

raw = b"# toy\n10 20\n20 10\n20 30\n30 30\n"
g = load_edge_list(raw)
print(f"{g.node_count} nodes, edges {g.edges().tolist()}, original ids {g.labels.tolist()}")

buf = io.StringIO()
write_edge_list(generate_small_world(8, 0.0, np.random.default_rng(0)), buf, comment="ring")
print(buf.getvalue())

###############################################################################
# The collaboration network is not shipped; point RCDIFFUSION_GRQC at a copy.

path = os.environ.get("RCDIFFUSION_GRQC", "data/ca-GrQc.txt")
if os.path.isfile(path):
    net = read_edge_list(path)
    print(f"{path}: {net.node_count} nodes, {net.edge_count} edges")
else:
    print(f"{path} not found; skipping the collaboration network")
