"""Count how often is-connected probes edges while matching ``forward``
on star graphs, next to the closed-form bound 2k + k(k+1)/2.

The centre of Star(k) is visited again after every spoke, and each visit
re-walks the edges already handled. That makes the count quadratic in k on
both backends: the processed edges go back to the unmarked state, so an
index on edge marks cannot skip them.

    python3 demos/star_bound.py
"""

from __future__ import annotations

from rootedgp import Interpreter, Star, build_input, build_program

prog = build_program("is-connected")
print(f"{'k':>6} {'bound':>9} {'legacy':>9} {'indexed':>9}")
prev = None
for k in (8, 16, 32, 64, 128, 256, 512):
    counts = []
    for backend in ("legacy", "indexed"):
        it = Interpreter(prog, build_input("is-connected", Star(k), backend), instrument=True)
        assert it.run()
        counts.append(it.rule_edge_steps["forward"])
    bound = 2 * k + k * (k + 1) // 2
    growth = "" if prev is None else f"   x{counts[0] / prev:.2f} per doubling"
    print(f"{k:>6} {bound:>9} {counts[0]:>9} {counts[1]:>9}{growth}")
    prev = counts[0]
