"""Sweep sizes, fit steps against size and print doubling ratios.

A ratio near 2 per doubling means linear growth; near 4 means quadratic.
The same numbers are available from the command line:

    rootedgp sweep --program is-dag --families list,grid,star --sizes 1k..16k --csv out.csv

    python3 demos/linearity_sweep.py
"""

from __future__ import annotations

from rootedgp import doubling_sizes, format_fits, sweep

sizes = doubling_sizes(1000, 16000)

for program in ("is-dag", "component-numbering", "bfs"):
    _, fits = sweep(program, ["list", "grid", "tree", "star", "kkstar"], sizes, "indexed")
    print(f"{program} (indexed)")
    print(format_fits(fits), end="\n\n")

# is-discrete looks for an unmarked node once per node. The legacy store
# scans its single node list for that, so the total cost is quadratic.
for backend in ("indexed", "legacy"):
    _, fits = sweep("is-discrete", ["discrete"], doubling_sizes(500, 8000), backend)
    print(f"is-discrete ({backend})")
    print(format_fits(fits), end="\n\n")
