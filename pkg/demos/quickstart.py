"""Run the shipped programs on small graphs and look at what they do.

    python3 demos/quickstart.py
"""

from __future__ import annotations

from rootedgp import (Interpreter, Star, build_input, build_program, corpus_dir,
                      parse_host_graph, print_host_graph)

# A four-node graph with a directed cycle n0 -> n1 -> n2 -> n0 and a tail n3 -> n0.
cyclic = parse_host_graph((corpus_dir() / "dag-cyclic-sample.gpg").read_text())
print("input  :", print_host_graph(cyclic))

run = Interpreter(build_program("is-dag"), cyclic, trace=True)
outcome = run.run()
print("is-dag :", "success" if outcome else "failure")
print("trace  :", " ".join(run.trace))
print()

# bfs turns every node and edge blue; the output graph is the input, mutated in place.
g = build_input("bfs", Star(4))
print("input  :", print_host_graph(g))
Interpreter(build_program("bfs"), g).run()
print("bfs    :", print_host_graph(g))
print(f"steps  : {g.steps} matcher probes for {g.node_count() + g.edge_count()} items")
