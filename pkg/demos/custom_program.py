"""Write rules and a program as text, then run them.

The program below reverses every edge of a graph. Processed edges are
marked red so that the loop terminates, and a second loop clears the marks.

    python3 demos/custom_program.py
"""

from __future__ import annotations

from rootedgp import parse_host_graph, parse_program, print_host_graph, print_rule, run

SOURCE = """
// flip an unmarked edge and mark it so it is not flipped again
flip(a,b,x:list)
  [ (1, a) (2, b) | (e1, 1, 2, x) ]
  => [ (1, a) (2, b) | (e2, 2, 1, x # red) ]
  interface {1, 2}

unmark(a,b,x:list)
  [ (1, a) (2, b) | (e1, 1, 2, x # red) ]
  => [ (1, a) (2, b) | (e1, 1, 2, x) ]
  interface {1, 2}

Main = flip!; unmark!
"""

prog = parse_program(SOURCE)
for rule in prog.rules.values():
    print(print_rule(rule), end="\n\n")

g = parse_host_graph('[ (n0, "a") (n1, "b") (n2, "c") | (e0, n0, n1, 1) (e1, n1, n2, 2) ]')
print("before:", print_host_graph(g))
assert run(prog, g)
print("after :", print_host_graph(g))
