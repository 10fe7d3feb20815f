"""
Chromatic subdivisions and the R_k complexes
============================================

Build Chr and Chr^2 of the triangle, find the facets where at most k
processes contend, and draw them.
"""

import sys

from rkaffine.affine import build_rk, contention_classes, full_runs, leaders, rk_pattern
from rkaffine.complex_core import boundary_touching_facets
from rkaffine.subdivision import RunSequence, chr_iter, fubini, simplex_complex, to_svg

# One round of immediate snapshot among three processes is an ordered set
# partition of {1, 2, 3}; there are 13 of them, and each is a facet of Chr(s).
chr1 = chr_iter(3, 1)
chr2 = chr_iter(3, 2)
print("Chr facets:", len(chr1.facets), " Chr^2 facets:", len(chr2.facets))
print("ordered set partitions of 1..4 points:", [fubini(k) for k in range(1, 5)])

# A two-round run.  Processes with the same carrier (the set of processes
# they heard of, transitively) form a contention class.
run = RunSequence.from_json([[[1], [2, 3]], [[1], [2, 3]]])
for c in contention_classes(run):
    print("class", sorted(c.members), "carrier", sorted(c.shared_carrier))

# R_k keeps the Chr^2 facets whose largest class has at most k members.
for k in (1, 2, 3):
    print(f"R_{k}: {len(build_rk(3, k).top_facets())} facets")

# R_2 is exactly the part of Chr^2 that touches the boundary of the triangle.
print("R_2 == boundary-touching facets:",
      build_rk(3, 2).top_facets() == boundary_touching_facets(chr2, simplex_complex(3)))

# Leaders: an undecided process whose first-round view holds at most k
# undecided processes.  In R_1 every facet is a total order, so the first
# process is the leader and everyone sees it.
for r in list(full_runs(rk_pattern(3, 1)))[:3]:
    ls = leaders(r, None, 1)
    print(r, "leaders", sorted(ls.leaders), "visible", ls.visible_leader)

# Draw Chr^2 with the R_1 facets shaded (processes 1, 2, 3 are red, blue, white).
inside = build_rk(3, 1).facets
path = sys.argv[1] if len(sys.argv) > 1 else "r1.svg"
with open(path, "w", encoding="utf-8") as fh:
    fh.write(to_svg(chr2, highlight=lambda f: f in inside))
print("wrote", path)
