"""Run the randomized property suite and show a known-bad bound failing.

    python demos/property_checks.py
"""

import numpy as np

from maxplus_fj.algebra import diag
from maxplus_fj.dynamics import epoch_matrices
from maxplus_fj.network import compile_network, tandem
from maxplus_fj.oracle import product_upper_bound, run_suite
from maxplus_fj.service import Deterministic

summary = run_suite(200, seed=7, workers=4)
for pid, c in sorted(summary.counts.items()):
    print(f"  {pid:<8} passed {c['passed']:>4}  failed {c['failed']}  skipped {c['skipped']}")
print("all passed:", summary.all_passed)
for pid, c in summary.known_defects.items():
    print(f"  {pid:<10} (known defect) failed {c['failed']} of {c['passed'] + c['failed']}")

# Three unit-time stations in a row. After one epoch the last departure is 3,
# but the unweighted form of the product upper bound only allows 2.
net = compile_network(tandem([Deterministic(1.0)] * 3))
A1t = epoch_matrices(net, np.ones((1, 3)))[0].T
T = [diag([1.0, 1.0, 1.0])]
print("\nA^T(1)[1,3]      =", A1t[0, 2])
print("unweighted bound =", product_upper_bound(T, net.support, net.p, "unweighted")[0, 2])
print("weighted bound   =", product_upper_bound(T, net.support, net.p, "weighted")[0, 2])
