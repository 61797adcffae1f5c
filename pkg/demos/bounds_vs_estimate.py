"""Compare the cheap cycle-time bounds with a simulated estimate on every demo network.

    python demos/bounds_vs_estimate.py
"""

from pathlib import Path

from maxplus_fj.analysis import bounds_report, estimate_gamma
from maxplus_fj.network import compile_network, load_spec

print(f"{'network':<28}{'lower':>8}{'estimate':>10}{'upper':>8}  inside")
for path in sorted((Path(__file__).parent / "networks").glob("*.json")):
    net = compile_network(load_spec(path))
    g = estimate_gamma(net, 5000, replications=16, seed=3)
    r = bounds_report(net, g, samples=50_000, seed=3)
    print(f"{path.stem:<28}{r.lower:>8.3f}{g.offset_point:>10.3f}{r.upper:>8.3f}  {r.gamma_point_in_bounds}")

# The lower bound is the slowest single node; the upper bound charges each
# customer the slowest service along any path it could wait on.
