"""Entangler cost across device layouts.

Builds kernel circuits on a line, a ring, a grid, and a heavy-hex lattice and
counts the two-qubit gates.  The spanning-tree construction keeps the count at
2(n-1) CZ per kernel circuit no matter how dense the device graph is.
"""

import numpy as np

from covkern import featuremap as fm


def grid_coupling(rows, cols):
    edges = []
    for r in range(rows):
        for c in range(cols):
            q = r * cols + c
            if c + 1 < cols:
                edges.append((q, q + 1))
            if r + 1 < rows:
                edges.append((q, q + cols))
    return fm.coupling_from_edges(edges)


def kernel_cz(coupling, n):
    spec = fm.make_feature_map(coupling, n)
    circ = fm.build_kernel_circuit(spec, np.zeros(spec.n_params),
                                   np.zeros(n), np.ones(n))
    return circ.count("cz"), spec.plan


def main():
    layouts = {
        "line": lambda n: fm.line_coupling(n),
        "ring": lambda n: fm.ring_coupling(n),
        "grid 4xk": lambda n: grid_coupling(4, max(2, (n + 3) // 4)),
        "heavy-hex": lambda n: fm.heavy_hex_coupling(3, 7),
    }
    ns = (4, 8, 12, 16, 20)
    print(f"{'layout':<10}" + "".join(f"  n={n:<4}" for n in ns) + "  (CZ count)")
    for name, build in layouts.items():
        counts = [kernel_cz(build(n), n)[0] for n in ns]
        print(f"{name:<10}" + "".join(f"  {c:<6}" for c in counts))
    print()

    line_counts = [kernel_cz(fm.line_coupling(n), n)[0] for n in range(2, 21)]
    slope, intercept = np.polyfit(range(2, 21), line_counts, 1)
    for big in (100, 156):
        print(f"extrapolated CZ count at n={big}: {slope * big + intercept:.0f}")

    # denser graphs buy parallelism, not extra gates: the plan groups the
    # tree edges into vertex-disjoint layers
    print(f"\n{'layout':<10}  {'tree height':<12}  layers")
    for name, build in layouts.items():
        _, plan = kernel_cz(build(20), 20)
        print(f"{name:<10}  {plan.height:<12}  {len(plan.layers)}")


if __name__ == "__main__":
    main()
