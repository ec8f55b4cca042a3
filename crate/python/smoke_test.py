"""Smoke test for the stochpump_py extension.

Build and install first, e.g. ``pip install --no-build-isolation ./crates/python``
or ``maturin develop -m crates/python/Cargo.toml``.
"""

import math
from pathlib import Path

import stochpump_py as sp

DATA = Path(__file__).resolve().parent.parent / "data"


def main():
    g = sp.Graph.from_json((DATA / "g2.json").read_text())
    assert g.vertex_count == 2 and g.betti_number() == 1
    assert sp.Graph.from_json(g.to_json()).edges == g.edges
    assert g.spanning_trees() == [[0], [1]]
    assert g.sigma_tree([0.3, -0.2]) == [1]

    loop = sp.Protocol.from_json((DATA / "g2-loop.json").read_text(), g)
    e, w, _, _ = loop.evaluate(0.0)
    assert e == [1.0, 0.0] and w == [0.0, 0.0]

    h = sp.master_operator(g, 1.0, [0.0, 0.0], [0.0, 0.0])
    assert all(abs(sum(row[j] for row in h)) < 1e-14 for j in range(2))

    top = sp.topological_current(g, loop)
    assert top["coordinates"] == [-1], top
    analytic = sp.analytic_current(g, loop, 16.0)
    assert abs(analytic["coordinates"][0] + 1) < 0.02
    avg = sp.average_current(g, loop, 8.0, 200.0)
    assert abs(avg["report"]["coordinates"][0] + 1) < 0.05

    degenerate = sp.Protocol.from_json((DATA / "g2-degenerate-loop.json").read_text(), g)
    assert not sp.check_loop_robust(g, degenerate)["robust"]
    try:
        sp.topological_current(g, degenerate)
    except sp.NonRobustError:
        pass
    else:
        raise AssertionError("degenerate loop accepted")

    try:
        sp.Graph(2, [(1, 0)])
    except ValueError:
        pass
    else:
        raise AssertionError("reversed edge accepted")

    csv = sp.sweep(g, loop, [2.0, 4.0], [None])
    assert csv.splitlines()[0].startswith("beta,tau_d,coord_0")
    probe = sp.ground_holonomy_probe(g, loop, 10.0, magnetic=True)
    assert probe["winding"] == -1
    print("smoke test passed:", top["coordinates"], round(analytic["coordinates"][0], 6),
          round(avg["report"]["coordinates"][0], 6), math.isfinite(probe["min_gap"]))


if __name__ == "__main__":
    main()
