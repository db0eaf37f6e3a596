"""
Solve one layered solid torus and print its canonicity certificate.

    python3 demos/solid_torus.py 7/2 0.4 0.5
"""
import sys
from math import pi

import numpy as np

from dehncan.angles import BoundaryAngles, feasible
from dehncan.canonical import certify
from dehncan.farey import farey_path, parse_slope
from dehncan.volume import maximize


def main(m="7/2", tp=0.4, tq=0.5):
    p, q, r = parse_slope("0"), parse_slope("inf"), parse_slope("-1")
    m = parse_slope(m)
    b = BoundaryAngles(float(tp), float(tq), pi - float(tp) - float(tq))
    ok, margin = feasible(b, p, q, r, m)
    print(f"m = {m}, theta = {np.round(b.as_tuple(), 4)}, feasibility margin {margin:.4f}")
    if not ok:
        return 3
    path = farey_path(p, q, r, m)
    res = maximize(path, b)
    cert = certify(path, res, b)
    print(f"word {path.word}  N = {path.N}  volume {res.value:.12f}")
    print(f"{'i':>3} {'x':>10} {'y':>10} {'z':>10}")
    for i, row in enumerate(res.angles, 1):
        print(f"{i:>3} " + " ".join(f"{v:10.6f}" for v in row))
    print(f"{'face':>10} {'margin':>12} {'lambda':>8}")
    for f in cert.all_faces:
        print(f"{f.face_id:>10} {float(f.margin):12.4e} {float(f.lam):8.4f}")
    print(f"holonomy residual {cert.holonomy.max_residual:.1e}  verdict {cert.verdict}")
    return 0 if cert.canonical else 1


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:]))
