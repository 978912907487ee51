#!/usr/bin/env python3
"""
Planes are self-shrinkers, and small graphs over them have entropy close to one.

1) Checks that a flat triangulated disk satisfies H = <X, nu>/2 at every
   interior vertex (both sides vanish).
2) Adds Gaussian bumps a exp(-r^2) of growing amplitude and measures how
   far the entropy rises above that of the flat disk.  The excess grows
   like a^2, consistent with the plane being an isolated minimum of
   entropy among nearby graphs.

Takes a few seconds.
"""

import numpy as np

from entroflow import EntropyOptions, entropy, planar_disk, shrinker_residual
from entroflow.shapes import boundary_vertices


def main():
    flat = planar_disk(6.0, 0.2)
    rep = shrinker_residual(flat)
    interior = np.setdiff1d(np.arange(flat.num_vertices), boundary_vertices(flat))
    print(f"flat disk: {flat.num_vertices} vertices, max interior residual "
          f"{np.abs(rep.residuals[interior]).max():.1e}, classified as {rep.classification.kind}")

    opts = EntropyOptions(starts=4, seed=0)
    base = entropy(flat, opts).entropy
    print(f"flat disk entropy {base:.8f}\n")
    amps = np.array([0.025, 0.05, 0.1, 0.2, 0.4])
    excess = []
    for a in amps:
        bump = planar_disk(6.0, 0.2, lambda x, y, a=a: a * np.exp(-(x * x + y * y)))
        res = entropy(bump, opts)
        excess.append(res.entropy - base)
        print(f"a = {a:<6} entropy {res.entropy:.8f}  excess {excess[-1]:.3e}  scale {res.argmax.scale:.4f}")
    slope = np.polyfit(np.log(amps), np.log(excess), 1)[0]
    print(f"\nexcess ~ a^{slope:.3f}")


if __name__ == "__main__":
    main()
