#!/usr/bin/env python3
"""
A low-entropy, mean-convex ellipsoid shrinks to a round point.

The 1.5:1:1 ellipsoid is mean convex and its entropy lies below both 3/2
and the circle's entropy.  Surfaces like this can only develop round
singularities, and this script watches that happen:

1) Computes the entropy of the initial mesh and compares it with 3/2.
2) Runs mean curvature flow with periodic remeshing until the surface
   collapses, recording where and when.
3) Samples the entropy along the flow; it never increases.
4) Tracks max |A|^2 / H^2, which stays below its initial value up to
   discretization noise, so the surface keeps pinching toward umbilic.
5) Rescales parabolically at the singular point; at fine scales the
   blow-ups fit the round sphere of radius 2.

Takes roughly a minute or two.
"""

import numpy as np

from entroflow import (
    FlowControls,
    ellipsoid,
    entropy,
    pinching_report,
    run_flow,
    stone_entropy,
    tangent_flow_extract,
)


def main():
    surface = ellipsoid((1.5, 1.0, 1.0), 3)
    lam = entropy(surface).entropy
    print(f"initial entropy {lam:.6f}; below 3/2: {lam < 1.5}; below lambda(S^1) = {stone_entropy(1):.6f}: "
          f"{lam < stone_entropy(1)}")

    traj = run_flow(surface, FlowControls(t_end=2.0, cfl=0.5, snapshot_every=0.01, snapshot_steps=10,
                                          remesh_every=20, detect_every=5))
    T = traj.extrapolated_singular_time()
    print(f"{traj.termination.value}: extrapolated T = {T:.5f} at {np.round(traj.singular_location, 5)} "
          f"after {traj.steps} steps\n")

    picks = sorted({int(np.searchsorted(traj.times, t)) for t in np.linspace(0, 0.95 * T, 6)})
    for k in picks:
        s = traj.snapshots[k]
        print(f"t = {s.time:.4f}  entropy {entropy(s.surface).entropy:.6f}")

    pin = pinching_report(traj)
    print(f"\nmax |A|^2/H^2: initial {pin.ratios[0]:.4f}, largest along the flow {pin.max_ratio:.4f}, "
          f"final {pin.ratios[-1]:.4f}\n")

    seq, report = tangent_flow_extract(traj, traj.singular_location, T, 7)
    for lam_j, shr in zip(seq.scales, report.shrinkers):
        cls = shr.classification
        radius = f"{cls.radius:.4f}" if cls.radius else "-"
        print(f"lambda = {lam_j:.4f}: {cls.kind:<8} radius {radius:<7} fit error {cls.fit_error:.4f} "
              f"residual l2 {shr.l2_residual:.4f}")


if __name__ == "__main__":
    main()
