"""Self-contained property suites behind ``entroflow verify``.

Each suite builds its own inputs at a modest reference resolution and
returns a list of :class:`Check` records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from .flow import FlowControls, huisken_series, pinching_report, radius_series, run_flow
from .gaussian import EntropyOptions, entropy, stone_entropy
from .geometry import hausdorff_distance, transform
from .rescale import tangent_flow_extract
from .shapes import circle, ellipsoid, icosphere


@dataclass
class Check:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)

    def to_dict(self):
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance, "passed": self.passed}


def max_increment(values) -> float:
    v = np.asarray(values, dtype=float)
    return float(np.max(np.diff(v), initial=0.0))


def monotonicity(seed: int = 0) -> list[Check]:
    """Gaussian integrals along circle and sphere flows never increase."""
    rng = np.random.default_rng(seed)
    out = []
    flows = {
        "circle": run_flow(circle(1.0, 64), FlowControls(t_end=0.4, cfl=1.0, scheme="explicit", snapshot_every=0.02)),
        "sphere": run_flow(icosphere(1.0, 2), FlowControls(t_end=0.2, cfl=0.5, snapshot_every=0.01)),
    }
    for name, traj in flows.items():
        tol = 1e-3 + 10 * traj.max_dt
        dim = traj.snapshots[0].surface.ambient
        worst = 0.0
        for _ in range(5):
            y = rng.uniform(-0.5, 0.5, dim)
            tau = traj.times[-1] + rng.uniform(0.05, 0.5)
            worst = max(worst, max_increment([f for _, f in huisken_series(traj, y, tau)]))
        out.append(Check(f"{name}: max increase of the Gaussian integral", worst, tol))
    return out


def entropy_invariance(seed: int = 0) -> list[Check]:
    """Entropy is unchanged by rigid motions and dilations."""
    rng = np.random.default_rng(seed)
    base = ellipsoid((1.5, 1.0, 1.0), 2)
    opts = EntropyOptions(starts=4)
    ref = entropy(base, opts).entropy
    worst = 0.0
    for _ in range(3):
        moved = transform(base, Rotation.random(random_state=rng).as_matrix(),
                          rng.uniform(-3, 3, 3), float(rng.uniform(0.5, 3.0)))
        worst = max(worst, abs(entropy(moved, opts).entropy - ref))
    return [Check("max |entropy(S) - entropy(cRS + v)|", worst, 1e-6)]


def shrinking_sphere() -> list[Check]:
    """Radii follow sqrt(R0^2 - 2nt) up to 0.8 T."""
    out = []
    cases = [
        ("circle", circle(1.0, 128), FlowControls(t_end=0.4, cfl=1.0, scheme="explicit", snapshot_every=0.01,
                                                   remesh_every=0), 1),
        ("sphere", icosphere(1.0, 3), FlowControls(t_end=0.2, cfl=0.1, scheme="explicit", snapshot_every=0.01,
                                                    remesh_every=0, detect_every=50), 2),
    ]
    for name, surf, controls, n in cases:
        traj = run_flow(surf, controls)
        err = max(abs(r - math.sqrt(1 - 2 * n * t)) / math.sqrt(1 - 2 * n * t) for t, r in radius_series(traj))
        out.append(Check(f"{name}: max relative radius error", err, 1e-3))
    return out


def tangent_circle() -> list[Check]:
    """Blow-ups of the shrinking circle at its extinction point are the sqrt(2) circle."""
    traj = run_flow(circle(1.0, 64), FlowControls(t_end=1.0, cfl=1.0, scheme="explicit", snapshot_every=0.01,
                                                   snapshot_steps=10, remesh_every=0))
    seq, report = tangent_flow_extract(traj, traj.singular_location, traj.extrapolated_singular_time(), 4)
    ref = circle(math.sqrt(2.0), 4096)
    dist = max(hausdorff_distance(seq.at(j), ref) for j in range(len(seq.scales)))
    resid = max(r.linf_residual for r in report.shrinkers)
    density_gap = abs(stone_entropy(1) - math.sqrt(2 * math.pi / math.e))
    return [
        Check("max Hausdorff distance to the sqrt(2) circle", dist, 5e-3),
        Check("max shrinker residual", resid, 1e-2),
        Check("closed-form circle entropy vs sqrt(2 pi / e)", density_gap, 1e-12),
    ]


def pinching() -> list[Check]:
    """max |A|^2 / H^2 does not grow along a mean-convex ellipsoid flow."""
    traj = run_flow(ellipsoid((2.0, 1.0, 1.0), 2),
                    FlowControls(t_end=0.3, cfl=0.5, snapshot_every=0.02, remesh_every=20, detect_every=5))
    rep = pinching_report(traj)
    growth = rep.max_ratio - rep.ratios[0]
    invalid = float(len(rep.valid) - sum(rep.valid))
    return [
        Check("growth of max |A|^2/H^2 over the initial value", growth, 0.05),
        Check("snapshots with min H <= 0", invalid, 0.0),
    ]


SUITES = {
    "monotonicity": monotonicity,
    "entropy-invariance": entropy_invariance,
    "shrinking-sphere": shrinking_sphere,
    "tangent-circle": tangent_circle,
    "pinching": pinching,
}
