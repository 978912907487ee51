"""Mean curvature flow of discrete hypersurfaces and the quantities tracked along it."""

from __future__ import annotations

import bisect
import logging
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded
from scipy.sparse.linalg import splu

from .errors import EntroflowError, NonpositiveScale, OutOfRange, SolveFailure
from .gaussian import CutoffSpec, GaussianCenter, f_functional, localized_f
from .geometry import DiscreteHypersurface, compute_curvature, laplacian, remesh

logger = logging.getLogger(__name__)


class Scheme(str, Enum):
    EXPLICIT = "explicit"
    SEMI_IMPLICIT = "semi-implicit"


class Termination(str, Enum):
    REACHED_TIME = "ReachedTime"
    SINGULARITY_DETECTED = "SingularityDetected"
    STEP_FLOOR = "StepFloor"


@dataclass(frozen=True)
class FlowState:
    """A surface at a flow time.

    ``generation`` changes whenever a remesh alters the vertex set, so two
    states with equal generation share vertex correspondence.
    """

    surface: DiscreteHypersurface
    time: float = 0.0
    step_count: int = 0
    generation: int = 0


@dataclass
class FlowControls:
    t_end: float
    cfl: float = 0.5
    remesh_every: int = 25
    snapshot_every: float | None = None
    # additional snapshot every k steps; steps shrink near a singularity, so these densify there
    snapshot_steps: int | None = None
    scheme: Scheme = Scheme.SEMI_IMPLICIT
    curvature_threshold: float = 1e3
    volume_threshold: float = 1e-9
    detect_every: int = 1
    max_steps: int = 10_000_000

    def __post_init__(self):
        self.scheme = Scheme(self.scheme)
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        if self.snapshot_every is not None and not self.snapshot_every > 0:
            raise ValueError("snapshot_every must be positive")
        if self.snapshot_steps is not None and not self.snapshot_steps >= 1:
            raise ValueError("snapshot_steps must be at least 1")
        if self.remesh_every < 0 or self.detect_every < 1:
            raise ValueError("remesh_every must be >= 0 and detect_every >= 1")


@dataclass(frozen=True)
class NearSingular:
    location: np.ndarray
    reason: str


@dataclass
class Trajectory:
    snapshots: list
    controls: FlowControls
    termination: Termination
    singular_location: np.ndarray | None = None
    max_dt: float = 0.0
    steps: int = 0

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    @property
    def final(self) -> FlowState:
        return self.snapshots[-1]

    @property
    def singular_time(self) -> float | None:
        """Time at which the singularity criterion fired, if it did."""
        if self.termination is not Termination.SINGULARITY_DETECTED:
            return None
        return self.final.time

    def extrapolated_singular_time(self) -> float | None:
        """Extinction time from the last two snapshots, assuming ``area^(2/n)`` is linear in t.

        Exact for shrinking spheres and for flows approaching a round point.
        """
        if self.termination is not Termination.SINGULARITY_DETECTED or len(self.snapshots) < 2:
            return None
        a, b = self.snapshots[-2], self.snapshots[-1]
        n = b.surface.n
        qa = a.surface.total_measure ** (2 / n)
        qb = b.surface.total_measure ** (2 / n)
        if not qa > qb:
            return b.time
        return float(b.time + qb * (b.time - a.time) / (qa - qb))

    def surface_at(self, t: float) -> DiscreteHypersurface:
        """Surface at time ``t``, interpolated linearly when bracketing snapshots share vertices."""
        times = self.times
        span = 1e-12 * max(1.0, abs(times[-1]))
        if t < times[0] - span or t > times[-1] + span:
            raise OutOfRange(f"time {t} outside trajectory range [{times[0]}, {times[-1]}]")
        k = bisect.bisect_left(times.tolist(), t)
        if k < len(times) and abs(times[k] - t) <= span:
            return self.snapshots[k].surface
        k = min(max(k, 1), len(times) - 1)
        a, b = self.snapshots[k - 1], self.snapshots[k]
        if a.generation == b.generation and a.surface.num_vertices == b.surface.num_vertices:
            w = (t - a.time) / (b.time - a.time)
            return a.surface.with_vertices((1 - w) * a.surface.vertices + w * b.surface.vertices)
        return (a if t - a.time <= b.time - t else b).surface


class FlowAborted(SolveFailure):
    """Numerical failure during a run; ``partial`` holds the trajectory so far."""

    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


def step(state: FlowState, dt: float, scheme: Scheme | str = Scheme.SEMI_IMPLICIT) -> FlowState:
    """Advance one time step.

    Explicit moves each vertex by ``-dt H nu``.  Semi-implicit solves
    ``(M + dt L) X_new = M X`` with the Laplacian assembled on the current
    surface, i.e. ``X_t = Laplace X`` implicit in position.
    """
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if dt == 0:
        return state
    surface = state.surface
    scheme = Scheme(scheme)
    if scheme is Scheme.EXPLICIT:
        curv = compute_curvature(surface, second_form=False)
        new = surface.vertices - dt * curv.mean_curvature[:, None] * curv.normal
    elif surface.n == 1:
        new = _polyline_implicit(surface, dt)
    else:
        L, mass = laplacian(surface)
        system = (sp.diags(mass) + dt * L).tocsc()
        try:
            new = splu(system).solve(mass[:, None] * surface.vertices)
        except RuntimeError as exc:
            raise SolveFailure(f"semi-implicit solve failed: {exc}") from exc
    if not np.all(np.isfinite(new)):
        raise SolveFailure("non-finite positions after step")
    return FlowState(surface.with_vertices(new), state.time + dt, state.step_count + 1, state.generation)


def _polyline_implicit(surface, dt):
    """Solve the cyclic tridiagonal system ``(M + dt L) X = M X_old`` by Sherman-Morrison."""
    lengths = surface.element_measures  # segment i joins vertex i and i + 1
    w = dt / lengths
    mass = 0.5 * (lengths + np.roll(lengths, 1))
    diag = mass + w + np.roll(w, 1)
    off = -w  # coupling between i and i + 1
    nv = len(diag)
    rhs = mass[:, None] * surface.vertices
    # split off the corner entries (0, nv-1) as u v^T with u = (g, 0.., corner), v = (1, 0.., corner/g)
    corner = off[-1]
    g = -diag[0]
    d = diag.copy()
    d[0] -= g
    d[-1] -= corner * corner / g
    banded = np.zeros((3, nv))
    banded[0, 1:] = off[:-1]
    banded[1] = d
    banded[2, :-1] = off[:-1]
    u = np.zeros(nv)
    u[0], u[-1] = g, corner
    try:
        sol = solve_banded((1, 1), banded, np.column_stack([rhs, u]), check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SolveFailure(f"semi-implicit solve failed: {exc}") from exc
    y, z = sol[:, :-1], sol[:, -1]
    factor = (y[0] + corner / g * y[-1]) / (1.0 + z[0] + corner / g * z[-1])
    return y - z[:, None] * factor[None, :]


def detect_singularity(state: FlowState, initial_diameter: float, initial_volume: float | None = None,
                       curvature_threshold: float = 1e3, volume_threshold: float = 1e-9):
    """Return :class:`NearSingular` when curvature blows up or the volume vanishes, else None."""
    surface = state.surface
    curv = compute_curvature(surface)
    A = np.sqrt(np.maximum(curv.second_form_norm_sq, 0.0))
    reason = None
    if A.max() * initial_diameter > curvature_threshold:
        reason = "curvature"
    elif initial_volume is not None and abs(surface.enclosed_volume) < volume_threshold * abs(initial_volume):
        reason = "volume"
    if reason is None:
        return None
    # vertices within a factor two of the peak; for a round point that is all of them
    top = np.flatnonzero(A >= 0.5 * A.max())
    w = curv.vertex_area[top]
    location = (w[:, None] * surface.vertices[top]).sum(0) / w.sum()
    return NearSingular(location, reason)


def run_flow(initial: DiscreteHypersurface, controls: FlowControls) -> Trajectory:
    """Evolve ``initial`` by mean curvature flow with adaptive steps and remeshing.

    The step is ``cfl * h_min^2 / (2 (n + 1))``, clipped to land on snapshot
    times and ``t_end``.  Every ``remesh_every`` steps the surface is remeshed
    to the initial mean edge scaled by ``(area / initial area)^(1/n)``.
    """
    n = initial.n
    diam0 = initial.diameter
    vol0 = initial.enclosed_volume
    area0 = initial.total_measure
    edge0 = float(np.mean(initial.edge_lengths))
    state = FlowState(initial)
    snapshots = [state]
    traj = Trajectory(snapshots, controls, Termination.REACHED_TIME)
    next_snap = controls.snapshot_every if controls.snapshot_every else np.inf
    floor = 1e-14 * diam0 ** 2
    check_at = controls.detect_every

    while state.time < controls.t_end:
        if state.step_count >= controls.max_steps:
            raise FlowAborted("step budget exhausted", traj)
        h_min = state.surface.edge_lengths.min()
        dt = controls.cfl * h_min ** 2 / (2 * (n + 1))
        if dt < floor:
            traj.termination = Termination.STEP_FLOOR
            break
        target = min(controls.t_end, next_snap)
        landing = state.time + dt >= target
        if landing:
            dt = target - state.time
        traj.max_dt = max(traj.max_dt, dt)
        try:
            state = step(state, dt, controls.scheme)
            if landing:
                state = replace(state, time=target)
            if controls.remesh_every and state.step_count % controls.remesh_every == 0:
                scale = (state.surface.total_measure / area0) ** (1.0 / n)
                fresh = remesh(state.surface, edge0 * scale)
                if fresh is not state.surface:
                    state = replace(state, surface=fresh, generation=state.generation + 1)
        except EntroflowError as exc:
            traj.steps = state.step_count
            raise FlowAborted(f"{type(exc).__name__}: {exc}", traj) from exc

        if state.step_count >= check_at or landing:
            check_at = state.step_count + controls.detect_every
            hit = detect_singularity(state, diam0, vol0, controls.curvature_threshold, controls.volume_threshold)
            if hit is not None:
                traj.termination = Termination.SINGULARITY_DETECTED
                traj.singular_location = hit.location
                snapshots.append(state)
                break
        if landing and state.time >= next_snap:
            snapshots.append(state)
            next_snap += controls.snapshot_every
        elif controls.snapshot_steps and state.step_count % controls.snapshot_steps == 0:
            snapshots.append(state)
    if snapshots[-1] is not state:
        snapshots.append(state)
    traj.steps = state.step_count
    logger.info("flow finished: %s at t=%.6g after %d steps", traj.termination.value, state.time, state.step_count)
    return traj


def huisken_series(traj: Trajectory, y, tau: float) -> list[tuple[float, float]]:
    """``(t, int_{M_t} Phi_(y, tau))`` for every snapshot."""
    out = []
    for s in traj.snapshots:
        if not s.time < tau:
            raise NonpositiveScale(f"snapshot time {s.time} is not before tau={tau}")
        out.append((s.time, f_functional(s.surface, GaussianCenter(y, tau - s.time))))
    return out


def localized_series(traj: Trajectory, y, tau: float, rho: float) -> list[tuple[float, float]]:
    """Ecker's cut-off Gaussian integral at every snapshot."""
    g = GaussianCenter(y, tau)
    spec = CutoffSpec(y, tau, rho)
    return [(s.time, localized_f(s.surface, g, s.time, spec)) for s in traj.snapshots]


@dataclass
class PinchingReport:
    ratios: list = field(default_factory=list)
    valid: list = field(default_factory=list)

    @property
    def max_ratio(self) -> float:
        vals = [r for r, ok in zip(self.ratios, self.valid) if ok]
        return max(vals) if vals else float("nan")


def pinching_report(traj: Trajectory) -> PinchingReport:
    """Per-snapshot ``max |A|^2 / H^2``; snapshots with ``min H <= 0`` are flagged invalid.

    Both curvatures come from the local quadric fit.  Mixing the fitted |A|^2
    with the cotangent H lets single-vertex noise in H dominate the maximum.
    """
    report = PinchingReport()
    for s in traj.snapshots:
        curv = compute_curvature(s.surface)
        H = curv.fitted_mean_curvature
        ok = bool(H.min() > 0)
        report.valid.append(ok)
        report.ratios.append(float(np.max(curv.second_form_norm_sq / H ** 2)) if ok else float("nan"))
    return report


def radius_series(traj: Trajectory, center=None) -> list[tuple[float, float]]:
    """Mean vertex distance from ``center`` (default: the initial centroid) per snapshot."""
    c = traj.snapshots[0].surface.centroid if center is None else np.asarray(center, dtype=float)
    return [(s.time, float(np.linalg.norm(s.surface.vertices - c, axis=1).mean())) for s in traj.snapshots]
