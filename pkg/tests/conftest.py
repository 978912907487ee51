"""Shared flows and the acceptance summary.

The flows are expensive, so each runs once per session.  Their build times
are recorded so acceptance criteria can charge them against their budgets.
"""

import time

import pytest

from entroflow import FlowControls, circle, ellipsoid, icosphere, run_flow

BUILD_SECONDS = {}
ACCEPTANCE = []


def _timed(name, fn):
    start = time.perf_counter()
    out = fn()
    BUILD_SECONDS[name] = time.perf_counter() - start
    return out


@pytest.fixture(scope="session")
def circle_flow():
    # unit circle run to extinction, dense snapshots near the end
    return _timed("circle_flow", lambda: run_flow(
        circle(1.0, 128), FlowControls(t_end=1.0, cfl=1.0, scheme="explicit", snapshot_every=0.01,
                                       snapshot_steps=20, remesh_every=0)))


@pytest.fixture(scope="session")
def sphere_flow():
    # unit sphere up to 0.8 T, no remeshing so the radius is read off fixed vertices
    return _timed("sphere_flow", lambda: run_flow(
        icosphere(1.0, 3), FlowControls(t_end=0.2, cfl=0.1, scheme="explicit", snapshot_every=0.01,
                                        remesh_every=0, detect_every=50)))


@pytest.fixture(scope="session")
def sphere_singular_flow():
    # unit sphere run to its round point at T = 1/4
    return _timed("sphere_singular_flow", lambda: run_flow(
        icosphere(1.0, 3), FlowControls(t_end=1.0, cfl=0.25, scheme="explicit", snapshot_every=0.005,
                                        snapshot_steps=10, remesh_every=20, detect_every=10)))


@pytest.fixture(scope="session")
def ellipsoid_flow():
    # 2:1:1 ellipsoid run until it shrinks to a round point
    return _timed("ellipsoid_flow", lambda: run_flow(
        ellipsoid((2.0, 1.0, 1.0), 3), FlowControls(t_end=2.0, cfl=0.5, snapshot_every=0.01, snapshot_steps=10,
                                                    remesh_every=20, detect_every=5)))


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
        terminalreporter.write_line(line)
