"""Shared fixtures: one pulse, one lab grid, cached designs.

The expensive pieces (equilibrium couplings, full drive designs) are
memoized per session so the suite stays fast even though many tests
revisit the same scenarios.
"""

from __future__ import annotations

import math

import pytest

import photon_store as ps

PI = math.pi


@pytest.fixture(scope="session")
def pulse():
    return ps.builtin_packet()


@pytest.fixture(scope="session")
def grid():
    return ps.TimeGrid.from_span(PI, 1e-4)


@pytest.fixture(scope="session")
def gamma_of(pulse):
    """Equilibrium cavity decay for a given bath bandwidth, memoized."""
    cache: dict[float, float] = {}

    def get(w: float) -> float:
        if w not in cache:
            cache[w] = ps.coupling_from_bandwidth(pulse, w)
        return cache[w]

    return get


@pytest.fixture(scope="session")
def make_params(gamma_of):
    def make(
        w: float,
        rho: float,
        g_cav: float = 30.0 * PI,
        gamma_L: float = 6.0 * PI,
        delta1: float = 0.0,
        delta2: float = 0.0,
        big_gamma: float | None = None,
    ) -> ps.PhysicalParams:
        return ps.PhysicalParams(
            g_cav=g_cav,
            gamma_L=gamma_L,
            delta1=delta1,
            delta2=delta2,
            big_gamma=big_gamma if big_gamma is not None else gamma_of(w),
            bandwidth_w=w,
            rho_offset=rho,
            pulse_duration=PI,
        )

    return make


@pytest.fixture(scope="session")
def design_for(pulse, grid, make_params):
    """(params, design) for a scenario, memoized on the call signature."""
    cache: dict = {}

    def get(w: float, rho: float, **kw):
        key = (w, rho, tuple(sorted(kw.items())))
        if key not in cache:
            params = make_params(w, rho, **kw)
            cache[key] = (params, ps.design_drive(pulse, params, grid))
        return cache[key]

    return get
