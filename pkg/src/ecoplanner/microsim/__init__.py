"""Single-vehicle longitudinal simulation along a route.

A trip follows one route as a 1-D car-following problem: the driver tracks a
style-scaled desired speed per link, and stop lines or red signals act as
standing virtual leaders parked one minimum-gap behind the line, so the
equilibrium nose position is the line itself. Stop signs require coming to
rest near the line and serving a fixed dwell before release; signals block
exactly while red. Integration is semi-implicit Euler at a fixed step with
the final step interpolated to the crossing, and the emission surrogate is
accumulated alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..netgraph import Route
from . import _kernels
from ._kernels import emission_rate, idm_accel

STOP_RELEASE_SPEED = 0.1  # m/s: "at rest" for stop-sign service
STOP_NEAR_M = 2.0  # must be this close to the line for the dwell to count
LINE_TOL_M = 0.5  # crossing slack before a signal counts as passed
STOP_DWELL_S = 2.0


def backend() -> str:
    """Active integrator flavor: "numba" or "python"."""
    return _kernels.BACKEND


class SimulationHorizonError(RuntimeError):
    """Trip failed to finish within the allowed simulated time."""


@dataclass(frozen=True)
class IdmParams:
    a_max: float = 1.0
    b: float = 1.5
    s0: float = 2.0
    headway_s: float = 1.5
    delta: float = 4.0

    def __post_init__(self):
        for name in ("a_max", "b", "s0", "headway_s", "delta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"IdmParams.{name} must be > 0")


@dataclass(frozen=True)
class EmissionCoeffs:
    """g/s surrogate: c0 + c1*v + c2*v^2 + c3*max(a,0)*v."""

    c0: float = 0.9
    c1: float = 0.075
    c2: float = 0.003
    c3: float = 1.2

    def __post_init__(self):
        for name in ("c0", "c1", "c2", "c3"):
            if getattr(self, name) < 0:
                raise ValueError(f"EmissionCoeffs.{name} must be >= 0")
        if self.c0 <= 0:
            raise ValueError("EmissionCoeffs.c0 must be > 0")


@dataclass(frozen=True)
class DrivingStyle:
    """Multiplicative character of one way to drive a trip.

    speed_factor scales the posted limit into the desired speed; accel_factor
    scales the comfortable acceleration. 1.0 is the assertive reference.
    """

    speed_factor: float = 1.0
    accel_factor: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.speed_factor <= 1.0:
            raise ValueError("speed_factor must be in (0, 1]")
        if not 0.0 < self.accel_factor <= 1.0:
            raise ValueError("accel_factor must be in (0, 1]")

    @property
    def label(self) -> str:
        return f"v{self.speed_factor:g}a{self.accel_factor:g}"


@dataclass(frozen=True)
class TrafficCondition:
    """External state a trip is run under; depart_time_s shifts every
    signal phase the vehicle meets."""

    label: str
    depart_time_s: float = 0.0

    def __post_init__(self):
        if self.depart_time_s < 0:
            raise ValueError("depart_time_s must be >= 0")


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    a: np.ndarray
    travel_time_s: float
    emissions_g: float

    def write_csv(self, path) -> None:
        data = np.column_stack([self.t, self.x, self.v, self.a])
        np.savetxt(
            path,
            data,
            delimiter=",",
            header="t_s,x_m,v_mps,a_mps2",
            comments="",
            fmt="%.6f",
        )


@dataclass(frozen=True)
class OutcomePoint:
    """One point of the attainable (travel time, emissions) cloud."""

    travel_time_s: float
    emissions_g: float
    route_id: str = ""
    style_label: str = ""
    condition_label: str = ""

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.travel_time_s, self.emissions_g])


def _route_arrays(route: Route):
    lengths = np.array([lk.length_m for lk in route.links])
    seg_end = np.cumsum(lengths)
    seg_limit = np.array([lk.speed_limit_mps for lk in route.links])
    pos, kind, cyc, grn, off = [], [], [], [], []
    for i, lk in enumerate(route.links):
        if lk.control == "stop":
            pos.append(seg_end[i])
            kind.append(0)
            cyc.append(1.0)
            grn.append(0.0)
            off.append(0.0)
        elif lk.control == "signal":
            pos.append(seg_end[i])
            kind.append(1)
            cyc.append(lk.signal.cycle_s)
            grn.append(lk.signal.green_fraction)
            off.append(lk.signal.offset_s)
    return (
        float(seg_end[-1]),
        seg_end.astype(np.float64),
        seg_limit.astype(np.float64),
        np.array(pos, dtype=np.float64),
        np.array(kind, dtype=np.int64),
        np.array(cyc, dtype=np.float64),
        np.array(grn, dtype=np.float64),
        np.array(off, dtype=np.float64),
    )


def simulate_trip(
    route: Route,
    style: DrivingStyle = DrivingStyle(),
    condition: TrafficCondition = TrafficCondition("default"),
    idm: IdmParams = IdmParams(),
    emissions: EmissionCoeffs = EmissionCoeffs(),
    dt: float = 0.1,
    v_init: float | None = None,
    max_time_s: float = 3600.0,
    _integrator=None,
) -> Trajectory:
    """Drive the route once and return the recorded trajectory.

    The vehicle enters at its own cruise speed on the first link (style-scaled
    limit) unless v_init is given. Raises SimulationHorizonError when the trip
    does not finish within max_time_s of simulated time.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    arrays = _route_arrays(route)
    total_len = arrays[0]
    if v_init is None:
        v_init = style.speed_factor * route.links[0].speed_limit_mps
    if v_init < 0:
        raise ValueError("v_init must be >= 0")
    max_steps = int(math.ceil(max_time_s / dt))
    run = _integrator if _integrator is not None else _kernels.integrate_trip
    status, n, t, x, v, a, travel_time, e = run(
        total_len,
        *arrays[1:],
        float(condition.depart_time_s),
        float(v_init),
        float(style.speed_factor),
        float(style.accel_factor),
        float(idm.a_max),
        float(idm.b),
        float(idm.s0),
        float(idm.headway_s),
        float(idm.delta),
        float(emissions.c0),
        float(emissions.c1),
        float(emissions.c2),
        float(emissions.c3),
        float(dt),
        max_steps,
        STOP_RELEASE_SPEED,
        STOP_NEAR_M,
        LINE_TOL_M,
        STOP_DWELL_S,
    )
    if status != 0:
        raise SimulationHorizonError(
            f"trip not finished after {max_time_s:g}s simulated "
            f"(route length {total_len:g} m)"
        )
    k = n + 1
    return Trajectory(
        t=t[:k].copy(),
        x=x[:k].copy(),
        v=v[:k].copy(),
        a=a[:k].copy(),
        travel_time_s=float(travel_time),
        emissions_g=float(e),
    )


def trip_outcome(
    route: Route,
    style: DrivingStyle = DrivingStyle(),
    condition: TrafficCondition = TrafficCondition("default"),
    idm: IdmParams = IdmParams(),
    emissions: EmissionCoeffs = EmissionCoeffs(),
    dt: float = 0.1,
    **kwargs,
) -> OutcomePoint:
    traj = simulate_trip(route, style, condition, idm, emissions, dt, **kwargs)
    return OutcomePoint(
        travel_time_s=traj.travel_time_s,
        emissions_g=traj.emissions_g,
        route_id="-".join(route.link_ids),
        style_label=style.label,
        condition_label=condition.label,
    )


def generate_outcome_cloud(
    routes,
    styles,
    conditions,
    idm: IdmParams = IdmParams(),
    emissions: EmissionCoeffs = EmissionCoeffs(),
    dt: float = 0.1,
    max_time_s: float = 3600.0,
) -> list[OutcomePoint]:
    """Outcome for every (route, style, condition) combination, in that
    nesting order. This enumerates what a driver could attain, so the same
    cloud serves every user of the corridor."""
    out = []
    for route in routes:
        for style in styles:
            for cond in conditions:
                out.append(
                    trip_outcome(
                        route,
                        style,
                        cond,
                        idm,
                        emissions,
                        dt,
                        max_time_s=max_time_s,
                    )
                )
    return out
