"""Time the trip integrator's numba and pure-Python flavors.

Runs every (route, depart) pair of the bundled benchmark scenario through
both kernels in one process and reports per-pass wall time plus speedup.
The numba flavor gets one untimed warmup pass to absorb compilation.

    python benchmarks/bench_kernels.py --repeats 5 --dt 0.1
"""

import argparse
import json
import time
from pathlib import Path

from ecoplanner.harness import bundled_scenario_path
from ecoplanner.microsim import DrivingStyle, TrafficCondition, simulate_trip
from ecoplanner.microsim import _kernels
from ecoplanner.netgraph import build_network, k_shortest_routes

DEPARTS = (0.0, 20.0, 40.0)


def bundled_routes():
    raw = json.loads(Path(bundled_scenario_path()).read_text())
    net = build_network(raw["network"])
    trip = raw["trip"]
    return k_shortest_routes(net, trip["origin"], trip["destination"], 2)


def one_pass(routes, integrator, dt):
    for route in routes:
        for depart in DEPARTS:
            simulate_trip(
                route,
                DrivingStyle(),
                TrafficCondition("bench", depart),
                dt=dt,
                _integrator=integrator,
            )


def best_of(routes, integrator, dt, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        one_pass(routes, integrator, dt)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5, help="timed passes per flavor")
    ap.add_argument("--dt", type=float, default=0.1, help="integration step (s)")
    args = ap.parse_args()

    routes = bundled_routes()
    n_trips = len(routes) * len(DEPARTS)
    print(f"workload: {n_trips} trips per pass, dt={args.dt:g}")

    t_py = best_of(routes, _kernels.integrate_trip_py, args.dt, args.repeats)
    print(f"python : {t_py * 1e3:8.2f} ms/pass  ({t_py / n_trips * 1e3:.2f} ms/trip)")

    if _kernels.integrate_trip_jit is None:
        print("numba  : unavailable (install numba or drop ECOPLANNER_NUMBA=0)")
        return

    one_pass(routes, _kernels.integrate_trip_jit, args.dt)  # compile
    t_jit = best_of(routes, _kernels.integrate_trip_jit, args.dt, args.repeats)
    print(f"numba  : {t_jit * 1e3:8.2f} ms/pass  ({t_jit / n_trips * 1e3:.2f} ms/trip)")
    print(f"speedup: {t_py / t_jit:.1f}x")


if __name__ == "__main__":
    main()
