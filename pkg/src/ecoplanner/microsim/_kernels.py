"""Scalar trip-integration core.

The integrator is written as a self-contained scalar loop so the same source
compiles under numba and runs unmodified as plain Python. Backend selection
happens once at import via ECOPLANNER_NUMBA:

    unset / "auto"  use numba when importable, otherwise pure Python
    "1" "on" ...    require numba (ImportError surfaces)
    "0" "off" ...   force the pure-Python path

`integrate_trip` is the selected flavor; `integrate_trip_py` and
`integrate_trip_jit` stay available side by side for benchmarks and
equivalence tests.
"""

from __future__ import annotations

import math
import os

import numpy as np

_FLAG = os.environ.get("ECOPLANNER_NUMBA", "auto").strip().lower()
if _FLAG in ("0", "false", "off", "no"):
    _numba = None
elif _FLAG in ("1", "true", "on", "yes"):
    import numba as _numba
else:
    try:
        import numba as _numba
    except ImportError:
        _numba = None


def idm_accel(v, v0, gap, dv, a_cap, b_comf, s0, t_gap, delta):
    """Car-following acceleration toward desired speed v0 with a leader
    `gap` metres ahead closing at `dv` (positive when approaching).

    Free driving is the same formula with a huge gap. Must stay in sync with
    the inlined copy in _integrate_trip_impl.
    """
    free = 1.0 - (v / v0) ** delta
    s_star = s0 + max(0.0, v * t_gap + v * dv / (2.0 * math.sqrt(a_cap * b_comf)))
    g = gap if gap > 0.1 else 0.1
    return a_cap * (free - (s_star / g) * (s_star / g))


def emission_rate(v, a, c0, c1, c2, c3):
    """Instantaneous emission surrogate in g/s; braking costs nothing
    beyond the speed terms. Must stay in sync with _integrate_trip_impl."""
    pos_a = a if a > 0.0 else 0.0
    return c0 + c1 * v + c2 * v * v + c3 * pos_a * v


def _integrate_trip_impl(
    total_len,
    seg_end,
    seg_limit,
    ctrl_pos,
    ctrl_kind,  # 0 stop sign, 1 signal
    ctrl_cycle,
    ctrl_green,
    ctrl_offset,
    depart_time,
    v_init,
    eta_v,
    eta_a,
    a_max,
    b_comf,
    s0,
    t_gap,
    delta,
    c0,
    c1,
    c2,
    c3,
    dt,
    max_steps,
    stop_release_speed,
    stop_near_m,
    line_tol_m,
    stop_dwell_s,
):
    n_ctrl = ctrl_pos.shape[0]
    n_seg = seg_end.shape[0]
    served = np.zeros(n_ctrl, np.bool_)
    dwell_start = np.full(n_ctrl, -1.0)
    t_out = np.empty(max_steps + 1)
    x_out = np.empty(max_steps + 1)
    v_out = np.empty(max_steps + 1)
    a_out = np.empty(max_steps + 1)

    x = 0.0
    v = v_init
    t = 0.0
    e = 0.0
    n = 0
    seg = 0
    t_out[0] = 0.0
    x_out[0] = 0.0
    v_out[0] = v
    a_out[0] = 0.0
    status = 1  # horizon exceeded unless the far end is crossed
    travel_time = -1.0
    a_cap = eta_a * a_max
    brake_floor = -4.0 * b_comf

    for _step in range(max_steps):
        while seg < n_seg - 1 and x >= seg_end[seg]:
            seg += 1
        v0 = eta_v * seg_limit[seg]

        # stop-sign bookkeeping: begin or finish a dwell at the line
        dwelling = False
        for c in range(n_ctrl):
            if served[c] or ctrl_kind[c] != 0:
                continue
            if dwell_start[c] >= 0.0:
                if t - dwell_start[c] >= stop_dwell_s:
                    served[c] = True
                else:
                    dwelling = True
            elif v < stop_release_speed and abs(ctrl_pos[c] - x) <= stop_near_m:
                dwell_start[c] = t
                dwelling = True

        # nearest blocking control: unserved stop, or signal currently red;
        # a signal whose line is behind us has been crossed and never blocks
        gap = 1.0e9
        for c in range(n_ctrl):
            if served[c]:
                continue
            if ctrl_kind[c] == 1:
                if ctrl_pos[c] + line_tol_m < x:
                    served[c] = True
                    continue
                phase = (depart_time + t + ctrl_offset[c]) % ctrl_cycle[c]
                if phase < ctrl_green[c] * ctrl_cycle[c]:
                    continue
            gap = ctrl_pos[c] + s0 - x
            break

        if dwelling:
            a = -v / dt if v > 0.0 else 0.0
        else:
            # inline of idm_accel / keep in sync
            free = 1.0 - (v / v0) ** delta
            s_star = s0 + max(
                0.0, v * t_gap + v * v / (2.0 * math.sqrt(a_cap * b_comf))
            )
            g = gap if gap > 0.1 else 0.1
            a = a_cap * (free - (s_star / g) * (s_star / g))
        if a < brake_floor:
            a = brake_floor

        v_new = v + a * dt
        if v_new < 0.0:
            v_new = 0.0
            a = (v_new - v) / dt
        x_new = x + v_new * dt
        # inline of emission_rate / keep in sync
        pos_a = a if a > 0.0 else 0.0
        rate = c0 + c1 * v_new + c2 * v_new * v_new + c3 * pos_a * v_new

        if x_new >= total_len and x_new > x:
            frac = (total_len - x) / (x_new - x)
            t = t + frac * dt
            e += rate * frac * dt
            x = total_len
            v = v_new
            n += 1
            t_out[n] = t
            x_out[n] = x
            v_out[n] = v
            a_out[n] = a
            status = 0
            travel_time = t
            break

        t += dt
        x = x_new
        v = v_new
        e += rate * dt
        n += 1
        t_out[n] = t
        x_out[n] = x
        v_out[n] = v
        a_out[n] = a

    return status, n, t_out, x_out, v_out, a_out, travel_time, e


integrate_trip_py = _integrate_trip_impl

if _numba is not None:
    integrate_trip_jit = _numba.njit(cache=True)(_integrate_trip_impl)
    integrate_trip = integrate_trip_jit
    BACKEND = "numba"
else:
    integrate_trip_jit = None
    integrate_trip = integrate_trip_py
    BACKEND = "python"
