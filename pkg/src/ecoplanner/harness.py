"""Scenario loading, population construction, and the budget-sweep experiment.

A scenario file (JSON) describes the network, vehicle types, the grid of
driving styles and traffic conditions that spans what drivers could do, the
population mix, and the sweep. Outcome clouds are simulated once per
(origin, destination, vehicle) class, cached on disk, and shared by every
user of that class; the sweep then runs both mechanisms at each budget and
aggregates compliance, realized emissions and travel time, and settled spend.

Compliance in sweep rows follows the figure-of-merit convention: a user
counts as compliant when their payment covers the cost of the designated eco
recommendation, for both mechanisms. Realization is separate: users accept
any offer that covers its own cost increase, so partially funded optimal
offers still move their drivers, they just do not count as eco-compliant.
"""

from __future__ import annotations

import hashlib
import importlib.resources
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import FeasibleSet
from .mechanism import (
    MechanismResult,
    Participant,
    UserProfile,
    baseline_incentives,
    compliance_threshold,
    make_participant,
    optimal_incentives,
    settle,
)
from .microsim import (
    DrivingStyle,
    EmissionCoeffs,
    IdmParams,
    OutcomePoint,
    TrafficCondition,
    generate_outcome_cloud,
)
from .netgraph import Network, Route, build_network, k_shortest_routes
from .prefs import estimate_theta

_TOL = 1e-9

SWEEP_COLUMNS = (
    "budget",
    "mechanism",
    "compliance_ratio",
    "total_emissions_g",
    "mean_travel_time_s",
    "norm_emissions",
    "norm_travel_time",
    "realized_spend",
)


class ScenarioError(ValueError):
    """Scenario file is malformed; carries every violation found."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("invalid scenario: " + "; ".join(self.problems))


@dataclass(frozen=True)
class VehicleType:
    name: str
    idm: IdmParams
    emissions: EmissionCoeffs


@dataclass(frozen=True)
class PopulationGroup:
    count: int
    vehicle: str
    origin: str
    destination: str
    emission_weight: float | None = None
    preferred_time_s: float | None = None

    def __post_init__(self):
        if (self.emission_weight is None) == (self.preferred_time_s is None):
            raise ValueError(
                "exactly one of emission_weight / preferred_time_s per group"
            )


@dataclass(frozen=True)
class SweepSpec:
    lo: float
    hi: float
    steps: int


@dataclass(frozen=True)
class ExecNoise:
    enabled: bool = False
    scale: float = 0.5  # noise sigma as a fraction of the settlement radius


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    network: dict
    trip_origin: str
    trip_destination: str
    p_routes: int
    vehicle_types: dict[str, VehicleType]
    styles: tuple[DrivingStyle, ...]
    conditions: tuple[TrafficCondition, ...]
    population: tuple[PopulationGroup, ...]
    sweep: SweepSpec
    epsilon_frac: float | None
    epsilon_abs: float | None
    dt: float
    seed: int
    out_dir: str
    exec_noise: ExecNoise
    use_cache: bool
    applied_defaults: tuple[str, ...] = field(default=())

    @property
    def n_users(self) -> int:
        return sum(g.count for g in self.population)


def _get(d, key, problems, default=None, required=False):
    if key in d:
        return d[key], False
    if required:
        problems.append(f"missing required field {key!r}")
    return default, True


def load_scenario(path) -> ScenarioConfig:
    """Parse and validate a scenario file, filling and recording defaults.

    Raises ScenarioError listing every violation found, not just the first.
    """
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"scenario file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"parse error at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    return scenario_from_dict(raw)


def scenario_from_dict(raw: dict) -> ScenarioConfig:
    problems: list[str] = []
    defaults: list[str] = []
    if not isinstance(raw, dict):
        raise ScenarioError("scenario root must be an object")

    name = str(raw.get("name", "scenario"))
    network, _ = _get(raw, "network", problems, required=True)
    if network is not None and not isinstance(network, dict):
        problems.append("'network' must be an object")
        network = None

    trip = raw.get("trip")
    trip_o = trip_d = ""
    if not isinstance(trip, dict) or "origin" not in trip or "destination" not in trip:
        problems.append("'trip' must give 'origin' and 'destination' link ids")
    else:
        trip_o = str(trip["origin"])
        trip_d = str(trip["destination"])

    p_routes = raw.get("routes", {}).get("p") if isinstance(raw.get("routes"), dict) else None
    if p_routes is None:
        p_routes = 2
        defaults.append("routes.p = 2")
    elif not (isinstance(p_routes, int) and p_routes >= 1):
        problems.append("'routes.p' must be an integer >= 1")
        p_routes = 2

    vt_raw = raw.get("vehicle_types")
    vehicle_types: dict[str, VehicleType] = {}
    if vt_raw is None:
        vehicle_types["car"] = VehicleType("car", IdmParams(), EmissionCoeffs())
        defaults.append("vehicle_types = {car: built-in defaults}")
    elif not isinstance(vt_raw, dict) or not vt_raw:
        problems.append("'vehicle_types' must be a nonempty object")
    else:
        for vname, spec in vt_raw.items():
            spec = spec or {}
            try:
                idm = IdmParams(**spec.get("idm", {}))
                emis = EmissionCoeffs(**spec.get("emissions", {}))
                vehicle_types[str(vname)] = VehicleType(str(vname), idm, emis)
            except (TypeError, ValueError) as exc:
                problems.append(f"vehicle type {vname!r}: {exc}")

    styles_raw = raw.get("styles")
    styles: list[DrivingStyle] = []
    if styles_raw is None:
        styles = [DrivingStyle()]
        defaults.append("styles = [reference style 1.0/1.0]")
    elif not isinstance(styles_raw, list) or not styles_raw:
        problems.append("'styles' must be a nonempty list")
    else:
        for i, s in enumerate(styles_raw):
            try:
                styles.append(
                    DrivingStyle(
                        speed_factor=float(s.get("speed_factor", 1.0)),
                        accel_factor=float(s.get("accel_factor", 1.0)),
                    )
                )
            except (AttributeError, TypeError, ValueError) as exc:
                problems.append(f"styles[{i}]: {exc}")

    conds_raw = raw.get("conditions")
    conditions: list[TrafficCondition] = []
    if conds_raw is None:
        conditions = [TrafficCondition("default", 0.0)]
        defaults.append("conditions = [default, depart 0s]")
    elif not isinstance(conds_raw, list) or not conds_raw:
        problems.append("'conditions' must be a nonempty list")
    else:
        for i, c in enumerate(conds_raw):
            try:
                conditions.append(
                    TrafficCondition(
                        label=str(c.get("label", f"condition{i}")),
                        depart_time_s=float(c.get("depart_time_s", 0.0)),
                    )
                )
            except (AttributeError, TypeError, ValueError) as exc:
                problems.append(f"conditions[{i}]: {exc}")

    pop_raw, _ = _get(raw, "population", problems, required=True)
    population: list[PopulationGroup] = []
    if pop_raw is not None:
        if not isinstance(pop_raw, list) or not pop_raw:
            problems.append("'population' must be a nonempty list of groups")
        else:
            for i, g in enumerate(pop_raw):
                try:
                    count = int(g["count"])
                    if count < 1:
                        raise ValueError("count must be >= 1")
                    vehicle = str(g.get("vehicle", next(iter(vehicle_types), "car")))
                    if vehicle_types and vehicle not in vehicle_types:
                        raise ValueError(f"unknown vehicle {vehicle!r}")
                    w = g.get("emission_weight")
                    t_rep = g.get("preferred_time_s")
                    if w is not None:
                        w = float(w)
                        if not 0.0 <= w <= 1.0:
                            raise ValueError("emission_weight must be in [0, 1]")
                    if t_rep is not None:
                        t_rep = float(t_rep)
                        if t_rep <= 0:
                            raise ValueError("preferred_time_s must be > 0")
                    population.append(
                        PopulationGroup(
                            count=count,
                            vehicle=vehicle,
                            origin=str(g.get("origin", trip_o)),
                            destination=str(g.get("destination", trip_d)),
                            emission_weight=w,
                            preferred_time_s=t_rep,
                        )
                    )
                except (KeyError, TypeError, ValueError) as exc:
                    problems.append(f"population[{i}]: {exc}")

    sweep_raw = raw.get("sweep")
    if sweep_raw is None:
        sweep = SweepSpec(0.0, 300.0, 50)
        defaults.append("sweep = [0, 300] in 50 steps")
    else:
        try:
            sweep = SweepSpec(
                lo=float(sweep_raw["min"]),
                hi=float(sweep_raw["max"]),
                steps=int(sweep_raw["steps"]),
            )
            if sweep.lo > sweep.hi:
                problems.append("sweep min must be <= max")
            if sweep.steps < 1:
                problems.append("sweep steps must be >= 1")
            if sweep.lo < 0:
                problems.append("sweep min must be >= 0")
        except (KeyError, TypeError, ValueError) as exc:
            problems.append(f"sweep: {exc}")
            sweep = SweepSpec(0.0, 300.0, 50)

    eps_frac = None
    eps_abs = None
    eps_raw = raw.get("epsilon")
    if eps_raw is None:
        eps_frac = 0.02
        defaults.append("epsilon = 2% of |x_rec|")
    elif isinstance(eps_raw, dict) and ("fraction_of_norm" in eps_raw) != ("absolute" in eps_raw):
        if "fraction_of_norm" in eps_raw:
            eps_frac = float(eps_raw["fraction_of_norm"])
            if eps_frac <= 0:
                problems.append("epsilon.fraction_of_norm must be > 0")
        else:
            eps_abs = float(eps_raw["absolute"])
            if eps_abs < 0:
                problems.append("epsilon.absolute must be >= 0")
    else:
        problems.append(
            "'epsilon' must set exactly one of fraction_of_norm / absolute"
        )

    dt = raw.get("dt")
    if dt is None:
        dt = 0.1
        defaults.append("dt = 0.1")
    else:
        dt = float(dt)
        if dt <= 0:
            problems.append("dt must be > 0")

    seed = raw.get("seed")
    if seed is None:
        seed = 0
        defaults.append("seed = 0")
    elif not (isinstance(seed, int) and seed >= 0):
        problems.append("seed must be a nonnegative integer")
        seed = 0

    out_dir = raw.get("out_dir")
    if out_dir is None:
        out_dir = "out"
        defaults.append("out_dir = out")

    noise_raw = raw.get("exec_noise")
    if noise_raw is None:
        noise = ExecNoise()
        defaults.append("exec_noise = disabled")
    else:
        try:
            noise = ExecNoise(
                enabled=bool(noise_raw.get("enabled", False)),
                scale=float(noise_raw.get("scale", 0.5)),
            )
            if noise.scale < 0:
                problems.append("exec_noise.scale must be >= 0")
        except (AttributeError, TypeError, ValueError) as exc:
            problems.append(f"exec_noise: {exc}")
            noise = ExecNoise()

    use_cache = raw.get("cache")
    if use_cache is None:
        use_cache = True
        defaults.append("cache = true")

    if problems:
        raise ScenarioError(problems)

    return ScenarioConfig(
        name=name,
        network=network,
        trip_origin=trip_o,
        trip_destination=trip_d,
        p_routes=p_routes,
        vehicle_types=vehicle_types,
        styles=tuple(styles),
        conditions=tuple(conditions),
        population=tuple(population),
        sweep=sweep,
        epsilon_frac=eps_frac,
        epsilon_abs=eps_abs,
        dt=dt,
        seed=seed,
        out_dir=str(out_dir),
        exec_noise=noise,
        use_cache=bool(use_cache),
        applied_defaults=tuple(defaults),
    )


def bundled_scenario_path() -> Path:
    """Path of the packaged two-route benchmark scenario."""
    return Path(
        importlib.resources.files("ecoplanner").joinpath("data/benchmark.scenario")
    )


@dataclass(frozen=True)
class ClassData:
    """Everything shared by users of one (origin, destination, vehicle)."""

    origin: str
    destination: str
    vehicle: VehicleType
    routes: tuple[Route, ...]
    cloud: tuple[OutcomePoint, ...]
    feasible_set: FeasibleSet
    eco_route_id: str
    eco_recommendation: OutcomePoint


@dataclass(frozen=True)
class ExperimentSetup:
    config: ScenarioConfig
    network: Network
    classes: dict
    participants: tuple[Participant, ...]
    eco_recommendations: tuple[OutcomePoint, ...]
    eco_thresholds: np.ndarray


def _class_digest(config: ScenarioConfig, origin, destination, vt: VehicleType) -> str:
    payload = {
        "network": config.network,
        "origin": origin,
        "destination": destination,
        "idm": vars(vt.idm),
        "emissions": vars(vt.emissions),
        "styles": [vars(s) for s in config.styles],
        "conditions": [vars(c) for c in config.conditions],
        "dt": config.dt,
        "p": config.p_routes,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _cloud_to_json(cloud) -> list:
    return [
        [p.travel_time_s, p.emissions_g, p.route_id, p.style_label, p.condition_label]
        for p in cloud
    ]


def _cloud_from_json(data) -> tuple[OutcomePoint, ...]:
    return tuple(OutcomePoint(t, e, r, s, c) for t, e, r, s, c in data)


def _build_class(config: ScenarioConfig, net: Network, origin, destination, vt) -> ClassData:
    routes = k_shortest_routes(net, origin, destination, config.p_routes)
    if not routes:
        raise ScenarioError(
            f"no route from {origin!r} to {destination!r} in the network"
        )
    cache_file = None
    cloud = None
    if config.use_cache:
        digest = _class_digest(config, origin, destination, vt)
        cache_file = Path(config.out_dir) / "cache" / f"fs-{digest}.json"
        if cache_file.exists():
            cloud = _cloud_from_json(json.loads(cache_file.read_text()))
    if cloud is None:
        cloud = tuple(
            generate_outcome_cloud(
                routes,
                config.styles,
                config.conditions,
                idm=vt.idm,
                emissions=vt.emissions,
                dt=config.dt,
            )
        )
        if cache_file is not None:
            cache_file.parent.mkdir(parents=True, exist_ok=True)
            cache_file.write_text(json.dumps(_cloud_to_json(cloud)))
    X = FeasibleSet.from_points(np.array([[p.travel_time_s, p.emissions_g] for p in cloud]))
    # eco route: carries the emissions-minimal attainable outcome;
    # its recommendation is that route's least-travel-time point
    route_ids = ["-".join(r.link_ids) for r in routes]
    best = min(cloud, key=lambda p: (p.emissions_g, p.travel_time_s))
    eco_route_id = best.route_id
    eco_points = [p for p in cloud if p.route_id == eco_route_id]
    eco_rec = min(eco_points, key=lambda p: (p.travel_time_s, p.emissions_g))
    if eco_route_id not in route_ids:
        raise RuntimeError("eco route missing from route list; internal error")
    return ClassData(
        origin=origin,
        destination=destination,
        vehicle=vt,
        routes=tuple(routes),
        cloud=cloud,
        feasible_set=X,
        eco_route_id=eco_route_id,
        eco_recommendation=eco_rec,
    )


def build_population(config: ScenarioConfig, classes: dict) -> list[Participant]:
    """One Participant per user; weights either given or estimated from the
    group's reported preferred travel time."""
    participants = []
    uid = 0
    for gi, group in enumerate(config.population):
        cls = classes[(group.origin, group.destination, group.vehicle)]
        if group.emission_weight is not None:
            weight = group.emission_weight
        else:
            try:
                est = estimate_theta(cls.feasible_set, group.preferred_time_s)
            except ValueError as exc:
                raise ScenarioError(
                    f"population[{gi}] (users u{uid:03d}..): {exc}"
                ) from exc
            weight = est.emission_weight
        for _ in range(group.count):
            profile = UserProfile(
                user_id=f"u{uid:03d}",
                origin=group.origin,
                destination=group.destination,
                vehicle=group.vehicle,
                emission_weight=weight,
            )
            participants.append(make_participant(profile, cls.feasible_set))
            uid += 1
    return participants


def prepare(config: ScenarioConfig) -> ExperimentSetup:
    """Build the network, simulate/cache per-class outcome clouds, construct
    the population, and precompute eco compliance thresholds."""
    net = build_network(config.network)
    classes = {}
    for group in config.population:
        key = (group.origin, group.destination, group.vehicle)
        if key not in classes:
            classes[key] = _build_class(
                config, net, group.origin, group.destination,
                config.vehicle_types[group.vehicle],
            )
    participants = build_population(config, classes)
    eco_recs = []
    thresholds = []
    for p in participants:
        cls = classes[(p.profile.origin, p.profile.destination, p.profile.vehicle)]
        eco_recs.append(cls.eco_recommendation)
        thresholds.append(compliance_threshold(p, cls.eco_recommendation))
    return ExperimentSetup(
        config=config,
        network=net,
        classes=classes,
        participants=tuple(participants),
        eco_recommendations=tuple(eco_recs),
        eco_thresholds=np.array(thresholds),
    )


@dataclass(frozen=True)
class SweepRow:
    budget: float
    mechanism: str
    compliance_ratio: float
    total_emissions_g: float
    mean_travel_time_s: float
    norm_emissions: float
    norm_travel_time: float
    realized_spend: float

    def __post_init__(self):
        if not 0.0 <= self.compliance_ratio <= 1.0 + _TOL:
            raise ValueError("compliance ratio out of [0, 1]")


def _settlement_radius(config: ScenarioConfig, x_rec: OutcomePoint) -> float:
    if config.epsilon_abs is not None:
        return config.epsilon_abs
    return config.epsilon_frac * float(np.linalg.norm(x_rec.vector))


def _realize_row(
    setup: ExperimentSetup, result: MechanismResult, budget_index: int, mech_index: int
):
    """Realized aggregate outcomes and settled spend for one sweep cell."""
    config = setup.config
    rng = np.random.default_rng([config.seed, budget_index, mech_index])
    total_e = 0.0
    total_t = 0.0
    spend = 0.0
    for offer, p in zip(result.offers, setup.participants):
        intended = offer.x_rec if offer.compliant else p.x_nom
        actual = intended.vector
        eps = _settlement_radius(config, offer.x_rec)
        if config.exec_noise.enabled:
            actual = actual + rng.normal(0.0, config.exec_noise.scale * eps, 2)
        total_e += actual[1]
        total_t += actual[0]
        spend += settle(offer, actual, eps)
    n = len(result.offers)
    return total_e, total_t / n, spend


def run_budget_sweep(setup: ExperimentSetup) -> list[SweepRow]:
    """Both mechanisms across the budget grid, sorted (budget, mechanism).

    The compliance column counts users whose payment covers their eco
    recommendation threshold; normalized columns divide by each mechanism's
    value at the smallest budget.
    """
    config = setup.config
    budgets = np.linspace(config.sweep.lo, config.sweep.hi, config.sweep.steps)
    raw = []
    for bi, budget in enumerate(budgets):
        budget = float(budget)
        for mi, mech in enumerate(("baseline", "optimal")):
            if mech == "baseline":
                result = baseline_incentives(
                    setup.participants, budget, setup.eco_recommendations
                )
            else:
                result = optimal_incentives(setup.participants, budget)
            gammas = np.array([o.gamma for o in result.offers])
            ratio = float(np.mean(gammas >= setup.eco_thresholds - _TOL))
            total_e, mean_t, spend = _realize_row(setup, result, bi, mi)
            raw.append((budget, mech, ratio, total_e, mean_t, spend))
    ref = {}
    for row in raw:
        if row[0] == float(budgets[0]) and row[1] not in ref:
            ref[row[1]] = (row[3], row[4])
    rows = []
    for budget, mech, ratio, total_e, mean_t, spend in raw:
        ref_e, ref_t = ref[mech]
        rows.append(
            SweepRow(
                budget=budget,
                mechanism=mech,
                compliance_ratio=ratio,
                total_emissions_g=total_e,
                mean_travel_time_s=mean_t,
                norm_emissions=total_e / ref_e,
                norm_travel_time=mean_t / ref_t,
                realized_spend=spend,
            )
        )
    return rows


def emit_csv(rows, path) -> None:
    """Write sweep rows in the declared column order. Floats are rendered
    with repr so equal runs produce byte-identical files."""
    if not rows:
        raise ValueError("empty sweep table")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(SWEEP_COLUMNS)]
    for r in rows:
        lines.append(
            ",".join(
                [
                    repr(float(r.budget)),
                    r.mechanism,
                    repr(float(r.compliance_ratio)),
                    repr(float(r.total_emissions_g)),
                    repr(float(r.mean_travel_time_s)),
                    repr(float(r.norm_emissions)),
                    repr(float(r.norm_travel_time)),
                    repr(float(r.realized_spend)),
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n")


def load_sweep_csv(path) -> list[SweepRow]:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0].split(",") != list(SWEEP_COLUMNS):
        raise ScenarioError(f"not a sweep table: {path}")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        rows.append(
            SweepRow(
                budget=float(parts[0]),
                mechanism=parts[1],
                compliance_ratio=float(parts[2]),
                total_emissions_g=float(parts[3]),
                mean_travel_time_s=float(parts[4]),
                norm_emissions=float(parts[5]),
                norm_travel_time=float(parts[6]),
                realized_spend=float(parts[7]),
            )
        )
    return rows


def emit_plot(rows, path) -> None:
    """Two-panel summary: compliance vs budget, and normalized emissions and
    travel time vs budget, one line style per mechanism."""
    if not rows:
        raise ValueError("empty sweep table")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    by_mech = {}
    for r in rows:
        by_mech.setdefault(r.mechanism, []).append(r)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11.0, 4.2))
    colors = {"optimal": "tab:blue", "baseline": "tab:orange"}
    for mech, mrows in sorted(by_mech.items()):
        mrows.sort(key=lambda r: r.budget)
        b = [r.budget for r in mrows]
        col = colors.get(mech, "tab:gray")
        ax1.plot(b, [r.compliance_ratio for r in mrows], color=col, label=mech)
        ax2.plot(
            b, [r.norm_emissions for r in mrows], color=col,
            label=f"{mech} emissions",
        )
        ax2.plot(
            b, [r.norm_travel_time for r in mrows], color=col, linestyle="--",
            label=f"{mech} travel time",
        )
    ax1.set_xlabel("budget")
    ax1.set_ylabel("compliance ratio")
    ax1.set_ylim(-0.05, 1.05)
    ax1.legend()
    ax1.grid(alpha=0.3)
    ax2.set_xlabel("budget")
    ax2.set_ylabel("normalized to smallest budget")
    ax2.legend(fontsize=8)
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
