"""Directed road network with typed links and candidate-route enumeration.

Origins and destinations are links, not nodes; a route is a contiguous chain
of links and its length counts the full origin and destination links. Route
enumeration is a loop-free k-shortest-paths search (deviation-path style)
over the link adjacency graph, with lexicographic node-sequence tie-breaking
so results never depend on link insertion order.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass


class NetworkSpecError(ValueError):
    """Malformed network description; carries every violation found."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid network spec: " + "; ".join(self.problems))


@dataclass(frozen=True)
class SignalTiming:
    cycle_s: float
    green_fraction: float
    offset_s: float

    def is_green(self, t: float, offset_override: float | None = None) -> bool:
        off = self.offset_s if offset_override is None else offset_override
        phase = (t + off) % self.cycle_s
        return phase < self.green_fraction * self.cycle_s


@dataclass(frozen=True)
class Link:
    link_id: str
    tail: str  # upstream node
    head: str  # downstream node
    length_m: float
    speed_limit_mps: float
    control: str = "none"  # none | stop | signal (control sits at the head end)
    signal: SignalTiming | None = None


class Network:
    """Immutable validated road network; safe to share across threads."""

    def __init__(self, nodes, links):
        problems = []
        node_set = frozenset(nodes)
        by_id: dict[str, Link] = {}
        for lk in links:
            if lk.link_id in by_id:
                problems.append(f"duplicate link id {lk.link_id!r}")
            by_id[lk.link_id] = lk
            for node in (lk.tail, lk.head):
                if node not in node_set:
                    problems.append(
                        f"link {lk.link_id!r} references unknown node {node!r}"
                    )
            if not lk.length_m > 0:
                problems.append(f"link {lk.link_id!r} has nonpositive length")
            if not lk.speed_limit_mps > 0:
                problems.append(f"link {lk.link_id!r} has nonpositive speed limit")
            if lk.control not in ("none", "stop", "signal"):
                problems.append(
                    f"link {lk.link_id!r} has unknown control {lk.control!r}"
                )
            if lk.control == "signal":
                sig = lk.signal
                if sig is None:
                    problems.append(f"link {lk.link_id!r} is a signal without timing")
                else:
                    if not sig.cycle_s > 0:
                        problems.append(f"signal on {lk.link_id!r}: cycle must be > 0")
                    if not 0.0 < sig.green_fraction < 1.0:
                        problems.append(
                            f"signal on {lk.link_id!r}: green fraction must be in (0,1)"
                        )
                    if sig.cycle_s > 0 and not 0.0 <= sig.offset_s < sig.cycle_s:
                        problems.append(
                            f"signal on {lk.link_id!r}: offset must be in [0, cycle)"
                        )
        if problems:
            raise NetworkSpecError(problems)
        self.nodes = node_set
        # sorted storage: behavior independent of insertion order
        self.links = {k: by_id[k] for k in sorted(by_id)}
        succ: dict[str, list[str]] = {}
        for lid, lk in self.links.items():
            succ.setdefault(lk.tail, []).append(lid)
        self._out_by_node = {n: tuple(sorted(v)) for n, v in succ.items()}

    def successors(self, link_id: str) -> tuple[str, ...]:
        """Links that can follow `link_id` (leave its head node)."""
        return self._out_by_node.get(self.links[link_id].head, ())

    def link(self, link_id: str) -> Link:
        return self.links[link_id]


@dataclass(frozen=True)
class Route:
    links: tuple[Link, ...]

    def __post_init__(self):
        ids = [lk.link_id for lk in self.links]
        if len(set(ids)) != len(ids):
            raise ValueError("route repeats a link")
        for a, b in zip(self.links, self.links[1:]):
            if a.head != b.tail:
                raise ValueError(
                    f"route not contiguous: {a.link_id} -> {b.link_id}"
                )

    @property
    def length_m(self) -> float:
        return sum(lk.length_m for lk in self.links)

    @property
    def link_ids(self) -> tuple[str, ...]:
        return tuple(lk.link_id for lk in self.links)

    def node_sequence(self) -> tuple[str, ...]:
        return (self.links[0].tail,) + tuple(lk.head for lk in self.links)


def build_network(spec: dict) -> Network:
    """Validate and build a Network from a parsed description.

    Expected shape::

        {"nodes": ["a", "b", ...],
         "links": [{"id": "l1", "from": "a", "to": "b", "length_m": 100,
                    "speed_limit_mps": 13.9,
                    "control": "none" | "stop" |
                               {"kind": "signal", "cycle_s": 60,
                                "green_fraction": 0.5, "offset_s": 0}}, ...]}
    """
    problems = []
    nodes = spec.get("nodes")
    raw_links = spec.get("links")
    if not isinstance(nodes, list) or not nodes:
        problems.append("missing or empty 'nodes' list")
        nodes = []
    if not isinstance(raw_links, list) or not raw_links:
        problems.append("missing or empty 'links' list")
        raw_links = []

    links = []
    for i, d in enumerate(raw_links):
        try:
            control = d.get("control", "none")
            signal = None
            if isinstance(control, dict):
                if control.get("kind") != "signal":
                    problems.append(f"link #{i}: unknown control {control!r}")
                    continue
                signal = SignalTiming(
                    cycle_s=float(control["cycle_s"]),
                    green_fraction=float(control["green_fraction"]),
                    offset_s=float(control.get("offset_s", 0.0)),
                )
                control = "signal"
            links.append(
                Link(
                    link_id=str(d["id"]),
                    tail=str(d["from"]),
                    head=str(d["to"]),
                    length_m=float(d["length_m"]),
                    speed_limit_mps=float(d["speed_limit_mps"]),
                    control=control,
                    signal=signal,
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            problems.append(f"link #{i}: {exc!r}")
    if problems:
        raise NetworkSpecError(problems)
    return Network(nodes, links)


def _continuation(
    net: Network,
    start: str,
    target: str,
    start_cost: float,
    start_nodes: tuple[str, ...],
    banned_links: frozenset,
    banned_first_moves: frozenset,
    max_pops: int = 200_000,
) -> tuple[float, tuple[str, ...]] | None:
    """Cheapest simple continuation start..target over the link graph.

    Paths never revisit a node already in `start_nodes` or reached along the
    way, so every result is loop-free. Returns (total cost, link ids after
    `start`) or None. Ties resolve toward the lexicographically smallest node
    sequence. Uniform-cost search over whole paths: exact for the small
    networks this package targets.
    """
    heap = [(start_cost, start_nodes, start, ())]
    pops = 0
    while heap:
        cost, nseq, lid, tail = heapq.heappop(heap)
        pops += 1
        if pops > max_pops:
            raise RuntimeError("route search budget exhausted; network too large")
        if lid == target:
            return cost, tail
        for nxt in net.successors(lid):
            if nxt in banned_links:
                continue
            if not tail and (start, nxt) in banned_first_moves:
                continue
            lk = net.link(nxt)
            if lk.head in nseq:  # would revisit a node
                continue
            heapq.heappush(
                heap,
                (cost + lk.length_m, nseq + (lk.head,), nxt, tail + (nxt,)),
            )
    return None


def k_shortest_routes(net: Network, origin: str, destination: str, p: int) -> list[Route]:
    """Up to p loop-free routes from origin link to destination link,
    sorted by total length (ties: lexicographic node sequence).

    Returns an empty list when no path exists. The list for p is always a
    prefix of the list for p+1.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    for lid in (origin, destination):
        if lid not in net.links:
            raise KeyError(f"unknown link {lid!r}")

    def nodes_of(path: tuple[str, ...]) -> tuple[str, ...]:
        return (net.link(path[0]).tail,) + tuple(net.link(l).head for l in path)

    o = net.link(origin)
    first = _continuation(
        net, origin, destination, o.length_m, (o.tail, o.head),
        frozenset(), frozenset(),
    )
    if first is None:
        return []
    accepted: list[tuple[float, tuple[str, ...]]] = [(first[0], (origin,) + first[1])]
    candidates: list[tuple[float, tuple[str, ...], tuple[str, ...]]] = []
    seen = {accepted[0][1]}

    while len(accepted) < p:
        _, prev_path = accepted[-1]
        for i in range(len(prev_path)):
            spur = prev_path[i]
            if spur == destination:
                continue  # nothing to deviate after reaching the destination
            root = prev_path[: i + 1]
            banned_moves = frozenset(
                (spur, path[i + 1])
                for _, path in accepted
                if len(path) > i + 1 and path[: i + 1] == root
            )
            res = _continuation(
                net,
                spur,
                destination,
                sum(net.link(l).length_m for l in root),
                nodes_of(root),
                frozenset(root[:-1]),
                banned_moves,
            )
            if res is not None:
                full = root + res[1]
                if full not in seen:
                    seen.add(full)
                    heapq.heappush(candidates, (res[0], nodes_of(full), full))
        if not candidates:
            break
        cost, _, path = heapq.heappop(candidates)
        accepted.append((cost, path))

    return [Route(tuple(net.link(l) for l in path)) for _, path in accepted]
