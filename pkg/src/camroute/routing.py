"""GPSR (greedy + perimeter on a Gabriel graph) and the two-hop T-GPSR extension.

All forwarding logic is a pure function of a node's tables and the packet
header, so the same code drives both the simulator and the offline routing
walks used in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

import numpy as np

from . import kernels
from .geometry import Position
from .neighborhood import ForwarderView, NeighborRecord, NeighborTable, forwarder_view

TWO_HOP = "two_hop_greedy"
GREEDY = "greedy"
PERIMETER = "perimeter"

GPSR = "gpsr"
TGPSR = "tgpsr"

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PerimeterState:
    entry_point: Position
    face_point: Position
    first_edge: tuple[int, int]


@dataclass
class RoutingHeader:
    final_dest: Position
    sink_id: int
    mode: str = GREEDY
    temp_dest: Optional[int] = None
    temp_dest_pos: Optional[Position] = None
    relay: Optional[int] = None
    perimeter: Optional[PerimeterState] = None
    n_paths: int = 1
    hops: int = 0

    def copy(self) -> "RoutingHeader":
        return replace(self)


@dataclass(frozen=True)
class Decision:
    action: str  # "send" | "deliver" | "drop"
    next_hop: Optional[int] = None
    cause: Optional[str] = None
    lookup: bool = True  # False when a relay forwarded without a next-hop search


@dataclass(frozen=True)
class PlanarNeighborSet:
    owner: int
    planar_neighbors: frozenset[int]


def gabriel_planarize(owner_pos: Position, one_hop: Iterable[NeighborRecord], owner: int = -1) -> PlanarNeighborSet:
    recs = sorted(one_hop, key=lambda r: r.id)
    if not recs:
        return PlanarNeighborSet(owner, frozenset())
    nx = np.array([r.position.x for r in recs])
    ny = np.array([r.position.y for r in recs])
    keep = kernels.gabriel_mask(owner_pos.x, owner_pos.y, nx, ny)
    return PlanarNeighborSet(owner, frozenset(r.id for r, k in zip(recs, keep) if k))


def greedy_next_hop(self_pos: Position, one_hop: Iterable[NeighborRecord], final_dest: Position) -> Optional[int]:
    best = None
    best_d = self_pos.dist2(final_dest)
    for rec in one_hop:
        d = rec.position.dist2(final_dest)
        if d < best_d or (best is not None and d == best_d and rec.id < best):
            best, best_d = rec.id, d
    return best


def _bearing(a: Position, b: Position) -> float:
    return math.atan2(b.y - a.y, b.x - a.x)


def _right_hand(self_pos: Position, positions: dict[int, Position], candidates: Iterable[int], ref: float) -> Optional[int]:
    """First neighbor counterclockwise from bearing ``ref``; an edge exactly on ``ref`` comes last."""
    best = None
    best_a = None
    for nid in candidates:
        a = (_bearing(self_pos, positions[nid]) - ref) % TWO_PI
        if a <= 1e-12:
            a = TWO_PI
        if best is None or a < best_a or (a == best_a and nid < best):
            best, best_a = nid, a
    return best


def _intersect(p1: Position, p2: Position, q1: Position, q2: Position) -> Optional[Position]:
    """Intersection point of closed segments p1p2 and q1q2, None when they miss or are parallel."""
    rx, ry = p2.x - p1.x, p2.y - p1.y
    sx, sy = q2.x - q1.x, q2.y - q1.y
    den = rx * sy - ry * sx
    if abs(den) < 1e-12:
        return None
    qpx, qpy = q1.x - p1.x, q1.y - p1.y
    t = (qpx * sy - qpy * sx) / den
    u = (qpx * ry - qpy * rx) / den
    if -1e-12 <= t <= 1 + 1e-12 and -1e-12 <= u <= 1 + 1e-12:
        return Position(p1.x + t * rx, p1.y + t * ry)
    return None


def perimeter_next_hop(self_id: int, self_pos: Position, positions: dict[int, Position], planar: PlanarNeighborSet,
                       header: RoutingHeader, prev_hop: Optional[int]) -> Decision:
    """One right-hand-rule step on the planar graph, with GPSR face changes.

    Enters perimeter mode when the header is not already in it. The caller
    handles the recovery test (closer than the entry point) beforehand.
    """
    nbrs = sorted(planar.planar_neighbors)
    if not nbrs:
        return Decision("drop", cause="routing")
    dest = header.final_dest
    entering = header.mode != PERIMETER or header.perimeter is None
    if entering:
        state = PerimeterState(self_pos, self_pos, (self_id, -1))
        ref = _bearing(self_pos, dest)
    else:
        state = header.perimeter
        if prev_hop is not None and prev_hop in positions:
            ref = _bearing(self_pos, positions[prev_hop])
        else:
            ref = _bearing(self_pos, dest)
    nxt = _right_hand(self_pos, positions, nbrs, ref)
    lf = state.face_point
    changed = False
    for _ in range(len(nbrs) + 1):
        hit = _intersect(self_pos, positions[nxt], state.entry_point, dest)
        if hit is None or hit.dist2(dest) >= lf.dist2(dest) - 1e-9:
            break
        lf = hit
        changed = True
        nxt = _right_hand(self_pos, positions, nbrs, _bearing(self_pos, positions[nxt]))
    edge = (self_id, nxt)
    if not entering and not changed and edge == state.first_edge:
        return Decision("drop", cause="routing")
    first = edge if (entering or changed) else state.first_edge
    header.mode = PERIMETER
    header.perimeter = PerimeterState(state.entry_point, lf, first)
    header.temp_dest = header.temp_dest_pos = header.relay = None
    return Decision("send", nxt)


def tgpsr_select_paths(view: ForwarderView, table: NeighborTable, final_dest: Position, n_paths: int) -> list[tuple[int, int]]:
    """(relay, temporary destination) pairs, closest temporary destinations first.

    Each temporary destination is reached through a relay in F(v) that knows
    it; relays not yet used by an earlier pair are preferred.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    relays_of: dict[int, list[int]] = {}
    for u, ks in view.f2_by_relay.items():
        for k in ks:
            relays_of.setdefault(k, []).append(u)
    if not relays_of:
        return []

    def pos(nid):
        return table.position_of(nid)

    ranked = sorted(relays_of, key=lambda k: (pos(k).dist2(final_dest), k))
    used: set[int] = set()
    pairs = []
    for m in ranked:
        if len(pairs) >= n_paths:
            break
        options = sorted(relays_of[m], key=lambda u: (u in used, table.one_hop[u].position.dist2(final_dest), u))
        u = options[0]
        used.add(u)
        pairs.append((u, m))
    return pairs


class Router:
    """Per-node forwarding state: tables, planar neighbors and the T-GPSR path cache."""

    def __init__(self, node_id: int, position: Position, table: NeighborTable, protocol: str = GPSR, max_hops: int = 255):
        if protocol not in (GPSR, TGPSR):
            raise ValueError(f"unknown routing protocol {protocol!r}")
        self.id = node_id
        self.pos = position
        self.table = table
        self.protocol = protocol
        self.max_hops = max_hops
        self._planar: Optional[PlanarNeighborSet] = None
        self._view: Optional[ForwarderView] = None
        self._paths: dict[int, list[tuple[int, int]]] = {}
        self._rr: dict[int, int] = {}

    def invalidate(self) -> None:
        """Call after the one-hop table changed."""
        self._planar = None
        self._view = None
        self._paths.clear()

    @property
    def planar(self) -> PlanarNeighborSet:
        if self._planar is None:
            self._planar = gabriel_planarize(self.pos, self.table.one_hop.values(), self.id)
        return self._planar

    def view(self, sink_pos: Position) -> ForwarderView:
        if self._view is None or self._view.sink_pos != sink_pos:
            self._view = forwarder_view(self.table, self.pos, sink_pos)
            self._paths.clear()
            self._rr.clear()
        return self._view

    def paths(self, sink_pos: Position, n_paths: int) -> list[tuple[int, int]]:
        view = self.view(sink_pos)
        got = self._paths.get(n_paths)
        if got is None:
            got = self._paths[n_paths] = tgpsr_select_paths(view, self.table, sink_pos, n_paths)
        return got

    def _positions(self) -> dict[int, Position]:
        return {nid: rec.position for nid, rec in self.table.one_hop.items()}

    def _greedy_family(self, header: RoutingHeader) -> Decision:
        dest = header.final_dest
        if self.protocol == TGPSR:
            pairs = self.paths(dest, header.n_paths)
            if pairs:
                k = self._rr.get(header.n_paths, 0)
                self._rr[header.n_paths] = k + 1
                relay, temp = pairs[k % len(pairs)]
                header.mode = TWO_HOP
                header.relay = relay
                header.temp_dest = temp
                header.temp_dest_pos = self.table.position_of(temp)
                header.perimeter = None
                return Decision("send", relay)
        nh = greedy_next_hop(self.pos, self.table.one_hop.values(), dest)
        if nh is not None:
            header.mode = GREEDY
            header.temp_dest = header.temp_dest_pos = header.relay = None
            header.perimeter = None
            return Decision("send", nh)
        return perimeter_next_hop(self.id, self.pos, self._positions(), self.planar, header, None)

    def decide(self, header: RoutingHeader, prev_hop: Optional[int] = None) -> Decision:
        """Forwarding decision for a packet held by this node; mutates ``header`` in place."""
        if self.id == header.sink_id:
            return Decision("deliver", lookup=False)
        if header.hops >= self.max_hops:
            return Decision("drop", cause="ttl")
        if header.mode == TWO_HOP and header.relay == self.id and header.temp_dest in self.table.one_hop:
            return Decision("send", header.temp_dest, lookup=False)
        if header.sink_id in self.table.one_hop:
            header.mode = GREEDY
            header.temp_dest = header.temp_dest_pos = header.relay = None
            header.perimeter = None
            return Decision("send", header.sink_id)
        if header.mode == PERIMETER and header.perimeter is not None:
            dest = header.final_dest
            if self.pos.dist2(dest) < header.perimeter.entry_point.dist2(dest):
                header.perimeter = None
                return self._greedy_family(header)
            return perimeter_next_hop(self.id, self.pos, self._positions(), self.planar, header, prev_hop)
        return self._greedy_family(header)


def route_packet(routers: dict[int, Router], src: int, sink_id: int, sink_pos: Position, n_paths: int = 1,
                 max_steps: int = 10_000) -> tuple[bool, list[int], Optional[str], list[RoutingHeader]]:
    """Carry one packet hop by hop over a lossless medium.

    Returns (delivered, node path, drop cause, header snapshot taken on arrival at each hop).
    """
    header = RoutingHeader(sink_pos, sink_id, n_paths=n_paths)
    node, prev = src, None
    path = [src]
    seen = []
    for _ in range(max_steps):
        seen.append(header.copy())
        d = routers[node].decide(header, prev)
        if d.action == "deliver":
            return True, path, None, seen
        if d.action == "drop":
            return False, path, d.cause, seen
        header.hops += 1
        prev, node = node, d.next_hop
        path.append(node)
    return False, path, "steps", seen
