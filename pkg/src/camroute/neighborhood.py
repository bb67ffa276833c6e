"""One- and two-hop neighbor tables and the potential-forwarder sets toward the sink."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .geometry import FieldOfView, Position


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class NeighborRecord:
    id: int
    position: Position
    line_of_sight: float = 0.0
    angle_of_view: float = math.pi / 3
    depth_of_view: float = 125.0
    residual_energy: float = 100.0

    @property
    def fov(self) -> FieldOfView:
        return FieldOfView(self.position, self.line_of_sight, self.angle_of_view, self.depth_of_view)


@dataclass
class NeighborTable:
    owner: int
    one_hop: dict[int, NeighborRecord] = field(default_factory=dict)
    two_hop: dict[int, dict[int, NeighborRecord]] = field(default_factory=dict)

    def add_neighbor(self, rec: NeighborRecord) -> None:
        if rec.id == self.owner:
            return
        self.one_hop[rec.id] = rec

    def add_two_hop(self, via: int, records) -> None:
        """Store ``via``'s advertised one-hop table (minus ourselves)."""
        if via not in self.one_hop:
            return
        self.two_hop[via] = {r.id: r for r in records if r.id != self.owner and r.id != via}

    def position_of(self, nid: int) -> Position | None:
        rec = self.one_hop.get(nid)
        if rec is not None:
            return rec.position
        for recs in self.two_hop.values():
            if nid in recs:
                return recs[nid].position
        return None


def forwarders(table: NeighborTable, self_pos: Position, sink_pos: Position) -> set[int]:
    own = self_pos.dist2(sink_pos)
    return {nid for nid, rec in table.one_hop.items() if rec.position.dist2(sink_pos) < own}


def forwarders2(table: NeighborTable, u: int, sink_pos: Position, self_pos: Position) -> set[int]:
    """F2(v, u): neighbors of forwarder u that are strictly closer to the sink than u."""
    if u not in forwarders(table, self_pos, sink_pos):
        raise PreconditionError(f"node {u} is not a potential forwarder of node {table.owner}")
    u_d = table.one_hop[u].position.dist2(sink_pos)
    recs = table.two_hop.get(u, {})
    return {k for k, rec in recs.items() if k != table.owner and rec.position.dist2(sink_pos) < u_d}


def forwarders2_union(table: NeighborTable, self_pos: Position, sink_pos: Position) -> set[int]:
    out: set[int] = set()
    for u in forwarders(table, self_pos, sink_pos):
        out |= forwarders2(table, u, sink_pos, self_pos)
    out.discard(table.owner)
    return out


@dataclass
class ForwarderView:
    """F(v) and F2(v, u) for one cached sink position."""

    sink_pos: Position
    f: list[int]
    f2_by_relay: dict[int, set[int]]

    @property
    def f2(self) -> set[int]:
        out: set[int] = set()
        for s in self.f2_by_relay.values():
            out |= s
        return out


def forwarder_view(table: NeighborTable, self_pos: Position, sink_pos: Position) -> ForwarderView:
    f = sorted(forwarders(table, self_pos, sink_pos))
    return ForwarderView(sink_pos, f, {u: forwarders2(table, u, sink_pos, self_pos) for u in f})
