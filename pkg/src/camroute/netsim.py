"""Deterministic discrete-event network simulator.

Unit-disk radio with collisions (no capture), unacknowledged broadcasts,
acknowledged unicasts under a simplified unslotted CSMA/CA, camera nodes that
discover their two-hop neighborhood, a robot sink that floods position
beacons, and the event-driven image bursts of the three scenarios.
"""

from __future__ import annotations

import hashlib
import heapq
import itertools
import logging
import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .config import MacConfig, RadioModel, ScenarioConfig
from .geometry import CoverSet, FieldOfView, Position, enumerate_cover_sets
from .imaging import Fragment, ImageResult, ImageSpec, ReassemblyBuffer, fragment
from .neighborhood import NeighborRecord, NeighborTable, forwarder_view
from .routing import Router, RoutingHeader
from .selection import (MemberInfo, PathRequirement, SelectionWeights, nb_optimal_paths, score_cover_set,
                        select_cover_set)

log = logging.getLogger(__name__)

BROADCAST = -1

HELLO = "hello"
TABLE = "table"
BEACON = "beacon"
INFO_REQ = "info_req"
INFO_REP = "info_rep"
ACTIVATE = "activate"
DATA = "data"
ACK = "ack"

RECORD_BYTES = 24


class SimulationError(RuntimeError):
    pass


# ---------------------------------------------------------------- engine


class Engine:
    """Event queue ordered by (time, insertion sequence)."""

    def __init__(self, trace: bool = False):
        self.now = 0.0
        self._q: list = []
        self._seq = itertools.count()
        self.processed = 0
        self._stopped = False
        self._hash = hashlib.sha256() if trace else None

    def schedule(self, t: float, fn: Callable, *args) -> None:
        if t < self.now:
            raise SimulationError(f"event scheduled in the past: {t} < {self.now}")
        heapq.heappush(self._q, (t, next(self._seq), fn, args))

    def after(self, dt: float, fn: Callable, *args) -> None:
        self.schedule(self.now + dt, fn, *args)

    def stop(self) -> None:
        self._stopped = True

    def __len__(self) -> int:
        return len(self._q)

    def run_until(self, t_end: float = math.inf) -> dict:
        q = self._q
        self._stopped = False
        while q and q[0][0] <= t_end and not self._stopped:
            t, seq, fn, args = heapq.heappop(q)
            self.now = t
            self.processed += 1
            if self._hash is not None:
                self._hash.update(f"{t!r}|{seq}|{getattr(fn, '__qualname__', fn)}\n".encode())
            fn(*args)
        if not self._stopped and math.isfinite(t_end) and t_end > self.now:
            self.now = t_end
        return {"events_processed": self.processed, "pending": len(q)}

    @property
    def trace_hash(self) -> Optional[str]:
        return None if self._hash is None else self._hash.hexdigest()


# ---------------------------------------------------------------- radio


@dataclass(eq=False)
class Frame:
    kind: str
    src: int
    dst: int
    size: int
    payload: Any = None
    seq: int = 0


class _Rx:
    __slots__ = ("corrupt",)

    def __init__(self):
        self.corrupt = False


@dataclass
class Transmission:
    sender: int
    frame: Frame
    start: float
    end: float
    receptions: list = field(default_factory=list)
    outcomes: dict = field(default_factory=dict)  # receiver -> "received" | "collision"


class Channel:
    """Shared unit-disk medium. Any overlap at a receiver destroys every frame involved there."""

    def __init__(self, engine: Engine, radio: RadioModel, positions: dict[int, tuple[float, float]]):
        self.engine = engine
        self.radio = radio
        self.ids = sorted(positions)
        self.pos = {i: positions[i] for i in self.ids}
        self.neighbors: dict[int, list[int]] = {}
        self._rebuild()
        self.active: dict[int, list[_Rx]] = {i: [] for i in self.ids}
        self.tx_until: dict[int, float] = {i: -1.0 for i in self.ids}
        self.last_rx_start: dict[int, float] = {i: -1.0 for i in self.ids}
        self._activity: dict[int, int] = {i: 0 for i in self.ids}
        self._busy_since: dict[int, float] = {}
        self.busy_time: dict[int, float] = {i: 0.0 for i in self.ids}
        self.receive: dict[int, Callable[[Frame, int], None]] = {}
        self.counters = {
            "frames_sent": 0, "collisions": 0,
            "unicast_sent": 0, "unicast_received": 0, "unicast_collided": 0, "unicast_out_of_range": 0,
            "broadcast_sent": 0, "broadcast_receptions": 0, "broadcast_collided": 0,
        }

    def _rebuild(self) -> None:
        ids = self.ids
        xy = np.array([self.pos[i] for i in ids], dtype=float)
        d2 = ((xy[:, None, :] - xy[None, :, :]) ** 2).sum(-1)
        r2 = self.radio.range ** 2
        within = d2 <= r2
        np.fill_diagonal(within, False)
        self.neighbors = {ids[a]: [ids[b] for b in np.flatnonzero(within[a])] for a in range(len(ids))}

    def move(self, nid: int, xy: tuple[float, float]) -> None:
        self.pos[nid] = xy
        r2 = self.radio.range ** 2
        old = set(self.neighbors[nid])
        new = [j for j in self.ids if j != nid and (self.pos[j][0] - xy[0]) ** 2 + (self.pos[j][1] - xy[1]) ** 2 <= r2]
        self.neighbors[nid] = new
        for j in old - set(new):
            self.neighbors[j].remove(nid)
        for j in set(new) - old:
            self.neighbors[j].append(nid)
            self.neighbors[j].sort()

    def in_range(self, a: int, b: int) -> bool:
        (ax, ay), (bx, by) = self.pos[a], self.pos[b]
        return (ax - bx) ** 2 + (ay - by) ** 2 <= self.radio.range ** 2

    def busy(self, nid: int, since: float) -> bool:
        """Energy seen at ``nid`` now or at any point after ``since``."""
        now = self.engine.now
        return bool(self.active[nid]) or self.tx_until[nid] > now or self.last_rx_start[nid] >= since

    def _up(self, nid: int) -> None:
        if self._activity[nid] == 0:
            self._busy_since[nid] = self.engine.now
        self._activity[nid] += 1

    def _down(self, nid: int) -> None:
        self._activity[nid] -= 1
        if self._activity[nid] == 0:
            self.busy_time[nid] += self.engine.now - self._busy_since.pop(nid)

    def airtime(self, frame: Frame) -> float:
        if frame.kind == ACK:
            return self.radio.ack_bytes * 8 / self.radio.bitrate
        return self.radio.airtime(frame.size)

    def transmit(self, sender: int, frame: Frame, on_end: Optional[Callable[[Transmission], None]] = None) -> Transmission:
        if frame.size <= 0 and frame.kind != ACK:
            raise SimulationError("frame size must be positive")
        now = self.engine.now
        end = now + self.airtime(frame)
        tx = Transmission(sender, frame, now, end)
        c = self.counters
        c["frames_sent"] += 1
        ideal = self.radio.ideal
        # half duplex: our own ongoing receptions are lost
        if not ideal:
            for rx in self.active[sender]:
                if not rx.corrupt:
                    rx.corrupt = True
                    c["collisions"] += 1
        self.tx_until[sender] = end
        self._up(sender)
        for r in self.neighbors[sender]:
            rx = _Rx()
            lst = self.active[r]
            if not ideal and (lst or self.tx_until[r] > now):
                rx.corrupt = True
                c["collisions"] += 1
                for other in lst:
                    if not other.corrupt:
                        other.corrupt = True
                        c["collisions"] += 1
            lst.append(rx)
            self.last_rx_start[r] = now
            self._up(r)
            tx.receptions.append((r, rx))
        if frame.kind != ACK:
            if frame.dst == BROADCAST:
                c["broadcast_sent"] += 1
            else:
                c["unicast_sent"] += 1
                if frame.dst not in self.neighbors[sender]:
                    c["unicast_out_of_range"] += 1
        self.engine.schedule(end, self._end, tx, on_end)
        return tx

    def _end(self, tx: Transmission, on_end) -> None:
        frame = tx.frame
        c = self.counters
        self._down(tx.sender)
        deliveries = []
        for r, rx in tx.receptions:
            self.active[r].remove(rx)
            self._down(r)
            ok = not rx.corrupt
            tx.outcomes[r] = "received" if ok else "collision"
            if frame.kind != ACK:
                if frame.dst == r:
                    c["unicast_received" if ok else "unicast_collided"] += 1
                elif frame.dst == BROADCAST:
                    c["broadcast_receptions" if ok else "broadcast_collided"] += 1
            if ok and (frame.dst == BROADCAST or frame.dst == r):
                deliveries.append(r)
        if on_end is not None:
            on_end(tx)
        for r in deliveries:
            handler = self.receive.get(r)
            if handler is not None:
                handler(frame, tx.sender)


# ---------------------------------------------------------------- MAC


class Mac:
    """Per-node CSMA/CA with binary exponential backoff, ACKs and retries."""

    def __init__(self, node_id: int, engine: Engine, channel: Channel, cfg: MacConfig, rng: random.Random,
                 on_done: Callable[[Frame, bool, str], None]):
        self.id = node_id
        self.engine = engine
        self.channel = channel
        self.cfg = cfg
        self.rng = rng
        self.on_done = on_done
        self.queue: deque[Frame] = deque()
        self.current: Optional[Frame] = None
        self._seq = 0
        self._token = 0
        self._nb = 0
        self._be = cfg.min_backoff_exponent
        self._retries = 0
        self._awaiting_ack = False
        self._last_seen: dict[int, int] = {}
        self.counters = {"queue_drops": 0, "mac_failures": 0, "retransmissions": 0, "access_failures": 0}

    @property
    def backlog(self) -> int:
        return len(self.queue) + (self.current is not None)

    def send(self, frame: Frame) -> bool:
        """Queue a frame; False (and counted) when the queue is full."""
        if len(self.queue) >= self.cfg.queue_limit:
            self.counters["queue_drops"] += 1
            return False
        self._seq += 1
        frame.seq = self._seq
        self.queue.append(frame)
        if self.current is None:
            self._next()
        return True

    def _next(self) -> None:
        if not self.queue:
            self.current = None
            return
        self.current = self.queue.popleft()
        self._retries = 0
        self._attempt()

    def _attempt(self) -> None:
        self._nb = 0
        self._be = self.cfg.min_backoff_exponent
        self._backoff()

    def _backoff(self) -> None:
        slots = self.rng.randrange(1 << self._be)
        start = self.engine.now + slots * self.cfg.backoff_slot
        self._token += 1
        self.engine.schedule(start + self.cfg.cca_duration, self._cca_done, start, self._token)

    def _cca_done(self, cca_start: float, token: int) -> None:
        if token != self._token:
            return
        if self.channel.busy(self.id, cca_start):
            self._nb += 1
            self._be = min(self._be + 1, self.cfg.max_backoff_exponent)
            if self._nb > self.cfg.max_csma_backoffs:
                self.counters["access_failures"] += 1
                self._failed()
            else:
                self._backoff()
            return
        self.channel.transmit(self.id, self.current, self._tx_end)

    def _tx_end(self, tx: Transmission) -> None:
        frame = self.current
        if frame is None or tx.frame is not frame:
            return
        if frame.dst == BROADCAST:
            self._complete(True, "")
            return
        self._awaiting_ack = True
        self._token += 1
        ack_air = self.channel.radio.ack_bytes * 8 / self.channel.radio.bitrate
        wait = 2 * self.cfg.turnaround + ack_air + self.cfg.backoff_slot
        self.engine.after(wait, self._ack_timeout, self._token)

    def on_ack(self, seq: int) -> None:
        if self._awaiting_ack and self.current is not None and self.current.seq == seq:
            self._awaiting_ack = False
            self._token += 1
            self._complete(True, "")

    def _ack_timeout(self, token: int) -> None:
        if token != self._token or not self._awaiting_ack:
            return
        self._awaiting_ack = False
        self._failed()

    def _failed(self) -> None:
        self._retries += 1
        if self._retries > self.cfg.max_retries:
            self.counters["mac_failures"] += 1
            self._complete(False, "mac")
            return
        self.counters["retransmissions"] += 1
        self._attempt()

    def _complete(self, ok: bool, cause: str) -> None:
        frame = self.current
        self.current = None
        self.on_done(frame, ok, cause)
        if self.current is None:
            self._next()

    def accept(self, frame: Frame, sender: int) -> bool:
        """Receive-side filter for unicast data: send the ACK, drop duplicates."""
        self.engine.after(self.cfg.turnaround, self._send_ack, sender, frame.seq)
        if self._last_seen.get(sender) == frame.seq:
            return False
        self._last_seen[sender] = frame.seq
        return True

    def _send_ack(self, dst: int, seq: int) -> None:
        self.channel.transmit(self.id, Frame(ACK, self.id, dst, 0, None, seq))


# ---------------------------------------------------------------- nodes


@dataclass
class DataMeta:
    image_id: int
    source: int
    index: int
    expected: int
    start_time: float
    size: int
    payload: bytes = b""


@dataclass
class DataPacket:
    header: RoutingHeader
    meta: DataMeta


class SensorNode:
    def __init__(self, sim: "Simulation", nid: int, pos: Position, los: float, energy: float):
        self.sim = sim
        self.id = nid
        self.pos = pos
        self.los = los
        self.energy = energy
        cfg = sim.config
        self.record = NeighborRecord(nid, pos, los, cfg.aov, cfg.dov, energy)
        self.table = NeighborTable(nid)
        self.router = Router(nid, pos, self.table, cfg.routing)
        self.mac = Mac(nid, sim.engine, sim.channel, cfg.mac, sim.mac_rng, self._mac_done)
        self.sink_pos: Optional[Position] = None
        self.beacon_seq = -1
        self.cover_sets: list[CoverSet] = []
        self.pending: deque[DataMeta] = deque()
        self.n_paths = nb_optimal_paths(PathRequirement(cfg.capture_rate, cfg.path_factor))
        self.activated: set[int] = set()
        self._requests: dict[int, dict] = {}
        self._delayed = 0

    # --- discovery

    def run_discovery(self, now: float) -> list[tuple[float, str]]:
        """Schedule the HELLO and TABLE broadcasts of the two discovery rounds."""
        cfg = self.sim.config
        rng = self.sim.disc_rng
        t_hello = now + rng.uniform(0.0, cfg.hello_jitter)
        t_table = now + cfg.table_round + rng.uniform(0.0, cfg.hello_jitter)
        self.sim.engine.schedule(t_hello, self._send_hello)
        self.sim.engine.schedule(t_table, self._send_table)
        return [(t_hello, HELLO), (t_table, TABLE)]

    def _send_hello(self) -> None:
        self.mac.send(Frame(HELLO, self.id, BROADCAST, RECORD_BYTES, self.record))

    def _send_table(self) -> None:
        recs = tuple(r for nid, r in sorted(self.table.one_hop.items()) if nid != self.sim.sink_id)
        self.mac.send(Frame(TABLE, self.id, BROADCAST, 4 + RECORD_BYTES * max(1, len(recs)), (self.record,) + recs))

    # --- receive path

    def on_frame(self, frame: Frame, sender: int) -> None:
        kind = frame.kind
        if kind == ACK:
            self.mac.on_ack(frame.seq)
            return
        if frame.dst != BROADCAST and not self.mac.accept(frame, sender):
            return
        if kind == DATA:
            pkt = frame.payload
            self._forward(DataPacket(pkt.header.copy(), pkt.meta), sender)
        elif kind == HELLO:
            self.table.add_neighbor(frame.payload)
            self.router.invalidate()
        elif kind == TABLE:
            recs = frame.payload
            if sender not in self.table.one_hop:
                self.table.add_neighbor(recs[0])
            self.table.add_two_hop(sender, recs[1:])
            self.router.invalidate()
        elif kind == BEACON:
            self._on_beacon(frame.payload, sender)
        elif kind == INFO_REQ:
            self._on_info_request(frame.payload, sender)
        elif kind == INFO_REP:
            self._on_info_reply(frame.payload, sender)
        elif kind == ACTIVATE:
            self._on_activate(frame.payload)

    def _on_beacon(self, payload, sender: int) -> None:
        seq, x, y = payload
        sink = self.sim.sink_id
        if seq <= self.beacon_seq:
            if seq == self.beacon_seq and sender == sink and sink not in self.table.one_hop:
                self.table.add_neighbor(NeighborRecord(sink, Position(x, y)))
                self.router.invalidate()
            return
        self.beacon_seq = seq
        self.sink_pos = Position(x, y)
        had = sink in self.table.one_hop
        if sender == sink:
            self.table.add_neighbor(NeighborRecord(sink, self.sink_pos))
            self.router.invalidate()
        elif had:
            del self.table.one_hop[sink]
            self.router.invalidate()
        cfg = self.sim.config
        self.sim.engine.after(self.sim.beacon_rng.uniform(0.0, cfg.beacon_jitter), self._rebroadcast, payload)

    def _rebroadcast(self, payload) -> None:
        self.mac.send(Frame(BEACON, self.id, BROADCAST, 16, payload))

    # --- forwarding

    def _forward(self, pkt: DataPacket, prev_hop: Optional[int]) -> None:
        header = pkt.header
        if self.sink_pos is not None and header.mode != "perimeter":
            header.final_dest = self.sink_pos
        decision = self.router.decide(header, prev_hop)
        sim = self.sim
        if decision.action == "deliver":
            sim.deliver(pkt.meta)
        elif decision.action == "drop":
            sim.drop(decision.cause, pkt.meta)
        else:
            header.hops += 1
            frame = Frame(DATA, self.id, decision.next_hop, pkt.meta.size, pkt)
            delay = sim.config.proc_delay if decision.lookup else 0.0
            if delay > 0:
                sim.in_flight += 1
                self._delayed += 1
                sim.engine.after(delay, self._enqueue_delayed, frame)
            else:
                self._enqueue(frame)

    def _enqueue_delayed(self, frame: Frame) -> None:
        self.sim.in_flight -= 1
        self._delayed -= 1
        self._enqueue(frame)

    def _enqueue(self, frame: Frame) -> None:
        if self.mac.send(frame):
            self.sim.in_flight += 1
        else:
            self.sim.drop("queue", frame.payload.meta)

    def _mac_done(self, frame: Frame, ok: bool, cause: str) -> None:
        if frame.kind == DATA:
            self.sim.in_flight -= 1
            if not ok:
                self.sim.drop(cause, frame.payload.meta)
        self._feed()

    # --- application: image sources

    def start_burst(self, t: float) -> None:
        cfg = self.sim.config
        for k in range(cfg.images_per_burst):
            start = t + (k / cfg.capture_rate if cfg.capture_rate > 0 else 0.0)
            self.sim.engine.schedule(start, self._new_image)

    def _new_image(self) -> None:
        sim = self.sim
        metas = sim.register_image(self.id, sim.engine.now)
        self.pending.extend(metas)
        sim.in_flight += len(metas)
        self._feed()

    def _feed(self) -> None:
        sim = self.sim
        window = sim.config.source_window
        while self.pending and self.mac.backlog + self._delayed < window:
            meta = self.pending.popleft()
            sim.in_flight -= 1
            if self.sink_pos is None:
                sim.drop("no_sink", meta)
                continue
            header = RoutingHeader(self.sink_pos, sim.sink_id, n_paths=self.n_paths)
            self._forward(DataPacket(header, meta), None)

    # --- application: events and cover-set activation

    def member_info(self, sink_pos: Position) -> MemberInfo:
        view = forwarder_view(self.table, self.pos, sink_pos)
        return MemberInfo(len(view.f), len(view.f2), self.energy, self.sim.config.capture_rate)

    def detect_event(self, event_id: int) -> None:
        sim = self.sim
        cfg = sim.config
        self.activated.add(event_id)
        self.start_burst(sim.engine.now)
        candidates = [cs for cs in self.cover_sets if not cs.is_singleton_owner]
        sim.record_selection(self.id, event_id, None, candidates)
        if not candidates:
            return
        if cfg.scenario == 1:
            self._activate(event_id, candidates[0])
            return
        if self.sink_pos is None:
            self._activate(event_id, select_cover_set(self.id, []))
            return
        members = sorted({m for cs in candidates for m in cs.members})
        req = {"event": event_id, "candidates": candidates, "info": {}, "waiting": set(members), "done": False}
        self._requests[event_id] = req
        for m in request_coverset_info(self.id, members):
            self.mac.send(Frame(INFO_REQ, self.id, m, 16, (event_id, self.sink_pos.x, self.sink_pos.y)))
        sim.engine.after(cfg.reply_timeout, self._selection_deadline, event_id)

    def _on_info_request(self, payload, sender: int) -> None:
        event_id, x, y = payload
        info = self.member_info(Position(x, y))
        self.mac.send(Frame(INFO_REP, self.id, sender, 20, (event_id, info)))

    def _on_info_reply(self, payload, sender: int) -> None:
        event_id, info = payload
        req = self._requests.get(event_id)
        if req is None or req["done"]:
            return
        req["info"][sender] = info
        req["waiting"].discard(sender)
        if not req["waiting"]:
            self._finish_selection(event_id)

    def _selection_deadline(self, event_id: int) -> None:
        req = self._requests.get(event_id)
        if req is not None and not req["done"]:
            self.sim.counters["stale_replies"] += len(req["waiting"])
            self._finish_selection(event_id)

    def _finish_selection(self, event_id: int) -> None:
        req = self._requests[event_id]
        req["done"] = True
        cfg = self.sim.config
        weights = SelectionWeights(cfg.alpha, cfg.beta)
        scored = []
        for cs in req["candidates"]:
            if all(m in req["info"] for m in cs.members):
                scored.append(score_cover_set(cs, req["info"], weights, cfg.path_factor))
            else:
                self.sim.counters["skipped_cover_sets"] += 1
        chosen = select_cover_set(self.id, scored, cfg.energy_floor)
        self._activate(event_id, chosen)

    def _activate(self, event_id: int, cs: CoverSet) -> None:
        self.sim.record_selection(self.id, event_id, cs, None)
        for m in cs.members:
            if m != self.id:
                self.mac.send(Frame(ACTIVATE, self.id, m, 8, event_id))

    def _on_activate(self, event_id: int) -> None:
        if event_id in self.activated:
            return
        self.activated.add(event_id)
        self.start_burst(self.sim.engine.now)


def request_coverset_info(owner: int, members) -> list[int]:
    """Destinations of the INFO-REQUEST unicasts; the owner answers from its own tables."""
    return [m for m in sorted(set(members)) if m != owner]


class SinkNode:
    """Robot sink: floods position beacons, moves along waypoints, reassembles images."""

    def __init__(self, sim: "Simulation", nid: int, start: tuple[float, float]):
        self.sim = sim
        self.id = nid
        self.xy = start
        cfg = sim.config
        self.mac = Mac(nid, sim.engine, sim.channel, cfg.mac, sim.mac_rng, lambda f, ok, c: None)
        self.seq = 0
        self.buffers: dict[int, ReassemblyBuffer] = {}
        self.beacons: list[tuple[float, float, float]] = []
        self._route = [start] + list(cfg.sink_waypoints)

    def position_at(self, t: float) -> tuple[float, float]:
        cfg = self.sim.config
        if cfg.sink_speed <= 0 or len(self._route) < 2:
            return self._route[0]
        travelled = cfg.sink_speed * max(0.0, t - self.sim.beacon_start)
        for (ax, ay), (bx, by) in zip(self._route, self._route[1:]):
            seg = math.hypot(bx - ax, by - ay)
            if travelled <= seg:
                f = travelled / seg if seg > 0 else 0.0
                return (ax + f * (bx - ax), ay + f * (by - ay))
            travelled -= seg
        return self._route[-1]

    def sink_process(self) -> None:
        """Beacon now and schedule the next one."""
        sim = self.sim
        now = sim.engine.now
        xy = self.position_at(now)
        if xy != self.xy:
            self.xy = xy
            sim.channel.move(self.id, xy)
        self.seq += 1
        self.beacons.append((now, xy[0], xy[1]))
        self.mac.send(Frame(BEACON, self.id, BROADCAST, 16, (self.seq, xy[0], xy[1])))
        sim.on_beacon_tick()
        if not sim.finished:
            sim.engine.after(sim.config.beacon_period, self.sink_process)

    def on_frame(self, frame: Frame, sender: int) -> None:
        if frame.kind == ACK:
            self.mac.on_ack(frame.seq)
            return
        if frame.dst != BROADCAST and not self.mac.accept(frame, sender):
            return
        if frame.kind == DATA:
            self.sim.deliver(frame.payload.meta)

    def on_fragment(self, meta: DataMeta) -> None:
        sim = self.sim
        buf = self.buffers.get(meta.image_id)
        if buf is None:
            buf = self.buffers[meta.image_id] = ReassemblyBuffer(meta.image_id, meta.source, meta.expected,
                                                                  meta.start_time, sim.config.display_timer)
        first = buf.first_arrival is None
        before = len(buf.received)
        buf.on_fragment(Fragment(meta.image_id, meta.index, meta.payload, meta.size), sim.engine.now)
        if len(buf.received) > before:
            sim.counters["fragments_delivered"] += 1
        if first:
            sim.engine.schedule(buf.deadline, buf.finalize, buf.deadline)


# ---------------------------------------------------------------- simulation


def deploy(config: ScenarioConfig, seed: int):
    """Uniform random positions, lines of sight and residual energies."""
    rng = np.random.default_rng([seed, 1])
    w, h = config.area
    n = config.node_count
    xs = rng.uniform(0.0, w, n)
    ys = rng.uniform(0.0, h, n)
    los = rng.uniform(0.0, 2 * math.pi, n)
    energy = rng.uniform(config.energy_min, config.energy_max, n)
    return [(float(xs[i]), float(ys[i]), float(los[i]), float(energy[i])) for i in range(n)]


@dataclass
class ImageRecord:
    image_id: int
    source: int
    start_time: float
    expected: int


class Simulation:
    """One run of one scenario for one seed."""

    def __init__(self, config: ScenarioConfig, seed: Optional[int] = None, layout=None, trace: bool = False,
                 radio: Optional[RadioModel] = None):
        self.config = config
        self.seed = config.seed if seed is None else seed
        self.engine = Engine(trace=trace)
        self.mac_rng = random.Random(f"mac-{self.seed}")
        self.disc_rng = random.Random(f"discovery-{self.seed}")
        self.beacon_rng = random.Random(f"beacon-{self.seed}")
        self.event_rng = random.Random(f"events-{self.seed}")
        layout = deploy(config, self.seed) if layout is None else layout
        self.sink_id = len(layout)
        positions = {i: (x, y) for i, (x, y, _, _) in enumerate(layout)}
        positions[self.sink_id] = config.sink_start
        self.channel = Channel(self.engine, radio or config.radio, positions)
        self.nodes = [SensorNode(self, i, Position(x, y), los, e) for i, (x, y, los, e) in enumerate(layout)]
        self.sink = SinkNode(self, self.sink_id, config.sink_start)
        for node in self.nodes:
            self.channel.receive[node.id] = node.on_frame
        self.channel.receive[self.sink_id] = self.sink.on_frame
        self.spec: ImageSpec = config.image_spec
        self.image_bytes = open(config.image_file, "rb").read() if config.image_file else None
        self.images: dict[int, ImageRecord] = {}
        self._image_ids = itertools.count()
        self.in_flight = 0
        self.finished = False
        self.events: list[tuple[float, int]] = []
        self.selections: dict[tuple[int, int], dict] = {}
        self.counters = {"fragments_sent": 0, "fragments_delivered": 0, "stale_replies": 0, "skipped_cover_sets": 0}
        self.drops: dict[str, int] = {}
        self.discovery_end = config.table_round + config.hello_jitter + 0.5
        self.beacon_start = self.discovery_end
        self.last_event = 0.0

    # --- bookkeeping used by nodes

    def register_image(self, source: int, t: float) -> list[DataMeta]:
        iid = next(self._image_ids)
        frags = fragment(self.spec, iid, self.image_bytes)
        self.images[iid] = ImageRecord(iid, source, t, len(frags))
        self.counters["fragments_sent"] += len(frags)
        return [DataMeta(iid, source, f.index, len(frags), t, f.size, f.payload) for f in frags]

    def deliver(self, meta: DataMeta) -> None:
        self.sink.on_fragment(meta)

    def drop(self, cause: Optional[str], meta: DataMeta) -> None:
        cause = cause or "unknown"
        self.drops[cause] = self.drops.get(cause, 0) + 1

    def record_selection(self, node: int, event_id: int, chosen: Optional[CoverSet], candidates) -> None:
        rec = self.selections.setdefault((node, event_id), {"candidates": [], "chosen": None})
        if candidates is not None:
            rec["candidates"] = [cs.members for cs in candidates]
        if chosen is not None:
            rec["chosen"] = chosen.members

    # --- setup phases

    def discover(self) -> None:
        for node in self.nodes:
            node.run_discovery(0.0)
        self.engine.run_until(self.discovery_end)

    def compute_cover_sets(self, cache: Optional[dict] = None) -> None:
        cfg = self.config
        for node in self.nodes:
            if cache is not None and node.id in cache:
                node.cover_sets = cache[node.id]
                continue
            fovs = {node.id: node.record.fov}
            for nid, rec in node.table.one_hop.items():
                if nid != self.sink_id:
                    fovs[nid] = rec.fov
            node.cover_sets = enumerate_cover_sets(node.id, fovs, cfg.max_cover_cardinality, cfg.coverage_spacing)
            if cache is not None:
                cache[node.id] = node.cover_sets

    def choose_events(self) -> list[tuple[float, int]]:
        """Seeded sentries among nodes owning a non-singleton cover set, with staggered event times."""
        cfg = self.config
        eligible = [n.id for n in self.nodes if any(not cs.is_singleton_owner for cs in n.cover_sets)]
        if not eligible:
            return []
        k = max(1, round(cfg.sentry_fraction * len(eligible)))
        sentries = sorted(self.event_rng.sample(eligible, min(k, len(eligible))))
        if cfg.event_count is not None:
            sentries = sorted(self.event_rng.sample(sentries, min(cfg.event_count, len(sentries))))
        t0 = max(cfg.event_start, self.discovery_end + cfg.beacon_jitter * 20)
        return sorted((t0 + self.event_rng.uniform(0.0, cfg.event_window), s) for s in sentries)

    def schedule_events(self, events: list[tuple[float, int]]) -> None:
        self.events = events
        for eid, (t, nid) in enumerate(events):
            self.engine.schedule(t, self.nodes[nid].detect_event, eid)
        self.last_event = max((t for t, _ in events), default=0.0)

    def on_beacon_tick(self) -> None:
        now = self.engine.now
        if now <= self.last_event or self.in_flight > 0:
            return
        if any(n.pending or n.mac.backlog for n in self.nodes):
            return
        open_buffers = [b for b in self.sink.buffers.values() if b.finalized_at is None]
        if open_buffers:
            return
        self.finished = True

    def run(self, events: Optional[list[tuple[float, int]]] = None, cover_cache: Optional[dict] = None,
            horizon: Optional[float] = None) -> dict:
        self.discover()
        self.compute_cover_sets(cover_cache)
        self.engine.schedule(self.beacon_start, self.sink.sink_process)
        self.schedule_events(self.choose_events() if events is None else events)
        cfg = self.config
        if horizon is None:
            burst = cfg.images_per_burst / cfg.capture_rate if cfg.capture_rate > 0 else 0.0
            horizon = self.last_event + burst + 4 * cfg.display_timer + 120.0
        stats = self.engine.run_until(horizon)
        for buf in self.sink.buffers.values():
            if buf.finalized_at is None:
                buf.finalize(self.engine.now)
        stats.update(self.channel.counters)
        return stats

    def image_results(self) -> list[ImageResult]:
        out = []
        for iid, rec in sorted(self.images.items()):
            buf = self.sink.buffers.get(iid)
            if buf is None:
                out.append(ImageResult(iid, rec.source, rec.expected, 0, rec.start_time, None, None))
            else:
                out.append(buf.result())
        return out
