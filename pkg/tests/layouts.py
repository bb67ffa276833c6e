"""Hand-built layouts shared by the tests: the cover-set layout and the forwarder layout."""

import math

from camroute.geometry import FieldOfView, Position
from camroute.neighborhood import NeighborRecord, NeighborTable

V, V1, V2, V3, V4, V5, V6 = 0, 1, 2, 3, 4, 5, 6


def fov(x, y, los):
    return FieldOfView(Position(x, y), los, math.pi / 3, 125.0)


# V looks along +x. V1 sits 20 m behind it and sees everything up to x = 105;
# V2 and V3 look down/up onto the far strip from either side. Only all three
# together cover V's triangle. Every member is within 150 m of V.
COVER_LAYOUT = {
    V: fov(0.0, 0.0, 0.0),
    V1: fov(-20.0, 0.0, 0.0),
    V2: fov(110.0, 100.0, -math.pi / 2),
    V3: fov(110.0, -100.0, math.pi / 2),
}

# V4 stands in for V1, V5/V6 for V2/V3.
COVER_EXTENDED = dict(COVER_LAYOUT)
COVER_EXTENDED.update({
    V4: fov(-20.0, 5.0, 0.0),
    V5: fov(112.0, 98.0, -math.pi / 2),
    V6: fov(112.0, -98.0, math.pi / 2),
})


# Forwarder layout: v sends toward a sink far to the east. Relays w and u are
# both closer; m is reachable only through w, n only through u, and m is the
# closer of the two to the sink.
RELAY_SINK = Position(1000.0, 0.0)
v, w, u, m, n, b = 10, 11, 12, 13, 14, 15
RELAY_POS = {
    v: Position(0.0, 0.0),
    w: Position(100.0, 50.0),
    u: Position(100.0, -50.0),
    m: Position(210.0, 90.0),
    n: Position(200.0, -80.0),
    b: Position(-100.0, 0.0),
}


def unit_disk_tables(positions, radius=150.0):
    """Complete, collision-free discovery result for a unit-disk radio."""
    recs = {i: NeighborRecord(i, p) for i, p in positions.items()}
    nbrs = {i: [j for j in positions if j != i and positions[i].distance(positions[j]) <= radius] for i in positions}
    tables = {}
    for i in positions:
        t = NeighborTable(i)
        for j in nbrs[i]:
            t.add_neighbor(recs[j])
        tables[i] = t
    for i in positions:
        for j in nbrs[i]:
            tables[i].add_two_hop(j, [recs[k] for k in nbrs[j]])
    return tables


def relay_table():
    return unit_disk_tables(RELAY_POS)[v]


def random_connected(rng, n, side=400.0, radius=150.0):
    """Uniform points in a square, redrawn until the unit-disk graph is connected."""
    while True:
        pts = {i: (rng.uniform(0, side), rng.uniform(0, side)) for i in range(n)}
        nbrs = {i: [j for j in pts if j != i and math.dist(pts[i], pts[j]) <= radius] for i in pts}
        seen, stack = {0}, [0]
        while stack:
            for j in nbrs[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        if len(seen) == n:
            return pts
