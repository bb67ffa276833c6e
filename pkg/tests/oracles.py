"""Independent reference computations. Nothing here calls the code under test's algorithms."""

import itertools
import math
from fractions import Fraction

import numpy as np


# ---- geometry

def triangle_vertices(apex, los, aov, dov):
    """Far vertices built from the unit bisector and its normal (not from slant rays)."""
    ux, uy = math.cos(los), math.sin(los)
    nx, ny = -uy, ux
    half_w = dov * math.tan(aov / 2)
    fx, fy = apex[0] + dov * ux, apex[1] + dov * uy
    return np.array([apex, (fx + half_w * nx, fy + half_w * ny), (fx - half_w * nx, fy - half_w * ny)], dtype=float)


def barycentric_inside(tri, pts, tol=1e-9):
    tri = np.asarray(tri, dtype=float)
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    a = np.array([[tri[0, 0], tri[1, 0], tri[2, 0]], [tri[0, 1], tri[1, 1], tri[2, 1]], [1.0, 1.0, 1.0]])
    lam = np.linalg.solve(a, np.vstack([pts.T, np.ones(len(pts))]))
    return (lam >= -tol).all(axis=0)


def boundary_distance(tri, pts):
    """Distance of each point to the nearest triangle edge (for excluding ambiguous points)."""
    tri = np.asarray(tri, dtype=float)
    out = np.full(len(pts), np.inf)
    for i in range(3):
        p, q = tri[i], tri[(i + 1) % 3]
        d = q - p
        t = np.clip(((pts - p) @ d) / (d @ d), 0.0, 1.0)
        proj = p + t[:, None] * d
        out = np.minimum(out, np.hypot(*(pts - proj).T))
    return out


def dense_samples(tri, pitch=1.0):
    tri = np.asarray(tri, dtype=float)
    xs = np.arange(math.floor(tri[:, 0].min()), tri[:, 0].max() + pitch, pitch)
    ys = np.arange(math.floor(tri[:, 1].min()), tri[:, 1].max() + pitch, pitch)
    grid = np.array([(x, y) for x in xs for y in ys])
    grid = grid[barycentric_inside(tri, grid)]
    return np.vstack([grid, tri, tri.mean(axis=0)])


def minimal_cover_sets(target_tri, candidate_tris, max_card=4, pitch=1.0):
    pts = dense_samples(target_tri, pitch)
    cov = {k: barycentric_inside(t, pts, tol=1e-7) for k, t in candidate_tris.items()}
    found = []
    for k in range(1, max_card + 1):
        for combo in itertools.combinations(sorted(cov), k):
            if np.logical_or.reduce([cov[i] for i in combo]).all() and not any(set(f) <= set(combo) for f in found):
                found.append(combo)
    return found


# ---- neighborhoods

def unit_disk_neighbors(pos, radius):
    return {i: {j for j in pos if j != i and math.dist(pos[i], pos[j]) <= radius} for i in pos}


def brute_forwarders(pos, nbrs, v, sink):
    dv = math.dist(pos[v], sink)
    return {u for u in nbrs[v] if math.dist(pos[u], sink) < dv}


def brute_forwarders2(pos, nbrs, v, u, sink):
    du = math.dist(pos[u], sink)
    return {k for k in nbrs[u] if k != v and math.dist(pos[k], sink) < du}


def brute_f2_union(pos, nbrs, v, sink):
    out = set()
    for u in brute_forwarders(pos, nbrs, v, sink):
        out |= brute_forwarders2(pos, nbrs, v, u, sink)
    out.discard(v)
    return out


def exact_r2hop(members, f2, paths):
    return sum(Fraction(f2[w], paths[w]) for w in members) / len(members)


def exact_rrelay(members, f, f2):
    return sum((Fraction(f[w], f2[w]) if f2[w] else Fraction(0)) for w in members) / len(members)


# ---- planar graphs

def segments_cross(p1, p2, q1, q2):
    """Proper crossing of two segments that share no endpoint."""
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    return d1 * d2 < 0 and d3 * d4 < 0


def crossing_edges(pos, edges):
    edges = sorted({tuple(sorted(e)) for e in edges})
    bad = []
    for (a, b), (c, d) in itertools.combinations(edges, 2):
        if len({a, b, c, d}) < 4:
            continue
        if segments_cross(pos[a], pos[b], pos[c], pos[d]):
            bad.append(((a, b), (c, d)))
    return bad


def brute_gabriel(pos, nbrs, a):
    keep = set()
    for b in nbrs[a]:
        dab = math.dist(pos[a], pos[b]) ** 2
        if not any(math.dist(pos[a], pos[w]) ** 2 + math.dist(pos[b], pos[w]) ** 2 < dab for w in nbrs[a] if w != b):
            keep.add(b)
    return keep


def connected(nbrs, start):
    seen = {start}
    stack = [start]
    while stack:
        for j in nbrs[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return seen


# ---- statistics

def sign_test_p(wins, losses):
    """One-sided exact binomial sign test, ties dropped."""
    n = wins + losses
    if n == 0:
        return 1.0
    return sum(math.comb(n, k) for k in range(wins, n + 1)) / 2 ** n
