"""Camera field-of-view triangles, the coverage predicate and cover-set enumeration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Optional

import numpy as np

from . import kernels


class InvalidGeometry(ValueError):
    pass


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    def distance(self, other: "Position") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def dist2(self, other: "Position") -> float:
        dx = self.x - other.x
        dy = self.y - other.y
        return dx * dx + dy * dy

    def __add__(self, other: "Position") -> "Position":
        return Position(self.x + other.x, self.y + other.y)


@dataclass(frozen=True)
class FieldOfView:
    """Isosceles viewing triangle with apex at the camera.

    ``angle_of_view`` is the full aperture; ``depth_of_view`` is the distance
    from the apex to the far edge, measured along the line of sight.
    """

    apex: Position
    line_of_sight: float
    angle_of_view: float = math.pi / 3
    depth_of_view: float = 125.0


def _check(fov: FieldOfView) -> None:
    if not (0.0 < fov.angle_of_view < math.pi):
        raise InvalidGeometry(f"angle of view must lie in (0, pi), got {fov.angle_of_view!r}")
    if not fov.depth_of_view > 0.0:
        raise InvalidGeometry(f"depth of view must be positive, got {fov.depth_of_view!r}")
    if not (math.isfinite(fov.apex.x) and math.isfinite(fov.apex.y) and math.isfinite(fov.line_of_sight)):
        raise InvalidGeometry("non-finite field of view")


def vertex_offsets(fov: FieldOfView) -> tuple[tuple[float, float], tuple[float, float]]:
    """Offsets of the far vertices b and c from the apex (independent of the apex)."""
    _check(fov)
    half = fov.angle_of_view / 2.0
    slant = fov.depth_of_view / math.cos(half)
    b = (slant * math.cos(fov.line_of_sight + half), slant * math.sin(fov.line_of_sight + half))
    c = (slant * math.cos(fov.line_of_sight - half), slant * math.sin(fov.line_of_sight - half))
    return b, c


def fov_triangle(fov: FieldOfView) -> tuple[Position, Position, Position]:
    (bx, by), (cx, cy) = vertex_offsets(fov)
    p = fov.apex
    return p, Position(p.x + bx, p.y + by), Position(p.x + cx, p.y + cy)


def triangle_coords(fov: FieldOfView) -> tuple[float, float, float, float, float, float]:
    p, b, c = fov_triangle(fov)
    return (p.x, p.y, b.x, b.y, c.x, c.y)


def covers_point(fov: FieldOfView, q: Position) -> bool:
    mask = kernels.triangle_mask(np.array([q.x]), np.array([q.y]), triangle_coords(fov))
    return bool(mask[0])


def sample_points(target: FieldOfView, sample_spacing: float) -> tuple[np.ndarray, np.ndarray]:
    """Vertices, centroid and the origin-anchored lattice points inside the triangle.

    The lattice is anchored at (0, 0), so halving the spacing yields a superset
    of the points.
    """
    if not sample_spacing > 0:
        raise ValueError("sample_spacing must be positive")
    tri = triangle_coords(target)
    xs_v = [tri[0], tri[2], tri[4]]
    ys_v = [tri[1], tri[3], tri[5]]
    gx = sum(xs_v) / 3.0
    gy = sum(ys_v) / 3.0
    px = list(xs_v) + [gx]
    py = list(ys_v) + [gy]
    if math.isfinite(sample_spacing):
        i0 = math.ceil(min(xs_v) / sample_spacing)
        i1 = math.floor(max(xs_v) / sample_spacing)
        j0 = math.ceil(min(ys_v) / sample_spacing)
        j1 = math.floor(max(ys_v) / sample_spacing)
        if i1 >= i0 and j1 >= j0:
            ii, jj = np.meshgrid(np.arange(i0, i1 + 1), np.arange(j0, j1 + 1), indexing="ij")
            lx = (ii * sample_spacing).ravel().astype(float)
            ly = (jj * sample_spacing).ravel().astype(float)
            inside = kernels.triangle_mask(lx, ly, tri).astype(bool)
            px.extend(lx[inside].tolist())
            py.extend(ly[inside].tolist())
    return np.asarray(px, dtype=float), np.asarray(py, dtype=float)


def covers_fov(candidates, target: FieldOfView, sample_spacing: float = 5.0) -> bool:
    candidates = list(candidates)
    if not candidates:
        return False
    px, py = sample_points(target, sample_spacing)
    tris = np.array([triangle_coords(f) for f in candidates], dtype=float)
    cov = kernels.coverage_matrix(px, py, tris)
    return bool(cov.any(axis=0).all())


@dataclass(frozen=True)
class CoverSetScore:
    r2hop: float
    rrelay: float
    tq: float
    min_residual_energy: float


@dataclass(frozen=True)
class CoverSet:
    owner: int
    members: tuple[int, ...]
    score: Optional[CoverSetScore] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.members:
            raise ValueError("a cover set needs at least one member")

    def __len__(self) -> int:
        return len(self.members)

    @property
    def is_singleton_owner(self) -> bool:
        return self.members == (self.owner,)


def coverage_bitmasks(target: FieldOfView, fovs: Mapping[int, FieldOfView], sample_spacing: float) -> tuple[dict[int, int], int]:
    """Per-node bitmask over the target's sample points, plus the all-covered mask."""
    px, py = sample_points(target, sample_spacing)
    ids = sorted(fovs)
    full = (1 << len(px)) - 1
    if not ids:
        return {}, full
    tris = np.array([triangle_coords(fovs[i]) for i in ids], dtype=float)
    cov = kernels.coverage_matrix(px, py, tris)
    masks = {}
    for row, nid in zip(cov, ids):
        # little-endian bit order: point k -> bit k
        masks[nid] = int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little")
    return masks, full


def enumerate_cover_sets(owner: int, fovs: Mapping[int, FieldOfView], max_cardinality: int = 4,
                         sample_spacing: float = 5.0) -> list[CoverSet]:
    """All minimal cover sets of ``owner`` with at most ``max_cardinality`` members.

    ``fovs`` maps node id to field of view and must contain the owner; every
    other entry is a candidate member.
    """
    if max_cardinality < 1:
        raise ValueError("max_cardinality must be >= 1")
    target = fovs[owner]
    others = {nid: f for nid, f in fovs.items() if nid != owner}
    masks, full = coverage_bitmasks(target, others, sample_spacing)
    useful = sorted(nid for nid, m in masks.items() if m)

    found: list[frozenset[int]] = []
    result = [CoverSet(owner, (owner,))]
    for k in range(1, max_cardinality + 1):
        batch = []
        for combo in combinations(useful, k):
            acc = 0
            for nid in combo:
                acc |= masks[nid]
            if acc != full:
                continue
            s = frozenset(combo)
            if any(f <= s for f in found):
                continue
            batch.append(combo)
        found.extend(frozenset(c) for c in batch)
        result.extend(CoverSet(owner, c) for c in batch)
    result.sort(key=lambda cs: (len(cs.members), cs.members))
    return result
