"""Cover-set scoring (two-hop ratio, relay ratio, transmission quality) and selection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .geometry import CoverSet, CoverSetScore


class IncompleteInformation(KeyError):
    pass


@dataclass(frozen=True)
class SelectionWeights:
    alpha: float = 0.5
    beta: float = 0.5

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or abs(self.alpha + self.beta - 1.0) > 1e-9:
            raise ValueError(f"weights must be non-negative and sum to 1, got alpha={self.alpha}, beta={self.beta}")


@dataclass(frozen=True)
class PathRequirement:
    capture_rate: float
    path_factor: float = 1.0

    def __post_init__(self):
        if self.capture_rate < 0 or not self.path_factor > 0:
            raise ValueError("capture_rate must be >= 0 and path_factor > 0")


@dataclass(frozen=True)
class MemberInfo:
    """What a cover-set member reports back: forwarder counts toward the sink, energy, capture rate."""

    f_size: int
    f2_size: int
    residual_energy: float
    capture_rate: float


def nb_optimal_paths(req: PathRequirement) -> int:
    # float noise must not push an exact product over the next integer
    need = math.ceil(round(req.capture_rate * req.path_factor, 12))
    return max(1, need)


def _require(coverset: CoverSet, *maps: Mapping) -> None:
    for m in maps:
        missing = [w for w in coverset.members if w not in m]
        if missing:
            raise IncompleteInformation(f"no data for cover-set members {missing}")


def r_2hop(coverset: CoverSet, f2_sizes: Mapping[int, int], paths: Mapping[int, int]) -> float:
    _require(coverset, f2_sizes, paths)
    total = sum(f2_sizes[w] / paths[w] for w in coverset.members)
    return total / len(coverset.members)


def r_relay(coverset: CoverSet, f_sizes: Mapping[int, int], f2_sizes: Mapping[int, int]) -> float:
    _require(coverset, f_sizes, f2_sizes)
    total = 0.0
    for w in coverset.members:
        if f2_sizes[w]:
            total += f_sizes[w] / f2_sizes[w]
    return total / len(coverset.members)


def tq(weights: SelectionWeights, r2: float, rr: float) -> float:
    return weights.alpha * r2 + weights.beta * rr


def score_cover_set(coverset: CoverSet, info: Mapping[int, MemberInfo], weights: SelectionWeights,
                    path_factor: float = 1.0) -> CoverSet:
    """Return a copy of ``coverset`` carrying its score. Raises if any member is unreported."""
    _require(coverset, info)
    f = {w: info[w].f_size for w in coverset.members}
    f2 = {w: info[w].f2_size for w in coverset.members}
    paths = {w: nb_optimal_paths(PathRequirement(info[w].capture_rate, path_factor)) for w in coverset.members}
    r2 = r_2hop(coverset, f2, paths)
    rr = r_relay(coverset, f, f2)
    energy = min(info[w].residual_energy for w in coverset.members)
    return CoverSet(coverset.owner, coverset.members, CoverSetScore(r2, rr, tq(weights, r2, rr), energy))


def select_cover_set(owner: int, candidates: Sequence[CoverSet], energy_floor: float = 0.0) -> CoverSet:
    """Highest-TQ scored candidate above the energy floor.

    Ties go to the higher minimum residual energy, then the smaller set, then
    the lexicographically smallest member ids. Falls back to ``{owner}``.
    """
    eligible = [c for c in candidates if c.score is not None and c.score.min_residual_energy >= energy_floor]
    if not eligible:
        return CoverSet(owner, (owner,))
    return min(eligible, key=lambda c: (-c.score.tq, -c.score.min_residual_energy, len(c.members), c.members))
