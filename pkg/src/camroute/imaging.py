"""Images as fragment streams: fragmentation, reassembly under a display timer, quality classes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

COMPLETE = "complete"
USABLE = "usable"
UNUSABLE = "unusable"

USABLE_LOSS_LIMIT = 0.60


class InvalidSpec(ValueError):
    pass


@dataclass(frozen=True)
class ImageSpec:
    """320x320 8-bit image, quality factor 50, 90-byte payloads -> 205 packets."""

    raw_size: int = 102400
    encoded_size: int = 16621
    payload_size: int = 90
    packet_count: Optional[int] = 205
    quality_factor: int = 50

    def fragment_count(self) -> int:
        if self.encoded_size <= 0 or self.payload_size <= 0:
            raise InvalidSpec("image and payload sizes must be positive")
        if self.packet_count is not None:
            if self.packet_count <= 0:
                raise InvalidSpec("packet_count must be positive")
            return self.packet_count
        return math.ceil(self.encoded_size / self.payload_size)


@dataclass(frozen=True)
class Fragment:
    image_id: int
    index: int
    payload: bytes = b""
    size: int = 0


def fragment(spec: ImageSpec, image_id: int, data: Optional[bytes] = None) -> list[Fragment]:
    """Split an image into ``spec.fragment_count()`` fragments.

    Sizes spread the encoded bytes as evenly as possible without exceeding the
    payload limit. When ``data`` is given its bytes are carried along.
    """
    n = spec.fragment_count()
    total = spec.encoded_size if data is None else len(data)
    if total <= 0:
        raise InvalidSpec("zero-size image")
    frags = []
    base, extra = divmod(total, n)
    off = 0
    for i in range(n):
        size = min(spec.payload_size, base + (1 if i < extra else 0))
        chunk = data[off:off + size] if data is not None else b""
        frags.append(Fragment(image_id, i, chunk, size))
        off += size
    return frags


def classify(loss_ratio: float) -> str:
    if not (0.0 <= loss_ratio <= 1.0):
        raise ValueError(f"loss ratio must lie in [0, 1], got {loss_ratio!r}")
    if loss_ratio == 0.0:
        return COMPLETE
    if loss_ratio <= USABLE_LOSS_LIMIT:
        return USABLE
    return UNUSABLE


def loss_ratio(received: int, expected: int) -> float:
    # exact for ratios like 82/205 so the 60% boundary lands where it should
    return float(1 - Fraction(received, expected))


@dataclass(frozen=True)
class ImageResult:
    image_id: int
    source: int
    expected: int
    received: int
    start_time: float
    first_arrival: Optional[float]
    finalize_time: Optional[float]

    @property
    def loss_ratio(self) -> float:
        return loss_ratio(self.received, self.expected)

    @property
    def latency(self) -> Optional[float]:
        if self.finalize_time is None:
            return None
        return self.finalize_time - self.start_time

    @property
    def classification(self) -> Optional[str]:
        if self.received == 0:
            return None
        return classify(self.loss_ratio)


@dataclass
class ReassemblyBuffer:
    image_id: int
    source: int
    expected: int
    start_time: float
    display_timer: float = 10.0
    received: set = field(default_factory=set)
    first_arrival: Optional[float] = None
    finalized_at: Optional[float] = None
    late: int = 0
    duplicates: int = 0

    @property
    def deadline(self) -> Optional[float]:
        if self.first_arrival is None:
            return None
        return self.first_arrival + self.display_timer

    def on_fragment(self, frag: Fragment, now: float) -> bool:
        """Accept a fragment; returns True when this arrival completes the image."""
        if frag.image_id != self.image_id:
            raise ValueError("fragment belongs to another image")
        if self.finalized_at is None and self.first_arrival is not None and now > self.deadline:
            self.finalize(self.deadline)
        if self.finalized_at is not None:
            self.late += 1
            return False
        if self.first_arrival is None:
            self.first_arrival = now
        if frag.index in self.received:
            self.duplicates += 1
            return False
        self.received.add(frag.index)
        if len(self.received) >= self.expected:
            self.finalize(now)
            return True
        return False

    def finalize(self, now: float) -> ImageResult:
        if self.finalized_at is None:
            if self.first_arrival is not None:
                now = min(now, self.deadline)
            self.finalized_at = now
        return self.result()

    def result(self) -> ImageResult:
        return ImageResult(self.image_id, self.source, self.expected, len(self.received), self.start_time,
                           self.first_arrival, self.finalized_at if self.first_arrival is not None else None)
