"""Core domain types and the collision-channel round model.

A contention round offers M orthogonal preambles. Each contender that
passes access barring picks one preamble; preambles with a single
contender succeed outright, while contended preambles are arbitrated by
binary countdown over k short slots. The base station only ever observes
idle/occupied preambles and later successes, never the contender
multiplicity on a preamble.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence


class DomainError(ValueError):
    """A parameter is outside its documented domain."""


@dataclass(frozen=True)
class SystemConfig:
    """Static channel and resource parameters of a cell.

    Attributes:
        preambles: number of contention preambles per round (M).
        prach_resources: resource blocks consumed by the PRACH itself (R1).
        msg3_resources: resource blocks per connection-request transmission (r3).
        crs_overhead: relative cost of one countdown slot, r_CRS / r3.
        max_crs: upper bound on countdown slots per round.
        round_duration_ms: wall-clock length of one contention round.
    """

    preambles: int = 54
    prach_resources: float = 6.0
    msg3_resources: float = 2.0
    crs_overhead: float = 0.07
    max_crs: int = 14
    round_duration_ms: float = 10.0

    def __post_init__(self) -> None:
        if self.preambles < 1:
            raise DomainError(f"preambles must be >= 1, got {self.preambles}")
        if self.prach_resources < 0:
            raise DomainError("prach_resources must be >= 0")
        if self.msg3_resources <= 0:
            raise DomainError("msg3_resources must be > 0")
        if not 0.0 < self.crs_overhead <= 1.0:
            raise DomainError("crs_overhead must be in (0, 1]")
        if self.max_crs < 0:
            raise DomainError("max_crs must be >= 0")
        if self.round_duration_ms <= 0:
            raise DomainError("round_duration_ms must be > 0")

    def round_resources(self, k: int, occupied: float) -> float:
        """Resource blocks consumed in a round with `k` countdown slots and
        `occupied` occupied preambles (realized count or expectation)."""
        return self.prach_resources + self.msg3_resources * (1.0 + k * self.crs_overhead) * occupied


@dataclass(frozen=True)
class OperatingPoint:
    """Per-round control pair: access probability and countdown slot count."""

    p: float
    k: int

    def __post_init__(self) -> None:
        if not 0.0 < self.p <= 1.0:
            raise DomainError(f"access probability must be in (0, 1], got {self.p}")
        if self.k < 0:
            raise DomainError(f"slot count must be >= 0, got {self.k}")

    @property
    def levels(self) -> int:
        """Number of distinct priority levels, 2**k."""
        return 1 << self.k


@dataclass(frozen=True)
class PrioritySequence:
    """A priority level together with its per-slot transmit/listen pattern.

    Level 0 is the highest priority.  The bit sequence is the k-bit base-2
    representation of (2**k - 1 - level): in each slot a contender transmits
    when its bit is 1 and listens when it is 0, so the all-ones pattern
    belongs to the highest priority.
    """

    level: int
    bits: tuple[int, ...]


def encode_priority(level: int, k: int) -> PrioritySequence:
    """Encode a priority level as its k-slot transmit/listen bit pattern."""
    if k < 0:
        raise DomainError(f"slot count must be >= 0, got {k}")
    levels = 1 << k
    if not 0 <= level < levels:
        raise DomainError(f"level {level} out of range [0, {levels - 1}]")
    encoded = levels - 1 - level
    bits = tuple((encoded >> (k - 1 - j)) & 1 for j in range(k))
    return PrioritySequence(level=level, bits=bits)


def decode_priority(seq: PrioritySequence) -> int:
    """Inverse of encode_priority: recover the level from the bit pattern."""
    k = len(seq.bits)
    encoded = 0
    for b in seq.bits:
        encoded = (encoded << 1) | b
    return (1 << k) - 1 - encoded


class PreambleOutcome(enum.Enum):
    IDLE = "idle"
    SUCCESS = "success"
    COLLISION = "collision"


@dataclass(frozen=True)
class PreambleResolution:
    outcome: PreambleOutcome
    winner: int | None = None  # index into the contender list


def resolve_preamble(priority_levels: Sequence[int], k: int) -> PreambleResolution:
    """Resolve one preamble's contention by binary countdown.

    A lone contender always wins (the countdown slots run but nobody can
    displace it).  With several contenders, the one holding the unique
    smallest level wins; a shared smallest level collides.
    """
    levels = 1 << k
    for lv in priority_levels:
        if not 0 <= lv < levels:
            raise DomainError(f"level {lv} out of range [0, {levels - 1}]")
    if not priority_levels:
        return PreambleResolution(PreambleOutcome.IDLE)
    if len(priority_levels) == 1:
        return PreambleResolution(PreambleOutcome.SUCCESS, winner=0)
    best = min(priority_levels)
    holders = [i for i, lv in enumerate(priority_levels) if lv == best]
    if len(holders) == 1:
        return PreambleResolution(PreambleOutcome.SUCCESS, winner=holders[0])
    return PreambleResolution(PreambleOutcome.COLLISION)


def resolve_preamble_slotted(priority_levels: Sequence[int], k: int) -> PreambleResolution:
    """Slot-by-slot reference arbitration, kept as an oracle for
    resolve_preamble.

    Each active contender transmits when its current bit is 1 and listens
    when it is 0; a listener that hears any transmission abandons for good.
    A contender that survives all k slots and is alone wins.
    """
    levels = 1 << k
    for lv in priority_levels:
        if not 0 <= lv < levels:
            raise DomainError(f"level {lv} out of range [0, {levels - 1}]")
    if not priority_levels:
        return PreambleResolution(PreambleOutcome.IDLE)
    patterns = [encode_priority(lv, k).bits for lv in priority_levels]
    active = list(range(len(priority_levels)))
    for slot in range(k):
        transmitters = [i for i in active if patterns[i][slot] == 1]
        if transmitters:
            active = transmitters
    if len(active) == 1:
        return PreambleResolution(PreambleOutcome.SUCCESS, winner=active[0])
    return PreambleResolution(PreambleOutcome.COLLISION)


@dataclass(frozen=True)
class RoundOutcome:
    """Observable result of one contention round at the base station."""

    idle_preambles: int
    occupied_preambles: int
    successes: int
    consumed_resources: float

    @staticmethod
    def build(idle: int, occupied: int, successes: int, k: int, config: SystemConfig) -> "RoundOutcome":
        if idle + occupied != config.preambles:
            raise DomainError("idle + occupied must equal the preamble count")
        if not 0 <= successes <= occupied:
            raise DomainError("successes must be in [0, occupied]")
        return RoundOutcome(
            idle_preambles=idle,
            occupied_preambles=occupied,
            successes=successes,
            consumed_resources=config.round_resources(k, occupied),
        )
