"""Per-run event log: gapless sequencing, bounded replay, live tailing."""

from __future__ import annotations

import asyncio
import time
from collections import deque
from dataclasses import dataclass
from enum import Enum

DEFAULT_RING_SIZE = 10_000


class PhaseId(str, Enum):
    P1 = "P1-ontological-setup"
    P2 = "P2-corpus-ingestion"
    P3 = "P3-parallel-ingestion"
    P4 = "P4-resonance-rupture"
    P5 = "P5-synthesis-mapping"
    P6 = "P6-cartographic-output"
    P7 = "P7-semantic-topography"


PHASE_ORDER = list(PhaseId)


class EventKind(str, Enum):
    RUN_STARTED = "run_started"
    PHASE_STARTED = "phase_started"
    LENSES_GENERATED = "lenses_generated"
    PAPERS_FETCHED = "papers_fetched"
    DUPLICATES_REMOVED = "duplicates_removed"
    LENS_READING_DONE = "lens_reading_done"
    ANOMALY_DETECTED = "anomaly_detected"
    RUPTURE_TRIGGERED = "rupture_triggered"
    REENTRY_COMPLETED = "reentry_completed"
    EDGE_CLASSIFIED = "edge_classified"
    ASSEMBLAGE_BUILT = "assemblage_built"
    CARTOGRAPHY_READY = "cartography_ready"
    TOPOGRAPHY_READY = "topography_ready"
    PHASE_COMPLETED = "phase_completed"
    RUN_COMPLETED = "run_completed"
    RUN_FAILED = "run_failed"


TERMINAL_KINDS = {EventKind.RUN_COMPLETED, EventKind.RUN_FAILED}


@dataclass(frozen=True)
class PipelineEvent:
    run_id: str
    sequence: int
    phase: str | None
    kind: EventKind
    payload: dict
    timestamp: float

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "sequence": self.sequence,
            "phase": self.phase,
            "kind": self.kind.value,
            "payload": self.payload,
            "timestamp": self.timestamp,
        }


class SubscriberLagged(Exception):
    """The replay ring evicted events this subscriber had not read yet."""


class EventLog:
    """Single-writer, many-reader ring of pipeline events for one run.

    Emission is serialized by the run's task; readers tail via a condition
    variable, so a slow subscriber can never block the pipeline.
    """

    def __init__(self, run_id: str, ring_size: int = DEFAULT_RING_SIZE):
        self.run_id = run_id
        self._ring: deque[PipelineEvent] = deque(maxlen=ring_size)
        self._next_sequence = 0
        self._terminal = False
        self._condition = asyncio.Condition()

    @property
    def last_sequence(self) -> int:
        return self._next_sequence - 1

    @property
    def terminated(self) -> bool:
        return self._terminal

    def emit_nowait(self, kind: EventKind, phase: str | None, payload: dict) -> PipelineEvent:
        if self._terminal:
            raise RuntimeError("event log already terminated")
        event = PipelineEvent(
            run_id=self.run_id,
            sequence=self._next_sequence,
            phase=phase,
            kind=kind,
            payload=payload,
            timestamp=time.time(),
        )
        self._next_sequence += 1
        self._ring.append(event)
        if kind in TERMINAL_KINDS:
            self._terminal = True
        return event

    async def emit(self, kind: EventKind, phase: str | None, payload: dict) -> PipelineEvent:
        async with self._condition:
            event = self.emit_nowait(kind, phase, payload)
            self._condition.notify_all()
        return event

    def snapshot(self, from_sequence: int = 0) -> list[PipelineEvent]:
        return [e for e in self._ring if e.sequence >= from_sequence]

    async def subscribe(self, from_sequence: int = 0):
        """Replay buffered events from from_sequence, then live-tail until the
        terminal event. Raises SubscriberLagged when the ring has already
        evicted events the subscriber still needs."""
        cursor = from_sequence
        while True:
            async with self._condition:
                while self._next_sequence <= cursor and not self._terminal:
                    await self._condition.wait()
                if self._next_sequence <= cursor:
                    return  # terminal reached with nothing left to deliver
                oldest = self._ring[0].sequence if self._ring else self._next_sequence
                if cursor < oldest:
                    raise SubscriberLagged(
                        f"cursor {cursor} predates replay window start {oldest}"
                    )
                batch = [e for e in self._ring if e.sequence >= cursor]
            for event in batch:
                yield event
                cursor = event.sequence + 1
                if event.kind in TERMINAL_KINDS:
                    return
