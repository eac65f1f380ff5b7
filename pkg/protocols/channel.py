from collections import deque
from dataclasses import dataclass
from typing import Optional, Protocol

from lrs.field import FieldVector
from utils.errors import DomainError

LEFT_TO_RIGHT = "L->R"
RIGHT_TO_LEFT = "R->L"
DIRECTIONS = (LEFT_TO_RIGHT, RIGHT_TO_LEFT)


@dataclass(frozen=True)
class Message:
    attempt: int
    direction: str
    payload: FieldVector


class Channel(Protocol):
    def begin_attempt(self, attempt: int) -> None: ...

    def send(self, direction: str, payload: FieldVector) -> None: ...

    def receive(self, direction: str) -> FieldVector: ...

    def messages(self, attempt: Optional[int] = None) -> list[Message]: ...


class MemoryChannel:
    """In-process FIFO per direction; every sent message is recorded once."""

    def __init__(self):
        self._queues = {direction: deque() for direction in DIRECTIONS}
        self._attempt = 0
        self.transcript: list[Message] = []

    def begin_attempt(self, attempt: int) -> None:
        # a restart discards anything still in flight
        self._attempt = attempt
        for queue in self._queues.values():
            queue.clear()

    def send(self, direction: str, payload: FieldVector) -> None:
        if direction not in self._queues:
            raise DomainError(f"unknown channel direction {direction!r}")
        self.transcript.append(Message(self._attempt, direction, payload))
        self._queues[direction].append(payload)

    def receive(self, direction: str) -> FieldVector:
        if direction not in self._queues:
            raise DomainError(f"unknown channel direction {direction!r}")
        if not self._queues[direction]:
            raise DomainError(f"no message pending on {direction}")
        return self._queues[direction].popleft()

    def messages(self, attempt: Optional[int] = None) -> list[Message]:
        if attempt is None:
            return list(self.transcript)
        return [m for m in self.transcript if m.attempt == attempt]

    def __len__(self) -> int:
        return len(self.transcript)
