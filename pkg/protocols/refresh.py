"""Two-party share refresh in O(n) field operations.

P_L holds L, P_R holds R. Per attempt:
  1. O' gives (A, A~) to P_L and (B, B~) to P_R.
  2. P_L sends V = L^-1 * A (coordinate-wise).
  3. P_R sets X = V * B and R' = R + X.
  4. Restart if some R'_i = 0.
  5. P_R sends V~ = R'^-1 * B~.
  6. P_L sets X~ = V~ * A~ and L' = L + X~.
  7. Restart if some L'_i = 0.
A restart goes back to step 1 with a fresh oracle sample.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

from lrs.encoding import Encoding
from lrs.field import (
    FieldElement,
    FieldVector,
    NonZeroVector,
    OpCounter,
    charge,
    counting,
    hadamard,
    uncounted,
    vec_add,
    vec_inv,
)
from lrs.oracle import OracleSample, OracleSampler, uniform_oracle
from lrs.rng import SeededRng
from protocols.channel import LEFT_TO_RIGHT, RIGHT_TO_LEFT, Channel, MemoryChannel, Message
from utils.config import DEFAULT_RESTART_CAP
from utils.errors import DomainError, RestartCapExceededError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ViewL:
    L: FieldVector
    A: FieldVector
    V: FieldVector
    A_tilde: FieldVector
    V_tilde: FieldVector

    def key(self) -> tuple:
        return (self.L.coords, self.A.coords, self.V.coords, self.A_tilde.coords, self.V_tilde.coords)


@dataclass(frozen=True)
class ViewR:
    R: FieldVector
    B: FieldVector
    V: FieldVector
    B_tilde: FieldVector
    V_tilde: FieldVector

    def key(self) -> tuple:
        return (self.R.coords, self.B.coords, self.V.coords, self.B_tilde.coords, self.V_tilde.coords)


class PartyL:
    def __init__(self, L: NonZeroVector):
        self.L = L
        self.A: Optional[FieldVector] = None
        self.A_tilde: Optional[FieldVector] = None
        self.V: Optional[FieldVector] = None
        self.V_tilde: Optional[FieldVector] = None

    def receive_oracle(self, A: FieldVector, A_tilde: FieldVector) -> None:
        self.A, self.A_tilde = A, A_tilde

    def send_v(self, channel: Channel) -> None:
        self.V = hadamard(vec_inv(self.L), self.A)
        channel.send(LEFT_TO_RIGHT, self.V)

    def refresh_share(self, channel: Channel) -> FieldVector:
        self.V_tilde = channel.receive(RIGHT_TO_LEFT)
        return vec_add(self.L, hadamard(self.V_tilde, self.A_tilde))

    def view(self) -> ViewL:
        return ViewL(self.L, self.A, self.V, self.A_tilde, self.V_tilde)


class PartyR:
    def __init__(self, R: NonZeroVector):
        self.R = R
        self.B: Optional[FieldVector] = None
        self.B_tilde: Optional[FieldVector] = None
        self.V: Optional[FieldVector] = None
        self.V_tilde: Optional[FieldVector] = None
        self.R_prime: Optional[FieldVector] = None

    def receive_oracle(self, B: FieldVector, B_tilde: FieldVector) -> None:
        self.B, self.B_tilde = B, B_tilde

    def refresh_share(self, channel: Channel) -> FieldVector:
        self.V = channel.receive(LEFT_TO_RIGHT)
        self.R_prime = vec_add(self.R, hadamard(self.V, self.B))
        return self.R_prime

    def send_v_tilde(self, channel: Channel) -> None:
        self.V_tilde = hadamard(vec_inv(self.R_prime), self.B_tilde)
        channel.send(RIGHT_TO_LEFT, self.V_tilde)

    def view(self) -> ViewR:
        return ViewR(self.R, self.B, self.V, self.B_tilde, self.V_tilde)


@dataclass
class AttemptResult:
    attempt: int
    accepted: bool
    failed_step: Optional[int]
    ops: OpCounter
    sample: OracleSample
    L_prime: Optional[FieldVector] = None
    R_prime: Optional[FieldVector] = None
    view_L: Optional[ViewL] = None
    view_R: Optional[ViewR] = None


def run_attempt(enc: Encoding, sample: OracleSample, channel: Channel, attempt: int = 0) -> AttemptResult:
    """One pass through steps 1-7 with a given oracle sample."""
    channel.begin_attempt(attempt)
    left, right = PartyL(enc.L), PartyR(enc.R)
    left.receive_oracle(sample.A, sample.A_tilde)
    right.receive_oracle(sample.B, sample.B_tilde)

    with counting() as ops:
        left.send_v(channel)
        R_prime = right.refresh_share(channel)
        if not R_prime.is_nonzero():
            return AttemptResult(attempt, False, 4, ops, sample, R_prime=R_prime)
        right.send_v_tilde(channel)
        L_prime = left.refresh_share(channel)
        if not L_prime.is_nonzero():
            return AttemptResult(attempt, False, 7, ops, sample, L_prime, R_prime)

    return AttemptResult(attempt, True, None, ops, sample, L_prime, R_prime, left.view(), right.view())


@dataclass
class RefreshTrace:
    output: Encoding
    view_L: ViewL
    view_R: ViewR
    alpha: FieldElement
    restarts: int
    messages: list[Message]
    op_count: OpCounter
    attempt_ops: list[OpCounter] = field(default_factory=list)
    failed_transcripts: list[list[Message]] = field(default_factory=list)
    failed_steps: list[int] = field(default_factory=list)

    @property
    def attempts(self) -> int:
        return self.restarts + 1


def refresh(
    enc: Encoding,
    oracle: Optional[OracleSampler] = None,
    channel: Optional[Channel] = None,
    rng: Optional[SeededRng] = None,
    restart_cap: int = DEFAULT_RESTART_CAP,
) -> RefreshTrace:
    """Refresh (L, R) into (L', R') with <L', R'> = <L, R>, restarting from step 1 on failure."""
    oracle = oracle or uniform_oracle
    channel = channel if channel is not None else MemoryChannel()
    rng = rng or SeededRng(0, "refresh")
    total = OpCounter()
    attempt_ops: list[OpCounter] = []
    failed_transcripts: list[list[Message]] = []
    failed_steps: list[int] = []

    for attempt in range(restart_cap + 1):
        sample = oracle.sample(enc.params, rng)
        result = run_attempt(enc, sample, channel, attempt)
        total = total + result.ops
        attempt_ops.append(result.ops)

        if result.accepted:
            charge(total)
            return RefreshTrace(
                output=Encoding(result.L_prime.nonzero(), result.R_prime.nonzero(), enc.params),
                view_L=result.view_L,
                view_R=result.view_R,
                alpha=sample.alpha,
                restarts=attempt,
                messages=channel.messages(attempt),
                op_count=total,
                attempt_ops=attempt_ops,
                failed_transcripts=failed_transcripts,
                failed_steps=failed_steps,
            )

        logger.info("refresh restart attempt=%d step=%d n=%d p=%d", attempt, result.failed_step, enc.params.n, enc.params.p)
        failed_transcripts.append(channel.messages(attempt))
        failed_steps.append(result.failed_step)

    charge(total)
    raise RestartCapExceededError(restart_cap)


def views_consistent(original: Encoding, output: Encoding, view_L: ViewL, view_R: ViewR) -> bool:
    """Check every step-2/3/5/6 equation linking inputs, views and outputs."""
    if view_L.L != original.L or view_R.R != original.R:
        return False
    if view_L.V != view_R.V or view_L.V_tilde != view_R.V_tilde:
        return False
    try:
        with uncounted():
            if view_L.V != hadamard(vec_inv(original.L), view_L.A):
                return False
            X = hadamard(view_R.V, view_R.B)
            R_prime = vec_add(original.R, X)
            if R_prime != output.R:
                return False
            if view_R.V_tilde != hadamard(vec_inv(R_prime), view_R.B_tilde):
                return False
            X_tilde = hadamard(view_L.V_tilde, view_L.A_tilde)
            return vec_add(original.L, X_tilde) == output.L
    except DomainError:
        return False


def verify_views(trace: RefreshTrace, original: Encoding) -> bool:
    return views_consistent(original, trace.output, trace.view_L, trace.view_R)


def refresh_epochs(
    enc: Encoding,
    epochs: int,
    rng: SeededRng,
    oracle: Optional[OracleSampler] = None,
    restart_cap: int = DEFAULT_RESTART_CAP,
) -> list[RefreshTrace]:
    """Continual refresh: each epoch refreshes the previous epoch's output."""
    traces = []
    current = enc
    for epoch in range(epochs):
        trace = refresh(current, oracle, MemoryChannel(), rng.stream(f"epoch-{epoch}"), restart_cap)
        traces.append(trace)
        current = trace.output
    return traces
