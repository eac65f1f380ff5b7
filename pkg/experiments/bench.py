"""Restart-rate estimation and operation-count scaling of the refresh protocol."""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from experiments.stats import polynomial_r2, wilson_interval
from lrs.encoding import encode
from lrs.oracle import uniform_oracle
from lrs.rng import SeededRng
from models.schemas import FieldParams, RestartRateReport, ScalingPoint, ScalingReport
from protocols.channel import MemoryChannel
from protocols.refresh import refresh, run_attempt
from utils.config import DEFAULT_RESTART_CAP
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

RATE_CHUNK = 5_000
OPS_PER_COORDINATE = 8


def _require_standard(params: FieldParams) -> None:
    if params.p < 4 * params.n:
        raise ConfigurationError(f"restart bounds need p >= 4n, got p={params.p} n={params.n}")


def restart_bound(params: FieldParams) -> float:
    """Union bound over steps 4 and 7: each of the 2n fresh coordinates is 0 w.p. 1/p."""
    return 2 * params.n / params.p


def _count_restarts(params: FieldParams, attempts: int, rng: SeededRng) -> int:
    enc = encode(1, params, rng, mode="constructive")
    failures = 0
    channel = MemoryChannel()
    for _ in range(attempts):
        result = run_attempt(enc, uniform_oracle.sample(params, rng), channel)
        failures += not result.accepted
    return failures


def estimate_restart_rate(params: FieldParams, trials: int, rng: SeededRng, threads: int = 1) -> RestartRateReport:
    """Per-attempt restart probability with a 95% Wilson interval, over ``trials`` attempts."""
    _require_standard(params)
    chunks = [(i, min(RATE_CHUNK, trials - i * RATE_CHUNK)) for i in range((trials + RATE_CHUNK - 1) // RATE_CHUNK)]

    def work(chunk: tuple[int, int]) -> int:
        index, size = chunk
        return _count_restarts(params, size, rng.stream(f"rate-chunk-{index}"))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            restarts = sum(pool.map(work, chunks))
    else:
        restarts = sum(work(chunk) for chunk in chunks)

    rate = restarts / trials
    low, high = wilson_interval(restarts, trials)
    bound = restart_bound(params)
    passed = rate <= bound + 3 * (high - low) and rate <= 0.5
    logger.info("restart-rate p=%d n=%d attempts=%d restarts=%d rate=%.6f", params.p, params.n, trials, restarts, rate)
    return RestartRateReport(
        p=params.p,
        n=params.n,
        attempts=trials,
        restarts=restarts,
        rate=rate,
        ci_low=low,
        ci_high=high,
        bound=bound,
        passed=passed,
    )


def _measure_point(params: FieldParams, trials: int, rng: SeededRng, timing: bool, restart_cap: int) -> ScalingPoint:
    ops = []
    attempts = []
    worst_attempt = 0
    started = time.perf_counter()
    for trial in range(trials):
        stream = rng.stream(f"trial-{trial}")
        enc = encode(1, params, stream, mode="constructive")
        trace = refresh(enc, rng=stream, restart_cap=restart_cap)
        ops.append(trace.op_count.total)
        attempts.append(trace.attempts)
        worst_attempt = max(worst_attempt, max(count.total for count in trace.attempt_ops))
    elapsed = time.perf_counter() - started
    return ScalingPoint(
        n=params.n,
        trials=trials,
        mean_ops=float(np.mean(ops)),
        mean_attempts=float(np.mean(attempts)),
        max_attempt_ops=worst_attempt,
        wall_time_s=elapsed if timing else None,
    )


def measure_scaling(
    n_values: Sequence[int],
    p: int,
    trials: int,
    rng: SeededRng,
    timing: bool = False,
    restart_cap: int = DEFAULT_RESTART_CAP,
) -> ScalingReport:
    """Mean field operations per successful refresh for each n, with linear and quadratic fits."""
    n_values = list(n_values)
    if not n_values or any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ConfigurationError(f"n values must be strictly increasing, got {n_values}")

    points = []
    for n in n_values:
        params = FieldParams(p=p, n=n)
        _require_standard(params)
        points.append(_measure_point(params, trials, rng.stream(f"n-{n}"), timing, restart_cap))
        logger.info("bench p=%d n=%d mean_ops=%.1f mean_attempts=%.4f", p, n, points[-1].mean_ops, points[-1].mean_attempts)

    xs = [point.n for point in points]
    ys = [point.mean_ops for point in points]
    if len(points) >= 2:
        (slope, intercept), r2_linear = polynomial_r2(xs, ys, 1)
    else:
        slope, intercept, r2_linear = ys[0] / xs[0], 0.0, 1.0
    r2_quadratic = polynomial_r2(xs, ys, 2)[1] if len(points) >= 3 else r2_linear

    by_n = {point.n: point.mean_ops for point in points}
    ratios = {f"{n}->{2 * n}": by_n[2 * n] / by_n[n] for n in by_n if 2 * n in by_n}
    return ScalingReport(
        p=p,
        points=points,
        slope=float(slope),
        intercept=float(intercept),
        r2_linear=r2_linear,
        r2_quadratic=r2_quadratic,
        doubling_ratios=ratios,
        per_attempt_bound_ok=all(point.max_attempt_ops <= OPS_PER_COORDINATE * point.n for point in points),
    )
