"""Refresh versus reconstruct-refresh experiments.

ExpRefresh runs the interactive protocol on (L, R). ExpReconstructRefresh
samples (L', R') uniformly among nonzero encodings of <L, R>, samples (V, V~)
offline and reconstructs both views. Both output (L', R', view_L, view_R);
the claim checked here is that the two outputs are identically distributed.

Exact enumeration conditions ExpRefresh on acceptance instead of unrolling
restarts: attempts are i.i.d. and the output is the first accepting one, so
its law is the per-attempt law conditioned on acceptance. Under the uniform
oracle that is the uniform law over accepting C1-C3 tuples.
"""

import itertools
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from experiments.stats import total_variation
from lrs.encoding import Encoding, decode, enumerate_constraint_set, nonzero_vectors, sample_encoding_pair_with_secret
from lrs.field import FieldVector, uncounted
from lrs.oracle import OracleSampler, enumerate_oracle_space, raw_space_size
from lrs.rng import SeededRng
from models.schemas import Lemma2Report, MonteCarloLemma2Report
from protocols.channel import MemoryChannel
from protocols.reconstructor import CommonRandomness, reconstruct, sample_common_randomness
from protocols.refresh import ViewL, ViewR, refresh, run_attempt
from utils.config import DEFAULT_RESTART_CAP
from utils.errors import EnumerationTooLargeError

logger = logging.getLogger(__name__)

MAX_ENUMERATION = 10 ** 8
MC_CHUNK = 10_000

# where each view component sits inside ExperimentOutcome.key()
COMPONENTS: dict[str, Callable[[tuple], tuple]] = {
    "L_prime": lambda k: k[0],
    "R_prime": lambda k: k[1],
    "A": lambda k: k[2][1],
    "V": lambda k: k[2][2],
    "A_tilde": lambda k: k[2][3],
    "V_tilde": lambda k: k[2][4],
    "B": lambda k: k[3][1],
    "B_tilde": lambda k: k[3][3],
}

# pairs whose joint law the marginals alone would not pin down
JOINTS: dict[str, tuple[str, str]] = {
    "A,B": ("A", "B"),
    "A_tilde,B_tilde": ("A_tilde", "B_tilde"),
    "L_prime,V": ("L_prime", "V"),
    "R_prime,V_tilde": ("R_prime", "V_tilde"),
}


def _joint(first: str, second: str) -> Callable[[tuple], tuple]:
    return lambda k: (COMPONENTS[first](k), COMPONENTS[second](k))


PROJECTIONS: dict[str, Callable[[tuple], tuple]] = {
    **COMPONENTS,
    **{name: _joint(*pair) for name, pair in JOINTS.items()},
}


@dataclass(frozen=True)
class ExperimentOutcome:
    L_prime: FieldVector
    R_prime: FieldVector
    view_L: ViewL
    view_R: ViewR

    def key(self) -> tuple:
        """Full joint outcome; coarser keys could hide a discrepancy."""
        return (self.L_prime.coords, self.R_prime.coords, self.view_L.key(), self.view_R.key())

    def packed(self) -> int:
        """The key flattened into one base-p integer, for large histograms."""
        p = self.L_prime.p
        value = 0
        for coord in _flatten(self.key()):
            value = value * p + coord
        return value


def _flatten(key):
    for item in key:
        if isinstance(item, tuple):
            yield from _flatten(item)
        else:
            yield item


@dataclass
class ExactDistribution:
    probabilities: dict[tuple, Fraction]
    weight: int = 0

    @classmethod
    def from_counts(cls, counts: Counter) -> "ExactDistribution":
        total = sum(counts.values())
        return cls({key: Fraction(count, total) for key, count in counts.items()}, total)

    def total(self) -> Fraction:
        return sum(self.probabilities.values(), Fraction(0))

    def __len__(self) -> int:
        return len(self.probabilities)

    def marginal(self, component: str) -> dict[tuple, Fraction]:
        project = COMPONENTS[component]
        result: dict[tuple, Fraction] = {}
        for key, prob in self.probabilities.items():
            sub = project(key)
            result[sub] = result.get(sub, Fraction(0)) + prob
        return result


def exp_refresh(
    enc: Encoding,
    rng: SeededRng,
    oracle: Optional[OracleSampler] = None,
    restart_cap: int = DEFAULT_RESTART_CAP,
) -> ExperimentOutcome:
    trace = refresh(enc, oracle, MemoryChannel(), rng, restart_cap)
    return ExperimentOutcome(trace.output.L, trace.output.R, trace.view_L, trace.view_R)


def exp_reconstruct_refresh(enc: Encoding, rng: SeededRng) -> ExperimentOutcome:
    with uncounted():
        secret = decode(enc)
    new = sample_encoding_pair_with_secret(secret, enc.params, rng)
    view_L, view_R = reconstruct(enc, new, sample_common_randomness(enc.params, rng))
    return ExperimentOutcome(new.L, new.R, view_L, view_R)


def _guard(size: int, limit: int) -> None:
    if size > limit:
        raise EnumerationTooLargeError(size, limit)


def _tally_refresh(enc: Encoding, shard: int, shards: int) -> tuple[Counter, int]:
    counts: Counter = Counter()
    examined = 0
    with uncounted():
        for sample in itertools.islice(enumerate_oracle_space(enc.params), shard, None, shards):
            examined += 1
            result = run_attempt(enc, sample, MemoryChannel())
            if result.accepted:
                outcome = ExperimentOutcome(result.L_prime, result.R_prime, result.view_L, result.view_R)
                counts[outcome.key()] += 1
    return counts, examined


def _merge(partials: list[tuple[Counter, int]]) -> tuple[Counter, int]:
    total: Counter = Counter()
    examined = 0
    for counts, seen in partials:
        total.update(counts)
        examined += seen
    return total, examined


def _run_shards(work: Callable[[int, int], tuple[Counter, int]], shards: int, threads: int) -> tuple[Counter, int]:
    if threads <= 1 or shards <= 1:
        return _merge([work(shard, shards) for shard in range(shards)])
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return _merge(list(pool.map(lambda shard: work(shard, shards), range(shards))))


def exact_distribution_refresh(
    enc: Encoding, limit: int = MAX_ENUMERATION, shards: int = 1, threads: int = 1
) -> ExactDistribution:
    """Exact law of ExpRefresh: uniform oracle tuples, conditioned on acceptance."""
    raw = raw_space_size(enc.params)
    _guard(raw, limit)
    counts, examined = _run_shards(lambda shard, k: _tally_refresh(enc, shard, k), shards, threads)
    logger.info("exact refresh raw=%d c1_tuples=%d accepted=%d", raw, examined, sum(counts.values()))
    return ExactDistribution.from_counts(counts)


def _tally_reconstruct(enc: Encoding, shard: int, shards: int) -> tuple[Counter, int]:
    params = enc.params
    with uncounted():
        secret = decode(enc)
        randomness = [CommonRandomness(V, V_tilde) for V in nonzero_vectors(params) for V_tilde in nonzero_vectors(params)]
        counts: Counter = Counter()
        examined = 0
        for new in itertools.islice(enumerate_constraint_set(secret, params), shard, None, shards):
            for cr in randomness:
                examined += 1
                view_L, view_R = reconstruct(enc, new, cr)
                counts[ExperimentOutcome(new.L, new.R, view_L, view_R).key()] += 1
    return counts, examined


def exact_distribution_reconstruct(
    enc: Encoding, limit: int = MAX_ENUMERATION, shards: int = 1, threads: int = 1
) -> ExactDistribution:
    """Exact law of ExpReconstructRefresh: uniform (L', R') times uniform (V, V~)."""
    p, n = enc.params.p, enc.params.n
    _guard((p - 1) ** (4 * n), limit)
    counts, examined = _run_shards(lambda shard, k: _tally_reconstruct(enc, shard, k), shards, threads)
    logger.info("exact reconstruct tuples=%d outcomes=%d", examined, len(counts))
    return ExactDistribution.from_counts(counts)


def compare_distributions(left: ExactDistribution, right: ExactDistribution) -> Optional[str]:
    """First outcome (in sorted order) whose probabilities differ, or None."""
    for key in sorted(set(left.probabilities) | set(right.probabilities)):
        a = left.probabilities.get(key, Fraction(0))
        b = right.probabilities.get(key, Fraction(0))
        if a != b:
            return f"outcome={key} refresh={a} reconstruct={b}"
    return None


def verify_lemma2(enc: Encoding, limit: int = MAX_ENUMERATION, threads: int = 1) -> Lemma2Report:
    shards = max(threads, 1)
    left = exact_distribution_refresh(enc, limit, shards, threads)
    right = exact_distribution_reconstruct(enc, limit, shards, threads)
    discrepancy = compare_distributions(left, right)
    if discrepancy:
        logger.warning("lemma2 discrepancy %s", discrepancy)
    return Lemma2Report(
        p=enc.params.p,
        n=enc.params.n,
        L=enc.L.coords,
        R=enc.R.coords,
        raw_tuples=raw_space_size(enc.params),
        accepted_tuples=left.weight,
        outcomes_refresh=len(left),
        outcomes_reconstruct=len(right),
        equal=discrepancy is None,
        first_discrepancy=discrepancy,
    )


def _collect(
    experiment: Callable[[Encoding, SeededRng], ExperimentOutcome],
    enc: Encoding,
    samples: int,
    rng: SeededRng,
    threads: int,
) -> tuple[Counter, dict[str, Counter]]:
    """Histogram ``samples`` outcomes; chunk i always uses stream chunk-i, whatever ``threads`` is."""

    def chunk(index: int) -> tuple[Counter, dict[str, Counter]]:
        stream = rng.stream(f"chunk-{index}")
        full: Counter = Counter()
        marginals = {name: Counter() for name in PROJECTIONS}
        size = min(MC_CHUNK, samples - index * MC_CHUNK)
        for _ in range(size):
            outcome = experiment(enc, stream)
            full[outcome.packed()] += 1
            key = outcome.key()
            for name, project in PROJECTIONS.items():
                marginals[name][project(key)] += 1
        return full, marginals

    chunks = range((samples + MC_CHUNK - 1) // MC_CHUNK)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(chunk, chunks))
    else:
        partials = [chunk(i) for i in chunks]

    full: Counter = Counter()
    marginals = {name: Counter() for name in PROJECTIONS}
    for part_full, part_marginals in partials:
        full.update(part_full)
        for name in PROJECTIONS:
            marginals[name].update(part_marginals[name])
    return full, marginals


def monte_carlo_lemma2(enc: Encoding, samples: int, rng: SeededRng, threads: int = 1) -> MonteCarloLemma2Report:
    """Compare ExpRefresh and ExpReconstructRefresh histograms against a same-distribution null.

    The null is a second, independently seeded ExpReconstructRefresh run; every
    distance must stay below three times its null counterpart. On larger fields
    the full outcome is almost never repeated, so its distance saturates near 1
    for both runs; the single components and the JOINTS pairs carry the test.
    """
    refresh_full, refresh_marg = _collect(exp_refresh, enc, samples, rng.stream("mc-refresh"), threads)
    recon_full, recon_marg = _collect(exp_reconstruct_refresh, enc, samples, rng.stream("mc-reconstruct"), threads)
    null_full, null_marg = _collect(exp_reconstruct_refresh, enc, samples, rng.stream("mc-null"), threads)

    tv_full = total_variation(refresh_full, recon_full)
    baseline_full = total_variation(recon_full, null_full)
    marginal_tv = {name: total_variation(refresh_marg[name], recon_marg[name]) for name in COMPONENTS}
    marginal_baseline = {name: total_variation(recon_marg[name], null_marg[name]) for name in COMPONENTS}

    joint_tv = {name: total_variation(refresh_marg[name], recon_marg[name]) for name in JOINTS}
    joint_baseline = {name: total_variation(recon_marg[name], null_marg[name]) for name in JOINTS}

    passed = (
        tv_full <= 3 * baseline_full
        and all(marginal_tv[name] <= 3 * marginal_baseline[name] for name in COMPONENTS)
        and all(joint_tv[name] <= 3 * joint_baseline[name] for name in JOINTS)
    )
    logger.info("lemma2 monte-carlo samples=%d tv=%.5f baseline=%.5f passed=%s", samples, tv_full, baseline_full, passed)
    return MonteCarloLemma2Report(
        samples=samples,
        tv_full=tv_full,
        baseline_full=baseline_full,
        marginal_tv=marginal_tv,
        marginal_baseline=marginal_baseline,
        joint_tv=joint_tv,
        joint_baseline=joint_baseline,
        passed=passed,
    )


def marginal_summary(dist: ExactDistribution, component: str) -> dict[str, object]:
    """Support size and extreme probabilities of one view component."""
    probabilities = list(dist.marginal(component).values())
    low, high = min(probabilities), max(probabilities)
    return {"support": len(probabilities), "min": low, "max": high, "uniform": low == high}
