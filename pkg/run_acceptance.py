#!/usr/bin/env python3
"""
Full-scale acceptance run: every check at the sample sizes the pytest suite
scales down. Takes several minutes; exits non-zero if any check fails.
"""

import argparse
import sys
import tempfile
import time
from pathlib import Path
from unittest import mock

from dotenv import load_dotenv

from experiments.bench import estimate_restart_rate, measure_scaling
from experiments.lemma2 import exact_distribution_refresh, marginal_summary, monte_carlo_lemma2, verify_lemma2
from leakage.adversaries import RandomAdversary
from leakage.game import audit_budget, lemma1_budget, run_game, serialize_shares_to_memory
from lrs.encoding import Encoding, decode, encode, nonzero_vectors
from lrs.field import uncounted
from lrs.rng import SeededRng
from models.schemas import FieldParams
from protocols.channel import MemoryChannel
from protocols.reconstructor import CommonRandomness, reconstruct
from protocols.refresh import refresh
from utils.config import configure_logging, env_seed, env_threads

load_dotenv()

PRESERVATION_GRID = [(p, n) for p in (11, 101, 65537) for n in (1, 2, 8, 64)]
RESTART_POINTS = [(11, 2), (53, 13), (65537, 1000)]

# grid points whose expected attempts per refresh exceed this are reported, not run
MAX_EXPECTED_ATTEMPTS = 1000


def _banner(title):
    print(f"\n{title}")
    print("=" * 50)


def preservation_plan(grid):
    """Split the grid into points to run and deviations (with their reason) to report."""
    runnable, deviations = [], []
    for p, n in grid:
        # acceptance per attempt is about (1 - 1/p)^(2n)
        expected = (1 - 1 / p) ** (-2 * n)
        if expected > MAX_EXPECTED_ATTEMPTS:
            deviations.append(
                f"preservation p={p} n={n} not run: relaxed regime (p < 4n), "
                f"about {expected:.1e} attempts per refresh"
            )
        else:
            runnable.append((p, n))
    return runnable, deviations


def check_inner_product_preservation(seed, runs, deviations):
    """Inner product survives refresh on every grid point"""
    _banner("🔁 Inner-product preservation:")
    rng = SeededRng(seed, "acceptance/preservation")
    runnable, skipped = preservation_plan(PRESERVATION_GRID)
    for reason in skipped:
        print(f"⚠️  {reason}")
    deviations.extend(skipped)
    per_point = runs // len(PRESERVATION_GRID)
    violations = 0
    for p, n in runnable:
        params = FieldParams(p=p, n=n, relaxed=True)
        stream = rng.stream(f"p{p}-n{n}")
        for _ in range(per_point):
            secret = 1 + stream.below(p - 1)
            enc = encode(secret, params, stream, mode="constructive")
            trace = refresh(enc, rng=stream, restart_cap=100_000)
            with uncounted():
                violations += decode(trace.output) != decode(enc)
        print(f"✅ p={p} n={n}: {per_point} runs")
    print(f"   violations: {violations}")
    return violations == 0


def check_lemma2_exact(seed, threads):
    """Exact refresh and reconstruct-refresh distributions coincide"""
    _banner("🧮 Exact distribution equality:")
    params = FieldParams(p=5, n=1)
    inputs = [Encoding(L, R, params) for L in nonzero_vectors(params) for R in nonzero_vectors(params)]
    inputs.append(Encoding.of((3,), (7,), FieldParams(p=11, n=1)))
    ok = True
    for enc in inputs:
        result = verify_lemma2(enc, threads=threads)
        ok = ok and result.equal
        status = "✅" if result.equal else "❌"
        print(f"{status} p={result.p} L={result.L} R={result.R} outcomes={result.outcomes_refresh}")

    dist = exact_distribution_refresh(inputs[0])
    a_marginal = marginal_summary(dist, "A")
    b_marginal = marginal_summary(dist, "B")
    print(f"   A-marginal uniform: {a_marginal['uniform']} (support {a_marginal['support']})")
    print(f"   B-marginal range: {b_marginal['min']} .. {b_marginal['max']} (support {b_marginal['support']})")
    return ok and a_marginal["uniform"]


def check_lemma2_monte_carlo(seed, samples, threads):
    """Sampled histograms at p=11, n=2 stay within three null baselines"""
    _banner("🎲 Monte Carlo distribution equality:")
    params = FieldParams(p=11, n=2)
    rng = SeededRng(seed, "acceptance/lemma2-mc")
    enc = encode(3, params, rng.stream("input"))
    result = monte_carlo_lemma2(enc, samples, rng, threads)
    print(f"   samples={samples} tv={result.tv_full:.5f} baseline={result.baseline_full:.5f}")
    for name, tv in result.marginal_tv.items():
        print(f"   {name}: tv={tv:.5f} baseline={result.marginal_baseline[name]:.5f}")
    for name, tv in result.joint_tv.items():
        print(f"   ({name}): tv={tv:.5f} baseline={result.joint_baseline[name]:.5f}")
    return result.passed


def check_linear_scaling(seed, trials):
    """Operation count grows linearly in n"""
    _banner("📈 Operation-count scaling:")
    result = measure_scaling([64, 128, 256], 65537, trials, SeededRng(seed, "acceptance/bench"))
    for point in result.points:
        print(f"   n={point.n}: mean_ops={point.mean_ops:.1f} max_attempt_ops={point.max_attempt_ops}")
    for key, ratio in result.doubling_ratios.items():
        print(f"   ratio {key}: {ratio:.4f}")
    print(f"   R^2 linear={result.r2_linear:.6f} quadratic={result.r2_quadratic:.6f}")
    ratios_ok = all(1.7 <= ratio <= 2.3 for ratio in result.doubling_ratios.values())
    return result.per_attempt_bound_ok and ratios_ok and result.r2_quadratic - result.r2_linear < 0.01


def check_restart_bound(seed, attempts, threads):
    """Per-attempt restart rate stays under 2n/p"""
    _banner("♻️  Restart bound:")
    ok = True
    for p, n in RESTART_POINTS:
        result = estimate_restart_rate(FieldParams(p=p, n=n), attempts, SeededRng(seed, f"acceptance/rate-{p}-{n}"), threads)
        status = "✅" if result.passed else "❌"
        print(f"{status} p={p} n={n}: rate={result.rate:.5f} bound={result.bound:.5f} ci=[{result.ci_low:.5f}, {result.ci_high:.5f}]")
        ok = ok and result.passed
    return ok


def check_reconstructor_fidelity(seed, traces):
    """Reconstruction reproduces real refresh views without messages"""
    _banner("🧩 Reconstructor fidelity:")
    params = FieldParams(p=65537, n=8)
    rng = SeededRng(seed, "acceptance/reconstruct")
    mismatches = 0
    sent = mock.Mock()
    for _ in range(traces):
        enc = encode(1 + rng.below(params.p - 1), params, rng, mode="constructive")
        trace = refresh(enc, rng=rng)
        cr = CommonRandomness(trace.view_L.V.nonzero(), trace.view_L.V_tilde.nonzero())
        with mock.patch.object(MemoryChannel, "send", sent):
            view_L, view_R = reconstruct(enc, trace.output, cr)
        mismatches += view_L != trace.view_L or view_R != trace.view_R
    print(f"   traces={traces} mismatches={mismatches} messages={sent.call_count}")
    return mismatches == 0 and sent.call_count == 0


def check_worked_example(seed):
    """Hand-traced p=11, n=2 refresh through the CLI"""
    _banner("📝 Worked example:")
    import main as cli

    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        (root / "L.vec").write_text("lrs-vec v1 p=11 n=2\n2\n3\n")
        (root / "R.vec").write_text("lrs-vec v1 p=11 n=2\n1\n4\n")
        (root / "oracle.vec").write_text(
            "lrs-vec v1 p=11 n=2 name=A\n1\n2\n"
            "lrs-vec v1 p=11 n=2 name=A_tilde\n2\n1\n"
            "lrs-vec v1 p=11 n=2 name=B\n5\n1\n"
            "lrs-vec v1 p=11 n=2 name=B_tilde\n1\n2\n"
        )
        status = cli.main([
            "refresh", "--l", str(root / "L.vec"), "--r", str(root / "R.vec"),
            "--force-oracle", str(root / "oracle.vec"), "--seed", str(seed), "--out-dir", str(root / "out"),
        ])
        L_prime = (root / "out" / "L_prime.vec").read_text()
        R_prime = (root / "out" / "R_prime.vec").read_text()
    ok = status == 0 and L_prime == "lrs-vec v1 p=11 n=2\n1\n5\n" and R_prime == "lrs-vec v1 p=11 n=2\n9\n1\n"
    print(f"   exit={status} L'={L_prime.split()[4:]} R'={R_prime.split()[4:]}")
    return ok


def check_budget_soundness(seed, games):
    """Random over-budget adversaries never get extra bits"""
    _banner("🔒 Leakage budget soundness:")
    params = FieldParams(p=101, n=4)
    lam = lemma1_budget(params)
    rng = SeededRng(seed, "acceptance/game")
    violations = 0
    refused = 0
    for _ in range(games):
        memory = serialize_shares_to_memory(encode(1 + rng.below(100), params, rng, mode="constructive"))
        adversary = RandomAdversary(rng, memory.count, memory.part_bits, memory.coord_bits, lam, queries=12)
        result = run_game(memory, adversary, lam)
        violations += not audit_budget(result.log, lam, memory.count)
        violations += any(bits > lam for bits in result.consumed)
        refused += sum(record.refused for record in result.log)
    print(f"   games={games} lambda={lam} refusals={refused} violations={violations}")
    return violations == 0


def main():
    parser = argparse.ArgumentParser(description="Full-scale acceptance run")
    parser.add_argument("--seed", type=int, default=env_seed())
    parser.add_argument("--threads", type=int, default=env_threads())
    parser.add_argument("--mc-samples", type=int, default=10 ** 6)
    args = parser.parse_args()
    configure_logging()

    print("🚀 LRS refresh acceptance run")
    print("=" * 60)

    deviations = []
    checks = [
        ("Inner-product preservation", lambda: check_inner_product_preservation(args.seed, 10 ** 5, deviations)),
        ("Exact distribution equality", lambda: check_lemma2_exact(args.seed, args.threads)),
        ("Monte Carlo distribution equality", lambda: check_lemma2_monte_carlo(args.seed, args.mc_samples, args.threads)),
        ("Linear operation count", lambda: check_linear_scaling(args.seed, 1000)),
        ("Restart bound", lambda: check_restart_bound(args.seed, 10 ** 5, args.threads)),
        ("Reconstructor fidelity", lambda: check_reconstructor_fidelity(args.seed, 10 ** 4)),
        ("Worked example", lambda: check_worked_example(args.seed)),
        ("Leakage budget soundness", lambda: check_budget_soundness(args.seed, 10 ** 4)),
    ]

    results = []
    for name, check in checks:
        started = time.perf_counter()
        try:
            result = check()
        except Exception as e:
            print(f"❌ {name} crashed: {e}")
            result = False
        results.append((name, result, time.perf_counter() - started))

    print("\n" + "=" * 60)
    print("📊 ACCEPTANCE SUMMARY:")
    print("=" * 60)
    passed = 0
    for name, result, elapsed in results:
        status = "✅ PASS" if result else "❌ FAIL"
        print(f"{status} {name} ({elapsed:.1f}s)")
        passed += bool(result)

    if deviations:
        print("\n📝 DEVIATIONS:")
        for reason in deviations:
            print(f"   - {reason}")

    print(f"\n🎯 Results: {passed}/{len(results)} checks passed")
    if passed != len(results):
        print(f"\n⚠️  {len(results) - passed} checks failed. See the output above.")
        return 1
    print("\n🎉 All acceptance checks passed!")
    return 0


if __name__ == "__main__":
    sys.exit(main())
