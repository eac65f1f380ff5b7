"""Command-line front end.

    python main.py encode --p 11 --n 2 --secret 3 --seed 7
    python main.py refresh --l L.vec --r R.vec --force-oracle oracle.vec
    python main.py verify-lemma2 --p 5 --n 1 --mode relaxed --exhaustive-inputs
    python main.py bench --p 65537 --n 64,128,256 --trials 1000

Exit status: 0 pass, 1 check failure, 2 usage or parse error, 3 refusal
(enumeration too large or restart cap reached).
"""

import argparse
import itertools
import json
import sys
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from experiments.bench import estimate_restart_rate, measure_scaling
from experiments.lemma2 import (
    COMPONENTS,
    JOINTS,
    MAX_ENUMERATION,
    exact_distribution_refresh,
    marginal_summary,
    monte_carlo_lemma2,
    verify_lemma2,
)
from leakage.adversaries import parse_adversary
from leakage.game import (
    DEFAULT_MAX_QUERIES,
    audit_budget,
    estimate_distinguishing_advantage,
    format_log,
    lemma1_budget,
    run_game,
    serialize_shares_to_memory,
)
from lrs.encoding import ENCODE_MODES, Encoding, decode, encode, nonzero_vectors
from lrs.field import FieldVector, uncounted
from lrs.oracle import ForcedOracle, OracleSample, uniform_oracle
from lrs.rng import GENERATOR_NAME, SeededRng
from models.schemas import RunConfig
from protocols.reconstructor import (
    CommonRandomness,
    check_reconstruction_constraints,
    reconstruct,
    sample_common_randomness,
)
from protocols.refresh import ViewL, ViewR, refresh_epochs, views_consistent
from utils.config import configure_logging, env_restart_cap, env_seed, env_threads
from utils.errors import ConfigurationError, LRSError
from utils.report import Report
from utils.vecfile import read_named_groups, read_vector, write_vectors

load_dotenv()

ORACLE_BLOCKS = ("A", "A_tilde", "B", "B_tilde")
COMMON_BLOCKS = ("V", "V_tilde")


def _dimensions(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ConfigurationError(f"--n expects an integer or a comma-separated list, got {text!r}")
    if not values:
        raise ConfigurationError("--n must not be empty")
    return values


def _config(args: argparse.Namespace, p: Optional[int] = None, n: Optional[int] = None, **extra) -> RunConfig:
    p = p if p is not None else args.p
    if n is None:
        if args.n is None:
            raise ConfigurationError("--n is required for this command")
        dims = _dimensions(args.n)
        if len(dims) != 1 and "n_values" not in extra:
            raise ConfigurationError(f"this command takes a single --n, got {args.n!r}")
        n = dims[0]
    if p is None:
        raise ConfigurationError("--p is required for this command")
    return RunConfig(
        p=p,
        n=n,
        seed=args.seed if args.seed is not None else env_seed(),
        mode=args.mode,
        trials=args.trials,
        restart_cap=args.restart_cap if args.restart_cap is not None else env_restart_cap(),
        **extra,
    )


def _threads(args: argparse.Namespace) -> int:
    threads = args.threads if args.threads is not None else env_threads()
    if threads < 1:
        raise ConfigurationError(f"--threads must be >= 1, got {threads}")
    return threads


def _load_encoding(args: argparse.Namespace, left: str, right: str) -> tuple[Encoding, RunConfig]:
    L, R = read_vector(Path(left)), read_vector(Path(right))
    if L.p != R.p or len(L) != len(R):
        raise ConfigurationError(f"{left} and {right} declare different p or n")
    if args.p is not None and args.p != L.p:
        raise ConfigurationError(f"--p {args.p} disagrees with the input files (p={L.p})")
    if args.n is not None and _dimensions(args.n) != (len(L),):
        raise ConfigurationError(f"--n {args.n} disagrees with the input files (n={len(L)})")
    config = _config(args, p=L.p, n=len(L))
    return Encoding.of(L.coords, R.coords, config.params()), config


def _view_blocks(view_L: ViewL, view_R: ViewR) -> list[tuple[str, FieldVector]]:
    return [
        ("view_L.L", view_L.L),
        ("view_L.A", view_L.A),
        ("view_L.V", view_L.V),
        ("view_L.A_tilde", view_L.A_tilde),
        ("view_L.V_tilde", view_L.V_tilde),
        ("view_R.R", view_R.R),
        ("view_R.B", view_R.B),
        ("view_R.V", view_R.V),
        ("view_R.B_tilde", view_R.B_tilde),
        ("view_R.V_tilde", view_R.V_tilde),
    ]


def _coords(vec: FieldVector) -> str:
    return " ".join(str(c) for c in vec.coords)


def _finish(report: Report, out_dir: Path, passed: bool) -> int:
    report.status(passed)
    report.write(out_dir)
    print(report.to_text(), end="")
    return 0 if passed else 1


def cmd_encode(args: argparse.Namespace) -> int:
    config = _config(args)
    params = config.params()
    rng = SeededRng(config.seed, "encode")
    enc = encode(args.secret, params, rng, mode=args.encode_mode)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_vectors(out_dir / "L.vec", [(None, enc.L)])
    write_vectors(out_dir / "R.vec", [(None, enc.R)])

    with uncounted():
        decoded = decode(enc).value
    report = Report("encode", config)
    report.add("rng", GENERATOR_NAME)
    report.add("encode_mode", args.encode_mode)
    report.add("secret", args.secret % params.p)
    report.add("decoded", decoded)
    return _finish(report, out_dir, decoded == args.secret % params.p)


def cmd_decode(args: argparse.Namespace) -> int:
    enc, config = _load_encoding(args, args.l, args.r)
    with uncounted():
        secret = decode(enc).value
    report = Report("decode", config)
    report.add("secret", secret)
    return _finish(report, Path(args.out_dir), True)


def _forced_oracle(path: str, enc: Encoding) -> ForcedOracle:
    samples = []
    for group in read_named_groups(Path(path), ORACLE_BLOCKS):
        for vec in group.values():
            vec.check_params(enc.params)
        samples.append(OracleSample(group["A"], group["A_tilde"], group["B"], group["B_tilde"], enc.params))
    return ForcedOracle(samples, fallback=uniform_oracle)


def cmd_refresh(args: argparse.Namespace) -> int:
    if args.epochs < 1:
        raise ConfigurationError(f"--epochs must be >= 1, got {args.epochs}")
    enc, config = _load_encoding(args, args.l, args.r)
    oracle = _forced_oracle(args.force_oracle, enc) if args.force_oracle else None
    traces = refresh_epochs(enc, args.epochs, SeededRng(config.seed, "refresh"), oracle, config.restart_cap)

    report = Report("refresh", config)
    report.add("epochs", args.epochs)
    passed = True
    current = enc
    with uncounted():
        secret = decode(enc)
    for epoch, trace in enumerate(traces):
        prefix = f"epoch.{epoch}." if args.epochs > 1 else ""
        consistent = views_consistent(current, trace.output, trace.view_L, trace.view_R)
        with uncounted():
            preserved = decode(trace.output) == secret
        passed = passed and consistent and preserved
        report.add(f"{prefix}restarts", trace.restarts)
        report.add(f"{prefix}failed_steps", trace.failed_steps)
        report.add(f"{prefix}alpha", trace.alpha.value)
        report.update(trace.op_count.as_record("ops"), prefix)
        report.add(f"{prefix}max_attempt_ops", max(ops.total for ops in trace.attempt_ops))
        for i, message in enumerate(trace.messages):
            report.add(f"{prefix}transcript.{i}", f"{message.direction} {_coords(message.payload)}")
        report.add(f"{prefix}views_consistent", consistent)
        report.add(f"{prefix}secret_preserved", preserved)
        current = trace.output

    final = traces[-1]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_vectors(out_dir / "L_prime.vec", [(None, final.output.L)])
    write_vectors(out_dir / "R_prime.vec", [(None, final.output.R)])
    write_vectors(out_dir / "views.vec", _view_blocks(final.view_L, final.view_R))
    report.add("L_prime", _coords(final.output.L))
    report.add("R_prime", _coords(final.output.R))
    return _finish(report, out_dir, passed)


def cmd_reconstruct(args: argparse.Namespace) -> int:
    old, config = _load_encoding(args, args.l, args.r)
    new, _ = _load_encoding(args, args.l_prime, args.r_prime)
    if args.common:
        group = read_named_groups(Path(args.common), COMMON_BLOCKS)[0]
        cr = CommonRandomness(group["V"].nonzero(), group["V_tilde"].nonzero())
    else:
        cr = sample_common_randomness(config.params(), SeededRng(config.seed, "reconstruct"))

    view_L, view_R = reconstruct(old, new, cr)
    constraints_ok = check_reconstruction_constraints(view_L, view_R)
    consistent = views_consistent(old, new, view_L, view_R)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_vectors(out_dir / "views.vec", _view_blocks(view_L, view_R))
    write_vectors(out_dir / "common.vec", [("V", cr.V), ("V_tilde", cr.V_tilde)])
    report = Report("reconstruct", config)
    report.add("constraints_ok", constraints_ok)
    report.add("views_consistent", consistent)
    return _finish(report, out_dir, constraints_ok and consistent)


def _lemma2_inputs(args: argparse.Namespace) -> tuple[list[Encoding], RunConfig]:
    if args.l or args.r:
        if not (args.l and args.r):
            raise ConfigurationError("--l and --r must be given together")
        if args.exhaustive_inputs:
            raise ConfigurationError("--exhaustive-inputs cannot be combined with --l and --r")
        enc, config = _load_encoding(args, args.l, args.r)
        return [enc], config
    config = _config(args)
    params = config.params()
    if args.exhaustive_inputs:
        shares = list(nonzero_vectors(params))
        return [Encoding(L, R, params) for L, R in itertools.product(shares, repeat=2)], config
    return [encode(args.secret, params, SeededRng(config.seed, "lemma2-input"))], config


def cmd_verify_lemma2(args: argparse.Namespace) -> int:
    inputs, config = _lemma2_inputs(args)
    threads = _threads(args)
    report = Report("verify-lemma2", config)
    report.add("inputs", len(inputs))

    if args.monte_carlo:
        result = monte_carlo_lemma2(inputs[0], config.trials, SeededRng(config.seed, "lemma2"), threads)
        report.add("method", "monte-carlo")
        report.add("L", _coords(inputs[0].L))
        report.add("R", _coords(inputs[0].R))
        report.add("tv_full", result.tv_full)
        report.add("baseline_full", result.baseline_full)
        for name in COMPONENTS:
            report.add(f"marginal.{name}.tv", result.marginal_tv[name])
            report.add(f"marginal.{name}.baseline", result.marginal_baseline[name])
        for name in JOINTS:
            report.add(f"joint.{name}.tv", result.joint_tv[name])
            report.add(f"joint.{name}.baseline", result.joint_baseline[name])
        return _finish(report, Path(args.out_dir), result.passed)

    report.add("method", "exact")
    equal = 0
    first_failure = None
    for i, enc in enumerate(inputs):
        result = verify_lemma2(enc, args.limit, threads)
        equal += result.equal
        if not result.equal and first_failure is None:
            first_failure = f"input={i} {result.first_discrepancy}"
        if len(inputs) == 1:
            report.update(result.model_dump(exclude={"first_discrepancy"}))
    report.add("inputs_equal", equal)
    report.add("first_discrepancy", first_failure)

    if args.marginals:
        dist = exact_distribution_refresh(inputs[0], args.limit)
        for name in COMPONENTS:
            report.update(marginal_summary(dist, name), f"marginal.{name}.")
    return _finish(report, Path(args.out_dir), equal == len(inputs))


def cmd_restart_rate(args: argparse.Namespace) -> int:
    config = _config(args)
    result = estimate_restart_rate(config.params(), config.trials, SeededRng(config.seed, "restart-rate"), _threads(args))
    report = Report("restart-rate", config)
    report.update(result.model_dump(exclude={"p", "n", "passed"}))
    return _finish(report, Path(args.out_dir), result.passed)


def cmd_bench(args: argparse.Namespace) -> int:
    dims = _dimensions(args.n)
    config = _config(args, n=dims[0], n_values=dims)
    result = measure_scaling(
        dims, config.p, config.trials, SeededRng(config.seed, "bench"), timing=args.timing, restart_cap=config.restart_cap
    )
    report = Report("bench", config)
    for point in result.points:
        report.update(point.model_dump(exclude={"n", "trials"}, exclude_none=True), f"n.{point.n}.")
    report.add("slope", result.slope)
    report.add("intercept", result.intercept)
    report.add("r2_linear", result.r2_linear)
    report.add("r2_quadratic", result.r2_quadratic)
    for key, ratio in result.doubling_ratios.items():
        report.add(f"ratio.{key}", ratio)
    report.add("per_attempt_bound_ok", result.per_attempt_bound_ok)

    ratios_ok = all(1.7 <= ratio <= 2.3 for ratio in result.doubling_ratios.values())
    linear_ok = result.r2_quadratic - result.r2_linear < 0.01
    return _finish(report, Path(args.out_dir), result.per_attempt_bound_ok and ratios_ok and linear_ok)


def cmd_game(args: argparse.Namespace) -> int:
    config = _config(args)
    params = config.params()
    lam = args.lam if args.lam is not None else lemma1_budget(params)
    rng = SeededRng(config.seed, "game")
    enc = encode(args.secret, params, rng.stream("encode"), mode=args.encode_mode)
    if args.epoch:
        enc = refresh_epochs(enc, args.epoch, rng.stream("epochs"), restart_cap=config.restart_cap)[-1].output

    memory = serialize_shares_to_memory(enc)
    adversary_text = args.adversary or ""
    result = run_game(memory, parse_adversary(adversary_text), lam, args.max_queries)
    audit_ok = audit_budget(result.log, lam, memory.count)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "game_log.jsonl").write_text("".join(line + "\n" for line in format_log(result.log)), encoding="utf-8")

    report = Report("game", config)
    report.add("lambda", lam)
    report.add("lemma1_lambda", lemma1_budget(params))
    report.add("epoch", args.epoch)
    report.add("queries", len(result.log))
    report.add("refused", sum(record.refused for record in result.log))
    for part, bits in enumerate(result.consumed, start=1):
        report.add(f"consumed.part{part}", bits)
    report.add("output", json.dumps(result.output))
    report.add("budget_audit", audit_ok)

    if args.distinguish:
        try:
            s0, s1 = (int(s) for s in args.distinguish.split(","))
        except ValueError:
            raise ConfigurationError(f"--distinguish expects S0,S1, got {args.distinguish!r}")
        estimate = estimate_distinguishing_advantage(
            params, lambda: parse_adversary(adversary_text), s0, s1, config.trials, rng.stream("distinguish"), lam
        )
        report.update(estimate.model_dump(exclude={"samples", "lambda_bits", "lemma1_lambda"}), "distinguish.")
    return _finish(report, out_dir, audit_ok)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, help="prime modulus")
    common.add_argument("--n", help="dimension (bench takes a comma-separated list)")
    common.add_argument("--seed", type=int, help="64-bit seed (default: LRS_SEED or 0)")
    common.add_argument("--threads", type=int, help="worker threads (default: LRS_THREADS or 1)")
    common.add_argument("--mode", choices=("standard", "relaxed"), default="standard")
    common.add_argument("--trials", type=int, default=1000)
    common.add_argument("--restart-cap", type=int, help="default: LRS_RESTART_CAP or 1000")
    common.add_argument("--out-dir", default="lrs-out")
    common.add_argument("--log-level", help="default: LRS_LOG_LEVEL or WARNING")

    parser = argparse.ArgumentParser(prog="lrs", description="Inner-product leakage-resilient storage toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", parents=[common], help="encode a secret as an (L, R) file pair")
    p.add_argument("--secret", type=int, required=True)
    p.add_argument("--encode-mode", choices=ENCODE_MODES, default="auto")
    p.set_defaults(handler=cmd_encode)

    p = sub.add_parser("decode", parents=[common], help="print <L, R>")
    p.add_argument("--l", required=True)
    p.add_argument("--r", required=True)
    p.set_defaults(handler=cmd_decode)

    p = sub.add_parser("refresh", parents=[common], help="run the two-party refresh protocol")
    p.add_argument("--l", required=True)
    p.add_argument("--r", required=True)
    p.add_argument("--force-oracle", help="file of A, A_tilde, B, B_tilde blocks replayed before random samples")
    p.add_argument("--epochs", type=int, default=1)
    p.set_defaults(handler=cmd_refresh)

    p = sub.add_parser("reconstruct", parents=[common], help="rebuild both refresh views without interaction")
    p.add_argument("--l", required=True)
    p.add_argument("--r", required=True)
    p.add_argument("--l-prime", required=True)
    p.add_argument("--r-prime", required=True)
    p.add_argument("--common", help="file with V and V_tilde blocks (default: sampled from the seed)")
    p.set_defaults(handler=cmd_reconstruct)

    p = sub.add_parser("verify-lemma2", parents=[common], help="compare refresh and reconstruct-refresh distributions")
    p.add_argument("--l")
    p.add_argument("--r")
    p.add_argument("--secret", type=int, default=1)
    p.add_argument("--exhaustive-inputs", action="store_true")
    p.add_argument("--monte-carlo", action="store_true", help="sample --trials outcomes instead of enumerating")
    p.add_argument("--marginals", action="store_true")
    p.add_argument("--limit", type=int, default=MAX_ENUMERATION)
    p.set_defaults(handler=cmd_verify_lemma2)

    p = sub.add_parser("restart-rate", parents=[common], help="estimate the per-attempt restart probability")
    p.set_defaults(handler=cmd_restart_rate)

    p = sub.add_parser("bench", parents=[common], help="field-operation scaling across n")
    p.add_argument("--timing", action="store_true", help="also record wall time (output is then not reproducible)")
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("game", parents=[common], help="run a lambda-leakage game against encoded shares")
    p.add_argument("--lambda", dest="lam", type=int)
    p.add_argument("--adversary", help="queries such as '1@bit-select:0,2;2@parity:0,1'")
    p.add_argument("--secret", type=int, default=1)
    p.add_argument("--encode-mode", choices=ENCODE_MODES, default="auto")
    p.add_argument("--epoch", type=int, default=0, help="leak from the shares after this many refreshes")
    p.add_argument("--max-queries", type=int, default=DEFAULT_MAX_QUERIES)
    p.add_argument("--distinguish", help="S0,S1: also estimate the adversary's distinguishing advantage")
    p.set_defaults(handler=cmd_game)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        configure_logging(args.log_level)
        return args.handler(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LRSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_status


if __name__ == "__main__":
    sys.exit(main())
