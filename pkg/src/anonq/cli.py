"""Command-line front end.

Subcommands: ``generate``, ``solve``, ``verify`` and ``bench``.  Exit codes
are 0 on success, 2 on usage errors, 3 when a verification fails and 4 when
a scale guard trips.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import algorithms as alg
from . import bruteforce
from . import game as gc
from . import generators as gen
from . import oracle as orc
from .errors import ConstructionError, DomainError, NotFoundError, ScaleError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VERIFY = 3
EXIT_SCALE = 4

SOLVE_ALGORITHMS = ("symmetric-pne", "lipschitz", "smoothed", "uniform")
BENCH_ALGORITHMS = SOLVE_ALGORITHMS + ("profile-scan", "ap-probe")
CSV_HEADER = (
    "family", "n", "seed", "algorithm", "eps_target", "regret", "ws_slack",
    "sp", "ap", "pr", "payoff_units", "wall_ms",
)


class UsageError(Exception):
    pass


def algorithm_rng(seed: int, n: int) -> np.random.Generator:
    """Stream for one run, keyed by ``(seed, n)`` so that runs are replayable."""
    return np.random.default_rng(np.random.SeedSequence([seed, n]))


@dataclass
class BenchRecord:
    family: str
    n: int
    seed: int
    algorithm: str
    eps_target: float
    regret: float
    ws_slack: float
    sp: int
    ap: int
    pr: int
    payoff_units: int
    wall_ms: int

    def row(self) -> list:
        return [getattr(self, name) for name in CSV_HEADER]


@dataclass
class RunResult:
    profile: gc.MixedProfile | None
    ledger: orc.QueryLedger
    report: gc.EquilibriumReport | None
    eps_target: float
    info: dict
    wall_ms: int


def _params_from_args(n: int, args) -> alg.SmoothedParams:
    if args.epsilon is not None:
        params = alg.derive_params(n, args.epsilon)
    else:
        params = alg.default_params(n)
    overrides = {
        name: getattr(args, name)
        for name in ("zeta", "delta", "tau")
        if getattr(args, name, None) is not None
    }
    if overrides:
        params = alg.SmoothedParams(**{**asdict(params), **overrides})
    return params


def run_algorithm(game: gc.AnonymousGame, algorithm: str, args, seed: int) -> RunResult:
    """Run one algorithm on ``game`` behind a fresh table oracle."""
    n = game.n
    info: dict = {"algorithm": algorithm}
    if algorithm == "uniform":
        start = time.perf_counter()
        if game.k == 2:
            profile = alg.uniform_mix(n)
            report = gc.evaluate_profile(game, profile)
        else:
            profile, report = None, None
            info["eps_wsne"] = gc.uniform_mix_regret_k(game)
        wall = time.perf_counter() - start
        bound = math.e / math.pi / math.sqrt(n - 1) if n > 1 else 0.0
        return RunResult(profile, orc.QueryLedger(n=n), report, bound, info, int(wall * 1000))

    oracle = orc.table_oracle(game)
    start = time.perf_counter()
    if algorithm == "symmetric-pne":
        m = alg.symmetric_pne(oracle, n)
        actions = alg.symmetric_profile(n, m)
        info["m"] = m
        target = 0.0
    elif algorithm == "lipschitz":
        delta = args.delta or 0.0
        source = oracle
        if args.noisy and delta > 0:
            source = orc.NoisyOracle(oracle, delta, algorithm_rng(seed, n))
        trace = alg.LipschitzTrace()
        actions = alg.lipschitz_pure_ne(source, n, delta, trace)
        info.update(candidates=trace.candidates, outcome=trace.outcome, fill_rule=trace.fill_rule)
        target = None
    elif algorithm == "smoothed":
        params = _params_from_args(n, args)
        trace = alg.LipschitzTrace()
        if args.exact:
            smoothed = gc.smoothed_game_exact(game, params.zeta)
            oracle = orc.table_oracle(smoothed)
            start = time.perf_counter()
            pure = alg.lipschitz_pure_ne(oracle, n, 0.0, trace)
            profile = alg.smoothed_profile(pure, params.zeta)
        else:
            profile = alg.smoothed_approx_ne(oracle, n, params, algorithm_rng(seed, n), trace)
            info["samples_per_query"] = orc.AccurateQueryConfig.for_game(
                n, params.delta, params.tau
            ).samples_per_query
        info.update(params=asdict(params), candidates=trace.candidates, fill_rule=trace.fill_rule)
        actions = None
        target = params.epsilon_target if params.epsilon_target is not None else params.guarantee(n)
    elif algorithm == "ap-probe":
        actions = alg.ap_probe(oracle)
        target = 0.0
    elif algorithm == "profile-scan":
        actions = alg.profile_scan(oracle)
        target = 0.0
    else:
        raise UsageError(f"unknown algorithm {algorithm!r}")
    wall = time.perf_counter() - start

    if actions is not None:
        profile = gc.MixedProfile.from_pure(actions)
    report = gc.evaluate_profile(game, profile)
    if target is None:
        lam = gc.step_lipschitz_constant(game)
        target = 3 * (lam + (args.delta or 0.0))
    return RunResult(profile, oracle.ledger, report, target, info, int(wall * 1000))


def _load_game(path) -> gc.AnonymousGame:
    try:
        return gc.game_from_json(gc.load_json(path))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read game {path}: {exc}") from exc


def _write_json(obj: dict, out) -> None:
    text = json.dumps(obj)
    if out in (None, "-"):
        sys.stdout.write(text + "\n")
    else:
        Path(out).write_text(text)


# -- subcommands -----------------------------------------------------------


def cmd_generate(args) -> int:
    options = {key: getattr(args, key) for key in ("k", "hidden", "lam") if getattr(args, key) is not None}
    game, extra = gen.generate(args.family, n=args.n, seed=args.seed, **options)
    _write_json(gc.game_to_json(game, compact=args.compact), args.out)
    if extra is not None:
        if args.spec_out:
            spec_path = args.spec_out
        elif args.out not in (None, "-"):
            spec_path = str(Path(args.out).with_suffix("")) + ".spec.json"
        else:
            spec_path = f"lcp-k{extra.k}-seed{args.seed}.spec.json"
        Path(spec_path).write_text(json.dumps(extra.to_json()))
        print(f"lcp spec written to {spec_path}", file=sys.stderr)
    return EXIT_OK


def cmd_solve(args) -> int:
    game = _load_game(args.game)
    try:
        result = run_algorithm(game, args.algorithm, args, args.seed)
    except NotFoundError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    out = {
        "algorithm": args.algorithm,
        "seed": args.seed,
        "eps_target": result.eps_target,
        "info": result.info,
        "ledger": result.ledger.to_json(),
        "profile": gc.profile_to_json(result.profile) if result.profile is not None else None,
        "report": result.report.to_json() if result.report is not None else None,
    }
    _write_json(out, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    game = _load_game(args.game)
    try:
        data = gc.load_json(args.profile)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read profile {args.profile}: {exc}") from exc
    # accept either a bare profile or the output of ``solve``
    if isinstance(data.get("profile"), dict):
        data = data["profile"]
    profile = gc.profile_from_json(data)
    report = gc.evaluate_profile(game, profile, support_threshold=args.support_threshold)
    out = report.to_json()
    if args.brute:
        if not profile.is_pure():
            raise UsageError("--brute cross-checks pure profiles only")
        if game.n > bruteforce.MAX_PURE_PLAYERS:
            raise ScaleError(f"--brute supports n <= {bruteforce.MAX_PURE_PLAYERS}")
        brute = bruteforce.pure_regret(game, profile.to_pure())
        out["brute_max_regret"] = float(brute.max())
        out["brute_agrees"] = bool(np.allclose(brute, report.regret, atol=1e-12))
        out["pure_equilibria"] = [p.tolist() for p in bruteforce.enumerate_pure_ne(game)]
    _write_json(out, args.out)
    failed = args.eps is not None and report.eps_ne > args.eps
    failed |= args.wsne is not None and report.eps_wsne > args.wsne
    failed |= args.brute and not out["brute_agrees"]
    return EXIT_VERIFY if failed else EXIT_OK


def _parse_ns(text: str) -> list[int]:
    try:
        ns = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"--ns must be a comma-separated list of integers: {text!r}") from exc
    if not ns:
        raise UsageError("--ns must name at least one n")
    if any(n < 1 for n in ns):
        raise UsageError("every n must be positive")
    return ns


def _bench_one(args, n: int, trial: int) -> BenchRecord:
    seed = args.seed + trial
    options = {key: getattr(args, key) for key in ("k", "lam") if getattr(args, key) is not None}
    game, _ = gen.generate(args.family, n=n, seed=seed, **options)
    result = run_algorithm(game, args.algorithm, args, seed)
    ledger = result.ledger
    if result.report is not None:
        regret, slack = result.report.eps_ne, result.report.eps_wsne
    else:
        regret = slack = result.info["eps_wsne"]
    return BenchRecord(
        family=args.family, n=game.n, seed=seed, algorithm=args.algorithm,
        eps_target=result.eps_target, regret=regret, ws_slack=slack,
        sp=ledger.single_payoff_count, ap=ledger.all_players_count, pr=ledger.profile_count,
        payoff_units=ledger.payoff_units, wall_ms=result.wall_ms,
    )


def worker_count() -> int:
    raw = os.environ.get("ANONQ_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise UsageError(f"ANONQ_THREADS must be an integer, got {raw!r}") from exc


def run_bench(args) -> tuple[list[BenchRecord], list[str]]:
    ns = _parse_ns(args.ns)
    jobs = [(n, t) for n in ns for t in range(args.trials)]

    def task(job):
        try:
            return _bench_one(args, *job), None
        except (NotFoundError, ConstructionError) as exc:
            return None, f"n={job[0]} trial={job[1]}: {exc}"

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        outcomes = list(pool.map(task, jobs))
    records = [rec for rec, _ in outcomes if rec is not None]
    errors = [err for _, err in outcomes if err is not None]
    return records, errors


def cmd_bench(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    records, errors = run_bench(args)
    if args.csv in (None, "-"):
        handle = io.StringIO()
        _write_csv(handle, records, header=True)
        sys.stdout.write(handle.getvalue())
    else:
        path = Path(args.csv)
        fresh = not path.exists() or path.stat().st_size == 0
        with path.open("a", newline="") as fh:
            _write_csv(fh, records, header=fresh)
    if args.json:
        Path(args.json).write_text(json.dumps([asdict(r) for r in records]))
    for err in errors:
        print(f"run failed: {err}", file=sys.stderr)
    return EXIT_VERIFY if errors else EXIT_OK


def _write_csv(handle, records, header: bool) -> None:
    writer = csv.writer(handle)
    if header:
        writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow(rec.row())


# -- argument parsing ------------------------------------------------------


def _add_algorithm_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=float, help="target epsilon for smoothed (derives zeta, delta, tau)")
    p.add_argument("--zeta", type=float, help="override the smoothing floor")
    p.add_argument("--delta", type=float, help="query accuracy (lipschitz) or sampling accuracy (smoothed)")
    p.add_argument("--tau", type=float, help="override the failure probability")
    p.add_argument("--noisy", action="store_true", help="lipschitz: inject uniform noise of size --delta")
    p.add_argument("--exact", action="store_true", help="smoothed: query the exactly smoothed game")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anonq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a game JSON file")
    g.add_argument("--family", required=True, choices=gen.FAMILIES)
    g.add_argument("--n", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--k", type=int, help="lcp: bits per player (n = 2^k)")
    g.add_argument("--hidden", type=int, help="hidden-minority: zero-based hidden player")
    g.add_argument("--lam", type=float, help="random-lipschitz: step bound (default 1/n)")
    g.add_argument("--compact", action="store_true", help="store symmetric games as one table")
    g.add_argument("--out", default="-")
    g.add_argument("--spec-out", help="lcp: path of the sidecar spec JSON")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="run an algorithm and write profile, ledger and report")
    s.add_argument("game")
    s.add_argument("--algorithm", required=True, choices=SOLVE_ALGORITHMS)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="-")
    _add_algorithm_params(s)
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="evaluate a profile against a game")
    v.add_argument("game")
    v.add_argument("profile")
    v.add_argument("--support-threshold", type=float, default=gc.DEFAULT_SUPPORT_THRESHOLD)
    v.add_argument("--eps", type=float, help="exit 3 if the profile's epsilon exceeds this")
    v.add_argument("--wsne", type=float, help="exit 3 if the well-supported epsilon exceeds this")
    v.add_argument("--brute", action="store_true", help="cross-check pure profiles by enumeration")
    v.add_argument("--out", default="-")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="seeded experiments, one CSV row per run")
    b.add_argument("--family", required=True, choices=gen.FAMILIES)
    b.add_argument("--ns", required=True, help="comma-separated player counts")
    b.add_argument("--trials", type=int, default=1)
    b.add_argument("--algorithm", required=True, choices=BENCH_ALGORITHMS)
    b.add_argument("--seed", type=int, default=0, help="trial t uses seed + t")
    b.add_argument("--k", type=int)
    b.add_argument("--lam", type=float)
    b.add_argument("--csv", default="-", help="CSV path (appended to) or - for stdout")
    b.add_argument("--json", help="also write records as a JSON list")
    _add_algorithm_params(b)
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ScaleError as exc:
        print(f"scale guard: {exc}", file=sys.stderr)
        return EXIT_SCALE
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
