"""Monte Carlo sweep driver and command-line interface.

Runs every selected algorithm on common channel draws across an
(SNR, antenna-count) grid and writes one CSV row per (trial, algorithm).
Each trial's random stream is derived from the master seed with a
splitmix64 chain over (seed, snr_db bit pattern, antennas, trial index),
so records are reproducible regardless of execution order or thread count.
"""

from __future__ import annotations

import argparse
import math
import struct
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from . import algorithms, upper_bound
from .algorithms import PiaConfig
from .model import SystemParams, pure_amplification, sample_channels, sum_rate
from .reformulation import build_forms, kkt_residual

__all__ = [
    "ALGORITHM_REGISTRY",
    "SweepConfig",
    "TrialRecord",
    "trial_seed",
    "run_trial",
    "run_sweep",
    "parse_cli",
    "main",
]

ALGORITHM_REGISTRY = ("pia", "asa", "lss", "maxsnr1", "maxsinr2", "pureamp", "upper")

CSV_HEADER = "snr_db,antennas,algorithm,trial,rate1,rate2,sum_rate,iterations,converged"

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SweepConfig:
    antennas: tuple[int, ...] = (1, 2, 4, 8)
    snr_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    trials: int = 500
    algorithms: tuple[str, ...] = ALGORITHM_REGISTRY
    seed: int = 0
    out: str = "results.csv"
    pia_max_iter: int = 20
    pia_init: str = "pureamp"
    threads: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if any(m < 1 for m in self.antennas):
            raise ValueError("antenna counts must be >= 1")
        unknown = [a for a in self.algorithms if a not in ALGORITHM_REGISTRY]
        if unknown:
            raise ValueError(f"unknown algorithms: {', '.join(unknown)}")
        if not self.algorithms:
            raise ValueError("algorithm set must not be empty")


@dataclass(frozen=True)
class TrialRecord:
    snr_db: float
    antennas: int
    algorithm: str
    trial: int
    rate1: float
    rate2: float
    sum_rate: float
    iterations: int
    converged: bool
    degenerate: bool = False

    def csv_row(self) -> str:
        return (
            f"{self.snr_db:.10g},{self.antennas},{self.algorithm},{self.trial},"
            f"{self.rate1:.10g},{self.rate2:.10g},{self.sum_rate:.10g},"
            f"{self.iterations},{int(self.converged)}"
        )


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def trial_seed(master_seed: int, snr_db: float, antennas: int, trial: int) -> int:
    """64-bit per-trial seed; the snr enters through its IEEE-754 bit pattern."""
    snr_bits = struct.unpack("<Q", struct.pack("<d", float(snr_db)))[0]
    h = _splitmix64(master_seed & _MASK64)
    for v in (snr_bits, antennas, trial):
        h = _splitmix64(h ^ (v & _MASK64))
    return h


def run_trial(cfg: SweepConfig, snr_db: float, antennas: int, trial_idx: int) -> list[TrialRecord]:
    """One channel draw, all selected algorithms on it (paired comparison)."""
    p = 10.0 ** (snr_db / 10.0)  # relay and BS share the same power
    rng = np.random.Generator(np.random.PCG64(trial_seed(cfg.seed, snr_db, antennas, trial_idx)))
    cs = sample_channels(SystemParams(antennas, p, p), rng)
    forms = build_forms(cs, p, p)

    solvers = {
        "pia": lambda: algorithms.pia(forms, PiaConfig(max_iter=cfg.pia_max_iter, init=cfg.pia_init)),
        "asa": lambda: algorithms.asa(forms),
        "lss": lambda: algorithms.lss(forms),
        "maxsnr1": lambda: algorithms.max_snr1(forms),
        "maxsinr2": lambda: algorithms.max_sinr2(forms),
    }

    records = []
    for name in ALGORITHM_REGISTRY:
        if name not in cfg.algorithms:
            continue
        if name in solvers:
            sol = solvers[name]()
            records.append(TrialRecord(
                snr_db=snr_db, antennas=antennas, algorithm=name, trial=trial_idx,
                rate1=sol.rates.r1, rate2=sol.rates.r2, sum_rate=sol.rates.sum,
                iterations=sol.iterations if name == "pia" else 0,
                converged=sol.converged,
            ))
        elif name == "pureamp":
            rates = sum_rate(cs, pure_amplification(cs, p, p), p)
            records.append(TrialRecord(
                snr_db=snr_db, antennas=antennas, algorithm=name, trial=trial_idx,
                rate1=rates.r1, rate2=rates.r2, sum_rate=rates.sum,
                iterations=0, converged=True, degenerate=rates.degenerate,
            ))
        else:  # upper
            bound = upper_bound.r_ub(cs, p, p)
            records.append(TrialRecord(
                snr_db=snr_db, antennas=antennas, algorithm=name, trial=trial_idx,
                rate1=bound.r1_at_opt, rate2=bound.r2_at_opt, sum_rate=bound.r_ub,
                iterations=0, converged=True,
            ))
    return records


def _summarize(records: list[TrialRecord]) -> list[tuple]:
    """Mean sum rate per (snr, antennas, algorithm); degenerate rows excluded."""
    groups: dict[tuple, list[TrialRecord]] = {}
    for rec in records:
        groups.setdefault((rec.snr_db, rec.antennas, rec.algorithm), []).append(rec)
    rows = []
    for (snr, m, algo), recs in groups.items():
        clean = [r.sum_rate for r in recs if not r.degenerate]
        mean = float(np.mean(clean)) if clean else math.nan
        rows.append((snr, m, algo, mean, len(clean), len(recs) - len(clean)))
    order = {name: i for i, name in enumerate(ALGORITHM_REGISTRY)}
    rows.sort(key=lambda r: (r[0], r[1], order[r[2]]))
    return rows


def run_sweep(cfg: SweepConfig, stream=None) -> list[TrialRecord]:
    """Execute the full sweep, write the CSV, print the summary table.

    Tasks may run on a thread pool, but rows are buffered and emitted in
    (snr, antennas, trial, registry) order, so the CSV bytes do not depend
    on the thread count.
    """
    stream = stream or sys.stdout
    tasks = [(snr, m, t) for snr in cfg.snr_db for m in cfg.antennas for t in range(cfg.trials)]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(lambda args: run_trial(cfg, *args), tasks))
    else:
        results = [run_trial(cfg, *task) for task in tasks]
    records = [rec for batch in results for rec in batch]

    with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for rec in records:
            fh.write(rec.csv_row() + "\n")

    print(f"{'snr_db':>8} {'antennas':>8} {'algorithm':>10} {'mean_sum_rate':>14} "
          f"{'trials':>7} {'degenerate':>10}", file=stream)
    for snr, m, algo, mean, n, degen in _summarize(records):
        print(f"{snr:8.1f} {m:8d} {algo:>10} {mean:14.4f} {n:7d} {degen:10d}", file=stream)
    return records


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None


def _parse_snr_list(text: str) -> tuple[float, ...]:
    try:
        if ":" in text:
            start, step, stop = (float(tok) for tok in text.split(":"))
            if step <= 0:
                raise ValueError
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return tuple(start + k * step for k in range(max(count, 0)))
        return tuple(float(tok) for tok in text.split(",") if tok != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an SNR list or a:step:b range: {text!r}") from None


def _parse_algorithms(text: str) -> tuple[str, ...]:
    names = tuple(tok for tok in text.split(",") if tok != "")
    if not names:
        raise argparse.ArgumentTypeError("algorithm set must not be empty")
    unknown = [n for n in names if n not in ALGORITHM_REGISTRY]
    if unknown:
        raise argparse.ArgumentTypeError(
            f"unknown algorithms: {', '.join(unknown)} "
            f"(choose from {', '.join(ALGORITHM_REGISTRY)})")
    return names


def _load_config_file(path: str) -> dict[str, str]:
    """Read line-based key=value defaults; '#' starts a comment."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values

_SWEEP_KEYS = {
    "antennas": "antennas",
    "snr-db": "snr_db",
    "trials": "trials",
    "algorithms": "algorithms",
    "seed": "seed",
    "out": "out",
    "pia-max-iter": "pia_max_iter",
    "pia-init": "pia_init",
    "threads": "threads",
}


def _sweep_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdr-sim sweep",
        description="Monte Carlo sum-rate sweep over SNR and relay antenna count.")
    parser.add_argument("--antennas", type=_parse_int_list, default=(1, 2, 4, 8),
                        help="comma list of relay antenna counts (default 1,2,4,8)")
    parser.add_argument("--snr-db", dest="snr_db", type=_parse_snr_list,
                        default=(0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0),
                        help="comma list or a:step:b range of SNRs in dB (default 0:5:30)")
    parser.add_argument("--trials", type=int, default=500, help="trials per grid point")
    parser.add_argument("--algorithms", type=_parse_algorithms, default=ALGORITHM_REGISTRY,
                        help=f"comma subset of {{{','.join(ALGORITHM_REGISTRY)}}}")
    parser.add_argument("--seed", type=int, default=0, help="master seed (u64)")
    parser.add_argument("--out", default="results.csv", help="output CSV path")
    parser.add_argument("--config", default=None, help="key=value config file; flags override")
    parser.add_argument("--pia-max-iter", dest="pia_max_iter", type=int, default=20)
    parser.add_argument("--pia-init", dest="pia_init", default="pureamp",
                        choices=("pureamp", "maxsnr1", "maxsinr2", "ones"))
    parser.add_argument("--threads", type=int, default=1)
    return parser


def parse_cli(argv) -> SweepConfig:
    """Parse sweep flags (an optional config file first, flags override)."""
    parser = _sweep_parser()
    # pre-scan for --config so file values become parser defaults
    probe, _ = parser.parse_known_args(argv)
    if probe.config is not None:
        try:
            raw = _load_config_file(probe.config)
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
        for key, value in raw.items():
            if key not in _SWEEP_KEYS:
                parser.error(f"unknown config key {key!r}")
            parser.set_defaults(**{_SWEEP_KEYS[key]: value})
    args = parser.parse_args(argv)
    try:
        return SweepConfig(
            antennas=tuple(args.antennas), snr_db=tuple(args.snr_db), trials=args.trials,
            algorithms=tuple(args.algorithms), seed=args.seed, out=args.out,
            pia_max_iter=args.pia_max_iter, pia_init=args.pia_init, threads=args.threads)
    except ValueError as exc:
        parser.error(str(exc))


def _run_single(argv) -> int:
    parser = argparse.ArgumentParser(
        prog="cdr-sim single",
        description="Run every algorithm on a single channel draw and print details.")
    parser.add_argument("--antennas", type=int, required=True)
    parser.add_argument("--snr-db", dest="snr_db", type=float, required=True)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dump-solution", action="store_true")
    args = parser.parse_args(argv)

    p = 10.0 ** (args.snr_db / 10.0)
    rng = np.random.Generator(np.random.PCG64(trial_seed(args.seed, args.snr_db, args.antennas, 0)))
    cs = sample_channels(SystemParams(args.antennas, p, p), rng)
    forms = build_forms(cs, p, p)

    print(f"M={args.antennas} snr={args.snr_db:g} dB (P=P_R={p:.6g}), seed={args.seed}")
    print(f"{'algorithm':>10} {'rate1':>10} {'rate2':>10} {'sum_rate':>10} "
          f"{'||W||_F':>10} {'iter':>5} {'kkt_resid':>10}")
    solutions = {
        "pia": algorithms.pia(forms),
        "asa": algorithms.asa(forms),
        "lss": algorithms.lss(forms),
        "maxsnr1": algorithms.max_snr1(forms),
        "maxsinr2": algorithms.max_sinr2(forms),
    }
    for name in ("pia", "asa", "lss", "maxsnr1", "maxsinr2"):
        sol = solutions[name]
        resid = kkt_residual(forms, sol.w_tilde)
        print(f"{name:>10} {sol.rates.r1:10.4f} {sol.rates.r2:10.4f} {sol.rates.sum:10.4f} "
              f"{np.linalg.norm(sol.W, 'fro'):10.4f} "
              f"{sol.iterations if name == 'pia' else 0:5d} {resid:10.2e}")
    rates = sum_rate(cs, pure_amplification(cs, p, p), p)
    print(f"{'pureamp':>10} {rates.r1:10.4f} {rates.r2:10.4f} {rates.sum:10.4f}")
    bound = upper_bound.r_ub(cs, p, p)
    print(f"{'upper':>10} {bound.r1_at_opt:10.4f} {bound.r2_at_opt:10.4f} {bound.r_ub:10.4f}   "
          f"(kappa1={bound.kappa1:.4f}, P1={bound.p1:.4f})")
    if args.dump_solution:
        for name, sol in solutions.items():
            print(f"\n{name} w_tilde = {np.array2string(sol.w_tilde, precision=6)}")
            print(f"{name} W =\n{np.array2string(sol.W, precision=6)}")
    return 0


_USAGE = "usage: cdr-sim {sweep,single} [options]  (see cdr-sim <command> --help)"


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(_USAGE)
        return 0 if argv else 2
    command, rest = argv[0], argv[1:]
    try:
        # single-threaded BLAS: the matrices here are tiny (M^2 <= 64) and
        # threaded kernels only add synchronization cost; trial-level
        # parallelism comes from --threads instead
        with threadpool_limits(limits=1, user_api="blas"):
            if command == "sweep":
                run_sweep(parse_cli(rest))
                return 0
            if command == "single":
                return _run_single(rest)
    except SystemExit:
        raise
    except (OSError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"error: unknown command {command!r}\n{_USAGE}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
