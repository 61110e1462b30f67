from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from . import __version__
from .bench.config import bundled_benchmarks, load_benchmark
from .bench.harness import run_benchmark
from .core.csvio import read_values, write_grid, write_values
from .core.errors import ConfigError, NumericError, PileupError, ReplicateError
from .core.generating import ZeroTruncatedPoisson, weight_profile
from .core.noise import RIEMANN_POINTS, parse_noise_spec
from .core.sampling import Sample, TargetDistribution, sample_pileup
from .estimators import sinc, trig
from .report.render_html import render_benchmark_html

LOGGER = logging.getLogger("pileupdens")

DEFAULT_GRID = 2048
DEFAULT_MAX_M = 500
EXIT_OK, EXIT_ACCEPTANCE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


def _parse_interval(s: Optional[str]) -> Optional[Tuple[float, float]]:
    if not s:
        return None
    lo, sep, hi = s.partition(":")
    try:
        if not sep:
            raise ValueError(s)
        return float(lo), float(hi)
    except ValueError as e:
        raise ConfigError(f"--interval must look like lo:hi, got {s!r}") from e


def _write_json(path: Path, obj: Any) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def cmd_estimate(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    model = ZeroTruncatedPoisson(mu=args.mu)
    sample = Sample.from_values(read_values(args.sample), model)
    profile = weight_profile(model)
    if args.ablation == "no-pileup":
        sample = sample.with_rank_weights()

    noise = parse_noise_spec(args.noise, args.sigma2) if args.noise else None
    interval = _parse_interval(args.interval)
    constants: Dict[str, Any] = {"grid": args.grid}
    if noise is None or args.ablation == "no-deconv":
        full = trig.model_collection_max(sample.n)
        if full > args.max_m:
            LOGGER.info(
                "trig collection capped at m <= %d of %d (raise --max-m for more)", args.max_m, full
            )
        est: Any = trig.select_model(
            sample, interval=interval, kappa=args.kappa, W=profile.W, max_m=args.max_m
        )
        x, f = trig.density_grid(est, points=args.grid, clip=args.clip)
        m, dropped = est.m_hat, est.dropped
        constants.update(estimator="trig", kappa=args.kappa, W=profile.W, max_m=args.max_m)
    else:
        est = sinc.select_cutoff(
            sample,
            noise,
            args.kappa_prime,
            args.kappa_pp,
            profile,
            T=args.fft_size,
            length=interval[1] - interval[0] if interval else None,
        )
        x, f = sinc.density_grid(est, points=args.grid, clip=args.clip)
        m, dropped = est.m_bar, 0
        constants.update(
            estimator="sinc",
            kappa_prime=args.kappa_prime,
            kappa_pp=args.kappa_pp,
            W=profile.W,
            c_w=profile.c_w,
            riemann_points=RIEMANN_POINTS,
            length=est.length,
        )

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    estimate = dict(est.to_dict(), mu=args.mu, noise=noise.to_dict() if noise else None)
    _write_json(out / "estimate.json", estimate)
    write_grid(out / "density.csv", x, f)
    _write_json(
        out / "manifest.json",
        {
            "created_at": _now(),
            "version": __version__,
            "sample": str(args.sample),
            "n": sample.n,
            "mu": args.mu,
            "noise": args.noise,
            "sigma2": args.sigma2,
            "ablation": args.ablation,
            "constants": constants,
            "dropped": dropped,
            "m": m,
            "wall_time_seconds": time.perf_counter() - start,
        },
    )
    print(f"{constants['estimator']}: n={sample.n} m={m} dropped={dropped} -> {out}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    target = TargetDistribution.parse(args.target)
    model = ZeroTruncatedPoisson(mu=args.mu)
    noise = parse_noise_spec(args.noise, args.sigma2) if args.noise else None
    if args.n < 1:
        raise ConfigError(f"-n must be at least 1, got {args.n}")
    sample = sample_pileup(target, model, noise, args.n, args.seed)
    write_values(args.out, sample.values)
    LOGGER.info("wrote %d observations to %s", sample.n, args.out)
    return EXIT_OK


def cmd_benchmark(args: argparse.Namespace) -> int:
    if args.list or not args.spec:
        for name in bundled_benchmarks():
            print(name)
        return EXIT_OK

    spec = load_benchmark(args.spec)
    if args.replicates is not None:
        spec = dataclasses.replace(
            spec,
            configurations=[
                dataclasses.replace(c, replicates=args.replicates) for c in spec.configurations
            ],
        )
    result = run_benchmark(spec, workers=args.workers)
    table = result.table()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / f"{spec.name}.json", result.to_dict(include_runtime=False))
    with open(out / f"{spec.name}.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write(table.to_csv())
    created = _now()
    _write_json(
        out / f"{spec.name}.manifest.json",
        {
            "created_at": created,
            "version": __version__,
            "workers": args.workers,
            "runtime_seconds": result.runtime_seconds,
            "per_configuration_seconds": {r.label: r.runtime_seconds for r in result.reports},
        },
    )
    if args.html:
        with open(args.html, "w", encoding="utf-8") as f:
            f.write(render_benchmark_html(dict(result.to_dict(), created_at=created)))

    print(table.to_text(), end="")
    for msg in result.deviations:
        print(f"NOTE {msg}", file=sys.stderr)
    if not result.passed:
        for msg in result.failures:
            print(f"FAIL {msg}", file=sys.stderr)
        return EXIT_ACCEPTANCE
    return EXIT_OK


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mu", type=float, required=True, help="Poisson parameter of the photon count")
    p.add_argument(
        "--noise",
        help="Noise law: exp:THETA, biexp:ALPHA,BETA,NU,TAU or file:PATH (one value per line)",
    )
    p.add_argument("--sigma2", type=float, help="Rescale the noise law to this variance")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pileupdens", description="Adaptive density estimation under pile-up distortion"
    )
    p.add_argument("--version", action="version", version=f"pileupdens {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    sub = p.add_subparsers(dest="cmd", required=True)

    # estimate
    e = sub.add_parser("estimate", help="Estimate the lifetime density from a sample file")
    e.add_argument("sample", help="Observed minima, one positive decimal per line")
    _add_model_args(e)
    e.add_argument("--kappa", type=float, default=trig.KAPPA)
    e.add_argument("--kappa-prime", type=float, default=sinc.KAPPA_PRIME)
    e.add_argument("--kappa-pp", type=float, default=sinc.KAPPA_PP)
    e.add_argument(
        "--interval",
        help="Estimation interval lo:hi, default [0, max(1+1/n)]; sinc uses its length",
    )
    e.add_argument("--grid", type=int, default=DEFAULT_GRID, help="Points in density.csv")
    e.add_argument(
        "--max-m",
        type=int,
        default=DEFAULT_MAX_M,
        help=f"Cap on the trigonometric model dimension (default {DEFAULT_MAX_M})",
    )
    e.add_argument("--fft-size", type=int, help="FFT length for sinc coefficients (power of two)")
    e.add_argument("--ablation", choices=["no-pileup", "no-deconv"])
    e.add_argument("--clip", action="store_true", help="Clip negative density values to 0")
    e.add_argument("--out", default=".", help="Output directory (default: current)")
    e.set_defaults(func=cmd_estimate)

    # simulate
    s = sub.add_parser("simulate", help="Draw a synthetic pile-up sample")
    s.add_argument(
        "--target", default="exponential", help="gamma, exponential, pareto, weibull or exp:RATE"
    )
    _add_model_args(s)
    s.add_argument("-n", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="sample.csv")
    s.set_defaults(func=cmd_simulate)

    # benchmark
    b = sub.add_parser("benchmark", help="Run a MISE benchmark (bundled name or JSON file)")
    b.add_argument("spec", nargs="?", help="figure2, figure3, table1-lite or a path")
    b.add_argument("--list", action="store_true", help="List bundled benchmarks")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--replicates", type=int, help="Override the replicate count of every run")
    b.add_argument("--out", default=".", help="Output directory for JSON/CSV results")
    b.add_argument("--html", help="Write an HTML table to this file")
    b.set_defaults(func=cmd_benchmark)

    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return int(args.func(args))
    except (NumericError, ReplicateError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except PileupError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
