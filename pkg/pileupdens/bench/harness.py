"""Monte-Carlo MISE harness: replicate runs, aggregation and acceptance checks."""
from __future__ import annotations

import logging
import math
import multiprocessing
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from scipy import integrate

from ..core.errors import DomainError, ReplicateError
from ..core.generating import WeightProfile, weight_profile
from ..core.noise import EmpiricalNoise
from ..core.sampling import TargetDistribution, sample_pileup
from ..core.utils import replicate_seed
from ..estimators.sinc import select_cutoff
from ..estimators.trig import select_model
from ..report.table import MiseTable
from .config import MISE_POINTS, BenchmarkSpec, SimulationConfig

LOGGER = logging.getLogger(__name__)

MISE_QUANTILE = 0.999

Grid = Tuple[float, float, int]


def mise_grid(
    target: TargetDistribution, points: int = MISE_POINTS, quantile: float = MISE_QUANTILE
) -> Grid:
    """[0, q] with q the target quantile; starts one step in for densities singular at 0."""
    hi = float(target.ppf(quantile))
    lo = hi / points if target.singular_at_zero else 0.0
    return lo, hi, int(points)


def ise(
    density_estimate: Callable[[np.ndarray], npt.ArrayLike],
    true_density: Callable[[np.ndarray], npt.ArrayLike],
    grid: Grid,
) -> float:
    """Trapezoidal integral of (fhat - f)^2 over an evenly spaced grid."""
    lo, hi, points = grid
    if int(points) < 2 or not hi > lo:
        raise DomainError(f"degenerate integration grid {grid}")
    x = np.linspace(lo, hi, int(points))
    diff = np.asarray(density_estimate(x), dtype=float) - np.asarray(true_density(x), dtype=float)
    return max(float(integrate.trapezoid(diff * diff, x)), 0.0)


def _fit(config: SimulationConfig, rng: np.random.Generator) -> Tuple[Callable, int]:
    sample = sample_pileup(config.target, config.generating, config.noise, config.n, rng)
    noise = config.noise
    if noise is not None and config.noise_sample_size is not None:
        # drawn after the data so exact- and estimated-noise runs share their samples
        noise = EmpiricalNoise(values=noise.sample(config.noise_sample_size, rng))
    profile: WeightProfile = weight_profile(config.generating)
    if "no_pileup_correction" in config.ablation:
        sample = sample.with_rank_weights()

    if config.estimator == "trig" or "no_deconvolution" in config.ablation:
        trig = select_model(sample, kappa=config.kappa, W=profile.W)
        return trig, trig.m_hat
    sinc = select_cutoff(
        sample, noise, config.kappa_prime, config.kappa_pp, profile, T=config.fft_size
    )
    return sinc, sinc.m_bar


def run_replicate(config: SimulationConfig, index: int) -> Tuple[float, int]:
    """ISE and selected dimension of replicate `index`.

    The random stream depends on (master_seed, index) only.
    """
    seed = replicate_seed(config.master_seed, index)
    try:
        est, m = _fit(config, np.random.default_rng(seed))
        return ise(est, config.target.pdf, mise_grid(config.target, config.grid_points)), m
    except Exception as e:
        raise ReplicateError(index, tuple(seed.entropy), f"{type(e).__name__}: {e}") from e


def _mean_sd(values: Sequence[float]) -> Tuple[float, float]:
    # fsum makes the result independent of summation order
    k = len(values)
    mean = math.fsum(values) / k
    if k < 2:
        return mean, 0.0
    return mean, math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (k - 1))


@dataclass
class MISEReport:
    label: str
    per_replicate_ise: List[float]
    mean_mise: float
    sd_mise: float
    selected_models: List[int]
    mean_m: float
    sd_m: float
    runtime_seconds: float = field(default=0.0, compare=False)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def mise_x100(self) -> float:
        return 100.0 * self.mean_mise

    @property
    def sd_x100(self) -> float:
        return 100.0 * self.sd_mise

    def mode_fraction(self, m: int) -> float:
        return self.selected_models.count(m) / len(self.selected_models)

    def to_dict(self, include_runtime: bool = True) -> Dict[str, Any]:
        d = asdict(self)
        if not include_runtime:
            d.pop("runtime_seconds")
        return d

    @classmethod
    def from_replicates(
        cls,
        label: str,
        results: Sequence[Tuple[float, int]],
        runtime_seconds: float = 0.0,
        metadata: Optional[Dict[str, Any]] = None,
    ) -> "MISEReport":
        ises = [float(r[0]) for r in results]
        ms = [int(r[1]) for r in results]
        mean, sd = _mean_sd(ises)
        mean_m, sd_m = _mean_sd([float(m) for m in ms])
        return cls(
            label=label,
            per_replicate_ise=ises,
            mean_mise=mean,
            sd_mise=sd,
            selected_models=ms,
            mean_m=mean_m,
            sd_m=sd_m,
            runtime_seconds=runtime_seconds,
            metadata=dict(metadata or {}),
        )


def run_replicates(config: SimulationConfig, workers: int = 1) -> MISEReport:
    """Run every replicate of `config`, serially or on a process pool; both give the same report."""
    start = time.perf_counter()
    jobs = [(config, i) for i in range(config.replicates)]
    if workers > 1 and len(jobs) > 1:
        with multiprocessing.Pool(processes=min(workers, len(jobs))) as pool:
            results = pool.starmap(run_replicate, jobs)
    else:
        results = [run_replicate(*job) for job in jobs]
    elapsed = time.perf_counter() - start

    metadata = {"config": config.to_dict(), "notes": list(config.notes)}
    report = MISEReport.from_replicates(config.label, results, elapsed, metadata)
    LOGGER.info(
        "%s: 100xMISE=%.4g (sd %.2g), m=%.2f, %d replicates in %.1fs",
        config.label, report.mise_x100, report.sd_x100, report.mean_m, config.replicates, elapsed,
    )
    return report


def check_acceptance(report: MISEReport, acceptance: Dict[str, Any]) -> List[str]:
    """Failure messages for the bands declared on one configuration (empty when all pass).

    mise_band is compared with 100 x mean MISE.
    """
    failures: List[str] = []
    if "mise_band" in acceptance:
        lo, hi = acceptance["mise_band"]
        if not lo <= report.mise_x100 <= hi:
            failures.append(
                f"{report.label}: 100xMISE {report.mise_x100:.4g} outside [{lo}, {hi}]"
            )
    if "mean_m_band" in acceptance:
        lo, hi = acceptance["mean_m_band"]
        if not lo <= report.mean_m <= hi:
            failures.append(f"{report.label}: mean m {report.mean_m:.3g} outside [{lo}, {hi}]")
    if "mode_m" in acceptance:
        m = int(acceptance["mode_m"]["m"])
        need = float(acceptance["mode_m"]["fraction"])
        got = report.mode_fraction(m)
        if got < need:
            failures.append(
                f"{report.label}: m={m} selected in {got:.0%} of replicates, need {need:.0%}"
            )
    return failures


def evaluate_checks(reports: Dict[str, MISEReport], checks: Sequence[Dict[str, Any]]) -> List[str]:
    failures: List[str] = []
    for chk in checks:
        left, right = reports[chk["left"]], reports[chk["right"]]
        if chk["kind"] == "greater":
            if not left.mean_mise > right.mean_mise:
                failures.append(
                    f"expected {left.label} ({left.mise_x100:.4g}) > "
                    f"{right.label} ({right.mise_x100:.4g})"
                )
        elif chk["kind"] == "greater_m":
            if not left.mean_m > right.mean_m:
                failures.append(
                    f"expected mean m of {left.label} ({left.mean_m:.3g}) > "
                    f"{right.label} ({right.mean_m:.3g})"
                )
        elif chk["kind"] == "within_sd":
            gap = abs(left.mean_mise - right.mean_mise)
            if not gap < right.sd_mise:
                failures.append(
                    f"{left.label} differs from {right.label} by {100 * gap:.4g}, "
                    f"more than its sd {right.sd_x100:.4g}"
                )
    return failures


def summarize(reports: Sequence[MISEReport], labels: Optional[Sequence[str]] = None) -> MiseTable:
    """Table of 100 x mean MISE (sd) and mean selected dimension, one row per report."""
    if not reports:
        raise DomainError("nothing to summarize")
    labels = list(labels) if labels is not None else [r.label for r in reports]
    if len(labels) != len(reports):
        raise DomainError(f"{len(labels)} labels for {len(reports)} reports")
    return MiseTable.from_rows(
        (lab, r.mise_x100, r.sd_x100, r.mean_m, r.sd_m) for lab, r in zip(labels, reports)
    )


@dataclass
class BenchmarkResult:
    name: str
    reports: List[MISEReport]
    failures: List[str]
    runtime_seconds: float = 0.0
    deviations: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def table(self) -> MiseTable:
        return summarize(self.reports)

    def to_dict(self, include_runtime: bool = True) -> Dict[str, Any]:
        d: Dict[str, Any] = {
            "name": self.name,
            "passed": self.passed,
            "failures": list(self.failures),
            "deviations": list(self.deviations),
            "reports": [r.to_dict(include_runtime) for r in self.reports],
        }
        if include_runtime:
            d["runtime_seconds"] = self.runtime_seconds
        return d


def run_benchmark(spec: BenchmarkSpec, workers: int = 1) -> BenchmarkResult:
    """Run every configuration, then the cross-configuration checks.

    `acceptance` bands and checks decide `passed`; `reference` bands only produce deviations.
    """
    start = time.perf_counter()
    reports: Dict[str, MISEReport] = {}
    failures: List[str] = []
    deviations: List[str] = []
    for i, config in enumerate(spec.configurations, 1):
        LOGGER.info("[%d/%d] %s", i, len(spec.configurations), config.label)
        report = run_replicates(config, workers=workers)
        reports[config.label] = report
        failures.extend(check_acceptance(report, config.acceptance))
        deviations.extend(check_acceptance(report, config.reference))
    failures.extend(evaluate_checks(reports, spec.checks))
    for msg in failures:
        LOGGER.error("acceptance: %s", msg)
    for msg in deviations:
        LOGGER.warning("reference: %s", msg)
    return BenchmarkResult(
        name=spec.name,
        reports=list(reports.values()),
        failures=failures,
        runtime_seconds=time.perf_counter() - start,
        deviations=deviations,
    )
