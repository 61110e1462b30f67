"""Target laws, pile-up sampling and the order-statistic sample type."""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional

import numpy as np
import numpy.typing as npt
from scipy import stats

from .errors import ConfigError, DomainError
from .generating import GeneratingModel, TabulatedMasses, ZeroTruncatedPoisson, weight_table
from .noise import NoiseModel
from .utils import SeedLike, as_rng, check_count, scalar_or_array

# below this Poisson parameter, rejecting N = 0 would need too many retries
_REJECTION_MIN_MU = 0.5

TARGET_KINDS = ("gamma", "exponential", "pareto", "weibull", "user-exponential")


@dataclass(frozen=True)
class TargetDistribution:
    """One of the benchmark lifetime laws, or an exponential with a given rate.

    gamma:       Gamma(shape 3, scale 3)
    exponential: exponential with mean 3
    pareto:      density (1 + x/4)^-5
    weibull:     density (3/4)(1/4)^(-3/4) x^(-1/4) exp(-(4x)^(3/4))
    """

    kind: str
    rate: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in TARGET_KINDS:
            raise DomainError(f"unknown target {self.kind!r}; expected one of {TARGET_KINDS}")
        if self.kind == "user-exponential":
            if self.rate is None or not (math.isfinite(self.rate) and self.rate > 0.0):
                raise DomainError(f"exponential rate must be positive, got {self.rate}")
        elif self.rate is not None:
            raise DomainError(f"target {self.kind!r} takes no rate")

    @classmethod
    def parse(cls, name: str) -> "TargetDistribution":
        """`gamma`, `exponential`, `pareto`, `weibull` or `exp:RATE`."""
        name = name.strip().lower()
        if name.startswith("exp:"):
            try:
                return cls("user-exponential", float(name[4:]))
            except ValueError as e:
                raise ConfigError(f"bad exponential rate in {name!r}") from e
        aliases = {"gamma33": "gamma", "exp3": "exponential"}
        try:
            return cls(aliases.get(name, name))
        except DomainError as e:
            raise ConfigError(str(e)) from e

    @property
    def name(self) -> str:
        return f"exp:{self.rate:g}" if self.kind == "user-exponential" else self.kind

    @functools.cached_property
    def law(self) -> Any:
        """Frozen scipy distribution with the same density."""
        if self.kind == "gamma":
            return stats.gamma(a=3.0, scale=3.0)
        if self.kind == "exponential":
            return stats.expon(scale=3.0)
        if self.kind == "pareto":
            return stats.lomax(c=4.0, scale=4.0)
        if self.kind == "weibull":
            return stats.weibull_min(c=0.75, scale=0.25)
        return stats.expon(scale=1.0 / self.rate)

    def pdf(self, x: npt.ArrayLike) -> np.ndarray:
        return self.law.pdf(x)

    def cdf(self, x: npt.ArrayLike) -> np.ndarray:
        return self.law.cdf(x)

    def ppf(self, p: npt.ArrayLike) -> np.ndarray:
        return self.law.ppf(p)

    @property
    def singular_at_zero(self) -> bool:
        return self.kind == "weibull"

    def from_uniform(self, u: npt.ArrayLike):
        """Transform uniform variates into draws (inverse-CDF samplers).

        exponential laws use u as the CDF level; pareto and weibull use it as
        the survival level, so u = 1 maps to the lower end of the support.
        """
        u = np.asarray(u, dtype=float)
        if self.kind == "exponential":
            x = -3.0 * np.log1p(-u)
        elif self.kind == "user-exponential":
            x = -np.log1p(-u) / self.rate
        elif self.kind == "pareto":
            x = 4.0 * (u**-0.25 - 1.0)
        elif self.kind == "weibull":
            x = 0.25 * (-np.log(u)) ** (4.0 / 3.0)
        else:
            raise DomainError("gamma draws need three uniforms; use sample()")
        return scalar_or_array(x)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "gamma":
            # sum of three independent exponentials with scale 3
            return -3.0 * np.log1p(-rng.random((n, 3))).sum(axis=1)
        if self.kind in ("pareto", "weibull"):
            return np.asarray(self.from_uniform(1.0 - rng.random(n)))
        return np.asarray(self.from_uniform(rng.random(n)))


@dataclass(frozen=True, eq=False)
class Sample:
    """Order statistics Z_(1) <= ... <= Z_(n) with the rank weights w(i/n)."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise DomainError("a sample needs at least one observation")
        if w.shape != v.shape:
            raise DomainError(f"{w.size} weights for {v.size} observations")
        if not np.all(np.isfinite(v)) or v[0] < 0.0:
            raise DomainError("observations must be finite and nonnegative")
        if np.any(np.diff(v) < 0.0):
            raise DomainError("observations must be sorted ascending")
        for a in (v, w):
            a.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_values(
        cls, values: npt.ArrayLike, model: Optional[GeneratingModel] = None
    ) -> "Sample":
        """Sort (stable, so ties keep input order) and attach w(i/n); unit weights without a model."""
        z = np.sort(np.asarray(values, dtype=float).ravel(), kind="stable")
        n = check_count(z.size, "sample size")
        w = weight_table(model, n) if model is not None else np.ones(n)
        return cls(values=z, weights=w)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def z_max(self) -> float:
        return float(self.values[-1])

    def with_rank_weights(self) -> "Sample":
        """Weights i/n in place of w(i/n) (the no-pile-up-correction ablation)."""
        return Sample(values=self.values, weights=np.arange(1, self.n + 1) / self.n)


def sample_target(dist: TargetDistribution, n: int, seed: SeedLike) -> np.ndarray:
    n = check_count(n)
    return dist.sample(n, as_rng(seed))


def _truncated_poisson_inverse(mu: float, u: np.ndarray) -> np.ndarray:
    kmax = max(32, int(mu + 12.0 * math.sqrt(mu) + 32))
    k = np.arange(1, kmax + 1)
    logp = k * math.log(mu) - np.array([math.lgamma(x + 1) for x in k]) - math.log(math.expm1(mu))
    cdf = np.cumsum(np.exp(logp))
    return np.minimum(np.searchsorted(cdf, u * cdf[-1], side="right") + 1, kmax)


def sample_counts(model: GeneratingModel, size: int, rng: np.random.Generator) -> np.ndarray:
    """`size` independent draws of N >= 1."""
    if isinstance(model, ZeroTruncatedPoisson):
        if model.mu < _REJECTION_MIN_MU:
            return _truncated_poisson_inverse(model.mu, rng.random(size))
        counts = rng.poisson(model.mu, size)
        zeros = np.flatnonzero(counts == 0)
        while zeros.size:
            counts[zeros] = rng.poisson(model.mu, zeros.size)
            zeros = zeros[counts[zeros] == 0]
        return counts
    if isinstance(model, TabulatedMasses):
        cdf = np.cumsum(model.masses)
        idx = np.searchsorted(cdf, rng.random(size) * cdf[-1], side="right")
        return np.minimum(idx, cdf.size - 1) + 1
    raise DomainError(f"cannot sample counts from {type(model).__name__}")


def sample_truncated_count(model: GeneratingModel, seed: SeedLike) -> int:
    return int(sample_counts(model, 1, as_rng(seed))[0])


def sample_pileup(
    dist: TargetDistribution,
    model: GeneratingModel,
    noise: Optional[NoiseModel],
    n: int,
    seed: SeedLike,
) -> Sample:
    """n observations Z = min(Y_1 + eta_1, ..., Y_N + eta_N), eta = 0 without noise."""
    n = check_count(n)
    rng = as_rng(seed)
    counts = sample_counts(model, n, rng)
    total = int(counts.sum())
    y = dist.sample(total, rng)
    if noise is not None:
        y = y + noise.sample(total, rng)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    return Sample.from_values(np.minimum.reduceat(y, starts), model)


def ecdf(sample: Sample, z: npt.ArrayLike):
    """Right-continuous empirical CDF #{Z_i <= z} / n."""
    pos = np.searchsorted(sample.values, np.asarray(z, dtype=float), side="right")
    return scalar_or_array(pos / sample.n)


def l_statistic(sample: Sample, h: Callable[[np.ndarray], np.ndarray]) -> float:
    """sum_i h(Z_(i)) w(i/n) / n, the pile-up corrected estimate of E[h(Y)]."""
    return float(np.dot(h(sample.values), sample.weights) / sample.n)
