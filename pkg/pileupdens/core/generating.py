"""Generating-function machinery for the photon count N and the pile-up weight.

Only the minimum Z = min(Y_1, ..., Y_N) of N i.i.d. draws is observed. With
M(u) = E[u^N] the observed CDF is G = 1 - M(1 - F), and the de-biasing weight
applied at rank position u is w(u) = 1 / Mdot(M^{-1}(1 - u)).
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Tuple

import numpy as np
import numpy.typing as npt
from numpy.polynomial import polynomial as P
from scipy import integrate

from .cache import TableCache
from .errors import ConfigError, DomainError, NumericError
from .utils import check_count, check_unit, scalar_or_array

MAX_COUNT = 64
MASS_TOLERANCE = 1e-12
INVERSE_MAX_ITER = 100
LIPSCHITZ_GRID = 10_000
QUAD_TOL = 1e-10

_WEIGHT_TABLES = TableCache(max_items=64)


@dataclass(frozen=True)
class WeightProfile:
    w0: float
    w1: float
    c_w: float
    W: float

    def __post_init__(self) -> None:
        if not (0.0 < self.w0 <= self.w1 < math.inf):
            raise DomainError(f"weight bounds must satisfy 0 < w0 <= w1 < inf, got {self}")
        if self.c_w < 0.0:
            raise DomainError(f"c_w must be nonnegative, got {self.c_w}")


class GeneratingModel:
    """Law of the count N >= 1, seen through its probability generating function.

    Subclasses implement M, Mdot, Mddot and Minv on arrays in [0, 1]. Inputs are
    validated by the module-level operations, not by these methods.
    """

    kind: str = ""

    def M(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def Mdot(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def Mddot(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def Minv(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def weight(self, u: np.ndarray) -> np.ndarray:
        return 1.0 / self.Mdot(self.Minv(1.0 - u))

    @property
    def mean(self) -> float:
        """E[N] = Mdot(1)."""
        return float(self.Mdot(np.asarray(1.0)))

    def lipschitz(self) -> float:
        raise NotImplementedError

    def to_dict(self) -> Dict[str, Any]:
        raise NotImplementedError

    @staticmethod
    def from_dict(d: Dict[str, Any]) -> "GeneratingModel":
        if "mu" in d and "masses" in d:
            raise ConfigError("give either 'mu' or 'masses' for the count law, not both")
        if "mu" in d:
            return ZeroTruncatedPoisson(mu=float(d["mu"]))
        if "masses" in d:
            return TabulatedMasses(masses=tuple(float(p) for p in d["masses"]))
        raise ConfigError("count law needs 'mu' (zero-truncated Poisson) or 'masses'")


@dataclass(frozen=True)
class ZeroTruncatedPoisson(GeneratingModel):
    """Poisson(mu) conditioned on N >= 1: P(N=k) = mu^k / (k! (e^mu - 1))."""

    mu: float
    kind = "poisson"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mu) and self.mu > 0.0):
            raise DomainError(f"Poisson parameter must be positive and finite, got {self.mu}")

    # expm1/log1p keep the mu -> 0 limit (no pile-up) accurate
    def M(self, u: np.ndarray) -> np.ndarray:
        return np.expm1(self.mu * u) / math.expm1(self.mu)

    def Mdot(self, u: np.ndarray) -> np.ndarray:
        return self.mu * np.exp(self.mu * u) / math.expm1(self.mu)

    def Mddot(self, u: np.ndarray) -> np.ndarray:
        return self.mu * self.mu * np.exp(self.mu * u) / math.expm1(self.mu)

    def Minv(self, v: np.ndarray) -> np.ndarray:
        return np.log1p(v * math.expm1(self.mu)) / self.mu

    def weight(self, u: np.ndarray) -> np.ndarray:
        d = -math.expm1(-self.mu)
        return d / (self.mu * (1.0 - u * d))

    def lipschitz(self) -> float:
        return math.expm1(self.mu) ** 2 / self.mu

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "mu": self.mu}


@dataclass(frozen=True)
class TabulatedMasses(GeneratingModel):
    """Finite count law given by its masses (p_1, ..., p_K), K <= 64."""

    masses: Tuple[float, ...]
    kind = "tabulated"

    def __post_init__(self) -> None:
        p = np.asarray(self.masses, dtype=float)
        if p.ndim != 1 or not 2 <= p.size <= MAX_COUNT:
            raise DomainError(f"need between 2 and {MAX_COUNT} masses, got {p.size}")
        if np.any(p < 0.0) or not np.all(np.isfinite(p)):
            raise DomainError("masses must be finite and nonnegative")
        if abs(math.fsum(p) - 1.0) > MASS_TOLERANCE:
            raise DomainError(f"masses must sum to 1, got {math.fsum(p)!r}")
        if p[0] <= 0.0 or p[1] <= 0.0:
            raise DomainError("P(N=1) and P(N=2) must both be positive")

    @classmethod
    def from_model(cls, model: GeneratingModel, kmax: int = MAX_COUNT) -> "TabulatedMasses":
        """Tabulate the first `kmax` masses of a Poisson count law, renormalised."""
        if not isinstance(model, ZeroTruncatedPoisson):
            raise DomainError("only zero-truncated Poisson laws can be tabulated")
        k = np.arange(1, kmax + 1)
        logp = k * math.log(model.mu) - np.array([math.lgamma(x + 1) for x in k])
        p = np.exp(logp - math.log(math.expm1(model.mu)))
        p = p / math.fsum(p)
        return cls(masses=tuple(float(x) for x in p))

    @functools.cached_property
    def _coef(self) -> np.ndarray:
        return np.concatenate(([0.0], np.asarray(self.masses, dtype=float)))

    def M(self, u: np.ndarray) -> np.ndarray:
        return P.polyval(u, self._coef)

    def Mdot(self, u: np.ndarray) -> np.ndarray:
        return P.polyval(u, P.polyder(self._coef))

    def Mddot(self, u: np.ndarray) -> np.ndarray:
        return P.polyval(u, P.polyder(self._coef, 2))

    def Minv(self, v: np.ndarray) -> np.ndarray:
        return _invert_monotone(self.M, self.Mdot, np.asarray(v, dtype=float))

    def lipschitz(self) -> float:
        # |w'| = Mddot / Mdot^3 <= b / a^3 with a, b bounding Mdot and Mddot
        grid = np.linspace(0.0, 1.0, LIPSCHITZ_GRID)
        d1, d2 = self.Mdot(grid), self.Mddot(grid)
        a = min(d1.min(), d2.min())
        b = max(d1.max(), d2.max())
        return float(b / a**3)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "masses": list(self.masses)}


def _invert_monotone(
    f: Callable[[np.ndarray], np.ndarray],
    fprime: Callable[[np.ndarray], np.ndarray],
    v: np.ndarray,
    tol: float = 1e-15,
) -> np.ndarray:
    """Solve f(x) = v on [0, 1] for increasing f with f(0)=0, f(1)=1.

    Bisection on the bracket, with one Newton step per iteration whenever
    the Newton iterate stays strictly inside the current bracket.
    """
    lo = np.zeros_like(v)
    hi = np.ones_like(v)
    x = v.copy()
    for _ in range(INVERSE_MAX_ITER):
        r = f(x) - v
        if np.all(np.abs(r) <= tol) or np.all(hi - lo <= tol):
            return x
        below = r < 0.0
        lo = np.where(below, x, lo)
        hi = np.where(below, hi, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = x - r / fprime(x)
        inside = (newton > lo) & (newton < hi)
        x = np.where(r == 0.0, x, np.where(inside, newton, 0.5 * (lo + hi)))
    r = f(x) - v
    if np.any(np.abs(r) > 1e-12):
        raise NumericError(f"M^-1 did not converge in {INVERSE_MAX_ITER} iterations")
    return x


def gen_M(model: GeneratingModel, u: npt.ArrayLike):
    """M(u) = E[u^N]."""
    return scalar_or_array(model.M(check_unit(u)))


def gen_Mdot(model: GeneratingModel, u: npt.ArrayLike):
    """Mdot(u) = E[N u^(N-1)]."""
    return scalar_or_array(model.Mdot(check_unit(u)))


def gen_Mddot(model: GeneratingModel, u: npt.ArrayLike):
    """Mddot(u) = E[N (N-1) u^(N-2)]."""
    return scalar_or_array(model.Mddot(check_unit(u)))


def gen_Minv(model: GeneratingModel, v: npt.ArrayLike):
    return scalar_or_array(model.Minv(check_unit(v, "v")))


def weight_w(model: GeneratingModel, u: npt.ArrayLike):
    """Pile-up correction weight w(u) = 1 / Mdot(M^{-1}(1 - u))."""
    return scalar_or_array(model.weight(check_unit(u)))


@functools.lru_cache(maxsize=128)
def weight_profile(model: GeneratingModel) -> WeightProfile:
    # w is nondecreasing: Mdot increases and M^{-1}(1 - u) decreases in u
    w0 = 1.0 / float(model.Mdot(np.asarray(1.0)))
    w1 = 1.0 / float(model.Mdot(np.asarray(0.0)))
    W, _ = integrate.quad(
        lambda u: float(model.weight(np.asarray(u))) ** 2, 0.0, 1.0, epsabs=QUAD_TOL, limit=200
    )
    W = min(max(W, w0 * w0), w1 * w1)
    return WeightProfile(w0=w0, w1=w1, c_w=model.lipschitz(), W=W)


def weight_table(model: GeneratingModel, n: int) -> np.ndarray:
    """Read-only vector (w(1/n), ..., w(n/n))."""
    n = check_count(n)
    return _WEIGHT_TABLES.get_or_compute(
        (model, n), lambda: model.weight(np.arange(1, n + 1, dtype=float) / n)
    )


def pileup_cdf(model: GeneratingModel, Fz: npt.ArrayLike):
    """G = 1 - M(1 - F)."""
    F = check_unit(Fz, "Fz")
    return scalar_or_array(1.0 - model.M(1.0 - F))


def target_cdf_from_pileup(model: GeneratingModel, Gz: npt.ArrayLike):
    """F = 1 - M^{-1}(1 - G), the inverse of pileup_cdf."""
    G = check_unit(Gz, "Gz")
    return scalar_or_array(1.0 - model.Minv(1.0 - G))


def pileup_density(model: GeneratingModel, fz: npt.ArrayLike, Fz: npt.ArrayLike):
    """g = f * Mdot(1 - F), the density of the observed minimum."""
    F = check_unit(Fz, "Fz")
    return scalar_or_array(np.asarray(fz, dtype=float) * model.Mdot(1.0 - F))
