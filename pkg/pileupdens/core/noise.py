"""Additive measurement-error laws and their Fourier transforms.

Convention: f*(u) = integral of exp(-i u x) f(x) dx. A model with scale s describes
the variable s * eta, so its transform is f*_eta(s u).
"""
from __future__ import annotations

import dataclasses
import functools
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import numpy.typing as npt

from .errors import ConfigError, DomainError
from .fourier import exp_sum, exp_sum_grid
from .utils import SeedLike, as_rng, check_count, scalar_or_array

LOGGER = logging.getLogger(__name__)

RIEMANN_POINTS = 2048
_EQUAL_RTOL = 1e-12


class NoiseModel:
    kind: str = ""
    scale: float = 1.0

    def _base_ft(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _base_integral(self, L: float) -> float:
        """Integral of 1/|f*|^2 over [-L, L] for the unscaled variable."""
        raise NotImplementedError

    @property
    def base_mean(self) -> float:
        raise NotImplementedError

    @property
    def base_variance(self) -> float:
        raise NotImplementedError

    @property
    def smoothness(self) -> Optional[int]:
        """Ordinary-smooth order gamma: |f*(u)|^2 ~ (1 + u^2)^(-gamma)."""
        return None

    def _check_scale(self) -> None:
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise DomainError(f"noise scale must be positive, got {self.scale}")

    @property
    def mean(self) -> float:
        return self.scale * self.base_mean

    @property
    def variance(self) -> float:
        return self.scale**2 * self.base_variance

    def ft(self, u: npt.ArrayLike) -> np.ndarray:
        return self._base_ft(self.scale * np.asarray(u, dtype=float))

    def ft_grid(self, u0: float, du: float, count: int) -> np.ndarray:
        return self.ft(u0 + du * np.arange(count))

    def delta(self, m: int, riemann_points: int = RIEMANN_POINTS) -> float:
        s = self.scale
        return self._base_integral(math.pi * m * s) / (2.0 * math.pi * s)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def with_variance(self, sigma2: float) -> "NoiseModel":
        """Same law rescaled so that Var(scale * eta) = sigma2."""
        if not (math.isfinite(sigma2) and sigma2 > 0.0):
            raise DomainError(f"sigma2 must be positive, got {sigma2}")
        return dataclasses.replace(self, scale=math.sqrt(sigma2 / self.base_variance))

    def rescaled(self, factor: float) -> "NoiseModel":
        """Law of factor * eta."""
        if not (math.isfinite(factor) and factor > 0.0):
            raise DomainError(f"rescaling factor must be positive, got {factor}")
        return dataclasses.replace(self, scale=self.scale * factor)

    def to_dict(self) -> Dict[str, Any]:
        raise NotImplementedError

    @staticmethod
    def from_dict(d: Dict[str, Any]) -> "NoiseModel":
        kind = str(d.get("kind", "")).lower()
        try:
            if kind in ("exp", "exponential"):
                noise: NoiseModel = ExponentialNoise(theta=float(d.get("theta", 1.0)))
            elif kind in ("biexp", "biexponential"):
                noise = BiExponentialNoise(
                    alpha=float(d.get("alpha", 2.0)),
                    beta=float(d.get("beta", 1.0)),
                    nu=float(d.get("nu", 1.0)),
                    tau=float(d.get("tau", 2.0)),
                )
            elif kind in ("file", "empirical"):
                if "values" in d:
                    noise = EmpiricalNoise(values=np.asarray(d["values"], dtype=float))
                else:
                    from .csvio import read_values

                    noise = EmpiricalNoise(values=read_values(Path(d["path"])))
            else:
                raise ConfigError(f"unknown noise kind {d.get('kind')!r}")
        except (KeyError, TypeError) as e:
            raise ConfigError(f"malformed noise spec {d!r}: {e}") from e
        if d.get("sigma2") is not None:
            noise = noise.with_variance(float(d["sigma2"]))
        return noise


@dataclass(frozen=True)
class ExponentialNoise(NoiseModel):
    theta: float
    scale: float = 1.0
    kind = "exponential"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.theta) and self.theta > 0.0):
            raise DomainError(f"theta must be positive, got {self.theta}")
        self._check_scale()

    def _base_ft(self, v: np.ndarray) -> np.ndarray:
        return self.theta / (self.theta + 1j * v)

    def _base_integral(self, L: float) -> float:
        return 2.0 * L + 2.0 * L**3 / (3.0 * self.theta**2)

    @property
    def base_mean(self) -> float:
        return 1.0 / self.theta

    @property
    def base_variance(self) -> float:
        return 1.0 / self.theta**2

    @property
    def smoothness(self) -> Optional[int]:
        return 1

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(n)
        return -np.log1p(-u) / self.theta * self.scale

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "theta": self.theta, "scale": self.scale}


@dataclass(frozen=True)
class BiExponentialNoise(NoiseModel):
    """f(x) = (a nu e^{-nu x} - b tau e^{-tau x}) / (a - b) on x > 0."""

    alpha: float
    beta: float
    nu: float
    tau: float
    scale: float = 1.0
    kind = "biexponential"

    def __post_init__(self) -> None:
        a, b, nu, tau = self.alpha, self.beta, self.nu, self.tau
        if min(a, b, nu, tau) <= 0.0 or not all(map(math.isfinite, (a, b, nu, tau))):
            raise DomainError("bi-exponential parameters must be positive and finite")
        if not (a > b and nu < tau):
            raise DomainError(f"need alpha > beta and nu < tau, got {self}")
        # f(0) = (alpha nu - beta tau) / (alpha - beta) must not be negative
        if b * tau > a * nu * (1.0 + _EQUAL_RTOL):
            raise DomainError("need beta*tau / (alpha*nu) <= 1 for a nonnegative density")
        self._check_scale()

    @property
    def _balanced(self) -> bool:
        an, bt = self.alpha * self.nu, self.beta * self.tau
        return abs(an - bt) <= _EQUAL_RTOL * max(an, bt)

    def _base_ft(self, v: np.ndarray) -> np.ndarray:
        d = self.alpha - self.beta
        return (self.alpha * self.nu / d) / (self.nu + 1j * v) - (self.beta * self.tau / d) / (
            self.tau + 1j * v
        )

    def _base_integral(self, L: float) -> float:
        nu2, tau2 = self.nu**2, self.tau**2
        p, q = nu2 + tau2, nu2 * tau2
        if self._balanced:
            # 1/|f*|^2 = (v^2 + nu^2)(v^2 + tau^2) / (nu^2 tau^2)
            return (2 * L**5 / 5 + 2 * p * L**3 / 3 + 2 * q * L) / q
        d = self.alpha - self.beta
        A = q * d * d
        B = (self.alpha * self.nu - self.beta * self.tau) ** 2
        c2 = A / B
        c = math.sqrt(c2)
        r = q - c2 * (p - c2)
        return (d * d / B) * (2 * L**3 / 3 + 2 * (p - c2) * L + 2 * r / c * math.atan(L / c))

    @property
    def base_mean(self) -> float:
        d = self.alpha - self.beta
        return self.alpha / (d * self.nu) - self.beta / (d * self.tau)

    @property
    def base_variance(self) -> float:
        d = self.alpha - self.beta
        second = 2 * self.alpha / (d * self.nu**2) - 2 * self.beta / (d * self.tau**2)
        return second - self.base_mean**2

    @property
    def smoothness(self) -> Optional[int]:
        return 2 if self._balanced else 1

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        # accept-reject against the leading exponential term, bound alpha / (alpha - beta)
        ratio = self.beta * self.tau / (self.alpha * self.nu)
        bound = self.alpha / (self.alpha - self.beta)
        chunks = []
        need = n
        while need > 0:
            k = int(need * bound * 1.1) + 16
            x = -np.log1p(-rng.random(k)) / self.nu
            accept = rng.random(k) < 1.0 - ratio * np.exp(-(self.tau - self.nu) * x)
            kept = x[accept][:need]
            chunks.append(kept)
            need -= kept.size
        return np.concatenate(chunks) * self.scale

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "alpha": self.alpha,
            "beta": self.beta,
            "nu": self.nu,
            "tau": self.tau,
            "scale": self.scale,
        }


@dataclass(frozen=True, eq=False)
class EmpiricalNoise(NoiseModel):
    """Noise known only through an independent sample eta_1, ..., eta_M."""

    values: np.ndarray
    scale: float = 1.0
    kind = "empirical"

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size < 1:
            raise DomainError("empirical noise needs at least one value")
        if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
            raise DomainError("empirical noise values must be positive and finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        self._check_scale()

    @property
    def size(self) -> int:
        return int(self.values.size)

    @functools.cached_property
    def _scaled(self) -> np.ndarray:
        return self.values * self.scale

    def _unit(self) -> np.ndarray:
        return np.full(self.size, 1.0 / self.size)

    def ft(self, u: npt.ArrayLike) -> np.ndarray:
        return exp_sum(self._scaled, self._unit(), u)

    def ft_grid(self, u0: float, du: float, count: int) -> np.ndarray:
        return exp_sum_grid(self._scaled, self._unit(), u0, du, count)

    def delta(self, m: int, riemann_points: int = RIEMANN_POINTS) -> float:
        S = riemann_points
        power = np.abs(self.ft_grid(-math.pi * m, 2.0 * math.pi * m / S, S + 1)) ** 2
        # the empirical transform nearly vanishes at high frequency; 1/M is its noise floor
        power = np.maximum(power, 1.0 / self.size)
        return float(m / S * math.fsum(1.0 / power))

    @property
    def base_mean(self) -> float:
        return float(self.values.mean())

    @property
    def base_variance(self) -> float:
        return float(self.values.var())

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.choice(self._scaled, size=n, replace=True)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "size": self.size, "scale": self.scale}


def noise_ft(noise: NoiseModel, u: npt.ArrayLike):
    """Fourier transform of the noise density at `u`."""
    return scalar_or_array(noise.ft(u))


def delta_eta(noise: NoiseModel, m: int, riemann_points: int = RIEMANN_POINTS) -> float:
    """Variance factor (1/2pi) * integral over [-pi m, pi m] of du / |f*(u)|^2."""
    m = check_count(m, "m")
    check_count(riemann_points, "riemann_points", minimum=2)
    return float(noise.delta(m, riemann_points))


def sample_noise(noise: NoiseModel, n: int, seed: SeedLike) -> np.ndarray:
    n = check_count(n)
    return noise.sample(n, as_rng(seed))


def parse_noise_spec(spec: str, sigma2: Optional[float] = None) -> NoiseModel:
    """Parse `exp:THETA`, `biexp:A,B,NU,TAU` or `file:PATH` into a noise model."""
    kind, sep, rest = spec.partition(":")
    kind = kind.strip().lower()
    if not sep or not rest.strip():
        raise ConfigError(f"noise spec must look like kind:params, got {spec!r}")
    if kind == "file":
        d: Dict[str, Any] = {"kind": "file", "path": rest.strip()}
    else:
        try:
            params = [float(x) for x in rest.split(",")]
        except ValueError as e:
            raise ConfigError(f"non-numeric noise parameter in {spec!r}") from e
        if kind == "exp" and len(params) == 1:
            d = {"kind": "exp", "theta": params[0]}
        elif kind == "biexp" and len(params) == 4:
            d = dict(zip(("alpha", "beta", "nu", "tau"), params), kind="biexp")
        else:
            raise ConfigError(f"cannot parse noise spec {spec!r}")
    d["sigma2"] = sigma2
    try:
        return NoiseModel.from_dict(d)
    except DomainError as e:
        raise ConfigError(f"invalid noise spec {spec!r}: {e}") from e
