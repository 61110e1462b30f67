"""Pile-up corrected projection estimator on the trigonometric basis.

Data are mapped affinely from the estimation interval (lo, hi) to [0, 1]. On
[0, 1] the coefficients are the L-statistics
    a_lambda = (1/n) sum_i phi_lambda(t_(i)) w(i/n)
and the dimension is chosen by minimising  -sum a^2 + kappa * W * (hi - lo) * (2m + 1) / n,
the penalty on the original scale multiplied by the Jacobian hi - lo.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
import numpy.typing as npt

from ..core.errors import DomainError
from ..core.fourier import exp_sum_grid
from ..core.sampling import Sample
from ..core.utils import check_unit, scalar_or_array

LOGGER = logging.getLogger(__name__)

KAPPA = 0.5
GRID_POINTS = 512
SQRT2 = math.sqrt(2.0)

Interval = Tuple[float, float]


@dataclass(frozen=True, eq=False)
class TrigEstimate:
    m_hat: int
    coeffs: np.ndarray
    interval: Interval
    n: int
    dropped: int = 0

    def __post_init__(self) -> None:
        lo, hi = self.interval
        if not hi > lo:
            raise DomainError(f"empty estimation interval {self.interval}")
        if len(self.coeffs) != 2 * self.m_hat + 1:
            raise DomainError(f"{len(self.coeffs)} coefficients for m = {self.m_hat}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "basis": "trig",
            "m": self.m_hat,
            "interval": [float(self.interval[0]), float(self.interval[1])],
            "coeffs": [float(a) for a in self.coeffs],
            "n": self.n,
            "dropped": self.dropped,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "TrigEstimate":
        lo, hi = d["interval"]
        return cls(
            m_hat=int(d["m"]),
            coeffs=np.asarray(d["coeffs"], dtype=float),
            interval=(float(lo), float(hi)),
            n=int(d["n"]),
            dropped=int(d.get("dropped", 0)),
        )

    def __call__(self, x: npt.ArrayLike):
        return evaluate_trig(self, x)


def default_interval(sample: Sample) -> Interval:
    return 0.0, sample.z_max * (1.0 + 1.0 / sample.n)


def trig_basis(m: int, x: npt.ArrayLike) -> np.ndarray:
    """[1, sqrt2 cos(2 pi x), sqrt2 sin(2 pi x), ..., sqrt2 cos(2 pi m x), sqrt2 sin(2 pi m x)].

    The basis index runs along the last axis.
    """
    x = check_unit(x, "x")
    j = np.arange(1, m + 1)
    arg = 2.0 * math.pi * np.multiply.outer(x, j)
    out = np.empty(x.shape + (2 * m + 1,))
    out[..., 0] = 1.0
    out[..., 1::2] = SQRT2 * np.cos(arg)
    out[..., 2::2] = SQRT2 * np.sin(arg)
    return out


def _rescaled(sample: Sample, interval: Interval) -> Tuple[np.ndarray, np.ndarray, int]:
    lo, hi = interval
    if not hi > lo:
        raise DomainError(f"empty estimation interval {interval}")
    t = (sample.values - lo) / (hi - lo)
    keep = (t >= 0.0) & (t <= 1.0)
    dropped = int(sample.n - np.count_nonzero(keep))
    if dropped:
        LOGGER.warning("%d observations outside [%g, %g] dropped", dropped, lo, hi)
    return t[keep], sample.weights[keep], dropped


def _coefficients(t: np.ndarray, w: np.ndarray, n: int, m: int) -> np.ndarray:
    # c_j = (1/n) sum_i w_i exp(2 pi i j t_i), so a_cos = sqrt2 Re c_j and a_sin = sqrt2 Im c_j
    c = exp_sum_grid(t, w, 0.0, -2.0 * math.pi, m + 1) / n
    out = np.empty(2 * m + 1)
    out[0] = c[0].real
    out[1::2] = SQRT2 * c[1:].real
    out[2::2] = SQRT2 * c[1:].imag
    return out


def fit_coefficients(sample: Sample, interval: Interval, m: int) -> np.ndarray:
    if m < 0:
        raise DomainError(f"m must be nonnegative, got {m}")
    t, w, _ = _rescaled(sample, interval)
    return _coefficients(t, w, sample.n, m)


def contrast_value(coeffs: npt.ArrayLike) -> float:
    """Empirical contrast of the projection estimator, -sum a^2."""
    a = np.asarray(coeffs, dtype=float)
    return -float(np.dot(a, a))


def model_collection_max(n: int) -> int:
    """Largest m in {0, ..., floor(n/2) - 1}; the constant model is always available."""
    return max(0, n // 2 - 1)


def criterion_path(
    coeffs: np.ndarray, kappa: float, W: float, n: int, length: float = 1.0
) -> np.ndarray:
    """crit(m) for m = 0..M from the coefficients of the largest model, recursively:
    crit(m+1) = crit(m) - a_{m+1,cos}^2 - a_{m+1,sin}^2 + 2 kappa W length / n.

    `length` is hi - lo of the estimation interval.
    """
    unit = kappa * W * length / n
    crit = np.empty((len(coeffs) - 1) // 2 + 1)
    crit[0] = -coeffs[0] ** 2 + unit
    for m in range(1, crit.size):
        crit[m] = crit[m - 1] - coeffs[2 * m - 1] ** 2 - coeffs[2 * m] ** 2 + 2.0 * unit
    return crit


def select_model(
    sample: Sample,
    interval: Optional[Interval] = None,
    kappa: float = KAPPA,
    W: float = 1.0,
    max_m: Optional[int] = None,
) -> TrigEstimate:
    """Penalised choice of the dimension; ties go to the smaller model."""
    if kappa <= 0.0 or W <= 0.0:
        raise DomainError(f"kappa and W must be positive, got {kappa}, {W}")
    interval = interval or default_interval(sample)
    t, w, dropped = _rescaled(sample, interval)
    top = model_collection_max(sample.n)
    if max_m is not None:
        top = min(top, max(0, int(max_m)))
    coeffs = _coefficients(t, w, sample.n, top)
    crit = criterion_path(coeffs, kappa, W, sample.n, interval[1] - interval[0])
    m_hat = int(np.argmin(crit))
    LOGGER.debug("trig selection: m_hat=%d crit=%.6g over m<=%d", m_hat, crit[m_hat], top)
    return TrigEstimate(
        m_hat=m_hat,
        coeffs=coeffs[: 2 * m_hat + 1].copy(),
        interval=(float(interval[0]), float(interval[1])),
        n=sample.n,
        dropped=dropped,
    )


def evaluate_trig(est: TrigEstimate, x: npt.ArrayLike):
    """Raw estimate on the original scale (may be negative); zero outside the interval."""
    x = np.asarray(x, dtype=float)
    lo, hi = est.interval
    t = (x.ravel() - lo) / (hi - lo)
    inside = (t >= 0.0) & (t <= 1.0)
    out = np.zeros(t.size)
    if np.any(inside):
        out[inside] = trig_basis(est.m_hat, t[inside]) @ est.coeffs / (hi - lo)
    return scalar_or_array(out.reshape(x.shape))


def density_grid(
    est: TrigEstimate, points: int = GRID_POINTS, clip: bool = False
) -> Tuple[np.ndarray, np.ndarray]:
    x = np.linspace(est.interval[0], est.interval[1], points)
    f = np.asarray(evaluate_trig(est, x))
    return x, np.maximum(f, 0.0) if clip else f
