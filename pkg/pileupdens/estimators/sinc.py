"""Deconvolution estimator on the sinc basis for noisy pile-up observations.

Observations are Z = min(Y_j + eta_j). The pile-up weights turn the empirical
characteristic function of Z into an estimate of the transform of X = Y + eta;
dividing by the noise transform and cutting frequencies at pi*m gives the
sinc-basis coefficients
    a_{m,j} = (1/2pi) int phi*_{m,j}(-u) fX^(u) / f*_eta(u) du,
computed for all j at once with one inverse FFT on a T-point grid.

Selection works in the frame x / L, L the length of the observed range, so the
cutoff m and Delta_eta(m) are counted on [0, 1] while the contrast stays on the
original scale. Evaluation maps back with f(x) = f_1(x / L) / L.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import numpy.typing as npt

from ..core.errors import ConfigError, DomainError, NumericError
from ..core.fourier import exp_sum, exp_sum_grid
from ..core.generating import WeightProfile
from ..core.noise import RIEMANN_POINTS, EmpiricalNoise, NoiseModel, delta_eta
from ..core.sampling import Sample
from ..core.utils import check_count, scalar_or_array

LOGGER = logging.getLogger(__name__)

KAPPA_PRIME = 1.0
KAPPA_PP = 0.001
FFT_SIZE = 4096
COEF_MARGIN = 32
GRID_POINTS = 512
FT_FLOOR = 1e-12
_EVAL_BUDGET = 1 << 22


@dataclass(frozen=True, eq=False)
class SincEstimate:
    """Coefficients a_{m,j}, j = -K..K, stored at index j + K."""

    m_bar: int
    K: int
    coeffs: np.ndarray
    T: int
    n: int
    z_max: float = 0.0
    length: float = 1.0

    def __post_init__(self) -> None:
        if self.m_bar < 1 or self.K < 0:
            raise DomainError(f"invalid cutoff m={self.m_bar} or truncation K={self.K}")
        if not (math.isfinite(self.length) and self.length > 0.0):
            raise DomainError(f"frame length must be positive, got {self.length}")
        if len(self.coeffs) != 2 * self.K + 1:
            raise DomainError(f"{len(self.coeffs)} coefficients for K = {self.K}")

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "basis": "sinc",
            "m": self.m_bar,
            "K": self.K,
            "T": self.T,
            "coeffs": [[float(a.real), float(a.imag)] for a in self.coeffs],
            "n": self.n,
            "support": [0.0, float(self.z_max)],
            "length": float(self.length),
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "SincEstimate":
        c = np.asarray(d["coeffs"], dtype=float).reshape(-1, 2)
        return cls(
            m_bar=int(d["m"]),
            K=int(d["K"]),
            coeffs=c[:, 0] + 1j * c[:, 1],
            T=int(d["T"]),
            n=int(d["n"]),
            z_max=float(d.get("support", [0.0, 0.0])[1]),
            length=float(d.get("length", 1.0)),
        )

    def __call__(self, x: npt.ArrayLike):
        return evaluate_sinc(self, x)


def weighted_ecf(sample: Sample, u: npt.ArrayLike):
    """(1/n) sum_k exp(-i u Z_(k)) w(k/n)."""
    return scalar_or_array(exp_sum(sample.values, sample.weights, u) / sample.n)


def sinc_basis(m: int, j: int, x: npt.ArrayLike):
    """sqrt(m) * sin(pi (m x - j)) / (pi (m x - j)); numpy's sinc handles the removable point."""
    return scalar_or_array(math.sqrt(m) * np.sinc(m * np.asarray(x, dtype=float) - j))


def default_truncation(m: int, z_max: float, n: int) -> int:
    # a_{m,j} lives near x = j/m, so |j| <= m * z_max covers the observed range
    return int(min(n, math.ceil(m * z_max) + COEF_MARGIN))


def default_fft_size(K: int) -> int:
    need = 2 * K + 2
    return max(FFT_SIZE, 1 << (need - 1).bit_length())


def _check_fft_size(T: int, K: int) -> None:
    if T < 2 or T & (T - 1):
        raise ConfigError(f"FFT size must be a power of two, got {T}")
    if T < 2 * K + 2:
        raise ConfigError(f"FFT size {T} too small for truncation K={K}; need >= {2 * K + 2}")


def _ratio_grid(sample: Sample, noise: NoiseModel, m: int, T: int) -> np.ndarray:
    """H_t = fX^(u_t) / f*_eta(u_t) on u_t = pi m (2t/T - 1), t = 0..T-1.

    Only t <= T/2 is computed; H(-u) = conj(H(u)) gives the rest. The
    unpaired endpoint u = -pi m is averaged with u = +pi m (trapezoid rule).
    """
    half = T // 2
    u0 = -math.pi * m
    du = 2.0 * math.pi * m / T
    ecf = exp_sum_grid(sample.values, sample.weights, u0, du, half + 1) / sample.n
    eta = noise.ft_grid(u0, du, half + 1)
    small = np.flatnonzero(np.abs(eta) < FT_FLOOR)
    if small.size:
        raise NumericError(
            f"noise Fourier transform vanishes at u={u0 + du * small[0]:.6g} (m={m})"
        )
    h = ecf / eta
    H = np.concatenate((h, np.conj(h[half - 1 : 0 : -1])))
    H[0] = h[0].real
    return H


def sinc_coefficients(
    sample: Sample,
    noise: NoiseModel,
    m: int,
    T: Optional[int] = None,
    K: Optional[int] = None,
) -> np.ndarray:
    """a_{m,j} for j = -K..K via a_{m,j} = (-1)^j sqrt(m) IFFT(H)_j.

    Negative indices use the conjugated grid, (-1)^j sqrt(m) conj(IFFT(conj H))_{|j|}.
    """
    m = check_count(m, "m")
    if K is None:
        K = default_truncation(m, sample.z_max, sample.n)
    if T is None:
        T = default_fft_size(K)
    _check_fft_size(T, K)
    H = _ratio_grid(sample, noise, m, T)
    j = np.arange(K + 1)
    sign = np.where(j % 2 == 0, 1.0, -1.0) * math.sqrt(m)
    pos = sign * np.fft.ifft(H)[: K + 1]
    neg = sign[1:] * np.conj(np.fft.ifft(np.conj(H)))[1 : K + 1]
    return np.concatenate((neg[::-1], pos))


def contrast_deconv(coeffs: npt.ArrayLike) -> float:
    """-sum |a_{m,j}|^2, the truncated contrast of the sinc estimator."""
    a = np.asarray(coeffs)
    return -float(np.sum(np.abs(a) ** 2))


def cutoff_collection(
    noise: NoiseModel, n: int, riemann_points: int = RIEMANN_POINTS
) -> List[int]:
    """{1, ..., m_n} with m_n the largest m such that Delta_eta(m) <= n (never empty)."""
    n = check_count(n)
    ms = [1]
    while delta_eta(noise, ms[-1] + 1, riemann_points) <= n:
        ms.append(ms[-1] + 1)
    return ms


def penalty(
    noise: NoiseModel,
    m: int,
    n: int,
    profile: WeightProfile,
    kappa_p: float = KAPPA_PRIME,
    kappa_pp: float = KAPPA_PP,
    riemann_points: int = RIEMANN_POINTS,
) -> float:
    scale = profile.W + kappa_pp * profile.c_w**2 * math.log(n)
    return kappa_p * scale * delta_eta(noise, m, riemann_points) / n


def default_length(sample: Sample) -> float:
    """Length of the selection frame, max(Z) * (1 + 1/n) like the trigonometric interval."""
    return sample.z_max * (1.0 + 1.0 / sample.n) or 1.0


def to_unit_frame(
    sample: Sample, noise: NoiseModel, length: float
) -> Tuple[Sample, NoiseModel]:
    """The sample and the noise law seen on the scale x / length."""
    if not (math.isfinite(length) and length > 0.0):
        raise DomainError(f"frame length must be positive, got {length}")
    return Sample(values=sample.values / length, weights=sample.weights), noise.rescaled(
        1.0 / length
    )


def select_cutoff(
    sample: Sample,
    noise: NoiseModel,
    kappa_p: float = KAPPA_PRIME,
    kappa_pp: float = KAPPA_PP,
    profile: Optional[WeightProfile] = None,
    T: Optional[int] = None,
    K: Optional[int] = None,
    riemann_points: int = RIEMANN_POINTS,
    length: Optional[float] = None,
) -> SincEstimate:
    """Minimise contrast_deconv + length * penalty over the cutoff collection of the unit frame.

    Both terms are computed on [0, 1] after dividing data and noise by `length`
    (default: default_length); multiplying the penalty by the length puts it on
    the original scale. Ties go to the smaller m.
    """
    if kappa_p <= 0.0 or kappa_pp < 0.0:
        raise DomainError(f"need kappa' > 0 and kappa'' >= 0, got {kappa_p}, {kappa_pp}")
    if profile is None:
        profile = WeightProfile(w0=1.0, w1=1.0, c_w=0.0, W=1.0)
    n = sample.n
    if isinstance(noise, EmpiricalNoise) and noise.size < n:
        LOGGER.warning("noise sample (M=%d) is smaller than the data (n=%d)", noise.size, n)

    if length is None:
        length = default_length(sample)
    unit, unit_noise = to_unit_frame(sample, noise, length)

    best: Optional[Tuple[float, int, int, int, np.ndarray]] = None
    for m in cutoff_collection(unit_noise, n, riemann_points):
        Km = K if K is not None else default_truncation(m, unit.z_max, n)
        Tm = T if T is not None else default_fft_size(Km)
        coeffs = sinc_coefficients(unit, unit_noise, m, Tm, Km)
        crit = contrast_deconv(coeffs) + length * penalty(
            unit_noise, m, n, profile, kappa_p, kappa_pp, riemann_points
        )
        if best is None or crit < best[0]:
            best = (crit, m, Km, Tm, coeffs)
    assert best is not None
    crit, m, Km, Tm, coeffs = best
    LOGGER.debug("sinc selection: m_bar=%d crit=%.6g length=%.6g", m, crit, length)
    return SincEstimate(
        m_bar=m, K=Km, coeffs=coeffs, T=Tm, n=n, z_max=sample.z_max, length=float(length)
    )


def sinc_series(est: SincEstimate, x: npt.ArrayLike) -> np.ndarray:
    """Complex sum_j a_{m,j} phi_{m,j}(x / L) / L; the imaginary part is rounding only."""
    x = np.asarray(x, dtype=float)
    flat = x.ravel() / est.length
    j = est.indices
    out = np.empty(flat.size, dtype=complex)
    step = max(1, _EVAL_BUDGET // j.size)
    root = math.sqrt(est.m_bar) / est.length
    for start in range(0, flat.size, step):
        block = flat[start : start + step]
        out[start : start + step] = root * np.sinc(est.m_bar * block[:, None] - j) @ est.coeffs
    return out.reshape(x.shape)


def evaluate_sinc(est: SincEstimate, x: npt.ArrayLike):
    """Raw estimate on the original scale, the real part of sinc_series; may be negative."""
    return scalar_or_array(sinc_series(est, x).real)


def density_grid(
    est: SincEstimate, points: int = GRID_POINTS, clip: bool = False
) -> Tuple[np.ndarray, np.ndarray]:
    x = np.linspace(0.0, est.z_max, points)
    f = np.asarray(evaluate_sinc(est, x))
    return x, np.maximum(f, 0.0) if clip else f
