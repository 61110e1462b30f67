"""Simulation and benchmark configuration, parsed from JSON dictionaries."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from ..core.errors import ConfigError, PileupError
from ..core.generating import GeneratingModel
from ..core.noise import NoiseModel
from ..core.sampling import TargetDistribution
from ..estimators.sinc import KAPPA_PP, KAPPA_PRIME
from ..estimators.trig import KAPPA

MISE_POINTS = 2048
ESTIMATORS = ("trig", "sinc")
ABLATIONS = ("no_pileup_correction", "no_deconvolution")
CHECK_KINDS = ("greater", "greater_m", "within_sd")

_KEYS = {
    "label", "target", "mu", "masses", "noise", "noise_sample_size", "n", "replicates",
    "estimator", "kappa", "kappa_prime", "kappa_pp", "grid_points", "master_seed",
    "ablation", "fft_size", "acceptance", "reference", "notes",
}


@dataclass(frozen=True)
class SimulationConfig:
    label: str
    target: TargetDistribution
    generating: GeneratingModel
    noise: Optional[NoiseModel] = None
    sigma2: Optional[float] = None
    noise_sample_size: Optional[int] = None
    n: int = 2000
    replicates: int = 25
    estimator: str = "trig"
    kappa: float = KAPPA
    kappa_prime: float = KAPPA_PRIME
    kappa_pp: float = KAPPA_PP
    grid_points: int = MISE_POINTS
    master_seed: int = 0
    ablation: Tuple[str, ...] = ()
    fft_size: Optional[int] = None
    acceptance: Dict[str, Any] = field(default_factory=dict, compare=False)
    reference: Dict[str, Any] = field(default_factory=dict, compare=False)
    notes: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.replicates < 1:
            raise ConfigError(f"{self.label}: replicates must be >= 1")
        if self.n < 2:
            raise ConfigError(f"{self.label}: n must be >= 2")
        if self.grid_points < 2:
            raise ConfigError(f"{self.label}: grid_points must be >= 2")
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"{self.label}: estimator must be one of {ESTIMATORS}")
        if self.estimator == "sinc" and self.noise is None:
            raise ConfigError(f"{self.label}: the sinc estimator needs a noise model")
        if self.noise is not None and self.sigma2 is not None and self.sigma2 <= 0.0:
            raise ConfigError(f"{self.label}: sigma2 must be positive")
        if self.noise_sample_size is not None and (self.noise is None or self.noise_sample_size < 1):
            raise ConfigError(f"{self.label}: noise_sample_size needs a noise model and must be >= 1")
        bad = set(self.ablation) - set(ABLATIONS)
        if bad:
            raise ConfigError(f"{self.label}: unknown ablation {sorted(bad)}")

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "SimulationConfig":
        unknown = set(d) - _KEYS
        if unknown:
            raise ConfigError(f"unknown configuration keys {sorted(unknown)}")
        label = str(d.get("label", "run"))
        try:
            target = TargetDistribution.parse(str(d["target"]))
            generating = GeneratingModel.from_dict(d)
            noise = NoiseModel.from_dict(d["noise"]) if d.get("noise") else None
            sigma2 = d["noise"].get("sigma2") if d.get("noise") else None
            ablation = d.get("ablation", ())
            if isinstance(ablation, str):
                ablation = (ablation,)
            return cls(
                label=label,
                target=target,
                generating=generating,
                noise=noise,
                sigma2=None if sigma2 is None else float(sigma2),
                noise_sample_size=d.get("noise_sample_size"),
                n=int(d.get("n", 2000)),
                replicates=int(d.get("replicates", 25)),
                estimator=str(d.get("estimator", "sinc" if noise is not None else "trig")),
                kappa=float(d.get("kappa", KAPPA)),
                kappa_prime=float(d.get("kappa_prime", KAPPA_PRIME)),
                kappa_pp=float(d.get("kappa_pp", KAPPA_PP)),
                grid_points=int(d.get("grid_points", MISE_POINTS)),
                master_seed=int(d.get("master_seed", 0)),
                ablation=tuple(str(a).replace("-", "_") for a in ablation),
                fft_size=d.get("fft_size"),
                acceptance=dict(d.get("acceptance", {})),
                reference=dict(d.get("reference", {})),
                notes=tuple(d.get("notes", ())),
            )
        except KeyError as e:
            raise ConfigError(f"{label}: missing key {e}") from e
        except ConfigError:
            raise
        except (PileupError, TypeError, ValueError) as e:
            raise ConfigError(f"{label}: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "label": self.label,
            "target": self.target.name,
            "generating": self.generating.to_dict(),
            "n": self.n,
            "replicates": self.replicates,
            "estimator": self.estimator,
            "grid_points": self.grid_points,
            "master_seed": self.master_seed,
            "ablation": list(self.ablation),
            "notes": list(self.notes),
        }
        if self.estimator == "trig" or "no_deconvolution" in self.ablation:
            out["kappa"] = self.kappa
        else:
            out["kappa_prime"] = self.kappa_prime
            out["kappa_pp"] = self.kappa_pp
        if self.noise is not None:
            out["noise"] = dict(self.noise.to_dict(), sigma2=self.sigma2)
            out["noise_sample_size"] = self.noise_sample_size
        if self.fft_size is not None:
            out["fft_size"] = self.fft_size
        return out


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    configurations: List[SimulationConfig]
    checks: List[Dict[str, Any]] = field(default_factory=list)

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "BenchmarkSpec":
        if not isinstance(d, dict):
            raise ConfigError("benchmark spec must be a JSON object")
        raw = d.get("configurations")
        if not isinstance(raw, list) or not raw:
            raise ConfigError("benchmark spec lists no configurations")
        defaults = dict(d.get("defaults", {}))
        configs = [SimulationConfig.from_dict({**defaults, **c}) for c in raw]
        labels = [c.label for c in configs]
        if len(set(labels)) != len(labels):
            raise ConfigError("configuration labels must be unique")
        checks = list(d.get("checks", []))
        for chk in checks:
            if chk.get("kind") not in CHECK_KINDS:
                raise ConfigError(f"unknown check kind {chk.get('kind')!r}")
            for side in ("left", "right"):
                if chk.get(side) not in labels:
                    raise ConfigError(f"check refers to unknown label {chk.get(side)!r}")
        return cls(name=str(d.get("name", "benchmark")), configurations=configs, checks=checks)


def bundled_benchmarks() -> List[str]:
    root = resources.files("pileupdens").joinpath("data/benchmarks")
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def load_benchmark(name_or_path: str) -> BenchmarkSpec:
    """Load a benchmark spec from a JSON file, or a bundled one by name."""
    path = Path(name_or_path)
    try:
        if path.is_file():
            text = path.read_text(encoding="utf-8")
        else:
            res = resources.files("pileupdens").joinpath(f"data/benchmarks/{name_or_path}.json")
            if not res.is_file():
                raise ConfigError(
                    f"no benchmark file or bundled spec named {name_or_path!r} "
                    f"(bundled: {', '.join(bundled_benchmarks())})"
                )
            text = res.read_text(encoding="utf-8")
        return BenchmarkSpec.from_dict(json.loads(text))
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed benchmark JSON: {e}") from e
