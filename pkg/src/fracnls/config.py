"""Experiment configuration: a flat dataclass loaded from JSON and validated up front."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields

from .errors import ValidationError
from .grid import _is_admissible_n

__all__ = ["ExperimentConfig", "KINDS", "load_config"]

KINDS = (
    "simulate",
    "decay-linear",
    "decay-nonlinear",
    "resonance-check",
    "normalform-check",
    "dyadic-constants",
    "scatter-forward",
    "scatter-final",
    "norms-report",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one run needs.

    Fields not used by a given ``kind`` are ignored.  ``coupling`` may be a
    number or a ``[re, im]`` pair in JSON.
    """

    kind: str = "simulate"
    # grid
    dim: int = 3
    n: int = 48
    half_width: float = 24.0
    # equation and norms
    alpha: float = 1.5
    lam: float = 0.4
    eps0: float = 0.05
    coupling: complex = 1.0
    # data
    family: str = "gaussian"
    sigma: float = 2.0
    k0: int = -1
    width: float = 0.5
    seed: int = 0
    # stepping
    scheme: str = "rk4"
    dt: float = 0.05
    t_end: float = 5.0
    n_out: int = 20
    t_fit_min: float = 2.0
    dts: tuple = (0.25, 0.125, 0.0625)
    # final data
    t_max: float = None
    horizon: float = None
    mesh_step: float = 0.05
    max_iters: int = 10
    tol: float = 1e-10
    # linear decay
    shell_k: int = 0
    t_lo: float = 10.0
    t_hi: float = 1000.0
    n_t: int = 10
    # resonance
    region_kind: str = "HH"
    offset_range: int = 10
    samples: int = 2000
    # dyadic constants
    t_grid_min: float = 1.0
    t_grid_max: float = 1.0e4
    t_grid_n: int = 25

    def __post_init__(self):
        c = self.coupling
        if isinstance(c, (list, tuple)):
            if len(c) != 2:
                raise ValidationError("coupling pair must be [re, im]")
            object.__setattr__(self, "coupling", complex(c[0], c[1]))
        object.__setattr__(self, "dts", tuple(float(x) for x in self.dts))
        self.validate()

    def validate(self):
        if self.kind not in KINDS:
            raise ValidationError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not 1 < self.alpha < 2:
            raise ValidationError(f"alpha={self.alpha} violates 1 < alpha < 2")
        lo = (self.alpha - 1) / 2
        if not self.lam > lo:
            raise ValidationError(f"lam={self.lam} violates lam > (alpha-1)/2 = {lo:.6g}")
        if not self.lam < 0.5:
            raise ValidationError(f"lam={self.lam} violates lam < 1/2")
        if self.dim not in (1, 3):
            raise ValidationError("dim must be 1 or 3")
        if not _is_admissible_n(self.n):
            raise ValidationError(f"n={self.n} must be 2^a or 3*2^a and at least 8")
        if not self.half_width > 0:
            raise ValidationError("half_width must be positive")
        if self.eps0 < 0:
            raise ValidationError("eps0 must be nonnegative")
        if self.family not in ("gaussian", "shell"):
            raise ValidationError("family must be 'gaussian' or 'shell'")
        if self.scheme not in ("rk4", "strang"):
            raise ValidationError("scheme must be 'rk4' or 'strang'")
        for name in ("dt", "t_end", "mesh_step", "tol", "t_lo", "t_hi", "t_grid_min", "sigma"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")
        if any(d <= 0 for d in self.dts) or len(self.dts) < 2:
            raise ValidationError("dts needs at least two positive step sizes")
        if self.t_hi <= self.t_lo or self.t_grid_max <= self.t_grid_min:
            raise ValidationError("time windows must be increasing")
        if self.region_kind not in ("HH", "HL"):
            raise ValidationError("region_kind must be 'HH' or 'HL'")
        if self.n_out < 1 or self.n_t < 10 or self.t_grid_n < 2 or self.max_iters < 1:
            raise ValidationError("sample counts too small")

    def as_dict(self):
        d = asdict(self)
        c = complex(self.coupling)
        d["coupling"] = [c.real, c.imag]
        d["dts"] = list(self.dts)
        return d

    def replace(self, **kw):
        d = asdict(self)
        d.update(kw)
        return ExperimentConfig(**d)


def load_config(path, **overrides):
    """Read a JSON object of :class:`ExperimentConfig` fields."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValidationError("config file must hold a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValidationError(f"unknown config fields: {unknown}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**data)
