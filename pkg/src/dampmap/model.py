"""Physical parameters, frames, phase-space states and trajectories.

Natural units (m = k = hbar = 1) are the defaults.  All types here are
immutable value objects.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

from .errors import (
    CollisionSingularity,
    InvalidParams,
    NonpositiveEnergy,
    OverdampedRegime,
)


class Frame(enum.Enum):
    """The six dynamical systems, each tagged with its time variable."""

    DAMPED_KEPLER = ("damped-kepler", "t")
    TRANSFORMED_KEPLER = ("transformed-kepler", "t")
    SEXTIC_OSC = ("sextic-osc", "tau")
    DAMPED_HO = ("damped-ho", "tau")
    SHIFTED_HO = ("shifted-ho", "tau")
    BOHLIN_KEPLER = ("bohlin-kepler", "t")

    def __init__(self, slug, time_var):
        self.slug = slug
        self.time_var = time_var

    @property
    def is_kepler(self) -> bool:
        return self in (Frame.DAMPED_KEPLER, Frame.TRANSFORMED_KEPLER, Frame.BOHLIN_KEPLER)

    @classmethod
    def from_slug(cls, slug: str) -> "Frame":
        for f in cls:
            if f.slug == slug:
                return f
        raise ValueError(f"unknown frame {slug!r}")


@dataclass(frozen=True)
class PhysParams:
    """Couplings of all six systems.

    ``lam`` is the damping rate (JSON key ``lambda``).  ``cal_E`` is the
    conserved quantity of the transformed Kepler problem; it parametrizes the
    sextic oscillator equation itself and is only required in that frame.
    """

    m: float = 1.0
    k: float = 1.0
    lam: float = 0.0
    hbar: float = 1.0
    Omega: float = 1.0
    c: float = 1.0
    gamma: float = 1.0
    cal_E: Optional[float] = None

    def __post_init__(self):
        for name in ("m", "k", "hbar", "c", "gamma"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidParams(f"{name} must be finite and > 0, got {v!r}")
        for name in ("lam", "Omega"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise InvalidParams(f"{name} must be finite and >= 0, got {v!r}")
        if self.cal_E is not None and not math.isfinite(self.cal_E):
            raise InvalidParams(f"cal_E must be finite, got {self.cal_E!r}")

    def replace(self, **changes) -> "PhysParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PhysParams":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        return cls(**d)


@dataclass(frozen=True)
class DerivedConstants:
    """Constants derived from :class:`PhysParams`.

    ``omega_tilde`` is set whenever ``Omega > 0``.  ``omega0`` is set when a
    conserved energy was supplied; ``alpha`` is then m*omega0/hbar, otherwise
    m*omega_tilde/hbar.  ``beta`` is always alpha/2.
    """

    omega_tilde: Optional[float] = None
    omega0: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None


def omega_tilde(params: PhysParams) -> float:
    w2 = params.Omega**2 - params.lam**2 / 4.0
    if not w2 > 0:
        raise OverdampedRegime(
            f"Omega^2 - lambda^2/4 = {w2!r} <= 0 (Omega={params.Omega}, lambda={params.lam})"
        )
    return math.sqrt(w2)


def omega0_from_energy(params: PhysParams, cal_E: float) -> float:
    # m*Omega0^2/2 = cal_E/(4 c^2)
    if not cal_E > 0:
        raise NonpositiveEnergy(f"cal_E must be > 0 to define Omega0, got {cal_E!r}")
    return math.sqrt(cal_E / (2.0 * params.m * params.c**2))


def derive_constants(params: PhysParams, cal_E: Optional[float] = None) -> DerivedConstants:
    if cal_E is None:
        cal_E = params.cal_E
    wt = omega_tilde(params) if params.Omega > 0 else None
    w0 = omega0_from_energy(params, cal_E) if cal_E is not None else None
    if w0 is not None:
        alpha = params.m * w0 / params.hbar
    elif wt is not None:
        alpha = params.m * wt / params.hbar
    else:
        alpha = None
    beta = alpha / 2.0 if alpha is not None else None
    return DerivedConstants(omega_tilde=wt, omega0=w0, alpha=alpha, beta=beta)


@dataclass(frozen=True)
class State:
    """One phase-space sample; velocities are w.r.t. the frame's own time."""

    q1: float
    q2: float
    v1: float
    v2: float
    s: float = 0.0
    frame: Frame = Frame.TRANSFORMED_KEPLER

    def __post_init__(self):
        if self.frame.is_kepler and self.q1 == 0.0 and self.q2 == 0.0:
            raise CollisionSingularity(f"r = 0 is not a valid {self.frame.slug} state")

    @property
    def r(self) -> float:
        return math.hypot(self.q1, self.q2)

    @property
    def z(self) -> complex:
        return complex(self.q1, self.q2)

    @property
    def zdot(self) -> complex:
        return complex(self.v1, self.v2)

    def as_array(self) -> np.ndarray:
        return np.array([self.q1, self.q2, self.v1, self.v2], dtype=float)

    @classmethod
    def from_array(cls, y, s: float, frame: Frame) -> "State":
        return cls(float(y[0]), float(y[1]), float(y[2]), float(y[3]), float(s), frame)

    @classmethod
    def from_complex(cls, z: complex, zdot: complex, s: float, frame: Frame) -> "State":
        return cls(z.real, z.imag, zdot.real, zdot.imag, float(s), frame)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples of one frame's flow.

    ``s`` has shape (N,), ``y`` shape (N, 4) holding (q1, q2, v1, v2) and
    ``diagnostics`` shape (N, 2) holding the frame's two conserved quantities.
    ``dense`` is the solver's continuous extension (callable of frame time,
    returning the full solver state) when available.
    """

    frame: Frame
    params: PhysParams
    s: np.ndarray
    y: np.ndarray
    diagnostics: np.ndarray
    dense: object = field(default=None, repr=False)
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.y.shape != (len(self.s), 4):
            raise ValueError(f"y must have shape ({len(self.s)}, 4), got {self.y.shape}")
        if len(self.diagnostics) != len(self.s):
            raise ValueError("diagnostics length must equal samples length")
        if len(self.s) > 1 and not np.all(np.diff(self.s) > 0):
            raise ValueError("sample times must be strictly increasing")

    def __len__(self):
        return len(self.s)

    @property
    def states(self) -> list[State]:
        return [State.from_array(yi, si, self.frame) for si, yi in zip(self.s, self.y)]

    @property
    def z(self) -> np.ndarray:
        return self.y[:, 0] + 1j * self.y[:, 1]

    @property
    def zdot(self) -> np.ndarray:
        return self.y[:, 2] + 1j * self.y[:, 3]

    def drift(self) -> np.ndarray:
        """max - min of each diagnostic column."""
        d = self.diagnostics
        return d.max(axis=0) - d.min(axis=0)


@dataclass(frozen=True)
class MapReport:
    pipeline: str
    max_position_deviation: float
    max_conserved_drift: float
    n_samples: int
    tol: float
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.max_position_deviation < 0 or self.max_conserved_drift < 0:
            raise ValueError("deviations must be non-negative")

    @property
    def passed(self) -> bool:
        return self.max_position_deviation < self.tol

    def to_dict(self) -> dict:
        return {
            "pipeline": self.pipeline,
            "max_position_deviation": self.max_position_deviation,
            "max_conserved_drift": self.max_conserved_drift,
            "n_samples": self.n_samples,
            "tol": self.tol,
            "passed": self.passed,
            "details": self.details,
        }
