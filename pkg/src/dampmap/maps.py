"""Coordinate, time and parameter maps between frames.

State-level functions check frames and return new :class:`State` objects;
the ``*_arr`` helpers apply the same algebra to sample arrays of shape (N, 4).
Square-root inverses track the branch by nearest continuation.
"""
from __future__ import annotations

import cmath
from typing import Optional

import numpy as np

from .errors import BranchAmbiguity, CollisionSingularity, FrameMismatch, OriginSingularity
from .model import Frame, PhysParams, State


def _expect(state: State, frame: Frame):
    if state.frame is not frame:
        raise FrameMismatch(f"expected a {frame.slug} state, got {state.frame.slug}")


# --- time-dependent point transformations ---------------------------------

def point_map_arr(s, y, lam: float, inverse: bool = False) -> np.ndarray:
    """X = x e^{lam s/2}, X' = (x' + lam x/2) e^{lam s/2} (or the inverse)."""
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 1
    y = np.atleast_2d(y)
    s = np.broadcast_to(s, (len(y),))
    out = np.empty_like(y)
    if not inverse:
        e = np.exp(0.5 * lam * s)
        out[:, 0:2] = y[:, 0:2] * e[:, None]
        out[:, 2:4] = (y[:, 2:4] + 0.5 * lam * y[:, 0:2]) * e[:, None]
    else:
        e = np.exp(-0.5 * lam * s)
        out[:, 0:2] = y[:, 0:2] * e[:, None]
        out[:, 2:4] = y[:, 2:4] * e[:, None] - 0.5 * lam * out[:, 0:2]
    return out[0] if scalar else out


def point_map_kepler(state: State, lam: float, inverse: bool = False) -> State:
    """Damped Kepler <-> transformed Kepler; the time value is unchanged."""
    src, dst = Frame.DAMPED_KEPLER, Frame.TRANSFORMED_KEPLER
    if inverse:
        src, dst = dst, src
    _expect(state, src)
    y = point_map_arr(state.s, state.as_array(), lam, inverse=inverse)
    return State.from_array(y, state.s, dst)


def ho_point_map(state: State, lam: float, inverse: bool = False) -> State:
    """Damped oscillator <-> shifted oscillator, x = q e^{lam tau/2}."""
    src, dst = Frame.DAMPED_HO, Frame.SHIFTED_HO
    if inverse:
        src, dst = dst, src
    _expect(state, src)
    y = point_map_arr(state.s, state.as_array(), lam, inverse=inverse)
    return State.from_array(y, state.s, dst)


# --- square roots with branch tracking -------------------------------------

def nearest_root(z: complex, prev: Optional[complex]) -> complex:
    """Square root of ``z`` closest in direction to ``prev``."""
    w = cmath.sqrt(z)
    if prev is None:
        if z == 0:
            raise BranchAmbiguity("square root branch at Z = 0 needs trajectory context")
        return w
    return w if (w * prev.conjugate()).real >= 0 else -w


def track_sqrt(z, start: Optional[complex] = None) -> np.ndarray:
    """Branch-continuous square roots along a sampled curve.

    Each root is chosen to maximize Re(w_i * conj(w_{i-1})); the first sample
    uses ``start`` as its reference (principal root when omitted).
    """
    z = np.asarray(z, dtype=complex)
    w = np.sqrt(z)
    out = np.empty_like(w)
    prev = start
    for i, wi in enumerate(w):
        if prev is not None and (wi * np.conj(prev)).real < 0:
            wi = -wi
        if prev is None and z[i] == 0:
            raise BranchAmbiguity("trajectory starts at Z = 0 without a reference branch")
        out[i] = wi
        if wi != 0:
            prev = wi
    return out


# --- Levi-Civita ------------------------------------------------------------

def u_to_z_arr(u, up, params: PhysParams):
    """Z = gamma U^2 and dZ/dt = (c/r) * 2 gamma U U' with r = gamma |U|^2."""
    u = np.asarray(u, dtype=complex)
    up = np.asarray(up, dtype=complex)
    g = params.gamma
    r = g * np.abs(u) ** 2
    if np.any(r == 0):
        raise CollisionSingularity("U = 0 maps to the Kepler collision point")
    return g * u * u, (params.c / r) * 2.0 * g * u * up


def z_to_u_velocity(z, zdot, u, params: PhysParams):
    """U' = r Zdot / (2 c gamma U)."""
    r = np.abs(z)
    return r * np.asarray(zdot) / (2.0 * params.c * params.gamma * np.asarray(u))


def levi_civita(state: State, params: PhysParams, branch: Optional[complex] = None,
                tau: float = 0.0) -> State:
    """Transformed-Kepler state -> sextic-oscillator state (Z = gamma U^2).

    ``branch`` is a reference value of U for the root choice.
    """
    _expect(state, Frame.TRANSFORMED_KEPLER)
    z = state.z
    u = nearest_root(z / params.gamma, branch)
    up = complex(z_to_u_velocity(z, state.zdot, u, params))
    return State.from_complex(u, up, tau, Frame.SEXTIC_OSC)


def levi_civita_inverse(state: State, params: PhysParams, t: float = 0.0) -> State:
    """Sextic-oscillator state -> transformed-Kepler state at physical time ``t``."""
    _expect(state, Frame.SEXTIC_OSC)
    z, zdot = u_to_z_arr(state.z, state.zdot, params)
    return State.from_complex(complex(z), complex(zdot), t, Frame.TRANSFORMED_KEPLER)


# --- Bohlin-Sudman -----------------------------------------------------------

def omega_to_z_arr(w, wp):
    """Z = omega^2, dZ/dt = omega' / (2 conj(omega))."""
    w = np.asarray(w, dtype=complex)
    wp = np.asarray(wp, dtype=complex)
    if np.any(w == 0):
        raise OriginSingularity("Bohlin velocity map is singular at omega = 0")
    return w * w, wp / (2.0 * np.conj(w))


def bohlin_map(state: State, t: float = 0.0) -> State:
    """Shifted-oscillator state -> Bohlin-Kepler state at physical time ``t``."""
    _expect(state, Frame.SHIFTED_HO)
    z, zdot = omega_to_z_arr(state.z, state.zdot)
    return State.from_complex(complex(z), complex(zdot), t, Frame.BOHLIN_KEPLER)


def bohlin_inverse(state: State, branch: Optional[complex] = None, tau: float = 0.0) -> State:
    _expect(state, Frame.BOHLIN_KEPLER)
    w = nearest_root(state.z, branch)
    wp = 2.0 * w.conjugate() * state.zdot
    return State.from_complex(w, wp, tau, Frame.SHIFTED_HO)


def bohlin_clock_rate(w) -> np.ndarray:
    """dt/dtau = 4 |omega|^2."""
    return 4.0 * np.abs(np.asarray(w)) ** 2


# --- parameter identifications ---------------------------------------------

IDENTIFICATIONS = ("kepler-energy-from-omega0", "k-from-oscillator-energy", "bohlin-kepler-energy")


def identify_parameters(direction: str, **inputs) -> float:
    """Map source-side constants to the target side.

    ``kepler-energy-from-omega0``:  E = -m Omega0^2 / 8      (inputs m, omega0)
    ``k-from-oscillator-energy``:   k = E / 4                (input energy)
    ``bohlin-kepler-energy``:       E_Kepler = -(m/8)(Omega^2 - lambda^2/4)
                                                           (inputs m, Omega, lam)
    """
    if direction == "kepler-energy-from-omega0":
        return -inputs["m"] * inputs["omega0"] ** 2 / 8.0
    if direction == "k-from-oscillator-energy":
        return inputs["energy"] / 4.0
    if direction == "bohlin-kepler-energy":
        return -(inputs["m"] / 8.0) * (inputs["Omega"] ** 2 - inputs["lam"] ** 2 / 4.0)
    raise ValueError(f"unknown identification {direction!r}; choose from {IDENTIFICATIONS}")
