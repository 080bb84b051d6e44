"""Conserved quantities and Hamiltonians of the six frames.

Sign convention: :func:`cal_E` returns the symbol cal_E itself, i.e. minus the
transformed-Kepler Hamiltonian.  :func:`kepler_energy` returns E_Kepler, not
its negative.
"""
from __future__ import annotations

import numpy as np

from .errors import CollisionSingularity, FrameMismatch
from .maps import point_map_arr
from .model import Frame, PhysParams, State, omega_tilde


def _r(y):
    r = np.hypot(y[..., 0], y[..., 1])
    if np.any(r == 0):
        raise CollisionSingularity("r = 0")
    return r


def _v2(y):
    return y[..., 2] ** 2 + y[..., 3] ** 2


def _q2(y):
    return y[..., 0] ** 2 + y[..., 1] ** 2


def cal_E_arr(y, params: PhysParams):
    y = np.asarray(y, dtype=float)
    m, lam = params.m, params.lam
    return -(0.5 * m * _v2(y) - lam**2 * m * _q2(y) / 8.0 - params.k / _r(y))


def cal_E(state: State, params: PhysParams) -> float:
    """Conserved cal_E of a transformed-Kepler state (reduces to -E at lambda = 0)."""
    if state.frame is not Frame.TRANSFORMED_KEPLER:
        raise FrameMismatch(f"cal_E needs a transformed-kepler state, got {state.frame.slug}")
    return float(cal_E_arr(state.as_array(), params))


def cal_E_from_u(u, up, params: PhysParams):
    """cal_E written through the Levi-Civita image (U, dU/dtau)."""
    u = np.asarray(u, dtype=complex)
    r = params.gamma * np.abs(u) ** 2
    m, c, lam = params.m, params.c, params.lam
    minus_E = 2.0 * m * c**2 * params.gamma * np.abs(up) ** 2 / r - m * lam**2 * r**2 / 8.0 - params.k / r
    return -minus_E


def angular_momentum_canonical(q1, q2, p1, p2):
    return q1 * p2 - q2 * p1


def angular_momentum_arr(y, m: float):
    y = np.asarray(y, dtype=float)
    return m * (y[..., 0] * y[..., 3] - y[..., 1] * y[..., 2])


def angular_momentum(state: State, params: PhysParams) -> float:
    """Canonical angular momentum q1 p2 - q2 p1.

    In every frame with momenta p = m v - (lam/2) m q the lambda terms cancel,
    leaving m (q1 v2 - q2 v1).  Damped frames are first mapped to their
    transformed partner, where L is conserved.
    """
    y = state.as_array()
    if state.frame in (Frame.DAMPED_KEPLER, Frame.DAMPED_HO):
        y = point_map_arr(state.s, y, params.lam)
    return float(angular_momentum_arr(y, params.m))


def kepler_energy_arr(y, params: PhysParams):
    y = np.asarray(y, dtype=float)
    return 0.5 * params.m * _v2(y) - params.k / _r(y)


def shifted_ho_energy_arr(y, params: PhysParams):
    y = np.asarray(y, dtype=float)
    return 0.5 * params.m * (_v2(y) + omega_tilde(params) ** 2 * _q2(y))


def sextic_hamiltonian_arr(y, params: PhysParams):
    y = np.asarray(y, dtype=float)
    m, c = params.m, params.c
    q2 = _q2(y)
    return (0.5 * m * _v2(y) + params.cal_E * q2 / (4.0 * c**2)
            - m * params.lam**2 * params.gamma**2 * q2**3 / (32.0 * c**2))


def _hamiltonian_arr(frame: Frame, params: PhysParams, s, y):
    if frame is Frame.TRANSFORMED_KEPLER:
        return -cal_E_arr(y, params)
    if frame is Frame.SEXTIC_OSC:
        return sextic_hamiltonian_arr(y, params)
    if frame is Frame.SHIFTED_HO:
        return shifted_ho_energy_arr(y, params)
    if frame is Frame.BOHLIN_KEPLER:
        return kepler_energy_arr(y, params)
    lam, m = params.lam, params.m
    s = np.asarray(s, dtype=float)
    if frame is Frame.DAMPED_KEPLER:
        # e^{-lam t} p^2/2m - k e^{-lam t/2}/r with p = m e^{lam t} v
        return 0.5 * m * np.exp(lam * s) * _v2(y) - params.k * np.exp(-0.5 * lam * s) / _r(y)
    if frame is Frame.DAMPED_HO:
        return np.exp(lam * s) * 0.5 * m * (_v2(y) + params.Omega**2 * _q2(y))
    raise ValueError(frame)


def hamiltonian(frame: Frame, state: State, params: PhysParams) -> float:
    """Hamiltonian of ``frame`` evaluated on ``state`` (time-dependent for damped frames)."""
    if state.frame is not frame:
        raise FrameMismatch(f"state is in {state.frame.slug}, Hamiltonian requested for {frame.slug}")
    return float(_hamiltonian_arr(frame, params, state.s, state.as_array()))


def diagnostics(frame: Frame, params: PhysParams, s, y) -> np.ndarray:
    """Two conserved quantities per sample, shape (N, 2).

    transformed-kepler / damped-kepler: (cal_E, L) of the transformed state;
    sextic-osc: (H, L); shifted-ho / damped-ho: (E, L) of the shifted state;
    bohlin-kepler: (E_Kepler, L).
    """
    y = np.asarray(y, dtype=float)
    if frame in (Frame.DAMPED_KEPLER, Frame.DAMPED_HO):
        y = point_map_arr(s, y, params.lam)
        frame = Frame.TRANSFORMED_KEPLER if frame is Frame.DAMPED_KEPLER else Frame.SHIFTED_HO
    if frame is Frame.TRANSFORMED_KEPLER:
        first = cal_E_arr(y, params)
    else:
        first = _hamiltonian_arr(frame, params, s, y)
    return np.column_stack([first, angular_momentum_arr(y, params.m)])
