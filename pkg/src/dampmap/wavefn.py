"""Eigenfunctions on both sides of the quantum map.

``raw`` variants reproduce the printed (unnormalized) functions; ``normalized``
variants divide by the radial norm computed by Gauss-Laguerre quadrature, so
that the integral of |psi|^2 rho drho dphi is one.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.special import roots_genlaguerre

from . import oracle
from .errors import InvalidParams
from .model import PhysParams
from .specfun import gamma_int, gen_binomial, hyp1f1_terminating, hyp3f2_regularized
from .spectra import QuantumNumbers, hatom_beta, hatom_like_E0, resolve_omega0, sextic_coupling

VARIANTS = ("raw", "normalized")
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _variant(v):
    if v not in VARIANTS:
        raise InvalidParams(f"variant must be one of {VARIANTS}, got {v!r}")


def radial_norm(n: int, a: int, scale: float) -> float:
    """sqrt of int_0^inf e^{-x} x^a 1F1(-n; a+1; x)^2 dx / scale^(a+1), x = scale * s.

    With s = rho^2 (oscillator) the area integral picks up a further 1/2.
    """
    x, w = roots_genlaguerre(n + a + 2, a)
    f = hyp1f1_terminating(n, a + 1, x)
    return math.sqrt(float(np.sum(w * f * f)) / scale ** (a + 1))


def osc_norm(n_rho: int, l: int, alpha: float) -> float:
    """Norm of the printed psi0 (angular factor included)."""
    return radial_norm(n_rho, abs(l), alpha) / math.sqrt(2.0)


def psi0_osc(n_rho: int, l: int, alpha: float, rho, phi=0.0, variant: str = "raw"):
    """(1/sqrt(2 pi)) e^{-alpha rho^2/2} rho^|l| 1F1(-n; |l|+1; alpha rho^2) e^{i l phi}."""
    QuantumNumbers(n_rho, l)
    _variant(variant)
    rho = np.asarray(rho, dtype=float)
    a = abs(l)
    val = (_INV_SQRT_2PI * np.exp(-0.5 * alpha * rho**2) * rho**a
           * hyp1f1_terminating(n_rho, a + 1, alpha * rho**2) * np.exp(1j * l * np.asarray(phi)))
    if variant == "normalized":
        val = val / osc_norm(n_rho, l, alpha)
    return val


def band(n: int, width: int = 3):
    """Radial quantum numbers coupled to ``n`` by rho^6 (excluding n itself)."""
    return [k for k in range(n - width, n + width + 1) if k >= 0 and k != n]


def psi1_coefficients(n_rho: int, l: int, params: PhysParams, omega0: Optional[float] = None,
                      method: str = "oracle") -> dict:
    """n' -> coefficient of psi0_{n', l} in the first-order correction.

    ``oracle``: <n'|V|n>/(E0_n - E0_n') for the normalized basis (standard
    first order, unperturbed energies in the denominator).
    ``paper``: the printed A*B/(E0_n - E0_n') multiplying the raw functions.
    """
    QuantumNumbers(n_rho, l)
    w0 = resolve_omega0(params, omega0)
    alpha = params.m * w0 / params.hbar
    a = abs(l)
    out = {}
    if params.lam == 0:
        return {k: 0.0 for k in band(n_rho)}
    for k in band(n_rho):
        de = params.hbar * w0 * 2 * (n_rho - k)
        if method == "oracle":
            v = -sextic_coupling(params) * oracle.me_rho6(n_rho, k, l, alpha).value
            out[k] = v / de
        elif method == "paper":
            big_a = (-params.lam**2 * params.m / (64.0 * params.c**2) / alpha ** (4 + a)
                     * float(Fraction(math.factorial(n_rho) * math.factorial(a), math.factorial(n_rho + a))
                             * Fraction(math.factorial(k) * math.factorial(a), math.factorial(k + a))))
            series = hyp3f2_regularized(k, a + 4, 4, a + 1, 4 - n_rho, prefactor_binom=(n_rho - 4, n_rho))
            big_b = gen_binomial(k + a, n_rho) * gamma_int(a + 4) * series
            out[k] = big_a * float(big_b) / de
        else:
            raise InvalidParams(f"method must be 'oracle' or 'paper', got {method!r}")
    return out


def psi1_osc(n_rho: int, l: int, params: PhysParams, rho, phi=0.0, omega0: Optional[float] = None,
             method: str = "oracle"):
    """First-order correction, truncated to the exact band |n' - n| <= 3 with dl = 0."""
    w0 = resolve_omega0(params, omega0)
    alpha = params.m * w0 / params.hbar
    variant = "normalized" if method == "oracle" else "raw"
    coeffs = psi1_coefficients(n_rho, l, params, w0, method)
    total = np.zeros(np.broadcast(np.asarray(rho), np.asarray(phi)).shape, dtype=complex)
    for k, ck in coeffs.items():
        if ck:
            total = total + ck * psi0_osc(k, l, alpha, rho, phi, variant)
    return total


def psi_hatom(n_r: int, l_tilde: int, beta: float, r, theta=0.0, variant: str = "raw"):
    """(1/sqrt(2 pi)) e^{i l~ theta} r^|l~| e^{-beta r} 1F1(-n_r; 2|l~|+1; 2 beta r)."""
    QuantumNumbers(n_r, l_tilde)
    _variant(variant)
    r = np.asarray(r, dtype=float)
    a = abs(l_tilde)
    val = (_INV_SQRT_2PI * np.exp(1j * l_tilde * np.asarray(theta)) * r**a * np.exp(-beta * r)
           * hyp1f1_terminating(n_r, 2 * a + 1, 2 * beta * r))
    if variant == "normalized":
        # x = 2 beta r: int r^{2a} e^{-2 beta r} F^2 r dr = int x^{2a+1} e^{-x} F^2 dx / (2 beta)^{2a+2}
        x, w = roots_genlaguerre(n_r + 2 * a + 3, 2 * a)
        f = hyp1f1_terminating(n_r, 2 * a + 1, x)
        val = val / math.sqrt(float(np.sum(w * x * f * f)) / (2 * beta) ** (2 * a + 2))
    return val


def psi_hatom_correction(n_r: int, l_tilde: int, params: PhysParams, r, theta=0.0,
                         beta: Optional[float] = None, method: str = "paper"):
    """First-order correction on the hydrogen-like side.

    ``paper``: the printed mapped sum over n_r' with hydrogen energies in the
    denominators.  ``mapped``: the oscillator oracle correction at
    (n_rho = n_r, l = 2 l~, alpha = 2 beta, c = 1/4) evaluated at rho = sqrt(r),
    phi = theta/2.
    """
    beta = hatom_beta(n_r, l_tilde, params) if beta is None else beta
    if method == "mapped":
        pq = params.replace(c=0.25)
        w0 = 2 * beta * params.hbar / params.m
        return psi1_osc(n_r, 2 * l_tilde, pq, np.sqrt(np.asarray(r, dtype=float)),
                        0.5 * np.asarray(theta), omega0=w0, method="oracle")
    if method != "paper":
        raise InvalidParams(f"method must be 'paper' or 'mapped', got {method!r}")
    total = np.zeros(np.broadcast(np.asarray(r), np.asarray(theta)).shape, dtype=complex)
    if params.lam == 0:
        return total
    lt = 2 * abs(l_tilde)
    e0 = hatom_like_E0(n_r, l_tilde, params.m, params.k, params.hbar)
    for k in band(n_r):
        bt = (-params.lam**2 * params.m / (8.0 * (2 * beta) ** (4 + lt))
              * float(Fraction(math.factorial(n_r) * math.factorial(lt), math.factorial(n_r + lt))
                      * Fraction(math.factorial(k) * math.factorial(lt), math.factorial(k + lt))))
        series = hyp3f2_regularized(k, lt + 4, 4, lt + 1, 4 - n_r, prefactor_binom=(n_r - 4, n_r))
        coeff = bt * float(gen_binomial(k + lt, n_r) * gamma_int(lt + 4) * series)
        de = e0 - hatom_like_E0(k, l_tilde, params.m, params.k, params.hbar)
        total = total + coeff / de * psi_hatom(k, l_tilde, beta, r, theta)
    return total


def gauge_restore(psi, r, lam: float, m: float = 1.0, hbar: float = 1.0):
    """Phi = exp(-i m lambda r^2 / 4 hbar) psi."""
    r = np.asarray(r, dtype=float)
    return np.exp(-1j * m * lam * r**2 / (4.0 * hbar)) * np.asarray(psi)


def rotation_parity(l: int) -> int:
    """Sign picked up by psi0_osc under phi -> phi + pi."""
    return -1 if l % 2 else 1


def mapped_single_valued(l: int) -> bool:
    """Whether e^{i l theta/2} is 2 pi-periodic in theta."""
    return l % 2 == 0
