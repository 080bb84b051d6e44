"""Independent brute-force validators.

Nothing here uses the closed-form spectral formulas: matrix elements come from
Gauss-Laguerre quadrature (cross-checked by an exact Laguerre expansion),
eigenvalues from finite-difference diagonalization, and the two identities of
the canonical-transformation argument are checked pointwise.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq
from scipy.special import eval_genlaguerre, gammaln, roots_genlaguerre

from . import conserved
from .errors import DomainError, InvalidParams, NoBoundState, NonConvergence
from .maps import point_map_arr
from .model import Frame, PhysParams, Trajectory

# --- matrix elements of rho^6 ----------------------------------------------


@dataclass(frozen=True)
class MatrixElement:
    n: int
    n_prime: int
    l: int
    alpha: float
    value: float
    method: str
    nodes: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _rho6_closed_form(n: int, n_prime: int, a: int) -> float:
    """Exact value at alpha = 1 from the power-series expansion of both Laguerres."""

    def coeffs(k):
        # L_k^a(x) = sum_j (-1)^j binom(k+a, k-j) x^j / j!
        return [Fraction((-1) ** j * math.comb(k + a, k - j), math.factorial(j)) for j in range(k + 1)]

    ca, cb = coeffs(n), coeffs(n_prime)
    s = Fraction(0)
    for i, x in enumerate(ca):
        for j, y in enumerate(cb):
            s += x * y * math.factorial(a + 3 + i + j)
    h = Fraction(math.factorial(n + a), math.factorial(n)) * Fraction(
        math.factorial(n_prime + a), math.factorial(n_prime))
    if s == 0:
        return 0.0
    # s / sqrt(h) with h rational; sign kept separately
    return math.copysign(math.sqrt(float(s * s / h)), float(s))


def _rho6_quadrature(n: int, n_prime: int, a: int, nodes: int) -> float:
    x, w = roots_genlaguerre(nodes, a)
    ln = eval_genlaguerre(n, a, x)
    lp = eval_genlaguerre(n_prime, a, x)
    log_h = 0.5 * (gammaln(n + a + 1) - gammaln(n + 1) + gammaln(n_prime + a + 1) - gammaln(n_prime + 1))
    terms = w * x**3 * (ln * lp)  # symmetric in (n, n')
    norm = math.exp(-log_h)
    return float(np.sum(terms) * norm), float(np.sum(np.abs(terms)) * norm)


def me_rho6(n: int, n_prime: int, l: int, alpha: float, method: str = "quadrature") -> MatrixElement:
    """<n' l | rho^6 | n l> in the normalized 2D oscillator basis.

    R_{nl}(rho) ~ rho^|l| exp(-alpha rho^2/2) L_n^|l|(alpha rho^2), normalized
    with measure rho drho.  ``method`` is ``"quadrature"`` (Gauss-Laguerre,
    escalated until two orders agree) or ``"closed-form"`` (exact expansion).
    """
    if min(n, n_prime) < 0:
        raise DomainError("radial quantum numbers must be >= 0")
    if not alpha > 0:
        raise DomainError(f"alpha must be > 0, got {alpha!r}")
    a = abs(int(l))
    scale = alpha ** -3
    lo, hi = sorted((n, n_prime))  # evaluation order fixed so the element is exactly symmetric
    if method == "closed-form":
        return MatrixElement(n, n_prime, l, alpha, _rho6_closed_form(lo, hi, a) * scale, method)
    if method != "quadrature":
        raise InvalidParams(f"unknown method {method!r}")
    nodes = n + n_prime + a + 4
    v, _ = _rho6_quadrature(lo, hi, a, nodes)
    for _ in range(6):
        v2, size = _rho6_quadrature(lo, hi, a, nodes + 4)
        # cancellation noise scales with the size of the summands
        if abs(v2 - v) <= 1e-13 * max(1.0, size):
            break
        nodes += 4
        v = v2
    else:
        raise NonConvergence(f"Gauss-Laguerre escalation failed for ({n}, {n_prime}, {l})")
    return MatrixElement(n, n_prime, l, alpha, v * scale, method, nodes)


# --- finite-difference radial diagonalization -------------------------------

POTENTIALS = ("harmonic", "sextic-osc", "kepler", "kepler-inverted-ho")


@dataclass(frozen=True)
class PotentialSpec:
    """Radial potential V(r; lambda).

    harmonic            m omega^2 r^2/2
    sextic-osc          m omega^2 r^2/2 - m lambda^2 gamma^2 r^6/(32 c^2)
    kepler              -k/r
    kepler-inverted-ho  -k/r - m lambda^2 r^2/8
    """

    kind: str
    m: float = 1.0
    hbar: float = 1.0
    omega: float = 1.0
    k: float = 1.0
    c: float = 0.25
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in POTENTIALS:
            raise InvalidParams(f"potential must be one of {POTENTIALS}, got {self.kind!r}")

    @classmethod
    def from_params(cls, kind: str, params: PhysParams, omega: Optional[float] = None) -> "PotentialSpec":
        return cls(kind, m=params.m, hbar=params.hbar, omega=params.Omega if omega is None else omega,
                   k=params.k, c=params.c, gamma=params.gamma)

    @property
    def is_kepler(self) -> bool:
        return self.kind.startswith("kepler")

    def __call__(self, r, lam: float = 0.0):
        r = np.asarray(r, dtype=float)
        m = self.m
        if self.kind == "harmonic":
            return 0.5 * m * self.omega**2 * r**2
        if self.kind == "sextic-osc":
            return (0.5 * m * self.omega**2 * r**2
                    - m * lam**2 * self.gamma**2 * r**6 / (32.0 * self.c**2))
        if self.kind == "kepler":
            return -self.k / r
        return -self.k / r - m * lam**2 * r**2 / 8.0

    def length_scale(self) -> float:
        if self.is_kepler:
            return self.hbar**2 / (self.m * self.k)
        return math.sqrt(self.hbar / (self.m * self.omega))

    def inverted(self, lam: float) -> bool:
        return lam > 0 and self.kind in ("sextic-osc", "kepler-inverted-ho")


@dataclass(frozen=True)
class GridSpec:
    """Staggered radial grid r_i = (i - 1/2) h, i = 1..n, wall at r_max.

    ``r_max=None`` picks a default from the potential's length scale; for
    inverted potentials ``wall`` chooses ``"turning-point"`` (outer classical
    turning point of each level, found by fixed-point iteration) or
    ``"barrier-top"``.
    """

    n: Optional[int] = None
    r_max: Optional[float] = None
    refine: bool = True
    wall: str = "turning-point"

    def __post_init__(self):
        if self.wall not in ("turning-point", "barrier-top"):
            raise InvalidParams(f"wall must be 'turning-point' or 'barrier-top', got {self.wall!r}")
        if self.n is not None and self.n < 10:
            raise InvalidParams("grid needs at least 10 points")


@dataclass(frozen=True)
class GridResult:
    eigenvalues: np.ndarray
    coarse: np.ndarray
    fine: Optional[np.ndarray]
    r_max: np.ndarray
    n: int
    richardson_error: float
    barrier_top: Optional[float] = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "coarse": [float(x) for x in self.coarse],
            "fine": None if self.fine is None else [float(x) for x in self.fine],
            "r_max": [float(x) for x in self.r_max],
            "n": self.n,
            "richardson_error": self.richardson_error,
            "barrier_top": self.barrier_top,
        }


def _fd_levels(pot: PotentialSpec, l: int, lam: float, r_max: float, n: int, count: int):
    """Lowest ``count`` eigenvalues of the symmetrized flux-form radial operator.

    With u = sqrt(r) R the operator -(hbar^2/2m)(1/r)(r R')' + (hbar^2 l^2/2m r^2) R
    discretizes to a symmetric tridiagonal matrix on the staggered grid.
    """
    h = r_max / (n + 0.5)
    r = (np.arange(1, n + 1) - 0.5) * h
    rp, rm = r + 0.5 * h, r - 0.5 * h
    t = pot.hbar**2 / (2.0 * pot.m * h * h)
    diag = t * (rp + rm) / r + pot.hbar**2 * l * l / (2.0 * pot.m * r * r) + pot(r, lam)
    off = -t * rp[:-1] / np.sqrt(r[:-1] * r[1:])
    vals = eigh_tridiagonal(diag, off, select="i", select_range=(0, count - 1))[0]
    return vals, h


def _veff(pot: PotentialSpec, l: int, lam: float, r):
    # effective potential of the u = sqrt(r) R form
    return pot(r, lam) + pot.hbar**2 * (l * l - 0.25) / (2.0 * pot.m * r * r)


def barrier_top(pot: PotentialSpec, l: int, lam: float) -> float:
    """Radius of the barrier maximum of the inverted potential."""
    if not pot.inverted(lam):
        raise DomainError("barrier_top needs an inverted potential with lambda > 0")
    # bare barrier radius, then refined with the centrifugal term
    if pot.kind == "sextic-osc":
        g = pot.m * lam**2 * pot.gamma**2 / (32.0 * pot.c**2)
        r0 = (pot.m * pot.omega**2 / (6.0 * g)) ** 0.25
    else:
        r0 = (4.0 * pot.k / (pot.m * lam**2)) ** (1.0 / 3.0)

    def dv(r):
        d = 1e-6 * r
        return (_veff(pot, l, lam, r + d) - _veff(pot, l, lam, r - d)) / (2 * d)

    lo = 0.3 * r0
    while dv(lo) <= 0 and lo > 1e-6 * r0:
        lo *= 0.5
    try:
        return float(brentq(dv, lo, 3.0 * r0, xtol=1e-13 * r0))
    except ValueError:
        return r0


def _outer_turning_point(pot, l, lam, energy, top):
    f = lambda r: _veff(pot, l, lam, r) - energy  # noqa: E731
    hi = 2.0 * top
    while f(hi) > 0:
        hi *= 1.5
    return float(brentq(f, top, hi, xtol=1e-13 * top))


def _default_r_max(pot: PotentialSpec, l: int, count: int) -> float:
    a = pot.length_scale()
    if pot.is_kepler:
        n_eff = count + abs(l) + 0.5
        return a * max(150.0, 6.0 * n_eff**2)
    return a * max(12.0, math.sqrt(2.0 * (2 * count + abs(l) + 1)) + 8.0)


def _richardson(e_h, h, e_h2, h2):
    return (e_h2 * h**2 - e_h * h2**2) / (h**2 - h2**2)


def grid_diag(
    potential: PotentialSpec,
    l: int,
    lam: float = 0.0,
    grid: Optional[GridSpec] = None,
    n_levels: int = 3,
) -> GridResult:
    """Lowest ``n_levels`` radial eigenvalues for angular number ``l``.

    Second-order finite differences with Richardson extrapolation from grids
    n and 2n.  Inverted potentials are truncated by a Dirichlet wall placed
    per level (see :class:`GridSpec`).
    """
    grid = grid or GridSpec()
    if n_levels < 1:
        raise InvalidParams("n_levels must be >= 1")
    n = grid.n or (16000 if potential.is_kepler else 4000)
    inverted = potential.inverted(lam)
    top = barrier_top(potential, l, lam) if inverted else None

    def solve(r_max, count, npts):
        return _fd_levels(potential, l, lam, r_max, npts, count)

    def levels_at(r_max, count):
        vals, h = solve(r_max, count, n)
        if not grid.refine:
            return vals, vals, None, h
        vals2, h2 = solve(r_max, count, 2 * n)
        return _richardson(vals, h, vals2, h2), vals, vals2, h

    if not inverted:
        r_max = grid.r_max or _default_r_max(potential, l, n_levels)
        best, coarse, fine, _ = levels_at(r_max, n_levels)
        walls = np.full(n_levels, r_max)
    else:
        v_top = float(_veff(potential, l, lam, top))
        best = np.empty(n_levels)
        coarse = np.empty(n_levels)
        fine = np.empty(n_levels) if grid.refine else None
        walls = np.empty(n_levels)
        for i in range(n_levels):
            r_max = grid.r_max or top
            for _ in range(12):
                b, c0, f0, _ = levels_at(r_max, i + 1)
                if b[i] >= v_top:
                    raise NoBoundState(
                        f"level {i} (E={b[i]:.6g}) is not below the barrier top {v_top:.6g}")
                if grid.r_max is not None or grid.wall == "barrier-top":
                    break
                new = _outer_turning_point(potential, l, lam, b[i], top)
                done = abs(new - r_max) <= 1e-10 * new
                r_max = new
                if done:
                    b, c0, f0, _ = levels_at(r_max, i + 1)
                    break
            best[i], coarse[i], walls[i] = b[i], c0[i], r_max
            if fine is not None:
                fine[i] = f0[i]
    err = 0.0 if fine is None else float(np.max(np.abs(best - fine)))
    if err > 1e-4:
        raise NonConvergence(f"grid refinement disagrees by {err:.3g} (> 1e-4)")
    return GridResult(np.asarray(best), np.asarray(coarse), fine, np.asarray(walls), n, err, top)


# --- Schroedinger residual ---------------------------------------------------


def _d1(f, h):
    return (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)


def _d2(f, h):
    return (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * h * h)


def apply_radial_hamiltonian(psi, r, potential: PotentialSpec, l: int, lam: float = 0.0):
    """H psi at interior points r[2:-2] of a uniform grid (fourth-order stencils)."""
    r = np.asarray(r, dtype=float)
    psi = np.asarray(psi)
    h = r[1] - r[0]
    if not np.allclose(np.diff(r), h, rtol=1e-9, atol=0):
        raise InvalidParams("schrodinger_residual needs a uniform radial grid")
    ri = r[2:-2]
    if np.any(ri <= 0):
        raise InvalidParams("interior grid points must have r > 0")
    lap = _d2(psi, h) + _d1(psi, h) / ri - l * l * psi[2:-2] / ri**2
    return -potential.hbar**2 / (2.0 * potential.m) * lap + potential(ri, lam) * psi[2:-2]


def schrodinger_residual(psi, r, potential: PotentialSpec, energy: float, l: int,
                         lam: float = 0.0) -> float:
    """||H psi - E psi|| / ||E psi|| with the area weight r dr, interior points only."""
    hpsi = apply_radial_hamiltonian(psi, r, potential, l, lam)
    ri = np.asarray(r, dtype=float)[2:-2]
    p = np.asarray(psi)[2:-2]
    num = np.sum(np.abs(hpsi - energy * p) ** 2 * ri)
    den = np.sum(np.abs(energy * p) ** 2 * ri)
    return float(math.sqrt(num / den))


# --- canonical transformation check -----------------------------------------


@dataclass(frozen=True)
class CanonicalReport:
    max_violation: float
    n_points: int
    source: str

    def to_dict(self) -> dict:
        return asdict(self)


def canonical_violation(t, y, params: PhysParams) -> np.ndarray:
    """|cal_H(X, P) - H(x, p, t) - dF2/dt| per sample of a damped-Kepler state array.

    H = e^{-lam t} p^2/2m - k e^{-lam t/2}/r with p = m e^{lam t} xdot;
    F2 = x e^{lam t/2} . P gives dF2/dt = (lam/2) X . P with P = e^{-lam t/2} p.
    cal_H is the transformed-Kepler Hamiltonian, evaluated independently from
    the point-mapped velocities (so P also equals m Xdot - lam m X/2).
    """
    t = np.asarray(t, dtype=float)
    y = np.atleast_2d(np.asarray(y, dtype=float))
    lam, m, k = params.lam, params.m, params.k
    x, v = y[:, 0:2], y[:, 2:4]
    p = m * np.exp(lam * t)[:, None] * v
    r = np.hypot(x[:, 0], x[:, 1])
    h_old = np.exp(-lam * t) * np.sum(p * p, axis=1) / (2 * m) - k * np.exp(-0.5 * lam * t) / r
    big_x = x * np.exp(0.5 * lam * t)[:, None]
    big_p = p * np.exp(-0.5 * lam * t)[:, None]
    df2dt = 0.5 * lam * np.sum(big_x * big_p, axis=1)
    h_new = -conserved.cal_E_arr(point_map_arr(t, y, lam), params)
    return np.abs(h_new - h_old - df2dt)


def canonical_check(
    trajectory: Optional[Trajectory] = None,
    params: Optional[PhysParams] = None,
    n_random: int = 0,
    seed: Optional[int] = None,
) -> CanonicalReport:
    """Maximum identity violation along ``trajectory`` or at random phase-space points."""
    if trajectory is not None:
        if trajectory.frame is not Frame.DAMPED_KEPLER:
            raise InvalidParams("canonical_check needs a damped-kepler trajectory")
        params = params or trajectory.params
        viol = canonical_violation(trajectory.s, trajectory.y, params)
        return CanonicalReport(float(viol.max()), len(viol), "trajectory")
    if params is None or n_random <= 0 or seed is None:
        raise InvalidParams("random canonical_check needs params, n_random > 0 and an explicit seed")
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.0, 5.0, n_random)
    ang = rng.uniform(0, 2 * np.pi, n_random)
    rad = rng.uniform(0.2, 3.0, n_random)
    y = np.column_stack([rad * np.cos(ang), rad * np.sin(ang), rng.normal(size=(n_random, 2))])
    viol = canonical_violation(t, y, params)
    return CanonicalReport(float(viol.max()), n_random, f"random(seed={seed})")


# --- chain-rule check -------------------------------------------------------


@dataclass(frozen=True)
class SampleFunction:
    """f(X, t) with its analytic time derivative at fixed X (complex-step safe)."""

    name: str
    f: Callable
    dfdt: Callable


def _moving_gaussian():
    def centre(t):
        return 0.5 * np.cos(t), 0.5 * np.sin(t)

    def f(x1, x2, t):
        a, b = centre(t)
        return np.exp(-((x1 - a) ** 2 + (x2 - b) ** 2))

    def dfdt(x1, x2, t):
        a, b = centre(t)
        da, db = -0.5 * np.sin(t), 0.5 * np.cos(t)
        return f(x1, x2, t) * 2.0 * ((x1 - a) * da + (x2 - b) * db)

    return SampleFunction("moving-gaussian", f, dfdt)


SAMPLE_FUNCTIONS = {
    "moving-gaussian": _moving_gaussian,
    "x1": lambda: SampleFunction("x1", lambda x1, x2, t: x1 + 0 * t, lambda x1, x2, t: 0 * x1),
    "time-only": lambda: SampleFunction("time-only", lambda x1, x2, t: np.sin(t) + 0 * x1,
                                        lambda x1, x2, t: np.cos(t) + 0 * x1),
}


@dataclass(frozen=True)
class ChainRuleReport:
    function: str
    lam: float
    printed_relation_err: float
    weighted_relation_err: float
    spatial_relation_err: float
    holds: str
    n_points: int

    def to_dict(self) -> dict:
        return asdict(self)


def chainrule_check(
    function: str = "moving-gaussian",
    lam: float = 0.4,
    grid: Sequence = (np.linspace(-2, 2, 21), np.linspace(0.0, 3.0, 7)),
) -> ChainRuleReport:
    """Test the time-derivative relation under X = x e^{lam t/2}, t = t~.

    With g(x, t~) = f(x e^{lam t~/2}, t~) the exact relation is
    df/dt|_X = dg/dt~ - (lam/2) x_i dg/dx_i.  The variant without the x_i
    weight is evaluated too.  Derivatives of g use the complex step.
    """
    if function not in SAMPLE_FUNCTIONS:
        raise InvalidParams(f"function must be one of {sorted(SAMPLE_FUNCTIONS)}")
    sf = SAMPLE_FUNCTIONS[function]()
    xs, ts = (np.asarray(g, dtype=float) for g in grid)
    x1, x2, t = np.meshgrid(xs, xs, ts, indexing="ij")
    x1, x2, t = x1.ravel(), x2.ravel(), t.ravel()
    hstep = 1e-30

    def g(a, b, tt):
        e = np.exp(0.5 * lam * tt)
        return sf.f(a * e, b * e, tt)

    dg_dt = g(x1 + 0j, x2 + 0j, t + 1j * hstep).imag / hstep
    dg_dx1 = g(x1 + 1j * hstep, x2 + 0j, t + 0j).imag / hstep
    dg_dx2 = g(x1 + 0j, x2 + 1j * hstep, t + 0j).imag / hstep
    e = np.exp(0.5 * lam * t)
    big1, big2 = x1 * e, x2 * e
    lhs = sf.dfdt(big1, big2, t)
    printed = dg_dt - 0.5 * lam * (dg_dx1 + dg_dx2)
    weighted = dg_dt - 0.5 * lam * (x1 * dg_dx1 + x2 * dg_dx2)
    df_dx1 = sf.f(big1 + 1j * hstep, big2 + 0j, t + 0j).imag / hstep
    spatial = np.abs(df_dx1 - dg_dx1 / e)
    p_err = float(np.max(np.abs(printed - lhs)))
    w_err = float(np.max(np.abs(weighted - lhs)))
    if w_err <= 1e-10 and p_err <= 1e-10:
        holds = "both"
    elif w_err <= 1e-10:
        holds = "weighted"
    elif p_err <= 1e-10:
        holds = "printed"
    else:
        holds = "neither"
    return ChainRuleReport(function, float(lam), p_err, w_err, float(spatial.max()), holds, len(t))
