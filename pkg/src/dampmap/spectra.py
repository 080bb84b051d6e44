"""Closed-form spectra, first-order corrections and the quantum-number map.

Oscillator side: the 2D oscillator of frequency Omega0 perturbed by the
inverted sextic -(lambda^2 m / 32 c^2) rho^6.  Mapped side: the 2D
hydrogen-like problem.  Corrections are available as the printed closed form
(``paper``) and as the first-order matrix element of the perturbation computed
by quadrature (``oracle``); ``grid`` diagonalizes the full radial problem.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.special import eval_genlaguerre, roots_genlaguerre

from . import oracle
from .errors import DomainError, InvalidParams, NonCancellableSingularity
from .model import PhysParams, omega0_from_energy, omega_tilde
from .specfun import gamma_int, gen_binomial, hyp3f2_regularized

QUANTUM_C = 0.25
METHODS = ("paper", "oracle", "both")


# --- quantum numbers ---------------------------------------------------------


@dataclass(frozen=True)
class QuantumNumbers:
    n_rho: int
    l: int

    def __post_init__(self):
        if int(self.n_rho) != self.n_rho or self.n_rho < 0:
            raise DomainError(f"n_rho must be a non-negative integer, got {self.n_rho!r}")
        if int(self.l) != self.l:
            raise DomainError(f"l must be an integer, got {self.l!r}")


@dataclass(frozen=True)
class MappedQuantumNumbers:
    n_r: int
    l_tilde: int


@dataclass(frozen=True)
class Rejected:
    n_rho: int
    l: int
    reason: str = "parity-odd"

    def __bool__(self):
        return False


def map_quantum_numbers(n_rho: int, l: int) -> Union[MappedQuantumNumbers, Rejected]:
    """(n_rho, l) -> (n_rho/2, l/2) when both are even, else :class:`Rejected`."""
    QuantumNumbers(n_rho, l)
    if n_rho % 2 or l % 2:
        which = [name for name, v in (("n_rho", n_rho), ("l", l)) if v % 2]
        return Rejected(n_rho, l, "parity-odd: " + ", ".join(which) + " odd")
    return MappedQuantumNumbers(n_rho // 2, l // 2)


# --- helpers -------------------------------------------------------------------


def resolve_omega0(params: PhysParams, omega0: Optional[float] = None) -> float:
    """Omega0 given explicitly or from params.cal_E via m Omega0^2/2 = cal_E/(4c^2)."""
    if omega0 is not None:
        if not omega0 > 0:
            raise InvalidParams(f"omega0 must be > 0, got {omega0!r}")
        return float(omega0)
    if params.cal_E is None:
        raise InvalidParams("oscillator spectra need omega0 or params.cal_E")
    return omega0_from_energy(params, params.cal_E)


def _check_nl(n: int, l: int):
    QuantumNumbers(n, l)


# --- oscillator side -----------------------------------------------------------


def osc_sextic_E0(n_rho: int, l: int, omega0: float, hbar: float = 1.0) -> float:
    _check_nl(n_rho, l)
    return hbar * omega0 * (2 * n_rho + abs(l) + 1)


def shifted_ho_E(n_rho: int, l: int, omega_t: float, hbar: float = 1.0) -> float:
    _check_nl(n_rho, l)
    if not omega_t > 0:
        raise DomainError(f"shifted frequency must be > 0, got {omega_t!r}")
    return hbar * omega_t * (2 * n_rho + abs(l) + 1)


def sextic_coupling(params: PhysParams) -> float:
    """Coefficient g of the perturbation -g rho^6."""
    return params.m * params.lam**2 * params.gamma**2 / (32.0 * params.c**2)


def printed_rational(n_rho: int, l: int):
    """Exact rational factor binom(n+|l|, n) binom(n-4, n) Gamma(|l|+4) 3F2(...) (n!|l|!/(n+|l|)!)^2."""
    a = abs(l)
    series = hyp3f2_regularized(n_rho, a + 4, 4, a + 1, 4 - n_rho, prefactor_binom=(n_rho - 4, n_rho))
    ratio = Fraction(math.factorial(n_rho) * math.factorial(a), math.factorial(n_rho + a))
    return gen_binomial(n_rho + a, n_rho) * gamma_int(a + 4) * series * ratio**2


def osc_sextic_E1_paper(n_rho: int, l: int, params: PhysParams, omega0: Optional[float] = None) -> float:
    """First-order shift from the printed closed form.

    -(lambda^2 m / 64 c^2) alpha^-(4+|l|) x (exact rational kernel).  The
    generalized binomial with negative upper index and the 3F2 with lower
    parameter 4 - n_rho are combined exactly before any division.
    """
    _check_nl(n_rho, l)
    alpha = params.m * resolve_omega0(params, omega0) / params.hbar
    rational = printed_rational(n_rho, l)
    if params.lam == 0:
        return 0.0
    pref = -params.lam**2 * params.m / (64.0 * params.c**2) / alpha ** (4 + abs(l))
    return pref * float(rational)


def osc_sextic_E1_oracle(n_rho: int, l: int, params: PhysParams, omega0: Optional[float] = None) -> float:
    """<n l| -g rho^6 |n l> with the normalized basis (quadrature)."""
    _check_nl(n_rho, l)
    alpha = params.m * resolve_omega0(params, omega0) / params.hbar
    if params.lam == 0:
        return 0.0
    return -sextic_coupling(params) * oracle.me_rho6(n_rho, n_rho, l, alpha).value


def osc_sextic_E_grid(n_rho: int, l: int, params: PhysParams, omega0: Optional[float] = None,
                      grid: Optional[oracle.GridSpec] = None) -> float:
    """Level n_rho of the barrier-truncated radial problem (finite differences)."""
    _check_nl(n_rho, l)
    pot = oracle.PotentialSpec.from_params("sextic-osc", params, resolve_omega0(params, omega0))
    return float(oracle.grid_diag(pot, abs(l), params.lam, grid, n_levels=n_rho + 1).eigenvalues[n_rho])


# --- hydrogen-like side -------------------------------------------------------


def hatom_like_E0(n_r: int, l_tilde: int, m: float = 1.0, k: float = 1.0, hbar: float = 1.0) -> float:
    _check_nl(n_r, l_tilde)
    return -m * k * k / (2.0 * hbar**2 * (n_r + abs(l_tilde) + 0.5) ** 2)


def hatom_beta(n_r: int, l_tilde: int, params: PhysParams) -> float:
    """Decay constant of the 2D hydrogen eigenfunction, m k / (hbar^2 (n_r + |l~| + 1/2))."""
    return params.m * params.k / (params.hbar**2 * (n_r + abs(l_tilde) + 0.5))


def hatom_r2(n_r: int, l_tilde: int, beta: float) -> float:
    """<r^2> in the normalized 2D hydrogen state (Gauss-Laguerre in x = 2 beta r)."""
    a = 2 * abs(l_tilde)
    x, w = roots_genlaguerre(n_r + a + 6, a)
    lag = eval_genlaguerre(n_r, a, x) ** 2
    return float(np.sum(w * lag * x**3) / np.sum(w * lag * x)) / (2.0 * beta) ** 2


HATOM_METHODS = ("paper", "oracle", "mapped")


def hatom_like_E1(n_r: int, l_tilde: int, params: PhysParams, method: str = "paper",
                  beta: Optional[float] = None) -> float:
    """First-order shift of the mapped level (n_r, l~); c is fixed to 1/4.

    ``paper``: the printed mapped formula with B = (2 beta)^-2|l~| (n_r!(2|l~|)!/(n_r+2|l~|)!)^2.
    ``oracle``: -(m lambda^2/8) <r^2> in the normalized 2D hydrogen state, the
    first-order shift of the hydrogen-side Hamiltonian itself.
    ``mapped``: the oscillator oracle at the mapped source numbers
    (n_rho = 2 n_r, l = 2 l~, alpha = 2 beta).  It agrees with ``oracle`` only
    at (0, 0) with beta = 2; it is kept to expose the mapping mismatch.
    """
    _check_nl(n_r, l_tilde)
    if method not in HATOM_METHODS:
        raise InvalidParams(f"method must be one of {HATOM_METHODS}, got {method!r}")
    beta = hatom_beta(n_r, l_tilde, params) if beta is None else beta
    if method == "paper":
        lt = 2 * abs(l_tilde)
        series = hyp3f2_regularized(n_r, lt + 4, 4, lt + 1, 4 - n_r, prefactor_binom=(n_r - 4, n_r))
        frac = Fraction(math.factorial(n_r) * math.factorial(lt), math.factorial(n_r + lt))
        rational = gen_binomial(n_r + lt, n_r) * gamma_int(lt + 4) * series * frac**2
        if params.lam == 0:
            return 0.0
        return -params.lam**2 * params.m / (8.0 * (2 * beta) ** (4 + lt)) * float(rational)
    if params.lam == 0:
        return 0.0
    if method == "mapped":
        pq = params.replace(c=QUANTUM_C)
        return osc_sextic_E1_oracle(2 * n_r, 2 * l_tilde, pq, omega0=2 * beta * params.hbar / params.m)
    return -params.m * params.lam**2 / 8.0 * hatom_r2(n_r, l_tilde, beta)


# --- spectrum tables -----------------------------------------------------------


@dataclass
class SpectrumEntry:
    side: str
    n: int
    l: int
    E0: float
    E1: Optional[float]
    method: str
    params: dict
    source: Optional[Tuple[int, int]] = None
    E1_paper: Optional[float] = None
    E1_oracle: Optional[float] = None
    ratio: Optional[float] = None
    flag: Optional[str] = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["source"] = list(self.source) if self.source is not None else None
        return d


def _safe(fn, *args, **kw):
    try:
        return fn(*args, **kw), None
    except NonCancellableSingularity as exc:
        return None, f"non-cancellable singularity: {exc}"


def _ratio(p, o):
    if p is None or o is None or o == 0:
        return None
    return p / o


def spectrum_table(side: str, params: PhysParams, nmax: int, lmax: int, method: str = "oracle",
                   omega0: Optional[float] = None) -> dict:
    """Rows for all n <= nmax, |l| <= lmax on ``side``.

    ``side`` is ``oscillator``, ``mapped-hatom`` or ``shifted-ho``.  For the
    mapped side rows are generated from oscillator source states; parity-odd
    sources are listed under ``rejected``.  Singular combinations are flagged
    in-row.
    """
    if method not in METHODS:
        raise InvalidParams(f"method must be one of {METHODS}, got {method!r}")
    pdict = params.to_dict()
    rows: List[SpectrumEntry] = []
    rejected = []
    for n in range(nmax + 1):
        for l in range(-lmax, lmax + 1):
            if side == "shifted-ho":
                e0 = shifted_ho_E(n, l, omega_tilde(params), params.hbar)
                rows.append(SpectrumEntry(side, n, l, e0, 0.0, "exact", pdict))
                continue
            if side == "oscillator":
                w0 = resolve_omega0(params, omega0)
                e0 = osc_sextic_E0(n, l, w0, params.hbar)
                p, flag = _safe(osc_sextic_E1_paper, n, l, params, w0) if method != "oracle" else (None, None)
                o = osc_sextic_E1_oracle(n, l, params, w0) if method != "paper" else None
                rows.append(_entry(side, n, l, e0, p, o, method, pdict, None, flag))
                continue
            if side != "mapped-hatom":
                raise InvalidParams(f"unknown side {side!r}")
            mapped = map_quantum_numbers(n, l)
            if not mapped:
                rejected.append(asdict(mapped))
                continue
            nr, lt = mapped.n_r, mapped.l_tilde
            e0 = hatom_like_E0(nr, lt, params.m, params.k, params.hbar)
            p, flag = _safe(hatom_like_E1, nr, lt, params, "paper") if method != "oracle" else (None, None)
            o = hatom_like_E1(nr, lt, params, "oracle") if method != "paper" else None
            rows.append(_entry(side, nr, lt, e0, p, o, method, pdict, (n, l), flag))
    return {"side": side, "method": method, "rows": [r.to_dict() for r in rows], "rejected": rejected}


def _entry(side, n, l, e0, p, o, method, pdict, source, flag):
    e1 = p if method == "paper" else o
    return SpectrumEntry(side, n, l, e0, e1, method, pdict, source,
                         E1_paper=p, E1_oracle=o, ratio=_ratio(p, o) if method == "both" else None,
                         flag=flag)


# --- reconciliation -----------------------------------------------------------------


@dataclass
class Reconciliation:
    rows: list
    classification: str
    per_l_constant: dict
    max_asymmetry: float
    max_out_of_band: float
    max_out_of_band_quadrature: float
    max_quadrature_vs_exact: float
    singular: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _classify(rows, rel=1e-9):
    ratios = [r["ratio"] for r in rows if r["ratio"] is not None]
    if not ratios:
        return "undefined", {}
    if all(abs(x - 1) <= rel for x in ratios):
        return "match", {}
    per_l = {}
    for r in rows:
        if r["ratio"] is not None:
            per_l.setdefault(abs(r["l"]), []).append(r["ratio"])
    consts = {}
    for l, xs in sorted(per_l.items()):
        consts[str(l)] = xs[0] if all(abs(x - xs[0]) <= rel * abs(xs[0]) for x in xs) else None
    if all(abs(x - ratios[0]) <= rel * abs(ratios[0]) for x in ratios):
        return "constant", consts
    if all(v is not None for v in consts.values()):
        return "constant-per-l", consts
    return "disagree", consts


def reconciliation_table(params: PhysParams, omega0: float, nmax: int = 6, lmax: int = 4,
                         band_nmax: int = 8) -> Reconciliation:
    """Paper/oracle ratio for every (n_rho <= nmax, |l| <= lmax) plus matrix-element consistency.

    Nothing is asserted here; the classification records whether the printed
    correction matches the oracle exactly, up to one constant, up to a
    constant per |l| channel, or not at all.
    """
    alpha = params.m * omega0 / params.hbar
    rows = []
    singular = []
    for n in range(nmax + 1):
        for l in range(-lmax, lmax + 1):
            p, flag = _safe(osc_sextic_E1_paper, n, l, params, omega0)
            o = osc_sextic_E1_oracle(n, l, params, omega0)
            if flag:
                singular.append([n, l])
            rows.append({"n_rho": n, "l": l, "E1_paper": p, "E1_oracle": o,
                         "ratio": _ratio(p, o), "flag": flag})
    asym = band = band_quad = qvx = 0.0
    for l in range(lmax + 1):
        for n in range(band_nmax + 1):
            for npr in range(n, band_nmax + 1):
                a = oracle.me_rho6(n, npr, l, alpha).value
                b = oracle.me_rho6(npr, n, l, alpha).value
                ex = oracle.me_rho6(n, npr, l, alpha, "closed-form").value
                asym = max(asym, abs(a - b))
                qvx = max(qvx, abs(a - ex) / max(1.0, abs(ex)))
                if npr - n > 3:
                    band = max(band, abs(ex))
                    # quadrature noise relative to the diagonal scale of the pair
                    diag = max(oracle.me_rho6(n, n, l, alpha).value, oracle.me_rho6(npr, npr, l, alpha).value)
                    band_quad = max(band_quad, abs(a) / diag)
    cls, consts = _classify(rows)
    return Reconciliation(rows, cls, consts, asym, band, band_quad, qvx, singular)
