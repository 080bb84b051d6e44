"""Exact-rational special-function kernels.

Only terminating series are supported: every hypergeometric function used by
the spectral formulas has a non-positive integer upper parameter.  Rational
values are :class:`fractions.Fraction` and are converted to float once, at the
end of each physical formula.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Tuple

import numpy as np

from .errors import DomainError, NonCancellableSingularity

RationalKernel = Fraction


def gamma_int(n: int) -> Fraction:
    """Gamma(n) = (n-1)! for a positive integer n."""
    if int(n) != n or n <= 0:
        raise DomainError(f"gamma_int needs a positive integer, got {n!r}")
    return Fraction(math.factorial(int(n) - 1))


def pochhammer(a, j: int) -> Fraction:
    """Rising factorial (a)_j = a(a+1)...(a+j-1)."""
    out = Fraction(1)
    a = Fraction(a)
    for i in range(j):
        out *= a + i
    return out


def gen_binomial(a: int, j: int) -> Fraction:
    """a(a-1)...(a-j+1)/j!, valid for negative a."""
    if int(j) != j or j < 0:
        raise DomainError(f"binomial lower index must be a non-negative integer, got {j!r}")
    num = Fraction(1)
    for i in range(int(j)):
        num *= Fraction(a) - i
    return num / math.factorial(int(j))


def hyp1f1_terminating(n: int, b: float, x):
    """1F1(-n; b; x) as the degree-n polynomial sum_j (-n)_j/((b)_j j!) x^j.

    Vectorized over ``x``.  Raises :class:`DomainError` when (b)_j vanishes
    for some j <= n.
    """
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n!r}")
    n = int(n)
    coeffs = [1.0]
    c = 1.0
    for j in range(n):
        den = (b + j) * (j + 1)
        if den == 0:
            raise DomainError(f"(b)_{j + 1} vanishes for b={b!r} inside the truncated sum")
        c *= (-n + j) / den
        coeffs.append(c)
    x = np.asarray(x, dtype=float) if not np.iscomplexobj(x) else np.asarray(x)
    # Horner, highest power first
    out = np.full_like(x, coeffs[-1], dtype=np.result_type(x, float))
    for cj in reversed(coeffs[:-1]):
        out = out * x + cj
    return out if out.ndim else out[()]


def laguerre_assoc(n: int, a: float, x):
    """Generalized Laguerre polynomial L_n^a(x) by the three-term recurrence."""
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n!r}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else prev[()]
    cur = 1.0 + a - x
    for k in range(1, int(n)):
        prev, cur = cur, ((2 * k + 1 + a - x) * cur - (k + a) * prev) / (k + 1)
    return cur if cur.ndim else cur[()]


def _limit_product(num: list, den: list) -> Fraction:
    """lim_{eps->0} prod(v + s*eps over num) / prod(v + s*eps over den).

    Factors are (value, slope) pairs of integers/Fractions.  Zero-valued
    factors with nonzero slope contribute their slope and one power of eps;
    a zero factor with zero slope is identically zero.
    """
    value = Fraction(1)
    order = 0
    for v, s in num:
        if v == 0:
            if s == 0:
                return Fraction(0)
            value *= s
            order += 1
        else:
            value *= v
    for v, s in den:
        if v == 0:
            if s == 0:
                raise NonCancellableSingularity("identically vanishing denominator factor")
            value /= s
            order -= 1
        else:
            value /= v
    if order > 0:
        return Fraction(0)
    if order < 0:
        raise NonCancellableSingularity(f"{-order} uncancelled zero(s) in the denominator")
    return value


def hyp3f2_regularized(
    n: int,
    a2: int,
    a3: int,
    b1: int,
    b2: int,
    prefactor_binom: Tuple[int, int] = (0, 0),
) -> Fraction:
    """binom(a, jp) * 3F2(-n, a2, a3; b1, b2; 1), evaluated exactly.

    The lower parameter ``b2`` is treated as ``b2 + eps``.  When the binomial
    prefactor's upper index satisfies ``a == -b2`` (as in binom(n-4, n) paired
    with lower parameter 4-n) it moves with it as ``a - eps``, so the vanishing
    factors of (b2)_j cancel against those of the falling factorial.  The
    result is the eps -> 0 limit taken term by term.
    """
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n!r}")
    a, jp = prefactor_binom
    if jp < 0:
        raise DomainError("prefactor lower index must be >= 0")
    slope_a = -1 if a == -b2 else 0
    pre_num = [(Fraction(a - i), slope_a) for i in range(jp)]
    pre_den = [(Fraction(math.factorial(jp)), 0)]

    total = Fraction(0)
    for j in range(int(n) + 1):
        num = list(pre_num)
        den = list(pre_den)
        for i in range(j):
            num.append((Fraction(-n + i), 0))
            num.append((Fraction(a2 + i), 0))
            num.append((Fraction(a3 + i), 0))
            den.append((Fraction(b1 + i), 0))
            den.append((Fraction(b2 + i), 1))
        den.append((Fraction(math.factorial(j)), 0))
        try:
            total += _limit_product(num, den)
        except NonCancellableSingularity as exc:
            raise NonCancellableSingularity(
                f"3F2(-{n}, {a2}, {a3}; {b1}, {b2}; 1) with binom({a}, {jp}): term j={j}: {exc}",
                term=j,
            ) from None
    return total
