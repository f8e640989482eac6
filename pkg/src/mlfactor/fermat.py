"""Fermat's difference-of-squares factorisation and Lawrence's extension."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import kernels
from .numtheory import gcd

FERMAT_MAX_ITER = 65536
LAWRENCE_MAX_ITER = 100000


class DomainError(ValueError):
    """Input outside the domain of the algorithm (even, too small, bad interval)."""


@dataclass(frozen=True)
class FermatResult:
    """Outcome of one Fermat or Lawrence run.

    ``iterations`` counts increments of ``a``; the probe at ``a = isqrt(n)`` is
    iteration 0. On failure ``factor`` is 1 and ``iterations`` is
    ``max_iter + 1``. ``a`` and ``b`` are the final square roots with
    ``a*a - b*b == scaled_n`` (``scaled_n`` is ``u*v*n`` for Lawrence runs).
    """

    factor: int
    iterations: int
    succeeded: bool
    a: int | None = None
    b: int | None = None
    scaled_n: int | None = None
    ratio: Fraction | None = None


def _check_odd(n: int) -> None:
    if n < 3:
        raise DomainError(f"domain: n must be >= 3, got {n}")
    if n % 2 == 0:
        raise DomainError(f"even input: {n}")


def factor_fermat(n: int, max_iter: int = FERMAT_MAX_ITER) -> FermatResult:
    """Search for ``n = a**2 - b**2`` starting from ``a = isqrt(n)``.

    Returns the ``a - b`` factor. A perfect square ``n`` succeeds at iteration 0
    with its square root.
    """
    _check_odd(n)
    ok, it, a, b = kernels.fermat_search(n, max_iter)
    if not ok:
        return FermatResult(1, it, False, scaled_n=n)
    return FermatResult(a - b, it, True, a, b, scaled_n=n)


def odd_ratio(r: Fraction) -> Fraction:
    """Closest convergent or semiconvergent of ``r`` with odd numerator and denominator.

    Fermat's loop needs ``u*v*n`` odd. Candidates all have denominator <= that
    of ``r``; ties go to the smaller denominator. Falls back to 1/1.
    """
    r = Fraction(r)
    if r.numerator % 2 and r.denominator % 2:
        return r
    # Continued-fraction terms.
    terms = []
    num, den = r.numerator, r.denominator
    while den:
        q, rem = divmod(num, den)
        terms.append(q)
        num, den = den, rem
    best = None
    h2, k2, h1, k1 = 0, 1, 1, 0
    for a in terms:
        # Parity of (j*h1 + h2, j*k1 + k2) depends only on j mod 2; the largest
        # admissible j of each parity is the closest semiconvergent on this level.
        for j in (a, a - 1):
            if j < 1:
                continue
            h, k = j * h1 + h2, j * k1 + k2
            if k == 0 or not (h % 2 and k % 2):
                continue
            c = Fraction(h, k)
            key = (abs(c - r), k, h)
            if best is None or key < best[0]:
                best = (key, c)
        h2, k2, h1, k1 = h1, k1, a * h1 + h2, a * k1 + k2
    return best[1] if best is not None else Fraction(1)


def factor_lawrence(n: int, ratio: Fraction, max_iter: int = LAWRENCE_MAX_ITER) -> FermatResult:
    """Factor ``n`` by running Fermat on ``u*v*n`` for ``ratio = u/v`` and taking a gcd.

    Succeeds iff the gcd is a proper divisor of ``n``. If ``u*v`` is even the
    ratio is replaced by :func:`odd_ratio` first; the ratio actually used is
    recorded on the result.
    """
    _check_odd(n)
    ratio = Fraction(ratio)
    if ratio <= 0:
        raise DomainError(f"domain: ratio must be positive, got {ratio}")
    if (ratio.numerator * ratio.denominator) % 2 == 0:
        ratio = odd_ratio(ratio)
    m = ratio.numerator * ratio.denominator * n
    ok, it, a, b = kernels.fermat_search(m, max_iter)
    if not ok:
        return FermatResult(1, it, False, scaled_n=m, ratio=ratio)
    g = gcd(a - b, n)
    if 1 < g < n:
        return FermatResult(g, it, True, a, b, scaled_n=m, ratio=ratio)
    return FermatResult(1, it, False, a, b, scaled_n=m, ratio=ratio)
