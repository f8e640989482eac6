"""Exact integer and rational primitives.

Big integers are plain Python ``int``; rationals are :class:`fractions.Fraction`,
which is always stored in lowest terms with a positive denominator.
"""
from __future__ import annotations

import math
from fractions import Fraction

from . import kernels
from ._pykernels import maybe_square
from .prng import Prng

__all__ = [
    "isqrt",
    "is_square",
    "gcd",
    "is_probable_prime",
    "next_prime",
    "rational_from_real",
    "bounded_denominator_approx",
    "parse_rational",
    "format_rational",
]

DEFAULT_MR_ROUNDS = 40

_SMALL_PRIMES = tuple(p for p in range(2, 1000) if all(p % d for d in range(2, math.isqrt(p) + 1)))
# Deterministic for n < 2**64 (Sorenson & Webster).
_WITNESSES_64 = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def isqrt(n: int) -> int:
    """Floor square root: r with r*r <= n < (r+1)**2."""
    return math.isqrt(n)


def is_square(n: int) -> bool:
    """True iff ``n`` is a non-negative perfect square. Negative input is allowed."""
    if n < 0:
        return False
    if not maybe_square(n):
        return False
    r = math.isqrt(n)
    return r * r == n


def gcd(a: int, b: int) -> int:
    return math.gcd(a, b)


def _random_witnesses(n: int, rounds: int) -> list[int]:
    # Witnesses are a function of n so primality answers are reproducible.
    rng = Prng((n ^ (n >> 64) ^ n.bit_length()) & 0xFFFFFFFFFFFFFFFF)
    return [rng.uniform_int(2, n - 2) for _ in range(rounds)]


def is_probable_prime(n: int, rounds: int = DEFAULT_MR_ROUNDS) -> bool:
    """Miller-Rabin test.

    Below 2**64 the answer is exact (trial division plus a deterministic witness
    set). Above, ``rounds`` pseudo-random witnesses give an error bound of
    ``4**-rounds``.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    if n < _SMALL_PRIMES[-1] ** 2:
        return True
    if n < 1 << 64:
        return kernels.strong_probable_prime(n, _WITNESSES_64)
    if not kernels.strong_probable_prime(n, (2,)):
        return False
    return kernels.strong_probable_prime(n, _random_witnesses(n, rounds))


# Residues mod 2*3*5*7 that are coprime to 210; used to skip obvious composites.
_WHEEL = 210
_WHEEL_OK = frozenset(r for r in range(_WHEEL) if math.gcd(r, _WHEEL) == 1)


def next_prime(n: int, rounds: int = DEFAULT_MR_ROUNDS) -> int:
    """Smallest probable prime strictly greater than ``n``."""
    if n < 2:
        return 2
    if n < 7:
        return {2: 3, 3: 5, 4: 5, 5: 7, 6: 7}[n]
    c = n + 1 if n % 2 == 0 else n + 2
    r = c % _WHEEL
    while True:
        if r in _WHEEL_OK and is_probable_prime(c, rounds):
            return c
        c += 2
        r = (r + 2) % _WHEEL


def _simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """Smallest-denominator rational in the closed interval [lo, hi], 0 <= lo <= hi."""
    fl = lo.numerator // lo.denominator
    if Fraction(fl) == lo:
        return Fraction(fl)
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    # Both endpoints share the integer part; recurse on reciprocals of the tails.
    rest = _simplest_between(1 / (hi - fl), 1 / (lo - fl))
    return fl + 1 / rest


def rational_from_real(x: float) -> Fraction:
    """Simplest rational that rounds to the double ``x``.

    Searches the interval of reals whose nearest double is ``x`` (half an ulp
    each side) for the rational with the smallest denominator, so ``0.1``
    maps to ``1/10`` rather than its exact binary expansion.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite input: {x!r}")
    if x < 0:
        return -rational_from_real(-x)
    exact = Fraction(x)
    if x == 0.0:
        return exact
    lo = (exact + Fraction(math.nextafter(x, 0.0))) / 2
    hi = (exact + Fraction(math.nextafter(x, math.inf))) / 2
    return _simplest_between(lo, hi)


def bounded_denominator_approx(r: Fraction, max_den: int) -> Fraction:
    """Closest rational to ``r`` with denominator <= ``max_den``."""
    if max_den < 1:
        raise ValueError("max_den must be >= 1")
    return Fraction(r).limit_denominator(max_den)


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``"num/den"``, an integer, or a decimal string into an exact rational."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(text)


def format_rational(r: Fraction) -> str:
    return f"{r.numerator}/{r.denominator}"
