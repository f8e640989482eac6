"""Rational-base digit expansions and fixed-width feature matrices."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .numtheory import parse_rational


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class DigitVector:
    digits: tuple[int, ...]
    base: Fraction


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray  # float32, rows x width
    labels: np.ndarray  # int8, length rows
    base: Fraction

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def _as_base(base) -> Fraction:
    b = base if isinstance(base, Fraction) else parse_rational(base) if isinstance(base, str) else Fraction(base)
    if b <= 1:
        raise EncodingError(f"base must be > 1, got {b}")
    return b


def rat_base(n: int, base) -> DigitVector:
    """Digits of ``n`` in base ``num/den``, most significant first.

    Each step emits ``m mod num`` and continues with ``(m // num) * den``;
    for an integer base this is ordinary positional notation.
    """
    b = _as_base(base)
    if n < 0:
        raise EncodingError(f"n must be non-negative, got {n}")
    if n == 0:
        return DigitVector((0,), b)
    num, den = b.numerator, b.denominator
    if den == 1 and num == 2:
        return DigitVector(tuple(map(int, bin(n)[2:])), b)
    m = n
    out = []
    while m > 0:
        m, d = divmod(m, num)
        m *= den
        out.append(d)
    out.reverse()
    return DigitVector(tuple(out), b)


def reconstruct(dv: DigitVector) -> int:
    """Inverse of :func:`rat_base`."""
    num, den = dv.base.numerator, dv.base.denominator
    m = 0
    for d in dv.digits:
        if not 0 <= d < num:
            raise EncodingError(f"malformed digit vector: digit {d} out of range for base {dv.base}")
        q, r = divmod(m, den)
        if r:
            raise EncodingError("malformed digit vector: accumulator not divisible by denominator")
        m = q * num + d
    return m


def pad_left(digits, width: int) -> list:
    digits = list(digits)
    if len(digits) > width:
        raise EncodingError(f"{len(digits)} digits do not fit width {width}")
    return [0] * (width - len(digits)) + digits


def build_feature_matrix(ds, base=2, normalize: bool = False) -> FeatureMatrix:
    """One left-zero-padded digit row per sample; width set by the largest ``n``.

    ``ds`` is a :class:`~mlfactor.semigen.Dataset` or a sequence of
    ``(n, label)`` pairs. With ``normalize`` digits are divided by ``num - 1``.
    """
    samples = getattr(ds, "samples", ds)
    pairs = [(s.n, s.label) if hasattr(s, "n") else (int(s[0]), int(s[1])) for s in samples]
    if not pairs:
        raise EncodingError("empty dataset")
    b = _as_base(base)
    width = len(rat_base(max(n for n, _ in pairs), b).digits)
    X = np.zeros((len(pairs), width), dtype=np.float32)
    for k, (n, _) in enumerate(pairs):
        digits = rat_base(n, b).digits
        X[k, width - len(digits):] = digits
    if normalize and b.numerator > 2:
        X /= np.float32(b.numerator - 1)
    y = np.fromiter((lab for _, lab in pairs), dtype=np.int8, count=len(pairs))
    return FeatureMatrix(X, y, b)


def encode_one(n: int, base, width: int, normalize: bool = False) -> np.ndarray:
    """Feature row for a single integer at a fixed width."""
    b = _as_base(base)
    row = np.asarray(pad_left(rat_base(n, b).digits, width), dtype=np.float32)
    if normalize and b.numerator > 2:
        row /= np.float32(b.numerator - 1)
    return row
