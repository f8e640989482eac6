"""Ratio-constrained random semiprimes and balanced labelled corpora."""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .fermat import DomainError
from .numtheory import format_rational, next_prime, parse_rational
from .prng import Prng

FORMAT_VERSION = 1
CSV_HEADER = ("n", "label", "p", "q")


@dataclass(frozen=True)
class RatioInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo < 1:
            raise DomainError(f"degenerate interval: lo={self.lo} < 1")
        if self.lo >= self.hi:
            raise DomainError(f"degenerate interval: lo={self.lo} >= hi={self.hi}")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains_open(self, p: int, q: int) -> bool:
        """Exact test of ``lo < p/q < hi``."""
        return self.lo < Fraction(p, q) < self.hi

    def to_json(self) -> list[str]:
        return [format_rational(self.lo), format_rational(self.hi)]

    @classmethod
    def from_json(cls, pair) -> "RatioInterval":
        return cls(parse_rational(pair[0]), parse_rational(pair[1]))


@dataclass(frozen=True)
class SemiprimeSample:
    n: int
    label: int
    p: int | None = None
    q: int | None = None


@dataclass(frozen=True)
class Dataset:
    samples: tuple[SemiprimeSample, ...]
    n_bits: int
    interval: RatioInterval
    delta_scale: Fraction
    seed: int
    workers: int = 1
    meta: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.samples)

    @property
    def has_ground_truth(self) -> bool:
        return all(s.p is not None for s in self.samples)

    def class_counts(self) -> tuple[int, int]:
        pos = sum(s.label for s in self.samples)
        return len(self.samples) - pos, pos

    # -- serialisation -------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for s in self.samples:
            w.writerow([s.n, s.label, "" if s.p is None else s.p, "" if s.q is None else s.q])
        return buf.getvalue()

    def metadata(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "n_bits": self.n_bits,
            "interval": self.interval.to_json(),
            "delta_scale": format_rational(self.delta_scale),
            "seed": self.seed,
            "workers": self.workers,
            "count": len(self.samples),
            "ground_truth": self.has_ground_truth,
        }

    def save(self, path: str | Path) -> Path:
        """Write ``path`` (CSV) and ``path.meta.json``; returns the sidecar path."""
        path = Path(path)
        path.write_bytes(self.to_csv().encode("utf-8"))
        side = metadata_path(path)
        side.write_text(json.dumps(self.metadata(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return side


def metadata_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


class CorpusFormatError(ValueError):
    pass


def load_dataset(path: str | Path) -> Dataset:
    """Read a CSV corpus and its sidecar (if present)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusFormatError(str(exc)) from exc
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise CorpusFormatError(f"{path}: expected header {','.join(CSV_HEADER)}")
    samples = []
    try:
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != 4:
                raise CorpusFormatError(f"{path}:{lineno}: expected 4 fields")
            n, label, p, q = row
            lab = int(label)
            if lab not in (0, 1):
                raise CorpusFormatError(f"{path}:{lineno}: label must be 0 or 1")
            samples.append(SemiprimeSample(int(n), lab, int(p) if p else None, int(q) if q else None))
    except ValueError as exc:
        if isinstance(exc, CorpusFormatError):
            raise
        raise CorpusFormatError(f"{path}: {exc}") from exc
    side = metadata_path(path)
    meta = {}
    if side.exists():
        meta = json.loads(side.read_text(encoding="utf-8"))
        if meta.get("format_version") != FORMAT_VERSION:
            raise CorpusFormatError(f"{side}: unsupported format_version {meta.get('format_version')}")
    n_bits = meta.get("n_bits") or max((s.n.bit_length() for s in samples), default=0)
    interval = RatioInterval.from_json(meta["interval"]) if "interval" in meta else RatioInterval(1, 2)
    return Dataset(
        samples=tuple(samples),
        n_bits=n_bits,
        interval=interval,
        delta_scale=parse_rational(meta.get("delta_scale", "1/2")),
        seed=meta.get("seed", 0),
        workers=meta.get("workers", 1),
        meta=meta,
    )


# -- generation ---------------------------------------------------------


def ratio_bit_length(r: Fraction) -> int:
    """k with 2**(k-1) <= r < 2**k, for r >= 1."""
    return (r.numerator // r.denominator).bit_length()


def random_prime_pair(n_bits: int, interval: RatioInterval, rng: Prng) -> tuple[int, int, int]:
    """Random ``(N, p, q)`` with ``N = p*q`` of exactly ``n_bits`` bits and ``p >= q``.

    The target ratio ``r`` is drawn in ``[lo, hi]`` as ``lo + (hi-lo)*rn/rd`` from
    two 64-bit words, ``q`` is drawn near ``2**(n_bits/2)/sqrt(r)``,
    ``p = floor(r*q)``, and both are rounded up to the next prime. The whole draw
    repeats until the product has the requested bit length.
    """
    if n_bits < 16:
        raise DomainError("n_bits must be >= 16")
    lo, hi = interval.lo, interval.hi
    half = n_bits // 2
    while True:
        rn = rng.uniform_int(0, 2**64 - 1)
        rd = rng.uniform_int(1, 2**64 - 1)
        if rn > rd:
            rn, rd = rd, rn
        r = lo + (hi - lo) * Fraction(rn, rd)
        k = ratio_bit_length(r)
        q0 = rng.uniform_int(2 ** (half - k // 2 - 1), 2 ** (half - k // 2))
        p0 = r.numerator * q0 // r.denominator
        p = next_prime(p0)
        q = next_prime(q0)
        n = p * q
        if n.bit_length() == n_bits:
            break
    if p < q:
        p, q = q, p
    return n, p, q


def extended_interval(min_ratio: Fraction, max_ratio: Fraction, ratio_diff_scale: Fraction) -> tuple[RatioInterval, Fraction]:
    diff = (max_ratio - min_ratio) * ratio_diff_scale
    ext = RatioInterval(max(Fraction(1), min_ratio - diff), max(Fraction(1), max_ratio + diff))
    return ext, diff


def _fill_quota(n_bits, min_ratio, max_ratio, ratio_diff_scale, n_pos, n_neg, seed, exclude=frozenset()):
    """Draw samples until ``n_pos`` positives and ``n_neg`` negatives are collected, in draw order."""
    min_ratio, max_ratio = Fraction(min_ratio), Fraction(max_ratio)
    ext, diff = extended_interval(min_ratio, max_ratio, Fraction(ratio_diff_scale))
    core = (min_ratio, max_ratio)
    band = (min_ratio - diff, max_ratio + diff)
    rng = Prng(seed)
    seen = set(exclude)
    out = []
    pos = neg = 0
    while pos < n_pos or neg < n_neg:
        n, p, q = random_prime_pair(n_bits, ext, rng)
        if n in seen:
            continue
        ratio = Fraction(p, q)
        if core[0] < ratio < core[1]:
            if pos < n_pos:
                pos += 1
                seen.add(n)
                out.append(SemiprimeSample(n, 1, p, q))
        elif band[0] < ratio < band[1]:
            if neg < n_neg:
                neg += 1
                seen.add(n)
                out.append(SemiprimeSample(n, 0, p, q))
    return out


def _split(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def generate_training_semiprimes(
    n_bits: int,
    min_ratio,
    max_ratio,
    ratio_diff_scale=Fraction(1, 2),
    n_samples: int = 1000,
    seed: int = 0,
    workers: int = 1,
    with_ground_truth: bool = True,
    threads: int | None = None,
) -> Dataset:
    """Balanced corpus of ``n_bits``-bit semiprimes labelled by ``min < p/q < max``.

    Negatives come from the band of half-width ``(max-min)*ratio_diff_scale``
    around the core interval. Positives get ``ceil(n/2)`` slots, negatives
    ``floor(n/2)``. Worker ``i`` draws from ``Prng(seed + i)``; its share is fixed
    by ``workers`` alone, so the output does not depend on ``threads`` (how many
    processes actually run). Cross-worker duplicates are dropped and refilled
    from ``Prng(seed + workers + 1)``; ``Prng(seed + workers)`` shuffles.
    """
    min_ratio, max_ratio = Fraction(min_ratio), Fraction(max_ratio)
    ratio_diff_scale = Fraction(ratio_diff_scale)
    core = RatioInterval(min_ratio, max_ratio)
    extended_interval(min_ratio, max_ratio, ratio_diff_scale)
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    workers = max(1, workers)
    n_pos, n_neg = (n_samples + 1) // 2, n_samples // 2
    pos_parts, neg_parts = _split(n_pos, workers), _split(n_neg, workers)
    args = [
        (n_bits, min_ratio, max_ratio, ratio_diff_scale, pos_parts[i], neg_parts[i], seed + i)
        for i in range(workers)
    ]
    threads = workers if threads is None else max(1, threads)
    if threads > 1 and workers > 1:
        with ProcessPoolExecutor(max_workers=min(threads, workers)) as pool:
            chunks = list(pool.map(_fill_quota, *zip(*args)))
    else:
        chunks = [_fill_quota(*a) for a in args]

    seen = set()
    merged = []
    for chunk in chunks:
        for s in chunk:
            if s.n not in seen:
                seen.add(s.n)
                merged.append(s)
    missing_pos = n_pos - sum(s.label for s in merged)
    missing_neg = n_neg - (len(merged) - sum(s.label for s in merged))
    if missing_pos or missing_neg:
        merged += _fill_quota(n_bits, min_ratio, max_ratio, ratio_diff_scale,
                              missing_pos, missing_neg, seed + workers + 1, exclude=seen)
    Prng(seed + workers).shuffle(merged)
    if not with_ground_truth:
        merged = [SemiprimeSample(s.n, s.label) for s in merged]
    return Dataset(tuple(merged), n_bits, core, ratio_diff_scale, seed, workers)
