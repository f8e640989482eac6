"""Classifier-guided binary search over the prime ratio p/q.

Each level bisects the current ratio interval, tries Lawrence's method at the
midpoint, then asks one classifier per half whether ``p/q`` lies in it and
descends into the half they agree on.
"""
from __future__ import annotations

import enum
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Protocol

from .encode import build_feature_matrix, encode_one
from .fermat import DomainError, FermatResult, factor_lawrence
from .neuralnet import TrainConfig, classify, train
from .numtheory import bounded_denominator_approx, format_rational, is_probable_prime
from .semigen import RatioInterval, generate_training_semiprimes

log = logging.getLogger(__name__)

TRACE_VERSION = 1

# Published RSA-260 challenge number (260 decimal digits, 862 bits).
RSA_260 = int(
    "22112825529529666435281085255026230927612089502470015394413748319128822941402001986512729726569746"
    "59908590033003140005117074220456085927635795375718595429883895870922923849100670303412462054578456"
    "641366454068421436129301769402084639106587591479425143514445819"
    "9"
)


class Status(str, enum.Enum):
    FACTORED = "Factored"
    STOPPED_LOW_CONFIDENCE = "StoppedLowConfidence"
    STOPPED_CONFLICT = "StoppedConflict"
    DEPTH_EXHAUSTED = "DepthExhausted"


class Decision(str, enum.Enum):
    DESCEND_LOWER = "descend_lower"
    DESCEND_UPPER = "descend_upper"
    STOP_CONFLICT = "stop_conflict"
    STOP_CONFIDENCE = "stop_confidence"
    FACTORED = "factored"


@dataclass(frozen=True)
class Verdict:
    """One classifier's answer for one half-interval."""

    accuracy: float
    label: bool
    prob: float | None = None


class ClassifierProvider(Protocol):
    def __call__(self, n: int, interval: RatioInterval, depth: int, side: str) -> Verdict: ...


@dataclass
class SearchConfig:
    initial_interval: RatioInterval
    n_train: int = 10_000
    p_min: float = 0.5
    max_iter_lawrence: int = 100_000
    max_depth: int | None = None  # None: bit length of n
    max_den_lawrence: int = 2**64
    train_cfg: TrainConfig = field(default_factory=TrainConfig)
    seed: int = 0
    base: Fraction = Fraction(2)
    threads: int = 1

    def __post_init__(self):
        if not 0.5 <= self.p_min < 1:
            raise ValueError("p_min must be in [0.5, 1)")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


@dataclass(frozen=True)
class StepTrace:
    depth: int
    interval: RatioInterval
    midpoint: Fraction
    lawrence_result: FermatResult
    p_lower: float | None = None
    p_upper: float | None = None
    c_lower: bool | None = None
    c_upper: bool | None = None
    decision: Decision | None = None

    def to_json(self) -> dict:
        lr = self.lawrence_result
        return {
            "depth": self.depth,
            "interval": self.interval.to_json(),
            "midpoint": format_rational(self.midpoint),
            "lawrence": {
                "ratio": None if lr.ratio is None else format_rational(lr.ratio),
                "succeeded": lr.succeeded,
                "factor": str(lr.factor),
                "iterations": lr.iterations,
            },
            "p_lower": self.p_lower,
            "p_upper": self.p_upper,
            "c_lower": self.c_lower,
            "c_upper": self.c_upper,
            "decision": self.decision.value,
        }


@dataclass(frozen=True)
class SearchOutcome:
    status: Status
    factor: int | None
    trace: tuple[StepTrace, ...]

    def to_json(self) -> dict:
        return {
            "version": TRACE_VERSION,
            "status": self.status.value,
            "factor": None if self.factor is None else str(self.factor),
            "trace": [s.to_json() for s in self.trace],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def midpoint(iv: RatioInterval) -> Fraction:
    return (iv.lo + iv.hi) / 2


def probe_lawrence(n: int, c: Fraction, cfg: SearchConfig) -> FermatResult:
    """Lawrence's method at ``c`` after limiting its denominator."""
    reduced = bounded_denominator_approx(Fraction(c), cfg.max_den_lawrence)
    return factor_lawrence(n, reduced, cfg.max_iter_lawrence)


def decide(c_lower: bool, c_upper: bool, p_lower: float, p_upper: float, p_min: float) -> Decision:
    """Map classifier outputs at one level to the next move."""
    if min(p_lower, p_upper) < p_min:
        return Decision.STOP_CONFIDENCE
    if not c_lower and not c_upper:
        return Decision.STOP_CONFLICT
    if c_lower != c_upper:
        return Decision.DESCEND_LOWER if c_lower else Decision.DESCEND_UPPER
    return Decision.DESCEND_UPPER if p_upper > p_lower else Decision.DESCEND_LOWER


def corpus_seed(seed: int, depth: int, side: str) -> int:
    return (seed * 1_000_003 + depth * 2 + (1 if side == "upper" else 0)) & 0xFFFFFFFFFFFFFFFF


class TrainedClassifierProvider:
    """Builds a fresh corpus and network for every (depth, side) request."""

    def __init__(self, cfg: SearchConfig, n_bits: int, workers: int = 1):
        self.cfg = cfg
        self.n_bits = n_bits
        self.workers = workers
        self.reports = {}

    def __call__(self, n: int, interval: RatioInterval, depth: int, side: str) -> Verdict:
        seed = corpus_seed(self.cfg.seed, depth, side)
        ds = generate_training_semiprimes(self.n_bits, interval.lo, interval.hi, Fraction(1, 2),
                                          self.cfg.n_train, seed=seed, workers=self.workers,
                                          with_ground_truth=False)
        fm = build_feature_matrix(ds, self.cfg.base)
        tcfg = TrainConfig(**{**self.cfg.train_cfg.__dict__, "seed": seed})
        model, report = train(fm, tcfg)
        self.reports[(depth, side)] = report
        label, prob = classify(model, encode_one(n, self.cfg.base, fm.width))
        log.info("depth %d %s %s: accuracy %.4f, label %d", depth, side, interval.to_json(),
                 report.out_of_sample_accuracy, label)
        return Verdict(report.out_of_sample_accuracy, bool(label), prob)


def factor_ml_binary_search(n: int, cfg: SearchConfig, classifier: ClassifierProvider | None = None) -> SearchOutcome:
    """Bisect the ratio interval, probing with Lawrence's method at each midpoint.

    ``classifier`` defaults to :class:`TrainedClassifierProvider`; any callable
    with the same signature can stand in (e.g. a ground-truth oracle in tests).
    """
    if n < 3 or n % 2 == 0:
        raise DomainError(f"even input: {n}" if n % 2 == 0 else f"domain: n must be >= 3, got {n}")
    if is_probable_prime(n):
        raise DomainError(f"domain: {n} is prime")
    if classifier is None:
        classifier = TrainedClassifierProvider(cfg, n.bit_length())
    max_depth = cfg.max_depth if cfg.max_depth is not None else n.bit_length()
    iv = cfg.initial_interval
    trace: list[StepTrace] = []
    for depth in range(max_depth):
        c = midpoint(iv)
        res = probe_lawrence(n, c, cfg)
        if res.succeeded:
            trace.append(StepTrace(depth, iv, c, res, decision=Decision.FACTORED))
            return SearchOutcome(Status.FACTORED, res.factor, tuple(trace))
        lower, upper = RatioInterval(iv.lo, c), RatioInterval(c, iv.hi)
        if cfg.threads > 1:
            with ThreadPoolExecutor(max_workers=2) as pool:
                fl = pool.submit(classifier, n, lower, depth, "lower")
                fu = pool.submit(classifier, n, upper, depth, "upper")
                vl, vu = fl.result(), fu.result()
        else:
            vl = classifier(n, lower, depth, "lower")
            vu = classifier(n, upper, depth, "upper")
        d = decide(vl.label, vu.label, vl.accuracy, vu.accuracy, cfg.p_min)
        trace.append(StepTrace(depth, iv, c, res, vl.accuracy, vu.accuracy, vl.label, vu.label, d))
        if d is Decision.STOP_CONFIDENCE:
            return SearchOutcome(Status.STOPPED_LOW_CONFIDENCE, None, tuple(trace))
        if d is Decision.STOP_CONFLICT:
            return SearchOutcome(Status.STOPPED_CONFLICT, None, tuple(trace))
        iv = lower if d is Decision.DESCEND_LOWER else upper
    return SearchOutcome(Status.DEPTH_EXHAUSTED, None, tuple(trace))


def estimate_success_probability(p_bar: float, n_bits: int) -> float:
    """``p_bar ** (n_bits / 2)``: every one of ~n_bits/2 classifications must be right."""
    if not 0 < p_bar <= 1:
        raise ValueError("p_bar must be in (0, 1]")
    return p_bar ** (n_bits / 2)
