"""Fermat/Lawrence factorisation, semiprime ratio corpora and an ML-guided ratio search."""
from .kernels import BACKEND
from .fermat import DomainError, FermatResult, factor_fermat, factor_lawrence
from .numtheory import (
    bounded_denominator_approx,
    gcd,
    is_probable_prime,
    is_square,
    isqrt,
    next_prime,
    rational_from_real,
)
from .search import SearchConfig, SearchOutcome, estimate_success_probability, factor_ml_binary_search

__version__ = "0.1.0"
