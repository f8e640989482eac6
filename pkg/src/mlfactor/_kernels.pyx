# cython: boundscheck=False, wraparound=False
"""GMP-backed hot loops. Semantics match :mod:`mlfactor._pykernels` exactly."""

cdef extern from "gmp.h":
    ctypedef struct __mpz_struct:
        pass
    ctypedef __mpz_struct mpz_t[1]
    ctypedef __mpz_struct *mpz_ptr

    void mpz_init(mpz_t)
    void mpz_clear(mpz_t)
    int mpz_set_str(mpz_t, const char *, int)
    char *mpz_get_str(char *, int, const mpz_t)
    size_t mpz_sizeinbase(const mpz_t, int)
    void mpz_sqrt(mpz_t, const mpz_t)
    void mpz_mul(mpz_t, const mpz_t, const mpz_t)
    void mpz_sub(mpz_t, const mpz_t, const mpz_t)
    void mpz_add(mpz_t, const mpz_t, const mpz_t)
    void mpz_add_ui(mpz_t, const mpz_t, unsigned long)
    void mpz_sub_ui(mpz_t, const mpz_t, unsigned long)
    void mpz_mul_2exp(mpz_t, const mpz_t, unsigned long)
    void mpz_set_ui(mpz_t, unsigned long)
    void mpz_set(mpz_t, const mpz_t)
    void mpz_powm(mpz_t, const mpz_t, const mpz_t, const mpz_t)
    void mpz_mod(mpz_t, const mpz_t, const mpz_t)
    void mpz_tdiv_q_2exp(mpz_t, const mpz_t, unsigned long)
    unsigned long mpz_scan1(const mpz_t, unsigned long)
    int mpz_perfect_square_p(const mpz_t)
    int mpz_cmp(const mpz_t, const mpz_t)
    int mpz_cmp_ui(const mpz_t, unsigned long)
    int mpz_sgn(const mpz_t)

from libc.stdlib cimport free

BACKEND = "gmp"


cdef int _load(mpz_t z, object value) except -1:
    cdef bytes s = format(value, "x").encode("ascii")
    if mpz_set_str(z, s, 16) != 0:
        raise ValueError("cannot convert integer")
    return 0


cdef object _dump(const mpz_t z):
    cdef char *s = mpz_get_str(NULL, 16, z)
    try:
        return int(s.decode("ascii"), 16)
    finally:
        free(s)


def fermat_search(n, long long max_iter):
    """Run the difference-of-squares loop on odd ``n``.

    Returns ``(succeeded, iterations, a, root)`` where on success
    ``a*a - n == root*root``.
    """
    cdef mpz_t zn, a, b, step, root
    cdef long long it = 0
    cdef bint found = False
    mpz_init(zn); mpz_init(a); mpz_init(b); mpz_init(step); mpz_init(root)
    try:
        _load(zn, n)
        mpz_sqrt(a, zn)
        mpz_mul(b, a, a)
        mpz_sub(b, b, zn)
        # step = 2a + 1
        mpz_mul_2exp(step, a, 1)
        mpz_add_ui(step, step, 1)
        while True:
            if mpz_sgn(b) >= 0 and mpz_perfect_square_p(b):
                found = True
                break
            mpz_add(b, b, step)
            mpz_add_ui(step, step, 2)
            mpz_add_ui(a, a, 1)
            it += 1
            if it > max_iter:
                break
        if not found:
            return False, it, None, None
        mpz_sqrt(root, b)
        return True, it, _dump(a), _dump(root)
    finally:
        mpz_clear(zn); mpz_clear(a); mpz_clear(b); mpz_clear(step); mpz_clear(root)


def strong_probable_prime(n, bases):
    """Miller-Rabin strong probable-prime test of odd ``n > 3`` for each base."""
    cdef mpz_t zn, nm1, d, x, ba
    cdef unsigned long s, r
    cdef bint composite = False
    mpz_init(zn); mpz_init(nm1); mpz_init(d); mpz_init(x); mpz_init(ba)
    try:
        _load(zn, n)
        mpz_sub_ui(nm1, zn, 1)
        s = mpz_scan1(nm1, 0)
        mpz_tdiv_q_2exp(d, nm1, s)
        for base in bases:
            _load(ba, base)
            mpz_mod(ba, ba, zn)
            if mpz_cmp_ui(ba, 1) <= 0 or mpz_cmp(ba, nm1) == 0:
                continue
            mpz_powm(x, ba, d, zn)
            if mpz_cmp_ui(x, 1) == 0 or mpz_cmp(x, nm1) == 0:
                continue
            composite = True
            for r in range(1, s):
                mpz_mul(x, x, x)
                mpz_mod(x, x, zn)
                if mpz_cmp(x, nm1) == 0:
                    composite = False
                    break
            if composite:
                return False
        return True
    finally:
        mpz_clear(zn); mpz_clear(nm1); mpz_clear(d); mpz_clear(x); mpz_clear(ba)
