"""Pure-Python versions of the hot loops in ``_kernels.pyx``."""
from math import isqrt

BACKEND = "python"

# Quadratic-residue filters; a square must pass all four.
_QR_MOD = 64 * 63 * 65 * 11
_QR64 = frozenset(i * i % 64 for i in range(64))
_QR63 = frozenset(i * i % 63 for i in range(63))
_QR65 = frozenset(i * i % 65 for i in range(65))
_QR11 = frozenset(i * i % 11 for i in range(11))


def maybe_square(n):
    """Cheap necessary condition for ``n >= 0`` to be a perfect square."""
    r = n % _QR_MOD
    return (r & 63) in _QR64 and r % 63 in _QR63 and r % 65 in _QR65 and r % 11 in _QR11


def fermat_search(n, max_iter):
    """Run the difference-of-squares loop on odd ``n``.

    Returns ``(succeeded, iterations, a, root)`` where on success
    ``a*a - n == root*root``.
    """
    a = isqrt(n)
    b = a * a - n
    step = 2 * a + 1
    it = 0
    while True:
        if b >= 0 and maybe_square(b):
            root = isqrt(b)
            if root * root == b:
                return True, it, a, root
        b += step
        step += 2
        a += 1
        it += 1
        if it > max_iter:
            return False, it, None, None


def strong_probable_prime(n, bases):
    """Miller-Rabin strong probable-prime test of odd ``n > 3`` for each base."""
    nm1 = n - 1
    s = (nm1 & -nm1).bit_length() - 1
    d = nm1 >> s
    for base in bases:
        a = base % n
        if a <= 1 or a == nm1:
            continue
        x = pow(a, d, n)
        if x == 1 or x == nm1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == nm1:
                break
        else:
            return False
    return True
