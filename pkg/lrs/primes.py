"""Deterministic Miller-Rabin primality test.

The witness set below is exact for every integer under 3.3 * 10**24, which
covers the whole supported modulus range (p < 2**64).
"""

_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

MAX_MODULUS = 1 << 64


def is_prime(candidate: int) -> bool:
    if candidate < 2:
        return False
    for small in _WITNESSES:
        if candidate % small == 0:
            return candidate == small

    d = candidate - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1

    for a in _WITNESSES:
        x = pow(a, d, candidate)
        if x == 1 or x == candidate - 1:
            continue
        for _ in range(r - 1):
            x = x * x % candidate
            if x == candidate - 1:
                break
        else:
            return False
    return True
