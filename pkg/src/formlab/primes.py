"""Shared integer machinery: sieves, factorization, exact roots.

Everything here is exact; floats appear only as Newton seeds and are
always followed by an integer correction loop.
"""

from __future__ import annotations

import math
from math import gcd, isqrt


def prime_flags(limit: int) -> bytearray:
    """flags[n] = 1 iff n is prime, for 0 <= n <= limit."""
    if limit < 1:
        return bytearray(limit + 1)
    flags = bytearray([1]) * (limit + 1)
    flags[0:2] = b"\x00\x00"
    for p in range(2, isqrt(limit) + 1):
        if flags[p]:
            start = p * p
            flags[start :: p] = b"\x00" * ((limit - start) // p + 1)
    return flags


def sieve_primes(limit: int) -> list[int]:
    """All primes p <= limit, ascending."""
    flags = prime_flags(limit)
    return [n for n in range(2, limit + 1) if flags[n]]


def prime_pi(x: int) -> int:
    """pi(x), counted by sieve (exact)."""
    if x < 2:
        return 0
    return sum(prime_flags(x)[2:])


def spf_table(limit: int) -> list[int]:
    """spf[n] = smallest prime factor of n (spf[0] = spf[1] = 0)."""
    spf = list(range(limit + 1))
    if limit >= 1:
        spf[1] = 0
    for p in range(2, isqrt(limit) + 1):
        if spf[p] == p:
            for m in range(p * p, limit + 1, p):
                if spf[m] == m:
                    spf[m] = p
    return spf


def mobius_table(limit: int) -> list[int]:
    """mu[n] for 0 <= n <= limit, via the smallest-prime-factor sieve."""
    spf = spf_table(limit)
    mu = [0] * (limit + 1)
    if limit >= 1:
        mu[1] = 1
    for n in range(2, limit + 1):
        p = spf[n]
        m = n // p
        mu[n] = 0 if m % p == 0 else -mu[m]
    return mu


def factorize(n: int, spf: list[int] | None = None) -> dict[int, int]:
    """Prime factorization {p: e} by trial division (or an spf table if given)."""
    if n < 1:
        raise ValueError("factorize expects n >= 1")
    out: dict[int, int] = {}
    if spf is not None and n < len(spf):
        while n > 1:
            p = spf[n]
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out[p] = e
        return out
    for p in (2, 3):
        while n % p == 0:
            n //= p
            out[p] = out.get(p, 0) + 1
    f = 5
    while f * f <= n:
        for p in (f, f + 2):
            while n % p == 0:
                n //= p
                out[p] = out.get(p, 0) + 1
        f += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def divisor_power_sums(e: int, limit: int) -> list[int]:
    """sigma_e(n) for 0 <= n <= limit (index 0 unused, set to 0).

    Multiplicative fill over the spf table: sigma_e(p^a) accumulates
    p^{ae} term by term, composites split off their p-power part.
    """
    sig = [0] * (limit + 1)
    if limit >= 1:
        sig[1] = 1
    if limit < 2:
        return sig
    spf = spf_table(limit)
    ppart = [0] * (limit + 1)  # p^a part of n, p = spf[n]
    for n in range(2, limit + 1):
        p = spf[n]
        m = n // p
        pa = ppart[m] * p if spf[m] == p else p
        ppart[n] = pa
        if pa == n:
            sig[n] = sig[m] + pa**e
        else:
            sig[n] = sig[pa] * sig[n // pa]
    return sig


def iroot(n: int, k: int) -> int:
    """Floor of the k-th root of n >= 0. Exact for any size of n."""
    if n < 0:
        raise ValueError("iroot expects n >= 0")
    if k < 1:
        raise ValueError("iroot expects k >= 1")
    if k == 1 or n < 2:
        return n
    if k == 2:
        return isqrt(n)
    try:
        x = int(round(n ** (1.0 / k))) + 1
    except OverflowError:
        x = 1 << (-(-n.bit_length() // k))
    if x < 1:
        x = 1
    # Newton from above converges monotonically to floor(n^(1/k))
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:  # guard against a bad float seed
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def ceil_root(n: int, k: int) -> int:
    """Smallest integer r with r^k >= n (n >= 0)."""
    if n <= 0:
        return 0
    r = iroot(n, k)
    return r if r**k == n else r + 1


def coprime_to_all(n: int, ps) -> bool:
    return all(gcd(n, p) == 1 for p in ps)


def is_squarefree(n: int, spf: list[int] | None = None) -> bool:
    return all(e == 1 for e in factorize(n, spf).values())


def log_spaced_ints(lo: int, hi: int, count: int) -> list[int]:
    """Distinct integers roughly geometrically spaced across [lo, hi]."""
    if lo < 1 or hi < lo:
        raise ValueError("need 1 <= lo <= hi")
    if count < 2 or lo == hi:
        return [hi]
    out: list[int] = []
    la, lb = math.log(lo), math.log(hi)
    for i in range(count):
        x = round(math.exp(la + (lb - la) * i / (count - 1)))
        x = min(max(x, lo), hi)
        if not out or x > out[-1]:
            out.append(x)
    return out
