"""Mod-4 congruence checks and the sum-of-two-squares witness pipeline.

For level-1 eigenforms the integer coefficients satisfy c_p = 2 (mod 4)
at primes p = 1 (mod 4) and c_{p^r} = 1 (mod 4) for even r at primes
p = 3 (mod 4). check_hatada verifies both branches exhaustively. The
witness pipeline finds m near n that is a sum of two positive squares
(so every p = 3 (mod 4) divides it to even multiplicity), coprime to the
form's empirical bad primes, then confirms c_m != 0 by the exact integer.
A vanishing c_m at such an m has never been observed; if it happens the
pipeline records the event loudly and moves to the next candidate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .forms import ModularForm
from .powersum import (
    PowerSumParams,
    WindowExhausted,
    find_representation_coprime,
    window_candidates,
)
from .primes import factorize, iroot, prime_flags, sieve_primes

log = logging.getLogger(__name__)

DEFAULT_WITNESS_MULTIPLIER = 64  # the r = s = 2 window constant 2^4 * 4


@dataclass(frozen=True)
class CongruenceViolation:
    index: int  # p or p^r
    value: int
    expected_residue: int


@dataclass(frozen=True)
class CongruenceReport:
    label: str
    prime_bound: int
    power_bound: int
    checked: int
    violations: tuple[CongruenceViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_hatada(f: ModularForm, prime_bound: int, power_bound: int | None = None) -> CongruenceReport:
    """Exact residue check of both mod-4 congruence branches.

    Primes p <= prime_bound with p = 1 (mod 4) must give c_p = 2 (mod 4);
    even powers p^r <= power_bound of primes p = 3 (mod 4) must give
    c_{p^r} = 1 (mod 4).
    """
    if f.level != 1:
        raise ValueError("congruence check applies to level-1 eigenforms")
    if power_bound is None:
        power_bound = prime_bound
    f.ensure(max(prime_bound, power_bound))
    flags = prime_flags(max(prime_bound, iroot(power_bound, 2)))
    violations = []
    checked = 0
    for p in range(5, prime_bound + 1, 4):
        if flags[p]:
            checked += 1
            if f.c(p) % 4 != 2:
                violations.append(CongruenceViolation(p, f.c(p), 2))
    for p in range(3, iroot(power_bound, 2) + 1, 4):
        if not flags[p]:
            continue
        pr = p * p
        while pr <= power_bound:
            checked += 1
            if f.c(pr) % 4 != 1:
                violations.append(CongruenceViolation(pr, f.c(pr), 1))
            pr *= p * p
    return CongruenceReport(
        f.label, prime_bound, power_bound, checked, tuple(violations)
    )


def discover_badset(f: ModularForm, prime_scan: int = 50, power_bound: int = 10000) -> tuple[int, ...]:
    """Empirical bad primes: small p with some relevant c_{p^r} = 0.

    Only prime powers that can divide a sum of two positive squares
    matter: any power of 2 or of p = 1 (mod 4), even powers of
    p = 3 (mod 4). A vanishing value there would poison the witness's
    multiplicative factorization, so such p are excluded from witnesses.
    For the built-in eigenforms the scan finds nothing.
    """
    f.ensure(power_bound)
    bad = []
    for p in sieve_primes(prime_scan):
        step = p * p if p % 4 == 3 else p
        pr = step
        while pr <= power_bound:
            if f.c(pr) == 0:
                bad.append(p)
                break
            pr *= step
    return tuple(bad)


@dataclass(frozen=True)
class TwoSquaresWitness:
    n: int
    m: int
    A: int
    B: int
    K: int  # enforced window multiplier on n^{1/4}
    badset: tuple[int, ...]
    factorization: dict[int, int]

    @property
    def gap(self) -> int:
        return self.m - self.n


def two_squares_witness(n: int, badset=(), K: int = DEFAULT_WITNESS_MULTIPLIER) -> TwoSquaresWitness:
    """m in [n, n + K n^{1/4}] with m = A^2 + B^2 (A, B >= 1), coprime to
    the bad primes; the factorization certificate (every p = 3 mod 4 to
    even multiplicity) is verified before returning."""
    if n < 1:
        raise ValueError("n must be >= 1")
    w = find_representation_coprime(
        n, PowerSumParams(2, 2), badset, window_multiplier=K
    )
    fac = factorize(w.m)
    for p, e in fac.items():
        if p % 4 == 3 and e % 2:
            raise AssertionError(
                f"two-squares certificate failed at m={w.m}: {p}^{e}"
            )
    return TwoSquaresWitness(n, w.m, w.A, w.B, K, tuple(sorted(set(badset))), fac)


@dataclass(frozen=True)
class NonvanishingWitness:
    label: str
    n: int
    m: int
    coefficient: int
    gap: int
    K: int
    badset: tuple[int, ...]
    skipped: tuple[int, ...]  # candidates with vanishing coefficient (never seen)

    def to_dict(self) -> dict:
        c = self.coefficient
        return {
            "form": self.label,
            "n": self.n,
            "m": self.m,
            "gap": self.gap,
            "coefficient": c if abs(c) < 2**53 else str(c),
            "K": self.K,
            "badset": list(self.badset),
        }


def nonvanishing_witness(
    f: ModularForm,
    n: int,
    badset: tuple[int, ...] | None = None,
    K: int = DEFAULT_WITNESS_MULTIPLIER,
) -> NonvanishingWitness:
    """Two-squares witness near n with c_m != 0 verified exactly.

    If the first candidate had c_m = 0 the event would be a discovery;
    it is logged prominently, recorded in the result, and the scan moves
    on within the same window.
    """
    if badset is None:
        badset = discover_badset(f)
    w = two_squares_witness(n, badset, K)
    skipped = []
    if f.c(w.m) != 0:
        return NonvanishingWitness(
            f.label, n, w.m, f.c(w.m), w.gap, K, w.badset, ()
        )
    log.critical(
        "vanishing coefficient at two-squares index m=%d for %s", w.m, f.label
    )
    skipped.append(w.m)
    W = iroot(K**4 * n, 4)
    for m, A, B in window_candidates(n, n + W, 2, 2):
        if m in skipped or any(m % p == 0 for p in badset):
            continue
        if f.c(m) != 0:
            return NonvanishingWitness(
                f.label, n, m, f.c(m), m - n, K, w.badset, tuple(skipped)
            )
        log.critical(
            "vanishing coefficient at two-squares index m=%d for %s", m, f.label
        )
        skipped.append(m)
    raise WindowExhausted(n, PowerSumParams(2, 2), badset, K)


def simultaneous_witness(
    forms, n: int, K: int = DEFAULT_WITNESS_MULTIPLIER, badset=None
) -> tuple[int, list[int]]:
    """One m in [n, n + K n^{1/4}] with c_m != 0 for every given form.

    Returns (m, coefficients). Scans two-squares candidates in window
    order, skipping any with a vanishing coefficient (logged as above).
    """
    forms = list(forms)
    if badset is None:
        badset = sorted(set().union(*(discover_badset(f) for f in forms)))
    W = iroot(K**4 * n, 4)
    for m, A, B in window_candidates(n, n + W, 2, 2):
        if any(m % p == 0 for p in badset):
            continue
        coeffs = [f.c(m) for f in forms]
        if all(coeffs):
            return m, coeffs
        log.critical(
            "vanishing coefficient at two-squares index m=%d (simultaneous scan)", m
        )
    raise WindowExhausted(n, PowerSumParams(2, 2), tuple(badset), K)
