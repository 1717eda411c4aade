"""Short intervals containing A^r + B^s.

Constructive search for m = A^r + B^s in [n, n + C n^alpha] with
alpha = (r-1)(s-1)/rs and C = 2^{rs} rs, following the interval-splitting
argument: fix B = floor(n^{1/s}) and take the least A with A^r + B^s >= n.
Everything is integer arithmetic; window membership m - n <= C n^alpha is
decided through the equivalent power comparison
(m - n)^{rs} <= C^{rs} n^{(r-1)(s-1)}, so no irrational value is ever
approximated. A window miss would contradict the interval theorem and
raises TheoremViolation with the counterexample attached.

Convention: A, B >= 1 throughout, in both the constructive search and the
exhaustive oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import TheoremViolation
from .primes import ceil_root, iroot


@dataclass(frozen=True)
class PowerSumParams:
    r: int
    s: int

    def __post_init__(self):
        if self.r < 2 or self.s < 2:
            raise ValueError("exponents must be >= 2 (alpha must be positive)")

    @property
    def alpha(self) -> Fraction:
        return Fraction((self.r - 1) * (self.s - 1), self.r * self.s)

    @property
    def C(self) -> int:
        return 2 ** (self.r * self.s) * self.r * self.s


@dataclass(frozen=True)
class PowerSumWitness:
    n: int
    m: int
    A: int
    B: int
    params: PowerSumParams
    bound_hit: bool  # m sits exactly on a window boundary

    @property
    def gap(self) -> int:
        return self.m - self.n


def window_ok(n: int, m: int, params: PowerSumParams) -> bool:
    """Exact closed-window test n <= m <= n + C n^alpha."""
    if m < n:
        return False
    r, s, C = params.r, params.s, params.C
    return (m - n) ** (r * s) <= C ** (r * s) * n ** ((r - 1) * (s - 1))


def _on_boundary(n: int, m: int, params: PowerSumParams) -> bool:
    r, s, C = params.r, params.s, params.C
    return m == n or (m - n) ** (r * s) == C ** (r * s) * n ** ((r - 1) * (s - 1))


def find_representation(n: int, params: PowerSumParams) -> PowerSumWitness:
    """Least A with A^r + floor(n^{1/s})^s >= n; window checked exactly."""
    if n < 1:
        raise ValueError("n must be >= 1")
    r, s = params.r, params.s
    B = iroot(n, s)
    d = n - B**s
    A = max(1, ceil_root(d, r))
    m = A**r + B**s
    if not window_ok(n, m, params):
        raise TheoremViolation(
            f"A^{r}+B^{s} witness {m} for n={n} fell outside [n, n+C n^alpha]",
            n=n, m=m, A=A, B=B, r=r, s=s, C=params.C,
        )
    return PowerSumWitness(n, m, A, B, params, _on_boundary(n, m, params))


def oracle_min_representation(n: int, r: int, s: int, limit: int) -> int | None:
    """Exhaustive smallest m in [n, limit) with m = A^r + B^s, A, B >= 1."""
    if limit < n:
        raise ValueError("limit must be >= n")
    params = PowerSumParams(r, s)  # validates exponents
    best = None
    hi = limit - 1
    A = 1
    while A**r + 1 <= hi:
        ar = A**r
        rem_lo = max(n - ar, 1)
        B = max(1, ceil_root(rem_lo, s))
        m = ar + B**s
        if m <= hi and (best is None or m < best):
            best = m
            hi = best  # anything >= best is no longer interesting
        A += 1
    return best


def proof_gap_exceeds_one(n: int, params: PowerSumParams) -> bool:
    """Conservative exact check that the bracketing interval is wider than 1.

    With d = n - floor(n^{1/s})^s, the interval endpoints are x1 = d^{1/r}
    and x2 = (d + C n^alpha)^{1/r}; x2 - x1 > 1 is implied by
    (floor(x1) + 2)^r <= d + C floor(n^alpha), which uses only integers.
    """
    r, s = params.r, params.s
    d = n - iroot(n, s) ** s
    u = iroot(d, r)
    w = params.C * iroot(n ** ((r - 1) * (s - 1)), r * s)
    return (u + 2) ** r <= d + w


def smallest_verified_onset(params: PowerSumParams, n_max: int) -> int | None:
    """Least n0 <= n_max with proof_gap_exceeds_one true for all n in [n0, n_max]."""
    onset = None
    for n in range(1, n_max + 1):
        if proof_gap_exceeds_one(n, params):
            if onset is None:
                onset = n
        else:
            onset = None
    return onset


def norm_form_constant(D: int) -> int:
    """Window constant for a^2 + D b^2. Implementation-derived:
    16 (ceil(sqrt(D)) + 1) covers the interval-splitting bound for n >= D
    with a wide margin, and the additive D absorbs n < D, where the least
    representable value is 1 + D. Every call still verifies the window
    exactly."""
    return 16 * (ceil_root(D, 2) + 1) + D


@dataclass(frozen=True)
class NormFormWitness:
    n: int
    m: int
    a: int
    b: int
    D: int
    constant: int  # the C'(D) actually enforced

    @property
    def gap(self) -> int:
        return self.m - self.n


def find_normform(n: int, D: int) -> NormFormWitness:
    """m = a^2 + D b^2 in [n, n + C'(D) n^{1/4}], a, b >= 1, D squarefree."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if D < 1 or not _is_squarefree_small(D):
        raise ValueError("D must be a squarefree positive integer")
    b = iroot(n // D, 2) if n >= D else 1
    b = max(b, 1)
    d = n - D * b * b
    if d < 0:
        d = 0
    a = max(1, ceil_root(d, 2))
    m = a * a + D * b * b
    cprime = norm_form_constant(D)
    if m < n or (m - n) ** 4 > cprime**4 * n:
        raise TheoremViolation(
            f"norm-form witness {m} for n={n}, D={D} fell outside the window",
            n=n, m=m, a=a, b=b, D=D, constant=cprime,
        )
    return NormFormWitness(n, m, a, b, D, cprime)


def _is_squarefree_small(D: int) -> bool:
    f = 2
    while f * f <= D:
        if D % (f * f) == 0:
            return False
        f += 1
    return True


def oracle_min_normform(n: int, D: int, limit: int) -> int | None:
    """Exhaustive smallest m in [n, limit) with m = a^2 + D b^2, a, b >= 1."""
    best = None
    hi = limit - 1
    b = 1
    while D * b * b + 1 <= hi:
        db = D * b * b
        a = max(1, ceil_root(max(n - db, 1), 2))
        m = a * a + db
        if m <= hi and (best is None or m < best):
            best = m
            hi = best
        b += 1
    return best


@dataclass(frozen=True)
class CoprimeWitness:
    n: int
    m: int
    A: int
    B: int
    params: PowerSumParams
    badset: tuple[int, ...]
    K: int  # enforced window multiplier: m - n <= K n^alpha

    @property
    def gap(self) -> int:
        return self.m - self.n


class WindowExhausted(RuntimeError):
    """No coprime candidate inside the configured enlarged window.

    Reported as a finding: the coprime refinement is known to work for
    some constant, but no explicit one is available to enforce.
    """

    def __init__(self, n, params, badset, K):
        super().__init__(
            f"no A^{params.r}+B^{params.s} coprime to {sorted(badset)} in "
            f"[{n}, n + {K} n^{params.alpha}]"
        )
        self.n, self.params, self.badset, self.K = n, params, tuple(badset), K


def window_candidates(n: int, hi: int, r: int, s: int) -> list[int]:
    """All A^r + B^s in [n, hi] with A, B >= 1, ascending (with witnesses)."""
    out = []
    B = 1
    while B**s + 1 <= hi:
        bs = B**s
        A = max(1, ceil_root(max(n - bs, 1), r))
        while True:
            m = A**r + bs
            if m > hi:
                break
            out.append((m, A, B))
            A += 1
        B += 1
    out.sort()
    return out


def find_representation_coprime(
    n: int,
    params: PowerSumParams,
    badset=(),
    window_multiplier: int | None = None,
) -> CoprimeWitness:
    """Smallest A^r + B^s in the enlarged window coprime to every bad prime.

    The enforced window is [n, n + K n^alpha] with K a recorded multiple of
    C growing with the bad set (default C * 2^len(badset), capped); with an
    empty bad set this reduces to find_representation's window.
    """
    bad = tuple(sorted(set(badset)))
    if window_multiplier is None:
        K = params.C * min(2 ** len(bad), 64)
    else:
        K = window_multiplier
    if not bad:
        w = find_representation(n, params)
        return CoprimeWitness(n, w.m, w.A, w.B, params, bad, K)
    r, s = params.r, params.s
    # floor of K n^alpha, so any hit satisfies (m-n)^{rs} <= K^{rs} n^{(r-1)(s-1)}
    W = iroot(K ** (r * s) * n ** ((r - 1) * (s - 1)), r * s)
    for m, A, B in window_candidates(n, n + W, r, s):
        if all(gcd(m, p) == 1 for p in bad):
            return CoprimeWitness(n, m, A, B, params, bad, K)
    raise WindowExhausted(n, params, bad, K)
