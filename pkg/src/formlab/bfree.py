"""B-free numbers: sieving in short intervals and progressions.

A B-set is a strictly increasing sequence of pairwise coprime integers
> 1; n is B-free when no member divides it. The set attached to a form
pair takes the primes with vanishing coefficient product (or dividing the
level) together with the squares of all remaining primes, so a B-free n
is automatically squarefree with every prime factor carrying a nonzero
coefficient product.

Whether sum 1/b_i converges cannot be decided from finitely many terms;
the reports carry the partial reciprocal sums and the zero-prime counts
normalized by x/log x so the expected density decay is visible.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from math import gcd, isqrt

from .forms import FormPair
from .primes import mobius_table, sieve_primes

DEFAULT_SEGMENT = 1 << 16


class IncompatibleProgression(ValueError):
    """gcd(gcd(a, q), b) > 1 for some generator b: the progression meets
    multiples of b unavoidably and the count request is rejected."""

    def __init__(self, a: int, q: int, b: int):
        super().__init__(
            f"progression a={a} mod q={q} is incompatible with generator {b}"
        )
        self.generator = b


class InsufficientGenerators(ValueError):
    """The set was materialized only below a smaller bound."""


@dataclass
class BFreeSet:
    """Pairwise-coprime generator sequence with a lazy enumeration bound.

    `_enumerate(X)` returns the sorted generators <= X. Sets built from a
    form pair are coprime by construction (distinct primes and squares of
    other primes); explicit literal sets are checked pairwise.
    """

    descriptor: str
    _enumerate: callable
    bound: int | None = None  # hard enumeration ceiling, if any
    meta: dict = field(default_factory=dict)

    def generators_up_to(self, X: int) -> list[int]:
        if self.bound is not None and X > self.bound:
            raise InsufficientGenerators(
                f"{self.descriptor}: generators known only up to {self.bound}"
            )
        return self._enumerate(X)

    def reciprocal_partial_sum(self, X: int) -> float:
        return sum(1.0 / b for b in self.generators_up_to(X))


def from_generators(gens, descriptor: str = "explicit") -> BFreeSet:
    gens = sorted(set(int(b) for b in gens))
    if any(b <= 1 for b in gens):
        raise ValueError("generators must exceed 1")
    for i, b in enumerate(gens):
        for c in gens[i + 1 :]:
            if gcd(b, c) != 1:
                raise ValueError(f"generators {b} and {c} are not coprime")
    return BFreeSet(descriptor, lambda X: [b for b in gens if b <= X])


def prime_squares() -> BFreeSet:
    """B = {p^2}: the B-free numbers are exactly the squarefree ones."""
    return BFreeSet(
        "prime-squares", lambda X: [p * p for p in sieve_primes(isqrt(X))]
    )


def build_from_pair(pair: FormPair, bound: int) -> BFreeSet:
    """Zero-product primes and the level's primes, plus squares of the rest.

    Needs exact c_p for every p <= bound; the returned set enumerates only
    up to that bound.
    """
    pair.ensure(bound)
    level = pair.level
    s_primes = []
    ok_primes = []
    for p in sieve_primes(bound):
        if level % p == 0 or pair.product(p) == 0:
            s_primes.append(p)
        else:
            ok_primes.append(p)
    gens = sorted(s_primes + [p * p for p in ok_primes if p * p <= bound])

    x = float(bound)
    meta = {
        "s_primes": len(s_primes),
        "zero_ratio_serre": len(s_primes) / (x / math.log(x)) if bound >= 3 else 0.0,
        "reciprocal_sum_s": sum(1.0 / p for p in s_primes),
    }
    return BFreeSet(
        f"S u {{p^2: p not in S}} for pair {pair.label}",
        lambda X: [b for b in gens if b <= X],
        bound=bound,
        meta=meta,
    )


@dataclass
class SieveResult:
    x: int
    y: int
    count: int
    bitmap: bytearray  # bitmap[i] = 1 iff n = x + 1 + i is B-free

    @property
    def density(self) -> float:
        return self.count / self.y if self.y else 0.0

    def members(self) -> list[int]:
        return [self.x + 1 + i for i, v in enumerate(self.bitmap) if v]

    def summary(self) -> dict:
        return {"x": self.x, "y": self.y, "count": self.count, "density": self.density}


def sieve_interval(
    bset: BFreeSet, x: int, y: int, segment_size: int = DEFAULT_SEGMENT
) -> SieveResult:
    """Exact count and bitmap of B-free n in (x, x + y].

    Segmented: each chunk is marked once per generator <= its end, via
    strided slice assignment.
    """
    if y < 1:
        raise ValueError("interval length y must be >= 1")
    if x < 0:
        raise ValueError("x must be >= 0")
    gens = bset.generators_up_to(x + y)
    bitmap = bytearray([1]) * y
    for lo in range(x + 1, x + y + 1, segment_size):
        hi = min(lo + segment_size - 1, x + y)  # segment covers [lo, hi]
        base = lo - x - 1
        seg_len = hi - lo + 1
        for b in gens:
            if b > hi:
                break
            first = ((lo + b - 1) // b) * b
            if first > hi:
                continue
            idx = base + first - lo
            marks = (base + seg_len - 1 - idx) // b + 1
            bitmap[idx : base + seg_len : b] = b"\x00" * marks
    return SieveResult(x, y, sum(bitmap), bitmap)


@dataclass
class ProgressionResult:
    x: int
    y: int
    a: int
    q: int
    count: int
    in_regime: bool  # q <= x^eps for the configured eps

    def summary(self) -> dict:
        return {
            "x": self.x, "y": self.y, "a": self.a, "q": self.q,
            "count": self.count, "in_regime": self.in_regime,
        }


def sieve_progression(
    bset: BFreeSet,
    x: int,
    y: int,
    a: int,
    q: int,
    regime_eps: float = 0.05,
    segment_size: int = DEFAULT_SEGMENT,
) -> ProgressionResult:
    """Exact count of B-free n = a (mod q) in (x, x + y].

    Requires 1 <= a <= q and gcd(gcd(a, q), b) = 1 for every enumerated
    generator; the first violating b is named. Counts with q beyond the
    short-interval regime (q > x^eps) are still computed but flagged.
    """
    if not 1 <= a <= q:
        raise ValueError("need 1 <= a <= q")
    gens = bset.generators_up_to(x + y)
    g0 = gcd(a, q)
    for b in gens:
        if gcd(g0, b) != 1:
            raise IncompatibleProgression(a, q, b)
    res = sieve_interval(bset, x, y, segment_size)
    first = x + 1 + ((a - x - 1) % q)
    count = 0
    for i in range(first - x - 1, y, q):
        count += res.bitmap[i]
    in_regime = x >= 2 and q <= x**regime_eps
    return ProgressionResult(x, y, a, q, count, in_regime)


def squarefree_count(limit: int) -> int:
    """Independent oracle: #squarefree n <= limit = sum mu(d) floor(limit/d^2)."""
    root = isqrt(limit)
    mu = mobius_table(root)
    return sum(mu[d] * (limit // (d * d)) for d in range(1, root + 1) if mu[d])


# --- run-length-encoded bitmap export ---------------------------------------

RLE_MAGIC = b"BFR1"


def write_rle_bitmap(path, result: SieveResult) -> None:
    """Binary export: header (x, y, count), first bit, then run lengths."""
    runs = []
    cur = result.bitmap[0] if result.bitmap else 1
    first_bit = cur
    run = 0
    for v in result.bitmap:
        if v == cur:
            run += 1
        else:
            runs.append(run)
            cur = v
            run = 1
    if run:
        runs.append(run)
    with open(path, "wb") as fh:
        fh.write(RLE_MAGIC)
        fh.write(struct.pack("<QQQB", result.x, result.y, result.count, first_bit))
        for run in runs:
            fh.write(struct.pack("<Q", run))


def read_rle_bitmap(path) -> SieveResult:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != RLE_MAGIC:
        raise ValueError("not an RLE bitmap file")
    x, y, count, bit = struct.unpack_from("<QQQB", data, 4)
    pos = 4 + struct.calcsize("<QQQB")
    bitmap = bytearray()
    while pos < len(data):
        (run,) = struct.unpack_from("<Q", data, pos)
        pos += 8
        bitmap.extend(bytes([bit]) * run)
        bit ^= 1
    if len(bitmap) != y:
        raise ValueError("RLE payload does not match interval length")
    res = SieveResult(x, y, count, bitmap)
    if sum(bitmap) != count:
        raise ValueError("RLE payload does not match stored count")
    return res
