"""Gap scans: distance from n to the next nonzero coefficient (or product).

All vanishing decisions are exact integer tests. Search ceilings start at
ceil(n^0.9) and double on demand, with a hard stop at n + n: reaching the
stop is reported as a finding, not an error, since only the linear bound
on gaps is unconditional.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

from .forms import FormPair, ModularForm
from .primes import prime_flags, prime_pi

ENVELOPE_EXPONENT = Fraction(7, 17)


class GapCeilingExhausted(RuntimeError):
    """Every coefficient (or product) vanished out to the hard stop."""

    def __init__(self, context: str, n: int, ceiling: int):
        super().__init__(
            f"{context}: no nonzero value in [{n}, {n}+{ceiling}] (hard stop)"
        )
        self.n = n
        self.ceiling = ceiling


@dataclass(frozen=True)
class GapRecord:
    n: int
    gap: int
    witness: int  # n + gap, the first index with a nonzero value
    context: str  # form label or pair label

    def __post_init__(self):
        assert self.witness == self.n + self.gap


def _scan_first_nonzero(value_at, n: int, context: str) -> GapRecord:
    ceiling = max(1, math.ceil(n**0.9))
    j = 0
    while True:
        stop = min(ceiling, n)
        while j <= stop:
            if value_at(n + j) != 0:
                return GapRecord(n, j, n + j, context)
            j += 1
        if ceiling >= n:
            raise GapCeilingExhausted(context, n, stop)
        ceiling *= 2


def gap_single(f: ModularForm, n: int) -> GapRecord:
    """Least j >= 0 with c_{n+j} != 0."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _scan_first_nonzero(f.c, n, f.label)


def gap_pair(pair: FormPair, n: int) -> GapRecord:
    """Least j >= 0 with c_{n+j}(f) c_{n+j}(g) != 0."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _scan_first_nonzero(pair.product, n, pair.label)


def scan_gaps(
    target: ModularForm | FormPair, n_from: int, n_to: int
) -> list[GapRecord]:
    """GapRecords for every n in [n_from, n_to], off one shared scan.

    Prefetches one block past n_to; the rare n whose witness lies beyond
    the block falls back to the open-ended single scan.
    """
    if not 1 <= n_from <= n_to:
        raise ValueError("need 1 <= n_from <= n_to")
    is_pair = isinstance(target, FormPair)
    label = target.label
    block_top = min(2 * n_to, n_to + 65536)
    values = target.products(block_top) if is_pair else target.coefficients(block_top)
    witness_of: dict[int, int | None] = {}
    next_nonzero = None
    for n in range(block_top, n_from - 1, -1):
        if values[n] != 0:
            next_nonzero = n
        if n <= n_to:
            witness_of[n] = next_nonzero
    records = []
    for n in range(n_from, n_to + 1):
        w = witness_of[n]
        if w is None:
            records.append(gap_pair(target, n) if is_pair else gap_single(target, n))
        else:
            records.append(GapRecord(n, w - n, w, label))
    return records


@dataclass(frozen=True)
class ZeroCountReport:
    label: str
    x: int
    count: int
    ratio_serre: float  # count / (x / (log x)^{3/2})
    ratio_pi: float  # count / pi(x)


def serre_zero_count(f: ModularForm, x: int) -> ZeroCountReport:
    """Exact count of primes p <= x with c_p = 0, plus normalized ratios."""
    if x < 2:
        return ZeroCountReport(f.label, x, 0, 0.0, 0.0)
    f.ensure(x)
    flags = prime_flags(x)
    coeffs = f.coefficients(x)
    count = 0
    primes = 0
    for p in range(2, x + 1):
        if flags[p]:
            primes += 1
            if coeffs[p] == 0:
                count += 1
    lx = math.log(x)
    return ZeroCountReport(
        f.label, x, count, count / (x / lx**1.5), count / primes
    )


@dataclass(frozen=True)
class GapExponentFit:
    n_records: int
    n_nonzero: int
    degenerate: bool  # fewer than 10 nonzero gaps: no fit attempted
    slope: float | None
    intercept: float | None
    envelope: float  # max gap / n^{7/17} over all records
    envelope_exponent: float


def exponent_fit(
    records, envelope_exponent: Fraction = ENVELOPE_EXPONENT
) -> GapExponentFit:
    """Log-log least squares of gap vs n over the records with gap >= 1."""
    records = list(records)
    nz = [(r.n, r.gap) for r in records if r.gap >= 1]
    expo = float(envelope_exponent)
    envelope = max((g / n**expo for n, g in nz), default=0.0)
    if len(nz) < 10:
        return GapExponentFit(
            len(records), len(nz), True, None, None, envelope, expo
        )
    xs = [math.log(n) for n, _ in nz]
    ys = [math.log(g) for _, g in nz]
    k = len(xs)
    mx = sum(xs) / k
    my = sum(ys) / k
    sxx = sum((v - mx) ** 2 for v in xs)
    sxy = sum((u - mx) * (v - my) for u, v in zip(xs, ys))
    slope = sxy / sxx if sxx else 0.0
    return GapExponentFit(
        len(records), k, False, slope, my - slope * mx, envelope, expo
    )


def gap_rows(records, target) -> list[list]:
    """n, gap, witness, exact coefficient(s) at the witness."""
    rows = []
    is_pair = isinstance(target, FormPair)
    for r in records:
        if is_pair:
            rows.append(
                [r.n, r.gap, r.witness, target.f.c(r.witness), target.g.c(r.witness)]
            )
        else:
            rows.append([r.n, r.gap, r.witness, target.c(r.witness), ""])
    return rows


def write_gap_csv(path, records, target) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "gap", "witness", "c_witness_f", "c_witness_g"])
        w.writerows(gap_rows(records, target))
