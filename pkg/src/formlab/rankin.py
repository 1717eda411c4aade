"""Dirichlet-series coefficients of convolved coefficient products.

The restricted product series carries c_n(f) c_n(g) on indices coprime to
M; the shifted-zeta factor has m^{k1+k2-2} at n = m^2 (Euler factors at
p | Q removed, so gcd(m, Q) = 1), and their Dirichlet convolution is the
coefficient sequence whose sign structure the scans inspect. Raw integer
coefficients are used throughout: each term differs from the analytic
normalization by a positive factor, so signs and zeros are unchanged and
everything stays exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd, isqrt

from .forms import FormPair


@dataclass(frozen=True)
class DirichletCoeffs:
    """values[n] for 1 <= n <= length; values[0] is unused and zero."""

    values: tuple[int, ...]

    def __post_init__(self):
        if not self.values or self.values[0] != 0:
            raise ValueError("index 0 must exist and be zero")

    @property
    def length(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, n: int) -> int:
        return self.values[n]

    @classmethod
    def identity(cls, length: int) -> "DirichletCoeffs":
        v = [0] * (length + 1)
        if length >= 1:
            v[1] = 1
        return cls(tuple(v))


def restricted_product_coeffs(pair: FormPair, M: int, length: int) -> DirichletCoeffs:
    """c_n(f) c_n(g) on indices with gcd(n, M) = 1, zero elsewhere."""
    if M < 1:
        raise ValueError("M must be >= 1")
    prods = pair.products(length)
    vals = [0] * (length + 1)
    for n in range(1, length + 1):
        if gcd(n, M) == 1:
            vals[n] = prods[n]
    return DirichletCoeffs(tuple(vals))


def zeta_factor_coeffs(k1: int, k2: int, Q: int, length: int) -> DirichletCoeffs:
    """Coefficients of the shifted zeta with Euler factors at p | Q removed.

    Nonzero only at perfect squares n = m^2 with gcd(m, Q) = 1, where the
    value is m^{k1+k2-2}; in particular every value is >= 0.
    """
    if Q < 1:
        raise ValueError("Q must be >= 1")
    w = k1 + k2 - 2
    if w < 0:
        raise ValueError("weights too small")
    vals = [0] * (length + 1)
    m = 1
    while m * m <= length:
        if gcd(m, Q) == 1:
            vals[m * m] = m**w
        m += 1
    return DirichletCoeffs(tuple(vals))


def convolve(d: DirichletCoeffs, r: DirichletCoeffs) -> DirichletCoeffs:
    """(d * r)(n) = sum_{ab=n} d(a) r(b), exact."""
    if d.length != r.length:
        raise ValueError("operands must have equal length")
    P = d.length
    out = [0] * (P + 1)
    dv, rv = d.values, r.values
    for a in range(1, P + 1):
        da = dv[a]
        if not da:
            continue
        for b in range(1, P // a + 1):
            if rv[b]:
                out[a * b] += da * rv[b]
    return DirichletCoeffs(tuple(out))


def convolve_bruteforce(d: DirichletCoeffs, r: DirichletCoeffs) -> DirichletCoeffs:
    """Independent double-loop oracle for convolve (small lengths only)."""
    P = d.length
    out = [0] * (P + 1)
    for a in range(1, P + 1):
        for b in range(1, P + 1):
            if a * b <= P:
                out[a * b] += d[a] * r[b]
    return DirichletCoeffs(tuple(out))


@dataclass(frozen=True)
class PositivityReport:
    length: int
    first_negative: int | None
    negatives: int
    positives: int
    zeros: int
    Q: int | None = None  # Euler-factor support actually removed, if relevant

    def to_dict(self) -> dict:
        return {
            "length": self.length,
            "first_negative": self.first_negative,
            "negatives": self.negatives,
            "positives": self.positives,
            "zeros": self.zeros,
            "Q": self.Q,
        }


def positivity_scan(c: DirichletCoeffs, Q: int | None = None) -> PositivityReport:
    """Exact sign census of the coefficient sequence."""
    first_neg = None
    neg = pos = zero = 0
    for n in range(1, c.length + 1):
        v = c.values[n]
        if v > 0:
            pos += 1
        elif v < 0:
            neg += 1
            if first_neg is None:
                first_neg = n
        else:
            zero += 1
    return PositivityReport(c.length, first_neg, neg, pos, zero, Q)


def convolved_pair_coeffs(pair: FormPair, M: int, length: int) -> tuple[DirichletCoeffs, int]:
    """The full coefficient sequence for a pair: restricted products
    convolved with the shifted zeta factor. Euler factors are removed at
    p | N*M (same prime support as N*M^2); returns (coeffs, Q used)."""
    Q = pair.level * M
    rp = restricted_product_coeffs(pair, M, length)
    zf = zeta_factor_coeffs(pair.f.weight, pair.g.weight, Q, length)
    return convolve(zf, rp), Q
