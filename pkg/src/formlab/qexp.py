"""Exact truncated power-series arithmetic in q.

A QSeries holds coefficients c_0..c_{P-1} of q^0..q^{P-1} as arbitrary-size
Python ints. All arithmetic is exact; any rational prefactor must divide
out exactly or the operation raises. Binary operations truncate to the
minimum precision of the operands, never below.

Multiplication dispatches between two bit-exact paths:

  * schoolbook Cauchy product (skipping zero terms), used at small sizes;
  * Kronecker substitution for large/dense inputs: coefficients are packed
    into fixed-width slots of one big integer, the single integer product
    is taken (through gmpy2/GMP when available), and signed digits are read
    back. Slot width is chosen so |any product coefficient| < 2^(slot-1),
    which makes the balanced digit read-back unambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

try:
    from gmpy2 import mpz as _mpz

    _HAVE_GMPY2 = True
except ImportError:  # pragma: no cover - exercised via monkeypatch in tests
    _mpz = int
    _HAVE_GMPY2 = False

# schoolbook below, packed multiplication above (or when both operands are
# dense enough that the quadratic loop would dominate)
KRONECKER_CUTOFF = 4096
_WORK_CUTOFF = 1 << 22


def _nnz(c: list[int]) -> int:
    return sum(1 for v in c if v)


def _mul_schoolbook(a: list[int], b: list[int], prec: int) -> list[int]:
    """Plain Cauchy product truncated to prec, skipping zero terms."""
    out = [0] * prec
    if _nnz(a) > _nnz(b):
        a, b = b, a
    bn = len(b)
    for i, ai in enumerate(a):
        if i >= prec:
            break
        if not ai:
            continue
        jmax = min(bn, prec - i)
        for j in range(jmax):
            bj = b[j]
            if bj:
                out[i + j] += ai * bj
    return out


def _pack(c: list[int], slot_bytes: int) -> int:
    zero = bytes(slot_bytes)
    pos = []
    neg = []
    for v in c:
        if v > 0:
            pos.append(v.to_bytes(slot_bytes, "little"))
            neg.append(zero)
        elif v:
            pos.append(zero)
            neg.append((-v).to_bytes(slot_bytes, "little"))
        else:
            pos.append(zero)
            neg.append(zero)
    return int.from_bytes(b"".join(pos), "little") - int.from_bytes(
        b"".join(neg), "little"
    )


def _mul_kronecker(a: list[int], b: list[int], prec: int) -> list[int]:
    """Cauchy product via Kronecker substitution; bit-exact vs schoolbook."""
    max_a = max(map(abs, a), default=0)
    max_b = max(map(abs, b), default=0)
    if max_a == 0 or max_b == 0:
        return [0] * prec
    bound = min(len(a), len(b)) * max_a * max_b
    slot_bits = bound.bit_length() + 2  # < 2^(slot-1) strictly, with slack
    slot_bytes = (slot_bits + 7) // 8
    slot_bits = slot_bytes * 8
    A = _pack(a[:prec], slot_bytes)
    B = _pack(b[:prec], slot_bytes)
    if _HAVE_GMPY2:
        C = int(_mpz(A) * _mpz(B))
    else:
        C = A * B
    # shift every digit by 2^(slot-1): all prec low slots become nonnegative
    # and independent, so plain byte slicing recovers them
    half = 1 << (slot_bits - 1)
    offs = bytes(slot_bytes - 1) + b"\x80"
    C += int.from_bytes(offs * prec, "little")
    C &= (1 << (slot_bits * prec)) - 1
    data = C.to_bytes(slot_bytes * prec, "little")
    fb = int.from_bytes
    return [
        fb(data[i * slot_bytes : (i + 1) * slot_bytes], "little") - half
        for i in range(prec)
    ]


def _mul_lists(a: list[int], b: list[int], prec: int) -> list[int]:
    if prec > KRONECKER_CUTOFF or _nnz(a) * _nnz(b) > _WORK_CUTOFF:
        return _mul_kronecker(a, b, prec)
    return _mul_schoolbook(a, b, prec)


class QSeries:
    """Truncated q-expansion with exact integer coefficients.

    Immutable after construction; coefficient lists are never mutated and
    instances may be shared freely across workers.
    """

    __slots__ = ("precision", "coeffs")

    def __init__(self, coeffs, precision: int | None = None):
        coeffs = list(coeffs)
        if precision is None:
            precision = len(coeffs)
        if precision < 1:
            raise ValueError("precision must be >= 1")
        if len(coeffs) < precision:
            coeffs.extend([0] * (precision - len(coeffs)))
        elif len(coeffs) > precision:
            del coeffs[precision:]
        for v in coeffs:
            if not isinstance(v, int):
                raise TypeError("coefficients must be exact integers")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "precision", precision)

    def __setattr__(self, name, value):
        raise AttributeError("QSeries is immutable")

    @classmethod
    def one(cls, precision: int) -> "QSeries":
        return cls([1], precision)

    @classmethod
    def monomial(cls, n: int, precision: int, coeff: int = 1) -> "QSeries":
        c = [0] * precision
        if 0 <= n < precision:
            c[n] = coeff
        return cls(c)

    def __getitem__(self, n: int) -> int:
        return self.coeffs[n]

    def __len__(self) -> int:
        return self.precision

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, QSeries)
            and self.precision == other.precision
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.precision, tuple(self.coeffs[:16])))

    def __repr__(self) -> str:
        head = ", ".join(str(v) for v in self.coeffs[:6])
        tail = ", ..." if self.precision > 6 else ""
        return f"QSeries(P={self.precision}, [{head}{tail}])"

    def __add__(self, other) -> "QSeries":
        if isinstance(other, int):
            c = self.coeffs.copy()
            c[0] += other
            return QSeries(c)
        p = min(self.precision, other.precision)
        return QSeries([x + y for x, y in zip(self.coeffs[:p], other.coeffs[:p])])

    __radd__ = __add__

    def __neg__(self) -> "QSeries":
        return QSeries([-x for x in self.coeffs])

    def __sub__(self, other) -> "QSeries":
        if isinstance(other, int):
            return self + (-other)
        p = min(self.precision, other.precision)
        return QSeries([x - y for x, y in zip(self.coeffs[:p], other.coeffs[:p])])

    def __rsub__(self, other) -> "QSeries":
        return (-self) + other

    def __mul__(self, other) -> "QSeries":
        if isinstance(other, int):
            return QSeries([other * x for x in self.coeffs])
        p = min(self.precision, other.precision)
        return QSeries(_mul_lists(self.coeffs, other.coeffs, p))

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "QSeries":
        if not isinstance(e, int):
            raise TypeError("only integer powers")
        if e < 0:
            return self.invert() ** (-e)
        result = QSeries.one(self.precision)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def shift(self, k: int) -> "QSeries":
        """Multiply by q^k (k >= 0), truncating at the same precision."""
        if k < 0:
            raise ValueError("shift exponent must be >= 0")
        return QSeries([0] * k + self.coeffs[: self.precision - k], self.precision)

    def truncate(self, precision: int) -> "QSeries":
        if precision > self.precision:
            raise ValueError("cannot raise precision by truncation")
        return QSeries(self.coeffs[:precision])

    def invert(self) -> "QSeries":
        """Exact inverse, requires constant term +-1. Newton iteration."""
        c0 = self.coeffs[0]
        if c0 not in (1, -1):
            raise ValueError("series inversion needs constant term +1 or -1")
        P = self.precision
        g = [c0]
        m = 1
        f = self.coeffs
        while m < P:
            m = min(2 * m, P)
            fg = _mul_lists(f[:m], g, m)
            t = [-v for v in fg]
            t[0] += 2
            g = _mul_lists(g, t, m)
        return QSeries(g, P)

    def exact_divide(self, d: int) -> "QSeries":
        """Divide every coefficient by d; raise if any division is inexact."""
        if d == 0:
            raise ZeroDivisionError
        out = []
        for n, v in enumerate(self.coeffs):
            q, r = divmod(v, d)
            if r:
                raise ValueError(f"coefficient of q^{n} not divisible by {d}")
            out.append(q)
        return QSeries(out)


def mul(a: QSeries, b: QSeries) -> QSeries:
    """Cauchy product truncated to min(P_a, P_b)."""
    return a * b


@dataclass(frozen=True)
class EtaQuotient:
    """Finite product prod_d eta(d z)^{r_d}, stored as (d, r_d) pairs."""

    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set()
        for d, r in self.factors:
            if d < 1:
                raise ValueError("eta argument scale d must be positive")
            if r == 0:
                raise ValueError("zero exponent factor is not allowed")
            if d in seen:
                raise ValueError(f"duplicate eta scale d={d}")
            seen.add(d)

    @property
    def leading_exponent(self) -> Fraction:
        """Power of q in front of the product expansion: (sum d*r_d)/24."""
        return Fraction(sum(d * r for d, r in self.factors), 24)


def euler_product(d: int, precision: int) -> QSeries:
    """prod_{n>=1} (1 - q^{d n}) truncated, by the pentagonal expansion.

    Factors with d*n >= precision cannot touch kept coefficients and are
    dropped implicitly.
    """
    c = [0] * precision
    c[0] = 1
    k = 1
    while True:
        g1 = d * k * (3 * k - 1) // 2
        g2 = d * k * (3 * k + 1) // 2
        if g1 >= precision and g2 >= precision:
            break
        s = -1 if k & 1 else 1
        if g1 < precision:
            c[g1] += s
        if g2 < precision:
            c[g2] += s
        k += 1
    return QSeries(c)


def eta_quotient_expand(eq: EtaQuotient, precision: int) -> QSeries:
    """q-expansion of q^{(sum d r_d)/24} prod_d prod_n (1-q^{dn})^{r_d}.

    Rejects quotients whose leading power is not a nonnegative integer,
    since those have no integral q-expansion at q^0.
    """
    if precision < 1:
        raise ValueError("precision must be >= 1")
    lead = eq.leading_exponent
    if lead.denominator != 1 or lead < 0:
        raise ValueError(
            f"leading power {lead} is not a nonnegative integer; "
            "not a q-expansion"
        )
    out = QSeries.one(precision)
    for d, r in eq.factors:
        base = euler_product(d, precision)
        if r < 0:
            base = base.invert()
        out = out * base ** abs(r)
    return out.shift(int(lead))


def _bernoulli(m: int) -> Fraction:
    """B_m (B_1 = -1/2 convention), by the defining recurrence."""
    B = [Fraction(1)]
    for n in range(1, m + 1):
        s = sum(comb(n + 1, j) * B[j] for j in range(n))
        B.append(-s / (n + 1))
    return B[m]


def eisenstein(k: int, precision: int) -> QSeries:
    """E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n, integral or loud failure.

    Only weights whose prefactor -2k/B_k is an integer are accepted
    (k in {4, 6, 8, 10, 14}); anything else would force non-integer
    coefficients and is rejected.
    """
    from .primes import divisor_power_sums

    if k % 2 or k < 4:
        raise ValueError("Eisenstein weight must be even and >= 4")
    factor = Fraction(-2 * k) / _bernoulli(k)
    if factor.denominator != 1:
        raise ValueError(
            f"E_{k} has prefactor {factor}; expansion is not integral"
        )
    f = int(factor)
    sig = divisor_power_sums(k - 1, precision - 1)
    return QSeries([1] + [f * sig[n] for n in range(1, precision)])
