"""Sign-change scans and partial-sum exponent fits for coefficient products.

Flip detection is exact: a sign change between n1 < n2 means the integer
products at n1 and n2 are nonzero with opposite signs and every product
between them is zero (zeros are transparent; the reference sign persists
across them). The normalized values a_n = c_n / n^{(k-1)/2} enter only
the partial sums S1 = sum a_n b_n and S2 = sum (a_n b_n)^2, accumulated
in 50-digit decimal arithmetic; sign logic never touches them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, getcontext

from .forms import FormPair
from .primes import log_spaced_ints

getcontext().prec = 50
_DECIMAL_GUARD = Decimal(10) ** -40  # per-term rounding envelope, prec 50


@dataclass(frozen=True)
class SignChangeReport:
    x: int
    H: int  # scanned range is (x, x+H]
    count: int  # sign flips of the nonzero product subsequence
    first_change: int | None
    positives: int
    negatives: int
    flips: tuple[int, ...]  # positions where the flipped sign was seen
    regime: str = "unknown"

    def to_row(self) -> list:
        return [
            self.x, self.H, self.count,
            self.first_change if self.first_change is not None else "",
            self.positives, self.negatives, self.regime,
        ]


def scan_sign_changes(pair: FormPair, x: int, H: int) -> SignChangeReport:
    """Walk n in (x, x+H], counting flips of the last nonzero product sign.

    The reference sign starts at the first nonzero product inside the
    range; zero products never count as changes.
    """
    if x < 0 or H < 1:
        raise ValueError("need x >= 0 and H >= 1")
    prods = pair.products(x + H)
    last = 0
    count = 0
    pos = neg = 0
    first = None
    flips = []
    for n in range(x + 1, x + H + 1):
        v = prods[n]
        if v == 0:
            continue
        sign = 1 if v > 0 else -1
        if sign > 0:
            pos += 1
        else:
            neg += 1
        if last and sign != last:
            count += 1
            flips.append(n)
            if first is None:
                first = n
        last = sign
    return SignChangeReport(
        x, H, count, first, pos, neg, tuple(flips), pair.regime()
    )


def count_sign_changes(pair: FormPair, up_to: int) -> int:
    """Total flips of the nonzero product subsequence over n <= up_to."""
    return scan_sign_changes(pair, 0, up_to).count


@dataclass(frozen=True)
class WindowSweep:
    delta: float
    reports: tuple[SignChangeReport, ...]
    cumulative: tuple[tuple[int, int, float], ...]  # (x, flips <= x, x^{1-delta})
    regime: str

    @property
    def fraction_with_change(self) -> float:
        if not self.reports:
            return 0.0
        return sum(1 for r in self.reports if r.count >= 1) / len(self.reports)


def window_sweep(pair: FormPair, delta: float, x_grid) -> WindowSweep:
    """One report per grid point x, window (x, x + ceil(x^delta)].

    delta must sit in (0, 1): at delta >= 1 the window dominates the range
    and the short-interval statement is vacuous.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    xs = sorted(set(int(x) for x in x_grid))
    if not xs or xs[0] < 1:
        raise ValueError("grid points must be >= 1")
    reports = []
    cumulative = []
    for x in xs:
        H = math.ceil(x**delta)
        reports.append(scan_sign_changes(pair, x, H))
        cumulative.append(
            (x, count_sign_changes(pair, x), x ** (1.0 - delta))
        )
    return WindowSweep(delta, tuple(reports), tuple(cumulative), pair.regime())


def _fit_line(xs: list[float], ys: list[float]) -> tuple[float, float]:
    k = len(xs)
    mx = sum(xs) / k
    my = sum(ys) / k
    sxx = sum((v - mx) ** 2 for v in xs)
    if sxx == 0:
        return 0.0, my
    slope = sum((u - mx) * (v - my) for u, v in zip(xs, ys)) / sxx
    return slope, my - slope * mx


def _pearson(xs: list[float], ys: list[float]) -> float:
    k = len(xs)
    mx = sum(xs) / k
    my = sum(ys) / k
    sxx = sum((v - mx) ** 2 for v in xs)
    syy = sum((v - my) ** 2 for v in ys)
    if sxx == 0 or syy == 0:
        return 1.0
    sxy = sum((u - mx) * (v - my) for u, v in zip(xs, ys))
    return sxy / math.sqrt(sxx * syy)


@dataclass(frozen=True)
class PartialSumFit:
    pair: str
    x_max: int
    xs: tuple[int, ...]
    s1: tuple[float, ...]  # sum a_n b_n at the sample points
    s2: tuple[float, ...]  # sum (a_n b_n)^2 at the sample points
    c_hat: float  # least-squares slope of S2 through the origin
    err_exponent: float | None  # growth of |S2 - c_hat x|
    s1_exponent: float | None  # growth of |S1|
    alpha_hat: float  # growth of the running max |a_n b_n|
    s2_linearity: float  # Pearson correlation of S2 against x
    accumulation_error: float  # decimal rounding envelope on the sums

    def to_dict(self) -> dict:
        return {
            "pair": self.pair,
            "x_max": self.x_max,
            "xs": list(self.xs),
            "s1": list(self.s1),
            "s2": list(self.s2),
            "c_hat": self.c_hat,
            "err_exponent": self.err_exponent,
            "s1_exponent": self.s1_exponent,
            "alpha_hat": self.alpha_hat,
            "s2_linearity": self.s2_linearity,
            "accumulation_error": self.accumulation_error,
        }


def partial_sums(pair: FormPair, x_max: int, samples: int = 64) -> PartialSumFit:
    """Accumulate S1, S2 with exact integer numerators and fit exponents.

    Terms are c_n(f) c_n(g) / n^w with the integer w = (k1 + k2 - 2) / 2
    (weights are even, so w is exact); each term is one exact-integer
    division at 50-digit precision.
    """
    if x_max < 100:
        raise ValueError("x_max < 100: fits would be meaningless")
    w2 = pair.f.weight + pair.g.weight - 2
    if w2 % 2:
        raise ValueError("weight parity mismatch")
    w = w2 // 2
    prods = pair.products(x_max)
    xs = log_spaced_ints(100, x_max, samples)
    marks = set(xs)
    s1 = Decimal(0)
    s2 = Decimal(0)
    running_max = Decimal(0)
    s1_at: dict[int, Decimal] = {}
    s2_at: dict[int, Decimal] = {}
    max_at: dict[int, Decimal] = {}
    for n in range(1, x_max + 1):
        c = prods[n]
        if c:
            t = Decimal(c) / (Decimal(n) ** w)
            s1 += t
            s2 += t * t
            if abs(t) > running_max:
                running_max = abs(t)
        if n in marks:
            s1_at[n] = s1
            s2_at[n] = s2
            max_at[n] = running_max
    logx = [math.log(x) for x in xs]
    # S2 ~ c_hat * x, least squares through the origin
    num = sum(float(s2_at[x]) * x for x in xs)
    den = sum(float(x) ** 2 for x in xs)
    c_hat = num / den if den else 0.0
    err = [abs(float(s2_at[x]) - c_hat * x) for x in xs]
    err_pts = [(lx, math.log(e)) for lx, e in zip(logx, err) if e > 0]
    err_exponent = _fit_line(*zip(*err_pts))[0] if len(err_pts) >= 2 else None
    s1_pts = [
        (lx, math.log(abs(float(s1_at[x]))))
        for lx, x in zip(logx, xs)
        if float(s1_at[x]) != 0.0
    ]
    s1_exponent = _fit_line(*zip(*s1_pts))[0] if len(s1_pts) >= 2 else None
    max_pts = [
        (lx, math.log(float(max_at[x]))) for lx, x in zip(logx, xs) if max_at[x] > 0
    ]
    alpha_hat = _fit_line(*zip(*max_pts))[0] if len(max_pts) >= 2 else 0.0
    linearity = _pearson([float(x) for x in xs], [float(s2_at[x]) for x in xs])
    acc_err = float(x_max * _DECIMAL_GUARD * (1 + max(abs(s1), abs(s2), running_max)))
    return PartialSumFit(
        pair.label,
        x_max,
        tuple(xs),
        tuple(float(s1_at[x]) for x in xs),
        tuple(float(s2_at[x]) for x in xs),
        c_hat,
        err_exponent,
        s1_exponent,
        alpha_hat,
        linearity,
        acc_err,
    )


@dataclass(frozen=True)
class CriterionVerdict:
    verdict: str  # "pass" | "fail" | "refused"
    delta: float
    alpha_hat: float
    beta_hat: float | None
    gamma_hat: float | None
    c_hat: float
    margin: float | None  # delta - max(alpha+beta, gamma)
    reasons: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "delta": self.delta,
            "alpha_hat": self.alpha_hat,
            "beta_hat": self.beta_hat,
            "gamma_hat": self.gamma_hat,
            "c_hat": self.c_hat,
            "margin": self.margin,
            "reasons": list(self.reasons),
        }


def criterion_check(fit: PartialSumFit, delta: float) -> CriterionVerdict:
    """Empirical check of max(alpha+beta, gamma) < delta < 1 on the fitted
    exponents. Refuses a verdict when the second moment shows no genuine
    linear growth (c_hat <= 0), since the sign-change conclusion needs it.
    """
    reasons = []
    if fit.c_hat <= 0:
        return CriterionVerdict(
            "refused", delta, fit.alpha_hat, fit.s1_exponent, fit.err_exponent,
            fit.c_hat, None, ("second-moment slope c_hat <= 0",),
        )
    alpha = max(fit.alpha_hat, 0.0)
    beta = fit.s1_exponent if fit.s1_exponent is not None else 0.0
    gamma = fit.err_exponent if fit.err_exponent is not None else 0.0
    bound = max(alpha + beta, gamma)
    ok = bound < delta < 1.0
    if delta >= 1.0:
        reasons.append("delta must be < 1")
    if bound >= delta:
        reasons.append(f"max(alpha+beta, gamma) = {bound:.4f} >= delta")
    return CriterionVerdict(
        "pass" if ok else "fail",
        delta, alpha, beta, gamma, fit.c_hat,
        delta - bound, tuple(reasons),
    )
