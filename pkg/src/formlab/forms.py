"""Modular forms as exact integer coefficient sequences.

Level-1 eigenforms come out of the Miller basis (echelonized monomials in
E4, E6, Delta); the CM examples are eta quotients; everything else is
ingested from newform files and extended multiplicatively by the Hecke
recursion. Sign and vanishing decisions downstream always read the raw
integer c_n; the analytic normalization a_n = c_n / n^{(k-1)/2} has the
same signs and zeros.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import gcd, lcm
from pathlib import Path

from . import cache as cache_mod
from .primes import prime_flags, sieve_primes, spf_table
from .qexp import EtaQuotient, QSeries, eisenstein, eta_quotient_expand

LEVEL1_WEIGHTS = (12, 16, 18, 20, 22, 26)

# Delta times the listed (E4 power, E6 power) gives the normalized cusp
# generator in each dimension-1 weight
_EIGEN_MONOMIAL = {
    12: (0, 0),
    16: (1, 0),
    18: (0, 1),
    20: (2, 0),
    22: (1, 1),
    26: (2, 1),
}


class MissingPrimeError(ValueError):
    """A multiplicative fill needed c_p for a prime missing from the source."""

    def __init__(self, p: int, label: str = ""):
        super().__init__(f"no coefficient for prime {p}" + (f" in {label}" if label else ""))
        self.prime = p


class DeligneBoundError(ValueError):
    """Supplied coefficient data breaks c_p^2 <= 4 p^(k-1) at a good prime."""

    def __init__(self, label: str, p: int, cp: int):
        super().__init__(f"{label}: c_{p} = {cp} violates c_p^2 <= 4*p^(k-1)")
        self.prime = p


def delta_series(precision: int) -> QSeries:
    """q prod (1-q^n)^24 to the given precision (coefficient of q^n = tau(n))."""
    return eta_quotient_expand(EtaQuotient(((1, 24),)), precision)


def dim_modforms_level1(k: int) -> int:
    """dim M_k(SL2(Z)) for even k >= 0."""
    if k < 0 or k % 2:
        return 0
    return k // 12 if k % 12 == 2 else k // 12 + 1


def miller_basis(k: int, precision: int) -> list[QSeries]:
    """Echelonized integral basis of M_k(SL2(Z)): f_i = q^i + O(q^d).

    Built from Delta^j E4^a E6^b monomials, which are unitriangular in the
    leading coefficients, so the reduction stays over the integers.
    """
    if k % 2:
        raise ValueError("no odd-weight forms on SL2(Z)")
    if k < 4:
        raise ValueError("weight must be >= 4")
    d = dim_modforms_level1(k)
    e4 = eisenstein(4, precision)
    e6 = eisenstein(6, precision)
    delta = delta_series(precision)
    rows: list[list[int]] = []
    for j in range(d):
        w = k - 12 * j
        b = 0 if w % 4 == 0 else 1
        a = (w - 6 * b) // 4
        g = (delta**j) * (e4**a) * (e6**b)
        rows.append(list(g.coeffs))
    for j in range(d):
        pivot = rows[j]
        assert pivot[j] == 1
        for i in range(d):
            if i != j and rows[i][j]:
                c = rows[i][j]
                rows[i] = [x - c * y for x, y in zip(rows[i], pivot)]
    return [QSeries(r) for r in rows]


def cusp_basis(k: int, precision: int) -> list[QSeries]:
    """The c_0 = 0 slice of the Miller basis."""
    return [f for f in miller_basis(k, precision) if f[0] == 0]


def hecke_apply(f: QSeries, m: int, weight: int) -> QSeries:
    """T_m acting on a level-1 weight-k expansion; output precision P // m.

    T_p is applied directly; prime powers use T_p T_{p^r} = T_{p^{r+1}}
    + p^{k-1} T_{p^{r-1}}, and coprime parts compose multiplicatively.
    """
    if m < 1:
        raise ValueError("Hecke index must be >= 1")
    if f.precision // m < 1:
        raise ValueError("insufficient precision for T_m")

    def t_p(series: QSeries, p: int) -> QSeries:
        newp = series.precision // p
        pk = p ** (weight - 1)
        c = series.coeffs
        out = [0] * newp
        for n in range(newp):
            v = c[n * p]
            if n % p == 0:
                v += pk * c[n // p]
            out[n] = v
        return QSeries(out)

    from .primes import factorize

    result = f
    for p, e in factorize(m).items():
        prev = result  # T_{p^0} component
        cur = t_p(result, p)
        for _ in range(e - 1):
            nxt = t_p(cur, p) - (p ** (weight - 1)) * prev.truncate(
                cur.precision // p
            )
            prev, cur = cur.truncate(cur.precision // p), nxt
        result = cur
    return result


def hecke_fill(
    level: int, weight: int, ap: dict[int, int], precision: int, label: str = ""
) -> list[int]:
    """c_0..c_P from prime data: multiplicative across coprime parts, and
    c_{p^{r+1}} = c_p c_{p^r} - p^{k-1} c_{p^{r-1}} at good primes
    (the p^{k-1} term drops when p | level). c_0 = 0, c_1 = 1."""
    c = [0] * (precision + 1)
    if precision >= 1:
        c[1] = 1
    if precision < 2:
        return c
    spf = spf_table(precision)
    ppart = [0] * (precision + 1)
    pk1 = {p: p ** (weight - 1) for p in ap}
    for n in range(2, precision + 1):
        p = spf[n]
        m = n // p
        pa = ppart[m] * p if spf[m] == p else p
        ppart[n] = pa
        if pa != n:
            c[n] = c[pa] * c[n // pa]
            continue
        if p not in ap:
            raise MissingPrimeError(p, label)
        if n == p:
            c[n] = ap[p]
        elif level % p == 0:
            c[n] = ap[p] * c[m]
        else:
            c[n] = ap[p] * c[m] - pk1[p] * c[m // p]
    return c


class ModularForm:
    """A registered form: label, level, weight, and exact c_n access.

    The coefficient source is one of: a full list c_1..c_P, a prime map
    with Hecke fill, or a q-expansion builder (eta quotient / Miller
    generator). Instances only ever grow their coefficient table; they are
    treated as immutable by all consumers.
    """

    def __init__(
        self,
        label: str,
        level: int,
        weight: int,
        *,
        builder=None,
        ap: dict[int, int] | None = None,
        an: list[int] | None = None,
        is_cm: bool = False,
        cm_disc: int | None = None,
    ):
        if level < 1 or weight < 2:
            raise ValueError("need level >= 1 and weight >= 2")
        if sum(x is not None for x in (builder, ap, an)) != 1:
            raise ValueError("exactly one coefficient source required")
        self.label = cache_mod.validate_label(label)
        self.level = level
        self.weight = weight
        self.is_cm = is_cm
        self.cm_disc = cm_disc
        self._builder = builder
        self._ap = dict(ap) if ap is not None else None
        self._coeffs: list[int] = [0]  # index n -> c_n; grows on demand
        if an is not None:
            if not an or an[0] != 1:
                raise ValueError(f"{label}: normalized forms need c_1 = 1")
            self._coeffs = [0] + [int(v) for v in an]
            self._fixed_precision = len(an)
        else:
            self._fixed_precision = None

    @property
    def precision(self) -> int:
        return len(self._coeffs) - 1

    def max_precision(self) -> int | None:
        """Hard ceiling on available coefficients, if any."""
        if self._fixed_precision is not None:
            return self._fixed_precision
        if self._ap is not None:
            q = max(self._ap) + 1
            # fills are good up to just below the next prime we don't have
            flags = None
            while True:
                flags = prime_flags(q + 1000)
                for n in range(max(self._ap) + 1, len(flags)):
                    if flags[n]:
                        return n - 1
                q += 1000
        return None

    def ensure(self, precision: int) -> None:
        if precision <= self.precision:
            return
        if self._fixed_precision is not None:
            raise ValueError(
                f"{self.label}: only {self._fixed_precision} coefficients supplied"
            )
        if self._ap is not None:
            self._coeffs = hecke_fill(
                self.level, self.weight, self._ap, precision, self.label
            )
            return
        series = self._builder(precision + 1)
        if series[0] != 0:
            raise ValueError(f"{self.label}: not a cusp expansion (c_0 != 0)")
        self._coeffs = list(series.coeffs)

    def seed_coefficients(self, coeffs: list[int]) -> None:
        """Adopt cached c_0..c_P (trusted path used by the registry)."""
        if len(coeffs) - 1 > self.precision:
            self._coeffs = list(coeffs)

    def c(self, n: int) -> int:
        """Exact integer coefficient c_n (n >= 1); extends as needed."""
        if n < 1:
            raise IndexError("coefficients are indexed from n = 1")
        if n > self.precision:
            target = max(n, 2 * self.precision, 16)
            try:
                self.ensure(target)
            except MissingPrimeError:
                if target == n:
                    raise
                self.ensure(n)  # doubled headroom outran the prime map
        return self._coeffs[n]

    def coefficients(self, precision: int) -> list[int]:
        """c_0..c_P as a list (c_0 = 0). The list is shared; do not mutate."""
        self.ensure(precision)
        if self.precision == precision:
            return self._coeffs
        return self._coeffs[: precision + 1]

    def prime_coefficients(self, bound: int) -> dict[int, int]:
        self.ensure(bound)
        flags = prime_flags(bound)
        return {p: self._coeffs[p] for p in range(2, bound + 1) if flags[p]}

    def check_deligne(self, bound: int) -> None:
        """Exact c_p^2 <= 4 p^(k-1) for p <= bound, p not dividing the level."""
        for p, cp in self.prime_coefficients(bound).items():
            if self.level % p != 0 and cp * cp > 4 * p ** (self.weight - 1):
                raise DeligneBoundError(self.label, p, cp)

    def __repr__(self) -> str:
        return (
            f"ModularForm({self.label!r}, N={self.level}, k={self.weight}, "
            f"cm={self.is_cm}, P={self.precision})"
        )


@dataclass
class FormPair:
    """Two forms scanned jointly through the exact product c_n(f) c_n(g)."""

    f: ModularForm
    g: ModularForm
    _prods: list = field(default=None, repr=False, compare=False)

    @property
    def level(self) -> int:
        return lcm(self.f.level, self.g.level)

    @property
    def same_weight(self) -> bool:
        return self.f.weight == self.g.weight

    @property
    def distinct(self) -> bool:
        return self.f.label != self.g.label

    @property
    def label(self) -> str:
        return f"{self.f.label}*{self.g.label}"

    def ensure(self, precision: int) -> None:
        self.f.ensure(precision)
        self.g.ensure(precision)

    def product(self, n: int) -> int:
        return self.f.c(n) * self.g.c(n)

    def products(self, precision: int) -> list[int]:
        """c_n(f)*c_n(g) for n = 0..P (index 0 unused; list shared, do not
        mutate). Cached grow-only, like the coefficient tables."""
        if self._prods is None or len(self._prods) - 1 < precision:
            a = self.f.coefficients(precision)
            b = self.g.coefficients(precision)
            self._prods = [x * y for x, y in zip(a, b)]
        if len(self._prods) - 1 == precision:
            return self._prods
        return self._prods[: precision + 1]

    def regime(self) -> str:
        """Which sign-change statement the pair can instantiate.

        same-weight distinct newforms of equal level fall under the
        quantitative short-interval statement; different weights under the
        qualitative both-signs statement; anything else is exploratory.
        """
        if (
            self.same_weight
            and self.distinct
            and self.f.level == self.g.level
            and self.f.weight >= 2
        ):
            return "same-weight"
        if self.f.weight != self.g.weight and self.f.level == self.g.level:
            return "different-weight"
        return "exploratory"


def level1_eigenform(k: int, precision: int, label: str | None = None) -> ModularForm:
    """The normalized level-1 eigenform in a dimension-1 cusp space.

    Accepts k in {12, 16, 18, 20, 22, 26}; elsewhere dim S_k(SL2(Z)) is not
    one and there is no canonical rational eigenform to return.
    """
    if k not in _EIGEN_MONOMIAL:
        raise ValueError(f"dim S_{k}(SL2(Z)) != 1; only {LEVEL1_WEIGHTS} supported")
    a, b = _EIGEN_MONOMIAL[k]

    def build(p: int) -> QSeries:
        s = delta_series(p)
        if a:
            s = s * eisenstein(4, p) ** a
        if b:
            s = s * eisenstein(6, p) ** b
        return s

    form = ModularForm(
        label or ("delta" if k == 12 else f"w{k}"),
        level=1,
        weight=k,
        builder=build,
    )
    form.ensure(precision)
    return form


def _eta_form(label: str, level: int, factors, cm_disc: int) -> ModularForm:
    eq = EtaQuotient(tuple(factors))
    return ModularForm(
        label,
        level=level,
        weight=2,
        builder=lambda p: eta_quotient_expand(eq, p),
        is_cm=True,
        cm_disc=cm_disc,
    )


_BUILTIN_BUILDERS = {
    "delta": lambda: level1_eigenform(12, 16),
    "w16": lambda: level1_eigenform(16, 16),
    "w18": lambda: level1_eigenform(18, 16),
    "w20": lambda: level1_eigenform(20, 16),
    "w22": lambda: level1_eigenform(22, 16),
    "w26": lambda: level1_eigenform(26, 16),
    # weight-2 CM forms with closed eta-quotient expansions:
    # level 32 (CM by Q(i)) and level 27 (CM by Q(sqrt(-3)))
    "cm32": lambda: _eta_form("cm32", 32, ((4, 2), (8, 2)), -4),
    "cm27": lambda: _eta_form("cm27", 27, ((3, 2), (9, 2)), -3),
}

BUILTIN_LABELS = tuple(sorted(_BUILTIN_BUILDERS))


def _decode_int(v) -> int:
    """JSON numbers are exact only to 53 bits; larger values arrive as strings."""
    if isinstance(v, bool):
        raise ValueError("boolean is not a coefficient")
    if isinstance(v, int):
        return v
    if isinstance(v, str):
        return int(v, 10)
    raise ValueError(f"not an exact integer: {v!r}")


def parse_newform_record(record: dict) -> ModularForm:
    for key in ("label", "level", "weight"):
        if key not in record:
            raise ValueError(f"newform record missing {key!r}")
    label = str(record["label"])
    level = int(record["level"])
    weight = int(record["weight"])
    is_cm = bool(record.get("cm", False))
    cm_disc = record.get("cm_disc")
    if "ap" in record:
        ap = {int(p): _decode_int(v) for p, v in record["ap"].items()}
        form = ModularForm(
            label, level, weight, ap=ap, is_cm=is_cm, cm_disc=cm_disc
        )
        for p, cp in ap.items():
            if level % p != 0 and cp * cp > 4 * p ** (weight - 1):
                raise DeligneBoundError(label, p, cp)
    elif "an" in record:
        an = [_decode_int(v) for v in record["an"]]
        form = ModularForm(
            label, level, weight, an=an, is_cm=is_cm, cm_disc=cm_disc
        )
        form.check_deligne(form.precision)
    else:
        raise ValueError(f"{label}: record needs 'ap' or 'an'")
    return form


def ingest_newforms(path: str | Path) -> list[ModularForm]:
    """Read a JSON-lines newform file; every record must validate."""
    forms = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: not valid JSON ({exc})") from exc
            try:
                forms.append(parse_newform_record(record))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return forms


class FormRegistry:
    """Label -> form resolution with a write-through coefficient cache."""

    def __init__(self, cache_dir: str | Path | None = None):
        self.cache_dir = Path(cache_dir) if cache_dir else cache_mod.default_cache_dir()
        self._forms: dict[str, ModularForm] = {}

    def labels(self) -> list[str]:
        return sorted(set(self._forms) | set(_BUILTIN_BUILDERS))

    def add(self, form: ModularForm) -> None:
        self._forms[form.label] = form

    def ingest(self, path: str | Path) -> list[ModularForm]:
        forms = ingest_newforms(path)
        for form in forms:
            self.add(form)
        return forms

    def get(self, label: str, precision: int = 0) -> ModularForm:
        form = self._forms.get(label)
        if form is None:
            if label not in _BUILTIN_BUILDERS:
                raise KeyError(f"unknown form label {label!r}")
            form = _BUILTIN_BUILDERS[label]()
            self._forms[label] = form
        if precision > form.precision:
            cached = cache_mod.load_coeffs(self.cache_dir, label, precision)
            if cached is not None:
                form.seed_coefficients(cached)
            else:
                form.ensure(precision)
                cache_mod.save_coeffs(self.cache_dir, label, form.coefficients(precision))
        return form

    def pair(self, label_f: str, label_g: str, precision: int = 0) -> FormPair:
        return FormPair(self.get(label_f, precision), self.get(label_g, precision))

    def warm(self, labels, precision: int) -> list[Path]:
        """Materialize cache files; idempotent, atomic replace on write."""
        paths = []
        for label in labels:
            form = self.get(label, precision)
            path = cache_mod.coeff_path(self.cache_dir, label, precision)
            if not path.exists():
                cache_mod.save_coeffs(
                    self.cache_dir, label, form.coefficients(precision)
                )
            paths.append(path)
        return paths
