"""Truncated I-functions, mirror maps, and operator annihilation checks.

A LogSeries is a finite sum of terms

    c * chi^beta * (log chi_1)^{k_1} .. (log chi_r)^{k_r} * z^q * (log z)^j

with c a cohomology class (coefficient vector over the ring's standard
monomials), beta in Z^{r+e}_{>=0}, q rational. Logarithms of the extension
coordinates chi_{r+1}.. never occur. The truncation order N means every
coefficient with total chi-degree <= N is complete.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .cohomology import GradedQuotientRing
from .operators import (
    LogDiffOp,
    dbar_class,
    pbar_class,
    rho_bar_class,
    sector_class,
)
from .picard import ExtendedPicardData, MoriData


class SeriesError(ValueError):
    pass


TermKey = tuple  # (beta: tuple[int], logk: tuple[int], q: Fraction, j: int)


@dataclass(frozen=True)
class LogSeries:
    r: int
    e: int
    dim: int
    terms: dict = field(default_factory=dict)
    order: int | None = None

    def __post_init__(self):
        clean = {}
        for key, vec in self.terms.items():
            vec = tuple(Fraction(x) for x in vec)
            if any(vec):
                clean[key] = vec
        object.__setattr__(self, "terms", clean)

    def chi_degree(self, key) -> int:
        return sum(key[0])

    def add(self, other: "LogSeries") -> "LogSeries":
        out = dict(self.terms)
        for key, vec in other.terms.items():
            cur = out.get(key)
            if cur is None:
                out[key] = vec
            else:
                s = tuple(a + b for a, b in zip(cur, vec))
                if any(s):
                    out[key] = s
                else:
                    del out[key]
        order = _min_order(self.order, other.order)
        return LogSeries(self.r, self.e, self.dim, out, order)

    def scale(self, c) -> "LogSeries":
        c = Fraction(c)
        return LogSeries(self.r, self.e, self.dim,
                         {k: tuple(x * c for x in v) for k, v in self.terms.items()},
                         self.order)

    def truncate(self, order: int) -> "LogSeries":
        kept = {k: v for k, v in self.terms.items() if sum(k[0]) <= order}
        return LogSeries(self.r, self.e, self.dim, kept, order)

    def is_zero(self) -> bool:
        return not self.terms

    def max_z_exponent(self):
        return max((k[2] for k in self.terms), default=None)

    def term_list(self):
        out = []
        for key in sorted(self.terms, key=lambda k: (sum(k[0]), k[0], k[1], k[2], k[3])):
            beta, logk, q, j = key
            out.append({
                "chi_exponents": list(beta),
                "log_chi_exponents": list(logk),
                "z_exponent": q,
                "log_z_exponent": j,
                "class": list(self.terms[key]),
            })
        return out


def _min_order(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def series_one(ring: GradedQuotientRing, r, e, order=None) -> LogSeries:
    key = ((0,) * (r + e), (0,) * r, Fraction(0), 0)
    return LogSeries(r, e, ring.dim, {key: ring.one()}, order)


def series_mul(a: LogSeries, b: LogSeries, ring: GradedQuotientRing) -> LogSeries:
    out: dict = {}
    for (b1, k1, q1, j1), v1 in a.terms.items():
        for (b2, k2, q2, j2), v2 in b.terms.items():
            key = (tuple(x + y for x, y in zip(b1, b2)),
                   tuple(x + y for x, y in zip(k1, k2)), q1 + q2, j1 + j2)
            prod = ring.mul(v1, v2)
            cur = out.get(key)
            if cur is None:
                if any(prod):
                    out[key] = prod
            else:
                s = tuple(x + y for x, y in zip(cur, prod))
                if any(s):
                    out[key] = s
                else:
                    del out[key]
    return LogSeries(a.r, a.e, a.dim, out, _min_order(a.order, b.order))


# -- operator action -----------------------------------------------------------


def apply_operator(op: LogDiffOp, series: LogSeries, ring: GradedQuotientRing) -> LogSeries:
    """Term-by-term action of a normal-ordered operator on a log series."""
    if (op.r, op.e) != (series.r, series.e):
        raise SeriesError("operator and series shapes differ")
    r, e = op.r, op.e
    total: dict = {}

    def put(key, vec):
        cur = total.get(key)
        if cur is None:
            if any(vec):
                total[key] = vec
        else:
            s = tuple(a + b for a, b in zip(cur, vec))
            if any(s):
                total[key] = s
            else:
                del total[key]

    for (obeta, ok, s_exp, t_exp, u_exp), coeff in op.terms.items():
        current = {k: v for k, v in series.terms.items()}
        for _ in range(u_exp):
            current = _act_e(current)
        for b in range(e):
            for _ in range(t_exp[b]):
                current = _act_del(current, r, b)
        for a in range(r):
            for _ in range(s_exp[a]):
                current = _act_theta(current, a)
        for (beta, logk, q, j), vec in current.items():
            key = (tuple(x + y for x, y in zip(beta, obeta)), logk, q + ok, j)
            put(key, tuple(x * coeff for x in vec))
    return LogSeries(series.r, series.e, series.dim, total, series.order)


def _acc(out, key, vec):
    cur = out.get(key)
    if cur is None:
        if any(vec):
            out[key] = vec
    else:
        s = tuple(a + b for a, b in zip(cur, vec))
        if any(s):
            out[key] = s
        else:
            del out[key]


def _act_theta(terms, a):
    """z chi_a d/dchi_a on each term."""
    out: dict = {}
    for (beta, logk, q, j), vec in terms.items():
        if beta[a]:
            _acc(out, (beta, logk, q + 1, j), tuple(x * beta[a] for x in vec))
        if logk[a]:
            logk2 = tuple(x - int(i == a) for i, x in enumerate(logk))
            _acc(out, (beta, logk2, q + 1, j), tuple(x * logk[a] for x in vec))
    return out


def _act_del(terms, r, b):
    """z d/dchi_{r+b} on each term."""
    out: dict = {}
    for (beta, logk, q, j), vec in terms.items():
        if beta[r + b]:
            beta2 = tuple(x - int(i == r + b) for i, x in enumerate(beta))
            _acc(out, (beta2, logk, q + 1, j), tuple(x * beta[r + b] for x in vec))
    return out


def _act_e(terms):
    """z^2 d/dz on each term."""
    out: dict = {}
    for (beta, logk, q, j), vec in terms.items():
        if q:
            _acc(out, (beta, logk, q + 1, j), tuple(x * q for x in vec))
        if j:
            _acc(out, (beta, logk, q + 1, j - 1), tuple(x * j for x in vec))
    return out


# -- degree enumeration and hypergeometric factors ------------------------------


def enumerate_degrees(mori: MoriData, order: int) -> list[dict]:
    """All d in K^eff with sum_a p_a(d) <= order, with sectors v(d).

    Effective degrees are parametrized by their p-pairing vectors beta in
    Z^{rank}_{>=0} (d = sum beta_a q_a), which become the chi-exponents.
    """
    rank = mori.picard.rank
    out = []

    def rec(prefix, remaining):
        if len(prefix) == rank:
            beta = tuple(prefix)
            if mori.in_k_eff(beta):
                out.append({
                    "beta": beta,
                    "pairings": mori.d_pairings(beta),
                    "sector": mori.v_of(beta),
                })
            return
        for c in range(remaining + 1):
            rec(prefix + [c], remaining - c)

    rec([], order)
    out.sort(key=lambda t: (sum(t["beta"]), t["beta"]))
    return out


def _invert_linear(ring: GradedQuotientRing, cls, w: Fraction):
    """(cls + w z)^{-1} as {z-exponent: class}; cls nilpotent, w nonzero."""
    if w == 0:
        raise SeriesError("cannot invert a scalar-zero factor")
    out = {}
    power = ring.one()
    k = 0
    sign = 1
    while any(power):
        out[Fraction(-k - 1)] = tuple(sign * x / (w ** (k + 1)) for x in power)
        power = ring.mul(power, cls)
        k += 1
        sign = -sign
    return out


def _laurent_mul(a: dict, b: dict, ring: GradedQuotientRing) -> dict:
    out: dict = {}
    for q1, v1 in a.items():
        for q2, v2 in b.items():
            prod = ring.mul(v1, v2)
            if not any(prod):
                continue
            q = q1 + q2
            cur = out.get(q)
            if cur is None:
                out[q] = prod
            else:
                s = tuple(x + y for x, y in zip(cur, prod))
                if any(s):
                    out[q] = s
                else:
                    del out[q]
    return out


def hypergeometric_factor(data: ExtendedPicardData, ring: GradedQuotientRing,
                          degree: dict) -> dict:
    """The product over i of the telescoped factor ratios, cupped with 1_{v(d)}.

    Returns {z-exponent: class}. Extension indices carry no divisor class; a
    scalar-zero denominator factor (impossible on K^eff) raises SeriesError.
    """
    ext = data.ext
    acc = {Fraction(0): sector_class(data, ring, degree["sector"])}
    for i in range(ext.n):
        c = Fraction(degree["pairings"][i])
        ceil_c = -((-c.numerator) // c.denominator)
        dbar = dbar_class(data, ring, i)
        if i >= ext.m and (c.denominator != 1 or c < 0):
            raise SeriesError("extension pairing not a nonnegative integer on K^eff")
        if ceil_c >= 1:
            for s in range(ceil_c):
                w = c - s
                if w == 0:
                    raise SeriesError("uncancelled scalar-zero denominator factor")
                if not any(dbar):
                    acc = {q - 1: tuple(x / w for x in v) for q, v in acc.items()}
                else:
                    acc = _laurent_mul(acc, _invert_linear(ring, dbar, w), ring)
        else:
            for nu in range(ceil_c, 0):
                w = c - nu
                lin = {Fraction(1): tuple(Fraction(w) * x for x in ring.one())}
                if any(dbar):
                    lin[Fraction(0)] = dbar
                acc = _laurent_mul(acc, lin, ring)
        if not acc:
            break
    return acc


# -- the I-function ---------------------------------------------------------------


def log_prefactor(data: ExtendedPicardData, ring: GradedQuotientRing) -> LogSeries:
    """exp(sum_{a<=r} pbar_a log chi_a / z), expanded finitely by nilpotency."""
    r, e = data.r, data.e
    out = series_one(ring, r, e)
    for a in range(r):
        pb = pbar_class(data, ring, a)
        terms = {((0,) * (r + e), (0,) * r, Fraction(0), 0): ring.one()}
        power = ring.one()
        k = 1
        while True:
            power = ring.mul(power, pb)
            if not any(power):
                break
            logk = tuple(k if i == a else 0 for i in range(r))
            terms[((0,) * (r + e), logk, Fraction(-k), 0)] = tuple(
                x / factorial(k) for x in power
            )
            k += 1
        out = series_mul(out, LogSeries(r, e, ring.dim, terms), ring)
    return out


def i_function(data: ExtendedPicardData, ring: GradedQuotientRing,
               mori: MoriData, order: int) -> LogSeries:
    """Truncated I-function: prefactor times the hypergeometric sum over K^eff."""
    r, e = data.r, data.e
    body: dict = {}
    for degree in enumerate_degrees(mori, order):
        beta = degree["beta"]
        if any(b < 0 for b in beta):
            raise SeriesError("negative chi-exponent on an effective degree")
        factor = hypergeometric_factor(data, ring, degree)
        for q, vec in factor.items():
            key = (tuple(beta), (0,) * r, q, 0)
            _acc(body, key, vec)
    series = LogSeries(r, e, ring.dim, body, order)
    return series_mul(log_prefactor(data, ring), series, ring).truncate(order)


@dataclass(frozen=True)
class MirrorMap:
    log_linear: tuple          # pbar_a classes, a = 1..r
    analytic: dict             # chi-exponent tuple -> class
    order: int

    def analytic_list(self):
        return [{"chi_exponents": list(k), "class": list(v)}
                for k, v in sorted(self.analytic.items())]


def mirror_map(series: LogSeries, ring: GradedQuotientRing,
               data: ExtendedPicardData) -> MirrorMap:
    """tau from the z^{-1} coefficient of I - 1; validates the 1 + tau/z + o(1/z) shape."""
    r, e = series.r, series.e
    one_key = ((0,) * (r + e), (0,) * r, Fraction(0), 0)
    rest = dict(series.terms)
    const = rest.pop(one_key, None)
    if const is None or const != ring.one():
        raise SeriesError("I-function does not start with the class 1")
    bad = [k for k in rest if k[2] > -1]
    if bad:
        raise SeriesError(f"asymptotic shape violated: z-exponents {sorted({k[2] for k in bad})} > -1")
    log_linear = []
    for a in range(r):
        key = ((0,) * (r + e), tuple(int(i == a) for i in range(r)), Fraction(-1), 0)
        log_linear.append(series.terms.get(key, ring.zero_class()))
    analytic = {}
    for (beta, logk, q, j), vec in rest.items():
        if q == -1 and j == 0 and not any(logk) and any(beta):
            analytic[beta] = vec
    for vec in list(analytic.values()) + log_linear:
        deg = _max_component_degree(ring, vec)
        if deg is not None and deg > 1:
            raise SeriesError("mirror map has a component outside H^{<=2}")
    return MirrorMap(tuple(log_linear), analytic, series.order)


def _max_component_degree(ring: GradedQuotientRing, vec):
    degs = [ring.mono_degree(m) for m, c in zip(ring.std_monomials, vec) if c]
    return max(degs) if degs else None


def tilde_i(series: LogSeries, ring: GradedQuotientRing,
            data: ExtendedPicardData) -> LogSeries:
    """I-tilde: apply z^mu (scale degree-q pieces by z^q), then z^{-rho-bar}."""
    r, e = series.r, series.e
    graded: dict = {}
    for (beta, logk, q, j), vec in series.terms.items():
        by_deg: dict = {}
        for mono, coeff in zip(ring.std_monomials, vec):
            if coeff:
                d = ring.mono_degree(mono)
                by_deg.setdefault(d, [Fraction(0)] * ring.dim)
        for idx, (mono, coeff) in enumerate(zip(ring.std_monomials, vec)):
            if coeff:
                by_deg[ring.mono_degree(mono)][idx] = coeff
        for d, v in by_deg.items():
            _acc(graded, (beta, logk, q + d, j), tuple(v))
    scaled = LogSeries(r, e, ring.dim, graded, series.order)
    rho = rho_bar_class(data, ring)
    terms = {((0,) * (r + e), (0,) * r, Fraction(0), 0): ring.one()}
    power = ring.one()
    k = 1
    sign = -1
    while True:
        power = ring.mul(power, rho)
        if not any(power):
            break
        terms[((0,) * (r + e), (0,) * r, Fraction(0), k)] = tuple(
            Fraction(sign) * x / factorial(k) for x in power
        )
        k += 1
        sign = -sign
    zrho = LogSeries(r, e, ring.dim, terms, series.order)
    return series_mul(scaled, zrho, ring)


@dataclass(frozen=True)
class AnnihilationReport:
    checked_order: int
    residual_terms: tuple
    ok: bool


def annihilation_check(op: LogDiffOp, series: LogSeries,
                       ring: GradedQuotientRing) -> AnnihilationReport:
    """Apply op to the series; the residual must vanish on all complete degrees.

    Degrees g of the output are complete when g + (max chi-lowering of op) <= N,
    since del-factors shift chi-degree down by at most their total order.
    """
    if series.order is None:
        raise SeriesError("series carries no truncation order")
    lower = max((sum(t) for (_, _, _, t, _) in op.terms), default=0)
    bound = series.order - lower
    residual = apply_operator(op, series, ring)
    offending = tuple(
        {"key": key, "class": list(vec)}
        for key, vec in sorted(residual.terms.items(),
                               key=lambda kv: (sum(kv[0][0]), kv[0][0], kv[0][1], kv[0][2], kv[0][3]))
        if sum(key[0]) <= bound
    )
    return AnnihilationReport(bound, offending, not offending)
