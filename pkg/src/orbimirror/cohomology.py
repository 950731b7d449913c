"""Graded quotient-ring presentations of orbifold cohomology.

A small exact multivariate polynomial engine (weighted grevlex Buchberger over
Fraction) drives everything: lattice-ideal saturation per maximal cone, the
global presentation, standard monomials, multiplication matrices and the
top-degree pairing. The rational grading is cleared to positive integer
weights for the monomial order, so standard monomials stay homogeneous.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .fan import ExtendedStackyFan
from .linalg import IntMatrix, normalized_simplex_volume

Mono = tuple[int, ...]
Poly = dict[Mono, Fraction]


class RingError(ValueError):
    pass


class ResourceLimitError(RuntimeError):
    pass


STD_MONOMIAL_CAP = 200000


# -- monomial order ----------------------------------------------------------


class WeightedGrevlex:
    """Weighted degree first, grevlex tie-break, optional elimination block.

    With elim_block = k the first k exponents dominate (sum-lex), which makes
    the order eliminate those variables.
    """

    def __init__(self, weights, elim_block: int = 0):
        self.weights = tuple(int(w) for w in weights)
        self.elim = int(elim_block)
        if any(w <= 0 for w in self.weights):
            raise RingError("monomial order weights must be positive")

    def key(self, m: Mono):
        head = sum(m[: self.elim])
        tail = m[self.elim:]
        w = self.weights[self.elim:]
        deg = sum(e * wi for e, wi in zip(tail, w))
        return (head, deg, tuple(-e for e in reversed(tail)))


def _mono_mul(a: Mono, b: Mono) -> Mono:
    return tuple(x + y for x, y in zip(a, b))


def _mono_divides(a: Mono, b: Mono) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _mono_div(a: Mono, b: Mono) -> Mono:
    return tuple(x - y for x, y in zip(a, b))


def _mono_lcm(a: Mono, b: Mono) -> Mono:
    return tuple(max(x, y) for x, y in zip(a, b))


def poly_add(p: Poly, q: Poly) -> Poly:
    out = dict(p)
    for m, c in q.items():
        nc = out.get(m, Fraction(0)) + c
        if nc:
            out[m] = nc
        else:
            out.pop(m, None)
    return out


def poly_scale(p: Poly, c) -> Poly:
    c = Fraction(c)
    return {m: v * c for m, v in p.items()} if c else {}


def poly_sub(p: Poly, q: Poly) -> Poly:
    return poly_add(p, poly_scale(q, -1))


def poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = _mono_mul(m1, m2)
            nc = out.get(m, Fraction(0)) + c1 * c2
            if nc:
                out[m] = nc
            else:
                out.pop(m, None)
    return out


def poly_const(nvars: int, c=1) -> Poly:
    return {tuple(0 for _ in range(nvars)): Fraction(c)}


def _lead(p: Poly, order: WeightedGrevlex) -> tuple[Mono, Fraction]:
    m = max(p, key=order.key)
    return m, p[m]


def normal_form(p: Poly, triples, order: WeightedGrevlex) -> Poly:
    """Full reduction of p modulo [(lead_mono, lead_coeff, poly), ...]."""
    rem: Poly = {}
    work = dict(p)
    while work:
        m, c = _lead(work, order)
        for lm, lc, g in triples:
            if _mono_divides(lm, m):
                factor = _mono_div(m, lm)
                ratio = c / lc
                scaled = {_mono_mul(factor, gm): gc * ratio for gm, gc in g.items()}
                work = poly_sub(work, scaled)
                break
        else:
            rem[m] = c
            del work[m]
    return rem


def groebner_basis(gens, order: WeightedGrevlex) -> list[Poly]:
    """Reduced monic Groebner basis (Buchberger; coprime-lead criterion)."""
    work = []
    for g in gens:
        g = {m: Fraction(c) for m, c in g.items() if c}
        if g:
            lm, lc = _lead(g, order)
            work.append((lm, lc, g))
    work.sort(key=lambda t: order.key(t[0]))
    pairs = [(i, j) for j in range(len(work)) for i in range(j)]
    while pairs:
        pairs.sort(key=lambda ij: order.key(_mono_lcm(work[ij[0]][0], work[ij[1]][0])),
                   reverse=True)
        i, j = pairs.pop()
        lmi, lci, gi = work[i]
        lmj, lcj, gj = work[j]
        if all(a == 0 or b == 0 for a, b in zip(lmi, lmj)):
            continue
        lcm = _mono_lcm(lmi, lmj)
        s1 = {_mono_mul(_mono_div(lcm, lmi), m): c / lci for m, c in gi.items()}
        s2 = {_mono_mul(_mono_div(lcm, lmj), m): c / lcj for m, c in gj.items()}
        s = normal_form(poly_sub(s1, s2), work, order)
        if s:
            lm, lc = _lead(s, order)
            work.append((lm, lc, s))
            pairs.extend((k, len(work) - 1) for k in range(len(work) - 1))
    # Minimalize: drop elements whose lead is divisible by another lead.
    keep = []
    for idx, (lm, lc, g) in enumerate(work):
        if any(k != idx and _mono_divides(work[k][0], lm)
               and (work[k][0] != lm or k < idx) for k in range(len(work))):
            continue
        keep.append((lm, lc, g))
    # Inter-reduce tails and normalize monic.
    reduced = []
    for idx, (lm, lc, g) in enumerate(keep):
        others = [t for k, t in enumerate(keep) if k != idx]
        nf = normal_form(g, others, order)
        if nf:
            m, c = _lead(nf, order)
            reduced.append({mm: cc / c for mm, cc in nf.items()})
    reduced.sort(key=lambda g: order.key(_lead(g, order)[0]))
    return reduced


def lattice_ideal_groebner(relations, weights) -> list[Poly]:
    """Reduced GB of the saturated lattice ideal of the relation vectors.

    Saturation with respect to the product of all variables uses one auxiliary
    inverse variable (t * x_1..x_k - 1) under an elimination order; the
    t-free part is the lattice ideal (Rabinowitsch trick).
    """
    k = len(weights)
    rels = [tuple(int(x) for x in r) for r in relations if any(r)]
    if not rels:
        return []
    elim_order = WeightedGrevlex((1,) + tuple(weights), elim_block=1)
    gens = []
    for r in rels:
        plus = (0,) + tuple(max(x, 0) for x in r)
        minus = (0,) + tuple(max(-x, 0) for x in r)
        gens.append({plus: Fraction(1), minus: Fraction(-1)})
    gens.append({(1,) + tuple(1 for _ in range(k)): Fraction(1),
                 (0,) * (k + 1): Fraction(-1)})
    gb = groebner_basis(gens, elim_order)
    kept = [{m[1:]: c for m, c in g.items()} for g in gb if all(m[0] == 0 for m in g)]
    return groebner_basis(kept, WeightedGrevlex(weights))


def binomial_relation_vectors(polys) -> list[tuple[int, ...]]:
    """Lattice vector u of each pure-difference binomial x^{u+} - x^{u-}."""
    out = []
    for g in polys:
        if len(g) != 2:
            raise RingError("lattice ideal generator is not a binomial")
        (m1, c1), (m2, c2) = sorted(g.items())
        if c1 * c2 >= 0:
            raise RingError("lattice ideal generator is not a pure difference")
        if c1 < 0:
            m1, m2 = m2, m1
        out.append(tuple(a - b for a, b in zip(m1, m2)))
    return out


# -- the graded quotient ring -------------------------------------------------


@dataclass(frozen=True)
class GradedQuotientRing:
    var_names: tuple[str, ...]
    degrees: tuple[Fraction, ...]
    order: WeightedGrevlex = field(repr=False)
    generators: dict = field(repr=False)
    groebner: tuple = field(repr=False)
    std_monomials: tuple[Mono, ...]
    finite: bool

    @property
    def nvars(self) -> int:
        return len(self.var_names)

    @property
    def dim(self) -> int:
        if not self.finite:
            raise RingError("quotient ring is infinite-dimensional")
        return len(self.std_monomials)

    def mono_degree(self, m: Mono) -> Fraction:
        return sum((e * d for e, d in zip(m, self.degrees)), Fraction(0))

    def graded_dims(self) -> dict[Fraction, int]:
        out: dict[Fraction, int] = {}
        for m in self.std_monomials:
            q = self.mono_degree(m)
            out[q] = out.get(q, 0) + 1
        return dict(sorted(out.items()))

    def _triples(self):
        out = []
        for g in self.groebner:
            lm = max(g, key=self.order.key)
            out.append((lm, g[lm], g))
        return out

    def nf(self, p: Poly) -> Poly:
        return normal_form(p, self._triples(), self.order)

    # classes are coefficient vectors over the standard monomials

    def class_of(self, p: Poly) -> tuple[Fraction, ...]:
        if not self.finite:
            raise RingError("quotient ring is infinite-dimensional")
        nf = self.nf(p)
        index = {m: i for i, m in enumerate(self.std_monomials)}
        vec = [Fraction(0)] * len(self.std_monomials)
        for m, c in nf.items():
            vec[index[m]] = c
        return tuple(vec)

    def class_of_var(self, i: int) -> tuple[Fraction, ...]:
        return self.class_of({tuple(int(j == i) for j in range(self.nvars)): Fraction(1)})

    def one(self) -> tuple[Fraction, ...]:
        return self.class_of(poly_const(self.nvars))

    def zero_class(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(0) for _ in self.std_monomials)

    def poly_of_class(self, vec) -> Poly:
        return {m: Fraction(c) for m, c in zip(self.std_monomials, vec) if c}

    def mul(self, u, v) -> tuple[Fraction, ...]:
        return self.class_of(poly_mul(self.poly_of_class(u), self.poly_of_class(v)))

    def add(self, u, v) -> tuple[Fraction, ...]:
        return tuple(Fraction(a) + Fraction(b) for a, b in zip(u, v))

    def scale(self, u, c) -> tuple[Fraction, ...]:
        c = Fraction(c)
        return tuple(Fraction(a) * c for a in u)

    def class_degree(self, vec) -> Fraction | None:
        degs = {self.mono_degree(m) for m, c in zip(self.std_monomials, vec) if c}
        if not degs:
            return Fraction(0)
        return degs.pop() if len(degs) == 1 else None

    def multiplication_matrix(self, vec) -> tuple[tuple[Fraction, ...], ...]:
        """Cup product by `vec` in the standard-monomial basis (columns = images)."""
        cols = [self.mul(vec, self.class_of({m: Fraction(1)})) for m in self.std_monomials]
        return tuple(zip(*cols))

    def a_infinity(self) -> tuple[tuple[Fraction, ...], ...]:
        n = self.dim
        return tuple(
            tuple(self.mono_degree(self.std_monomials[i]) if i == j else Fraction(0)
                  for j in range(n))
            for i in range(n)
        )

    def top_degree(self) -> Fraction:
        return max(self.mono_degree(m) for m in self.std_monomials)

    def top_pairing(self, u, v) -> Fraction:
        """Coefficient of the top standard monomial in u*v (top monomial pairs to 1)."""
        top = self.top_degree()
        tops = [m for m in self.std_monomials if self.mono_degree(m) == top]
        if len(tops) != 1:
            raise RingError(f"top degree is {len(tops)}-dimensional; pairing undefined")
        prod = self.nf(poly_mul(self.poly_of_class(u), self.poly_of_class(v)))
        return prod.get(tops[0], Fraction(0))

    def pairing_nondegenerate(self) -> bool:
        basis = [self.class_of({m: Fraction(1)}) for m in self.std_monomials]
        gram = [[self.top_pairing(u, v) for v in basis] for u in basis]
        return _rank(gram) == len(basis)


def _rank(rows) -> int:
    rows = [list(map(Fraction, r)) for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = 1 / rows[rank][col]
        rows[rank] = [x * inv for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def _std_monomials(gb, order: WeightedGrevlex, nvars: int):
    """Staircase below the GB leads, or None when infinite-dimensional."""
    leads = [max(g, key=order.key) for g in gb]
    for i in range(nvars):
        if not any(all(lm[j] == 0 for j in range(nvars) if j != i) for lm in leads):
            return None
    zero = tuple(0 for _ in range(nvars))
    seen = {zero}
    queue = [zero]
    out = []
    while queue:
        m = queue.pop()
        if any(_mono_divides(lm, m) for lm in leads):
            continue
        out.append(m)
        if len(out) > STD_MONOMIAL_CAP:
            raise ResourceLimitError(
                f"standard-monomial staircase exceeds {STD_MONOMIAL_CAP} elements"
            )
        for i in range(nvars):
            nxt = tuple(e + int(j == i) for j, e in enumerate(m))
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return tuple(sorted(out, key=order.key))


def quotient_ring(var_names, degrees, generator_families: dict) -> GradedQuotientRing:
    """Build a graded quotient ring from named generator families."""
    degrees = tuple(Fraction(d) for d in degrees)
    if any(d <= 0 for d in degrees):
        raise RingError("variable degrees must be positive")
    denom = 1
    for d in degrees:
        denom = denom * d.denominator // gcd(denom, d.denominator)
    weights = tuple(int(d * denom) for d in degrees)
    order = WeightedGrevlex(weights)
    gens = [g for fam in generator_families.values() for g in fam]
    gb = groebner_basis(gens, order)
    std = _std_monomials(gb, order, len(weights))
    return GradedQuotientRing(
        var_names=tuple(var_names),
        degrees=degrees,
        order=order,
        generators=generator_families,
        groebner=tuple(gb),
        std_monomials=std if std is not None else (),
        finite=std is not None,
    )


# -- the orbifold cohomology presentation -------------------------------------


def cone_lattice_groebner(ext: ExtendedStackyFan, cone) -> tuple[list[Poly], list[tuple[int, ...]]]:
    """Saturated lattice-ideal GB for one maximal cone, in the full variable set.

    Returns (binomial generators lifted to n variables, their relation vectors).
    """
    support = ext.generators_in_cone(cone)
    gens_vectors = ext.generators
    mat = [[gens_vectors[i][k] for i in support] for k in range(ext.d)]
    from .linalg import kernel_basis as _kb

    local_rels = _kb(IntMatrix(mat)) if support else []
    weights = [int(ext.degree(i) * _degree_denominator(ext)) for i in support]
    local_gb = lattice_ideal_groebner(local_rels, weights) if local_rels else []
    lifted_polys = []
    lifted_vectors = []
    for g in local_gb:
        poly = {}
        for m, c in g.items():
            full = [0] * ext.n
            for idx, e in zip(support, m):
                full[idx] = e
            poly[tuple(full)] = c
        lifted_polys.append(poly)
    for u in binomial_relation_vectors(local_gb):
        full = [0] * ext.n
        for idx, e in zip(support, u):
            full[idx] = e
        lifted_vectors.append(tuple(full))
    return lifted_polys, lifted_vectors


def _degree_denominator(ext: ExtendedStackyFan) -> int:
    denom = 1
    for i in range(ext.n):
        d = ext.degree(i)
        denom = denom * d.denominator // gcd(denom, d.denominator)
    return denom


def presentation(ext: ExtendedStackyFan) -> GradedQuotientRing:
    """H*_orb as Q[D_1..D_n] / (cone ideal + Euler forms + GP monomials)."""
    from .fan import generalized_primitive_collections

    n = ext.n
    cone_polys = []
    seen = set()
    for cone in ext.fan.max_cones:
        polys, _ = cone_lattice_groebner(ext, cone)
        for p in polys:
            key = tuple(sorted(p.items()))
            if key not in seen:
                seen.add(key)
                cone_polys.append(p)
    euler = []
    for k in range(ext.d):
        poly = {}
        for i in range(ext.m):
            coeff = ext.fan.rays[i][k]
            if coeff:
                poly[tuple(int(j == i) for j in range(n))] = Fraction(coeff)
        if poly:
            euler.append(poly)
    gp_monos = []
    for collection in generalized_primitive_collections(ext):
        mono = tuple(int(i in collection) for i in range(n))
        gp_monos.append({mono: Fraction(1)})
    names = tuple(f"D{i + 1}" for i in range(n))
    degrees = tuple(ext.degree(i) for i in range(n))
    ring = quotient_ring(
        names,
        degrees,
        {"cone": cone_polys, "euler": euler, "primitive": gp_monos},
    )
    if not ring.finite:
        raise RingError(
            "presentation is not finite-dimensional; input fan is likely not complete"
        )
    return ring


def vector_space_dim(ring: GradedQuotientRing) -> int:
    return ring.dim


def graded_dims(ring: GradedQuotientRing) -> dict[Fraction, int]:
    return ring.graded_dims()


def is_nef(ext: ExtendedStackyFan) -> bool:
    """Anticanonical nef test: every wall-relation coefficient sum is >= 0."""
    from .picard import wall_relations

    return all(sum(rel) >= 0 for rel in wall_relations(ext.fan))


def normalized_volume(ext: ExtendedStackyFan) -> int:
    """vol(Q) as the sum of |det| over maximal cones; requires a nef fan."""
    if not is_nef(ext):
        raise RingError("normalized_volume requires a nef fan (rho-bar not in Kbar)")
    total = 0
    for cone in ext.fan.max_cones:
        total += normalized_simplex_volume([ext.fan.rays[i] for i in cone])
    return total


def c1_class(ring: GradedQuotientRing, upto: int | None = None) -> tuple[Fraction, ...]:
    """Class of D_1 + ... + D_upto (default: all variables)."""
    n = ring.nvars if upto is None else upto
    poly = {}
    for i in range(n):
        poly[tuple(int(j == i) for j in range(ring.nvars))] = Fraction(1)
    return ring.class_of(poly)


def a_zero(ring: GradedQuotientRing, upto: int | None = None):
    """Matrix of -c1 cup (the residue-connection constant part)."""
    c1 = c1_class(ring, upto)
    return ring.multiplication_matrix(ring.scale(c1, -1))
