from fractions import Fraction

import pytest

from corpus import CORPUS, pipeline
from orbimirror.cohomology import (
    RingError,
    WeightedGrevlex,
    a_zero,
    c1_class,
    binomial_relation_vectors,
    graded_dims,
    groebner_basis,
    is_nef,
    lattice_ideal_groebner,
    normal_form,
    normalized_volume,
    poly_mul,
    presentation,
    quotient_ring,
    vector_space_dim,
)
from orbimirror.fan import StackyFan, extend


def test_presentation_p1():
    _, _, ring, _ = pipeline("P1")
    assert ring.dim == 2
    assert ring.graded_dims() == {Fraction(0): 1, Fraction(1): 1}


def test_presentation_p2():
    _, _, ring, _ = pipeline("P2")
    assert ring.dim == 3
    assert ring.graded_dims() == {Fraction(0): 1, Fraction(1): 1, Fraction(2): 1}


def test_presentation_p112():
    _, _, ring, _ = pipeline("P112")
    assert ring.dim == 4
    assert ring.graded_dims() == {Fraction(0): 1, Fraction(1): 2, Fraction(2): 1}


def test_presentation_f2():
    _, _, ring, _ = pipeline("F2")
    assert ring.dim == 4
    assert ring.graded_dims() == {Fraction(0): 1, Fraction(1): 2, Fraction(2): 1}


def test_vector_space_dim_and_volume():
    for name, expected in {"P1": 2, "P2": 3, "P112": 4, "F2": 4, "P1113": 6}.items():
        ext, _, ring, _ = pipeline(name)
        assert vector_space_dim(ring) == expected
        assert normalized_volume(ext) == expected


def test_volume_refuses_non_nef():
    f3 = extend(StackyFan(2, [(1, 0), (0, 1), (-1, -3), (0, -1)],
                          [(0, 1), (1, 2), (2, 3), (3, 0)]))
    assert not is_nef(f3)
    with pytest.raises(RingError, match="nef"):
        normalized_volume(f3)


def test_infinite_dimensional_reported():
    ring = quotient_ring(("x", "y"), (1, 1), {"gens": [{(1, 1): Fraction(1)}]})
    assert not ring.finite
    with pytest.raises(RingError, match="infinite"):
        ring.dim


def test_multiplication_by_one_is_identity():
    _, _, ring, _ = pipeline("P112")
    mat = ring.multiplication_matrix(ring.one())
    n = ring.dim
    assert mat == tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def test_p1_hyperplane_squares_to_zero():
    _, _, ring, _ = pipeline("P1")
    h = ring.class_of_var(0)
    assert ring.mul(h, h) == ring.zero_class()


def test_a_infinity_p112():
    _, _, ring, _ = pipeline("P112")
    diag = [row[i] for i, row in enumerate(ring.a_infinity())]
    assert sorted(diag) == [0, 1, 1, 2]


def test_multiplication_matrices_commute():
    _, _, ring, _ = pipeline("P112")
    mats = [ring.multiplication_matrix(ring.class_of_var(i)) for i in range(ring.nvars)]

    def matmul(a, b):
        return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(len(b)))
                           for j in range(len(b[0]))) for i in range(len(a)))

    for a in mats:
        for b in mats:
            assert matmul(a, b) == matmul(b, a)


def test_divisor_classes_nilpotent():
    for name in CORPUS:
        _, _, ring, _ = pipeline(name)
        for i in range(ring.nvars):
            v = ring.class_of_var(i)
            power = v
            for _ in range(ring.dim + 1):
                power = ring.mul(power, v)
            assert power == ring.zero_class()


def test_top_pairing_examples():
    _, _, ring1, _ = pipeline("P1")
    h = ring1.class_of_var(0)
    assert ring1.top_pairing(ring1.one(), h) == 1
    assert ring1.top_pairing(ring1.one(), ring1.one()) == 0
    _, _, ring2, _ = pipeline("P2")
    h2 = ring2.class_of_var(0)
    assert ring2.top_pairing(h2, h2) == 1


def test_pairing_nondegenerate_and_graded_symmetry():
    for name in CORPUS:
        _, _, ring, _ = pipeline(name)
        assert ring.pairing_nondegenerate()
        dims = ring.graded_dims()
        top = ring.top_degree()
        for q, d in dims.items():
            assert dims.get(top - q) == d


def _staircase_oracle(ring):
    """Graded dimensions by naive linear algebra on the raw generators."""
    from orbimirror.cohomology import _rank, poly_mul

    gens = [g for fam in ring.generators.values() for g in fam]
    weights = ring.order.weights
    top_w = max(sum(e * w for e, w in zip(m, weights)) for m in ring.std_monomials)
    bound = 2 * top_w + max(weights)
    monos = [()]
    by_weight = {}

    def rec(prefix, idx, left):
        if idx == ring.nvars:
            m = tuple(prefix)
            by_weight.setdefault(sum(e * w for e, w in zip(m, weights)), []).append(m)
            return
        w = weights[idx]
        for e in range(left // w + 1):
            rec(prefix + [e], idx + 1, left - e * w)

    rec([], 0, bound)
    dims = {}
    for w, monomials in sorted(by_weight.items()):
        monomials = sorted(monomials)
        index = {m: k for k, m in enumerate(monomials)}
        rows = []
        for g in gens:
            gw = sum(e * ww for e, ww in zip(next(iter(g)), weights))
            need = w - gw
            if need < 0:
                continue
            for m in by_weight.get(need, []):
                prod = poly_mul({m: Fraction(1)}, g)
                row = [Fraction(0)] * len(monomials)
                for mono, c in prod.items():
                    row[index[mono]] = c
                rows.append(row)
        rank = _rank(rows) if rows else 0
        dims[w] = len(monomials) - rank
    return dims


def test_staircase_oracle_matches_groebner():
    for name in ("P1", "P2", "P112", "F2"):
        _, _, ring, _ = pipeline(name)
        oracle = _staircase_oracle(ring)
        weights = ring.order.weights
        counted = {}
        for m in ring.std_monomials:
            w = sum(e * ww for e, ww in zip(m, weights))
            counted[w] = counted.get(w, 0) + 1
        for w, d in counted.items():
            assert oracle.get(w, 0) == d, (name, w)
        top_w = max(counted)
        for w, d in oracle.items():
            if w > top_w:
                assert d == 0, (name, w)


def test_lattice_ideal_saturation_adds_generators():
    # Twisted cubic: the basis binomials xz - y^2, yw - z^2 do not generate the
    # lattice ideal; saturation must find xw - yz (relation (1, -1, -1, 1)).
    gb = lattice_ideal_groebner([(1, -2, 1, 0), (0, 1, -2, 1)], (1, 1, 1, 1))
    vectors = {tuple(v) for v in binomial_relation_vectors(gb)}
    vectors |= {tuple(-x for x in v) for v in vectors}
    assert (1, -1, -1, 1) in vectors
    # and the basis relations are still present (possibly negated)
    assert (1, -2, 1, 0) in vectors and (0, 1, -2, 1) in vectors


def test_c1_and_a_zero_shapes():
    _, _, ring, _ = pipeline("P2")
    c1 = c1_class(ring)
    assert ring.class_degree(c1) == 1
    mat = a_zero(ring)
    assert len(mat) == ring.dim
    # -c1 cup is nilpotent: cubing it must vanish on P2
    def matmul(a, b):
        return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(len(b)))
                           for j in range(len(b[0]))) for i in range(len(a)))

    cube = matmul(mat, matmul(mat, mat))
    assert all(x == 0 for row in cube for x in row)


def test_groebner_reduced_basis_is_canonical():
    order = WeightedGrevlex((1, 1))
    gens = [{(1, 0): Fraction(1), (0, 1): Fraction(-1)},
            {(1, 1): Fraction(1)}]
    gb1 = groebner_basis(gens, order)
    gb2 = groebner_basis(list(reversed(gens)), order)
    assert gb1 == gb2
    rem = normal_form({(2, 0): Fraction(1)},
                      [(max(g, key=order.key), g[max(g, key=order.key)], g) for g in gb1],
                      order)
    assert rem == {}
