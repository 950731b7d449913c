from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbimirror.linalg import (
    IntMatrix,
    LinAlgError,
    clear_denominators,
    hermite_row_basis,
    kernel_basis,
    normalized_simplex_volume,
    reduce_mod_lattice,
    saturate,
    smith_normal_form,
    splitting_maps,
    unimodular_inverse,
)

small_matrices = st.integers(1, 4).flatmap(
    lambda r: st.integers(1, 4).flatmap(
        lambda c: st.lists(
            st.lists(st.integers(-6, 6), min_size=c, max_size=c),
            min_size=r, max_size=r,
        )
    )
)


def test_snf_diag_2_3():
    m = IntMatrix([[2, 0], [0, 3]])
    snf = smith_normal_form(m)
    assert snf.diagonal() == (1, 6)
    assert snf.u * m * snf.v == snf.s
    assert snf.u.is_unimodular() and snf.v.is_unimodular()


def test_snf_identity():
    m = IntMatrix.identity(3)
    snf = smith_normal_form(m)
    assert snf.s == m and snf.u == m and snf.v == m


def test_snf_p112_ray_matrix():
    # the P(1,1,2) ray matrix, 2x3: S = [diag(1,1) | 0]
    m = IntMatrix([[1, 0, -1], [0, 1, -2]])
    snf = smith_normal_form(m)
    assert snf.diagonal() == (1, 1)
    assert all(snf.s[i, 2] == 0 for i in range(2))
    assert snf.u * m * snf.v == snf.s


@settings(max_examples=60, deadline=None)
@given(small_matrices)
def test_snf_properties(rows):
    m = IntMatrix(rows)
    snf = smith_normal_form(m)
    assert snf.u * m * snf.v == snf.s
    assert snf.u.is_unimodular() and snf.v.is_unimodular()
    diag = snf.diagonal()
    assert all(d >= 0 for d in diag)
    for a, b in zip(diag, diag[1:]):
        if a == 0:
            assert b == 0
        else:
            assert b % a == 0
    # off-diagonal entries vanish
    for i in range(m.rows):
        for j in range(m.cols):
            if i != j:
                assert snf.s[i, j] == 0


def test_kernel_p1():
    assert kernel_basis(IntMatrix([[1, -1]])) == [(1, 1)]


def test_kernel_p112_extended():
    a = IntMatrix([[1, 0, -1, 0], [0, 1, -2, -1]])
    basis = kernel_basis(a)
    assert basis == [(1, 0, 1, -2), (0, 1, 0, 1)]
    for vec in basis:
        assert all(sum(a[i, j] * vec[j] for j in range(4)) == 0 for i in range(2))


def test_kernel_invertible_is_trivial():
    assert kernel_basis(IntMatrix([[2, 1], [1, 1]])) == []


@settings(max_examples=60, deadline=None)
@given(small_matrices)
def test_kernel_properties(rows):
    m = IntMatrix(rows)
    basis = kernel_basis(m)
    snf = smith_normal_form(m)
    assert len(basis) == m.cols - snf.rank()
    for vec in basis:
        assert all(sum(m[i, j] * vec[j] for j in range(m.cols)) == 0
                   for i in range(m.rows))


def test_splitting_p1():
    a = IntMatrix([[1, -1]])
    s, g = splitting_maps(a)
    t = (1, 1)
    assert sum(s[0, j] * t[j] for j in range(2)) == 1


def test_splitting_identity():
    s, g = splitting_maps(IntMatrix.identity(2))
    assert s is None
    assert g == IntMatrix.identity(2)


def test_splitting_p112_identities():
    a = IntMatrix([[1, 0, -1, 0], [0, 1, -2, -1]])
    s, g = splitting_maps(a)  # raises internally if any identity fails
    ker = kernel_basis(a)
    t = IntMatrix(list(zip(*ker)))
    assert s * t == IntMatrix.identity(2)
    assert a * g == IntMatrix.identity(2)


def test_splitting_rejects_non_surjective():
    with pytest.raises(LinAlgError, match="invariant factors"):
        splitting_maps(IntMatrix([[2, 0], [0, 2]]))


def test_saturate_examples():
    assert saturate([(2, 0), (0, 2)]) == [(1, 0), (0, 1)]
    assert saturate([(1, 1)]) == [(1, 1)]
    assert saturate([(0, 0)]) == []


def test_saturate_matches_kernel_characterization_p112():
    # Theta(PL) for P(1,1,2): kernel of pairing with the distinguished relation
    # (-1, 0, -1, 2); saturating the raw PL image must give the same lattice.
    k = kernel_basis(IntMatrix([[-1, 0, -1, 2]]))
    doubled = [tuple(2 * x for x in v) for v in k] + [k[0]]
    assert saturate(doubled + k) == k


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(-5, 5), min_size=3, max_size=3),
                min_size=1, max_size=3))
def test_saturate_idempotent(vectors):
    once = saturate(vectors)
    assert saturate(once) == once


def test_volume_examples():
    assert normalized_simplex_volume([(1, 0), (0, 1)]) == 1
    assert normalized_simplex_volume([(1, 0), (-1, -2)]) == 2
    assert normalized_simplex_volume([(1,)]) + normalized_simplex_volume([(-1,)]) == 2


def test_volume_requires_square():
    with pytest.raises(LinAlgError):
        normalized_simplex_volume([(1, 0)])


def test_hermite_reduce_mod_lattice():
    basis = hermite_row_basis([(2, 1), (0, 3)])
    rep = reduce_mod_lattice((5, 5), basis)
    assert reduce_mod_lattice(rep, basis) == rep


def test_unimodular_inverse_rejects_singular():
    with pytest.raises(LinAlgError):
        unimodular_inverse(IntMatrix([[2, 0], [0, 1]]))


def test_clear_denominators():
    assert clear_denominators([Fraction(1, 2), Fraction(-3, 4)]) == (2, -3)
    assert clear_denominators([0, 0]) == (0, 0)
