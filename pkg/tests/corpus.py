"""Shared corpus fixtures: the desk-scale fans every suite runs against."""

from orbimirror.cohomology import presentation
from orbimirror.fan import StackyFan, extend
from orbimirror.picard import choose_basis_p, extended_pl_and_pic, mori_lattices

P1 = dict(rank=1, rays=[(1,), (-1,)], cones=[(0,), (1,)])
P2 = dict(rank=2, rays=[(1, 0), (0, 1), (-1, -1)], cones=[(0, 1), (1, 2), (0, 2)])
P112 = dict(rank=2, rays=[(1, 0), (0, 1), (-1, -2)], cones=[(0, 1), (1, 2), (0, 2)])
P113 = dict(rank=2, rays=[(1, 0), (0, 1), (-1, -3)], cones=[(0, 1), (1, 2), (0, 2)])
F2 = dict(rank=2, rays=[(1, 0), (0, 1), (-1, -2), (0, -1)],
          cones=[(0, 1), (1, 2), (2, 3), (3, 0)])
F3 = dict(rank=2, rays=[(1, 0), (0, 1), (-1, -3), (0, -1)],
          cones=[(0, 1), (1, 2), (2, 3), (3, 0)])
P1113 = dict(rank=3, rays=[(1, 0, 0), (0, 1, 0), (0, 0, 1), (-1, -1, -3)],
             cones=[(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)])

CORPUS = {"P1": P1, "P2": P2, "P112": P112, "F2": F2, "P1113": P1113}


def fan_of(spec) -> StackyFan:
    return StackyFan(spec["rank"], spec["rays"], spec["cones"])


def ext_of(spec):
    return extend(fan_of(spec))


_cache = {}


def pipeline(name):
    """(ext, picard data with basis, cohomology ring, mori data) for a corpus fan."""
    if name not in _cache:
        ext = ext_of(CORPUS[name])
        data = choose_basis_p(extended_pl_and_pic(ext))
        ring = presentation(ext)
        mori = mori_lattices(data)
        _cache[name] = (ext, data, ring, mori)
    return _cache[name]
