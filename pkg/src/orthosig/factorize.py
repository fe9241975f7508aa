"""Tame factorization through canonical signatures and the mixed-radix
rank/unrank bijection between Z_|G| and index vectors.

Decoding never searches the group: it is hash lookups on precomputed
spread and point tables, one discrete logarithm on a tiny table, and a
linear solve for the unipotent coordinates, recursively down the stages.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lscore import LogSignature, LsError
from .matgroups import Mat


class FactorError(LsError):
    pass


@dataclass(frozen=True)
class IndexVector:
    indices: tuple

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)

    def to_json(self):
        return list(self.indices)


def check_bounds(iv, ls: LogSignature):
    sizes = ls.block_sizes()
    if len(iv.indices) != len(sizes):
        raise FactorError(f"index vector has {len(iv.indices)} entries, signature has {len(sizes)} blocks")
    for i, (x, s) in enumerate(zip(iv.indices, sizes)):
        if not 0 <= x < s:
            raise FactorError(f"index {x} out of range [0, {s}) in block {i}")


def tame_factor(g: Mat, ls: LogSignature, stats: dict | None = None) -> IndexVector:
    """The unique index vector whose block product equals g."""
    if ls.plan is None:
        raise FactorError("signature carries no decoding tables (not canonical)")
    if ls.group is not None:
        from . import forms
        from .lscore import space_for

        space = space_for(ls.group)
        if not forms.membership(space, g, ls.group.family):
            raise FactorError(f"element is not in {ls.group.family}")
    digits = ls.plan.decode(g, stats)
    iv = IndexVector(tuple(int(d) for d in digits))
    check_bounds(iv, ls)
    return iv


def compose(iv: IndexVector, ls: LogSignature) -> Mat:
    """Product of the indexed block elements."""
    check_bounds(iv, ls)
    g = None
    for b, i in zip(ls.blocks, iv.indices):
        g = b[i] if g is None else g * b[i]
    if g is None:
        raise FactorError("signature has no blocks")
    return g


def rank(iv: IndexVector, ls: LogSignature) -> int:
    """Mixed-radix value, first block fastest-varying."""
    check_bounds(iv, ls)
    out = 0
    mult = 1
    for x, s in zip(iv.indices, ls.block_sizes()):
        out += x * mult
        mult *= s
    return out


def unrank(v: int, ls: LogSignature) -> IndexVector:
    if not 0 <= v < ls.claimed_order:
        raise FactorError(f"rank {v} out of range [0, {ls.claimed_order})")
    out = []
    for s in ls.block_sizes():
        out.append(v % s)
        v //= s
    return IndexVector(tuple(out))
