"""A demonstration secret-key cipher keyed by a pair of logarithmic
signatures for the same group.

Encryption composes the index-to-element bijection of one signature with
the inverse (tame factorization) of the other.  Key derivation applies
only transformations that provably preserve the signature property:
in-block shuffles and telescoped per-block translations.  This is a
correctness demonstration of the keyed bijection; no security properties
are claimed or implied.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .factorize import IndexVector, compose, rank, tame_factor, unrank
from .lscore import LogSignature, LsError, canonical_ls, verify_ls
from .matgroups import GroupDescriptor, Mat, identity


class PgmError(LsError):
    pass


@dataclass
class PgmKey:
    group: GroupDescriptor
    alpha_ls: LogSignature
    beta_ls: LogSignature
    perms: list          # per block: permutation applied to alpha indices
    seed: int

    @property
    def order(self):
        return self.alpha_ls.claimed_order

    def to_json(self):
        return {
            "group": self.group.to_json(),
            "seed": self.seed,
            "alpha": self.alpha_ls.to_json(),
            "beta": self.beta_ls.to_json(),
        }


def keygen(desc: GroupDescriptor, seed: int, translate: bool = True) -> PgmKey:
    """Derive a key pair: the canonical signature and a seeded variant.

    The variant shuffles elements inside each block and, when translate is
    set, conjoins telescoping left translations g_{i-1}^-1 B_i g_i (with
    g_0 = g_s = 1), both of which keep the unique-product property.  With
    translate off, shuffles fix slot 0, so the identity keeps index zero.
    """
    alpha = canonical_ls(desc)
    rng = random.Random(seed)
    fq = None
    for b in alpha.blocks:
        fq = b[0].fq
        n = b[0].n
        break
    if fq is None:
        raise PgmError("group is trivial; nothing to key")
    perms = []
    for blk in alpha.blocks:
        idx = list(range(len(blk)))
        if translate:
            rng.shuffle(idx)
        else:
            tail = idx[1:]
            rng.shuffle(tail)
            idx = [0] + tail
        perms.append(idx)
    translations = [identity(fq, n)]
    if translate:
        pool = [g for blk in alpha.blocks for g in blk]
        for _ in range(len(alpha.blocks) - 1):
            translations.append(pool[rng.randrange(len(pool))])
    else:
        translations.extend(identity(fq, n) for _ in range(len(alpha.blocks) - 1))
    translations.append(identity(fq, n))
    beta_blocks = []
    for i, (blk, perm) in enumerate(zip(alpha.blocks, perms)):
        gprev_inv = translations[i].inv()
        gnext = translations[i + 1]
        beta_blocks.append([gprev_inv * blk[j] * gnext for j in perm])
    beta = LogSignature(desc, beta_blocks, alpha.claimed_order,
                        meta={"derived_from": "canonical", "seed": seed})
    key = PgmKey(desc, alpha, beta, perms, seed)
    return key


def _beta_factor(key: PgmKey, g: Mat) -> IndexVector:
    """Tame factorization through beta: beta products with indices j equal
    alpha products with indices perm[j], so decode via alpha and unmap."""
    alpha_iv = tame_factor(g, key.alpha_ls)
    out = []
    for perm, ai in zip(key.perms, alpha_iv):
        out.append(perm.index(ai))
    return IndexVector(tuple(out))


def encrypt(key: PgmKey, msg: int) -> int:
    if not 0 <= msg < key.order:
        raise PgmError(f"message {msg} out of range [0, {key.order})")
    g = compose(unrank(msg, key.alpha_ls), key.alpha_ls)
    return rank(_beta_factor(key, g), key.beta_ls)


def decrypt(key: PgmKey, ct: int) -> int:
    if not 0 <= ct < key.order:
        raise PgmError(f"ciphertext {ct} out of range [0, {key.order})")
    g = compose(unrank(ct, key.beta_ls), key.beta_ls)
    return rank(tame_factor(g, key.alpha_ls), key.alpha_ls)


def verify_key(key: PgmKey, mode="exhaustive", **kw):
    ra = verify_ls(key.alpha_ls, mode=mode, **kw)
    rb = verify_ls(key.beta_ls, mode="exhaustive", **kw) if mode == "exhaustive" else None
    return ra, rb
