#!/usr/bin/env python3
"""Survey the construction ladder over a grid of groups: which shape each
family lands on, the signature length against the minimal bound, and the
verification outcome."""

import time

from orthosig.lscore import canonical_ls, min_length_bound, verify_ls
from orthosig.matgroups import descriptor

CASES = [
    ("O-", 3, 2), ("O+", 3, 2), ("SO-", 3, 2), ("SO+", 3, 2),
    ("Oodd", 3, 1), ("Oodd", 3, 3), ("Oodd", 3, 5),
    ("O-", 3, 4), ("O+", 3, 4), ("SO-", 3, 4), ("SO+", 3, 4),
    ("PSO-", 3, 4), ("PSO+", 3, 4),
    ("O-", 5, 4), ("O+", 5, 4), ("Oodd", 5, 3),
    ("O-", 3, 6), ("O+", 3, 6),
]

print(f"{'group':>12} {'order':>10} {'len':>5} {'bound':>5} {'shape':>12} {'verified':>9} {'s':>6}")
for fam, q, n in CASES:
    t0 = time.monotonic()
    ls = canonical_ls(descriptor(fam, q, n=n))
    bound = min_length_bound(ls.claimed_order).bound
    if ls.claimed_order <= 50_000:
        rep = verify_ls(ls, "exhaustive", check_membership=ls.claimed_order <= 5000)
        verdict = "exact" if rep.valid else "INVALID"
    elif ls.plan is not None:
        rep = verify_ls(ls, "sampled", samples=2000, seed=42)
        verdict = "sampled" if rep.valid else "INVALID"
    else:
        verdict = "-"
    dt = time.monotonic() - t0
    shape = ls.meta.get("shape", "projected" if ls.meta.get("projected") else "?")
    print(f"{fam + str(n) + '(' + str(q) + ')':>12} {ls.claimed_order:>10} {ls.length:>5} "
          f"{bound:>5} {shape:>12} {verdict:>9} {dt:>6.1f}")
