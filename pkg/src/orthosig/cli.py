"""Batch front-end: construct, verify, factor, count, spread-check,
parabolic, project, pgm-demo and omega-check commands.

Every command prints a stable JSON report to stdout followed by
human-readable summary lines prefixed with '#'.  Identical command lines
produce byte-identical stdout; wall-clock timing goes to stderr only.
Exit codes: 0 all checks pass, 1 a verification found violations,
2 usage or construction error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import __version__
from . import forms, pgm
from .factorize import IndexVector, compose, rank, tame_factor, unrank
from .fields import make_tower, split_prime_power
from .lscore import (
    LsError,
    UnsupportedFamily,
    canonical_ls,
    min_length_bound,
    parabolic_ls,
    project_ls,
    space_for,
    spread_construction,
    verify_ls,
)
from .matgroups import GroupDescriptor, descriptor, group_order, neg_identity, identity
from .fields import fq_context
from .serial import load_ls, save_ls
from .spreads import classical_spread, verify_partition
from . import spreads as spr


FAMILY_CHOICES = [
    "O-", "O+", "Oodd", "SO-", "SO+", "SOodd",
    "Omega-", "Omega+", "Omegaodd",
    "PSO-", "PSO+", "PSOodd", "POmega-", "POmega+", "POmegaodd",
]

KIND_CHOICES = ["minus", "plus", "odd"]


def _add_group_args(sp, need_family=True):
    if need_family:
        sp.add_argument("--family", required=True, choices=FAMILY_CHOICES)
    sp.add_argument("--q", type=int, required=True)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--m", type=int)
    g.add_argument("--n", type=int)


def _add_common(sp):
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--budget", type=int, default=1_000_000)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="orthosig",
        description="logarithmic signatures for finite orthogonal groups (odd q)",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("counts", help="singular point count vs closed form")
    c.add_argument("--kind", required=True, choices=KIND_CHOICES)
    _add_group_args(c, need_family=False)
    _add_common(c)

    c = sub.add_parser("construct", help="build the canonical signature")
    _add_group_args(c)
    c.add_argument("--out", required=True)
    _add_common(c)

    c = sub.add_parser("verify", help="verify a signature file")
    c.add_argument("--in", dest="infile", required=True)
    c.add_argument("--mode", choices=["exhaustive", "sampled"], default="exhaustive")
    _add_common(c)

    c = sub.add_parser("factor", help="factor an element through the canonical signature")
    c.add_argument("--in", dest="infile", required=True)
    c.add_argument("--rank", type=int, default=None, help="factor the element of this rank")
    c.add_argument("--element-file", default=None, help="JSON matrix to factor")
    _add_common(c)

    c = sub.add_parser("spread-check", help="classical spread and construction spread reports")
    c.add_argument("--kind", required=True, choices=KIND_CHOICES)
    _add_group_args(c, need_family=False)
    _add_common(c)

    c = sub.add_parser("parabolic", help="[R, Q] signature of the k-space stabilizer")
    _add_group_args(c)
    c.add_argument("--k", type=int, default=1)
    _add_common(c)

    c = sub.add_parser("project", help="project an SO signature to the PSO quotient")
    _add_group_args(c)
    c.add_argument("--out", default=None)
    _add_common(c)

    c = sub.add_parser("pgm-demo", help="signature-keyed permutation cipher demo")
    _add_group_args(c)
    c.add_argument("--messages", type=int, default=8)
    _add_common(c)

    c = sub.add_parser("omega-check", help="even-rank criterion vs commutator-closure oracle")
    _add_group_args(c)
    _add_common(c)
    return ap


def _descriptor(args, family=None):
    fam = family or args.family
    q = args.q
    if args.n is not None:
        return descriptor(fam, q, n=args.n)
    return descriptor(fam, q, m=args.m)


def _report(args, payload, summary_lines, code):
    doc = {
        "tool": "orthosig",
        "version": __version__,
        "command": args.command,
        "config": {k: v for k, v in sorted(vars(args).items()) if k != "func" and _namable(v)},
        "seed": getattr(args, "seed", None),
        "budgets": {
            "samples": getattr(args, "samples", None),
            "budget": getattr(args, "budget", None),
        },
        "result": payload,
    }
    print(json.dumps(doc, sort_keys=True, indent=2))
    for line in summary_lines:
        print(f"# {line}")
    return code


def _namable(v):
    return isinstance(v, (str, int, float, bool, type(None)))


def _kind_to_family(kind):
    return {"minus": "O-", "plus": "O+", "odd": "Oodd"}[kind]


def cmd_counts(args):
    from .matgroups import isotropic_point_count

    kind = args.kind
    m = args.m if args.m is not None else (args.n - 1) // 2 if kind == "odd" else args.n // 2
    p, e = split_prime_power(args.q)
    space = space_for(descriptor(_kind_to_family(kind), args.q, m=m))
    pts = forms.enumerate_isotropic_points(space, check_count=False)
    expected = isotropic_point_count(kind, args.q, m)
    match = len(pts) == expected
    payload = {"kind": kind, "q": args.q, "m": m, "count": len(pts), "closed_form": expected, "match": match}
    print_count = f"{len(pts)}"
    return _report(args, payload, [f"isotropic points: {print_count} (closed form {expected})"],
                   0 if match else 1)


def cmd_construct(args):
    desc = _descriptor(args)
    ls = canonical_ls(desc)
    save_ls(ls, args.out)
    bound = min_length_bound(ls.claimed_order).bound
    payload = {
        "group": desc.to_json(),
        "order": ls.claimed_order,
        "length": ls.length,
        "bound": bound,
        "block_sizes": ls.block_sizes(),
        "shape": ls.meta.get("shape"),
        "notes": ls.meta.get("notes", []),
        "minimal_claimed": ls.meta.get("minimal", False),
        "out": args.out,
    }
    lines = [
        f"constructed signature for {desc.family} n={desc.n} q={desc.q}: "
        f"order {ls.claimed_order}, length {ls.length}, bound {bound}",
        f"written to {args.out}",
    ]
    return _report(args, payload, lines, 0)


def cmd_verify(args):
    ls_file = load_ls(args.infile)
    desc = ls_file.group
    notes = []
    if args.mode == "sampled":
        ls = canonical_ls(desc)
        if [len(b) for b in ls.blocks] != [len(b) for b in ls_file.blocks] or any(
            a.key != b.key for ba, bb in zip(ls.blocks, ls_file.blocks) for a, b in zip(ba, bb)
        ):
            notes.append("file does not match the canonical construction; sampling uses the canonical tables")
        rep = verify_ls(ls, mode="sampled", samples=args.samples, seed=args.seed, budget=args.budget)
    else:
        rep = verify_ls(ls_file, mode="exhaustive", budget=args.budget)
    payload = rep.to_json()
    payload["notes"] = payload["notes"] + notes
    ok = rep.valid
    lines = [
        f"{'VALID' if ok else 'INVALID'} ({args.mode}): length {rep.length}, bound {rep.bound}, "
        f"mls {'yes' if rep.mls else 'no'}",
    ]
    if rep.collisions:
        lines.append(f"first collision witness: {rep.collisions[0]}")
    return _report(args, payload, lines, 0 if ok else 1)


def cmd_factor(args):
    ls_file = load_ls(args.infile)
    desc = ls_file.group
    ls = canonical_ls(desc)
    mismatch = [len(b) for b in ls.blocks] != [len(b) for b in ls_file.blocks]
    if args.rank is None and args.element_file is None:
        return _report(args, {"error": "need --rank or --element-file"}, ["nothing to factor"], 2)
    if args.rank is not None:
        iv = unrank(args.rank, ls)
        g = compose(iv, ls)
    else:
        import json as _json

        from .fields import fq_context
        from .matgroups import Mat

        with open(args.element_file) as fh:
            g = Mat.from_json(fq_context(desc.p, desc.e), _json.load(fh))
    got = tame_factor(g, ls)
    back = compose(got, ls)
    payload = {
        "group": desc.to_json(),
        "indices": got.to_json(),
        "rank": rank(got, ls),
        "recomposes": back.key == g.key,
        "canonical_mismatch": mismatch,
    }
    ok = back.key == g.key
    return _report(args, payload, [f"indices {list(got)} (rank {payload['rank']})"], 0 if ok else 1)


def cmd_spread_check(args):
    kind = args.kind
    m = args.m if args.m is not None else ((args.n - 1) // 2 if kind == "odd" else args.n // 2)
    p, e = split_prime_power(args.q)
    tower = make_tower(p, e, m)
    cls = classical_spread(tower)
    allpts = list(forms._projective_reps(tower.fq, 2 * m))
    cls_rep = verify_partition(cls, allpts, tower.fq)
    space = space_for(descriptor(_kind_to_family(kind), args.q, m=m))
    plan = spread_construction(space, "O" + {"minus": "-", "plus": "+", "odd": "odd"}[kind])
    payload = {
        "classical": {"members": len(cls), "partition_of_V": cls_rep["ok"],
                      "points_per_member": cls_rep["points_per_member"]},
        "construction": {
            "shape": plan.shape,
            "members": len(plan.members) if plan.members else 0,
            "literal_block_ok": plan.literal_ok,
            "partition_of_L": plan.partition["ok"] if plan.partition else True,
            "notes": plan.notes,
        },
    }
    ok = cls_rep["ok"] and (plan.partition is None or plan.partition["ok"])
    lines = [
        f"classical spread: {len(cls)} members, partitions V\\0: {cls_rep['ok']}",
        f"construction spread ({plan.shape}): partitions singular points: "
        f"{plan.partition['ok'] if plan.partition else 'vacuous'}",
    ]
    return _report(args, payload, lines, 0 if ok else 1)


def cmd_parabolic(args):
    desc = _descriptor(args)
    space = space_for(desc)
    ls = parabolic_ls(space, args.k, desc.base_family())
    L = len(forms.enumerate_isotropic_points(space))
    stab = None
    if args.k == 1:
        stab = group_order(desc) // L
    payload = {
        "group": desc.to_json(),
        "k": args.k,
        "R_size": ls.meta["R_size"],
        "Q_size": ls.meta["Q_size"],
        "order": ls.claimed_order,
        "point_stabilizer_order": stab,
        "orbit_stabilizer_match": (stab == ls.claimed_order) if stab is not None else None,
    }
    ok = stab is None or stab == ls.claimed_order
    return _report(args, payload,
                   [f"|R| = {ls.meta['R_size']}, |Q| = {ls.meta['Q_size']}, |R||Q| = {ls.claimed_order}"],
                   0 if ok else 1)


def cmd_project(args):
    desc = _descriptor(args)
    if not desc.family.startswith("SO"):
        return _report(args, {"error": "project starts from an SO family"}, ["unsupported"], 2)
    ls = canonical_ls(desc)
    fqc = fq_context(desc.p, desc.e)
    center = [identity(fqc, desc.n)]
    if desc.n % 2 == 0:
        center.append(neg_identity(fqc, desc.n))
    pls = project_ls(ls, center)
    if pls.group is None:
        pls.group = descriptor("P" + desc.family, desc.q, n=desc.n)
    rep = verify_ls(pls, mode="exhaustive", budget=args.budget)
    if args.out:
        save_ls(pls, args.out)
    payload = {
        "from": desc.to_json(),
        "to": pls.group.to_json() if pls.group else None,
        "order": pls.claimed_order,
        "length": pls.length,
        "bound": rep.bound,
        "valid": rep.valid,
        "mls": rep.mls,
    }
    return _report(args, payload,
                   [f"projected order {pls.claimed_order}, length {pls.length}, valid {rep.valid}"],
                   0 if rep.valid else 1)


def cmd_pgm_demo(args):
    desc = _descriptor(args)
    key = pgm.keygen(desc, args.seed)
    order = key.order
    exhaustive = order <= 5000
    if exhaustive:
        seen = set()
        ok = True
        for msg in range(order):
            ct = pgm.encrypt(key, msg)
            if ct in seen or pgm.decrypt(key, ct) != msg:
                ok = False
                break
            seen.add(ct)
        bij = ok and len(seen) == order
    else:
        import random as _r

        rng = _r.Random(args.seed)
        bij = True
        for _ in range(min(args.samples, 2000)):
            msg = rng.randrange(order)
            if pgm.decrypt(key, pgm.encrypt(key, msg)) != msg:
                bij = False
                break
    demo = [[m, pgm.encrypt(key, m)] for m in range(min(args.messages, order))]
    payload = {
        "group": desc.to_json(),
        "order": order,
        "mode": "exhaustive" if exhaustive else "sampled",
        "permutation_verified": bij,
        "sample": demo,
    }
    return _report(args, payload,
                   [f"encrypt on Z_{order}: permutation verified = {bij}"],
                   0 if bij else 1)


def cmd_omega_check(args):
    desc = _descriptor(args)
    space = space_for(desc)
    audit = forms.omega_audit(space)
    payload = {
        "group": desc.to_json(),
        "special_group_size": audit["group_size"],
        "commutator_subgroup_size": audit["omega_size"],
        "agreement": audit["agreement"],
        "disagreements": len(audit["disagreements"]),
        "first_disagreements": audit["disagreements"][:2],
    }
    lines = [
        f"rank criterion vs commutator oracle on {audit['group_size']} elements: "
        + ("full agreement" if audit["agreement"] else f"{len(audit['disagreements'])} disagreements"),
    ]
    return _report(args, payload, lines, 0)


COMMANDS = {
    "counts": cmd_counts,
    "construct": cmd_construct,
    "verify": cmd_verify,
    "factor": cmd_factor,
    "spread-check": cmd_spread_check,
    "parabolic": cmd_parabolic,
    "project": cmd_project,
    "pgm-demo": cmd_pgm_demo,
    "omega-check": cmd_omega_check,
}


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    t0 = time.monotonic()
    try:
        code = COMMANDS[args.command](args)
    except (LsError, UnsupportedFamily, ValueError) as exc:
        doc = {"tool": "orthosig", "version": __version__, "command": args.command,
               "error": str(exc)}
        print(json.dumps(doc, sort_keys=True, indent=2))
        print(f"# error: {exc}")
        code = 2
    print(f"[timing] {args.command}: {time.monotonic() - t0:.3f}s", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
