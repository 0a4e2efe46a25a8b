"""Deterministic instance generators for the sweeps and tests.

Exhaustively enumerating every colored operad under the sweep bounds is
astronomically large (symmetry and composition tables multiply), so the
sweep runs over this generated family instead, which exercises every
structural feature under the bounds: nullary operations, doubled
multihom cells, mixed colors, non-identity unary monoids, and tree
operads.  Algebra enumeration over each operad *is* exhaustive.
"""

from __future__ import annotations

import itertools

from .operads import (ColoredOperad, DEFAULT_ARITY_CAP, Operation,
                      build_operad)

COLOR = "*"


def comm_operad(cap: int = 3) -> ColoredOperad:
    """One color, one operation in every arity up to the cap."""
    ops = {("mu", n): Operation((COLOR,) * n, COLOR) for n in range(cap + 1)}
    return build_operad(
        (COLOR,), ops, {COLOR: ("mu", 1)},
        lambda op, p: op,
        lambda outer, inners: ("mu", sum(len(ops[i].inputs) for i in inners)),
        arity_cap=cap, name="comm")


def comm_semigroup_operad(cap: int = 3) -> ColoredOperad:
    """Commutative operad without the nullary operation."""
    ops = {("mu", n): Operation((COLOR,) * n, COLOR) for n in range(1, cap + 1)}
    return build_operad(
        (COLOR,), ops, {COLOR: ("mu", 1)},
        lambda op, p: op,
        lambda outer, inners: ("mu", sum(len(ops[i].inputs) for i in inners)),
        arity_cap=cap, name="comm_semigroup")


def initial_operad(ncolors: int = 1) -> ColoredOperad:
    """Units only: the operad with no operations beyond identities."""
    colors = tuple(f"c{i}" for i in range(ncolors))
    ops = {("unit", c): Operation((c,), c) for c in colors}
    return build_operad(
        colors, ops, {c: ("unit", c) for c in colors},
        lambda op, p: op,
        lambda outer, inners: inners[0],
        arity_cap=DEFAULT_ARITY_CAP, name=f"initial{ncolors}")


def two_constants_operad() -> ColoredOperad:
    """One color with two nullary operations and nothing else."""
    ops = {("unit",): Operation((COLOR,), COLOR),
           ("pt", 0): Operation((), COLOR),
           ("pt", 1): Operation((), COLOR)}

    def comp(outer, inners):
        if outer == ("unit",):
            return inners[0]
        return outer  # nullary outer, empty inner tuple

    return build_operad((COLOR,), ops, {COLOR: ("unit",)},
                        lambda op, p: op, comp,
                        arity_cap=3, name="two_constants")


def doubled_operad(cap: int = 3) -> ColoredOperad:
    """One color; every arity >= 2 carries two operations, composed by
    max of their tags.  Hits the two-operations-per-cell bound."""
    ops = {("unit",): Operation((COLOR,), COLOR)}
    for n in range(2, cap + 1):
        for v in (0, 1):
            ops[("d", n, v)] = Operation((COLOR,) * n, COLOR)

    def tag(op):
        return 0 if op == ("unit",) else op[2]

    def comp(outer, inners):
        if outer == ("unit",):
            return inners[0]
        arity = sum(len(ops[i].inputs) for i in inners)
        return ("d", arity, max(tag(outer), max(map(tag, inners))))

    return build_operad((COLOR,), ops, {COLOR: ("unit",)},
                        lambda op, p: op, comp,
                        arity_cap=cap, name="doubled")


def mixed_operad() -> ColoredOperad:
    """Two colors with one binary operation (b, b) -> a."""
    ops = {("unit", "a"): Operation(("a",), "a"),
           ("unit", "b"): Operation(("b",), "b"),
           ("m",): Operation(("b", "b"), "a")}

    def comp(outer, inners):
        if outer[0] == "unit":
            return inners[0]
        return ("m",)  # only units can be plugged into m

    return build_operad(("a", "b"), ops,
                        {"a": ("unit", "a"), "b": ("unit", "b")},
                        lambda op, p: op, comp,
                        arity_cap=3, name="mixed")


def idempotent_unary_operad() -> ColoredOperad:
    """One color with a non-identity idempotent unary operation."""
    ops = {("unit",): Operation((COLOR,), COLOR),
           ("e",): Operation((COLOR,), COLOR)}

    def comp(outer, inners):
        if outer == ("unit",):
            return inners[0]
        return ("e",)  # e.e = e and e.unit = e

    return build_operad((COLOR,), ops, {COLOR: ("unit",)},
                        lambda op, p: op, comp,
                        arity_cap=3, name="idempotent_unary")


def corrupted_doubled_operad() -> tuple[ColoredOperad, tuple]:
    """A doubled operad with one composition entry redirected, plus the
    key of the corrupted triple; validate must report it."""
    good = doubled_operad(cap=3)
    comp = dict(good.composition)
    key = (("d", 2, 0), (("d", 2, 0), ("unit",)))
    assert comp[key] == ("d", 3, 0)
    comp[key] = ("d", 3, 1)
    bad = ColoredOperad(good.colors, good.ops, good.units, good.symmetry,
                        comp, arity_cap=3, name="doubled_corrupt")
    return bad, key


def relabeled_operad(P: ColoredOperad, tag: str = "z") -> tuple:
    """An isomorphic copy with renamed colors and operation ids, plus the
    witnessing isomorphism data (color map, op map)."""
    cmap = {c: (tag, c) for c in P.colors}
    omap = {o: (tag, o) for o in P.ops}
    ops = {omap[o]: Operation(tuple(cmap[c] for c in v.inputs), cmap[v.output])
           for o, v in P.ops.items()}
    units = {cmap[c]: omap[u] for c, u in P.units.items()}
    symmetry = {(omap[o], p): omap[r] for (o, p), r in P.symmetry.items()}
    composition = {(omap[o], tuple(omap[i] for i in inners)): omap[r]
                   for (o, inners), r in P.composition.items()}
    Q = ColoredOperad(tuple(cmap[c] for c in P.colors),
                      ops, units, symmetry, composition,
                      arity_cap=P.arity_cap, name=f"{P.name}_{tag}")
    return Q, cmap, omap


def sweep_operads(color_bound: int = 2, op_bound: int = 2,
                  arity_cap: int = 3) -> list[ColoredOperad]:
    """The deterministic operad family for a sweep, filtered by bounds."""
    candidates = [
        initial_operad(1),
        initial_operad(2),
        two_constants_operad(),
        idempotent_unary_operad(),
        comm_operad(arity_cap),
        comm_semigroup_operad(arity_cap),
        doubled_operad(arity_cap),
        mixed_operad(),
    ]
    out = []
    for P in candidates:
        if len(P.colors) > color_bound:
            continue
        if any(len(cell) > op_bound for cell in P._multihom.values()):
            continue
        if any(len(o.inputs) > arity_cap for o in P.ops.values()):
            continue
        out.append(P)
    return out
