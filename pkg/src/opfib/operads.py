"""Finite colored symmetric operads in sets, and algebras over them.

Conventions, fixed once and used everywhere:

* an operation ``op`` has an ordered input color profile and an output
  color; operations are explicit ids, so distinct operations may share a
  profile;
* the symmetric groups act on the left: ``act(p, op)`` has profile
  ``inputs'[p[i]] = inputs[i]`` and the action axiom reads
  ``act(p, act(q, x)) = act(p*q, x)`` with ``(p*q)[i] = p[q[i]]``;
* composition is the full substitution ``compose(outer, inners)`` whose
  profile is the concatenation of the inner profiles; tables are total
  on composable tuples whose result arity stays under ``arity_cap``;
* an algebra action satisfies ``act_map[act(p, op)](t) =
  act_map[op](t[p[0]], t[p[1]], ...)``.

Permutations are 0-indexed tuples ``p`` with ``p[i]`` the image of slot
``i``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from .fincat import CheckResult, canonical_key

Perm = tuple[int, ...]

DEFAULT_ARITY_CAP = 4


def perm_inverse(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v] = i
    return tuple(out)


def perm_compose(p: Perm, q: Perm) -> Perm:
    """p after q: (p*q)[i] = p[q[i]]."""
    return tuple(p[q[i]] for i in range(len(q)))


def block_perm(p: Perm, sizes: tuple[int, ...]) -> Perm:
    """The permutation of sum(sizes) letters moving block i (of length
    sizes[i]) to the slot p[i], keeping each block in order."""
    k = len(p)
    pinv = perm_inverse(p)
    tgt_sizes = [sizes[pinv[j]] for j in range(k)]
    tgt_offsets = [sum(tgt_sizes[:j]) for j in range(k)]
    src_offsets = [sum(sizes[:i]) for i in range(k)]
    out = [0] * sum(sizes)
    for i in range(k):
        for t in range(sizes[i]):
            out[src_offsets[i] + t] = tgt_offsets[p[i]] + t
    return tuple(out)


def block_diag(perms: tuple[Perm, ...]) -> Perm:
    out: list[int] = []
    offset = 0
    for q in perms:
        out.extend(offset + v for v in q)
        offset += len(q)
    return tuple(out)


def sort_perm(values) -> Perm:
    """The left-action permutation p with act(p, x) reordering a profile
    indexed by ``values`` into increasing value order: p[i] = rank of
    values[i]."""
    order = sorted(range(len(values)), key=lambda i: (values[i], i))
    p = [0] * len(values)
    for rank, i in enumerate(order):
        p[i] = rank
    return tuple(p)


@dataclass(frozen=True)
class Operation:
    inputs: tuple
    output: Any


class ColoredOperad:
    """Explicit-table colored symmetric operad in sets."""

    def __init__(self, colors, ops: dict, units: dict, symmetry: dict,
                 composition: dict, arity_cap: int = DEFAULT_ARITY_CAP, name: str = ""):
        self.name = name
        self.colors = tuple(sorted(colors, key=canonical_key))
        self.ops = dict(ops)
        self.units = dict(units)
        self.symmetry = dict(symmetry)
        self.composition = dict(composition)
        self.arity_cap = arity_cap
        self._multihom: dict[tuple, tuple] = {}
        for op_id in sorted(ops, key=canonical_key):
            o = ops[op_id]
            self._multihom.setdefault((o.inputs, o.output), ())
            self._multihom[(o.inputs, o.output)] += (op_id,)
        self._by_output: dict[Any, tuple] = {}
        for op_id in sorted(ops, key=canonical_key):
            o = ops[op_id]
            self._by_output.setdefault(o.output, ())
            self._by_output[o.output] += (op_id,)

    # -- queries ---------------------------------------------------------

    def multihom(self, inputs: tuple, output) -> tuple:
        return self._multihom.get((tuple(inputs), output), ())

    def arity(self, op_id) -> int:
        return len(self.ops[op_id].inputs)

    def unit(self, color):
        return self.units[color]

    def act(self, p: Perm, op_id):
        if p == tuple(range(len(p))):
            return op_id
        return self.symmetry[(op_id, p)]

    def compose(self, outer, inners: tuple):
        return self.composition[(outer, inners)]

    def ops_by_output(self, color) -> tuple:
        return self._by_output.get(color, ())

    def op_ids(self):
        return sorted(self.ops, key=canonical_key)

    def composable_tuples(self, outer):
        """All inner tuples for ``outer`` with result arity under cap."""
        profile = self.ops[outer].inputs
        pools = [self.ops_by_output(c) for c in profile]
        for inners in itertools.product(*pools):
            if sum(self.arity(i) for i in inners) <= self.arity_cap:
                yield inners

    # -- validation --------------------------------------------------------

    def validate(self) -> "OperadReport":
        rep = OperadReport()
        for c in self.colors:
            u = self.units.get(c)
            if u is None or self.ops.get(u) != Operation((c,), c):
                rep.add("unit", c, "missing or wrongly typed unit")
        for op_id, o in self.ops.items():
            if o.output not in self.colors or any(c not in self.colors for c in o.inputs):
                rep.add("colors", op_id, "operation uses unknown colors")
            if len(o.inputs) > self.arity_cap:
                rep.add("arity", op_id, "operation exceeds the arity cap")
        # symmetry is a group action with correctly permuted profiles
        for op_id, o in self.ops.items():
            n = len(o.inputs)
            for p in itertools.permutations(range(n)):
                q = self.symmetry.get((op_id, p))
                if p == tuple(range(n)):
                    if q is not None and q != op_id:
                        rep.add("symmetry", (op_id, p), "identity permutation acts nontrivially")
                    continue
                if q is None:
                    rep.add("symmetry", (op_id, p), "missing symmetry entry")
                    continue
                want = [None] * n
                for i in range(n):
                    want[p[i]] = o.inputs[i]
                if self.ops[q].inputs != tuple(want) or self.ops[q].output != o.output:
                    rep.add("symmetry", (op_id, p), "permuted profile mismatch")
        def safe_act(p, op_id):
            if p == tuple(range(len(p))):
                return op_id
            return self.symmetry.get((op_id, p))

        for op_id, o in self.ops.items():
            n = len(o.inputs)
            for p in itertools.permutations(range(n)):
                for q in itertools.permutations(range(n)):
                    mid = safe_act(q, op_id)
                    lhs = safe_act(p, mid) if mid is not None else None
                    rhs = safe_act(perm_compose(p, q), op_id)
                    if lhs != rhs or lhs is None:
                        rep.add("symmetry-action", (op_id, p, q), "not a group action")
        # composition: totality, typing, units, associativity, equivariance
        for outer in self.ops:
            for inners in self.composable_tuples(outer):
                res = self.composition.get((outer, inners))
                if res is None:
                    rep.add("totality", (outer, inners), "missing composition entry")
                    continue
                want_inputs = tuple(c for i in inners for c in self.ops[i].inputs)
                if self.ops[res] != Operation(want_inputs, self.ops[outer].output):
                    rep.add("typing", (outer, inners), "composite has the wrong profile")
        for op_id, o in self.ops.items():
            units = tuple(self.units[c] for c in o.inputs)
            if self.composition.get((op_id, units)) != op_id:
                rep.add("unitality", op_id, "composing with units is not the identity")
            u_out = self.units[o.output]
            if self.composition.get((u_out, (op_id,))) != op_id:
                rep.add("unitality", op_id, "unit does not absorb on the left")
        rep.extend(self._check_associativity())
        rep.extend(self._check_equivariance())
        return rep

    def _check_associativity(self):
        out = []
        for outer in self.ops:
            for mids in self.composable_tuples(outer):
                first = self.composition.get((outer, mids))
                if first is None:
                    continue
                pools = [list(self.composable_tuples(m)) for m in mids]
                for blocks in itertools.product(*pools):
                    flat = tuple(i for block in blocks for i in block)
                    if sum(self.arity(i) for i in flat) > self.arity_cap:
                        continue
                    lhs = self.composition.get((first, flat))
                    inner_comps = tuple(self.composition.get((m, b))
                                        for m, b in zip(mids, blocks))
                    if any(i is None for i in inner_comps):
                        continue
                    rhs = self.composition.get((outer, inner_comps))
                    if lhs != rhs or lhs is None:
                        out.append(("associativity", (outer, mids, blocks),
                                    f"{lhs} != {rhs}"))
        return out

    def _check_equivariance(self):
        out = []
        for outer in self.ops:
            k = self.arity(outer)
            for inners in self.composable_tuples(outer):
                res = self.composition.get((outer, inners))
                if res is None:
                    continue
                sizes = tuple(self.arity(i) for i in inners)
                for p in itertools.permutations(range(k)):
                    pinv = perm_inverse(p)
                    permuted_inners = tuple(inners[pinv[j]] for j in range(k))
                    lhs = self.composition.get((self.act(p, outer), permuted_inners))
                    rhs = self.act(block_perm(p, sizes), res)
                    if lhs != rhs:
                        out.append(("equivariance-outer", (outer, inners, p),
                                    f"{lhs} != {rhs}"))
                for qs in itertools.product(*[itertools.permutations(range(s))
                                              for s in sizes]):
                    if all(q == tuple(range(len(q))) for q in qs):
                        continue
                    twisted = tuple(self.act(q, i) for q, i in zip(qs, inners))
                    lhs = self.composition.get((outer, twisted))
                    rhs = self.act(block_diag(qs), res)
                    if lhs != rhs:
                        out.append(("equivariance-inner", (outer, inners, qs),
                                    f"{lhs} != {rhs}"))
        return out


class OperadReport:
    """Validation outcome: every violated axiom instance, or clean."""

    def __init__(self):
        self.violations: list[tuple[str, Any, str]] = []

    def add(self, kind, where, msg):
        self.violations.append((kind, where, msg))

    def extend(self, items):
        self.violations.extend(items)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __repr__(self):
        if self.ok:
            return "OperadReport(valid)"
        head = "; ".join(f"{k}@{w}" for k, w, _ in self.violations[:4])
        return f"OperadReport({len(self.violations)} violations: {head} ...)"


def build_operad(colors, op_table: dict, units: dict,
                 sym_fn: Callable, comp_fn: Callable,
                 arity_cap: int = DEFAULT_ARITY_CAP, name: str = "") -> ColoredOperad:
    """Materialize symmetry/composition tables from rules.

    ``op_table``: op_id -> Operation; ``sym_fn(op_id, perm) -> op_id``;
    ``comp_fn(outer, inners) -> op_id``.
    """
    symmetry = {}
    for op_id, o in op_table.items():
        n = len(o.inputs)
        for p in itertools.permutations(range(n)):
            symmetry[(op_id, p)] = sym_fn(op_id, p)
    stub = ColoredOperad(colors, op_table, units, symmetry, {}, arity_cap, name)
    composition = {}
    for outer in op_table:
        for inners in stub.composable_tuples(outer):
            composition[(outer, inners)] = comp_fn(outer, inners)
    return ColoredOperad(colors, op_table, units, symmetry, composition,
                         arity_cap, name)


# -- operad maps -------------------------------------------------------


@dataclass
class OperadMap:
    source: ColoredOperad
    target: ColoredOperad
    color_map: dict
    op_map: dict
    name: str = ""

    def validate(self) -> CheckResult:
        P, Q = self.source, self.target
        for c in P.colors:
            if self.color_map.get(c) not in Q.colors:
                return CheckResult(False, c, "color image missing")
        for op_id, o in P.ops.items():
            q = self.op_map.get(op_id)
            if q is None or q not in Q.ops:
                return CheckResult(False, op_id, "operation image missing")
            want = Operation(tuple(self.color_map[c] for c in o.inputs),
                             self.color_map[o.output])
            if Q.ops[q] != want:
                return CheckResult(False, op_id, "operation image has wrong profile")
        for c in P.colors:
            if self.op_map[P.units[c]] != Q.units[self.color_map[c]]:
                return CheckResult(False, c, "unit not preserved")
        for (op_id, p), r in P.symmetry.items():
            if Q.act(p, self.op_map[op_id]) != self.op_map[r]:
                return CheckResult(False, (op_id, p), "symmetry not preserved")
        for (outer, inners), r in P.composition.items():
            img = Q.composition.get((self.op_map[outer],
                                     tuple(self.op_map[i] for i in inners)))
            if img != self.op_map[r]:
                return CheckResult(False, (outer, inners), "composition not preserved")
        return CheckResult(True)

    def is_isomorphism(self) -> CheckResult:
        v = self.validate()
        if not v:
            return v
        P, Q = self.source, self.target
        if sorted(map(canonical_key, self.color_map.values())) != \
                sorted(map(canonical_key, Q.colors)) or len(P.colors) != len(Q.colors):
            return CheckResult(False, None, "not bijective on colors")
        if len(set(self.op_map.values())) != len(P.ops) or len(P.ops) != len(Q.ops):
            return CheckResult(False, None, "not bijective on operations")
        inv = OperadMap(Q, P,
                        {v: k for k, v in self.color_map.items()},
                        {v: k for k, v in self.op_map.items()})
        return inv.validate()


def identity_operad_map(P: ColoredOperad) -> OperadMap:
    return OperadMap(P, P, {c: c for c in P.colors}, {o: o for o in P.ops}, name="id")


def compose_operad_maps(g: OperadMap, f: OperadMap) -> OperadMap:
    return OperadMap(f.source, g.target,
                     {c: g.color_map[v] for c, v in f.color_map.items()},
                     {o: g.op_map[v] for o, v in f.op_map.items()})


def enumerate_operad_maps(P: ColoredOperad, Q: ColoredOperad) -> list[OperadMap]:
    """All operad maps P -> Q by exhaustive search with profile pruning."""
    out = []
    colors = list(P.colors)
    for images in itertools.product(Q.colors, repeat=len(colors)):
        cmap = dict(zip(colors, images))
        pools = []
        ids = P.op_ids()
        ok = True
        for op_id in ids:
            o = P.ops[op_id]
            cands = Q.multihom(tuple(cmap[c] for c in o.inputs), cmap[o.output])
            if op_id in P.units.values():
                cands = tuple(c for c in cands if c == Q.units[cmap[o.output]])
            if not cands:
                ok = False
                break
            pools.append(cands)
        if not ok:
            continue
        for choice in itertools.product(*pools):
            f = OperadMap(P, Q, cmap, dict(zip(ids, choice)))
            if f.validate():
                out.append(f)
    return out


# -- algebras ----------------------------------------------------------


@dataclass
class Algebra:
    """Set-valued algebra: finite carrier per color, a function per
    operation."""

    operad: ColoredOperad
    carriers: dict
    action: dict  # op_id -> {args tuple -> value}
    name: str = ""

    def carrier(self, color) -> tuple:
        return self.carriers[color]

    def apply(self, op_id, args: tuple):
        return self.action[op_id][tuple(args)]

    def validate(self) -> CheckResult:
        P = self.operad
        for c in P.colors:
            if c not in self.carriers:
                return CheckResult(False, c, "carrier missing")
        for op_id, o in P.ops.items():
            table = self.action.get(op_id)
            if table is None:
                return CheckResult(False, op_id, "action missing")
            domain = list(itertools.product(*[self.carriers[c] for c in o.inputs]))
            if sorted(map(canonical_key, table)) != sorted(map(canonical_key, domain)):
                return CheckResult(False, op_id, "action domain mismatch")
            for args, v in table.items():
                if v not in self.carriers[o.output]:
                    return CheckResult(False, (op_id, args), "action value outside carrier")
        for c in P.colors:
            u = P.units[c]
            for s in self.carriers[c]:
                if self.apply(u, (s,)) != s:
                    return CheckResult(False, (c, s), "unit does not act as identity")
        for (op_id, p), r in P.symmetry.items():
            o = P.ops[r]
            for args in itertools.product(*[self.carriers[c] for c in o.inputs]):
                n = len(p)
                if self.apply(r, args) != self.apply(op_id, tuple(args[p[i]] for i in range(n))):
                    return CheckResult(False, (op_id, p, args), "equivariance fails")
        for (outer, inners), res in P.composition.items():
            o = P.ops[res]
            for args in itertools.product(*[self.carriers[c] for c in o.inputs]):
                pos = 0
                mid = []
                for i in inners:
                    k = P.arity(i)
                    mid.append(self.apply(i, args[pos:pos + k]))
                    pos += k
                if self.apply(res, args) != self.apply(outer, tuple(mid)):
                    return CheckResult(False, (outer, inners, args),
                                       "action does not respect composition")
        return CheckResult(True)


def terminal_algebra(P: ColoredOperad) -> Algebra:
    carriers = {c: (0,) for c in P.colors}
    action = {}
    for op_id, o in P.ops.items():
        action[op_id] = {args: 0 for args in itertools.product(*[(0,)] * len(o.inputs))}
    return Algebra(P, carriers, action, name="terminal")


@dataclass
class AlgebraEnumeration:
    raw: list[Algebra]
    classes: list[list[int]] = field(default_factory=list)

    def representatives(self) -> list[Algebra]:
        return [self.raw[cls[0]] for cls in self.classes]


def enumerate_algebras(P: ColoredOperad, size_bound: int,
                       allow_empty: bool = True) -> AlgebraEnumeration:
    """All algebras with carriers of size <= size_bound, raw, plus an
    isomorphism-classing pass.  Carriers are the canonical sets
    {0, ..., k-1}; empty carriers are allowed where no operation forces
    an element."""
    if size_bound < 1:
        raise ValueError("size_bound must be >= 1")
    raw: list[Algebra] = []
    sizes0 = 0 if allow_empty else 1
    for sizes in itertools.product(range(sizes0, size_bound + 1), repeat=len(P.colors)):
        carriers = {c: tuple(range(k)) for c, k in zip(P.colors, sizes)}
        raw.extend(_algebras_on_carrier(P, carriers))
    enum = AlgebraEnumeration(raw)
    enum.classes = _iso_classes(raw)
    return enum


def _algebras_on_carrier(P: ColoredOperad, carriers: dict) -> list[Algebra]:
    ids = sorted(P.ops, key=lambda o: (P.arity(o), canonical_key(o)))
    unit_ids = set(P.units.values())
    tables: dict = {}
    results = []

    def domain(op_id):
        return list(itertools.product(*[carriers[c] for c in P.ops[op_id].inputs]))

    def consistent() -> bool:
        for (op_id, p), r in P.symmetry.items():
            if op_id in tables and r in tables:
                n = len(p)
                for args, v in tables[r].items():
                    if tables[op_id][tuple(args[p[i]] for i in range(n))] != v:
                        return False
        for (outer, inners), res in P.composition.items():
            if outer in tables and res in tables and all(i in tables for i in inners):
                for args, v in tables[res].items():
                    pos = 0
                    mid = []
                    for i in inners:
                        k = P.arity(i)
                        mid.append(tables[i][args[pos:pos + k]])
                        pos += k
                    if tables[outer][tuple(mid)] != v:
                        return False
        return True

    def assign(idx: int):
        if idx == len(ids):
            alg = Algebra(P, dict(carriers), {o: dict(t) for o, t in tables.items()})
            if alg.validate():
                results.append(alg)
            return
        op_id = ids[idx]
        dom = domain(op_id)
        out = carriers[P.ops[op_id].output]
        if op_id in unit_ids:
            tables[op_id] = {args: args[0] for args in dom}
            if consistent():
                assign(idx + 1)
            del tables[op_id]
            return
        if dom and not out:
            return  # no function into an empty carrier
        for values in itertools.product(out, repeat=len(dom)):
            tables[op_id] = dict(zip(dom, values))
            if consistent():
                assign(idx + 1)
        tables.pop(op_id, None)

    assign(0)
    return results


def algebra_map_check(f: dict, A: Algebra, B: Algebra) -> CheckResult:
    """True iff the per-color function family commutes with every action
    map.  ``f[color]`` maps carrier(A, color) -> carrier(B, color)."""
    P = A.operad
    if B.operad is not P and B.operad.name != P.name:
        raise ValueError("algebras live over different operads")
    for c in P.colors:
        for s in A.carriers[c]:
            if f[c].get(s) not in B.carriers[c]:
                return CheckResult(False, (c, s), "carrier mismatch")
    for op_id, o in P.ops.items():
        for args in itertools.product(*[A.carriers[c] for c in o.inputs]):
            lhs = f[o.output][A.apply(op_id, args)]
            rhs = B.apply(op_id, tuple(f[c][a] for c, a in zip(o.inputs, args)))
            if lhs != rhs:
                return CheckResult(False, (op_id, args), "map does not commute with action")
    return CheckResult(True)


def enumerate_algebra_maps(A: Algebra, B: Algebra) -> list[dict]:
    """All algebra maps A -> B (per-color function families)."""
    P = A.operad
    out = []
    per_color = []
    for c in P.colors:
        dom, cod = A.carriers[c], B.carriers[c]
        if dom and not cod:
            return []
        fams = [dict(zip(dom, values))
                for values in itertools.product(cod, repeat=len(dom))]
        per_color.append(fams)
    for combo in itertools.product(*per_color):
        f = dict(zip(P.colors, combo))
        if algebra_map_check(f, A, B):
            out.append(f)
    return out


def algebra_iso(A: Algebra, B: Algebra) -> dict | None:
    """Some isomorphism A -> B, or None."""
    P = A.operad
    if any(len(A.carriers[c]) != len(B.carriers[c]) for c in P.colors):
        return None
    per_color = []
    for c in P.colors:
        dom, cod = A.carriers[c], B.carriers[c]
        fams = [dict(zip(dom, perm)) for perm in itertools.permutations(cod)]
        per_color.append(fams)
    for combo in itertools.product(*per_color):
        f = dict(zip(P.colors, combo))
        if algebra_map_check(f, A, B):
            return f
    return None


def _iso_classes(algebras: list[Algebra]) -> list[list[int]]:
    classes: list[list[int]] = []
    for i, alg in enumerate(algebras):
        for cls in classes:
            if algebra_iso(alg, algebras[cls[0]]) is not None:
                cls.append(i)
                break
        else:
            classes.append([i])
    return classes
