"""Finite categories, functors, and discrete-opfibration machinery.

Everything downstream (operator categories, envelopes, comma categories)
is hosted here.  Objects and arrows are interned integers; each carries
an opaque hashable label so constructions stay reproducible and dumps
stay diffable.  Predicates return witness-carrying results: the
counterexample is the product, not just the boolean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable


def canonical_key(label) -> str:
    """Deterministic sort key for heterogeneous labels."""
    if isinstance(label, tuple):
        return "(" + ",".join(canonical_key(x) for x in label) + ")"
    if isinstance(label, frozenset):
        return "{" + ",".join(sorted(canonical_key(x) for x in label)) + "}"
    return f"{type(label).__name__}:{label!r}"


@dataclass
class CheckResult:
    """A boolean with its counterexample attached."""

    ok: bool
    witness: Any = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def __repr__(self):
        if self.ok:
            return "CheckResult(ok)"
        return f"CheckResult(fail: {self.detail} witness={self.witness!r})"


class FinCategory:
    """A finite category with total composition tables.

    Built through :meth:`build`, which interns objects and arrows in
    canonical label order (the canonical-naming pass making equality and
    golden files reproducible).
    """

    def __init__(self, obj_labels, arrow_labels, src, tgt, ident, comp, name=""):
        self.name = name
        self.objects = tuple(range(len(obj_labels)))
        self.arrows = tuple(range(len(arrow_labels)))
        self.obj_label = dict(enumerate(obj_labels))
        self.arrow_label = dict(enumerate(arrow_labels))
        self.obj_id = {lab: i for i, lab in self.obj_label.items()}
        self.arrow_id = {lab: i for i, lab in self.arrow_label.items()}
        self.src = src
        self.tgt = tgt
        self.ident = ident
        self.comp = comp
        self._hom: dict[tuple[int, int], tuple[int, ...]] = {}
        self._from: dict[int, tuple[int, ...]] = {}
        self._to: dict[int, tuple[int, ...]] = {}

    @classmethod
    def build(cls, objects: Iterable, arrows: dict, identities: dict,
              composition: dict, name: str = "") -> "FinCategory":
        """objects: labels; arrows: label -> (src_label, tgt_label);
        identities: obj_label -> arrow_label;
        composition: (g_label, f_label) -> arrow_label for g after f."""
        obj_labels = sorted(objects, key=canonical_key)
        arrow_labels = sorted(arrows, key=canonical_key)
        oid = {lab: i for i, lab in enumerate(obj_labels)}
        aid = {lab: i for i, lab in enumerate(arrow_labels)}
        src = {aid[a]: oid[s] for a, (s, _) in arrows.items()}
        tgt = {aid[a]: oid[t] for a, (_, t) in arrows.items()}
        ident = {oid[o]: aid[a] for o, a in identities.items()}
        comp = {(aid[g], aid[f]): aid[h] for (g, f), h in composition.items()}
        return cls(obj_labels, arrow_labels, src, tgt, ident, comp, name=name)

    # -- basic queries -------------------------------------------------

    def identity(self, x: int) -> int:
        return self.ident[x]

    def compose(self, g: int, f: int) -> int:
        """g after f."""
        return self.comp[(g, f)]

    def hom(self, x: int, y: int) -> tuple[int, ...]:
        key = (x, y)
        if key not in self._hom:
            self._hom[key] = tuple(a for a in self.arrows
                                   if self.src[a] == x and self.tgt[a] == y)
        return self._hom[key]

    def arrows_from(self, x: int) -> tuple[int, ...]:
        if x not in self._from:
            self._from[x] = tuple(a for a in self.arrows if self.src[a] == x)
        return self._from[x]

    def arrows_to(self, y: int) -> tuple[int, ...]:
        if y not in self._to:
            self._to[y] = tuple(a for a in self.arrows if self.tgt[a] == y)
        return self._to[y]

    # -- validation ----------------------------------------------------

    def validate(self) -> CheckResult:
        """Exhaustive unit/associativity/totality check."""
        for x in self.objects:
            e = self.ident.get(x)
            if e is None or self.src[e] != x or self.tgt[e] != x:
                return CheckResult(False, x, "identity missing or misplaced")
        for f in self.arrows:
            ex, ey = self.ident[self.src[f]], self.ident[self.tgt[f]]
            if self.comp.get((f, ex)) != f:
                return CheckResult(False, f, "right unit law fails")
            if self.comp.get((ey, f)) != f:
                return CheckResult(False, f, "left unit law fails")
        for f in self.arrows:
            for g in self.arrows_from(self.tgt[f]):
                gf = self.comp.get((g, f))
                if gf is None:
                    return CheckResult(False, (g, f), "composition not total")
                if self.src[gf] != self.src[f] or self.tgt[gf] != self.tgt[g]:
                    return CheckResult(False, (g, f), "composite endpoints wrong")
        for f in self.arrows:
            for g in self.arrows_from(self.tgt[f]):
                for h in self.arrows_from(self.tgt[g]):
                    if self.comp[(self.comp[(h, g)], f)] != self.comp[(h, self.comp[(g, f)])]:
                        return CheckResult(False, (h, g, f), "associativity fails")
        return CheckResult(True)

    def dump_text(self) -> str:
        """Deterministic text dump: objects, arrows, composition triples."""
        lines = [f"category {self.name}".rstrip()]
        lines.append(f"objects {len(self.objects)}")
        for x in self.objects:
            lines.append(f"  obj {x} {canonical_key(self.obj_label[x])}")
        lines.append(f"arrows {len(self.arrows)}")
        for a in self.arrows:
            tag = " id" if a == self.ident[self.src[a]] and self.src[a] == self.tgt[a] else ""
            lines.append(f"  arr {a} {self.src[a]}->{self.tgt[a]}"
                         f" {canonical_key(self.arrow_label[a])}{tag}")
        lines.append("composition")
        for (g, f), h in sorted(self.comp.items()):
            lines.append(f"  {g} . {f} = {h}")
        return "\n".join(lines) + "\n"


@dataclass
class Functor:
    source: FinCategory
    target: FinCategory
    obj_map: dict[int, int]
    arrow_map: dict[int, int]
    name: str = ""

    def validate(self) -> CheckResult:
        C, D = self.source, self.target
        for x in C.objects:
            if self.obj_map.get(x) not in D.objects:
                return CheckResult(False, x, "object image missing")
        for a in C.arrows:
            fa = self.arrow_map.get(a)
            if fa is None:
                return CheckResult(False, a, "arrow image missing")
            if D.src[fa] != self.obj_map[C.src[a]] or D.tgt[fa] != self.obj_map[C.tgt[a]]:
                return CheckResult(False, a, "arrow image endpoints wrong")
        for x in C.objects:
            if self.arrow_map[C.ident[x]] != D.ident[self.obj_map[x]]:
                return CheckResult(False, x, "identity not preserved")
        for f in C.arrows:
            for g in C.arrows_from(C.tgt[f]):
                if self.arrow_map[C.comp[(g, f)]] != D.comp[(self.arrow_map[g], self.arrow_map[f])]:
                    return CheckResult(False, (g, f), "composition not preserved")
        return CheckResult(True)

    def __call__(self, arrow: int) -> int:
        return self.arrow_map[arrow]

    def on_obj(self, x: int) -> int:
        return self.obj_map[x]


def identity_functor(C: FinCategory) -> Functor:
    return Functor(C, C, {x: x for x in C.objects}, {a: a for a in C.arrows}, name="id")


def compose_functors(G: Functor, F: Functor) -> Functor:
    """G after F."""
    if G.source is not F.target:
        raise ValueError("functors not composable")
    return Functor(F.source, G.target,
                   {x: G.obj_map[F.obj_map[x]] for x in F.source.objects},
                   {a: G.arrow_map[F.arrow_map[a]] for a in F.source.arrows},
                   name=f"{G.name}.{F.name}")


@dataclass
class OverFunctor:
    """A finite category with a functor to a base category."""

    total: FinCategory
    base: FinCategory
    proj: Functor

    def __post_init__(self):
        if self.proj.source is not self.total or self.proj.target is not self.base:
            raise ValueError("projection endpoints do not match total/base")

    def validate(self) -> CheckResult:
        return self.proj.validate()

    def fiber_objects(self, b: int) -> tuple[int, ...]:
        return tuple(e for e in self.total.objects if self.proj.obj_map[e] == b)

    def lifts(self, e: int, g: int) -> tuple[int, ...]:
        """Arrows of the total category with source e lying over g."""
        return tuple(a for a in self.total.arrows_from(e) if self.proj.arrow_map[a] == g)


def is_discrete_opfibration(p: OverFunctor) -> CheckResult:
    """Unique lifting of every base arrow from every source over its
    domain.  The witness on failure is (object, base arrow, lift count)."""
    for e in p.total.objects:
        be = p.proj.obj_map[e]
        for g in p.base.arrows_from(be):
            k = len(p.lifts(e, g))
            if k != 1:
                return CheckResult(False, (e, g, k),
                                   f"base arrow has {k} lifts instead of 1")
    return CheckResult(True)


def opfibration_transport(p: OverFunctor) -> Callable[[int, int], int]:
    """For a discrete opfibration, the map (object e, base arrow g from
    p(e)) -> target of the unique lift."""
    def push(e: int, g: int) -> int:
        (a,) = p.lifts(e, g)
        return p.total.tgt[a]
    return push


def i_local_check(p: OverFunctor, max_len: int = 3) -> CheckResult:
    """Unique extension of composable base chains from a lift of their
    first vertex; chains bounded by ``max_len``.  For 1-categories this
    is equivalent to being a discrete opfibration (asserted in tests)."""
    B = p.base
    chains: list[tuple[int, ...]] = [(g,) for g in B.arrows]
    for _ in range(max_len - 1):
        chains.extend(tuple(c) + (g,) for c in list(chains) if len(c) == _ + 1
                      for g in B.arrows_from(B.tgt[c[-1]]))
    for chain in chains:
        for e in p.total.objects:
            if p.proj.obj_map[e] != B.src[chain[0]]:
                continue
            count = _count_chain_lifts(p, e, chain)
            if count != 1:
                return CheckResult(False, (e, chain, count),
                                   f"chain has {count} lifts instead of 1")
    return CheckResult(True)


def _count_chain_lifts(p: OverFunctor, e: int, chain: tuple[int, ...]) -> int:
    frontier = [e]
    for g in chain[:-1]:
        frontier = [p.total.tgt[a] for x in frontier for a in p.lifts(x, g)]
    return sum(len(p.lifts(x, chain[-1])) for x in frontier)


# -- slices, pullbacks, components ------------------------------------


def comma_slice(C: FinCategory, x: int) -> tuple[FinCategory, Functor]:
    """The slice C_{/x} with its forgetful functor to C.

    Objects are arrows into x; arrows are commuting triangles.
    """
    if x not in C.objects:
        raise ValueError(f"object {x} not in category")
    objs = {a: ("sl", canonical_key(C.arrow_label[a])) for a in C.arrows_to(x)}
    arrows, idents, comp = {}, {}, {}
    forget_obj, forget_arr = {}, {}
    for a, la in objs.items():
        for b, lb in objs.items():
            for h in C.hom(C.src[a], C.src[b]):
                if C.comp[(b, h)] == a:
                    arrows[("slarr", la, lb, h)] = (la, lb)
    for a, la in objs.items():
        idents[la] = ("slarr", la, la, C.ident[C.src[a]])
    for (tag1, la, lb, h1), _ in arrows.items():
        for (tag2, lb2, lc, h2), _ in arrows.items():
            if lb2 == lb:
                comp[(("slarr", lb, lc, h2), ("slarr", la, lb, h1))] = \
                    ("slarr", la, lc, C.comp[(h2, h1)])
    S = FinCategory.build(objs.values(), arrows, idents, comp,
                          name=f"{C.name}/{x}")
    for a, la in objs.items():
        forget_obj[S.obj_id[la]] = C.src[a]
    for lab in arrows:
        forget_arr[S.arrow_id[lab]] = lab[3]
    return S, Functor(S, C, forget_obj, forget_arr, name="forget")


def pullback(f: Functor, g: Functor) -> tuple[FinCategory, Functor, Functor]:
    """Strict fiber product of f: A -> B and g: C -> B with projections."""
    if f.target is not g.target:
        raise ValueError("pullback needs a shared target")
    A, C = f.source, g.source
    objs = {}
    for x in A.objects:
        for y in C.objects:
            if f.obj_map[x] == g.obj_map[y]:
                objs[(x, y)] = ("pb", x, y)
    arrows, idents, comp = {}, {}, {}
    arrow_pairs = {}
    for a in A.arrows:
        for c in C.arrows:
            if f.arrow_map[a] == g.arrow_map[c]:
                la = ("pbarr", a, c)
                arrows[la] = (("pb", A.src[a], C.src[c]), ("pb", A.tgt[a], C.tgt[c]))
                arrow_pairs[la] = (a, c)
    for (x, y), lab in objs.items():
        idents[lab] = ("pbarr", A.ident[x], C.ident[y])
    for la, (a1, c1) in arrow_pairs.items():
        for lb, (a2, c2) in arrow_pairs.items():
            if A.tgt[a1] == A.src[a2] and C.tgt[c1] == C.src[c2]:
                comp[(lb, la)] = ("pbarr", A.comp[(a2, a1)], C.comp[(c2, c1)])
    P = FinCategory.build(objs.values(), arrows, idents, comp,
                          name=f"{A.name}x{C.name}")
    p1 = Functor(P, A, {P.obj_id[l]: x for (x, y), l in objs.items()},
                 {P.arrow_id[l]: a for l, (a, c) in arrow_pairs.items()}, name="pr1")
    p2 = Functor(P, C, {P.obj_id[l]: y for (x, y), l in objs.items()},
                 {P.arrow_id[l]: c for l, (a, c) in arrow_pairs.items()}, name="pr2")
    return P, p1, p2


def connected_components(C: FinCategory) -> dict[int, int]:
    """Zig-zag components; each object maps to the least object id in its
    component (the deterministic representative)."""
    parent = {x: x for x in C.objects}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    for a in C.arrows:
        union(C.src[a], C.tgt[a])
    return {x: find(x) for x in C.objects}


def iso_check(f: Functor) -> CheckResult:
    """True iff f is bijective on objects and arrows with a functorial
    inverse."""
    v = f.validate()
    if not v:
        return v
    C, D = f.source, f.target
    if len(set(f.obj_map.values())) != len(C.objects) or len(C.objects) != len(D.objects):
        return CheckResult(False, None, "not bijective on objects")
    if len(set(f.arrow_map.values())) != len(C.arrows) or len(C.arrows) != len(D.arrows):
        return CheckResult(False, None, "not bijective on arrows")
    inv_obj = {v: k for k, v in f.obj_map.items()}
    inv_arr = {v: k for k, v in f.arrow_map.items()}
    g = Functor(D, C, inv_obj, inv_arr, name=f"{f.name}^-1")
    return g.validate()


def verify_pullback_cone(P: FinCategory, p1: Functor, p2: Functor,
                         cone_src: FinCategory, u: Functor, v: Functor) -> CheckResult:
    """Exactly one mediating functor cone_src -> P commuting with both
    projections (checked by exhaustive search)."""
    found = [F for F in enumerate_functors(cone_src, P)
             if compose_functors(p1, F).obj_map == u.obj_map
             and compose_functors(p1, F).arrow_map == u.arrow_map
             and compose_functors(p2, F).obj_map == v.obj_map
             and compose_functors(p2, F).arrow_map == v.arrow_map]
    if len(found) != 1:
        return CheckResult(False, len(found), f"{len(found)} mediating functors")
    return CheckResult(True, found[0])


def enumerate_functors(C: FinCategory, D: FinCategory,
                       compatible=None) -> list[Functor]:
    """All functors C -> D by backtracking over arrow images.

    ``compatible(kind, c_item, d_item)`` may prune object ('obj') or
    arrow ('arr') image choices; used for over-category enumerations.
    """
    results: list[Functor] = []
    arrows = sorted(C.arrows, key=lambda a: (C.src[a], C.tgt[a], a))
    non_id = [a for a in arrows if a not in
              {C.ident[x] for x in C.objects} or C.src[a] != C.tgt[a]]

    def obj_choices(x):
        for y in D.objects:
            if compatible is None or compatible("obj", x, y):
                yield y

    def extend(i, omap, amap):
        if i == len(arrows):
            # fill object images untouched by arrows (isolated objects)
            missing = [x for x in C.objects if x not in omap]

            def fill(j, om):
                if j == len(missing):
                    full_amap = dict(amap)
                    for x in C.objects:
                        full_amap.setdefault(C.ident[x], D.ident[om[x]])
                    F = Functor(C, D, dict(om), full_amap)
                    if F.validate():
                        results.append(F)
                    return
                for y in obj_choices(missing[j]):
                    om[missing[j]] = y
                    fill(j + 1, om)
                    del om[missing[j]]
            fill(0, omap)
            return
        a = arrows[i]
        sx, tx = C.src[a], C.tgt[a]
        src_opts = [omap[sx]] if sx in omap else list(obj_choices(sx))
        for ys in src_opts:
            for yt in ([omap[tx]] if tx in omap else list(obj_choices(tx))):
                for da in D.hom(ys, yt):
                    if compatible is not None and not compatible("arr", a, da):
                        continue
                    if a == C.ident[sx] and sx == tx and da != D.ident[ys]:
                        continue
                    omap2 = dict(omap)
                    omap2[sx], omap2[tx] = ys, yt
                    amap2 = dict(amap)
                    amap2[a] = da
                    ok = True
                    for b, db in list(amap2.items()):
                        if C.tgt[b] == C.src[a] and (a, b) in C.comp:
                            ab = C.comp[(a, b)]
                            dab = D.comp.get((da, db))
                            if ab in amap2 and amap2[ab] != dab:
                                ok = False
                                break
                            amap2[ab] = dab
                        if C.tgt[a] == C.src[b] and (b, a) in C.comp:
                            ba = C.comp[(b, a)]
                            dba = D.comp.get((db, da))
                            if ba in amap2 and amap2[ba] != dba:
                                ok = False
                                break
                            amap2[ba] = dba
                    if ok:
                        extend(i + 1, omap2, amap2)
    extend(0, {}, {})
    # deduplicate (composites may be assigned twice in different orders)
    seen, uniq = set(), []
    for F in results:
        key = (tuple(sorted(F.obj_map.items())), tuple(sorted(F.arrow_map.items())))
        if key not in seen:
            seen.add(key)
            uniq.append(F)
    return uniq


def grothendieck(C: FinCategory, values: dict[int, tuple],
                 action: dict[tuple[int, Any], Any]) -> OverFunctor:
    """The category of elements of a Set-valued functor on C.

    ``values[x]`` is the set at x; ``action[(a, s)]`` the image of s
    under the arrow a.  Result projects back to C and is a discrete
    opfibration by construction.
    """
    objs = {}
    for x in C.objects:
        for s in values[x]:
            objs[(x, s)] = ("el", x, canonical_key(s))
    arrows, idents, comp = {}, {}, {}
    data = {}
    for a in C.arrows:
        for s in values[C.src[a]]:
            lab = ("elarr", a, canonical_key(s))
            arrows[lab] = (objs[(C.src[a], s)], objs[(C.tgt[a], action[(a, s)])])
            data[lab] = (a, s)
    for (x, s), lab in objs.items():
        idents[lab] = ("elarr", C.ident[x], canonical_key(s))
    for la, (a, s) in data.items():
        for lb, (b, t) in data.items():
            if C.tgt[a] == C.src[b] and action[(a, s)] == t:
                comp[(lb, la)] = ("elarr", C.comp[(b, a)], canonical_key(s))
    E = FinCategory.build(objs.values(), arrows, idents, comp, name=f"int({C.name})")
    proj = Functor(E, C,
                   {E.obj_id[l]: x for (x, s), l in objs.items()},
                   {E.arrow_id[l]: a for l, (a, s) in data.items()},
                   name="proj")
    return OverFunctor(E, C, proj)


def straighten_opfibration(p: OverFunctor):
    """Classical 1-categorical straightening: fibers plus transport.

    Returns (values, action) suitable for :func:`grothendieck`.
    """
    push = opfibration_transport(p)
    values = {b: p.fiber_objects(b) for b in p.base.objects}
    action = {}
    for g in p.base.arrows:
        for e in values[p.base.src[g]]:
            action[(g, e)] = push(e, g)
    return values, action
