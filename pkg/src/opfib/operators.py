"""Categories of operators over finite pointed sets.

``operator_category`` materializes, up to a configured arity horizon,
the category whose objects over n_+ are length-n color lists and whose
arrows over f: n_+ -> m_+ are families of operations indexed by the
non-basepoint fibers of f.  Composition plugs families into families and
reorders inputs with the symmetric-group action.

The module also hosts the fibration-side predicates: the three operator
axioms in bijective form, inert-preserving maps, operadic left
fibrations (unique lifting plus the fiber product condition), and the
chain-locality check.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

from . import pointed
from .fincat import (CheckResult, FinCategory, Functor, OverFunctor,
                     is_discrete_opfibration)
from .fincat import i_local_check as _chain_local
from .operads import ColoredOperad, OperadMap, sort_perm
from .pointed import PointedMap


_FINSTAR_CACHE: dict[int, FinCategory] = {}
_OPCAT_CACHE: dict[tuple[int, int], "OperatorCategory"] = {}


def truncated_finstar(horizon: int) -> FinCategory:
    """The full subcategory of pointed sets on 0_+ .. horizon_+."""
    if horizon in _FINSTAR_CACHE:
        return _FINSTAR_CACHE[horizon]
    cat = _build_truncated_finstar(horizon)
    _FINSTAR_CACHE[horizon] = cat
    return cat


def _build_truncated_finstar(horizon: int) -> FinCategory:
    objects = [("fin", n) for n in range(horizon + 1)]
    arrows, idents, comp = {}, {}, {}
    maps = pointed.enumerate_all_maps(horizon)
    for f in maps:
        arrows[("pm", f.source, f.target, f.image)] = \
            (("fin", f.source), ("fin", f.target))
    for n in range(horizon + 1):
        i = pointed.identity(n)
        idents[("fin", n)] = ("pm", n, n, i.image)
    for f in maps:
        for g in maps:
            if f.target == g.source:
                h = pointed.compose(g, f)
                comp[(("pm", g.source, g.target, g.image),
                      ("pm", f.source, f.target, f.image))] = \
                    ("pm", h.source, h.target, h.image)
    return FinCategory.build(objects, arrows, idents, comp,
                             name=f"Fin*<={horizon}")


def base_map_of_label(label) -> PointedMap:
    _, n, m, image = label
    return PointedMap(n, m, image)


@functools.lru_cache(maxsize=None)
def _composition_plan(f: PointedMap, g: PointedMap):
    """Index bookkeeping for composing families over f then g: for each
    target l of g.f, the 0-indexed fibers of g and the reordering
    permutation from block-concatenated to increasing input order."""
    gf = pointed.compose(g, f)
    steps = []
    for l in range(1, g.target + 1):
        js = g.preimage(l)
        positions = [i for j in js for i in f.preimage(j)]
        steps.append((l - 1, tuple(j - 1 for j in js), sort_perm(positions)))
    return gf, tuple(steps)


class OperatorCategory:
    """The category of operators of a colored operad, truncated."""

    def __init__(self, operad: ColoredOperad, horizon: int,
                 base: FinCategory | None = None, check: bool = True):
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        if horizon > operad.arity_cap:
            raise ValueError("horizon exceeds the operad's arity cap; "
                             "composite families would leave the tables")
        rep = operad.validate()
        if not rep.ok:
            raise ValueError(f"invalid operad: {rep!r}")
        self.operad = operad
        self.horizon = horizon
        self.base = base if base is not None else truncated_finstar(horizon)
        self._payload: dict = {}
        self.total = self._build_total()
        self.proj = self._build_proj()
        self.over = OverFunctor(self.total, self.base, self.proj)
        self._inert_lift_cache: dict = {}
        self._arrows_over: dict[tuple[int, int], list[int]] = {}
        for a in self.total.arrows:
            key = (self.total.src[a], self.proj.arrow_map[a])
            self._arrows_over.setdefault(key, []).append(a)
        self._arrows_over = {k: tuple(v) for k, v in self._arrows_over.items()}
        if check:
            res = self.check_operator_axioms()
            if not res:
                raise ValueError(f"operator axioms fail: {res!r}")

    # -- construction ---------------------------------------------------

    def _families_over(self, src_colors: tuple, f: PointedMap):
        """All (target colors, operation family) pairs over f from the
        given source colors."""
        P = self.operad
        per_target = []
        for j in range(1, f.target + 1):
            profile = tuple(src_colors[i - 1] for i in f.preimage(j))
            cell = []
            for d in P.colors:
                cell.extend((d, op) for op in P.multihom(profile, d))
            if not cell:
                return
            per_target.append(cell)
        for combo in itertools.product(*per_target):
            yield tuple(d for d, _ in combo), tuple(op for _, op in combo)

    def _build_total(self) -> FinCategory:
        P = self.operad
        objects = {}
        for n in range(self.horizon + 1):
            for colors in itertools.product(P.colors, repeat=n):
                objects[colors] = ("ob", colors)
        arrows, idents, comp = {}, {}, {}
        payload = {}
        base_maps = pointed.enumerate_all_maps(self.horizon)
        for f in base_maps:
            for src in itertools.product(P.colors, repeat=f.source):
                for tgt, fam in self._families_over(src, f):
                    lab = ("arr", src, (f.source, f.target, f.image), fam)
                    arrows[lab] = (("ob", src), ("ob", tgt))
                    payload[lab] = (src, f, tgt, fam)
        for colors in objects:
            fam = tuple(P.units[c] for c in colors)
            idents[("ob", colors)] = \
                ("arr", colors, (len(colors), len(colors),
                                 pointed.identity(len(colors)).image), fam)
        items = list(payload.items())
        by_src = {}
        for lab, (src, f, tgt, fam) in items:
            by_src.setdefault(src, []).append((lab, src, f, tgt, fam))
        plans: dict[tuple, tuple] = {}
        P = self.operad
        compose_memo: dict[tuple, object] = {}
        for lab_a, (src_a, f, mid, fam_a) in items:
            for lab_b, src_b, g, tgt_b, fam_b in by_src.get(mid, ()):
                key = (f, g)
                plan = plans.get(key)
                if plan is None:
                    plan = _composition_plan(f, g)
                    plans[key] = plan
                gf, steps = plan
                fam = []
                for l, js, perm in steps:
                    k = (fam_b[l], tuple(fam_a[j] for j in js), perm)
                    r = compose_memo.get(k)
                    if r is None:
                        r = P.act(perm, P.compose(k[0], k[1]))
                        compose_memo[k] = r
                    fam.append(r)
                comp[(lab_b, lab_a)] = \
                    ("arr", src_a, (gf.source, gf.target, gf.image), tuple(fam))
        total = FinCategory.build(objects.values(), arrows, idents, comp,
                                  name=f"N({P.name})")
        self._payload = {total.arrow_id[lab]: data for lab, data in payload.items()}
        return total

    def _compose_families(self, f: PointedMap, fam_f: tuple,
                          g: PointedMap, fam_g: tuple) -> tuple:
        """Family of g.f from families over f and g.

        The substitution concatenates fibers block by block, then the
        symmetry action resorts the inputs into increasing source order.
        """
        P = self.operad
        _, steps = _composition_plan(f, g)
        return tuple(P.act(perm, P.compose(fam_g[l], tuple(fam_f[j] for j in js)))
                     for l, js, perm in steps)

    def _build_proj(self) -> Functor:
        obj_map, arrow_map = {}, {}
        for x in self.total.objects:
            _, colors = self.total.obj_label[x]
            obj_map[x] = self.base.obj_id[("fin", len(colors))]
        for a in self.total.arrows:
            src, f, tgt, fam = self._payload_of(a)
            arrow_map[a] = self.base.arrow_id[("pm", f.source, f.target, f.image)]
        return Functor(self.total, self.base, obj_map, arrow_map, name="proj")

    def _payload_of(self, arrow_id: int):
        if not self._payload:
            raise RuntimeError("payload queried before construction")
        return self._payload[arrow_id]

    # -- object / arrow helpers ------------------------------------------

    def obj(self, colors: tuple) -> int:
        return self.total.obj_id[("ob", tuple(colors))]

    def obj_colors(self, obj_id: int) -> tuple:
        return self.total.obj_label[obj_id][1]

    def arrow_family(self, arrow_id: int):
        """(source colors, base map, target colors, operation family)."""
        return self._payload[arrow_id]

    def arrows_over(self, obj_id: int, base_arrow: int) -> tuple[int, ...]:
        return self._arrows_over.get((obj_id, base_arrow), ())

    def base_arrow(self, f: PointedMap) -> int:
        return self.base.arrow_id[("pm", f.source, f.target, f.image)]

    def arrow(self, src_colors: tuple, f: PointedMap, fam: tuple) -> int:
        return self.total.arrow_id[
            ("arr", tuple(src_colors), (f.source, f.target, f.image), tuple(fam))]

    def inert_lift(self, obj_id: int, f: PointedMap) -> int:
        """The canonical coCartesian lift of an inert base map: the
        unit-component family onto the surviving colors."""
        key = (obj_id, f)
        cached = self._inert_lift_cache.get(key)
        if cached is not None:
            return cached
        if not f.is_inert:
            raise ValueError("canonical lifts are only defined for inert maps")
        colors = self.obj_colors(obj_id)
        fam = tuple(self.operad.units[colors[f.preimage(j)[0] - 1]]
                    for j in range(1, f.target + 1))
        a = self.arrow(colors, f, fam)
        self._inert_lift_cache[key] = a
        return a

    def is_cocartesian(self, arrow_id: int) -> CheckResult:
        """Universal property of a coCartesian arrow, quantified over the
        materialized truncation."""
        lam_src = self.total.src[arrow_id]
        lam_tgt = self.total.tgt[arrow_id]
        f = self.proj.arrow_map[arrow_id]
        for gp in self.base.arrows_from(self.base.tgt[f]):
            gpf = self.base.comp[(gp, f)]
            for h in self.arrows_over(lam_src, gpf):
                count = sum(1 for hp in self.arrows_over(lam_tgt, gp)
                            if self.total.comp[(hp, arrow_id)] == h)
                if count != 1:
                    return CheckResult(False, (gp, h, count),
                                       f"{count} factorizations instead of 1")
        return CheckResult(True)

    def cocartesian_lifts(self, obj_id: int, base_arrow: int) -> tuple[int, ...]:
        return tuple(a for a in self.arrows_over(obj_id, base_arrow)
                     if self.is_cocartesian(a))

    # -- the operator axioms, bijective form -----------------------------

    def check_operator_axioms(self) -> CheckResult:
        res = self._check_unique_inert_lifts()
        if not res:
            return res
        res = self._check_object_segal()
        if not res:
            return res
        return self._check_hom_decomposition()

    def _inert_base_maps(self):
        for lab in self.base.arrow_label.values():
            f = base_map_of_label(lab)
            if f.is_inert:
                yield f

    def _check_unique_inert_lifts(self) -> CheckResult:
        """Axiom: every inert base map has a strictly unique coCartesian
        lift from every source over its domain, the canonical one."""
        for f in self._inert_base_maps():
            fid = self.base_arrow(f)
            for x in self.total.objects:
                if len(self.obj_colors(x)) != f.source:
                    continue
                lifts = self.cocartesian_lifts(x, fid)
                if len(lifts) != 1 or lifts[0] != self.inert_lift(x, f):
                    return CheckResult(False, (x, f, len(lifts)),
                                       "inert coCartesian lift not strictly unique")
        return CheckResult(True)

    def _check_object_segal(self) -> CheckResult:
        """Axiom: the inert projections exhibit objects over n_+ as exact
        n-tuples of objects over 1_+."""
        singles = [x for x in self.total.objects if len(self.obj_colors(x)) == 1]
        for n in range(self.horizon + 1):
            layer = [x for x in self.total.objects if len(self.obj_colors(x)) == n]
            image = {}
            for x in layer:
                key = tuple(self.total.tgt[self.inert_lift(x, pointed.projection(n, i))]
                            for i in range(1, n + 1))
                if key in image:
                    return CheckResult(False, (x, image[key]),
                                       "two objects share all projections")
                image[key] = x
            if len(image) != len(singles) ** n:
                return CheckResult(False, n, "object layer is not the n-fold product")
        return CheckResult(True)

    def _check_hom_decomposition(self) -> CheckResult:
        """Axiom: maps over f into y decompose as the product of maps
        over rho^j . f into the components of y (bijectively, all object
        pairs, empty homs included)."""
        # hom sizes indexed by (source object, base arrow, target object)
        hom_count: dict[tuple[int, int, int], int] = {}
        for a in self.total.arrows:
            key = (self.total.src[a], self.proj.arrow_map[a], self.total.tgt[a])
            hom_count[key] = hom_count.get(key, 0) + 1
        layers: dict[int, list[int]] = {}
        components: dict[int, tuple[int, ...]] = {}
        for y in self.total.objects:
            m = len(self.obj_colors(y))
            layers.setdefault(m, []).append(y)
            components[y] = tuple(
                self.total.tgt[self.inert_lift(y, pointed.projection(m, j))]
                for j in range(1, m + 1))
        for a_base in self.base.arrows:
            f = base_map_of_label(self.base.arrow_label[a_base])
            rho_f = [self.base_arrow(pointed.compose(pointed.projection(f.target, j), f))
                     for j in range(1, f.target + 1)]
            rho_lifts = {y: tuple(self.inert_lift(y, pointed.projection(f.target, j))
                                  for j in range(1, f.target + 1))
                         for y in layers.get(f.target, ())}
            for x in layers.get(f.source, ()):
                for y in layers.get(f.target, ()):
                    lhs = [h for h in self.arrows_over(x, a_base)
                           if self.total.tgt[h] == y]
                    images = {tuple(self.total.comp[(lift, h)]
                                    for lift in rho_lifts[y])
                              for h in lhs}
                    if len(images) != len(lhs):
                        return CheckResult(False, (x, y, a_base),
                                           "hom decomposition not injective")
                    rhs_count = 1
                    for j, yj in enumerate(components[y]):
                        rhs_count *= hom_count.get((x, rho_f[j], yj), 0)
                        if rhs_count == 0:
                            break
                    if rhs_count != len(lhs):
                        return CheckResult(False, (x, y, a_base),
                                           f"hom decomposition size {len(lhs)} "
                                           f"vs {rhs_count}")
        return CheckResult(True)


def operator_category(P: ColoredOperad, horizon: int,
                      check: bool = True) -> OperatorCategory:
    """Build (and cache) the operator category of an operad.

    Operads are treated as immutable after construction, so caching by
    identity is sound and keeps repeated realizations cheap.
    """
    key = (id(P), horizon)
    cached = _OPCAT_CACHE.get(key)
    if cached is not None:
        return cached
    oc = OperatorCategory(P, horizon, check=check)
    _OPCAT_CACHE[key] = oc
    return oc


# -- maps of operator categories ---------------------------------------


@dataclass
class OperatorCategoryMap:
    """A functor between operator-category totals over the shared base."""

    source: OperatorCategory
    target: OperatorCategory
    functor: Functor

    def over_functor(self) -> OverFunctor:
        return OverFunctor(self.source.total, self.target.total, self.functor)

    def commutes_with_projections(self) -> CheckResult:
        S, T = self.source, self.target
        if S.horizon != T.horizon:
            return CheckResult(False, None, "operator categories over different truncations")
        for x in S.total.objects:
            if T.proj.obj_map[self.functor.obj_map[x]] != S.proj.obj_map[x]:
                return CheckResult(False, x, "projection squares fail on an object")
        for a in S.total.arrows:
            if T.proj.arrow_map[self.functor.arrow_map[a]] != S.proj.arrow_map[a]:
                return CheckResult(False, a, "projection squares fail on an arrow")
        return CheckResult(True)


def realize_operad_map(f: OperadMap, horizon: int,
                       check: bool = True) -> OperatorCategoryMap:
    """Materialize an operad map as a functor of operator categories."""
    src = OperatorCategory(f.source, horizon, check=check)
    tgt = OperatorCategory(f.target, horizon, base=src.base, check=check)
    return induced_operator_map(f, src, tgt)


def induced_operator_map(f: OperadMap, src: OperatorCategory,
                         tgt: OperatorCategory) -> OperatorCategoryMap:
    obj_map, arrow_map = {}, {}
    for x in src.total.objects:
        colors = src.obj_colors(x)
        obj_map[x] = tgt.obj(tuple(f.color_map[c] for c in colors))
    for a in src.total.arrows:
        colors, bm, _, fam = src.arrow_family(a)
        arrow_map[a] = tgt.arrow(tuple(f.color_map[c] for c in colors), bm,
                                 tuple(f.op_map[op] for op in fam))
    return OperatorCategoryMap(src, tgt, Functor(src.total, tgt.total,
                                                 obj_map, arrow_map, name=f.name))


def is_operad_map(m: OperatorCategoryMap) -> CheckResult:
    """Valid functor over the base carrying canonical inert lifts to
    coCartesian arrows."""
    v = m.functor.validate()
    if not v:
        return v
    v = m.commutes_with_projections()
    if not v:
        return v
    S, T = m.source, m.target
    for f in S._inert_base_maps():
        for x in S.total.objects:
            if len(S.obj_colors(x)) != f.source:
                continue
            lam = S.inert_lift(x, f)
            res = T.is_cocartesian(m.functor.arrow_map[lam])
            if not res:
                return CheckResult(False, (x, f),
                                   "image of an inert lift is not coCartesian")
    return CheckResult(True)


def is_operadic_left_fibration(m: OperatorCategoryMap) -> CheckResult:
    """Discrete opfibration plus the fiber product condition: the fiber
    over a list object must be the product of the fibers over its
    components, via the inert lifts."""
    over = OverFunctor(m.source.total, m.target.total, m.functor)
    res = is_discrete_opfibration(over)
    if not res:
        return CheckResult(False, res.witness, f"not a left fibration: {res.detail}")
    T = m.target
    for x in T.total.objects:
        colors = T.obj_colors(x)
        n = len(colors)
        fiber = over.fiber_objects(x)
        component_fibers = []
        transported = []
        for e in fiber:
            key = []
            for i in range(1, n + 1):
                lam = T.inert_lift(x, pointed.projection(n, i))
                (a,) = over.lifts(e, lam)
                key.append(m.source.total.tgt[a])
            transported.append(tuple(key))
        for i in range(1, n + 1):
            lam = T.inert_lift(x, pointed.projection(n, i))
            xi = T.total.tgt[lam]
            component_fibers.append(over.fiber_objects(xi))
        expected = set(itertools.product(*component_fibers))
        if len(set(transported)) != len(transported) or set(transported) != expected:
            return CheckResult(False, x,
                               f"fiber over object is not the product of component "
                               f"fibers ({len(transported)} vs {len(expected)})")
    return CheckResult(True)


def i_local_check(m: OperatorCategoryMap, max_len: int = 3) -> CheckResult:
    """Unique lifting against initial-vertex inclusions of chains."""
    return _chain_local(m.over_functor(), max_len=max_len)
