"""Symmetric monoidal envelopes of operator categories.

The envelope total over n_+ has objects (color list of length m, active
map m_+ -> n_+); an arrow over g is an operator-category arrow h over f
together with g such that alpha' . f = g . alpha.  Its fiber over 1_+ is
the wide subcategory of the operator category on arrows over active
maps, and the tensor of objects is list concatenation.

Objects are stored exactly as such pairs and never normalized by the
symmetry, so the unit inclusion is strict and the tensor comparison
arrow (id, beta) is an honest arrow of the category.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import pointed
from .fincat import (CheckResult, FinCategory, Functor, OverFunctor,
                     is_discrete_opfibration, pullback)
from .operators import OperatorCategory, OperatorCategoryMap, base_map_of_label
from .pointed import PointedMap


class HorizonExceeded(Exception):
    """A tensor query left the materialized truncation."""


def active_maps(m: int, n: int) -> list[PointedMap]:
    return [f for f in pointed.enumerate_maps(m, n) if f.is_active]


EnvObject = tuple  # ("env", colors, (m, n, alpha_image))


def env_object(colors: tuple, alpha: PointedMap) -> EnvObject:
    return ("env", tuple(colors), (alpha.source, alpha.target, alpha.image))


def env_object_alpha(label: EnvObject) -> PointedMap:
    m, n, image = label[2]
    return PointedMap(m, n, image)


class EnvelopeCategory:
    """Envelope data over an operator category.

    Objects are always enumerated; the full arrow tables are only
    materialized on demand (:meth:`as_fincategory`), since the sweeps
    need fibers and beta-pushes but not the whole composition table.
    """

    def __init__(self, opcat: OperatorCategory):
        self.opcat = opcat
        self.horizon = opcat.horizon
        self.objects: list[EnvObject] = []
        for n in range(self.horizon + 1):
            for m in range(self.horizon + 1):
                for alpha in active_maps(m, n):
                    for colors in itertools.product(opcat.operad.colors, repeat=m):
                        self.objects.append(env_object(colors, alpha))
        self.objects.sort(key=lambda lab: (lab[2][1], lab[2][0], lab[1], lab[2][2]))
        self._fincat: FinCategory | None = None
        self._fincat_proj = None

    # -- object-level structure -----------------------------------------

    def object_over(self, label: EnvObject) -> int:
        return label[2][1]

    def tensor(self, a: EnvObject, b: EnvObject) -> EnvObject:
        ca, fa = a[1], env_object_alpha(a)
        cb, fb = b[1], env_object_alpha(b)
        m, n = fa.source + fb.source, fa.target + fb.target
        if m > self.horizon or n > self.horizon:
            raise HorizonExceeded(f"tensor of lengths {fa.source}+{fb.source} "
                                  f"over {fa.target}+{fb.target} leaves horizon "
                                  f"{self.horizon}")
        image = fa.image + tuple(v + fa.target for v in fb.image)
        return env_object(ca + cb, PointedMap(m, n, image))

    def beta_target(self, a: EnvObject) -> EnvObject:
        """The target of the comparison arrow from the sum object to the
        tensor object: same list, total active map to 1_+ (or to 0_+ for
        the empty list over 0_+)."""
        colors = a[1]
        m = len(colors)
        return env_object(colors, pointed.beta(m))

    def unit_object(self, opcat_obj: int) -> EnvObject:
        colors = self.opcat.obj_colors(opcat_obj)
        return env_object(colors, pointed.identity(len(colors)))

    # -- arrows (lazy) ----------------------------------------------------

    def arrows_between(self, a: EnvObject, b: EnvObject):
        """All (opcat arrow id, g) pairs from a to b."""
        fa, fb = env_object_alpha(a), env_object_alpha(b)
        src_obj = self.opcat.obj(a[1])
        out = []
        for f in pointed.enumerate_maps(fa.source, fb.source):
            gs = [g for g in pointed.enumerate_maps(fa.target, fb.target)
                  if pointed.compose(fb, f) == pointed.compose(g, fa)]
            if not gs:
                continue
            for h in self.opcat.arrows_over(src_obj, self.opcat.base_arrow(f)):
                if self.opcat.obj_colors(self.opcat.total.tgt[h]) != b[1]:
                    continue
                for g in gs:
                    out.append((h, g))
        return out

    def beta_arrow(self, a: EnvObject):
        """The comparison arrow (identity component, beta) out of a."""
        fa = env_object_alpha(a)
        src_obj = self.opcat.obj(a[1])
        h = self.opcat.total.ident[src_obj]
        return (h, pointed.beta(fa.target))

    # -- materialization ---------------------------------------------------

    def as_fincategory(self) -> tuple[FinCategory, Functor]:
        """The envelope total as a finite category over truncated Fin_*."""
        if self._fincat is not None:
            return self._fincat, self._fincat_proj
        oc = self.opcat
        objs = {lab: lab for lab in self.objects}
        arrows, idents, comp, payload = {}, {}, {}, {}
        for a in self.objects:
            for b in self.objects:
                for h, g in self.arrows_between(a, b):
                    lab = ("envarr", a, b, h, (g.source, g.target, g.image))
                    arrows[lab] = (a, b)
                    payload[lab] = (a, b, h, g)
        for a in self.objects:
            fa = env_object_alpha(a)
            src_obj = oc.obj(a[1])
            idents[a] = ("envarr", a, a, oc.total.ident[src_obj],
                         (fa.target, fa.target, pointed.identity(fa.target).image))
        for lab1, (a, b, h1, g1) in payload.items():
            for lab2, (b2, c, h2, g2) in payload.items():
                if b2 != b:
                    continue
                comp[(lab2, lab1)] = ("envarr", a, c, oc.total.comp[(h2, h1)],
                                      (g1.source, g2.target,
                                       pointed.compose(g2, g1).image))
        E = FinCategory.build(objs.values(), arrows, idents, comp,
                              name=f"Env({oc.operad.name})")
        base = oc.base
        proj = Functor(
            E, base,
            {E.obj_id[lab]: base.obj_id[("fin", self.object_over(lab))]
             for lab in self.objects},
            {E.arrow_id[lab]: base.arrow_id[("pm", g.source, g.target, g.image)]
             for lab, (_, _, _, g) in payload.items()},
            name="env_proj")
        self._fincat, self._fincat_proj = E, proj
        return E, proj

    def unit_functor(self) -> Functor:
        """The inclusion of the operator category along identities."""
        E, _ = self.as_fincategory()
        oc = self.opcat
        obj_map, arrow_map = {}, {}
        for x in oc.total.objects:
            obj_map[x] = E.obj_id[self.unit_object(x)]
        for a in oc.total.arrows:
            src, f, tgt, fam = oc.arrow_family(a)
            lab = ("envarr", self.unit_object(oc.total.src[a]),
                   self.unit_object(oc.total.tgt[a]), a,
                   (f.source, f.target, f.image))
            arrow_map[a] = E.arrow_id[lab]
        return Functor(oc.total, E, obj_map, arrow_map, name="unit")

    # -- invariants ---------------------------------------------------------

    def check_fiber_over_one(self) -> CheckResult:
        """The fiber over 1_+ is the wide active subcategory of the
        operator category."""
        oc = self.opcat
        wide, to_total = underlying_envelope(oc)
        fiber_objs = [lab for lab in self.objects if self.object_over(lab) == 1]
        if len(fiber_objs) != len(wide.objects):
            return CheckResult(False, None, "fiber object count mismatch")
        for a in fiber_objs:
            for b in fiber_objs:
                fiber_arrows = sorted(h for h, g in self.arrows_between(a, b)
                                      if g.is_identity)
                wa = wide.obj_id[("ob", a[1])]
                wb = wide.obj_id[("ob", b[1])]
                wide_arrows = sorted(to_total[w] for w in wide.hom(wa, wb))
                if fiber_arrows != wide_arrows:
                    return CheckResult(False, (a, b), "fiber hom mismatch")
        return CheckResult(True)

    def check_tensor_concatenation(self) -> CheckResult:
        """Tensor of objects is list concatenation wherever it stays
        under the horizon."""
        for a in self.objects:
            for b in self.objects:
                fa, fb = env_object_alpha(a), env_object_alpha(b)
                if fa.source + fb.source > self.horizon or \
                        fa.target + fb.target > self.horizon:
                    continue
                t = self.tensor(a, b)
                if t[1] != a[1] + b[1]:
                    return CheckResult(False, (a, b), "tensor is not concatenation")
                if t not in set(self.objects):
                    return CheckResult(False, (a, b), "tensor left the object set")
        return CheckResult(True)


def envelope(opcat: OperatorCategory, check: bool = True) -> EnvelopeCategory:
    env = EnvelopeCategory(opcat)
    if check:
        res = env.check_tensor_concatenation()
        if not res:
            raise ValueError(f"envelope tensor invariant fails: {res!r}")
        res = env.check_fiber_over_one()
        if not res:
            raise ValueError(f"envelope fiber invariant fails: {res!r}")
    return env


def underlying_envelope(opcat: OperatorCategory) -> tuple[FinCategory, dict]:
    """The wide subcategory of the operator category on arrows over
    active maps: the underlying category of the envelope."""
    total = opcat.total
    keep = []
    for a in total.arrows:
        _, f, _, _ = opcat.arrow_family(a)
        if f.is_active:
            keep.append(a)
    keep_set = set(keep)
    objects = {total.obj_label[x]: total.obj_label[x] for x in total.objects}
    arrows = {total.arrow_label[a]: (total.obj_label[total.src[a]],
                                     total.obj_label[total.tgt[a]])
              for a in keep}
    idents = {total.obj_label[x]: total.arrow_label[total.ident[x]]
              for x in total.objects}
    comp = {}
    for a in keep:
        for b in keep:
            if total.tgt[a] == total.src[b] and (b, a) in total.comp:
                comp[(total.arrow_label[b], total.arrow_label[a])] = \
                    total.arrow_label[total.comp[(b, a)]]
    wide = FinCategory.build(objects.values(), arrows, idents, comp,
                             name=f"Env({opcat.operad.name})_1")
    to_total = {wide.arrow_id[total.arrow_label[a]]: a for a in keep}
    return wide, to_total


# -- fibrations over an envelope ----------------------------------------


class EnvelopedFibration:
    """The envelope of a map of operator categories, presented lazily.

    The fiber over (colors, alpha) is the fiber of the underlying map
    over the colors object (same alpha); the unique lift of an envelope
    arrow is the unique lift of its operator-category component, so the
    unique-lifting condition coincides with that of the underlying map.
    """

    def __init__(self, m: OperatorCategoryMap):
        self.map = m
        self.env = EnvelopeCategory(m.target)
        self._over = OverFunctor(m.source.total, m.target.total, m.functor)

    def is_discrete_opfibration(self) -> CheckResult:
        return is_discrete_opfibration(self._over)

    def fiber(self, label: EnvObject):
        base_obj = self.map.target.obj(label[1])
        return tuple((e, label) for e in self._over.fiber_objects(base_obj))

    def push_beta(self, elem):
        e, label = elem
        h, g = self.env.beta_arrow(label)
        (lift,) = self._over.lifts(e, h)
        return (self.map.source.total.tgt[lift], self.env.beta_target(label))


class MaterializedEnvelopeFibration:
    """A finite category over a materialized envelope total.

    Used for hand-built fibrations over an envelope that do not arise as
    envelopes of operator-category maps.
    """

    def __init__(self, env: EnvelopeCategory, over: OverFunctor):
        E, _ = env.as_fincategory()
        if over.base is not E:
            raise ValueError("fibration must live over the envelope total")
        self.env = env
        self.over = over
        self._E = E

    def is_discrete_opfibration(self) -> CheckResult:
        return is_discrete_opfibration(self.over)

    def fiber(self, label: EnvObject):
        return self.over.fiber_objects(self._E.obj_id[label])

    def push_beta(self, elem_and_label):
        elem, label = elem_and_label
        h, g = self.env.beta_arrow(label)
        arr_lab = ("envarr", label, self.env.beta_target(label), h,
                   (g.source, g.target, g.image))
        (lift,) = self.over.lifts(elem, self._E.arrow_id[arr_lab])
        return self.over.total.tgt[lift]


def is_strong_sm_left_fibration(fib) -> CheckResult:
    """Discrete opfibration whose beta-comparison maps between the fiber
    over a sum object and the fiber over its tensor are bijections.

    ``fib`` is an :class:`EnvelopedFibration` or
    :class:`MaterializedEnvelopeFibration`.
    """
    res = fib.is_discrete_opfibration()
    if not res:
        return CheckResult(False, res.witness, f"not a left fibration: {res.detail}")
    for label in fib.env.objects:
        target = fib.env.beta_target(label)
        src_fiber = fib.fiber(label)
        if isinstance(fib, MaterializedEnvelopeFibration):
            pushed = [fib.push_beta((e, label)) for e in src_fiber]
        else:
            pushed = [fib.push_beta(e)[0] for e in src_fiber]
        tgt_fiber = fib.fiber(target)
        if isinstance(fib, EnvelopedFibration):
            tgt_elems = [e for e, _ in tgt_fiber]
        else:
            tgt_elems = list(tgt_fiber)
        if len(set(pushed)) != len(pushed) or sorted(pushed) != sorted(tgt_elems):
            return CheckResult(
                False, (label, target),
                f"beta comparison {len(src_fiber)} -> {len(tgt_elems)} "
                f"is not a bijection")
    return CheckResult(True)


def slice_unit_base_change(env: EnvelopeCategory, over: OverFunctor) -> OverFunctor:
    """Pull a fibration over the envelope total back along the unit
    inclusion of the operator category."""
    res = is_discrete_opfibration(over)
    if not res:
        raise ValueError(f"input is not a fibration: {res!r}")
    unit = env.unit_functor()
    P, p1, p2 = pullback(unit, over.proj)
    oc = env.opcat
    return OverFunctor(P, oc.total, Functor(P, oc.total, p1.obj_map,
                                            p1.arrow_map, name="G"))
