"""Straightening and unstraightening for operadic left fibrations.

Unstraightening is the explicit operadic Grothendieck construction: the
total operad has colors (color, element) and keeps exactly the
operations whose action hits the prescribed outputs.  Straightening goes
the other way through the comma formula: the carrier at a color x is
the set of connected components of

    Env(T) x_{Env(O)} Env(O)_{/x}

computed with the envelope's underlying categories, and the action
moves component representatives by one composition step.  Each
component must contain exactly one canonical object (a single total
color over x paired with the identity of x); a violation signals a bug
or a non-fibration input.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import pointed
from .envelope import underlying_envelope
from .fincat import (CheckResult, FinCategory, Functor, canonical_key,
                     comma_slice, connected_components, iso_check, pullback)
from .operads import (Algebra, ColoredOperad, OperadMap, Operation,
                      algebra_map_check, block_diag, build_operad,
                      perm_inverse)
from .operators import (OperatorCategory, OperatorCategoryMap,
                        induced_operator_map, is_operadic_left_fibration)


class ContractibilityError(Exception):
    """A comma component without exactly one canonical object."""

    def __init__(self, witness, message):
        super().__init__(message)
        self.witness = witness


@dataclass
class OperadicLeftFibration:
    """An operad map realized over a shared truncation, with its fibers."""

    base: OperatorCategory
    total: OperatorCategory
    proj: OperadMap
    map: OperatorCategoryMap
    fibers: dict

    @classmethod
    def realize(cls, proj: OperadMap, horizon: int, check: bool = True,
                check_axioms: bool = False) -> "OperadicLeftFibration":
        """Materialize at the horizon.  The operator axioms of the total
        hold by construction from a valid operad, so they are re-verified
        only on request; the fibration invariant is checked by default."""
        from .operators import operator_category
        base = operator_category(proj.target, horizon)
        total = OperatorCategory(proj.source, horizon, base=base.base,
                                 check=check_axioms)
        m = induced_operator_map(proj, total, base)
        fibers = {c: tuple(s for s in proj.source.colors if proj.color_map[s] == c)
                  for c in proj.target.colors}
        fib = cls(base, total, proj, m, fibers)
        if check:
            res = is_operadic_left_fibration(m)
            if not res:
                raise ValueError(f"not an operadic left fibration: {res!r}")
        return fib

    def fiber(self, color):
        return self.fibers[color]


def unstraighten_operad(F: Algebra) -> OperadMap:
    """The operad-level Grothendieck construction: the projection from
    the total operad of (color, element) pairs."""
    v = F.validate()
    if not v:
        raise ValueError(f"invalid algebra: {v!r}")
    P = F.operad
    colors = [(c, s) for c in P.colors for s in F.carriers[c]]
    ops = {}
    for op_id, o in P.ops.items():
        for args in itertools.product(*[F.carriers[c] for c in o.inputs]):
            val = F.apply(op_id, args)
            ops[("el", op_id, args)] = Operation(
                tuple(zip(o.inputs, args)), (o.output, val))
    units = {(c, s): ("el", P.units[c], (s,)) for c, s in colors}
    symmetry = {}
    for (op_id, p), r in P.symmetry.items():
        for args in itertools.product(*[F.carriers[c] for c in P.ops[op_id].inputs]):
            n = len(p)
            pinv = perm_inverse(p)
            permuted = tuple(args[pinv[j]] for j in range(n))
            symmetry[(("el", op_id, args), p)] = ("el", r, permuted)
    composition = {}
    for (outer, inners), res in P.composition.items():
        pools = [itertools.product(*[F.carriers[c] for c in P.ops[i].inputs])
                 for i in inners]
        for blocks in itertools.product(*[list(pool) for pool in pools]):
            mids = tuple(F.apply(i, b) for i, b in zip(inners, blocks))
            flat = tuple(s for b in blocks for s in b)
            composition[(("el", outer, mids),
                         tuple(("el", i, b) for i, b in zip(inners, blocks)))] = \
                ("el", res, flat)
    total = ColoredOperad(colors, ops, units, symmetry, composition,
                          arity_cap=P.arity_cap,
                          name=f"unst({P.name},{F.name or 'F'})")
    return OperadMap(total, P,
                     {(c, s): c for c, s in colors},
                     {("el", op_id, args): op_id
                      for (tag, op_id, args) in ops},
                     name="unst_proj")


def unstraighten(F: Algebra, horizon: int = 3,
                 check: bool = True) -> OperadicLeftFibration:
    """The operadic Grothendieck construction of a set-valued algebra,
    realized over the truncation."""
    return OperadicLeftFibration.realize(unstraighten_operad(F), horizon,
                                         check=check)


@dataclass
class StraighteningResult:
    algebra: Algebra
    comma_witness: dict  # color -> (comma category, components, canonical map)


def _envelope_functor(fib: OperadicLeftFibration):
    """The induced functor between underlying envelopes Env(T) -> Env(O)."""
    envT, t_to_total = underlying_envelope(fib.total)
    envO, o_to_total = underlying_envelope(fib.base)
    o_from_total = {v: k for k, v in o_to_total.items()}
    obj_map = {x: envO.obj_id[("ob", tuple(fib.proj.color_map[c]
                                           for c in envT.obj_label[x][1]))]
               for x in envT.objects}
    arr_map = {a: o_from_total[fib.map.functor.arrow_map[t_to_total[a]]]
               for a in envT.arrows}
    return envT, envO, Functor(envT, envO, obj_map, arr_map, name="env_q")


def _comma_category(envT, envO, q, color):
    """Env(T) x_{Env(O)} Env(O)_{/x} for x the given base color."""
    x_obj = envO.obj_id[("ob", (color,))]
    S, forget = comma_slice(envO, x_obj)
    C, p1, p2 = pullback(q, forget)
    id_slice_label = ("sl", canonical_key(envO.arrow_label[envO.ident[x_obj]]))
    canonical = {}
    for obj in C.objects:
        t_side = p1.obj_map[obj]
        colors_t = envT.obj_label[t_side][1]
        slice_label = S.obj_label[p2.obj_map[obj]]
        if len(colors_t) == 1 and slice_label == id_slice_label:
            canonical[obj] = colors_t[0]
    return C, p1, p2, canonical


def straighten(fib: OperadicLeftFibration,
               check: bool = True) -> StraighteningResult:
    P = fib.base.operad
    carriers = {}
    component_name = {}  # (color, component rep) -> canonical total color
    witness = {}
    comma_data = {}
    envT, envO, q = _envelope_functor(fib)
    for x in P.colors:
        C, p1, p2, canonical = _comma_category(envT, envO, q, x)
        comps = connected_components(C)
        by_comp: dict[int, list] = {}
        for obj, s in canonical.items():
            by_comp.setdefault(comps[obj], []).append(s)
        for rep in set(comps.values()):
            found = by_comp.get(rep, [])
            if len(found) != 1:
                raise ContractibilityError(
                    (x, rep, tuple(found)),
                    f"comma component over color {x!r} has {len(found)} "
                    f"canonical objects instead of 1")
        names = sorted(((rep, ss[0]) for rep, ss in by_comp.items()),
                       key=lambda t: canonical_key(t[1]))
        carriers[x] = tuple(s for _, s in names)
        for rep, s in names:
            component_name[(x, rep)] = s
        witness[x] = (C, comps, dict(canonical))
        comma_data[x] = (C, p1, p2, comps)
    action = {}
    for op_id, o in P.ops.items():
        table = {}
        y = o.output
        C, p1, p2, comps = comma_data[y]
        S = p2.target
        psi_arrow = _active_arrow(fib.base, envO, tuple(o.inputs), op_id)
        slice_obj = S.obj_id[("sl", canonical_key(envO.arrow_label[psi_arrow]))]
        for args in itertools.product(*[carriers[c] for c in o.inputs]):
            # the comma object (concatenated canonical list, the op itself)
            t_obj = envT.obj_id[("ob", tuple(args))]
            comma_obj = C.obj_id[("pb", t_obj, slice_obj)]
            rep = comps[comma_obj]
            table[args] = component_name[(y, rep)]
        action[op_id] = table
    alg = Algebra(P, carriers, action, name=f"st({fib.total.operad.name})")
    if check:
        v = alg.validate()
        if not v:
            raise ContractibilityError(v.witness,
                                       f"straightened action fails algebra "
                                       f"axioms: {v.detail}")
    return StraighteningResult(alg, witness)


def _active_arrow(opcat: OperatorCategory, env: FinCategory, src_colors, op_id):
    """The id, in the underlying envelope, of the arrow presenting a
    single operation over the unique active map to 1_+."""
    f = pointed.beta(len(src_colors))
    total_arrow = opcat.arrow(tuple(src_colors), f, (op_id,))
    return env.arrow_id[opcat.total.arrow_label[total_arrow]]


# -- roundtrip isomorphisms ---------------------------------------------


def algebra_roundtrip_iso(F: Algebra, result: StraighteningResult) -> dict | None:
    """The natural comparison F -> straighten(unstraighten(F)): an
    element s at color c names the carrier element given by the
    canonical total color (c, s).  Returns the per-color family, or None
    if it fails to be an isomorphism of algebras."""
    P = F.operad
    family = {}
    for c in P.colors:
        fam = {}
        for s in F.carriers[c]:
            if (c, s) not in result.algebra.carriers[c]:
                return None
            fam[s] = (c, s)
        if len(set(fam.values())) != len(result.algebra.carriers[c]):
            return None
        family[c] = fam
    if not algebra_map_check(family, F, result.algebra):
        return None
    return family


def fibration_roundtrip_map(T: OperadicLeftFibration,
                            A: Algebra) -> OperadMap:
    """The comparison T -> unstraighten(straighten(T)) over the base.

    ``A`` must be straighten(T).algebra; the carrier elements are
    canonical total colors, so the color map is s |-> (proj(s), s)."""
    P = T.base.operad
    Q = T.total.operad
    color_map = {s: (T.proj.color_map[s], s) for s in Q.colors}
    op_map = {op_id: ("el", T.proj.op_map[op_id], tuple(o.inputs))
              for op_id, o in Q.ops.items()}
    U = unstraighten_operad(A)
    return OperadMap(Q, U.source, color_map, op_map, name="rt")


def is_fibrewise_equivalence(f: OperadMap, T: OperadicLeftFibration,
                             Q: OperadicLeftFibration) -> CheckResult:
    """Bijection on every color fiber for a map of fibrations over the
    same base (f must commute with the projections)."""
    for s in T.total.operad.colors:
        if Q.proj.color_map.get(f.color_map.get(s)) != T.proj.color_map[s]:
            return CheckResult(False, s, "map does not commute with projections")
    for c in T.base.operad.colors:
        image = [f.color_map[s] for s in T.fiber(c)]
        if len(set(image)) != len(image) or sorted(
                map(canonical_key, image)) != sorted(
                map(canonical_key, Q.fiber(c))):
            return CheckResult(False, c, "fiber comparison is not a bijection")
    return CheckResult(True)


def realized_iso_check(f: OperadMap, T: OperadicLeftFibration,
                       Q: OperadicLeftFibration) -> CheckResult:
    """iso_check of the realized functor between the totals."""
    m = induced_operator_map(f, T.total, Q.total)
    return iso_check(m.functor)


def enumerate_fibration_maps(T: OperadicLeftFibration,
                             Q: OperadicLeftFibration) -> list[OperadMap]:
    """All operad maps between the totals commuting with the projections."""
    out = []
    src, tgt = T.total.operad, Q.total.operad
    colors = list(src.colors)
    pools = []
    for s in colors:
        base_c = T.proj.color_map[s]
        pools.append(tuple(t for t in tgt.colors
                           if Q.proj.color_map[t] == base_c))
    for images in itertools.product(*pools):
        cmap = dict(zip(colors, images))
        op_pools = []
        ids = src.op_ids()
        ok = True
        for op_id in ids:
            o = src.ops[op_id]
            cands = tuple(
                q for q in tgt.multihom(tuple(cmap[c] for c in o.inputs),
                                        cmap[o.output])
                if Q.proj.op_map[q] == T.proj.op_map[op_id])
            if op_id in src.units.values():
                cands = tuple(q for q in cands
                              if q == tgt.units[cmap[o.output]])
            if not cands:
                ok = False
                break
            op_pools.append(cands)
        if not ok:
            continue
        for choice in itertools.product(*op_pools):
            f = OperadMap(src, tgt, cmap, dict(zip(ids, choice)))
            if f.validate():
                out.append(f)
    return out


def unstraighten_algebra_map(g: dict, F: Algebra, G: Algebra,
                             UF: OperadicLeftFibration,
                             UG: OperadicLeftFibration) -> OperadMap:
    """The map of Grothendieck constructions induced by an algebra map."""
    P = F.operad
    color_map = {(c, s): (c, g[c][s]) for c in P.colors for s in F.carriers[c]}
    op_map = {}
    for op_label in UF.total.operad.ops:
        _, op_id, args = op_label
        o = P.ops[op_id]
        op_map[op_label] = ("el", op_id,
                            tuple(g[c][s] for c, s in zip(o.inputs, args)))
    return OperadMap(UF.total.operad, UG.total.operad, color_map, op_map,
                     name="unst(g)")


def straighten_algebra_map(f: OperadMap, T: OperadicLeftFibration,
                           Q: OperadicLeftFibration,
                           ST: StraighteningResult,
                           SQ: StraighteningResult) -> dict:
    """The per-color family straighten(f): carrier elements are canonical
    total colors, moved by the color map of f."""
    P = T.base.operad
    return {c: {s: f.color_map[s] for s in ST.algebra.carriers[c]}
            for c in P.colors}


# -- the sweep-level report ----------------------------------------------


@dataclass
class RoundtripRecord:
    instance: str
    check: str
    ok: bool
    witness: object = None


def roundtrip_report(P: ColoredOperad, size_bound: int = 2,
                     horizon: int = 3) -> list[RoundtripRecord]:
    """Both roundtrips plus naturality over every enumerated algebra and
    the induced fibration suite."""
    from .operads import enumerate_algebras
    records: list[RoundtripRecord] = []
    enum = enumerate_algebras(P, size_bound)
    fibs = []
    for idx, F in enumerate(enum.raw):
        name = f"{P.name}/alg{idx}"
        try:
            U = unstraighten(F, horizon=horizon)
        except ValueError as exc:
            records.append(RoundtripRecord(name, "unstraighten-fibration",
                                           False, str(exc)))
            continue
        records.append(RoundtripRecord(name, "unstraighten-fibration", True))
        S = straighten(U)
        iso = algebra_roundtrip_iso(F, S)
        records.append(RoundtripRecord(
            name, "straighten-unstraighten-iso", iso is not None,
            None if iso else "no natural isomorphism"))
        fibs.append((name, F, U, S, iso))
    # naturality of the unit on every algebra map between enumerated algebras
    from .operads import enumerate_algebra_maps
    for i, (name_i, F, UF, SF, iso_F) in enumerate(fibs):
        for j, (name_j, G, UG, SG, iso_G) in enumerate(fibs):
            if iso_F is None or iso_G is None:
                continue
            for k, g in enumerate(enumerate_algebra_maps(F, G)):
                fmap = unstraighten_algebra_map(g, F, G, UF, UG)
                st_g = straighten_algebra_map(fmap, UF, UG, SF, SG)
                ok = True
                for c in P.colors:
                    for s in F.carriers[c]:
                        if st_g[c][iso_F[c][s]] != iso_G[c][g[c][s]]:
                            ok = False
                records.append(RoundtripRecord(
                    f"{name_i}->{name_j}/map{k}", "unit-naturality", ok))
    # counit: fibration roundtrips, on relabeled copies too
    from .zoo import relabeled_operad
    for name, F, U, S, iso in fibs:
        variants = [("", U)]
        rel, cmap, omap = relabeled_operad(U.total.operad, tag="r")
        rel_proj = OperadMap(rel, P,
                             {cmap[c]: U.proj.color_map[c] for c in cmap},
                             {omap[o]: U.proj.op_map[o] for o in omap})
        variants.append(("~relabel", OperadicLeftFibration.realize(
            rel_proj, horizon, check=True)))
        for tag, T in variants:
            ST = straighten(T)
            back = fibration_roundtrip_map(T, ST.algebra)
            ok = bool(back.validate()) and bool(back.is_isomorphism())
            if ok:
                u2 = unstraighten_operad(ST.algebra)
                ok = all(u2.color_map[back.color_map[s]] ==
                         T.proj.color_map[s] for s in T.total.operad.colors)
            records.append(RoundtripRecord(name + tag,
                                           "unstraighten-straighten-iso", ok))
    return records
