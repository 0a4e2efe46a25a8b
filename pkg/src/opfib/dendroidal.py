"""Non-planar rooted trees, forests, and the dendroidal side.

Trees are stored root-down: ``above[e]`` lists the input edges of the
vertex whose output edge is e, so vertices are identified with their
output edges; edges absent from ``above`` are leaves.  Canonical forms
use the classic unordered-tree encoding (children sorted recursively),
which makes isomorphism a string comparison and forests sortable
multisets.

The module provides the tree operads, exhaustive operad-map hom-sets,
the level-by-level forest of a simplex of pointed maps, dendroidal
nerves of operads with their Segal checks, leaf-locality of operad maps,
and the nerve comparison against functor chains in the operator
category.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import pointed
from .fincat import CheckResult, canonical_key
from .operads import ColoredOperad, OperadMap, Operation, build_operad
from .operators import OperatorCategory, operator_category
from .pointed import PointedMap


@dataclass(frozen=True)
class Tree:
    """A non-planar finite rooted tree."""

    root: str
    above: tuple  # sorted tuple of (edge, tuple-of-input-edges) pairs

    @classmethod
    def make(cls, root: str, above: dict) -> "Tree":
        t = cls(root, tuple(sorted((e, tuple(ins)) for e, ins in above.items())))
        t.validate()
        return t

    @property
    def vertex_inputs(self) -> dict:
        return dict(self.above)

    def edges(self) -> tuple[str, ...]:
        out = {self.root}
        for e, ins in self.above:
            out.add(e)
            out.update(ins)
        return tuple(sorted(out))

    def leaves(self) -> tuple[str, ...]:
        have_vertex = {e for e, _ in self.above}
        return tuple(e for e in self.edges() if e not in have_vertex)

    def inner_edges(self) -> tuple[str, ...]:
        """Edges that are both the output of a vertex and an input of
        another."""
        have_vertex = {e for e, _ in self.above}
        used_as_input = {i for _, ins in self.above for i in ins}
        return tuple(sorted(have_vertex & used_as_input))

    def validate(self):
        vertex_of = self.vertex_inputs
        edges = set(self.edges())
        input_count: dict[str, int] = {}
        for e, ins in self.above:
            if len(set(ins)) != len(ins):
                raise ValueError(f"vertex at {e} repeats an input edge")
            for i in ins:
                input_count[i] = input_count.get(i, 0) + 1
        for e, k in input_count.items():
            if k > 1:
                raise ValueError(f"edge {e} is the input of {k} vertices")
        if self.root in input_count:
            raise ValueError("the root cannot be the input of a vertex")
        for e in edges:
            if e != self.root and e not in input_count:
                raise ValueError(f"edge {e} is not attached below anything")
        # connectivity and acyclicity: everything reachable from the root
        seen: set[str] = set()
        stack = [self.root]
        while stack:
            e = stack.pop()
            if e in seen:
                raise ValueError("cycle in the edge incidence")
            seen.add(e)
            stack.extend(vertex_of.get(e, ()))
        if seen != edges:
            raise ValueError("tree is not connected")

    def n_vertices(self) -> int:
        return len(self.above)

    def encoding(self) -> str:
        """Canonical unordered encoding; equal iff trees are isomorphic."""
        vertex_of = self.vertex_inputs

        def enc(e):
            if e not in vertex_of:
                return "l"
            return "(" + ",".join(sorted(enc(i) for i in vertex_of[e])) + ")"
        return enc(self.root)

    def canonical(self) -> "Tree":
        """Relabel edges e0, e1, ... along a traversal that orders
        children by encoding; isomorphic trees relabel identically."""
        vertex_of = self.vertex_inputs
        enc_cache: dict[str, str] = {}

        def enc(e):
            if e not in enc_cache:
                if e not in vertex_of:
                    enc_cache[e] = "l"
                else:
                    enc_cache[e] = "(" + ",".join(
                        sorted(enc(i) for i in vertex_of[e])) + ")"
            return enc_cache[e]
        enc(self.root)
        counter = itertools.count()
        above: dict[str, tuple] = {}

        def walk(e) -> str:
            name = f"e{next(counter)}"
            if e in vertex_of:
                children = sorted(vertex_of[e], key=lambda i: (enc(i), i))
                above[name] = tuple(walk(i) for i in children)
            return name
        new_root = walk(self.root)
        return Tree(new_root, tuple(sorted(above.items())))


def eta() -> Tree:
    return Tree.make("e", {})


def corolla(n: int) -> Tree:
    return Tree.make("r", {"r": tuple(f"l{i}" for i in range(1, n + 1))})


def linear_tree(n: int) -> Tree:
    """The tree with n unary vertices: the image of the n-simplex."""
    above = {f"e{i}": (f"e{i+1}",) for i in range(n)}
    return Tree.make("e0", above)


@dataclass(frozen=True)
class Forest:
    trees: tuple[Tree, ...]

    @classmethod
    def make(cls, trees) -> "Forest":
        canon = sorted((t.canonical() for t in trees), key=Tree.encoding)
        return cls(tuple(canon))

    def encoding(self) -> str:
        return ";".join(t.encoding() for t in self.trees)

    def edges(self):
        return tuple((i, e) for i, t in enumerate(self.trees) for e in t.edges())

    def leaves(self):
        return tuple((i, e) for i, t in enumerate(self.trees) for e in t.leaves())


# -- tree and forest text format -----------------------------------------


def parse_tree(text: str) -> Tree:
    """Nested edge-label format: ``root(l1, l2)``, ``r(a(x), b)``, ``e``."""
    text = text.strip()
    pos = 0

    def parse_edge():
        nonlocal pos
        start = pos
        while pos < len(text) and text[pos] not in "(),;":
            pos += 1
        label = text[start:pos].strip()
        if not label:
            raise ValueError(f"missing edge label at position {start}")
        children = None
        if pos < len(text) and text[pos] == "(":
            pos += 1
            children = []
            while True:
                while pos < len(text) and text[pos] in " \t":
                    pos += 1
                if pos < len(text) and text[pos] == ")":
                    pos += 1
                    break
                children.append(parse_edge())
                if pos < len(text) and text[pos] == ",":
                    pos += 1
                elif pos < len(text) and text[pos] == ")":
                    pos += 1
                    break
                else:
                    raise ValueError(f"expected ',' or ')' at position {pos}")
        return label, children

    above: dict[str, tuple] = {}

    def collect(node):
        label, children = node
        if children is not None:
            above[label] = tuple(c[0] for c in children)
            for c in children:
                collect(c)
    root = parse_edge()
    if pos != len(text):
        raise ValueError(f"trailing characters after tree at position {pos}")
    collect(root)
    return Tree.make(root[0], above)


def parse_forest(text: str) -> Forest:
    parts = [p for p in text.split(";") if p.strip()]
    return Forest.make([parse_tree(p) for p in parts])


def format_tree(t: Tree) -> str:
    vertex_of = t.vertex_inputs

    def fmt(e):
        if e not in vertex_of:
            return e
        return e + "(" + ",".join(fmt(i) for i in vertex_of[e]) + ")"
    return fmt(t.root)


def format_forest(f: Forest) -> str:
    return "; ".join(format_tree(t) for t in f.trees)


# -- subtrees and tree operads -------------------------------------------


def subtrees(t: Tree) -> dict[str, list[frozenset]]:
    """For each edge, the leaf sets of the subtrees rooted there (the
    bare edge included)."""
    vertex_of = t.vertex_inputs
    memo: dict[str, list[frozenset]] = {}

    def at(e) -> list[frozenset]:
        if e in memo:
            return memo[e]
        out = [frozenset([e])]
        if e in vertex_of:
            pools = [at(i) for i in vertex_of[e]]
            for combo in itertools.product(*pools):
                out.append(frozenset().union(*combo) if combo else frozenset())
        memo[e] = out
        return out
    for e in t.edges():
        at(e)
    return memo


def tree_operad(t: Tree, arity_cap: int | None = None) -> ColoredOperad:
    """Colors are edges; a multihom cell is a singleton exactly when a
    subtree with those leaves and that root exists; composition grafts."""
    subs = subtrees(t)
    max_arity = max((len(s) for sets in subs.values() for s in sets), default=1)
    cap = max(max_arity, 4) if arity_cap is None else arity_cap
    ops = {}
    for e, sets in subs.items():
        for leafset in sets:
            for order in itertools.permutations(sorted(leafset)):
                ops[("sub", e, order)] = Operation(order, e)
    units = {e: ("sub", e, (e,)) for e in t.edges()}

    def sym(op_id, p):
        _, e, order = op_id
        new_order = [None] * len(order)
        for i, leaf in enumerate(order):
            new_order[p[i]] = leaf
        return ("sub", e, tuple(new_order))

    def comp(outer, inners):
        _, e, order = outer
        new_order = tuple(leaf for i in inners for leaf in i[2])
        return ("sub", e, new_order)

    return build_operad(t.edges(), ops, units, sym, comp,
                        arity_cap=cap, name=f"Omega({t.encoding()})")


def forest_operad(f: Forest, arity_cap: int | None = None) -> ColoredOperad:
    """Coproduct of the tree operads, colors tagged by tree index."""
    parts = [tree_operad(t, arity_cap) for t in f.trees]
    colors = [(i, c) for i, P in enumerate(parts) for c in P.colors]
    ops, units, symmetry, composition = {}, {}, {}, {}
    for i, P in enumerate(parts):
        for op_id, o in P.ops.items():
            ops[(i, op_id)] = Operation(tuple((i, c) for c in o.inputs),
                                        (i, o.output))
        for c, u in P.units.items():
            units[(i, c)] = (i, u)
        for (op_id, p), r in P.symmetry.items():
            symmetry[((i, op_id), p)] = (i, r)
        for (outer, inners), r in P.composition.items():
            composition[((i, outer), tuple((i, x) for x in inners))] = (i, r)
    cap = max((P.arity_cap for P in parts), default=4)
    return ColoredOperad(colors, ops, units, symmetry, composition,
                         arity_cap=cap, name=f"Omega[{f.encoding()}]")


def tree_map_from_colors(S: ColoredOperad, T: ColoredOperad,
                         color_map: dict) -> OperadMap | None:
    """Extend an edge-color assignment to an operad map between tree or
    forest operads, if every generator lands on an existing cell."""
    op_map = {}
    for op_id, o in S.ops.items():
        cell = T.multihom(tuple(color_map[c] for c in o.inputs),
                          color_map[o.output])
        if not cell:
            return None
        op_map[op_id] = cell[0]
    f = OperadMap(S, T, color_map, op_map)
    if not f.validate():
        return None
    return f


def omega_hom(s: Tree, t: Tree) -> list[OperadMap]:
    """All operad maps Omega(s) -> Omega(t), by exhaustive search over
    color assignments with vertex-compatibility pruning."""
    S, T = tree_operad(s), tree_operad(t)
    subs_t = subtrees(t)
    t_cells = {(frozenset(ls), e) for e, sets in subs_t.items() for ls in sets}
    s_vertices = s.vertex_inputs
    edges = sorted(s.edges(), key=lambda e: (e != s.root, e))
    out = []

    def assign(i, cmap):
        if i == len(edges):
            f = tree_map_from_colors(S, T, dict(cmap))
            if f is not None:
                out.append(f)
            return
        e = edges[i]
        for target in t.edges():
            cmap[e] = target
            ok = True
            for v, ins in s_vertices.items():
                if v in cmap and all(x in cmap for x in ins):
                    imgs = [cmap[x] for x in ins]
                    if len(set(imgs)) != len(imgs) or \
                            (frozenset(imgs), cmap[v]) not in t_cells:
                        ok = False
                        break
            if ok:
                assign(i + 1, cmap)
            del cmap[e]
    assign(0, {})
    return out


# -- the forest of a simplex ---------------------------------------------


@dataclass(frozen=True)
class FinSimplex:
    """A chain of composable pointed maps (an n-simplex of Fin_*)."""

    start: int
    maps: tuple[PointedMap, ...]

    def __post_init__(self):
        prev = self.start
        for f in self.maps:
            if f.source != prev:
                raise ValueError("maps in the chain do not compose")
            prev = f.target

    @property
    def dim(self) -> int:
        return len(self.maps)

    def objects(self) -> tuple[int, ...]:
        return (self.start,) + tuple(f.target for f in self.maps)

    def face(self, i: int) -> "FinSimplex":
        """Drop vertex i: compose at i, or drop the first/last map."""
        if not 0 <= i <= self.dim:
            raise IndexError(f"face index {i} outside 0..{self.dim}")
        if self.dim == 0:
            raise ValueError("a 0-simplex has no faces")
        if i == 0:
            return FinSimplex(self.maps[0].target, self.maps[1:])
        if i == self.dim:
            return FinSimplex(self.start, self.maps[:-1])
        merged = pointed.compose(self.maps[i], self.maps[i - 1])
        return FinSimplex(self.start,
                          self.maps[:i - 1] + (merged,) + self.maps[i + 1:])

    def degeneracy(self, i: int) -> "FinSimplex":
        """Insert the identity at vertex i."""
        if not 0 <= i <= self.dim:
            raise IndexError(f"degeneracy index {i} outside 0..{self.dim}")
        objs = self.objects()
        return FinSimplex(self.start,
                          self.maps[:i] + (pointed.identity(objs[i]),) + self.maps[i:])


@dataclass
class LeveledForest:
    """The forest of a simplex with its level bookkeeping intact.

    Edges are pairs (level, element); the vertex with output (t, j) has
    inputs ((t-1, i) for i in the fiber of j), in increasing order.
    """

    simplex: FinSimplex
    edges: list[tuple[int, int]] = field(default_factory=list)
    above: dict = field(default_factory=dict)
    roots: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        sigma = self.simplex
        sizes = sigma.objects()
        self.edges = [(t, i) for t, n in enumerate(sizes)
                      for i in range(1, n + 1)]
        for t, alpha in enumerate(sigma.maps, start=1):
            for j in range(1, alpha.target + 1):
                self.above[(t, j)] = tuple((t - 1, i) for i in alpha.preimage(j))
        k = sigma.dim
        self.roots = [(k, j) for j in range(1, sizes[k] + 1)]
        for t, alpha in enumerate(sigma.maps, start=1):
            for i in range(1, alpha.source + 1):
                if alpha(i) == 0:
                    self.roots.append((t - 1, i))
        self.roots.sort()

    def tree_at(self, root: tuple[int, int]) -> Tree:
        above: dict[str, tuple] = {}
        stack = [root]
        while stack:
            e = stack.pop()
            if e in self.above:  # a vertex, possibly nullary
                ins = self.above[e]
                above[_edge_name(e)] = tuple(_edge_name(i) for i in ins)
                stack.extend(ins)
        return Tree.make(_edge_name(root), above)

    def trees(self) -> list[tuple[tuple[int, int], Tree]]:
        return [(r, self.tree_at(r)) for r in self.roots]

    def forest(self) -> Forest:
        return Forest.make([t for _, t in self.trees()])


def _edge_name(e: tuple[int, int]) -> str:
    return f"L{e[0]}_{e[1]}"


def w_forest(sigma: FinSimplex) -> Forest:
    """The forest underlying the leveled factorization of a simplex;
    a 0-simplex s_+ yields s copies of the trivial tree."""
    return LeveledForest(sigma).forest()


def enumerate_simplices(horizon: int, dim: int) -> list[FinSimplex]:
    """All composable chains of the given dimension in the truncation."""
    if dim == 0:
        return [FinSimplex(n, ()) for n in range(horizon + 1)]
    maps_from: dict[int, list[PointedMap]] = {
        n: [f for m in range(horizon + 1) for f in pointed.enumerate_maps(n, m)]
        for n in range(horizon + 1)}
    chains: list[tuple[PointedMap, ...]] = [(f,) for n in range(horizon + 1)
                                            for f in maps_from[n]]
    for _ in range(dim - 1):
        chains = [c + (g,) for c in chains for g in maps_from[c[-1].target]]
    return [FinSimplex(c[0].source, c) for c in chains]


# -- dendroidal nerves -----------------------------------------------------


def tree_nerve(P: ColoredOperad, t: Tree) -> list[tuple[dict, dict]]:
    """Decorations of a tree in an operad: a color per edge and an
    operation per vertex whose profile matches the stored input order.
    These are exactly the operad maps Omega(t) -> P (asserted in tests by
    exhaustive cross-enumeration)."""
    vertex_of = t.vertex_inputs
    results: list[tuple[dict, dict]] = []

    def expand(pending, colors, vops):
        if not pending:
            results.append((dict(colors), dict(vops)))
            return
        e, rest = pending[0], pending[1:]
        if e not in vertex_of:
            expand(rest, colors, vops)
            return
        ins = vertex_of[e]
        for op in P.ops_by_output(colors[e]):
            prof = P.ops[op].inputs
            if len(prof) != len(ins):
                continue
            for i, c in zip(ins, prof):
                colors[i] = c
            vops[e] = op
            expand(tuple(ins) + rest, colors, vops)
            del vops[e]
            for i in ins:
                colors.pop(i, None)

    for c in P.colors:
        expand((t.root,), {t.root: c}, {})
    return results


def forest_nerve(P: ColoredOperad, f: Forest) -> list[tuple]:
    """Elements of the nerve over a forest: one tree decoration per
    tree.  The empty forest yields a single empty element."""
    pools = [tree_nerve(P, t) for t in f.trees]
    return [combo for combo in itertools.product(*pools)]


def dendroidal_nerve(P: ColoredOperad, f: Forest) -> list[OperadMap]:
    """The set of operad maps from the forest operad into P."""
    F = forest_operad(f)
    out = []
    for combo in forest_nerve(P, f):
        color_map = {}
        for i, (colors, _) in enumerate(combo):
            for e, c in colors.items():
                color_map[(i, e)] = c
        op_map = {}
        ok = True
        for op_id, o in F.ops.items():
            i, (_, root, order) = op_id
            colors, vops = combo[i]
            value = _decoration_op(P, f.trees[i], colors, vops, root, order)
            if value is None:
                ok = False
                break
            op_map[op_id] = value
        if ok:
            m = OperadMap(F, P, color_map, op_map)
            if m.validate():
                out.append(m)
    return out


def _decoration_op(P: ColoredOperad, t: Tree, colors: dict, vops: dict,
                   root: str, order: tuple):
    """The image in P of the subtree operation with the given root and
    ordered leaves, under a tree decoration: compose the vertex
    operations by grafting."""
    from .operads import sort_perm

    def op_at(e, leafset) -> tuple:
        # returns (op in P, tuple of leaves in profile order)
        if leafset == frozenset([e]):
            return P.units[colors[e]], (e,)
        ins = t.vertex_inputs[e]
        parts = []
        for i in ins:
            sub_leaves = leafset & _upward_closure(t, i)
            parts.append(op_at(i, sub_leaves))
        composed = P.compose(vops[e], tuple(op for op, _ in parts))
        leaves_in_order = tuple(l for _, ls in parts for l in ls)
        return composed, leaves_in_order

    target = frozenset(order)
    op, natural_order = op_at(root, target)
    if frozenset(natural_order) != target:
        return None
    perm = tuple(order.index(l) for l in natural_order)
    # left action moving slot i (leaf natural_order[i]) to its slot in
    # ``order``
    return P.act(perm, op)


def _upward_closure(t: Tree, e: str) -> frozenset:
    out = {e}
    stack = [e]
    vertex_of = t.vertex_inputs
    while stack:
        x = stack.pop()
        for i in vertex_of.get(x, ()):
            out.add(i)
            stack.append(i)
    return frozenset(out)


def segal_check(P: ColoredOperad, t: Tree) -> CheckResult:
    """|nerve(T)| equals the fiber product of the nerves of the two cut
    pieces over the nerve of the cutting edge, for every inner edge."""
    full = tree_nerve(P, t)
    for e in t.inner_edges():
        upper, lower = cut_tree(t, e)
        up = tree_nerve(P, upper)
        low = tree_nerve(P, lower)
        fiber_count = 0
        low_by_color: dict = {}
        for colors, vops in low:
            low_by_color.setdefault(colors[e], 0)
            low_by_color[colors[e]] += 1
        for colors, vops in up:
            fiber_count += low_by_color.get(colors[e], 0)
        if fiber_count != len(full):
            return CheckResult(False, (t.encoding(), e),
                               f"Segal fiber product {fiber_count} != {len(full)}")
    return CheckResult(True)


def cut_tree(t: Tree, e: str) -> tuple[Tree, Tree]:
    """Cut at an inner edge: the upper part rooted at e, and the lower
    part in which e became a leaf.  Edge labels are preserved."""
    if e not in t.inner_edges():
        raise ValueError(f"{e} is not an inner edge")
    upper_edges = _upward_closure(t, e)
    vertex_of = t.vertex_inputs
    upper = Tree.make(e, {x: ins for x, ins in vertex_of.items()
                          if x in upper_edges})
    lower = Tree.make(t.root, {x: ins for x, ins in vertex_of.items()
                               if x not in upper_edges})
    return upper, lower


# -- leaf locality ---------------------------------------------------------


def enumerate_trees(max_vertices: int, max_arity: int = 3) -> list[Tree]:
    """All tree shapes with the given bounds, canonical, deduplicated."""
    memo: dict[int, list[Tree]] = {0: [eta()]}

    def trees(v: int) -> list[Tree]:
        if v in memo:
            return memo[v]
        found: dict[str, Tree] = {}
        for arity in range(0, max_arity + 1):
            for split in _compositions(v - 1, arity):
                child_pools = [trees(k) for k in split]
                for children in itertools.product(*child_pools):
                    t = _graft_at_root(children)
                    found.setdefault(t.encoding(), t)
        memo[v] = sorted(found.values(), key=Tree.encoding)
        return memo[v]

    out: dict[str, Tree] = {}
    for v in range(max_vertices + 1):
        for t in trees(v):
            out.setdefault(t.encoding(), t)
    return sorted(out.values(), key=Tree.encoding)


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _graft_at_root(children: tuple[Tree, ...]) -> Tree:
    above: dict[str, tuple] = {}
    child_roots = []
    for idx, child in enumerate(children):
        renamed = {f"c{idx}_{e}": tuple(f"c{idx}_{i}" for i in ins)
                   for e, ins in child.above}
        above.update(renamed)
        child_roots.append(f"c{idx}_{child.root}")
    above["r"] = tuple(child_roots)
    return Tree.make("r", above).canonical()


def enumerate_forests(max_trees: int, max_vertices: int,
                      max_arity: int = 3) -> list[Forest]:
    """All forest shapes with at most the given number of trees, each
    bounded in vertex count, including the empty forest."""
    pool = enumerate_trees(max_vertices, max_arity)
    out = [Forest.make([])]
    for k in range(1, max_trees + 1):
        for combo in itertools.combinations_with_replacement(pool, k):
            out.append(Forest.make(list(combo)))
    return out


def l_local_check(q: OperadMap, max_tree_vertices: int = 3,
                  max_trees: int = 3, max_arity: int = 3) -> CheckResult:
    """Unique extension against leaf inclusions of forests.

    For every forest shape in the bound, every nerve element of the
    target downstairs, and every compatible lift of its leaf colors,
    there must be exactly one extension upstairs.  Multi-tree forests
    factor exactly (the forest operad is the coproduct of its tree
    operads), so the verdict over a forest is computed from the per-tree
    extension counts.
    """
    P, Q = q.target, q.source
    trees = enumerate_trees(max_tree_vertices, max_arity)
    tree_counts: dict[str, list[int]] = {}
    tree_witness: dict[str, tuple] = {}
    for t in trees:
        counts, witness = _tree_lift_counts(q, t)
        tree_counts[t.encoding()] = counts
        if witness is not None:
            tree_witness[t.encoding()] = witness
    for f in enumerate_forests(max_trees, max_tree_vertices, max_arity):
        per_tree = [tree_counts[t.encoding()] for t in f.trees]
        if any(len(c) == 0 for c in per_tree):
            continue  # no lifting problems over this forest
        for t, counts in zip(f.trees, per_tree):
            if any(c != 1 for c in counts):
                return CheckResult(
                    False, (f.encoding(),) + tree_witness[t.encoding()],
                    "leaf lift without a unique extension")
    return CheckResult(True)


@dataclass
class NerveComparisonReport:
    operad: str
    horizon: int
    max_dim: int
    simplices: int = 0
    elements: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _leveled_elements_by_trees(P: ColoredOperad, lf: LeveledForest):
    """Nerve elements of the leveled forest computed tree by tree; the
    reference route, used directly at small scale and as the oracle for
    the levelwise enumeration."""
    sizes = lf.simplex.objects()
    pools = []
    for root, tree in lf.trees():
        pools.append(tree_nerve(P, tree))
    out = []
    for combo in itertools.product(*pools):
        colors: dict[str, object] = {}
        vops: dict[str, object] = {}
        for decoration in combo:
            colors.update(decoration[0])
            vops.update(decoration[1])
        color_rows = tuple(tuple(colors[_edge_name((t, i))]
                                 for i in range(1, sizes[t] + 1))
                           for t in range(len(sizes)))
        op_rows = tuple(tuple(vops[_edge_name((t, j))]
                              for j in range(1, sizes[t] + 1))
                        for t in range(1, len(sizes)))
        out.append((color_rows, op_rows))
    return out


def _leveled_elements(P: ColoredOperad, sigma: FinSimplex):
    """Nerve elements of the leveled forest, enumerated level by level
    from the bottom: picking an operation for a vertex pins the colors
    of its input edges, and edges killed at a level get free colors."""
    sizes = sigma.objects()
    k = sigma.dim
    base = [((colors,), ()) for colors in
            itertools.product(P.colors, repeat=sizes[k])]
    partials = base
    for t in range(k, 0, -1):
        alpha = sigma.maps[t - 1]
        fibers = [alpha.preimage(j) for j in range(1, alpha.target + 1)]
        killed = [i for i in range(1, alpha.source + 1) if alpha(i) == 0]
        nxt = []
        for color_rows, op_rows in partials:
            out_colors = color_rows[0]
            op_pools = []
            dead = False
            for j, fiber in enumerate(fibers):
                cell = [op for op in P.ops_by_output(out_colors[j])
                        if len(P.ops[op].inputs) == len(fiber)]
                if not cell:
                    dead = True
                    break
                op_pools.append(cell)
            if dead:
                continue
            for ops in itertools.product(*op_pools):
                row = [None] * sizes[t - 1]
                for fiber, op in zip(fibers, ops):
                    prof = P.ops[op].inputs
                    for pos, c in zip(fiber, prof):
                        row[pos - 1] = c
                free = [P.colors] * len(killed)
                for kill_colors in itertools.product(*free):
                    for pos, c in zip(killed, kill_colors):
                        row[pos - 1] = c
                    nxt.append(((tuple(row),) + color_rows,
                                (tuple(ops),) + op_rows))
        partials = nxt
    return partials


def _functor_chains(opcat: OperatorCategory, sigma: FinSimplex):
    """Composable arrow chains in the operator category over the
    simplex, as (color rows, family rows)."""
    P = opcat.operad
    starts = list(itertools.product(P.colors, repeat=sigma.start))
    chains = [((tuple(c),), ()) for c in starts]
    for alpha in sigma.maps:
        aid = opcat.base_arrow(alpha)
        nxt = []
        for color_rows, op_rows in chains:
            src_obj = opcat.obj(color_rows[-1])
            for a in opcat.arrows_over(src_obj, aid):
                _, _, tgt, fam = opcat.arrow_family(a)
                nxt.append((color_rows + (tgt,), op_rows + (fam,)))
        chains = nxt
    return chains


def _restrict_face(P: ColoredOperad, sigma: FinSimplex, elem, i: int):
    """Restriction of a leveled nerve element along the i-th face: drop
    an outer level, or compose two vertex rows through the operad."""
    from .operators import _composition_plan
    color_rows, op_rows = elem
    d = sigma.dim
    if i == 0:
        return (color_rows[1:], op_rows[1:])
    if i == d:
        return (color_rows[:-1], op_rows[:-1])
    f, g = sigma.maps[i - 1], sigma.maps[i]
    _, steps = _composition_plan(f, g)
    fam_f, fam_g = op_rows[i - 1], op_rows[i]
    merged = tuple(P.act(perm, P.compose(fam_g[l], tuple(fam_f[j] for j in js)))
                   for l, js, perm in steps)
    return (color_rows[:i] + color_rows[i + 1:],
            op_rows[:i - 1] + (merged,) + op_rows[i:])


def _restrict_chain_face(opcat: OperatorCategory, sigma: FinSimplex,
                         chain, i: int):
    """The same face restriction computed through the category's
    composition table."""
    color_rows, op_rows = chain
    d = sigma.dim
    if i == 0:
        return (color_rows[1:], op_rows[1:])
    if i == d:
        return (color_rows[:-1], op_rows[:-1])
    f, g = sigma.maps[i - 1], sigma.maps[i]
    a = opcat.arrow(color_rows[i - 1], f, op_rows[i - 1])
    b = opcat.arrow(color_rows[i], g, op_rows[i])
    c = opcat.total.comp[(b, a)]
    _, _, _, fam = opcat.arrow_family(c)
    return (color_rows[:i] + color_rows[i + 1:],
            op_rows[:i - 1] + (fam,) + op_rows[i:])


def _degenerate(P: ColoredOperad, elem, i: int):
    """Insert a unit level at vertex i."""
    color_rows, op_rows = elem
    units = tuple(P.units[c] for c in color_rows[i])
    return (color_rows[:i + 1] + (color_rows[i],) + color_rows[i + 1:],
            op_rows[:i] + (units,) + op_rows[i:])


def nerve_comparison(P: ColoredOperad, horizon: int = 3, max_dim: int = 3,
                     naturality: bool = True) -> NerveComparisonReport:
    """Verified bijection, simplex by simplex, between decorations of
    the forest of a simplex and functor chains over it in the operator
    category, natural in the simplex on face and degeneracy generators.
    """
    opcat = operator_category(P, horizon)
    report = NerveComparisonReport(P.name, horizon, max_dim)
    for d in range(max_dim + 1):
        for sigma in enumerate_simplices(horizon, d):
            lhs = _leveled_elements(P, sigma)
            rhs = _functor_chains(opcat, sigma)
            report.simplices += 1
            report.elements += len(lhs)
            lhs_set, rhs_set = set(lhs), set(rhs)
            if len(lhs_set) != len(lhs) or len(rhs_set) != len(rhs) \
                    or lhs_set != rhs_set:
                report.failures.append((sigma, "element sets differ",
                                        len(lhs), len(rhs)))
                continue
            if not naturality or d == 0 or not lhs:
                continue
            for i in range(d + 1):
                for elem in lhs:
                    left = _restrict_face(P, sigma, elem, i)
                    right = _restrict_chain_face(opcat, sigma, elem, i)
                    if left != right:
                        report.failures.append((sigma, f"face {i} naturality",
                                                elem, left, right))
                        break
            if d < max_dim:
                # degeneracy naturality: inserting a unit level lands in
                # both models of the degenerate simplex
                for i in range(d + 1):
                    sig2 = sigma.degeneracy(i)
                    for elem in lhs:
                        degen = _degenerate(P, elem, i)
                        if not _is_chain(opcat, sig2, degen) or \
                                not _is_element(P, sig2, degen):
                            report.failures.append(
                                (sigma, f"degeneracy {i} naturality", elem))
                            break
    return report


def _is_chain(opcat: OperatorCategory, sigma: FinSimplex, cand) -> bool:
    """Membership of a (color rows, family rows) pair in the functor
    chains over sigma, decided through the arrow tables."""
    color_rows, op_rows = cand
    if len(color_rows) != sigma.dim + 1 or len(op_rows) != sigma.dim:
        return False
    for t, alpha in enumerate(sigma.maps):
        try:
            a = opcat.arrow(color_rows[t], alpha, op_rows[t])
        except KeyError:
            return False
        if opcat.obj_colors(opcat.total.tgt[a]) != color_rows[t + 1]:
            return False
    return True


def _is_element(P: ColoredOperad, sigma: FinSimplex, cand) -> bool:
    """Membership of a candidate in the leveled nerve elements, decided
    by profile matching against the operad tables."""
    color_rows, op_rows = cand
    sizes = sigma.objects()
    if any(len(row) != n for row, n in zip(color_rows, sizes)):
        return False
    for t, alpha in enumerate(sigma.maps):
        row = op_rows[t]
        if len(row) != alpha.target:
            return False
        for j in range(1, alpha.target + 1):
            op = row[j - 1]
            o = P.ops.get(op)
            if o is None or o.output != color_rows[t + 1][j - 1]:
                return False
            if o.inputs != tuple(color_rows[t][i - 1]
                                 for i in alpha.preimage(j)):
                return False
    return True


def _tree_lift_counts(q: OperadMap, t: Tree):
    """Extension counts for every (downstairs element, leaf lift) pair
    over one tree, plus a witness for some non-unique count."""
    P, Q = q.target, q.source
    leaves = sorted(t.leaves())
    down = tree_nerve(P, t)
    up = tree_nerve(Q, t)
    up_index: dict[tuple, int] = {}
    for colors, vops in up:
        projected = (tuple(sorted((e, q.color_map[c]) for e, c in colors.items())),
                     tuple(sorted((v, q.op_map[o]) for v, o in vops.items())))
        leaf_colors = tuple(colors[l] for l in leaves)
        key = (projected, leaf_colors)
        up_index[key] = up_index.get(key, 0) + 1
    fibers: dict = {}
    for c in P.colors:
        fibers[c] = tuple(s for s in Q.colors if q.color_map[s] == c)
    counts = []
    witness = None
    for colors, vops in down:
        frozen = (tuple(sorted(colors.items())), tuple(sorted(vops.items())))
        pools = [fibers[colors[l]] for l in leaves]
        for lift in itertools.product(*pools):
            n = up_index.get((frozen, lift), 0)
            counts.append(n)
            if n != 1 and witness is None:
                witness = (t.encoding(), frozen, lift, n)
    return counts, witness
