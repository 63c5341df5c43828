"""Enumeration, canonical forms, pinching and configuration classification.

A cylinder diagram is enumerated as a pair of cyclic-sequence partitions of
the saddle labels (one for bottoms, one for tops) together with a matching of
bottom cycles to top cycles.  Completeness comes from exhausting that finite
pairing space; duplicates are removed by a canonical form that minimizes a
relabeling-invariant traversal encoding over all starting choices.

The reflection flag quotients additionally by the three non-trivial
symmetries of the horizontal foliation: the left-right mirror, the top-bottom
mirror and their composition (rotation by pi).  Paper-facing counts use the
flag; internal storage keeps the finer plain key.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations

from . import intlinalg
from .errors import NotGenusThreeError, UnsupportedStratumError
from .flat_core import CylDiagram, diagram_invariants
from .homology import core_curve_span, diagram_complex, h1_bases


# ---------------------------------------------------------------------------
# Canonical forms


def mirror_lr(cylinders):
    """Left-right reflection: reverse both boundary sequences."""
    return tuple((tuple(reversed(b)), tuple(reversed(t))) for b, t in cylinders)


def mirror_tb(cylinders):
    """Top-bottom reflection: swap and reverse the boundary sequences."""
    return tuple((tuple(reversed(t)), tuple(reversed(b))) for b, t in cylinders)


def rotate_pi(cylinders):
    """Rotation by pi: swap bottoms and tops keeping reading order."""
    return tuple((t, b) for b, t in cylinders)


def _iso_variants(cylinders, with_reflection):
    if not with_reflection:
        return [cylinders]
    return [
        cylinders,
        mirror_lr(cylinders),
        mirror_tb(cylinders),
        rotate_pi(cylinders),
    ]


def _encode_fixed(cylinders, start_cyl, best):
    r = len(cylinders)
    above = {}
    below = {}
    for i, (b, t) in enumerate(cylinders):
        for s in b:
            above[s] = i
        for s in t:
            below[s] = i

    def rotations(seq, labels):
        n = len(seq)
        keyed = []
        for off in range(n):
            key = tuple(labels.get(seq[(off + k) % n], 1 << 30) for k in range(n))
            keyed.append((key, off))
        mn = min(k for k, _ in keyed)
        return [off for k, off in keyed if k == mn]

    def rec(labels, queue, queued, ci, side, acc):
        if best[0] is not None:
            cut = best[0][: len(acc)]
            if tuple(acc) > cut:
                return
        if ci == r:
            enc = tuple(acc)
            if best[0] is None or enc < best[0]:
                best[0] = enc
            return
        cyl = queue[ci]
        seq = cylinders[cyl][side]
        offs = [0] if (ci == 0 and side == 0) else rotations(seq, labels)
        for off in offs:
            labels2 = dict(labels)
            queue2 = list(queue)
            queued2 = set(queued)
            n = len(seq)
            word = []
            for k in range(n):
                s = seq[(off + k) % n]
                if s not in labels2:
                    labels2[s] = len(labels2)
                word.append(labels2[s])
                for c in (above[s], below[s]):
                    if c not in queued2:
                        queued2.add(c)
                        queue2.append(c)
            acc2 = acc + [n] + word
            if side == 0:
                rec(labels2, queue2, queued2, ci, 1, acc2)
            else:
                rec(labels2, queue2, queued2, ci + 1, 0, acc2)

    rec({}, [start_cyl], {start_cyl}, 0, 0, [])
    return best[0]


def canonical_key(d, with_reflection=False):
    """Relabeling-invariant key; equal keys iff isomorphic diagrams."""
    cylinders = d.cylinders if isinstance(d, CylDiagram) else d
    best = None
    for variant in _iso_variants(cylinders, with_reflection):
        for start in range(len(variant)):
            for rot in range(len(variant[start][0])):
                rolled = tuple(
                    variant[start][0][(rot + k) % len(variant[start][0])]
                    for k in range(len(variant[start][0]))
                )
                patched = list(variant)
                patched[start] = (rolled, variant[start][1])
                holder = [best]
                enc = _encode_fixed(tuple(patched), start, holder)
                if enc is not None and (best is None or enc < best):
                    best = enc
    return best


def canonicalize(d, with_reflection=False):
    """Canonical representative of d's isomorphism class."""
    key = canonical_key(d, with_reflection)
    return _diagram_from_key(key), key


def _diagram_from_key(key):
    cylinders = []
    i = 0
    seqs = []
    while i < len(key):
        n = key[i]
        seqs.append(tuple(key[i + 1: i + 1 + n]))
        i += 1 + n
    assert len(seqs) % 2 == 0
    for j in range(0, len(seqs), 2):
        cylinders.append((seqs[j], seqs[j + 1]))
    return CylDiagram(tuple(cylinders))


def isomorphic(d1, d2, with_reflection=False):
    return canonical_key(d1, with_reflection) == canonical_key(d2, with_reflection)


# ---------------------------------------------------------------------------
# Enumeration


def _partitions(total, parts):
    """Partitions of `total` into exactly `parts` positive parts, descending."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total - parts + 1, 0, -1):
        for rest in _partitions(total - first, parts - 1):
            if rest[0] <= first:
                yield (first,) + rest


@lru_cache(maxsize=32)
def _cycle_sets(m, r):
    """All ways to split {0..m-1} into r cyclic sequences (as permutation cycles)."""
    out = []
    for perm in permutations(range(m)):
        seen = [False] * m
        cycles = []
        ok = True
        for start in range(m):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            x = perm[start]
            while x != start:
                if x < start:
                    ok = False
                    break
                cyc.append(x)
                seen[x] = True
                x = perm[x]
            if not ok:
                break
            cycles.append(tuple(cyc))
        if ok and len(cycles) == r:
            out.append(tuple(cycles))
    return out


def _trace_orders(cylinders):
    """Zero orders of a candidate diagram, or None if malformed."""
    bot_pos = {}
    top_pos = {}
    for i, (b, t) in enumerate(cylinders):
        for j, s in enumerate(b):
            bot_pos[s] = (i, j)
        for j, s in enumerate(t):
            top_pos[s] = (i, j)
    nxt = {}
    for i, (b, t) in enumerate(cylinders):
        p, q = len(b), len(t)
        for j in range(p):
            di, jl = top_pos[b[j - 1]]
            nxt[("b", i, j)] = ("t", di, (jl + 1) % len(cylinders[di][1]))
        for k in range(q):
            ui, js = bot_pos[t[k]]
            nxt[("t", i, k)] = ("b", ui, js)
    orders = []
    seen = set()
    for start in nxt:
        if start in seen:
            continue
        size = 1
        seen.add(start)
        cur = nxt[start]
        while cur != start:
            size += 1
            seen.add(cur)
            cur = nxt[cur]
        orders.append(size // 2 - 1)
    return tuple(sorted(orders, reverse=True))


def _strongly_connected(cylinders):
    """Realizability test: positive saddle lengths satisfying the
    circumference constraints exist iff the digraph with one arc per saddle
    (from the cylinder below it to the cylinder above it) is strongly
    connected: the lengths form a strictly positive circulation.
    """
    r = len(cylinders)
    above = {}
    below = {}
    for i, (b, t) in enumerate(cylinders):
        for s in b:
            above[s] = i
        for s in t:
            below[s] = i
    fwd = [set() for _ in range(r)]
    bwd = [set() for _ in range(r)]
    for s, i in below.items():
        fwd[i].add(above[s])
        bwd[above[s]].add(i)

    def reach(adj):
        seen = {0}
        stack = [0]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == r

    return reach(fwd) and reach(bwd)


def is_metrically_realizable(d):
    cylinders = d.cylinders if isinstance(d, CylDiagram) else d
    return _strongly_connected(cylinders)


def positive_lengths(d):
    """A positive integer solution of the circumference constraints.

    Routes one unit of flow around a directed cycle through every saddle's
    arc; the sum is a strictly positive circulation, i.e. a valid length
    assignment.
    """
    cylinders = d.cylinders if isinstance(d, CylDiagram) else d
    assert _strongly_connected(cylinders)
    r = len(cylinders)
    above = {}
    below = {}
    for i, (b, t) in enumerate(cylinders):
        for s in b:
            above[s] = i
        for s in t:
            below[s] = i
    m = len(above)
    arcs = {s: (below[s], above[s]) for s in range(m)}
    out_arcs = [[] for _ in range(r)]
    for s, (u, v) in arcs.items():
        out_arcs[u].append((s, v))
    lengths = [0] * m
    for s, (u, v) in arcs.items():
        # shortest arc path back from v to u, then close up through s
        prev = {v: None}
        queue = [v]
        while queue and u not in prev:
            x = queue.pop(0)
            for s2, y in out_arcs[x]:
                if y not in prev:
                    prev[y] = (x, s2)
                    queue.append(y)
        assert u in prev
        path = []
        x = u
        while prev[x] is not None:
            x, s2 = prev[x]
            path.append(s2)
        for s2 in path:
            lengths[s2] += 1
        lengths[s] += 1
    assert all(x > 0 for x in lengths)
    return lengths


def _connected(cylinders):
    r = len(cylinders)
    parent = list(range(r))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    above = {}
    for i, (b, _) in enumerate(cylinders):
        for s in b:
            above[s] = i
    for i, (_, t) in enumerate(cylinders):
        for s in t:
            ra, rb = find(i), find(above[s])
            if ra != rb:
                parent[ra] = rb
    return len({find(i) for i in range(r)}) == 1


def stratum_genus(stratum):
    total = sum(stratum)
    if total % 2 != 0:
        raise UnsupportedStratumError("zero orders must sum to 2g-2")
    return total // 2 + 1


def enumerate_cylinder_diagrams(stratum, r, with_reflection=True):
    """All r-cylinder diagrams in H(stratum), duplicate-free.

    stratum is a tuple of zero orders summing to 2g-2 with g <= 3; the empty
    stratum means the flat torus with one marked point.  Reflection
    equivalence is controlled by the flag (paper counts use True).
    """
    stratum = tuple(sorted(stratum, reverse=True))
    g = stratum_genus(stratum)
    if g > 3:
        raise UnsupportedStratumError("enumeration is capped at genus 3")
    if g == 1:
        if stratum != ():
            raise UnsupportedStratumError("genus-1 stratum must be empty")
        if r != 1:
            return []
        return [CylDiagram((((0,), (0,)),))]
    if r < 1:
        return []
    m = (2 * g - 2) + len(stratum)
    target = tuple(sorted(stratum, reverse=True))
    seen = {}
    tops_all = _cycle_sets(m, r)
    for shape in _partitions(m, r):
        # bottom cycles: consecutive labels per part
        bottoms = []
        start = 0
        for size in shape:
            bottoms.append(tuple(range(start, start + size)))
            start += size
        for top_cycles in tops_all:
            for assignment in permutations(range(r)):
                cylinders = tuple(
                    (bottoms[i], top_cycles[assignment[i]]) for i in range(r)
                )
                if not _connected(cylinders):
                    continue
                orders = _trace_orders(cylinders)
                if orders != target:
                    continue
                if not _strongly_connected(cylinders):
                    continue
                key = canonical_key(cylinders, with_reflection)
                if key not in seen:
                    seen[key] = CylDiagram(cylinders)
    return [seen[k] for k in sorted(seen)]


# ---------------------------------------------------------------------------
# Pinching


@dataclass(frozen=True)
class Part:
    """A connected component of the pinched (degenerate) surface."""

    genus: int
    zero_orders: tuple
    pole_count: int


@dataclass(frozen=True)
class DegenerateSurface:
    """The nodal surface from pinching every core curve.

    parts[j] describes component j; node_pairs[i] = (part of bottom circle,
    part of top circle) is the node produced by pinching cylinder i.
    """

    parts: tuple
    node_pairs: tuple

    def genus_sum(self):
        return sum(p.genus for p in self.parts)

    def to_json(self):
        return {
            "parts": [
                {"genus": p.genus, "zeros": list(p.zero_orders), "poles": p.pole_count}
                for p in self.parts
            ],
            "node_pairs": [list(pair) for pair in self.node_pairs],
        }


def pinch_all_core_curves(d):
    """Degenerate surface obtained by pinching all core curves of d.

    Parts are the connected components of the spine (zeros and saddle
    connections); each cylinder contributes one node pair joining the parts
    carrying its bottom and top circles.  Part genera come from the Euler
    characteristic of the component with its boundary circles capped off.
    """
    cx = diagram_complex(d)
    # vertex components under saddle edges
    parent = list(range(cx.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    saddle_edges = [e for e in cx.edges if e[0] == "s"]
    for e in saddle_edges:
        a, b = cx.vertex_at(e, "t"), cx.vertex_at(e, "h")
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    comp_ids = sorted({find(v) for v in range(cx.n_vertices)})
    comp_index = {c: i for i, c in enumerate(comp_ids)}
    n_parts = len(comp_ids)

    verts = [0] * n_parts
    for v in range(cx.n_vertices):
        verts[comp_index[find(v)]] += 1
    edges = [0] * n_parts
    for e in saddle_edges:
        edges[comp_index[find(cx.vertex_at(e, "t"))]] += 1

    # zero orders per part, from corner orbits: order = corners/2 - 1 and a
    # zero's vertex id comes from any incident saddle endpoint
    orders_by_vertex = _vertex_orders(d, cx)

    circles = [0] * n_parts
    node_pairs = []
    for i in range(d.r):
        s_bot = ("s", d.bottom(i)[0])
        s_top = ("s", d.top(i)[0])
        pb = comp_index[find(cx.vertex_at(s_bot, "t"))]
        pt = comp_index[find(cx.vertex_at(s_top, "t"))]
        circles[pb] += 1
        circles[pt] += 1
        node_pairs.append((pb, pt))

    parts = []
    for j in range(n_parts):
        chi = verts[j] - edges[j] + circles[j]
        assert chi % 2 == 0
        genus = (2 - chi) // 2
        zeros = tuple(sorted(
            (orders_by_vertex[v] for v in range(cx.n_vertices)
             if comp_index[find(v)] == j),
            reverse=True,
        ))
        # meromorphic degree count: total zero order - simple poles = 2g - 2
        assert sum(zeros) - circles[j] == 2 * genus - 2
        parts.append(Part(genus, zeros, circles[j]))
    return DegenerateSurface(tuple(parts), tuple(node_pairs))


def _vertex_orders(d, cx):
    from .flat_core import corner_orbits

    orders = {}
    for orb in corner_orbits(d):
        side, i, j = orb[0]
        if side == "b":
            e = ("s", d.bottom(i)[j])
        else:
            e = ("s", d.top(i)[j])
        vid = cx.vertex_at(e, "t")
        orders[vid] = len(orb) // 2 - 1
    return orders


# ---------------------------------------------------------------------------
# Configuration classification


CONFIG_1 = "config_1"
CONFIG_2 = "config_2"
CONFIG_3 = "config_3"
CONFIG_4 = "config_4"
CONFIG_5 = "config_5"
CONFIG_6 = "config_6"
OTHER_LAGRANGIAN = "other_lagrangian"
OTHER_HIGH_DIM = "other_high_dim"


def _pinch_signature(deg):
    genera = tuple(sorted(p.genus for p in deg.parts))
    loops = tuple(sorted(deg.parts[a].genus for a, b in deg.node_pairs if a == b))
    edges = tuple(sorted(
        tuple(sorted((deg.parts[a].genus, deg.parts[b].genus)))
        for a, b in deg.node_pairs if a != b
    ))
    return genera, loops, edges


_SIGNATURES = {
    ((1,), (1, 1), ()): CONFIG_1,
    ((0, 1), (), ((0, 1), (0, 1), (0, 1))): CONFIG_2,
    ((0, 1), (0,), ((0, 1), (0, 1))): CONFIG_3,
    ((0, 0, 1), (), ((0, 0), (0, 0), (0, 1), (0, 1))): CONFIG_4,
    ((2,), (2,), ()): CONFIG_5,
    ((1, 1), (), ((1, 1), (1, 1))): CONFIG_6,
}


def classify_configuration(d):
    """One of the six configuration labels for a genus-3 diagram.

    Diagrams whose core curves span a rank-3 (Lagrangian) subspace fall
    outside the six-row table and are labeled OTHER_LAGRANGIAN.
    """
    genus, _, _, _, _ = diagram_invariants(d)
    if genus != 3:
        raise NotGenusThreeError("configuration table is for genus 3 only")
    return _classification_label(d)


def _classification_label(d):
    genus, _, _, _, _ = diagram_invariants(d)
    if genus != 3:
        return OTHER_HIGH_DIM
    _, dim = core_curve_span(d)
    if dim >= 3:
        return OTHER_LAGRANGIAN
    deg = pinch_all_core_curves(d)
    sig = _pinch_signature(deg)
    label = _SIGNATURES.get(sig)
    if label is None:
        raise RuntimeError(
            "genus-3 diagram with d<=2 outside the six-configuration table: %r" % (sig,)
        )
    return label


# ---------------------------------------------------------------------------
# Homologous cylinders and the free report


@dataclass(frozen=True)
class HomologousReport:
    """Blocks of mutually homologous cylinders plus a freeness report.

    status[i] is "free", "not_free" (the cylinder shares its block with
    another, hence is parallel to it under every deformation) or
    "undetermined".  Freeness of singleton-block cylinders is derived only
    from the sum relation gamma_a + gamma_b = gamma_c and is conditional on
    the cylinders splitting into at least two equivalence classes.
    """

    blocks: tuple
    status: tuple
    triples: tuple

    def to_json(self):
        return {
            "blocks": [list(b) for b in self.blocks],
            "status": list(self.status),
            "triples": [list(t) for t in self.triples],
        }


def homologous_partition(d):
    basis = h1_bases(d)
    classes, _ = core_curve_span(d, basis)
    blocks = []
    block_of = {}
    for i, c in enumerate(classes):
        keyed = None
        for j, b in enumerate(blocks):
            rep = classes[b[0]]
            if (c - rep).is_zero() or (c + rep).is_zero():
                keyed = j
                break
        if keyed is None:
            blocks.append([i])
            block_of[i] = len(blocks) - 1
        else:
            blocks[keyed].append(i)
            block_of[i] = keyed
    triples = []
    for a, b, c in permutations(range(d.r), 3):
        if a < b and (classes[a] + classes[b] - classes[c]).is_zero():
            triples.append((a, b, c))
    status = []
    multi = len(blocks) >= 2
    in_triple = {i for t in triples for i in t}
    for i in range(d.r):
        if len(blocks[block_of[i]]) > 1:
            status.append("not_free")
        elif multi and i in in_triple:
            status.append("free")
        else:
            status.append("undetermined")
    return HomologousReport(
        tuple(tuple(b) for b in blocks), tuple(status), tuple(triples)
    )
