"""Canonical surface representations: origamis and cylinder-coordinate surfaces.

An Origami is a pair of gluing permutations on unit squares.  A CylDiagram is
the combinatorics of a horizontal cylinder decomposition (which saddle
connections make up each cylinder's top and bottom).  A CylSurface adds exact
rational metric data.  All metric arithmetic is Fraction-exact; floats never
enter these types.

Conventions fixed here (and relied on everywhere else):

* bottom and top sequences of a cylinder are read left to right;
* the twist tau_i of a cylinder is the horizontal position, measured in
  bottom-circle coordinates from the corner where the first stored bottom
  saddle starts, of the corner where the first stored top saddle starts;
  twists are normalized into [0, w_i);
* the vertex cycle of an origami square k is the orbit of
  c = sigma_v sigma_h sigma_v^-1 sigma_h^-1, so a vertex of orbit size t has
  cone angle 2*pi*t and zero order t - 1.
"""

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    MalformedDiagramError,
    NotTransitiveError,
    SizeMismatchError,
)


def frac_to_str(x):
    x = Fraction(x)
    return "%d/%d" % (x.numerator, x.denominator) if x.denominator != 1 else str(x.numerator)


def frac_from_str(s):
    return Fraction(s)


def perm_from_cycles(n, cycles, one_based=True):
    """Permutation (0-based image tuple) from disjoint cycles."""
    img = list(range(n))
    for cyc in cycles:
        c = [x - 1 for x in cyc] if one_based else list(cyc)
        for a, b in zip(c, c[1:] + c[:1]):
            img[a] = b
    return tuple(img)


def perm_cycles(img):
    """Disjoint cycles (0-based) of a permutation, each starting at its minimum."""
    seen = [False] * len(img)
    out = []
    for start in range(len(img)):
        if seen[start]:
            continue
        cyc = [start]
        seen[start] = True
        x = img[start]
        while x != start:
            cyc.append(x)
            seen[x] = True
            x = img[x]
        out.append(tuple(cyc))
    return out


def perm_inverse(img):
    inv = [0] * len(img)
    for i, j in enumerate(img):
        inv[j] = i
    return tuple(inv)


# ---------------------------------------------------------------------------
# Holonomy


@dataclass(frozen=True)
class Holonomy:
    """A period vector with exact rational components."""

    x: Fraction
    y: Fraction

    def __post_init__(self):
        for c in (self.x, self.y):
            if isinstance(c, float):
                raise TypeError("Holonomy components must be exact rationals")
        object.__setattr__(self, "x", Fraction(self.x))
        object.__setattr__(self, "y", Fraction(self.y))

    def __add__(self, other):
        return Holonomy(self.x + other.x, self.y + other.y)

    def __mul__(self, c):
        return Holonomy(self.x * c, self.y * c)

    __rmul__ = __mul__

    def to_json(self):
        return [frac_to_str(self.x), frac_to_str(self.y)]


# ---------------------------------------------------------------------------
# Origami


@dataclass(frozen=True)
class Origami:
    """A square-tiled surface: right gluing h and up gluing v (0-based images)."""

    n: int
    h: tuple
    v: tuple

    def key(self):
        return (self.n, self.h, self.v)

    def to_json(self):
        return {
            "n": self.n,
            "h": [i + 1 for i in self.h],
            "v": [i + 1 for i in self.v],
        }

    @staticmethod
    def from_json(d):
        return validate_origami(d["h"], d["v"])


def validate_origami(sigma_h, sigma_v):
    """Validate a pair of one-based image arrays and return an Origami.

    Raises SizeMismatchError if the arrays are not permutations of the same
    {1..n}, NotTransitiveError if the generated group is intransitive.
    """
    n = len(sigma_h)
    if len(sigma_v) != n or n == 0:
        raise SizeMismatchError("permutations act on different sets")
    h = tuple(x - 1 for x in sigma_h)
    v = tuple(x - 1 for x in sigma_v)
    for p in (h, v):
        if sorted(p) != list(range(n)):
            raise SizeMismatchError("not a permutation of {1..%d}" % n)
    seen = [False] * n
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        x = stack.pop()
        for y in (h[x], v[x]):
            if not seen[y]:
                seen[y] = True
                count += 1
                stack.append(y)
    if count != n:
        raise NotTransitiveError("gluing permutations do not act transitively")
    return Origami(n, h, v)


def origami_from_perms(h, v):
    """Origami from 0-based image tuples (validated)."""
    return validate_origami([x + 1 for x in h], [x + 1 for x in v])


def corner_permutation(o):
    """The vertex-cycle permutation c = v h v^-1 h^-1 (function composition)."""
    hinv = perm_inverse(o.h)
    vinv = perm_inverse(o.v)
    return tuple(o.v[o.h[vinv[hinv[k]]]] for k in range(o.n))


def singularity_data(o):
    """(genus, stratum partition, vertex cycles) of a valid origami.

    The stratum partition lists the positive zero orders in decreasing order;
    order-0 vertices (regular marked points) are dropped, so the flat torus
    reports the empty partition.
    """
    c = corner_permutation(o)
    orbits = perm_cycles(c)
    orders = sorted((len(orb) - 1 for orb in orbits), reverse=True)
    total = sum(orders)
    assert total % 2 == 0
    genus_from_orders = total // 2 + 1
    # Euler characteristic of the square complex: V - 2n + n = 2 - 2g
    chi = len(orbits) - o.n
    assert chi % 2 == 0
    genus_from_euler = (2 - chi) // 2
    assert genus_from_orders == genus_from_euler
    kappa = tuple(m for m in orders if m > 0)
    return genus_from_euler, kappa, tuple(tuple(orb) for orb in orbits)


def canonical_origami(o):
    """Minimal representative of o under simultaneous conjugation.

    Relabels squares in breadth-first discovery order (exploring h then v)
    from every base square and keeps the lexicographically smallest (h, v)
    encoding.  The result only depends on the conjugation class.
    """
    n, h, v = o.n, o.h, o.v
    best = None
    for root in range(n):
        pos = {root: 0}
        order = [root]
        qi = 0
        while qi < len(order):
            x = order[qi]
            qi += 1
            for y in (h[x], v[x]):
                if y not in pos:
                    pos[y] = len(order)
                    order.append(y)
        nh = tuple(pos[h[order[i]]] for i in range(n))
        nv = tuple(pos[v[order[i]]] for i in range(n))
        cand = (nh, nv)
        if best is None or cand < best:
            best = cand
    return Origami(n, best[0], best[1])


# ---------------------------------------------------------------------------
# Cylinder diagrams


@dataclass(frozen=True)
class CylDiagram:
    """Combinatorial cylinder diagram.

    cylinders[i] = (bottom, top), two tuples of saddle labels read left to
    right.  Labels are 0..m-1; each label occurs exactly once among all
    bottoms and exactly once among all tops.
    """

    cylinders: tuple

    def __post_init__(self):
        _validate_diagram(self.cylinders)

    @property
    def r(self):
        return len(self.cylinders)

    @property
    def m(self):
        return sum(len(b) for b, _ in self.cylinders)

    def bottom(self, i):
        return self.cylinders[i][0]

    def top(self, i):
        return self.cylinders[i][1]

    def saddle_positions(self):
        """Maps label -> (cylinder, index) on bottoms and on tops."""
        bot = {}
        top = {}
        for i, (b, t) in enumerate(self.cylinders):
            for j, s in enumerate(b):
                bot[s] = (i, j)
            for j, s in enumerate(t):
                top[s] = (i, j)
        return bot, top

    def above(self, s):
        """Cylinder having saddle s on its bottom."""
        return self.saddle_positions()[0][s][0]

    def below(self, s):
        """Cylinder having saddle s on its top."""
        return self.saddle_positions()[1][s][0]

    def to_json(self):
        return {
            "cylinders": [
                {"bottom": list(b), "top": list(t)} for b, t in self.cylinders
            ]
        }

    @staticmethod
    def from_json(d):
        return CylDiagram(
            tuple(
                (tuple(c["bottom"]), tuple(c["top"])) for c in d["cylinders"]
            )
        )


def _validate_diagram(cylinders):
    if not cylinders:
        raise MalformedDiagramError("no cylinders")
    bots = [s for b, _ in cylinders for s in b]
    tops = [s for _, t in cylinders for s in t]
    m = len(bots)
    if any(len(b) == 0 or len(t) == 0 for b, t in cylinders):
        raise MalformedDiagramError("cylinder with empty boundary")
    if sorted(bots) != list(range(m)) or sorted(tops) != list(range(m)):
        raise MalformedDiagramError(
            "labels must each appear exactly once among bottoms and once among tops"
        )
    # connectivity: cylinders glued along shared saddles
    parent = list(range(len(cylinders)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    where_bottom = {}
    for i, (b, _) in enumerate(cylinders):
        for s in b:
            where_bottom[s] = i
    for i, (_, t) in enumerate(cylinders):
        for s in t:
            ra, rb = find(i), find(where_bottom[s])
            if ra != rb:
                parent[ra] = rb
    if len({find(i) for i in range(len(cylinders))}) != 1:
        raise MalformedDiagramError("diagram is disconnected")


def corner_orbits(d):
    """Orbits of boundary corners under rotation about the zeros.

    A corner ("b", i, j) sits at the left end of bottom saddle j of cylinder
    i; ("t", i, j) at the left end of top saddle j.  Each orbit alternates
    bottom and top corners and has size 2*(order+1).
    """
    bot_pos, top_pos = d.saddle_positions()
    nxt = {}
    for i, (b, t) in enumerate(d.cylinders):
        p, q = len(b), len(t)
        for j in range(p):
            left_saddle = b[(j - 1) % p]
            di, jl = top_pos[left_saddle]
            nxt[("b", i, j)] = ("t", di, (jl + 1) % len(d.top(di)))
        for k in range(q):
            s = t[k]
            ui, js = bot_pos[s]
            nxt[("t", i, k)] = ("b", ui, js)
    orbits = []
    seen = set()
    for start in nxt:
        if start in seen:
            continue
        orb = [start]
        seen.add(start)
        cur = nxt[start]
        while cur != start:
            orb.append(cur)
            seen.add(cur)
            cur = nxt[cur]
        orbits.append(tuple(orb))
    return orbits


def diagram_invariants(d):
    """(genus, stratum, zero orders per vertex, r, m) of a cylinder diagram.

    Zero orders come from corner tracing; the genus from the Euler
    characteristic of the spine.  The two computations are cross-checked.
    """
    orbits = corner_orbits(d)
    orders = []
    for orb in orbits:
        if len(orb) % 2 != 0:
            raise MalformedDiagramError("odd corner orbit")
        orders.append(len(orb) // 2 - 1)
    s = len(orbits)
    m = d.m
    chi = s - m  # spine graph + half-open cylinders: chi(X) = V - E
    if chi % 2 != 0:
        raise MalformedDiagramError("non-integral genus")
    genus = (2 - chi) // 2
    assert sum(orders) == 2 * genus - 2
    kappa = tuple(sorted((x for x in orders if x > 0), reverse=True))
    return genus, kappa, tuple(sorted(orders, reverse=True)), d.r, m


# ---------------------------------------------------------------------------
# Cylinder surfaces (diagram + exact metric data)


@dataclass(frozen=True)
class CylSurface:
    """A translation surface in cylinder coordinates.

    lengths[s] is the length of saddle s; heights[i] and twists[i] are the
    height and twist of cylinder i.  All entries are Fractions; twists are
    stored normalized into [0, w_i).
    """

    diagram: CylDiagram
    lengths: tuple
    heights: tuple
    twists: tuple

    def __post_init__(self):
        lengths = tuple(Fraction(x) for x in self.lengths)
        heights = tuple(Fraction(x) for x in self.heights)
        d = self.diagram
        if len(lengths) != d.m or len(heights) != d.r or len(self.twists) != d.r:
            raise MalformedDiagramError("metric data has wrong shape")
        if any(x <= 0 for x in lengths) or any(h <= 0 for h in heights):
            raise MalformedDiagramError("lengths and heights must be positive")
        ws = []
        for b, t in d.cylinders:
            wb = sum(lengths[s] for s in b)
            wt = sum(lengths[s] for s in t)
            if wb != wt:
                raise MalformedDiagramError("top and bottom circumferences differ")
            ws.append(wb)
        twists = tuple(Fraction(t) % w for t, w in zip(self.twists, ws))
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "heights", heights)
        object.__setattr__(self, "twists", twists)
        object.__setattr__(self, "_w", tuple(ws))

    def circumference(self, i):
        return self._w[i]

    @property
    def widths(self):
        return self._w

    def area(self):
        return sum(w * h for w, h in zip(self._w, self.heights))

    def bottom_corners(self, i):
        """Corner positions along the bottom circle of cylinder i, from 0."""
        pos = Fraction(0)
        out = []
        for s in self.diagram.bottom(i):
            out.append(pos)
            pos += self.lengths[s]
        return out

    def top_corners(self, i):
        """Corner positions of the top circle, in bottom-circle coordinates."""
        w = self._w[i]
        pos = self.twists[i]
        out = []
        for s in self.diagram.top(i):
            out.append(pos % w)
            pos += self.lengths[s]
        return out

    def to_json(self):
        d = self.diagram.to_json()
        d["lengths"] = {str(s): frac_to_str(x) for s, x in enumerate(self.lengths)}
        d["heights"] = [frac_to_str(h) for h in self.heights]
        d["twists"] = [frac_to_str(t) for t in self.twists]
        return d

    @staticmethod
    def from_json(d):
        diag = CylDiagram.from_json(d)
        m = diag.m
        lengths = tuple(frac_from_str(d["lengths"][str(s)]) for s in range(m))
        heights = tuple(frac_from_str(x) for x in d["heights"])
        twists = tuple(frac_from_str(x) for x in d["twists"])
        return CylSurface(diag, lengths, heights, twists)


# ---------------------------------------------------------------------------
# Horizontal cylinder extraction for origamis


@dataclass(frozen=True)
class OrigamiCylinders:
    """Result of horizontal cylinder extraction from an origami.

    surface        -- the CylSurface (integer data)
    cyl_rows       -- per cylinder, the list of rows bottom to top, each row a
                      tuple of squares in sigma_h order aligned by columns
                      (row[t] sits directly above row_below[t])
    saddle_cells   -- per saddle, the squares whose bottom edges tile it
    crossing_chain -- per cylinder, (v_cells, h_cells): the squares whose left
                      edges (resp. bottom edges) make up a staircase homotopic
                      to the crossing edge from bottom corner 0 to the top
                      corner at twist position
    """

    surface: CylSurface
    cyl_rows: tuple
    saddle_cells: tuple
    crossing_chain: tuple


def horizontal_cylinders(o):
    """CylSurface of the horizontal decomposition of an origami."""
    return origami_cylinder_structure(o).surface


def origami_cylinder_structure(o):
    n, h, v = o.n, o.h, o.v
    vinv = perm_inverse(v)
    c = corner_permutation(o)
    orbit_size = [0] * n
    for orb in perm_cycles(c):
        for k in orb:
            orbit_size[k] = len(orb)
    # marked[k]: the vertex at the lower-left corner of square k is a cut
    # point of the decomposition.  For a genus-1 origami with no cone points
    # we mark the vertex of square 0 so that the decomposition has a boundary
    # leaf (flat torus convention); marks are constant on vertex orbits.
    marked = [orbit_size[k] > 1 for k in range(n)]
    if not any(marked):
        marked[0] = True

    rows = perm_cycles(h)
    row_of = {}
    for ridx, row in enumerate(rows):
        for k in row:
            row_of[k] = ridx

    def top_leaf_marked(row):
        # corners on the leaf above `row` are lower-left corners of v[k]
        return any(marked[v[k]] for k in row)

    parent = list(range(len(rows)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for ridx, row in enumerate(rows):
        if not top_leaf_marked(row):
            up = row_of[v[row[0]]]
            ra, rb = find(ridx), find(up)
            if ra != rb:
                parent[ra] = rb

    groups = {}
    for ridx in range(len(rows)):
        groups.setdefault(find(ridx), []).append(ridx)

    # order each group's rows bottom to top; the bottom row is the one whose
    # below leaf is marked (its own lower-left corners carry a mark)
    cylinders_rows = []
    for members in groups.values():
        member_set = set(members)
        bottoms = [r for r in members if any(marked[k] for k in rows[r])]
        assert len(bottoms) == 1, "cylinder must have a unique bottom row"
        seq = [bottoms[0]]
        while True:
            top_row = rows[seq[-1]]
            if top_leaf_marked(top_row):
                break
            seq.append(row_of[v[top_row[0]]])
        assert set(seq) == member_set
        cylinders_rows.append(seq)
    cylinders_rows.sort(key=lambda seq: min(rows[seq[0]]))

    # lift rows so that lifted[r][t] sits directly above lifted[r-1][t];
    # interior leaves are unmarked, hence regular, so the lifts stay in
    # sigma_h order and columns are well defined
    aligned = []
    for seq in cylinders_rows:
        base = rows[seq[0]]
        start = base.index(min(base))
        cur = tuple(base[(start + t) % len(base)] for t in range(len(base)))
        lifted = [cur]
        for _ in seq[1:]:
            cur = tuple(v[k] for k in cur)
            lifted.append(cur)
        aligned.append(tuple(lifted))

    # Saddle connections.  A unit segment of a boundary leaf is keyed by the
    # square directly below it (each square has one top edge).  A saddle is a
    # maximal run of segments between marked corners; runs agree from both
    # sides of the leaf, so keying a saddle by its first segment is global.
    saddle_of = {}
    saddle_lengths = []
    saddle_segments = []

    def arcs_above_row(top_row):
        """Runs of segments along the leaf above top_row, in column order.

        Returns (arcs, marked_cols): arcs[j] is a tuple of below-squares and
        starts at marked column marked_cols[j]; reading starts at the first
        marked column.
        """
        w = len(top_row)
        mcols = [t for t in range(w) if marked[v[top_row[t]]]]
        assert mcols, "boundary leaf must carry a marked corner"
        arcs = []
        for a, b in zip(mcols, mcols[1:] + [mcols[0] + w]):
            arcs.append(tuple(top_row[t % w] for t in range(a, b)))
        return arcs, mcols

    for lifted in aligned:
        arcs, _ = arcs_above_row(lifted[-1])
        for arc in arcs:
            if arc[0] not in saddle_of:
                saddle_of[arc[0]] = len(saddle_lengths)
                saddle_lengths.append(len(arc))
                saddle_segments.append(arc)

    cylinders = []
    heights = []
    twists = []
    crossing = []
    for lifted in aligned:
        w = len(lifted[0])
        hgt = len(lifted)
        # bottom circle: segment at column t lies below lifted[0][t]; the
        # corner at column t is the lower-left vertex of lifted[0][t]
        bot_mcols = [t for t in range(w) if marked[lifted[0][t]]]
        p0 = bot_mcols[0]
        bot_ids = []
        for a, b in zip(bot_mcols, bot_mcols[1:] + [bot_mcols[0] + w]):
            segs = tuple(vinv[lifted[0][t % w]] for t in range(a, b))
            assert segs[0] in saddle_of, "bottom arc not registered from its leaf"
            sid = saddle_of[segs[0]]
            assert saddle_segments[sid] == segs, "leaf readings disagree"
            bot_ids.append(sid)
        # top circle: segment at column t is the top edge of lifted[-1][t];
        # the corner at column t is the lower-left vertex of v[lifted[-1][t]]
        top_arcs, top_mcols = arcs_above_row(lifted[-1])
        q0 = top_mcols[0]
        top_ids = [saddle_of[arc[0]] for arc in top_arcs]
        tau = (q0 - p0) % w
        cylinders.append((tuple(bot_ids), tuple(top_ids)))
        heights.append(hgt)
        twists.append(tau)
        # staircase homotopic to the crossing edge: climb the column at p0,
        # then walk right along the top leaf to column q0
        v_cells = tuple(lifted[r][p0] for r in range(hgt))
        h_cells = tuple(v[lifted[-1][(p0 + j) % w]] for j in range(tau))
        crossing.append((v_cells, h_cells))

    diagram = CylDiagram(tuple(cylinders))
    surface = CylSurface(
        diagram,
        tuple(Fraction(x) for x in saddle_lengths),
        tuple(Fraction(x) for x in heights),
        tuple(Fraction(x) for x in twists),
    )
    assert surface.area() == o.n
    # h-edge squares per saddle: the squares sitting above each segment
    saddle_cells = tuple(
        tuple(v[x] for x in segs) for segs in saddle_segments
    )
    return OrigamiCylinders(
        surface,
        tuple(aligned),
        saddle_cells,
        tuple(crossing),
    )
