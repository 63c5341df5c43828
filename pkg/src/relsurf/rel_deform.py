"""The deformation engine: REL twists and stretches, collapse events,
horocycle and diagonal actions, and exact direction search.

Twist parameters are horizontal displacements: applying a twist vector t
moves the top of cylinder i by t_i.  A vector is REL iff sum_i t_i [gamma_i]
vanishes in absolute homology, which is an exact integer test.  REL
stretches move heights linearly: h_i(u) = h_i + u * s_i.

Twists are stored in [0, w_i).  When a twist wraps past a full turn the
stored crossing edge differs from its Gauss-Manin continuation by the bottom
circle of the cylinder, so period comparison across a twist is done with the
unreduced twist values; apply_rel_twist asserts this invariance exactly.
"""

from dataclasses import dataclass
from fractions import Fraction

from . import intlinalg
from .errors import DomainError, InvalidClassError, NotRelError
from .flat_core import CylSurface, Holonomy
from .homology import h1_bases, core_curve_span
from .diagrams import homologous_partition


# ---------------------------------------------------------------------------
# Periods


def period_map(m, basis=None):
    """Holonomy of every edge of the surface complex of m.

    Saddle s maps to (length, 0); the crossing edge of cylinder i maps to
    (twist_i, height_i).
    """
    basis = basis or h1_bases(m.diagram)
    out = {}
    for e in basis.edges:
        kind, idx = e
        if kind == "s":
            out[e] = Holonomy(m.lengths[idx], Fraction(0))
        else:
            out[e] = Holonomy(m.twists[idx], m.heights[idx])
    return out


def _periods_of_vectors(m, vectors, basis, twists=None):
    twists = m.twists if twists is None else twists
    eidx = {e: i for i, e in enumerate(basis.edges)}
    hol = []
    for e in basis.edges:
        kind, idx = e
        if kind == "s":
            hol.append((m.lengths[idx], Fraction(0)))
        else:
            hol.append((twists[idx], m.heights[idx]))
    out = []
    for vec in vectors:
        x = sum(c * hol[i][0] for i, c in enumerate(vec) if c)
        y = sum(c * hol[i][1] for i, c in enumerate(vec) if c)
        out.append(Holonomy(Fraction(x), Fraction(y)))
    return out


def absolute_periods(m, basis=None, twists=None):
    """Periods of the absolute homology basis cycles (exact)."""
    basis = basis or h1_bases(m.diagram)
    return tuple(_periods_of_vectors(m, basis.absolute, basis, twists))


def relative_periods(m, basis=None):
    basis = basis or h1_bases(m.diagram)
    return tuple(_periods_of_vectors(m, basis.relative, basis))


# ---------------------------------------------------------------------------
# REL vectors


def rel_twist_space(m):
    """Rational basis of {t : sum_i t_i gamma_i = 0}; dimension r - d."""
    classes, _ = core_curve_span(m.diagram)
    cols = [list(c.vector) for c in classes]
    mat = [[cols[i][j] for i in range(len(cols))] for j in range(len(cols[0]))]
    return intlinalg.kernel_basis(mat)


def is_rel_vector(m, t):
    if len(t) != m.diagram.r:
        raise DomainError("twist vector has wrong length")
    classes, _ = core_curve_span(m.diagram)
    dim = len(classes[0].vector)
    total = [Fraction(0)] * dim
    for ti, c in zip(t, classes):
        for j, v in enumerate(c.vector):
            total[j] += Fraction(ti) * v
    return all(x == 0 for x in total)


def apply_rel_twist(m, t):
    """Twist cylinder i by the horizontal displacement t_i (REL only).

    Verifies exactly that all absolute periods are unchanged under the
    Gauss-Manin identification (i.e. with unreduced twists) before
    normalizing the stored twists into [0, w_i).
    """
    if not is_rel_vector(m, t):
        raise NotRelError("twist vector does not annihilate the core curves")
    basis = h1_bases(m.diagram)
    before = absolute_periods(m, basis)
    unreduced = tuple(tw + Fraction(ti) for tw, ti in zip(m.twists, t))
    after = absolute_periods(m, basis, twists=unreduced)
    assert before == after, "REL twist moved an absolute period"
    return CylSurface(m.diagram, m.lengths, m.heights, unreduced)


@dataclass(frozen=True)
class VanishingSaddle:
    """A vertical saddle connection that collapses at the event parameter."""

    cylinder: int
    position: Fraction  # bottom-circle coordinate inside the cylinder
    zero_bottom: int
    zero_top: int


@dataclass(frozen=True)
class CollapseEvent:
    u_star: Fraction
    collapsing: tuple  # cylinder indices whose height reaches zero
    vanishing: tuple   # VanishingSaddle records
    tag: str           # classification tag, see classify_collapse

    def to_json(self):
        from .flat_core import frac_to_str

        return {
            "u": frac_to_str(self.u_star),
            "type": self.tag,
            "collapsing": list(self.collapsing),
            "vanishing": [
                {
                    "cylinder": v.cylinder,
                    "position": frac_to_str(v.position),
                    "zeros": [v.zero_bottom, v.zero_top],
                }
                for v in self.vanishing
            ],
        }


def _vertex_orders(d):
    """vertex id -> zero order, via the diagram complex."""
    from .diagrams import _vertex_orders as impl
    from .homology import diagram_complex

    cx = diagram_complex(d)
    return impl(d, cx), cx


def _zero_at_bottom_corner(cx, d, i, j):
    return cx.vertex_at(("s", d.bottom(i)[j]), "t")


def _zero_at_top_corner(cx, d, i, k):
    return cx.vertex_at(("s", d.top(i)[k]), "t")


def detect_collapse(m, rates, stop):
    """First collapse along h_i(u) = h_i + u * rates_i, or None before stop.

    The event lists every cylinder whose height reaches zero at u* and every
    vertical saddle inside those cylinders (a bottom corner exactly below a
    top corner, by rational congruence mod w_i).
    """
    rates = tuple(Fraction(x) for x in rates)
    stop = Fraction(stop)
    u_star = None
    for i, s in enumerate(rates):
        if s < 0:
            u = -m.heights[i] / s
            if u_star is None or u < u_star:
                u_star = u
    if u_star is None or u_star > stop:
        return None
    collapsing = tuple(
        i for i, s in enumerate(rates) if s < 0 and -m.heights[i] / s == u_star
    )
    orders, cx = _vertex_orders(m.diagram)
    d = m.diagram
    vanishing = []
    for i in collapsing:
        w = m.circumference(i)
        bcorners = m.bottom_corners(i)
        tcorners = m.top_corners(i)
        for j, bx in enumerate(bcorners):
            for k, tx in enumerate(tcorners):
                if (bx - tx) % w == 0:
                    vanishing.append(
                        VanishingSaddle(
                            i,
                            bx % w,
                            _zero_at_bottom_corner(cx, d, i, j),
                            _zero_at_top_corner(cx, d, i, k),
                        )
                    )
    tag = _classify_vanishing(vanishing)
    return CollapseEvent(u_star, collapsing, tuple(vanishing), tag)


def _classify_vanishing(vanishing):
    edges = [(v.zero_bottom, v.zero_top) for v in vanishing]
    if any(a == b for a, b in edges):
        return "curve_pinched"
    # union of vanishing saddles contains a closed curve iff the multigraph
    # has a cycle (including a doubled edge)
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra == rb:
            return "curve_pinched"
        parent[ra] = rb
    return "lower_stratum_same_genus"


@dataclass(frozen=True)
class CollapseClassification:
    kind: str
    target_stratum: tuple

    def to_json(self):
        return {"kind": self.kind, "target_stratum": list(self.target_stratum)}


def classify_collapse(event, m):
    """Classify a collapse event and compute the target stratum.

    lower_stratum_same_genus: every vanishing saddle joins distinct zeros and
    their union contains no closed curve; the zeros merge along the vanishing
    forest (orders add within each tree).  Any loop pinches a curve.
    """
    tag = _classify_vanishing(event.vanishing)
    if tag == "curve_pinched":
        return CollapseClassification("curve_pinched", ())
    orders, _ = _vertex_orders(m.diagram)
    parent = {v: v for v in orders}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for v in event.vanishing:
        ra, rb = find(v.zero_bottom), find(v.zero_top)
        if ra == rb:
            return CollapseClassification("inconclusive", ())
        parent[ra] = rb
    merged = {}
    for v, order in orders.items():
        merged[find(v)] = merged.get(find(v), 0) + order
    target = tuple(sorted((x for x in merged.values() if x > 0), reverse=True))
    return CollapseClassification("lower_stratum_same_genus", target)


@dataclass(frozen=True)
class StretchOutcome:
    surface: object  # CylSurface or None
    event: object    # CollapseEvent or None


def rel_stretch_path(m, s, stop):
    """Follow the REL stretch h_i(u) = h_i + u*s_i up to `stop`.

    Returns StretchOutcome with either the surface at `stop` or the first
    CollapseEvent on the way.  Horizontal data (lengths, twists) is fixed, so
    REL stretches never move a horizontal period.
    """
    if not is_rel_vector(m, s):
        raise NotRelError("stretch vector does not annihilate the core curves")
    event = detect_collapse(m, s, stop)
    if event is not None:
        return StretchOutcome(None, event)
    stop = Fraction(stop)
    heights = tuple(h + stop * Fraction(si) for h, si in zip(m.heights, s))
    out = CylSurface(m.diagram, m.lengths, heights, m.twists)
    basis = h1_bases(m.diagram)
    assert [p.x for p in absolute_periods(m, basis)] == [
        p.x for p in absolute_periods(out, basis)
    ], "REL stretch moved a horizontal period"
    return StretchOutcome(out, None)


# ---------------------------------------------------------------------------
# GL(2,R)-style deformations (Wright cylinder deformations)


def horocycle(m, t):
    """u_t on the whole surface: twists shear by t * height."""
    t = Fraction(t)
    twists = tuple(tw + t * h for tw, h in zip(m.twists, m.heights))
    return CylSurface(m.diagram, m.lengths, m.heights, twists)


def diagonal(m, lam):
    """Vertical scaling by a rational factor lam > 0 (a_s with e^s = lam)."""
    lam = Fraction(lam)
    if lam <= 0:
        raise DomainError("diagonal scaling factor must be positive")
    heights = tuple(h * lam for h in m.heights)
    return CylSurface(m.diagram, m.lengths, heights, m.twists)


def _check_class(m, subset, user_asserted):
    subset = tuple(sorted(set(subset)))
    if user_asserted:
        return subset
    report = homologous_partition(m.diagram)
    blocks = {frozenset(b) for b in report.blocks}
    chosen = frozenset(subset)
    # the subset must be a union of homologous blocks
    covered = set()
    for b in blocks:
        if b & chosen:
            if not b <= chosen:
                raise InvalidClassError(
                    "subset %r splits the homologous block %r" % (subset, tuple(b))
                )
            covered |= b
    if covered != set(chosen):
        raise InvalidClassError("subset %r is not a union of homologous blocks" % (subset,))
    return subset


def class_shear(m, subset, t, user_asserted=False):
    """u_t applied to a homologous block (or user-asserted class) only."""
    subset = _check_class(m, subset, user_asserted)
    t = Fraction(t)
    twists = tuple(
        tw + (t * h if i in subset else 0)
        for i, (tw, h) in enumerate(zip(m.twists, m.heights))
    )
    return CylSurface(m.diagram, m.lengths, m.heights, twists)


def class_stretch(m, subset, lam, user_asserted=False):
    """a_s applied to a homologous block only (e^s = lam > 0)."""
    subset = _check_class(m, subset, user_asserted)
    lam = Fraction(lam)
    if lam <= 0:
        raise DomainError("stretch factor must be positive")
    heights = tuple(
        h * lam if i in subset else h for i, h in enumerate(m.heights)
    )
    return CylSurface(m.diagram, m.lengths, heights, m.twists)


def class_collapse(m, subset, user_asserted=False):
    """Collapse a class of cylinders (a_s with s -> -infinity, capped at the
    first collapse event)."""
    subset = _check_class(m, subset, user_asserted)
    rates = tuple(-m.heights[i] if i in subset else Fraction(0) for i in range(m.diagram.r))
    event = detect_collapse(m, rates, Fraction(1))
    assert event is not None and event.u_star == 1
    return event


def apply_matrix(m, which, **kwargs):
    """Dispatcher for the deformation script interface."""
    if which == "horocycle":
        return horocycle(m, kwargs["t"])
    if which == "diagonal":
        return diagonal(m, kwargs["scale"])
    if which == "class_shear":
        return class_shear(m, kwargs["subset"], kwargs["t"],
                           kwargs.get("user_asserted", False))
    if which == "class_stretch":
        return class_stretch(m, kwargs["subset"], kwargs["scale"],
                             kwargs.get("user_asserted", False))
    if which == "class_collapse":
        return class_collapse(m, kwargs["subset"], kwargs.get("user_asserted", False))
    raise DomainError("unknown deformation %r" % (which,))


# ---------------------------------------------------------------------------
# Direction search (exact separatrix tracing)


@dataclass(frozen=True)
class VerticalCylinder:
    width: Fraction
    circumference: Fraction
    passes: tuple        # (cylinder, entry position) per crossing
    core_class: object   # HomClass in the basis of the horizontal diagram


@dataclass(frozen=True)
class DirectionDecomposition:
    cylinders: tuple
    surface: object      # CylSurface in the rotated coordinates


@dataclass(frozen=True)
class Undetermined:
    cap: int


class _Tracer:
    """Exact vertical flow bookkeeping on a CylSurface."""

    def __init__(self, m):
        self.m = m
        d = m.diagram
        self.d = d
        self.bot_starts = []   # per cylinder: sorted (pos, saddle, index)
        self.top_starts = []
        for i in range(d.r):
            w = m.circumference(i)
            bots = []
            pos = Fraction(0)
            for j, s in enumerate(d.bottom(i)):
                bots.append((pos, s, j))
                pos += m.lengths[s]
            self.bot_starts.append(bots)
            tops = []
            pos = m.twists[i]
            for k, s in enumerate(d.top(i)):
                tops.append((pos % w, s, k))
                pos += m.lengths[s]
            tops.sort()
            self.top_starts.append(tops)
        self.bot_pos, self.top_pos = d.saddle_positions()
        self.bot_corner_set = [
            {pos: j for pos, _, j in self.bot_starts[i]} for i in range(d.r)
        ]
        self.top_corner_set = [
            {pos: k for pos, _, k in self.top_starts[i]} for i in range(d.r)
        ]

    def locate_top(self, i, x):
        """(saddle, index, offset) of the top arc containing position x."""
        tops = self.top_starts[i]
        w = self.m.circumference(i)
        lo, hi = 0, len(tops)
        # last start <= x, else wrap to the last arc
        cand = None
        for pos, s, k in tops:
            if pos <= x:
                cand = (pos, s, k)
        if cand is None:
            pos, s, k = tops[-1]
            return s, k, x + w - pos
        pos, s, k = cand
        return s, k, x - pos

    def step_up(self, i, x):
        """Cross cylinder i vertically from bottom position x.

        Returns ("zero", corner_index) when the exit point is a top corner,
        else ("pass", j, x') landing on the bottom circle of cylinder j.
        """
        w = self.m.circumference(i)
        x = x % w
        if x in self.top_corner_set[i]:
            return ("zero", self.top_corner_set[i][x])
        s, k, off = self.locate_top(i, x)
        j, jidx = self.bot_pos[s]
        start = self.bot_starts[j][jidx][0]
        return ("pass", j, start + off)

    def step_down(self, i, x):
        """Flow downward from bottom position x of cylinder i.

        Returns ("zero",) when x is a bottom corner of i, else
        ("pass", d, y): the point on the bottom circle of cylinder d whose
        upward flow through d reaches x.
        """
        w = self.m.circumference(i)
        x = x % w
        if x in self.bot_corner_set[i]:
            return ("zero",)
        # bottom arc containing x
        bots = self.bot_starts[i]
        cand = bots[0]
        for pos, s, j in bots:
            if pos <= x:
                cand = (pos, s, j)
        pos, s, j = cand
        off = x - pos
        dcyl, kidx = self.top_pos[s]
        start = next(p for p, s2, k in self.top_starts[dcyl] if s2 == s)
        return ("pass", dcyl, (start + off) % self.m.circumference(dcyl))


def direction_cylinders(m, slope="vertical", cap=100000):
    """Full cylinder decomposition of m in a rational direction.

    slope is "vertical", 0 (horizontal: returns m's own decomposition) or a
    nonzero Fraction dy/dx.  All separatrices are traced with exact rational
    arithmetic; if any exceeds `cap` cylinder crossings the result is
    Undetermined(cap).
    """
    if slope == "vertical":
        return _vertical_cylinders(m, cap)
    slope = Fraction(slope)
    if slope == 0:
        classes, _ = core_curve_span(m.diagram)
        cyls = tuple(
            VerticalCylinder(m.heights[i], m.circumference(i), ((i, None),), classes[i])
            for i in range(m.diagram.r)
        )
        return DirectionDecomposition(cyls, m)
    return _vertical_cylinders(horocycle(m, -1 / slope), cap)


def _vertical_cylinders(m, cap):
    d = m.diagram
    tracer = _Tracer(m)
    basis = h1_bases(d)

    # upward separatrices: one per bottom corner occurrence
    saddle_from = {}  # (cyl, position) -> vertical saddle id
    vsaddle_len = []
    cuts = [set(pos for pos, _, _ in tracer.bot_starts[i]) for i in range(d.r)]
    steps_budget = cap
    starts = [
        (i, pos) for i in range(d.r) for pos, _, _ in tracer.bot_starts[i]
    ]
    for i0, x0 in starts:
        i, x = i0, x0
        length = Fraction(0)
        for _ in range(cap):
            length += m.heights[i]
            res = tracer.step_up(i, x)
            if res[0] == "zero":
                break
            _, i, x = res
            cuts[i].add(x)
        else:
            return Undetermined(cap)
        saddle_from[(i0, x0)] = len(vsaddle_len)
        vsaddle_len.append(length)

    # downward separatrices: one per top corner occurrence; they only add
    # cut points (each is a reversed upward saddle)
    for i in range(d.r):
        for pos, _, _ in tracer.top_starts[i]:
            cur = ("pass", i, pos)
            # flow down from the top corner through cylinder i first
            cyl, x = i, pos
            for _ in range(cap):
                cuts[cyl].add(x % m.circumference(cyl))
                res = tracer.step_down(cyl, x)
                if res[0] == "zero":
                    break
                _, cyl, x = res
            else:
                return Undetermined(cap)

    # interval return map
    intervals = []
    index_of = {}
    for i in range(d.r):
        w = m.circumference(i)
        pts = sorted(cuts[i])
        for a, b in zip(pts, pts[1:] + [pts[0] + w]):
            index_of[(i, a)] = len(intervals)
            intervals.append((i, a, b - a))

    def image(idx):
        i, a, width = intervals[idx]
        mid = a + width / 2
        res = tracer.step_up(i, mid)
        assert res[0] == "pass", "separatrix cut missed a zero"
        _, j, y = res
        a2 = (y - width / 2) % m.circumference(j)
        assert (j, a2) in index_of, "interval map does not respect the cuts"
        assert intervals[index_of[(j, a2)]][2] == width
        return index_of[(j, a2)]

    nxt = [image(k) for k in range(len(intervals))]
    seen = [False] * len(intervals)
    vcyls = []
    for k in range(len(intervals)):
        if seen[k]:
            continue
        cycle = [k]
        seen[k] = True
        cur = nxt[k]
        while cur != k:
            cycle.append(cur)
            seen[cur] = True
            cur = nxt[cur]
        vcyls.append(cycle)

    # assemble vertical cylinders with homology classes
    out = []
    new_cylinders = []
    new_heights = []
    new_twists = []
    for cycle in vcyls:
        i0, a0, width = intervals[cycle[0]]
        passes = []
        circ = Fraction(0)
        chain = {}
        heights_prefix = []
        for idx in cycle:
            i, a, _ = intervals[idx]
            heights_prefix.append(circ)
            passes.append((i, a))
            circ += m.heights[i]
            # pass formula: crossing edge plus full top saddles before the
            # exit arc minus full bottom saddles before the entry arc
            chain[("e", i)] = chain.get(("e", i), 0) + 1
            mid = a + width / 2
            _, _, entry_j = _bottom_arc(tracer, i, mid)
            for j2 in range(entry_j):
                key = ("s", d.bottom(i)[j2])
                chain[key] = chain.get(key, 0) - 1
            s, k, _ = tracer.locate_top(i, mid % m.circumference(i))
            for k2 in range(k):
                key = ("s", d.top(i)[k2])
                chain[key] = chain.get(key, 0) + 1
        core = basis.absolute_class(chain)
        vc = VerticalCylinder(width, circ, tuple(passes), core)
        out.append(vc)
        # rotated-cylinder boundaries: the right side of the strip is the new
        # bottom circle, the left side the new top (rotation (x,y)->(y,-x))
        bot_word, bot0 = _side_word(tracer, m, intervals, cycle, heights_prefix,
                                    circ, saddle_from, side="right", width=width)
        top_word, top0 = _side_word(tracer, m, intervals, cycle, heights_prefix,
                                    circ, saddle_from, side="left", width=width)
        new_cylinders.append((bot_word, top_word, (top0 - bot0) % circ))
        new_heights.append(width)

    # vertical saddles become the saddles of the rotated surface
    rotated = _assemble_rotated(new_cylinders, new_heights, vsaddle_len)
    return DirectionDecomposition(tuple(out), rotated)


def _bottom_arc(tracer, i, x):
    """(position, saddle, index) of the bottom arc of cylinder i containing x."""
    bots = tracer.bot_starts[i]
    x = x % tracer.m.circumference(i)
    cand = bots[0]
    for pos, s, j in bots:
        if pos <= x:
            cand = (pos, s, j)
    return cand


def _side_word(tracer, m, intervals, cycle, heights_prefix, circ, saddle_from,
               side, width):
    """Vertical-saddle word along one side of a strip cylinder.

    Returns (word, first_corner_height).  A corner occurs at the height of
    pass k iff the side coordinate is a bottom corner of that cylinder; the
    saddle starting there is the upward separatrix from that corner.
    """
    word = []
    corner_heights = []
    for k, idx in enumerate(cycle):
        i, a, _ = intervals[idx]
        x = a if side == "left" else (a + width) % m.circumference(i)
        if x in tracer.bot_corner_set[i]:
            corner_heights.append((heights_prefix[k], saddle_from[(i, x)]))
    assert corner_heights, "strip side without a zero"
    word = tuple(s for _, s in corner_heights)
    return word, corner_heights[0][0]


def _assemble_rotated(new_cylinders, new_heights, vsaddle_len):
    from .flat_core import CylDiagram

    cylinders = tuple((b, t) for b, t, _ in new_cylinders)
    twists = tuple(tw for _, _, tw in new_cylinders)
    diagram = CylDiagram(cylinders)
    return CylSurface(
        diagram,
        tuple(vsaddle_len),
        tuple(new_heights),
        twists,
    )
