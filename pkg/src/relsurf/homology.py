"""Integer homology of cylinder surfaces and origamis.

The CW structure of a cylinder diagram has one vertex per zero, one edge per
saddle connection plus one crossing edge per cylinder, and one face per
cylinder (the rectangle obtained by cutting the cylinder along its crossing
edge).  An origami carries the square complex with one horizontal and one
vertical edge per square.

Both complexes go through the same pipeline: glue all faces into a single
polygon along a dual spanning tree (eliminating the glued edges by their face
relations), read off H1 as the cycle lattice of the kept edges, and compute
the intersection form from chord crossings inside the polygon.  For a
one-face complex the face relation is the zero chain, so the cycle lattice
*is* H1 and the chord of an edge (joining the midpoints of its two boundary
occurrences) is a closed curve crossing exactly that edge.

Sign convention: the pairing is normalized so that a cycle crossing a
cylinder upward pairs +1 with that cylinder's core curve; on the square torus
<v, h> = +1.  With this choice the action of T^N on an origami is the
multi-transvection x -> x + sum_i k_i <x, gamma_i> gamma_i with k_i >= 0.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

from . import intlinalg
from .errors import BasisMismatchError, DomainError, MalformedDiagramError


class SurfaceComplex:
    """An oriented closed-surface CW complex given by face boundary words.

    faces: list of words; each word is a list of (edge_id, sign) with sign
    +-1, read counterclockwise.  Every edge id must occur exactly twice in
    total, once with each sign.
    """

    def __init__(self, faces):
        self.faces = [list(w) for w in faces]
        count = {}
        for w in self.faces:
            for e, s in w:
                count.setdefault(e, []).append(s)
        for e, signs in count.items():
            if sorted(signs) != [-1, 1]:
                raise MalformedDiagramError(
                    "edge %r does not occur once with each sign" % (e,)
                )
        self.edges = sorted(count)
        self._eidx = {e: i for i, e in enumerate(self.edges)}
        self._build_vertices()
        self._merged = None

    # -- vertices -----------------------------------------------------------

    def _build_vertices(self):
        parent = {}

        def find(x):
            while parent.setdefault(x, x) != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(x, y):
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[rx] = ry

        def head_slot(e, s):
            return (e, "h" if s > 0 else "t")

        def tail_slot(e, s):
            return (e, "t" if s > 0 else "h")

        for w in self.faces:
            for (e1, s1), (e2, s2) in zip(w, w[1:] + w[:1]):
                union(head_slot(e1, s1), tail_slot(e2, s2))
        slots = [(e, end) for e in self.edges for end in ("t", "h")]
        roots = sorted({find(s) for s in slots})
        self._vertex_of_slot = {s: roots.index(find(s)) for s in slots}
        self.n_vertices = len(roots)

    def vertex_at(self, edge, end):
        """Vertex id at the tail ('t') or head ('h') of an edge."""
        return self._vertex_of_slot[(edge, end)]

    @property
    def genus(self):
        chi = self.n_vertices - len(self.edges) + len(self.faces)
        assert chi % 2 == 0
        return (2 - chi) // 2

    def boundary_matrix(self):
        """Vertex-by-edge incidence matrix (head minus tail)."""
        mat = [[0] * len(self.edges) for _ in range(self.n_vertices)]
        for j, e in enumerate(self.edges):
            mat[self.vertex_at(e, "h")][j] += 1
            mat[self.vertex_at(e, "t")][j] -= 1
        return mat

    def face_chains(self):
        """Face boundaries as integer vectors over the edge list."""
        out = []
        for w in self.faces:
            vec = [0] * len(self.edges)
            for e, s in w:
                vec[self._eidx[e]] += s
            out.append(vec)
        return out

    # -- one-polygon reduction ---------------------------------------------

    def merged(self):
        """(word, kept_edges, expand) of the one-polygon form.

        expand maps every edge to a chain over kept edges (identity on kept
        ones); it is the homology-preserving elimination of the dual spanning
        tree.
        """
        if self._merged is not None:
            return self._merged
        words = [list(w) for w in self.faces]
        alive = list(range(len(words)))
        root = alive[0]
        word = words[root]
        merged_in = {root}
        subst = {}
        elim_order = []
        while len(merged_in) < len(words):
            pos = None
            for i, (e, s) in enumerate(word):
                partner = self._partner_face(e, words, merged_in)
                if partner is not None:
                    pos = (i, e, s, partner)
                    break
            assert pos is not None, "dual graph disconnected"
            i, e, s, f = pos
            other = words[f]
            j = next(k for k, (e2, s2) in enumerate(other) if e2 == e)
            rotated = other[j + 1:] + other[:j]
            # face relation of the current polygon word: sum sign*edge = 0
            rel = [(e2, -s * s2) for k, (e2, s2) in enumerate(word) if k != i]
            subst[e] = rel
            elim_order.append(e)
            word = word[:i] + rotated + word[i + 1:]
            merged_in.add(f)
        expand_memo = {}

        def expand(e):
            if e in expand_memo:
                return expand_memo[e]
            if e not in subst:
                expand_memo[e] = {e: 1}
                return expand_memo[e]
            out = {}
            for e2, c in subst[e]:
                for e3, c3 in expand(e2).items():
                    out[e3] = out.get(e3, 0) + c * c3
            out = {k: v for k, v in out.items() if v}
            expand_memo[e] = out
            return out

        kept = [e for e in self.edges if e not in subst]
        expand_map = {e: expand(e) for e in self.edges}
        kept_set = set(kept)
        assert all(e in kept_set for e, _ in word)
        self._merged = (word, kept, expand_map)
        return self._merged

    def _partner_face(self, e, words, merged_in):
        for f, w in enumerate(words):
            if f in merged_in:
                continue
            if any(e2 == e for e2, _ in w):
                return f
        return None

    def eliminate(self, chain):
        """Push a chain (dict edge -> coeff) into kept-edge coordinates."""
        _, kept, expand = self.merged()
        out = {e: 0 for e in kept}
        for e, c in chain.items():
            if not c:
                continue
            for e2, c2 in expand[e].items():
                out[e2] += c * c2
        return [out[e] for e in kept]


def _chord_crossing(word, eidx_occurrences, a, b):
    """Signed crossing number of the chords of kept edges a and b."""
    pa, ma = eidx_occurrences[a]
    pb, mb = eidx_occurrences[b]
    n = len(word)

    def between(x, lo, hi):
        # is x strictly inside the ccw arc lo -> hi?
        if lo < hi:
            return lo < x < hi
        return x > lo or x < hi

    in1 = between(pb, pa, ma)
    in2 = between(mb, pa, ma)
    if in1 == in2:
        return 0
    return 1 if in1 else -1


@dataclass
class HomBasis:
    """Frozen homology bases of a surface complex.

    absolute  -- 2g cycles, each a vector over `edges`
    relative  -- 2g + s - 1 chains spanning H1(X, Sigma) (free, no torsion)
    J         -- intersection matrix on the absolute basis
    p_matrix  -- absolute basis cycles written in relative coordinates
    """

    source_key: object
    edges: tuple
    boundary: tuple
    faces: tuple
    absolute: tuple
    relative: tuple
    J: tuple
    p_matrix: tuple

    def __post_init__(self):
        self._eidx = {e: i for i, e in enumerate(self.edges)}

    @property
    def genus(self):
        return len(self.absolute) // 2

    def absolute_rank(self):
        return len(self.absolute)

    def relative_rank(self):
        return len(self.relative)

    def chain_vector(self, chain):
        """Dense vector over `edges` from a dict edge -> coeff."""
        vec = [0] * len(self.edges)
        for e, c in chain.items():
            vec[self._eidx[e]] += c
        return vec

    def absolute_class(self, chain):
        """HomClass of a 1-cycle given as a dict edge -> coeff."""
        vec = self._complex.eliminate(chain)
        coords = intlinalg.solve_int(self._abs_matrix, vec)
        if coords is None:
            raise MalformedDiagramError("chain is not a 1-cycle")
        return HomClass(self, "absolute", tuple(coords))

    def relative_class(self, chain):
        vec = self.chain_vector(chain)
        coords = intlinalg.mat_vec(self._rel_coords, vec)
        return HomClass(self, "relative", tuple(coords))

    def pair(self, x, y):
        if x.basis is not self or y.basis is not self:
            raise BasisMismatchError("classes live in different bases")
        if x.kind != "absolute" or y.kind != "absolute":
            raise BasisMismatchError("intersection needs absolute classes")
        out = 0
        for i, xi in enumerate(x.vector):
            if xi:
                for j, yj in enumerate(y.vector):
                    if yj:
                        out += xi * self.J[i][j] * yj
        return out

    def to_json(self):
        return {
            "edges": [list(e) if isinstance(e, tuple) else e for e in self.edges],
            "boundary": [list(r) for r in self.boundary],
            "absolute": [list(r) for r in self.absolute],
            "relative": [list(r) for r in self.relative],
            "intersection": [list(r) for r in self.J],
            "projection": [list(r) for r in self.p_matrix],
        }


@dataclass(frozen=True)
class HomClass:
    """An integer homology class in a named basis."""

    basis: HomBasis
    kind: str
    vector: tuple

    def __add__(self, other):
        self._check(other)
        return HomClass(self.basis, self.kind,
                        tuple(a + b for a, b in zip(self.vector, other.vector)))

    def __sub__(self, other):
        self._check(other)
        return HomClass(self.basis, self.kind,
                        tuple(a - b for a, b in zip(self.vector, other.vector)))

    def __neg__(self):
        return HomClass(self.basis, self.kind, tuple(-a for a in self.vector))

    def is_zero(self):
        return all(a == 0 for a in self.vector)

    def _check(self, other):
        if self.basis is not other.basis or self.kind != other.kind:
            raise BasisMismatchError("classes live in different bases")


def build_basis(source_key, complex_):
    """Compute a HomBasis from a SurfaceComplex (deterministic)."""
    word, kept, expand = complex_.merged()
    kept_idx = {e: i for i, e in enumerate(kept)}
    # cycle lattice of the kept edges
    boundary_kept = [[0] * len(kept) for _ in range(complex_.n_vertices)]
    for j, e in enumerate(kept):
        boundary_kept[complex_.vertex_at(e, "h")][j] += 1
        boundary_kept[complex_.vertex_at(e, "t")][j] -= 1
    z1 = intlinalg.kernel_basis(boundary_kept)
    g = complex_.genus
    assert len(z1) == 2 * g, "cycle lattice rank mismatch"

    # chords
    occ = {}
    for pos, (e, s) in enumerate(word):
        slot = occ.setdefault(e, [None, None])
        slot[0 if s > 0 else 1] = pos
    C = [[0] * len(kept) for _ in range(len(kept))]
    for i, a in enumerate(kept):
        for j, b in enumerate(kept):
            if i != j:
                C[i][j] = _chord_crossing(word, occ, a, b)
    # J_chord(chord_a, z) = -z_a; solve for each basis cycle in chord span
    M = [[-z1[i][a] for i in range(len(z1))] for a in range(len(kept))]
    alphas = []
    for i in range(len(z1)):
        rhs = [M[a][i] for a in range(len(kept))]
        alpha = intlinalg.solve_fraction(C, rhs)
        assert alpha is not None, "basis cycle outside chord span"
        alphas.append(alpha)
    J = [[0] * len(z1) for _ in range(len(z1))]
    for i in range(len(z1)):
        for j in range(len(z1)):
            val = sum(alphas[i][a] * M[a][j] for a in range(len(kept)))
            assert val.denominator == 1
            # sign flip: normalize to <crossing-up, core-right> = +1
            J[i][j] = -int(val)
    for i in range(len(z1)):
        for j in range(len(z1)):
            assert J[i][j] == -J[j][i], "intersection form not skew"
    assert abs(intlinalg.det(J)) == 1, "intersection form not unimodular"

    # absolute representatives over the full edge list
    n_edges = len(complex_.edges)
    full_idx = {e: i for i, e in enumerate(complex_.edges)}
    absolute = []
    for vec in z1:
        full = [0] * n_edges
        for j, e in enumerate(kept):
            full[full_idx[e]] = vec[j]
        absolute.append(tuple(full))

    # relative homology: all 1-chains modulo face boundaries
    face_cols = complex_.face_chains()
    rel_basis, rel_coords = intlinalg.quotient_free_basis(
        n_edges, face_cols[:-1]
    )
    # dropping one face keeps the presentation torsion-free and full rank:
    # the face boundaries sum to zero
    total = [sum(col[i] for col in face_cols) for i in range(n_edges)]
    assert all(x == 0 for x in total)

    p_matrix = [intlinalg.mat_vec(rel_coords, list(vec)) for vec in absolute]

    basis = HomBasis(
        source_key=source_key,
        edges=tuple(complex_.edges),
        boundary=tuple(tuple(r) for r in complex_.boundary_matrix()),
        faces=tuple(tuple(r) for r in face_cols),
        absolute=tuple(absolute),
        relative=tuple(tuple(r) for r in rel_basis),
        J=tuple(tuple(r) for r in J),
        p_matrix=tuple(tuple(r) for r in p_matrix),
    )
    # stash solver state: absolute reps live on kept edges, so their
    # kept-coordinate columns are exactly the z1 basis vectors
    basis._complex = complex_
    basis._abs_matrix = [[z1[i][j] for i in range(len(z1))] for j in range(len(kept))]
    basis._rel_coords = rel_coords
    assert len(rel_basis) == n_edges - len(face_cols) + 1
    return basis


# ---------------------------------------------------------------------------
# Complexes for our two kinds of surfaces


def diagram_complex(d):
    """SurfaceComplex of a cylinder diagram.

    Face i is the rectangle of cylinder i: bottom saddles left to right, the
    crossing edge up, top saddles right to left, the crossing edge down.
    Saddle s is the edge ("s", s); the crossing edge of cylinder i is
    ("e", i).
    """
    faces = []
    for i, (bottom, top) in enumerate(d.cylinders):
        word = [(("s", s), 1) for s in bottom]
        word.append((("e", i), 1))
        word.extend((("s", s), -1) for s in reversed(top))
        word.append((("e", i), -1))
        faces.append(word)
    return SurfaceComplex(faces)


def origami_complex(o):
    """Square complex of an origami: edges ("h", k) and ("v", k)."""
    faces = []
    for k in range(o.n):
        faces.append([
            (("h", k), 1),
            (("v", o.h[k]), 1),
            (("h", o.v[k]), -1),
            (("v", k), -1),
        ])
    return SurfaceComplex(faces)


@lru_cache(maxsize=512)
def h1_bases(d):
    """HomBasis of a cylinder diagram (cached per diagram)."""
    return build_basis(("diagram", d.cylinders), diagram_complex(d))


@lru_cache(maxsize=512)
def origami_h1_basis(o):
    """HomBasis of an origami's square complex (cached per origami)."""
    return build_basis(("origami", o.key()), origami_complex(o))


# ---------------------------------------------------------------------------
# Operations


def intersection_pairing(x, y):
    """Algebraic intersection number of two absolute classes."""
    return x.basis.pair(x, y)


def core_curve_chain(d, i):
    """The bottom circle of cylinder i as a 1-chain (dict edge -> coeff)."""
    chain = {}
    for s in d.bottom(i):
        chain[("s", s)] = chain.get(("s", s), 0) + 1
    return chain


def core_curve_span(d, basis=None):
    """Core-curve classes of all cylinders and the rank of their span."""
    basis = basis or h1_bases(d)
    classes = [basis.absolute_class(core_curve_chain(d, i)) for i in range(d.r)]
    mat = [list(c.vector) for c in classes]
    return classes, intlinalg.rank(mat)


def forni_dim_bound(d, g):
    """Upper bound 2(g - d) for dim F given a periodic direction of
    homological dimension d.

    The Forni subspace annihilates the isotropic span of the core curves and
    is symplectic, so it embeds in the symplectic reduction of that span.
    """
    if not 1 <= d <= g:
        raise DomainError("homological dimension must satisfy 1 <= d <= g")
    return 2 * (g - d)


def is_lagrangian(classes):
    """True iff the classes span a Lagrangian subspace (rank g, pairwise 0)."""
    if not classes:
        return False
    basis = classes[0].basis
    for c in classes:
        if c.basis is not basis or c.kind != "absolute":
            raise BasisMismatchError("classes live in different bases")
    g = basis.genus
    mat = [list(c.vector) for c in classes]
    if intlinalg.rank(mat) != g:
        return False
    for i, x in enumerate(classes):
        for y in classes[i:]:
            if basis.pair(x, y) != 0:
                return False
    return True


@dataclass(frozen=True)
class ForniCertificate:
    """Witnessed proof that the Forni subspace has dimension zero."""

    condition: int  # 1: rank 2g-1 realized span; 2: realized Lagrangian
    witnesses: tuple

    def to_json(self):
        return {"condition": self.condition, "witnesses": list(self.witnesses)}


@dataclass(frozen=True)
class ForniRejection:
    reason: str

    def to_json(self):
        return {"rejected": self.reason}


def certify_forni_trivial(basis, realized):
    """Check the two degenerate-Forni conditions on realized core curves.

    realized is a list of (HomClass, witness_id) pairs, each class realized
    as the core curve of a cylinder on some surface in the orbit closure.
    Accepts iff the realized span has rank >= 2g-1 (then the annihilator of
    the span is too small to contain a symplectic subspace) or some g-subset
    spans a Lagrangian (a symplectic subspace cannot pair to zero with a
    Lagrangian).
    """
    g = basis.genus
    classes = [c for c, _ in realized]
    witnesses = [w for _, w in realized]
    for c in classes:
        if c.basis is not basis:
            raise BasisMismatchError("realized class in a foreign basis")
    if len(classes) < g:
        return ForniRejection("missing witnesses: need at least %d realized curves" % g)
    mat = [list(c.vector) for c in classes]
    if intlinalg.rank(mat) >= 2 * g - 1:
        return ForniCertificate(1, tuple(witnesses))
    for idx in combinations(range(len(classes)), g):
        subset = [classes[i] for i in idx]
        if is_lagrangian(subset):
            return ForniCertificate(2, tuple(witnesses[i] for i in idx))
    if intlinalg.rank(mat) < g:
        return ForniRejection("insufficient intersection pattern: span rank %d < %d"
                              % (intlinalg.rank(mat), g))
    return ForniRejection("no realized subset is Lagrangian and span rank %d < %d"
                          % (intlinalg.rank(mat), 2 * g - 1))
