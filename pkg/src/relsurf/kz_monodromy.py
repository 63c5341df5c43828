"""SL(2,Z) orbits of origamis and the Kontsevich-Zorich monodromy.

Generator conventions (pinned by stratum invariance, S^4 = id on labeled
pairs, and the multi-transvection cross-check):

    T       : (h, v) -> (h, v o h^-1)     shear (1,1;0,1)
    T^-1    : (h, v) -> (h, v o h)
    S       : (h, v) -> (v^-1, h)         rotation (0,-1;1,0)
    S^-1    : (h, v) -> (v, h^-1)

Each generator comes with its chain map on the square-complex edges, so
monodromy matrices are exact integer matrices on H1(X, Z) and preserve the
intersection form.

Finiteness certification works on the non-tautological subspace K.  A vector
on which the monodromy group is norm-bounded is killed by the squarefree
product of the cyclotomic factors of every element's characteristic
polynomial (Kronecker: a monic irreducible integer polynomial with all roots
on the unit circle is cyclotomic).  Intersecting those kernels over sampled
elements and forcing invariance yields an upper bound for the Forni subspace;
closing the restricted group under multiplication certifies the lower bound.
"""

from dataclasses import dataclass
from fractions import Fraction
import hashlib
import math
import random

import numpy as np

from . import intlinalg
from .errors import NotClosedError, OrbitTooLargeError
from .flat_core import Origami, origami_from_perms, perm_inverse, singularity_data
from .homology import origami_h1_basis


# ---------------------------------------------------------------------------
# Generators and chain maps


def _edge_index(n):
    # edges ordered h_0..h_{n-1}, v_0..v_{n-1}
    return n


def sl2z_step(o, gen):
    """Apply a generator to an origami; returns the new (un-canonicalized)
    origami together with the chain map on square-complex edges.

    The chain map is a 2n x 2n integer matrix whose column j is the image of
    edge j (h_k at index k, v_k at index n+k).
    """
    n, h, v = o.n, o.h, o.v
    hinv = perm_inverse(h)
    vinv = perm_inverse(v)
    mat = [[0] * (2 * n) for _ in range(2 * n)]

    def put(col, row, val):
        mat[row][col] += val

    if gen == "T":
        new = (h, tuple(v[hinv[k]] for k in range(n)))
        for k in range(n):
            put(k, k, 1)                      # h_k -> h_k
            put(n + k, k, 1)                  # v_k -> h_k + v_{h(k)}
            put(n + k, n + h[k], 1)
    elif gen == "t":
        new = (h, tuple(v[h[k]] for k in range(n)))
        for k in range(n):
            put(k, k, 1)
            put(n + k, hinv[k], -1)           # v_k -> -h_{h^-1 k} + v_{h^-1 k}
            put(n + k, n + hinv[k], 1)
    elif gen == "S":
        new = (vinv, h)
        for k in range(n):
            put(k, n + vinv[k], 1)            # h_k -> v_{v^-1 k}
            put(n + k, k, -1)                 # v_k -> -h_k
    elif gen == "s":
        new = (v, hinv)
        for k in range(n):
            put(k, n + k, -1)                 # h_k -> -v_k
            put(n + k, hinv[k], 1)            # v_k -> h_{h^-1 k}
    elif gen == "F":
        # orientation-reversing flip (x, y) -> (y, x); used only by the
        # Lyapunov walk's R-L geodesic coding, never in Veech monodromy
        new = (v, h)
        for k in range(n):
            put(k, n + k, 1)                  # h_k -> v_k
            put(n + k, k, 1)                  # v_k -> h_k
    else:
        raise ValueError("generator must be one of T, t, S, s, F")
    return Origami(n, new[0], new[1]), mat


def canonical_with_map(o):
    """Canonical conjugation representative and the relabeling to it."""
    n, h, v = o.n, o.h, o.v
    best = None
    best_pos = None
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
            best_pos = pos
    canon = Origami(n, best[0], best[1])
    return canon, tuple(best_pos[k] for k in range(n))


def relabel_chain(n, pi):
    """Chain map of the square relabeling k -> pi[k]."""
    mat = [[0] * (2 * n) for _ in range(2 * n)]
    for k in range(n):
        mat[pi[k]][k] = 1
        mat[n + pi[k]][n + k] = 1
    return mat


def _chain_image(basis, chain_mat, vec):
    """Image chain (dict) of a basis vector under a 2n x 2n chain map."""
    out = {}
    edges = basis.edges
    n = len(edges) // 2
    for j, c in enumerate(vec):
        if not c:
            continue
        for i in range(2 * n):
            if chain_mat[i][j]:
                e = ("h", i) if i < n else ("v", i - n)
                out[e] = out.get(e, 0) + c * chain_mat[i][j]
    return out


def _vec_index(basis):
    # basis.edges for an origami complex are ("h", k) and ("v", k) sorted;
    # map them to chain-map indices
    n = len(basis.edges) // 2
    idx = []
    for e in basis.edges:
        kind, k = e
        idx.append(k if kind == "h" else n + k)
    return idx


def edge_matrix(o_from, o_to, chain_mat, basis_from=None, basis_to=None):
    """Matrix of an edge map on homology bases (columns = images)."""
    basis_from = basis_from or origami_h1_basis(o_from)
    basis_to = basis_to or origami_h1_basis(o_to)
    n = o_from.n
    idx_from = _vec_index(basis_from)
    cols = []
    for vec in basis_from.absolute:
        chain = {}
        for pos, c in enumerate(vec):
            if not c:
                continue
            j = idx_from[pos]
            for i in range(2 * n):
                if chain_mat[i][j]:
                    e = ("h", i) if i < n else ("v", i - n)
                    chain[e] = chain.get(e, 0) + c * chain_mat[i][j]
        cols.append(basis_to.absolute_class(chain).vector)
    return tuple(tuple(cols[j][i] for j in range(len(cols)))
                 for i in range(len(cols)))


def _mat_mul_t(a, b):
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(len(b)))
                       for j in range(len(b[0]))) for i in range(len(a)))


def _identity_t(n):
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


# ---------------------------------------------------------------------------
# Orbit graph


@dataclass
class OrbitGraph:
    base: Origami
    vertices: tuple
    edges: dict          # (i, gen) -> (j, matrix)
    tree_word: tuple     # word from base to each vertex
    loop_generators: tuple  # (word, matrix at base) per non-tree edge
    base_basis: object

    @property
    def size(self):
        return len(self.vertices)

    def t_successor(self, i):
        return self.edges[(i, "T")][0]


def orbit_graph(o, cap=100000):
    """BFS the SL(2,Z)-orbit of canonical forms under T and S.

    Stores one homology matrix per directed edge and one loop word/matrix
    per non-tree edge; the loop words generate the stabilizer of the base
    point as the fundamental group of the graph.
    """
    return _bfs_graph(o, "TS", cap)


def lyap_graph(o, cap=100000):
    """Orbit graph under T and the flip F, for the R-L geodesic coding."""
    return _bfs_graph(o, "TF", cap)


def _bfs_graph(o, gens, cap):
    base, _ = canonical_with_map(o)
    verts = [base]
    vindex = {base.key(): 0}
    bases = {0: origami_h1_basis(base)}
    g2 = len(bases[0].absolute)
    edges = {}
    tree_parent = {0: None}
    tree_word = {0: ""}
    tree_mat = {0: _identity_t(g2)}
    tree_mat_inv = {0: _identity_t(g2)}
    nontree = []
    queue = [0]
    qi = 0
    while qi < len(queue):
        u = queue[qi]
        qi += 1
        for gen in gens:
            raw, chain = sl2z_step(verts[u], gen)
            canon, pi = canonical_with_map(raw)
            full = intlinalg.mat_mul(relabel_chain(raw.n, pi), chain)
            key = canon.key()
            j = vindex.get(key)
            new = j is None
            if new:
                if len(verts) >= cap:
                    raise OrbitTooLargeError("orbit exceeds cap %d" % cap)
                j = len(verts)
                vindex[key] = j
                verts.append(canon)
                bases[j] = origami_h1_basis(canon)
                queue.append(j)
            mat = edge_matrix(verts[u], verts[j], full, bases[u], bases[j])
            edges[(u, gen)] = (j, mat)
            if new:
                tree_parent[j] = (u, gen)
                tree_word[j] = tree_word[u] + gen
                tree_mat[j] = _mat_mul_t(mat, tree_mat[u])
                tree_mat_inv[j] = tuple(
                    tuple(r) for r in intlinalg.invert_unimodular(
                        [list(r) for r in tree_mat[j]])
                )
            else:
                nontree.append((u, gen, j, mat))
    loops = []
    for u, gen, j, mat in nontree:
        word = tree_word[u] + gen + _invert_word(tree_word[j])
        loop = _mat_mul_t(tree_mat_inv[j], _mat_mul_t(mat, tree_mat[u]))
        loops.append((word, loop))
    return OrbitGraph(
        base=base,
        vertices=tuple(verts),
        edges=edges,
        tree_word=tuple(tree_word[i] for i in range(len(verts))),
        loop_generators=tuple(loops),
        base_basis=bases[0],
    )


def _invert_word(word):
    swap = {"T": "t", "t": "T", "S": "s", "s": "S", "F": "F"}
    return "".join(swap[c] for c in reversed(word))


def homology_action(graph, word):
    """Matrix of a closed word (over T, S, t, s) at the base point."""
    cur = 0
    g2 = len(graph.base_basis.absolute)
    total = _identity_t(g2)
    t_pred = {}
    s_pred = {}
    for (i, gen), (j, _) in graph.edges.items():
        if gen == "T":
            t_pred[j] = i
        else:
            s_pred[j] = i
    for c in word:
        if c in "TS":
            j, mat = graph.edges[(cur, c)]
        elif c in "ts":
            pred = (t_pred if c == "t" else s_pred)[cur]
            _, fwd = graph.edges[(pred, "T" if c == "t" else "S")]
            mat = tuple(tuple(r) for r in intlinalg.invert_unimodular(
                [list(r) for r in fwd]))
            j = pred
        else:
            raise ValueError("word letters must be T, S, t, s")
        total = _mat_mul_t(mat, total)
        cur = j
    if cur != 0:
        raise NotClosedError("word does not return to the base point")
    return total


def raw_word_action(o, word):
    """Chain-level action of a word that fixes the labeled pair exactly."""
    cur = o
    n = o.n
    total = intlinalg.identity(2 * n)
    for c in word:
        cur, chain = sl2z_step(cur, c)
        total = intlinalg.mat_mul(chain, total)
    if cur.key() != o.key():
        raise NotClosedError("word does not fix the labeled pair")
    basis = origami_h1_basis(o)
    return edge_matrix(o, o, total, basis, basis)


# ---------------------------------------------------------------------------
# Tautological splitting


def torus_projection(o, basis=None):
    """Matrix of the covering-induced map H1(X) -> H1(torus) = Z^2."""
    basis = basis or origami_h1_basis(o)
    rows = [[0] * len(basis.absolute) for _ in range(2)]
    for j, vec in enumerate(basis.absolute):
        for pos, c in enumerate(vec):
            if not c:
                continue
            kind, _ = basis.edges[pos]
            rows[0 if kind == "h" else 1][j] += c
    return rows


def nontaut_subspace(o, basis=None):
    """Saturated basis of K = ker(H1(X) -> H1(torus)), rank 2g - 2."""
    basis = basis or origami_h1_basis(o)
    proj = torus_projection(o, basis)
    return intlinalg.kernel_basis(proj)


def restrict_matrix(mat, cols):
    """Restriction of an integer matrix to an invariant saturated sublattice.

    cols is a list of basis vectors (length-d each); returns R with
    mat @ cols_matrix = cols_matrix @ R, entries integer.
    """
    if not cols:
        return []
    d = len(cols[0])
    k = len(cols)
    colmat = [[cols[j][i] for j in range(k)] for i in range(d)]
    out = []
    for j in range(k):
        img = [sum(mat[i][t] * cols[j][t] for t in range(d)) for i in range(d)]
        sol = intlinalg.solve_int(colmat, img)
        assert sol is not None, "sublattice is not invariant"
        out.append(sol)
    return [[out[j][i] for j in range(k)] for i in range(k)]


# ---------------------------------------------------------------------------
# Integer polynomial utilities (degrees <= 6)


def charpoly(mat):
    """Monic characteristic polynomial coefficients [1, c1, ..., cn],
    computed by Faddeev-LeVerrier (exact)."""
    n = len(mat)
    a = [[Fraction(x) for x in row] for row in mat]
    m = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    coeffs = [Fraction(1)]
    for k in range(1, n + 1):
        am = [[sum(a[i][t] * m[t][j] for t in range(n)) for j in range(n)]
              for i in range(n)]
        ck = -sum(am[i][i] for i in range(n)) / k
        coeffs.append(ck)
        m = [[am[i][j] + (ck if i == j else 0) for j in range(n)]
             for i in range(n)]
    out = []
    for c in coeffs:
        assert c.denominator == 1
        out.append(int(c))
    return out


def _poly_div(num, den):
    """Exact division of integer polynomials (coeff lists, descending)."""
    num = list(num)
    q = []
    while len(num) >= len(den):
        assert num[0] % den[0] == 0
        f = num[0] // den[0]
        q.append(f)
        for i in range(len(den)):
            num[i] -= f * den[i]
        assert num[0] == 0
        num.pop(0)
    return q, num


def _poly_eval_int(p, x):
    out = 0
    for c in p:
        out = out * x + c
    return out


def factor_monic_int_poly(p):
    """Irreducible monic factors (with multiplicity) of a monic integer
    polynomial of degree <= 6.

    Linear factors come from integer roots; the remaining part is split into
    monic quadratics by exhausting integer factorizations of the constant
    term.  Degrees up to 6 are covered by (linear)* x (quadratic or
    irreducible quartic or sextic) searches, which is all the Forni pipeline
    needs for 2g - 2 <= 6.
    """
    assert p[0] == 1
    factors = []
    rest = list(p)
    # integer roots
    while len(rest) > 1:
        const = rest[-1]
        if const == 0:
            q, rem = _poly_div(rest, [1, 0])
            assert not any(rem)
            factors.append((1, 0))
            rest = q
            continue
        root = None
        for cand in _divisors_signed(const):
            if _poly_eval_int(rest, cand) == 0:
                root = cand
                break
        if root is None:
            break
        q, rem = _poly_div(rest, [1, -root])
        assert not any(rem)
        factors.append((1, -root))
        rest = q
    # quadratic factors
    changed = True
    while changed and len(rest) - 1 >= 4:
        changed = False
        const = rest[-1]
        if const == 0:
            continue
        for q0 in _divisors_signed(const):
            done = False
            for q1 in range(-_abs_bound(rest), _abs_bound(rest) + 1):
                cand = [1, q1, q0]
                quot, rem = _try_poly_div(rest, cand)
                if quot is not None and not any(rem):
                    if _is_irreducible_quadratic(cand):
                        factors.append(tuple(cand))
                    else:
                        factors.extend(_split_quadratic(cand))
                    rest = quot
                    changed = True
                    done = True
                    break
            if done:
                break
    if len(rest) - 1 == 2:
        if _is_irreducible_quadratic(rest):
            factors.append(tuple(rest))
        else:
            factors.extend(_split_quadratic(rest))
    elif len(rest) - 1 > 0:
        factors.append(tuple(rest))  # irreducible of degree 3,4,5,6
    counted = {}
    for f in factors:
        counted[tuple(f)] = counted.get(tuple(f), 0) + 1
    return sorted(counted.items())


def _abs_bound(p):
    return 2 + max(abs(c) for c in p)


def _try_poly_div(num, den):
    num = list(num)
    q = []
    while len(num) >= len(den):
        if num[0] % den[0] != 0:
            return None, None
        f = num[0] // den[0]
        q.append(f)
        for i in range(len(den)):
            num[i] -= f * den[i]
        num.pop(0)
    return q, num


def _divisors_signed(x):
    x = abs(x)
    out = []
    for d in range(1, x + 1):
        if x % d == 0:
            out.extend((d, -d))
    return out


def _is_irreducible_quadratic(p):
    _, b, c = p
    disc = b * b - 4 * c
    if disc < 0:
        return True
    r = math.isqrt(disc)
    return r * r != disc


def _split_quadratic(p):
    _, b, c = p
    disc = b * b - 4 * c
    r = math.isqrt(disc)
    assert r * r == disc and (-b + r) % 2 == 0
    x1 = (-b + r) // 2
    x2 = (-b - r) // 2
    return [(1, -x1), (1, -x2)]


CYCLOTOMICS = {
    (1, -1): 1,
    (1, 1): 2,
    (1, 1, 1): 3,
    (1, 0, 1): 4,
    (1, -1, 1): 6,
    (1, 1, 1, 1, 1): 5,
    (1, 0, 0, 0, 1): 8,
    (1, -1, 1, -1, 1): 10,
    (1, 0, -1, 0, 1): 12,
    (1, 1, 1, 1, 1, 1, 1): 7,
    (1, 0, 0, 1, 0, 0, 1): 9,
    (1, -1, 1, -1, 1, -1, 1): 14,
    (1, 0, 0, -1, 0, 0, 1): 18,
    (1, 0, -1, 0, 1, 0, -1, 0, 1): -1,  # deg 8, out of range; kept for safety
}


def is_cyclotomic(f):
    return tuple(f) in CYCLOTOMICS


def poly_eval_matrix(p, mat):
    n = len(mat)
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        out[i][i] = p[0]
    for c in p[1:]:
        out = intlinalg.mat_mul(out, mat)
        for i in range(n):
            out[i][i] += c
    return out


def bounded_kernel(mat):
    """Saturated basis of the largest sublattice on which powers of mat stay
    bounded: the kernel of the squarefree product of the cyclotomic factors
    of the characteristic polynomial."""
    p = charpoly(mat)
    prod = [1]
    for f, _ in factor_monic_int_poly(p):
        if is_cyclotomic(f):
            prod = _poly_mul(prod, list(f))
    if prod == [1]:
        return []
    ev = poly_eval_matrix(prod, mat)
    return intlinalg.kernel_basis(ev)


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


# ---------------------------------------------------------------------------
# Forni subspace reports


@dataclass
class ForniReport:
    dim_lower: int
    dim_upper: int
    certificate: dict
    k_rank: int
    orbit_size: int

    @property
    def dim(self):
        assert self.dim_lower == self.dim_upper
        return self.dim_lower

    def resolved(self):
        return self.dim_lower == self.dim_upper

    def to_json(self):
        return {
            "dim_lower": self.dim_lower,
            "dim_upper": self.dim_upper,
            "k_rank": self.k_rank,
            "orbit_size": self.orbit_size,
            "certificate": self.certificate,
        }


DEFAULT_CAPS = {
    "orbit_cap": 100000,
    "closure_cap": 1000000,
    "entry_cap": 10 ** 12,
    "sample_cap": 24,
    "power_cap": 24,
}


def _sample_elements(loops, sample_cap):
    """Deterministic list of (word, matrix) group elements to probe."""
    samples = list(loops)
    k = len(loops)
    for i in range(k):
        for j in range(k):
            if len(samples) >= sample_cap:
                return samples
            if i != j:
                w = loops[i][0] + loops[j][0]
                m = _mat_mul_t(loops[i][1], loops[j][1])
                samples.append((w, m))
    return samples


def _closure(gen_mats, closure_cap, entry_cap):
    """Close integer matrices under multiplication.

    Returns ("finite", elements) or ("entry_cap", witness) or
    ("element_cap", None).
    """
    k = len(gen_mats[0]) if gen_mats else 0
    ident = _identity_t(k)
    gens = []
    for m in gen_mats:
        gens.append(tuple(tuple(r) for r in m))
        gens.append(tuple(tuple(r) for r in intlinalg.invert_unimodular(
            [list(r) for r in m])))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                prod = _mat_mul_t(g, a)
                if any(abs(x) > entry_cap for row in prod for x in row):
                    return "entry_cap", prod
                if prod not in seen:
                    if len(seen) >= closure_cap:
                        return "element_cap", None
                    seen.add(prod)
                    nxt.append(prod)
        frontier = nxt
    return "finite", seen


def _elements_hash(elements):
    blob = repr(sorted(elements)).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def forni_subspace(o, caps=None, graph=None):
    """Certified Forni-subspace dimensions for an origami.

    Works on the non-tautological subspace K.  Shrinks K to the intersection
    of the per-element bounded sublattices over sampled monodromy elements,
    forces invariance, and then attempts to certify finiteness of the
    restricted group by closure.  Inconclusive outcomes are reported, never
    coerced.
    """
    caps = dict(DEFAULT_CAPS, **(caps or {}))
    graph = graph or orbit_graph(o, caps["orbit_cap"])
    basis = graph.base_basis
    kcols = nontaut_subspace(graph.base, basis)
    k_rank = len(kcols)
    if k_rank == 0:
        return ForniReport(0, 0, {"type": "finite_group", "order": 1,
                                  "elements_hash": _elements_hash([()]),
                                  "generators": [], "words": []},
                           0, graph.size)
    loops = [(w, m) for w, m in graph.loop_generators]
    restricted = [(w, tuple(tuple(r) for r in restrict_matrix(
        [list(r) for r in m], kcols))) for w, m in loops]
    samples = _sample_elements(restricted, caps["sample_cap"])

    # intersect bounded parts
    space = [list(row) for row in intlinalg.identity(k_rank)]
    excluded = []
    for w, m in samples:
        if not space:
            break
        bk = bounded_kernel([list(r) for r in m])
        if len(bk) < k_rank:
            excluded.append(w)
        space = intlinalg.subspace_intersection(space, bk) if bk else []
    # force invariance under the generators
    changed = True
    while changed and space:
        changed = False
        for w, m in restricted:
            img = [intlinalg.mat_vec([list(r) for r in m], vec) for vec in space]
            inter = intlinalg.subspace_intersection(space, img)
            if len(inter) < len(space):
                space = inter
                changed = True
            if not space:
                break

    b_rank = len(space)
    if b_rank == 0:
        witness_word = excluded[0] if excluded else ""
        wmat = dict(samples).get(witness_word)
        trace = _norm_trace([list(r) for r in wmat], caps["power_cap"]) if wmat else []
        return ForniReport(
            0, 0,
            {"type": "unbounded_growth", "witness": witness_word,
             "norm_trace": trace},
            k_rank, graph.size,
        )

    # restrict the generators to the bounded candidate and close
    sub = [(w, restrict_matrix([list(r) for r in m], space))
           for w, m in restricted]
    status, payload = _closure([m for _, m in sub],
                               caps["closure_cap"], caps["entry_cap"])
    if status == "finite":
        cert = {
            "type": "finite_group" if b_rank == k_rank else "split",
            "order": len(payload),
            "elements_hash": _elements_hash(payload),
            "generators": [[list(r) for r in m] for _, m in sub],
            "words": [w for w, _ in sub],
        }
        if b_rank != k_rank:
            cert["subspace"] = [list(v) for v in space]
            cert["excluded_witnesses"] = excluded
        return ForniReport(b_rank, b_rank, cert, k_rank, graph.size)
    if status == "entry_cap":
        # entries blew past the cap: evidence of unbounded growth inside the
        # candidate; sound as an exclusion only, so report upper = lower = 0
        # is NOT justified -- return inconclusive bounds instead
        return ForniReport(
            0, b_rank,
            {"type": "unbounded_growth", "witness": "",
             "norm_trace": [], "note": "entry cap exceeded inside candidate"},
            k_rank, graph.size,
        )
    return ForniReport(
        0, b_rank,
        {"type": "inconclusive", "caps": caps},
        k_rank, graph.size,
    )


def _norm_trace(mat, power_cap):
    out = []
    cur = [row[:] for row in mat]
    for _ in range(min(power_cap, 12)):
        out.append(max(abs(x) for row in cur for x in row))
        cur = intlinalg.mat_mul(cur, mat)
    return out


def replay_certificate(report):
    """Re-close the certified generators; True iff the order reproduces."""
    cert = report.certificate
    if cert["type"] not in ("finite_group", "split"):
        return False
    gens = [tuple(tuple(r) for r in m) for m in cert["generators"]]
    if not gens:
        return cert["order"] == 1
    status, payload = _closure(gens, 2 * cert["order"] + 10, 10 ** 15)
    return status == "finite" and len(payload) == cert["order"] \
        and _elements_hash(payload) == cert["elements_hash"]


# ---------------------------------------------------------------------------
# Lyapunov estimation


@dataclass
class LyapEstimate:
    exponents: tuple       # top g exponents, normalized so lambda_1 = 1
    errors: tuple
    steps: int
    seed: int
    normalization: str

    def to_json(self):
        return {
            "exponents": list(self.exponents),
            "errors": list(self.errors),
            "steps": self.steps,
            "seed": self.seed,
            "normalization": self.normalization,
        }


class _TCycles:
    """Prefix products along T-cycles for O(1) application of T^a."""

    def __init__(self, graph):
        self.graph = graph
        g2 = len(graph.base_basis.absolute)
        self.g2 = g2
        succ = {i: graph.edges[(i, "T")][0] for i in range(graph.size)}
        mats = {i: np.array(graph.edges[(i, "T")][1], dtype=float)
                for i in range(graph.size)}
        imats = {i: np.array(graph.edges[(i, "T")][1], dtype=object)
                 for i in range(graph.size)}
        self.cycle_of = {}
        self.cycles = []
        seen = set()
        for start in range(graph.size):
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            cur = succ[start]
            while cur != start:
                cyc.append(cur)
                seen.add(cur)
                cur = succ[cur]
            cid = len(self.cycles)
            for pos, vtx in enumerate(cyc):
                self.cycle_of[vtx] = (cid, pos)
            # integer prefix products around the cycle
            pref = [intlinalg.identity(g2)]
            for vtx in cyc:
                step = [list(r) for r in self.graph.edges[(vtx, "T")][1]]
                pref.append(intlinalg.mat_mul(step, pref[-1]))
            loop = pref[-1]
            # quasi-unipotent decomposition of the loop
            e, lpows, nil = self._unipotent_split(loop)
            prefinv = [intlinalg.invert_unimodular(p) for p in pref[:-1]]
            self.cycles.append({
                "verts": cyc,
                "pref": [np.array(p, dtype=float) for p in pref],
                "prefinv": [np.array(p, dtype=float) for p in prefinv],
                "e": e,
                "lpows": [np.array(p, dtype=float) for p in lpows],
                "nil": None if nil is None else np.array(nil, dtype=float),
                "loop": np.array(loop, dtype=float),
            })

    def _unipotent_split(self, loop):
        g2 = self.g2
        cur = intlinalg.identity(g2)
        pows = [cur]
        for e in range(1, 49):
            cur = intlinalg.mat_mul(cur, loop)
            pows.append(cur)
            nil = [[cur[i][j] - int(i == j) for j in range(g2)]
                   for i in range(g2)]
            sq = intlinalg.mat_mul(nil, nil)
            if all(x == 0 for row in sq for x in row):
                return e, pows[:e], nil
        return None, pows, None

    def power_matrix(self, vertex, a):
        """Float matrix of T^a applied from `vertex`; also the end vertex."""
        cid, pos = self.cycle_of[vertex]
        data = self.cycles[cid]
        p = len(data["verts"])
        j = (pos + a) % p
        q = (pos + a - j) // p
        end = data["verts"][j]
        if q == 0:
            mat = data["pref"][j] @ data["prefinv"][pos]
            return mat, end
        e = data["e"]
        if e is not None:
            q2, r2 = divmod(q, e)
            lq = data["lpows"][r2] if r2 else np.eye(self.g2)
            if q2:
                lq = (np.eye(self.g2) + q2 * data["nil"]) @ lq
        else:
            lq = np.linalg.matrix_power(data["loop"], q)
        return data["pref"][j] @ lq @ data["prefinv"][pos], end


def lyapunov_estimate(o, steps=10 ** 6, seed=0, graph=None, ons=20,
                      batches=20, a_cap=10 ** 9):
    """Monte-Carlo Lyapunov exponents of the KZ-cocycle over an origami.

    Drives the classical R-L geodesic coding on the flip-extended orbit
    graph: each continued-fraction digit a contributes the word T^a followed
    by the flip F, so the standard 2x2 track multiplies the hyperbolic
    matrices [[0,1],[1,a]].  Homology matrices accumulate against an
    orthonormal frame with periodic QR renormalization; exponents are
    self-normalized by the tautological top exponent of the same word.
    """
    if steps < 10 ** 4:
        raise ValueError("steps must be at least 10^4")
    graph = graph if graph is not None and (0, "F") in graph.edges \
        else lyap_graph(o)
    rng = random.Random(seed)
    tc = _TCycles(graph)
    g2 = tc.g2
    g = g2 // 2
    fmats = {i: np.array(graph.edges[(i, "F")][1], dtype=float)
             for i in range(graph.size)}
    fsucc = {i: graph.edges[(i, "F")][0] for i in range(graph.size)}
    f_std = np.array([[0.0, 1.0], [1.0, 0.0]])

    frame = np.eye(g2)
    taut = np.eye(2)
    logs = np.zeros(g2)
    logs2 = 0.0
    batch_data = []
    batch_logs = np.zeros(g2)
    batch_logs2 = 0.0
    per_batch = max(1, steps // batches)
    cur = 0
    # exact continued-fraction digits of random rationals with ~2^63
    # denominators: the digits follow one Gauss orbit per draw, and a fresh
    # direction is drawn whenever the expansion terminates
    num = den = 0
    for step in range(steps):
        if num == 0:
            den = rng.getrandbits(62) + (1 << 62)
            num = rng.randrange(1, den)
        a, rem = divmod(den, num)
        num, den = rem, num
        a = min(a, a_cap)
        mat, cur = tc.power_matrix(cur, a)
        frame = mat @ frame
        taut = np.array([[1.0, float(a)], [0.0, 1.0]]) @ taut
        frame = fmats[cur] @ frame
        taut = f_std @ taut
        cur = fsucc[cur]
        if (step + 1) % ons == 0 or np.abs(frame).max() > 1e9:
            frame, r = np.linalg.qr(frame)
            d = np.abs(np.diag(r))
            d[d == 0] = 1e-300
            inc = np.log(d)
            logs += inc
            batch_logs += inc
            taut, r2 = np.linalg.qr(taut)
            inc2 = np.log(max(np.abs(r2[0, 0]), 1e-300))
            logs2 += inc2
            batch_logs2 += inc2
        if (step + 1) % per_batch == 0:
            batch_data.append((batch_logs.copy(), batch_logs2))
            batch_logs = np.zeros(g2)
            batch_logs2 = 0.0
    frame, r = np.linalg.qr(frame)
    d = np.abs(np.diag(r))
    d[d == 0] = 1e-300
    logs += np.log(d)
    taut, r2 = np.linalg.qr(taut)
    logs2 += np.log(max(np.abs(r2[0, 0]), 1e-300))

    total = np.sort(logs)[::-1]
    lam = total / logs2
    per_batch_lams = []
    for blogs, blogs2 in batch_data:
        if blogs2 != 0:
            per_batch_lams.append(np.sort(blogs)[::-1] / blogs2)
    per_batch_lams = np.array(per_batch_lams)
    if len(per_batch_lams) >= 2:
        err = per_batch_lams.std(axis=0, ddof=1) / np.sqrt(len(per_batch_lams))
    else:
        err = np.full(g2, float("nan"))
    return LyapEstimate(
        exponents=tuple(float(x) for x in lam[:g]),
        errors=tuple(float(x) for x in err[:g]),
        steps=steps,
        seed=seed,
        normalization="tautological",
    )


# ---------------------------------------------------------------------------
# Multi-transvection cross-check


def transvection_data(o):
    """(N, matrix of T^N, predicted multi-transvection matrix) for an origami.

    N is the least power with sigma_h^N = id, so T^N fixes the labeled pair;
    the prediction is x -> x + sum_i k_i <x, gamma_i> gamma_i with
    k_i = N h_i / w_i over the horizontal cylinders.
    """
    from .flat_core import origami_cylinder_structure

    basis = origami_h1_basis(o)
    struct = origami_cylinder_structure(o)
    widths = struct.surface.widths
    heights = struct.surface.heights
    n_max = 1
    for w in widths:
        n_max = n_max * int(w) // math.gcd(n_max, int(w))
    word = "T" * n_max
    actual = raw_word_action(o, word)
    gammas = []
    for rows in struct.cyl_rows:
        chain = {}
        for k in rows[0]:
            chain[("h", k)] = chain.get(("h", k), 0) + 1
        gammas.append(basis.absolute_class(chain))
    g2 = len(basis.absolute)
    pred = [[int(i == j) for j in range(g2)] for i in range(g2)]
    for i_cyl, gamma in enumerate(gammas):
        k_i = n_max * heights[i_cyl] / widths[i_cyl]
        assert k_i.denominator == 1
        k_i = int(k_i)
        for j in range(g2):
            unit = [0] * g2
            unit[j] = 1
            from .homology import HomClass

            ej = HomClass(basis, "absolute", tuple(unit))
            pairing = basis.pair(ej, gamma)
            for i in range(g2):
                pred[i][j] += k_i * pairing * gamma.vector[i]
    return n_max, actual, tuple(tuple(r) for r in pred)
