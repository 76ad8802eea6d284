"""Subgroup oracles, quasiconvexity measurement and the subgroup pipelines."""
from __future__ import annotations

from collections import deque
from typing import Callable, Sequence

from .errors import ContractError, ResourceError
from .fsa import fmt_word
from .groups import EXCEEDS, DirectProduct, FreeGroup, GroupModel, ball_cap
from .reports import CONSTANT, FAILURE, CheckReport, from_trace
from .structures import AutomaticStructure, ft_constant


class SubgroupOracle:
    """A subgroup H of ``ambient`` given by a membership test.

    ``metric_group`` (same elements as ``ambient``) is the marking used for
    distance-to-H; it defaults to ``ambient`` itself. ``elements_fn(r)``
    optionally lists the elements of H with source radius r.
    """

    def __init__(self, ambient: GroupModel, contains: Callable, generators: Sequence = (),
                 elements_fn: Callable | None = None, metric_group: GroupModel | None = None,
                 name: str = "H", distance_fn: Callable | None = None):
        self.ambient = ambient
        self._contains = contains
        self.generators = list(generators)
        self.elements_fn = elements_fn
        self.metric_group = metric_group or ambient
        if not self.metric_group.same_elements(ambient):
            raise ContractError("metric group must share the ambient group's elements")
        self.name = name
        self._distance_fn = distance_fn
        self._memb = {}
        self._dist = {}
        if not self.contains(ambient.identity):
            raise ContractError(f"{name} does not contain the identity")

    def contains(self, x) -> bool:
        r = self._memb.get(x)
        if r is None:
            r = self._memb[x] = bool(self._contains(x))
        return r

    __contains__ = contains

    def elements(self, radius: int) -> list:
        if self.elements_fn is not None:
            return list(self.elements_fn(radius))
        return [x for x in self.metric_group.ball(radius) if self.contains(x)]

    def distance(self, x, cap: int):
        """d(x, H) in the metric group, or EXCEEDS beyond cap."""
        hit = self._dist.get(x)
        if hit is not None:
            d, searched = hit
            if d is not EXCEEDS:
                return d if d <= cap else EXCEEDS
            if searched >= cap:
                return EXCEEDS
        if self._distance_fn is not None:
            d = self._distance_fn(x, cap)
        else:
            d = _bfs_distance(self.metric_group, x, self.contains, cap)
        self._dist[x] = (d, cap)
        return d

    def __repr__(self):
        return f"<SubgroupOracle {self.name} of {self.ambient.describe()}>"


def _steps(g: GroupModel) -> list:
    out = []
    seen = set()
    for s in g.alphabet:
        for y in (g.gens[s], g.invert(g.gens[s])):
            if y not in seen and y != g.identity:
                seen.add(y)
                out.append(y)
    return out


def _bfs_distance(g: GroupModel, x, member, cap: int):
    if member(x):
        return 0
    steps = _steps(g)
    seen = {x}
    layer = [x]
    limit = ball_cap()
    for r in range(1, cap + 1):
        nxt = []
        for y in layer:
            for s in steps:
                z = g.multiply(y, s)
                if z in seen:
                    continue
                if member(z):
                    return r
                seen.add(z)
                nxt.append(z)
        if len(seen) > limit:
            raise ResourceError("distance-to-subgroup search exceeded the ball cap")
        layer = nxt
    return EXCEEDS


def diagonal_distance(product: DirectProduct, member) -> Callable:
    """d((x1, x2), S) for S inside the diagonal, in the max metric of a product.

    Uses the identity d((x1,x2),(h,h)) = max(d(x1,h), d(x2,h)): grow balls
    around x1 and x2 in the factor and test elements in both.
    """
    g = product.left
    if not product.left.same_elements(product.right):
        raise ContractError("diagonal distance needs equal factors")
    steps = _steps(g)

    def dist(x, cap):
        x1, x2 = x
        if x1 == x2 and member((x1, x1)):
            return 0
        balls = [{x1: 0}, {x2: 0}]
        layers = [[x1], [x2]]
        for r in range(1, cap + 1):
            for k in (0, 1):
                ball, nxt = balls[k], []
                for y in layers[k]:
                    for s in steps:
                        z = g.multiply(y, s)
                        if z not in ball:
                            ball[z] = r
                            nxt.append(z)
                layers[k] = nxt
            # an h at max-distance exactly r lies on the new sphere of one ball
            b1, b2 = balls
            for h in layers[0] + layers[1]:
                if h in b1 and h in b2 and member((h, h)):
                    return r
            if len(b1) + len(b2) > ball_cap():
                raise ResourceError("diagonal distance search exceeded the ball cap")
        return EXCEEDS

    return dist


# ------------------------------------------------------------ constructors

class StallingsGraph:
    """Folded core graph of a finitely generated subgroup of a free group."""

    def __init__(self, group: FreeGroup, gens: Sequence):
        self.group = group
        edges = {}   # (v, letter int) -> w, letter ±i
        n = 1
        for w in gens:
            w = tuple(w)
            if not w:
                continue
            v = 0
            for k, x in enumerate(w):
                if k == len(w) - 1:
                    t = 0
                else:
                    t = n
                    n += 1
                edges.setdefault((v, x), set()).add(t)
                edges.setdefault((t, -x), set()).add(v)
                v = t
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        changed = True
        while changed:
            changed = False
            merged = {}
            for (v, x), ts in list(edges.items()):
                key = (find(v), x)
                merged.setdefault(key, set()).update(find(t) for t in ts)
            edges = merged
            for key, ts in edges.items():
                if len(ts) > 1:
                    ts = sorted(ts)
                    for t in ts[1:]:
                        parent[find(t)] = find(ts[0])
                    changed = True
        self.delta = {k: next(iter(v)) for k, v in edges.items()}
        self.root = find(0)

    def accepts(self, g) -> bool:
        v = self.root
        for x in g:
            v = self.delta.get((v, x))
            if v is None:
                return False
        return v == self.root


def free_subgroup(group: FreeGroup, gens: Sequence, name="H", **kw) -> SubgroupOracle:
    words = [group.element(group.parse(w)) if isinstance(w, str) else w for w in gens]
    graph = StallingsGraph(group, words)
    return SubgroupOracle(group, graph.accepts, words, name=name, **kw)


def whole_group(group: GroupModel, name="G") -> SubgroupOracle:
    return SubgroupOracle(group, lambda x: True, list(group.gens.values()), name=name)


def trivial_subgroup(group: GroupModel, name="1") -> SubgroupOracle:
    return SubgroupOracle(group, lambda x: x == group.identity, [], lambda r: [group.identity],
                          name=name)


def diagonal_subgroup(product: DirectProduct, name="Δ") -> SubgroupOracle:
    if not product.left.same_elements(product.right):
        raise ContractError("diagonal needs equal factors")
    left = product.left

    def elements(r):
        return [(x, x) for x in left.ball(r)]

    dist = diagonal_distance(product, lambda x: x[0] == x[1]) if _max_metric(product) else None
    return SubgroupOracle(product, lambda x: x[0] == x[1], [], elements, name=name,
                          distance_fn=dist)


def _max_metric(product) -> bool:
    return (isinstance(product, DirectProduct) and product.marking == "convolution"
            and product.native and product.left.alphabet.involutive
            and product.right.alphabet.involutive)


def image_membership(phi, slack: int = 2) -> Callable:
    """Membership in Im φ: exact for free groups, else by bounded preimage search.

    The preimage search covers the source ball of radius |y| + slack, where
    |y| is the target norm of the queried element.
    """
    src, tgt = phi.source, phi.target
    if isinstance(tgt, FreeGroup) and tgt.native and isinstance(src, FreeGroup):
        gens = [phi.images[x] for x in src.names]
        graph = StallingsGraph(tgt, gens)
        return graph.accepts
    table = {}
    state = {"radius": -1}

    def grow(r):
        if r <= state["radius"]:
            return
        for x in src.ball(r):
            table.setdefault(phi.apply(x), x)
        state["radius"] = r

    def member(y):
        n = tgt.norm(y)
        grow(n + slack)
        return y in table

    return member


def image_subgroup(phi, name="Im", metric_group=None, slack: int = 2) -> SubgroupOracle:
    src = phi.source

    def elements(r):
        out = []
        seen = set()
        for x in src.ball(r):
            y = phi.apply(x)
            if y not in seen:
                seen.add(y)
                out.append(y)
        return out

    return SubgroupOracle(phi.target, image_membership(phi, slack), list(phi.images.values()),
                          elements, metric_group=metric_group, name=name)


def graph_subgroup(phi, product: DirectProduct, name="graph") -> SubgroupOracle:
    """{(x, xφ)} inside source × target."""
    src = phi.source
    return SubgroupOracle(product, lambda x: phi.apply(x[0]) == x[1], [],
                          lambda r: [(x, phi.apply(x)) for x in src.ball(r)], name=name)


def left_factor(product: DirectProduct, name="G×1") -> SubgroupOracle:
    one = product.right.identity
    return SubgroupOracle(product, lambda x: x[1] == one, [],
                          lambda r: [(x, one) for x in product.left.ball(r)], name=name)


def kernel_elements(phi, radius: int) -> list:
    one = phi.target.identity
    return [x for x in phi.source.ball(radius) if phi.apply(x) == one]


def equalizer_elements(phi, psi, radius: int) -> list:
    return [x for x in phi.source.ball(radius) if phi.apply(x) == psi.apply(x)]


# ------------------------------------------------------ quasiconvexity

def quasiconvexity(s: AutomaticStructure, h: SubgroupOracle, max_len: int,
                   by: str = "length", cap: int | None = None) -> CheckReport:
    """Largest d(w^[n]π, H) over words w of L with wπ ∈ H.

    By left-invariance the basepoint h is taken to be 1. ``by="length"``
    ranges over L ∩ A^{≤max_len}; ``by="radius"`` takes, for each element of
    H listed by the oracle at source radius r ≤ max_len, its minimal-length
    representatives in L, and traces the constant against r.
    """
    g = s.group
    if not h.ambient.same_elements(g):
        raise ContractError("subgroup and structure live in different groups")
    cap = cap if cap is not None else 2 * max_len + 2
    per = {}
    arg = {}

    def measure(w, b):
        pts = g.evaluate_prefixes(w)
        worst, at = 0, 0
        for n, x in enumerate(pts):
            d = h.distance(x, cap)
            if d is EXCEEDS:
                raise ResourceError(f"distance to {h.name} exceeds the search cap {cap}")
            if d > worst:
                worst, at = d, n
        if worst > per.get(b, -1):
            per[b] = worst
            arg[b] = (w, at, worst, pts[at])

    if by == "length":
        cat = s.catalog(max_len)
        for i, w in enumerate(cat.words):
            if h.contains(cat.end(i)):
                measure(w, len(w))
    elif by == "radius":
        done = set()
        for r in range(max_len + 1):
            for x in h.elements(r):
                if x in done:
                    continue
                done.add(x)
                bar = s.rep(x, 6 * max_len + 6)
                if bar is None:
                    raise ContractError(f"{g.format(x)} has no representative in {s.name}")
                ws = [bar] if s.uniqueness else [w for w in s.words_for(x, len(bar)) if len(w) == len(bar)]
                for w in ws:
                    measure(w, r)
    else:
        raise ContractError(f"unknown quasiconvexity mode {by!r}")

    def witness():
        if not arg:
            return None, {}
        b = max(arg, key=lambda k: (per[k], -k))
        w, n, d, x = arg[b]
        return ({"h": g.format(g.identity), "w": fmt_word(w), "n": n, "prefix": g.format(x),
                 "distance": d},
                {"w": w, "n": n, "distance": d, "prefix": x})

    rep = from_trace("quasiconvexity", per, max_len, witness, start=0,
                     notes=[f"basepoint h = 1 (left-invariance); traced by {by}"])
    rep.extra["subgroup"] = h.name
    return rep


# --------------------------------------------------------------- pipelines

def _ball_json(group, elems):
    return [group.format(x) for x in elems]


def kernel_pipeline(phi, s1: AutomaticStructure, max_len: int) -> dict:
    """Ker(φ) ≅ (G×{1}) ∩ {(x, xφ)} inside the product structure L₁ ⋄ L₁^(φ)."""
    from .constructions import induced_structure, product_structure
    induced, ind_rep = induced_structure(s1, phi, max_len)
    if not ind_rep.ok:
        return {"subgroup": "kernel", "ball": [], "induced": ind_rep, "ok": False,
                "quasiconvexity": ind_rep}
    P = product_structure(s1, induced)
    H = graph_subgroup(phi, P.group)
    G1 = left_factor(P.group)
    radius = max(1, max_len // 2)
    q_graph = quasiconvexity(P, H, radius, by="radius")
    q_left = quasiconvexity(P, G1, radius, by="radius")
    ker = kernel_elements(phi, max_len)
    return {"subgroup": "kernel", "ball": ker, "ball_text": _ball_json(phi.source, ker),
            "induced": ind_rep, "quasiconvexity": q_graph, "graph": q_graph, "left_factor": q_left,
            "ok": q_graph.ok and q_left.ok}


def equalizer_pipeline(phi, psi, s2: AutomaticStructure, max_len: int,
                       radius: int | None = None) -> dict:
    """Eq(φ,ψ) through Δ ∩ Im θ in the product structure L₂ ⋄ L₂."""
    from .constructions import product_structure
    from .endo import diagonal_hom
    theta = diagonal_hom(phi, psi)
    P = product_structure(s2, s2)
    src = phi.source
    exact = phi.is_identity()

    def member(y):
        a, b = y
        if a != b:
            return False
        if exact:
            return psi.apply(a) == a
        n = phi.target.norm(a)
        return any(phi.apply(x) == a and psi.apply(x) == a for x in src.ball(n + 2))

    def elements(r):
        return [(phi.apply(x), phi.apply(x)) for x in equalizer_elements(phi, psi, r)]

    dist = diagonal_distance(P.group, member) if _max_metric(P.group) else None
    H = SubgroupOracle(P.group, member, [], elements, name="Δ∩Im θ", distance_fn=dist)
    radius = max_len if radius is None else radius
    q = quasiconvexity(P, H, radius, by="radius")
    ball = equalizer_elements(phi, psi, max_len)
    return {"subgroup": "equalizer", "ball": ball, "ball_text": _ball_json(src, ball),
            "quasiconvexity": q, "theta": theta, "oracle": H, "ok": q.ok}


def fixed_pipeline(phi, s: AutomaticStructure, max_len: int, radius: int | None = None) -> dict:
    from .endo import identity_hom
    if not phi.source.same_elements(phi.target):
        raise ContractError("fixed subgroups need an endomorphism")
    out = equalizer_pipeline(identity_hom(phi.source), phi, s, max_len, radius)
    out["subgroup"] = "fixed"
    out["notes"] = ["structures on both sides coincide, so they are synchronously equivalent"]
    return out


def centralizer(s: AutomaticStructure, elements: Sequence, max_len: int,
                radius: int | None = None) -> dict:
    """Centralizer of a finite set as the intersection of Fix(λ_u)."""
    from .endo import inner
    g = s.group
    pre = ft_constant(s, max(2, min(max_len, 6)), "biautomatic")
    reports = []
    ball = None
    for u in elements:
        res = fixed_pipeline(inner(g, u), s, max_len, radius)
        reports.append(res["quasiconvexity"])
        ball = res["ball"] if ball is None else [x for x in ball if x in set(res["ball"])]
    if ball is None:
        ball = g.ball(max_len)
    ok = pre.ok and all(r.ok for r in reports)
    return {"subgroup": "centralizer", "ball": ball, "ball_text": _ball_json(g, ball),
            "biautomatic": pre, "quasiconvexity": reports[0] if len(reports) == 1 else reports,
            "ok": ok}
