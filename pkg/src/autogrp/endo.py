"""Homomorphisms between group models and bounded BRP checks."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import ContractError
from .fsa import fmt_word
from .groups import (EXCEEDS, DirectProduct, FreeGroup, GroupModel, VirtuallyFreeGroup,
                     gromov_product, group_from_json)
from .reports import CONSTANT, FAILURE, CheckReport, cumulative, from_trace
from .structures import AutomaticStructure, hausdorff_ids, length_diff_constant


def some_word(g: GroupModel, x) -> tuple:
    """A word over g's marked alphabet evaluating to x (fast for native models)."""
    if g.native:
        if isinstance(g, FreeGroup):
            return g.element_word(x)
        if isinstance(g, DirectProduct):
            u, v = some_word(g.left, x[0]), some_word(g.right, x[1])
            if g.marking == "disjoint":
                return u + tuple(g.right_names[y] for y in v)
            from .fsa import convolve_words
            return convolve_words(u, v)
        if isinstance(g, VirtuallyFreeGroup):
            f, i = x
            return g.free.element_word(f) + ((g.beta[i - 1],) if i else ())
    return g.shortlex_word(x)


class GroupHomomorphism:
    """A homomorphism given by the images of the source's marked generators."""

    def __init__(self, source: GroupModel, target: GroupModel, images: dict,
                 name: str = "phi", verify_radius: int = 2):
        self.source = source
        self.target = target
        self.name = name
        imgs = {}
        for s, v in images.items():
            if s not in source.alphabet:
                raise ContractError(f"{s!r} is not a generator of the source")
            imgs[s] = v
        for s, t in source.alphabet.inverses.items():
            if s in imgs and t not in imgs:
                imgs[t] = target.invert(imgs[s])
        missing = [s for s in source.alphabet if s not in imgs]
        if missing:
            raise ContractError(f"no image given for generators {missing}")
        for s, t in source.alphabet.inverses.items():
            if target.multiply(imgs[s], imgs[t]) != target.identity:
                raise ContractError(f"images of {s!r} and its inverse {t!r} do not cancel")
        self.images = imgs
        self._cache = {}
        if verify_radius:
            self.verify(verify_radius)

    @classmethod
    def from_words(cls, source, target, words: dict, name="phi", **kw):
        images = {s: target.evaluate(target.parse(w) if isinstance(w, str) else w)
                  for s, w in words.items()}
        return cls(source, target, images, name, **kw)

    def verify(self, radius: int):
        """Check that the images define a homomorphism on the radius-ball."""
        if isinstance(self.source, FreeGroup) and self.source.native:
            return
        src = self.source
        for g in src.ball(radius):
            img = self.apply(g)
            for s in src.alphabet:
                h = src.multiply(g, src.gens[s])
                if self.apply(h) != self.target.multiply(img, self.images[s]):
                    raise ContractError(
                        f"generator images do not define a homomorphism "
                        f"(fails at {src.format(g)}·{s})")

    def apply_word(self, word: Sequence):
        out = self.target.identity
        for s in word:
            if s not in self.images:
                raise ContractError(f"symbol {s!r} is not a source generator")
            out = self.target.multiply(out, self.images[s])
        return out

    def apply(self, x):
        """Image of a word (tuple/str over source symbols) or of an element."""
        if isinstance(x, str):
            return self.apply_word(self.source.parse(x))
        y = self._cache.get(x)
        if y is None:
            y = self._cache[x] = self.apply_word(some_word(self.source, x))
        return y

    def on_marking(self, group: GroupModel) -> dict:
        """Images of another marking's generators of the same source group."""
        if not group.same_elements(self.source):
            raise ContractError("marking belongs to a different group")
        return {s: self.apply(group.gens[s]) for s in group.alphabet}

    def V(self, metric: GroupModel | None = None) -> int:
        """V_φ = max d(1, aφ) over generators a."""
        m = metric or self.target
        return max((m.norm(v) for v in self.images.values()), default=0)

    def is_identity(self) -> bool:
        return (self.source.same_elements(self.target)
                and all(self.source.gens[s] == v for s, v in self.images.items()))

    def format(self) -> str:
        return ", ".join(f"{s}↦{self.target.format(v)}" for s, v in self.images.items())

    def __repr__(self):
        return f"<GroupHomomorphism {self.name}: {self.format()}>"


def identity_hom(g: GroupModel, name="id") -> GroupHomomorphism:
    return GroupHomomorphism(g, g, dict(g.gens), name, verify_radius=0)


def inner(g: GroupModel, u, name=None) -> GroupHomomorphism:
    """λ_u: x ↦ u x u⁻¹; u is an element, a word string, or a tuple of symbols."""
    if isinstance(u, str):
        u = g.evaluate(g.parse(u))
    elif isinstance(u, tuple) and u and all(isinstance(x, str) for x in u):
        u = g.evaluate(u)
    images = {s: g.conjugate(u, x) for s, x in g.gens.items()}
    return GroupHomomorphism(g, g, images, name or f"inner({g.format(u)})", verify_radius=0)


def compose(phi1: GroupHomomorphism, phi2: GroupHomomorphism, name=None) -> GroupHomomorphism:
    """Apply phi1 first, then phi2."""
    if not phi1.target.same_elements(phi2.source):
        raise ContractError("target of the first map must be the source of the second")
    images = {s: phi2.apply(v) for s, v in phi1.images.items()}
    return GroupHomomorphism(phi1.source, phi2.target, images,
                             name or f"{phi1.name};{phi2.name}", verify_radius=0)


def diagonal_hom(phi: GroupHomomorphism, psi: GroupHomomorphism, name=None) -> GroupHomomorphism:
    """θ: x ↦ (xφ, xψ) into the convolution-marked product."""
    if not phi.source.same_elements(psi.source) or not phi.target.same_elements(psi.target):
        raise ContractError("diagonal_hom needs maps with the same source and target")
    target = DirectProduct(phi.target, psi.target, "convolution")
    images = {s: (phi.images[s], psi.apply(phi.source.gens[s])) for s in phi.source.alphabet}
    return GroupHomomorphism(phi.source, target, images, name or f"θ({phi.name},{psi.name})",
                             verify_radius=0)


def letter_map(g: FreeGroup, mapping: dict, name="sigma") -> GroupHomomorphism:
    """Free-group endomorphism from words over the standard letters."""
    images = {s: g.element(g.parse(w) if isinstance(w, str) else w) for s, w in mapping.items()}
    return GroupHomomorphism(g, g, images, name, verify_radius=0)


def hom_from_json(doc: dict, source: GroupModel | None = None,
                  target: GroupModel | None = None) -> GroupHomomorphism:
    source = source or group_from_json(doc["source"])
    target = target or (group_from_json(doc["target"]) if "target" in doc else source)
    return GroupHomomorphism.from_words(source, target, doc["images"], doc.get("name", "phi"))


# ------------------------------------------------------------- BRP checks

def _beta_slack(s2: AutomaticStructure, max_len: int):
    if s2.uniqueness:
        return 0, None
    rep = s2.cache.get(("K", max_len))
    if rep is None:
        r = length_diff_constant(s2, max_len)
        rep = r.value if r.ok else max_len
    return rep, f"β candidates capped at |ḡ| + {rep} (measured length-difference constant)"


def _image_points(phi, s1, cat):
    """Per-word lists of (α^[n]π₁)φ, sharing work through a prefix cache."""
    imgs = phi.on_marking(s1.group)
    tgt = phi.target
    memo = {(): tgt.identity}
    out = []
    for w in cat.words:
        pts = [tgt.identity]
        for n in range(1, len(w) + 1):
            key = w[:n]
            p = memo.get(key)
            if p is None:
                p = memo[key] = tgt.multiply(pts[-1], imgs[w[n - 1]])
            pts.append(p)
        out.append(pts)
    return out


def _brp_scan(phi, s1, s2, max_len, variant):
    if not phi.source.same_elements(s1.group) or not phi.target.same_elements(s2.group):
        raise ContractError("structures do not match the homomorphism's source and target")
    cat = s1.catalog(max_len)
    metric = s2.group
    slack, note = _beta_slack(s2, max_len)
    notes = [note] if note else []
    points = _image_points(phi, s1, cat)
    beta_cache = {}
    ids = {}
    elems = []

    def intern(x):
        i = ids.get(x)
        if i is None:
            i = ids[x] = len(elems)
            elems.append(x)
        return i

    dcache = {}

    def dist(a, b):
        if a == b:
            return 0
        key = (a, b) if a < b else (b, a)
        d = dcache.get(key)
        if d is None:
            d = dcache[key] = metric.norm(metric.multiply(metric.invert(elems[a]), elems[b]))
        return d

    per = {}
    arg = {}
    for i, w in enumerate(cat.words):
        pa = [intern(x) for x in points[i]]
        g = points[i][-1]
        betas = beta_cache.get(g)
        if betas is None:
            bar = s2.rep(g, 4 * max_len + 4 * max(phi.V(metric), 1) * max_len + 4)
            if bar is None:
                raise ContractError(f"no representative of {metric.format(g)} found in {s2.name}")
            ws = s2.words_for(g, len(bar) + slack) if slack else [bar]
            betas = beta_cache[g] = [(b, [intern(x) for x in metric.evaluate_prefixes(b)])
                                     for b in ws]
        for beta, pb in betas:
            if variant == "brp":
                d, at = hausdorff_ids(pa, pb, dist), None
            else:
                lu, lv = len(pa) - 1, len(pb) - 1
                d, at = 0, 0
                for n in range(max(lu, lv) + 1):
                    x = dist(pa[min(n, lu)], pb[min(n, lv)])
                    if x > d:
                        d, at = x, n
            b = len(w)
            if d > per.get(b, -1):
                per[b] = d
                arg[b] = (w, beta, at, d)

    def witness():
        if not arg:
            return None, {}
        b = max(arg, key=lambda k: (per[k], -k))
        w, beta, at, d = arg[b]
        wit = {"alpha": fmt_word(w), "beta": fmt_word(beta), "distance": d}
        if at is not None:
            wit["n"] = at
        return wit, {"alpha": w, "beta": beta, "n": at, "distance": d}

    kind = {"brp": "brp", "sync": "sync_brp"}[variant]
    notes.append("basepoint x = 1 (left-invariance)")
    return from_trace(kind, per, max_len, witness, notes=notes, start=0)


def check_brp(phi: GroupHomomorphism, s1: AutomaticStructure, s2: AutomaticStructure,
              max_len: int) -> CheckReport:
    """Hausdorff form of the bounded reduction property."""
    return _brp_scan(phi, s1, s2, max_len, "brp")


def check_sync_brp(phi: GroupHomomorphism, s1: AutomaticStructure, s2: AutomaticStructure,
                   max_len: int) -> CheckReport:
    """Synchronous form: d((α^[n]π₁)φ, β^[n]π₂) ≤ N."""
    return _brp_scan(phi, s1, s2, max_len, "sync")


def brp_distance(phi, s1, s2, alpha, beta, x=None, synchronous=False):
    """Haus(Im θ_α^x φ, Im θ_β^{xφ}) (or the synchronous variant) for one pair."""
    src, tgt = s1.group, s2.group
    x = src.identity if x is None else x
    xs = phi.apply(x)
    imgs = phi.on_marking(src)
    pa = [xs]
    for s in alpha:
        pa.append(phi.target.multiply(pa[-1], imgs[s]))
    pb = tgt.evaluate_prefixes(beta, xs)
    if synchronous:
        la, lb = len(pa) - 1, len(pb) - 1
        return max(tgt.distance(pa[min(n, la)], pb[min(n, lb)]) for n in range(max(la, lb) + 1))
    d1 = max(min(tgt.distance(p, q) for q in pb) for p in pa)
    d2 = max(min(tgt.distance(p, q) for p in pa) for q in pb)
    return max(d1, d2)


def check_ft_brp(phi: GroupHomomorphism, s1: AutomaticStructure, s2: AutomaticStructure,
                 p: int, max_len: int) -> CheckReport:
    """FT-BRP: meeting p-fellow-travellers map to meeting q-fellow-travellers.

    Triples range over u₁, u₂, u₃ ∈ L₁ with |u₁| + |u₂| ≤ max_len and
    |u₃| ≤ max_len; "p-MFT" is read as p-fellow travelling with equal
    endpoints.
    """
    if p < 0:
        raise ContractError("p must be non-negative")
    cat = s1.catalog(max_len)
    g1 = s1.group
    metric = s2.group
    tgt = phi.target
    imgs = phi.on_marking(g1)
    slack, note = _beta_slack(s2, max_len)
    reps = {}

    def image_words(i):
        r = reps.get(i)
        if r is None:
            acc = tgt.identity
            for s in cat.words[i]:
                acc = tgt.multiply(acc, imgs[s])
            bar = s2.rep(acc, 6 * max_len + 6)
            if bar is None:
                raise ContractError(f"no representative of {metric.format(acc)} in {s2.name}")
            r = reps[i] = s2.words_for(acc, len(bar) + slack) if slack else [bar]
        return r

    lens = [len(w) for w in cat.words]
    per = {}
    arg = {}
    for i1, pu1 in enumerate(cat.pts):
        e1 = cat.elems[pu1[-1]]
        for i2, pu2 in enumerate(cat.pts):
            if lens[i1] + lens[i2] > max_len:
                continue
            # points of u1u2
            pts = list(pu1)
            for s in cat.words[i2]:
                pts.append(cat.intern(g1.multiply(cat.elems[pts[-1]], g1.gens[s])))
            end = pts[-1]
            for i3 in cat.by_end.get(end, ()):
                p3 = cat.pts[i3]
                la, lb = len(pts) - 1, len(p3) - 1
                if any(cat.dist(pts[min(n, la)], p3[min(n, lb)]) > p for n in range(max(la, lb) + 1)):
                    continue
                for v1 in image_words(i1):
                    for v2 in image_words(i2):
                        for v3 in image_words(i3):
                            a = metric.evaluate_prefixes(v1 + v2)
                            c = metric.evaluate_prefixes(v3)
                            la2, lc = len(a) - 1, len(c) - 1
                            q = max(metric.distance(a[min(n, la2)], c[min(n, lc)])
                                    for n in range(max(la2, lc) + 1))
                            b = max(lens[i1] + lens[i2], lens[i3])
                            if q > per.get(b, -1):
                                per[b] = q
                                arg[b] = (cat.words[i1], cat.words[i2], cat.words[i3], v1, v2, v3, q)

    def witness():
        if not arg:
            return None, {}
        b = max(arg, key=lambda k: (per[k], -k))
        u1, u2, u3, v1, v2, v3, q = arg[b]
        wit = {"u1": fmt_word(u1), "u2": fmt_word(u2), "u3": fmt_word(u3),
               "v1": fmt_word(v1), "v2": fmt_word(v2), "v3": fmt_word(v3), "q": q}
        return wit, {"u": (u1, u2, u3), "v": (v1, v2, v3), "q": q}

    notes = ["p-MFT read as p-fellow travelling with equal endpoints"]
    if note:
        notes.append(note)
    rep = from_trace("ft_brp", per, max_len, witness, notes=notes, start=0)
    rep.extra["p"] = p
    return rep


# ------------------------------------------------------ free-group decision

@dataclass
class FreeDecision:
    holds: bool
    conjugator: tuple = ()
    permutation: dict = field(default_factory=dict)
    reason: str = ""

    def to_json(self, g: FreeGroup) -> dict:
        doc = {"sync_brp": self.holds, "reason": self.reason}
        if self.holds:
            doc["conjugator"] = g.format(self.conjugator)
            doc["permutation"] = {s: g.format(v) for s, v in self.permutation.items()}
        return doc


def _split_conjugate(w: tuple):
    """w = c y c⁻¹ with |y| = 1, as (c, y), or None."""
    n = len(w)
    if n % 2 == 0:
        return None
    h = n // 2
    for i in range(h):
        if w[i] != -w[n - 1 - i]:
            return None
    return w[:h], w[h]


def free_sync_brp_decide(phi: GroupHomomorphism) -> FreeDecision:
    """Decide whether φ ∈ ⟨inner automorphisms, letter permutations⟩.

    Peels one conjugating letter at a time; a YES answer is re-verified
    as λ_u∘σ on every generator.
    """
    g = phi.source
    if not (isinstance(g, FreeGroup) and g.native and phi.target.same_elements(g)):
        raise ContractError("free_sync_brp_decide needs an endomorphism of a natively marked free group")
    gens = list(g.names)
    images = {x: phi.images[x] for x in gens}
    u = ()
    while True:
        split = {}
        for x in gens:
            cy = _split_conjugate(images[x])
            if cy is None:
                return FreeDecision(False, reason=f"the image of {x} is not a conjugate of a letter "
                                    f"({g.format(images[x])})")
            split[x] = cy
        if all(not c for c, _ in split.values()):
            ys = [abs(y) for _, y in split.values()]
            if len(set(ys)) != len(ys):
                return FreeDecision(False, reason="two generators map to the same letter up to "
                                    "inversion, so φ is not injective")
            sigma = {x: (split[x][1],) for x in gens}
            for x in gens:
                if g.conjugate(u, sigma[x]) != phi.images[x]:
                    raise AssertionError("factorization failed to verify")
            return FreeDecision(True, u, sigma, "φ = λ_u ∘ σ")
        z = max(gens, key=lambda x: len(split[x][0]))
        wz = split[z][0]
        b = wz[0]
        for x in gens:
            c, y = split[x]
            if c and wz[:len(c)] != c:
                return FreeDecision(False, reason=f"conjugator of {x} is not a prefix of the "
                                    f"longest conjugator")
            if not c and abs(y) != abs(b):
                return FreeDecision(False, reason=f"{x} is fixed up to a letter that does not "
                                    f"commute with the first conjugator letter {g.letter(b)}")
        binv = (-b,)
        images = {x: g.multiply(g.multiply(binv, images[x]), (b,)) for x in gens}
        u = u + (b,)


def signed_permutations(g: FreeGroup):
    """All letter-permutation automorphisms as images of the generators."""
    from itertools import permutations, product
    r = g.rank
    for perm in permutations(range(1, r + 1)):
        for signs in product((1, -1), repeat=r):
            yield {g.names[i]: (signs[i] * perm[i],) for i in range(r)}


# ------------------------------------------------------- Gromov products

def gromov_brp_check(phi: GroupHomomorphism, radius: int) -> CheckReport:
    """max (uφ|vφ) over ball pairs with (u|v) = 0, traced over radii."""
    src, tgt = phi.source, phi.target
    if not (isinstance(src, FreeGroup) and isinstance(tgt, FreeGroup)):
        raise ContractError("gromov_brp_check needs free source and target")
    ball = src.ball(radius)
    img = [phi.apply(x) for x in ball]
    norms = [src.norm(x) for x in ball]
    inorm = [tgt.norm(y) for y in img]
    per = {}
    arg = {}
    for i in range(len(ball)):
        for j in range(i, len(ball)):
            if gromov_product(src, ball[i], ball[j]) != 0:
                continue
            q = Fraction(inorm[i] + inorm[j] - tgt.distance(img[i], img[j]), 2)
            b = max(norms[i], norms[j])
            if q > per.get(b, -1):
                per[b] = q
                arg[b] = (ball[i], ball[j], q)

    def witness():
        if not arg:
            return None, {}
        b = max(arg, key=lambda k: (per[k], -k))
        u, v, q = arg[b]
        return ({"u": src.format(u), "v": src.format(v), "gromov": q},
                {"u": u, "v": v, "gromov": q})

    return from_trace("gromov_brp", per, radius, witness, start=0)
