"""Automatic structures and bounded measurements of their constants.

Every universally quantified property is checked on the finite slice
L ∩ A^{≤max_len}; reports carry the bound they were verified to together
with a growth trace (best constant per length bound).
"""
from __future__ import annotations

import json
from collections import deque
from typing import Sequence

from . import fsa
from .errors import ContractError, ResourceError
from .fsa import Alphabet, Automaton, fmt_word
from .groups import (EXCEEDS, DirectProduct, FiniteGroup, FreeAbelianGroup, FreeGroup,
                     GroupModel, PathTrace, ball_cap, group_from_json)
from .reports import CONSTANT, FAILURE, CheckReport, cumulative, from_trace

INF = float("inf")


class Catalog:
    """All accepted words up to a length, with interned prefix points.

    ``group`` evaluates the words; ``metric`` (same elements, possibly a
    different marking) measures distances.
    """

    def __init__(self, group: GroupModel, dfa: Automaton, max_len: int, metric=None):
        self.group = group
        self.metric = metric or group
        self.max_len = max_len
        self.elems = []
        self.eid = {}
        self.words = []
        self.pts = []
        self._dist = {}
        co = fsa.co_depths(dfa)
        gens = group.gens
        cap = ball_cap()
        root = self.intern(group.identity)
        layer = [((), dfa.initial, (root,))]
        for depth in range(max_len + 1):
            nxt = []
            for w, p, pp in layer:
                if p in dfa.finals:
                    self.words.append(w)
                    self.pts.append(pp)
                if depth == max_len:
                    continue
                g = self.elems[pp[-1]]
                for s in dfa.alphabet:
                    q = dfa.step(p, s)
                    if q is None or depth + 1 + co.get(q, INF) > max_len:
                        continue
                    nxt.append((w + (s,), q, pp + (self.intern(group.multiply(g, gens[s])),)))
            if len(self.words) + len(nxt) > cap:
                raise ResourceError(f"more than {cap} words of length ≤ {depth + 1}")
            layer = nxt
        self.by_end = {}
        for i, pp in enumerate(self.pts):
            self.by_end.setdefault(pp[-1], []).append(i)
        steps = []
        for s in self.metric.alphabet:
            g = self.metric.gens[s]
            steps += [g, self.metric.invert(g)]
        seen = set()
        self.steps = [g for g in steps if not (g in seen or seen.add(g)) and g != group.identity]

    def intern(self, g) -> int:
        i = self.eid.get(g)
        if i is None:
            i = self.eid[g] = len(self.elems)
            self.elems.append(g)
        return i

    def dist(self, a: int, b: int) -> int:
        if a == b:
            return 0
        key = (a, b) if a < b else (b, a)
        d = self._dist.get(key)
        if d is None:
            m = self.metric
            d = self._dist[key] = m.norm(m.multiply(m.invert(self.elems[a]), self.elems[b]))
        return d

    def end(self, i: int):
        return self.elems[self.pts[i][-1]]

    def neighbour_ends(self, e: int) -> list:
        """Ids of interned elements at distance ≤ 1 from element id e (incl. e)."""
        g = self.elems[e]
        out = [e]
        for s in self.steps:
            j = self.eid.get(self.metric.multiply(g, s))
            if j is not None and j != e:
                out.append(j)
        return out

    def sync_distance(self, i: int, j: int):
        """(max_n d(u^[n], v^[n]), argmax n)."""
        pu, pv = self.pts[i], self.pts[j]
        lu, lv = len(pu) - 1, len(pv) - 1
        worst, at = 0, 0
        for n in range(max(lu, lv) + 1):
            d = self.dist(pu[min(n, lu)], pv[min(n, lv)])
            if d > worst:
                worst, at = d, n
        return worst, at

    def close_pairs(self):
        """Unordered pairs (i, j), i < j, of words with endpoints ≤ 1 apart."""
        for i, pp in enumerate(self.pts):
            for e in self.neighbour_ends(pp[-1]):
                for j in self.by_end.get(e, ()):
                    if j > i:
                        yield i, j


def bottleneck(pu: Sequence[int], pv: Sequence[int], dist) -> int:
    """Minimal over monotone lattice paths of the maximal prefix distance."""
    n = len(pv)
    row = [0] * n
    acc = 0
    for j in range(n):
        acc = max(acc, dist(pu[0], pv[j]))
        row[j] = acc
    for i in range(1, len(pu)):
        new = [0] * n
        new[0] = max(row[0], dist(pu[i], pv[0]))
        for j in range(1, n):
            new[j] = max(dist(pu[i], pv[j]), min(row[j], new[j - 1], row[j - 1]))
        row = new
    return row[-1]


def hausdorff_ids(pu, pv, dist) -> int:
    a = max(min(dist(x, y) for y in pv) for x in pu)
    b = max(min(dist(x, y) for x in pu) for y in pv)
    return max(a, b)


def hausdorff_distance(t1: PathTrace, t2: PathTrace, cap=None):
    """Hausdorff distance between the point sets of two traces."""
    g = t1.group
    if not g.same_elements(t2.group):
        raise ContractError("traces live in different groups")

    def d(x, y):
        return g.distance(x, y, cap)

    vals = []
    for xs, ys in ((t1.points, t2.points), (t2.points, t1.points)):
        for x in xs:
            best = None
            for y in ys:
                v = d(x, y)
                if v is not EXCEEDS and (best is None or v < best):
                    best = v
            if best is None:
                return EXCEEDS
            vals.append(best)
    return max(vals)


class ShortestReps:
    """Shortlex-least minimal-length representatives, by BFS on (state, element)."""

    def __init__(self, structure: "AutomaticStructure"):
        self.s = structure
        d = structure.dfa
        g = structure.group
        self.rep = {}
        self.seen = {(d.initial, g.identity)}
        self.layer = [(d.initial, g.identity, ())]
        self.depth = 0
        if d.initial in d.finals:
            self.rep[g.identity] = ()

    def _extend(self):
        d = self.s.dfa
        g = self.s.group
        nxt = []
        for p, x, w in self.layer:
            for s in d.alphabet:
                q = d.step(p, s)
                if q is None:
                    continue
                y = g.multiply(x, g.gens[s])
                if (q, y) in self.seen:
                    continue
                self.seen.add((q, y))
                ws = w + (s,)
                nxt.append((q, y, ws))
                if q in d.finals and y not in self.rep:
                    self.rep[y] = ws
        if len(self.seen) > ball_cap():
            raise ResourceError("representative search exceeded the ball cap")
        self.layer = nxt
        self.depth += 1

    def fill(self, limit: int):
        while self.depth < limit and self.layer:
            self._extend()

    def word(self, g, limit: int):
        while g not in self.rep and self.depth < limit and self.layer:
            self._extend()
        w = self.rep.get(g)
        return w if w is not None and len(w) <= limit else None

    def within(self, length: int) -> dict:
        self.fill(length)
        return {x: w for x, w in self.rep.items() if len(w) <= length}


class AutomaticStructure:
    """A language over the group's marked alphabet, with cached measurements."""

    def __init__(self, group: GroupModel, language: Automaton, name: str = "",
                 uniqueness: bool | None = None):
        if tuple(language.alphabet.symbols) != tuple(group.alphabet.symbols):
            raise ContractError("language alphabet must equal the group's marked alphabet")
        self.group = group
        self.language = language
        self.name = name or "L"
        self.uniqueness = uniqueness
        self._dfa = None
        self._catalogs = {}
        self._reps = None
        self.cache = {}
        # set when L is exactly the group's shortlex normal forms
        self.shortlex_forms = False

    @property
    def alphabet(self) -> Alphabet:
        return self.group.alphabet

    @property
    def dfa(self) -> Automaton:
        if self._dfa is None:
            self._dfa = fsa.trim(fsa.minimize(self.language))
        return self._dfa

    def accepts(self, word) -> bool:
        return fsa.accepts(self.language, word)

    def enumerate(self, max_len: int) -> list:
        return fsa.enumerate_words(self.language, max_len)

    def catalog(self, max_len: int, metric=None) -> Catalog:
        key = (max_len, id(metric) if metric is not None else None)
        cat = self._catalogs.get(key)
        if cat is None:
            cat = self._catalogs[key] = Catalog(self.group, self.dfa, max_len, metric)
        return cat

    @property
    def reps(self) -> ShortestReps:
        if self._reps is None:
            self._reps = ShortestReps(self)
        return self._reps

    def rep(self, g, limit: int):
        """ḡ, or None when no representative of length ≤ limit exists."""
        if self.shortlex_forms:
            w = self.group.shortlex_word(g, limit)
            return w if w is not None and len(w) <= limit else None
        return self.reps.word(g, limit)

    def words_for(self, g, limit: int) -> list:
        """All words of L of length ≤ limit evaluating to g, in shortlex order."""
        d = self.dfa
        grp = self.group
        co = fsa.co_depths(d)
        out = []
        stack = [((), d.initial, grp.identity)]
        while stack:
            w, p, x = stack.pop()
            if p in d.finals and x == g:
                out.append(w)
            if len(w) == limit:
                continue
            for s in reversed(d.alphabet.symbols):
                q = d.step(p, s)
                if q is None or len(w) + 1 + co.get(q, INF) > limit:
                    continue
                y = grp.multiply(x, grp.gens[s])
                rest = limit - len(w) - 1
                n = grp.norm(grp.multiply(grp.invert(y), g), rest)
                if n is EXCEEDS:
                    continue
                stack.append((w + (s,), q, y))
        out.sort(key=self.alphabet.key)
        return out

    def check_uniqueness(self, max_len: int):
        """First pair of distinct words of length ≤ max_len with equal value."""
        cat = self.catalog(max_len)
        for e, idx in cat.by_end.items():
            if len(idx) > 1:
                return cat.words[idx[0]], cat.words[idx[1]]
        return None

    def with_language(self, language: Automaton, name=None) -> "AutomaticStructure":
        return AutomaticStructure(self.group, language, name or self.name)

    def describe(self) -> str:
        return f"{self.name} over {self.group.describe()}"

    def __repr__(self):
        return f"<AutomaticStructure {self.describe()}>"

    def to_json(self, group_doc=None) -> dict:
        doc = {"name": self.name, "language": fsa.to_json(self.language)}
        if group_doc is not None:
            doc["group"] = group_doc
        return doc


class ProductStructure(AutomaticStructure):
    """L1 ⋄ L2 over a convolution-marked direct product."""

    def __init__(self, group: DirectProduct, language: Automaton, left: AutomaticStructure,
                 right: AutomaticStructure, name: str = ""):
        super().__init__(group, language, name or f"{left.name}⋄{right.name}",
                         uniqueness=bool(left.uniqueness and right.uniqueness))
        self.left = left
        self.right = right

    def rep(self, g, limit: int):
        if not self.uniqueness:
            return super().rep(g, limit)
        u = self.left.rep(g[0], limit)
        v = self.right.rep(g[1], limit)
        if u is None or v is None:
            return None
        return fsa.convolve_words(u, v)

    def words_for(self, g, limit: int) -> list:
        us = self.left.words_for(g[0], limit)
        vs = self.right.words_for(g[1], limit)
        out = [fsa.convolve_words(u, v) for u in us for v in vs]
        out.sort(key=self.alphabet.key)
        return out


def structure_from_json(doc: dict, group: GroupModel | None = None) -> AutomaticStructure:
    if group is None:
        group = group_from_json(doc["group"])
    lang = doc["language"]
    if lang == "shortlex":
        s = shortlex_structure(group)
        if doc.get("name"):
            s.name = doc["name"]
        return s
    if isinstance(lang, str):
        aut = fsa.regex(group.alphabet, lang)
    else:
        aut = fsa.from_json(lang)
        if aut.alphabet.symbols != group.alphabet.symbols:
            aut = fsa.Automaton(group.alphabet, aut.n, aut.initial, aut.finals, aut.transitions())
    return AutomaticStructure(group, aut, doc.get("name", ""), doc.get("uniqueness"))


# ------------------------------------------------------------------ checks

def _word_pair(cat: Catalog, i: int, j: int, n: int, value) -> tuple:
    u, v = cat.words[i], cat.words[j]
    w = {"u": fmt_word(u), "v": fmt_word(v), "n": n, "distance": value}
    return w, {"u": u, "v": v, "n": n, "distance": value}


def ft_scan(cat: Catalog, max_len: int, kind="ft_constant", notes=None) -> CheckReport:
    per = {}
    arg = {}
    for i, j in cat.close_pairs():
        d, n = cat.sync_distance(i, j)
        b = max(len(cat.words[i]), len(cat.words[j]))
        if d > per.get(b, -1):
            per[b] = d
            arg[b] = (i, j, n, d)
    return from_trace(kind, per, max_len, lambda: _best_witness(cat, per, arg), notes=notes)


def _best_witness(cat, per, arg):
    if not arg:
        return None, {}
    b = max(arg, key=lambda k: (per[k], -k))
    i, j, n, d = arg[b]
    return _word_pair(cat, i, j, n, d)


def ft_constant(s: AutomaticStructure, max_len: int, mode: str = "synchronous",
                metric=None) -> CheckReport:
    """Fellow-traveller constant of L ∩ A^{≤max_len}."""
    if max_len < 1:
        raise ContractError("max_len must be at least 1")
    cat = s.catalog(max_len, metric)
    if mode == "synchronous":
        rep = ft_scan(cat, max_len)
    elif mode == "biautomatic":
        rep = _biautomatic_scan(cat, max_len)
    else:
        raise ContractError(f"unknown fellow-traveller mode {mode!r}")
    s.cache[("ft", mode, max_len)] = rep.value
    return rep


def _biautomatic_scan(cat: Catalog, max_len: int) -> CheckReport:
    m = cat.metric
    g0 = m.identity
    shifts = [g0] + list(cat.steps)
    inv_shift = [m.invert(x) for x in shifts]
    per = {}
    arg = {}
    cache = {}
    for i, pu in enumerate(cat.pts):
        end = cat.elems[pu[-1]]
        lu = len(pu) - 1
        for xi, x in enumerate(shifts):
            left = m.multiply(x, end)
            for y in shifts:
                t = cat.eid.get(m.multiply(left, y))
                if t is None:
                    continue
                for j in cat.by_end.get(t, ()):
                    if j == i and xi == 0:
                        continue
                    pv = cat.pts[j]
                    lv = len(pv) - 1
                    worst, at = 0, 0
                    for n in range(max(lu, lv) + 1):
                        a, c = pu[min(n, lu)], pv[min(n, lv)]
                        key = (xi, a, c)
                        d = cache.get(key)
                        if d is None:
                            z = m.multiply(m.multiply(m.invert(cat.elems[a]), inv_shift[xi]),
                                           cat.elems[c])
                            d = cache[key] = m.norm(z)
                        if d > worst:
                            worst, at = d, n
                    b = max(lu, lv)
                    if worst > per.get(b, -1):
                        per[b] = worst
                        arg[b] = (i, j, at, worst, xi)

    def witness():
        if not arg:
            return None, {}
        b = max(arg, key=lambda k: (per[k], -k))
        i, j, n, d, xi = arg[b]
        w, data = _word_pair(cat, i, j, n, d)
        w["left_shift"] = m.format(shifts[xi])
        data["left_shift"] = shifts[xi]
        return w, data

    return from_trace("biautomatic_ft_constant", per, max_len, witness)


def async_ft_constant(s: AutomaticStructure, max_len: int, metric=None) -> CheckReport:
    """Asynchronous (discrete reparametrisation) fellow-traveller constant."""
    if max_len < 1:
        raise ContractError("max_len must be at least 1")
    cat = s.catalog(max_len, metric)
    per = {}
    arg = {}
    for i, j in cat.close_pairs():
        d = bottleneck(cat.pts[i], cat.pts[j], cat.dist)
        b = max(len(cat.words[i]), len(cat.words[j]))
        if d > per.get(b, -1):
            per[b] = d
            arg[b] = (i, j, 0, d)
    rep = from_trace("async_ft_constant", per, max_len, lambda: _best_witness(cat, per, arg),
                     notes=["discrete reparametrisations with steps of size at most 1"])
    s.cache[("async", max_len)] = rep.value
    return rep


def departure_estimate(s: AutomaticStructure, r_values: Sequence[int], max_len: int) -> CheckReport:
    """Least D(r) valid on L ∩ A^{≤max_len}, for each r.

    A violation of D at r is (w, s, t) with t ≥ D, s + t ≤ |w| and
    d(w^[s]π, w^[s+t]π) ≤ r. D(r) = 0 when no word of positive length
    exists (the condition is vacuous); otherwise D(r) is one more than the
    longest violating t. No D(r) ≤ max_len works when t = max_len violates.
    """
    d = s.dfa
    g = s.group
    co = fsa.co_depths(d)
    # shortest prefix reaching each state
    pre = {d.initial: ()}
    queue = deque([d.initial])
    while queue:
        p = queue.popleft()
        for sym in d.alphabet:
            q = d.step(p, sym)
            if q is not None and q not in pre:
                pre[q] = pre[p] + (sym,)
                queue.append(q)
    rmax = max(r_values) if r_values else 0
    need = {}      # (t, r) -> minimal total length of a violating word
    where = {}     # (t, r) -> (prefix, factor, suffix state)
    nonempty = any(len(w) > 0 for w in s.enumerate(min(max_len, 1)))
    for p, pw in sorted(pre.items(), key=lambda kv: s.alphabet.key(kv[1])):
        if p not in co:
            continue
        base = len(pw)
        layer = [(p, g.identity, ())]
        seen = {(p, g.identity)}
        for t in range(1, max_len - base + 1):
            nxt = []
            seen_t = set()
            for q, x, f in layer:
                for sym in d.alphabet:
                    q2 = d.step(q, sym)
                    if q2 is None or q2 not in co or base + t + co[q2] > max_len:
                        continue
                    y = g.multiply(x, g.gens[sym])
                    if (q2, y) in seen_t:
                        continue
                    seen_t.add((q2, y))
                    nxt.append((q2, y, f + (sym,)))
            if len(seen_t) > ball_cap():
                raise ResourceError("departure search exceeded the ball cap")
            for q2, y, f in nxt:
                n = g.norm(y, rmax)
                if n is EXCEEDS:
                    continue
                total = base + t + co[q2]
                for r in r_values:
                    if n <= r and total < need.get((t, r), INF):
                        need[(t, r)] = total
                        where[(t, r)] = (pw, f, q2)
            layer = nxt
            seen |= seen_t
    table = {}
    failures = []
    traces = {}
    for r in r_values:
        per = {}
        for b in range(max_len + 1):
            ts = [t for (t, rr), tot in need.items() if rr == r and tot <= b]
            per[b] = (1 + max(ts)) if ts else (1 if nonempty and b >= 1 else 0)
        traces[r] = per
        table[r] = per[max_len]
        if max_len >= 1 and (max_len, r) in need:
            failures.append(r)
    growth = [(b, {r: traces[r][b] for r in r_values}) for b in range(1, max_len + 1)]
    if failures:
        r = failures[0]
        pw, f, q2 = where[(max_len, r)]
        suffix = _shortest_suffix(d, q2)
        word = pw + f + suffix
        start = len(pw)
        pts = g.evaluate_prefixes(word)
        dist = g.distance(pts[start], pts[start + len(f)])
        witness = {"r": r, "w": fmt_word(word), "s": start, "t": len(f), "distance": dist}
        data = {"r": r, "w": word, "s": start, "t": len(f), "distance": dist}
        return CheckReport("departure", FAILURE, table, max_len, witness, growth,
                           [f"no D({r}) ≤ {max_len} is valid"], {"D": table}, data)
    return CheckReport("departure", CONSTANT, table, max_len, None, growth, [], {"D": table})


def _shortest_suffix(d: Automaton, q: int) -> tuple:
    if q in d.finals:
        return ()
    prev = {q: None}
    queue = deque([q])
    while queue:
        p = queue.popleft()
        for sym in d.alphabet:
            r = d.step(p, sym)
            if r is not None and r not in prev:
                prev[r] = (p, sym)
                if r in d.finals:
                    out = []
                    while prev[r] is not None:
                        r, c = prev[r]
                        out.append(c)
                    return tuple(reversed(out))
                queue.append(r)
    raise ContractError("state cannot reach a final state")


def length_diff_constant(s: AutomaticStructure, max_len: int, corollary_radius: int | None = None,
                         search_limit: int | None = None) -> CheckReport:
    """Measured K: neighbours of wπ have representatives of length ≤ |w| + K."""
    g = s.group
    limit = search_limit if search_limit is not None else 3 * max_len + 3
    reps = s.reps
    base = reps.within(max_len)
    steps = []
    for a in g.alphabet:
        x = g.gens[a]
        steps += [x, g.invert(x)]
    per = {}
    arg = {}
    for x, w in sorted(base.items(), key=lambda kv: s.alphabet.key(kv[1])):
        for st in steps:
            y = g.multiply(x, st)
            v = reps.word(y, limit)
            if v is None:
                witness = {"w": fmt_word(w), "neighbour": g.format(y), "search_limit": limit}
                return CheckReport("length_diff", FAILURE, None, max_len, witness, [],
                                   ["a neighbour of an L-element has no representative "
                                    f"of length ≤ {limit}"], {}, {"w": w, "neighbour": y})
            k = len(v) - len(w)
            b = len(w)
            if k > per.get(b, -1):
                per[b] = k
                arg[b] = (w, v)
    per = {b: max(0, k) for b, k in per.items()}

    def witness():
        if not arg:
            return None, {}
        b = max(arg, key=lambda k: (per[k], -k))
        w, v = arg[b]
        return {"w": fmt_word(w), "neighbour_rep": fmt_word(v)}, {"w": w, "neighbour_rep": v}

    rep = from_trace("length_diff", per, max_len, witness, start=0)
    if corollary_radius is not None and rep.ok:
        bad = corollary_violation(s, rep.value, corollary_radius, limit)
        rep.extra["corollary_radius"] = corollary_radius
        rep.extra["corollary_holds"] = bad is None
        if bad is not None:
            rep.extra["corollary_violation"] = [g.format(bad[0]), g.format(bad[1])]
    s.cache[("K", max_len)] = rep.value
    return rep


def corollary_violation(s: AutomaticStructure, K: int, radius: int, limit: int):
    """First pair (g, h) in the ball with ||ḡ| − |h̄|| > K·d(g, h), or None."""
    g = s.group
    ball = g.ball(radius)
    lens = {}
    for x in ball:
        w = s.rep(x, limit)
        if w is None:
            return (x, x)
        lens[x] = len(w)
    for i, x in enumerate(ball):
        for y in ball[i + 1:]:
            if abs(lens[x] - lens[y]) > K * g.distance(x, y):
                return (x, y)
    return None


def check_rational_section(s: AutomaticStructure, radius: int, K: int | None = None) -> CheckReport:
    """Every element of the radius-ball has a representative of length ≤ K·radius + |1̄|."""
    g = s.group
    notes = []
    if K is None:
        kr = length_diff_constant(s, max(radius, 1))
        if kr.ok:
            K = max(kr.value, 1)
        else:
            K = 3
            notes.append("length-difference constant unavailable; using K = 3")
    one = s.rep(g.identity, K * radius + 1)
    if one is None:
        witness = {"element": g.format(g.identity)}
        return CheckReport("section", FAILURE, None, radius, witness, [],
                           ["the identity has no representative"], {}, {"element": g.identity})
    limit = radius * K + len(one)
    worst = 0
    per = {}
    for x in g.ball(radius):
        w = s.rep(x, limit)
        if w is None:
            witness = {"element": g.format(x), "length_limit": limit}
            return CheckReport("section", FAILURE, None, radius, witness, [],
                               notes + [f"element {g.format(x)} has no representative "
                                        f"of length ≤ {limit}"], {"K": K}, {"element": x})
        n = g.norm(x)
        worst = max(worst, len(w))
        per[n] = max(per.get(n, 0), len(w))
    trace = cumulative(per, radius)
    return CheckReport("section", CONSTANT, K, radius, None,
                       [(r, trace[r]) for r in range(radius + 1)], notes,
                       {"K": K, "longest_representative": worst, "length_limit": limit})


def _union_structure(s1: AutomaticStructure, s2: AutomaticStructure):
    """L1 ∪ L2 over A ∪ B; symbols are tagged when the two markings conflict."""
    g1, g2 = s1.group, s2.group
    a1, a2 = g1.alphabet, g2.alphabet
    clash = any(x in a1 and g1.gens[x] != g2.gens[x] for x in a2)
    if a1.symbols == a2.symbols and not clash:
        return AutomaticStructure(g1, fsa.union(s1.language, s2.language),
                                  f"{s1.name}∪{s2.name}")
    if clash:
        m1 = {x: ("1", x) for x in a1}
        m2 = {x: ("2", x) for x in a2}
    else:
        m1 = {x: x for x in a1}
        m2 = {x: x for x in a2}
    symbols = list(dict.fromkeys([m1[x] for x in a1] + [m2[x] for x in a2]))
    inverses = {m1[x]: m1[y] for x, y in a1.inverses.items()}
    inverses.update({m2[x]: m2[y] for x, y in a2.inverses.items()})
    alphabet = Alphabet(symbols, inverses)
    gens = {m1[x]: g1.gens[x] for x in a1}
    gens.update({m2[x]: g2.gens[x] for x in a2})
    group = g1.remark(alphabet, gens)
    l1 = fsa.with_alphabet(fsa.relabel(s1.language, m1, Alphabet([m1[x] for x in a1])), alphabet)
    l2 = fsa.with_alphabet(fsa.relabel(s2.language, m2, Alphabet([m2[x] for x in a2])), alphabet)
    return AutomaticStructure(group, fsa.union(l1, l2), f"{s1.name}∪{s2.name}")


def union_structure(s1, s2):
    return _union_structure(s1, s2)


def check_equivalence(s1: AutomaticStructure, s2: AutomaticStructure, mode: str = "asynchronous",
                      max_len: int = 8) -> CheckReport:
    """Hausdorff closeness (asynchronous) or FT of the union (synchronous)."""
    if not s1.group.same_elements(s2.group):
        raise ContractError("structures must be over the same group")
    metric = s1.group
    if mode == "synchronous":
        u = _union_structure(s1, s2)
        rep = ft_scan(u.catalog(max_len, metric), max_len, kind="equivalence_synchronous")
        rep.extra["union_alphabet"] = [fsa.fmt_symbol(x) for x in u.alphabet]
        return rep
    if mode != "asynchronous":
        raise ContractError(f"unknown equivalence mode {mode!r}")
    c1 = s1.catalog(max_len, metric)
    c2 = s2.catalog(max_len, metric)
    # compare in one shared element table so distances can be cached by id
    ids2 = [tuple(c1.intern(c2.elems[k]) for k in pp) for pp in c2.pts]
    by_end2 = {}
    for j, pp in enumerate(ids2):
        by_end2.setdefault(pp[-1], []).append(j)
    per = {}
    arg = {}
    for i, pp in enumerate(c1.pts):
        for e in c1.neighbour_ends(pp[-1]):
            for j in by_end2.get(e, ()):
                h = hausdorff_ids(pp, ids2[j], c1.dist)
                b = max(len(c1.words[i]), len(c2.words[j]))
                if h > per.get(b, -1):
                    per[b] = h
                    arg[b] = (i, j, h)
    def witness():
        if not arg:
            return None, {}
        b = max(arg, key=lambda k: (per[k], -k))
        i, j, h = arg[b]
        u, v = c1.words[i], c2.words[j]
        return ({"u": fmt_word(u), "v": fmt_word(v), "hausdorff": h},
                {"u": u, "v": v, "distance": h})

    return from_trace("equivalence_asynchronous", per, max_len, witness)


# ------------------------------------------------------- shortlex structures

def free_reduced_automaton(g: FreeGroup) -> Automaton:
    a = g.alphabet
    syms = list(a)
    trans = []
    for i, x in enumerate(syms):
        trans.append((0, x, i + 1))
        for j, y in enumerate(syms):
            if a.inverse(x) != y:
                trans.append((i + 1, y, j + 1))
    return Automaton(a, len(syms) + 1, 0, range(len(syms) + 1), trans)


def _abelian_automaton(g: FreeAbelianGroup) -> Automaton:
    """Words sorted in alphabet order that never use a letter and its inverse."""
    units = g._unit_letters()
    a = g.alphabet
    coord = {s: i for (i, _), s in units.items()}
    states = {(-1, frozenset()): 0}
    trans = []
    queue = deque([(-1, frozenset())])
    while queue:
        last, used = st = queue.popleft()
        for k, s in enumerate(a):
            if s not in coord or k < last:
                continue
            c = coord[s]
            sign = g.gens[s][c]
            if (c, -sign) in used:
                continue
            nst = (k, used | {(c, sign)})
            if nst not in states:
                states[nst] = len(states)
                queue.append(nst)
            trans.append((states[st], s, states[nst]))
    return Automaton(a, len(states), 0, range(len(states)), trans)


def shortlex_language(g: GroupModel) -> Automaton:
    if isinstance(g, FreeGroup) and g.native:
        return free_reduced_automaton(g)
    if isinstance(g, FreeAbelianGroup) and g._unit_letters() is not None:
        return _abelian_automaton(g)
    if isinstance(g, FiniteGroup):
        return fsa.from_words(g.alphabet, [g.shortlex_word(x) for x in g.ball(g.order)])
    if isinstance(g, DirectProduct) and g.native:
        l1 = shortlex_language(g.left)
        l2 = shortlex_language(g.right)
        if g.marking == "disjoint":
            r = fsa.relabel(l2, g.right_names, Alphabet([g.right_names[y] for y in g.right.alphabet]))
            return fsa.concatenate(fsa.with_alphabet(l1, g.alphabet), fsa.with_alphabet(r, g.alphabet))
        return fsa.convolve(l1, l2)
    raise ContractError(f"no shortlex structure available for {g.describe()}")


def shortlex_structure(g: GroupModel, name: str = "shortlex") -> AutomaticStructure:
    """Shortlex-least geodesics (or the product language L1L2 / L1⋄L2)."""
    lang = fsa.minimize(shortlex_language(g))
    if isinstance(g, DirectProduct) and g.marking == "convolution":
        left = shortlex_structure(g.left, name)
        right = shortlex_structure(g.right, name)
        return ProductStructure(g, lang, left, right, name)
    s = AutomaticStructure(g, lang, name, uniqueness=True)
    s.shortlex_forms = True
    return s


def load_structure(path) -> AutomaticStructure:
    with open(path) as fh:
        return structure_from_json(json.load(fh))
