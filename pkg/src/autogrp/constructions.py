"""Structure constructions: products, subgroup rewriting, induced and L̃ structures."""
from __future__ import annotations

from collections import deque
from fractions import Fraction
from itertools import product as iproduct

from . import fsa
from .errors import ContractError, PreconditionError, ResourceError
from .fsa import Alphabet, fmt_word
from .groups import DirectProduct, GroupModel, ball_cap
from .reports import CONSTANT, FAILURE, CheckReport, cumulative, from_trace
from .structures import (AutomaticStructure, ProductStructure, check_rational_section,
                         ft_constant, ft_scan, union_structure)
from .subgroups import SubgroupOracle, image_subgroup, kernel_elements, quasiconvexity


def product_structure(s1: AutomaticStructure, s2: AutomaticStructure) -> ProductStructure:
    """L1 ⋄ L2 over G1 × G2 marked by the padded alphabet."""
    group = DirectProduct(s1.group, s2.group, "convolution")
    lang = fsa.convolve(s1.dfa, s2.dfa)
    return ProductStructure(group, lang, s1, s2)


# ------------------------------------------------------------ rewriting

def _short_words(alphabet: Alphabet, k: int):
    """All words of length ≤ k in shortlex order."""
    for n in range(k + 1):
        for w in iproduct(alphabet.symbols, repeat=n):
            yield w


def _letter_name(g, a, g2) -> object:
    if not g and not g2:
        return a
    return f"<{fmt_word(g)}|{fsa.fmt_symbol(a)}|{fmt_word(g2)}>"


class RewriteSystem:
    """Letterwise rewriting of L′ = L ∩ π⁻¹(H) into words over B ⊂ H.

    A word a₁…aₙ of L′ with connectors g₀ = ε, g₁, …, gₙ = ε (each gᵢ the
    shortlex-least word of length ≤ k taking the prefix back into H) is
    rewritten letter by letter to bᵢ = gᵢ₋₁⁻¹ aᵢ gᵢ. The transducer reads
    states (q, gᵢ) so both L′ and L″ stay automaton-based.
    """

    def __init__(self, structure: AutomaticStructure, subgroup: SubgroupOracle, k: int,
                 report: CheckReport, max_len: int):
        self.structure = structure
        self.subgroup = subgroup
        self.k = k
        self.report = report
        self.max_len = max_len
        g = structure.group
        A = g.alphabet
        self._connector = {}
        d = structure.dfa
        start = (d.initial, ())
        ids = {start: 0}
        order = [start]
        trans = []          # (p, a, b_label, q)
        letters = {}        # label -> (g, a, g2)
        queue = deque([start])
        while queue:
            st = queue.popleft()
            p, gw = st
            for a in A:
                q = d.step(p, a)
                if q is None:
                    continue
                g2 = self.connector(gw, a)
                if g2 is None:
                    continue
                nxt = (q, g2)
                if nxt not in ids:
                    if len(ids) >= fsa.state_cap():
                        raise ResourceError("rewriting transducer exceeded the state cap")
                    ids[nxt] = len(order)
                    order.append(nxt)
                    queue.append(nxt)
                label = _letter_name(gw, a, g2)
                letters[label] = (gw, a, g2)
                trans.append((ids[st], a, label, ids[nxt]))
        finals = [i for i, (q, gw) in enumerate(order) if q in d.finals and not gw]
        # B: realized letters plus their formal inverses where A has them
        symbols = list(letters)
        inverses = {}
        for label, (gw, a, g2) in list(letters.items()):
            ai = A.inverse(a)
            if ai is None:
                continue
            inv = _letter_name(g2, ai, gw)
            if inv not in letters:
                letters[inv] = (g2, ai, gw)
                symbols.append(inv)
            inverses[label] = inv
            inverses[inv] = label
        self.letters = letters
        self.B = Alphabet(symbols, inverses)
        gens = {b: self.letter_value(b) for b in symbols}
        self.group_B = g.remark(self.B, gens)
        self.states = order
        self.transitions = trans
        self.l1 = fsa.Automaton(A, len(order), 0, finals, [(p, a, q) for p, a, _, q in trans])
        self.l2 = fsa.Automaton(self.B, len(order), 0, finals,
                                [(p, b, q) for p, _, b, q in trans])
        self._delta = {(p, a): (b, q) for p, a, b, q in trans}

    def connector(self, gw: tuple, a):
        """Shortlex-least word g′ of length ≤ k with (gw)⁻¹·a·g′ in H."""
        key = (gw, a)
        if key in self._connector:
            return self._connector[key]
        g = self.structure.group
        z = g.multiply(g.invert(g.evaluate(gw)), g.gens[a])
        found = None
        for w in _short_words(g.alphabet, self.k):
            if self.subgroup.contains(g.multiply(z, g.evaluate(w))):
                found = w
                break
        self._connector[key] = found
        return found

    def letter_value(self, b):
        gw, a, g2 = self.letters[b]
        g = self.structure.group
        return g.multiply(g.multiply(g.invert(g.evaluate(gw)), g.gens[a]), g.evaluate(g2))

    def letter_word(self, b) -> tuple:
        """A word over A ∪ A⁻¹ for the letter b (formal inverses spelled out)."""
        gw, a, g2 = self.letters[b]
        return self.structure.alphabet.invert_word(gw) + (a,) + tuple(g2)

    def structure_B(self) -> AutomaticStructure:
        return AutomaticStructure(self.group_B, self.l2, f"{self.structure.name}″")

    def to_json(self) -> dict:
        g = self.structure.group
        return {
            "k": self.k,
            "B": [{"letter": fsa.fmt_symbol(b), "g": fmt_word(gw), "a": fsa.fmt_symbol(a),
                   "g_next": fmt_word(g2), "value": g.format(self.letter_value(b))}
                  for b, (gw, a, g2) in self.letters.items()],
            "connectors": [{"from": fmt_word(gw), "letter": fsa.fmt_symbol(a),
                            "to": None if g2 is None else fmt_word(g2)}
                           for (gw, a), g2 in self._connector.items()],
            "states": len(self.states),
        }


def rewrite_build(s: AutomaticStructure, h: SubgroupOracle, max_len: int,
                  report: CheckReport | None = None) -> RewriteSystem:
    report = report or quasiconvexity(s, h, max_len)
    if not report.ok:
        raise PreconditionError(f"{h.name} is not quasiconvex at bound {max_len}", witness=report)
    return RewriteSystem(s, h, report.value, report, max_len)


def rewrite_word(r: RewriteSystem, w) -> tuple:
    w = r.structure.alphabet.check_word(w)
    st = 0
    out = []
    for a in w:
        hit = r._delta.get((st, a))
        if hit is None:
            raise ContractError(f"{fmt_word(w)} is not in L′")
        b, st = hit
        out.append(b)
    if st not in r.l1.finals:
        raise ContractError(f"{fmt_word(w)} is not in L′")
    return tuple(out)


def sandwich_constants(r: RewriteSystem, max_radius: int) -> CheckReport:
    """d_A/(2k+1) ≤ d_B ≤ K·d_A on all pairs of H in the radius-ball."""
    g = r.structure.group
    gb = r.group_B
    H = [x for x in g.ball(max_radius) if r.subgroup.contains(x)]
    lower = Fraction(1, 2 * r.k + 1)
    per = {}
    arg = {}
    for i, x in enumerate(H):
        for y in H[i:]:
            da = g.distance(x, y)
            db = gb.distance(x, y)
            if da == 0:
                if db != 0:
                    raise ContractError("B-distance of equal points must be 0")
                continue
            if Fraction(db) < lower * da:
                w = {"x": g.format(x), "y": g.format(y), "d_A": da, "d_B": db}
                return CheckReport("sandwich", FAILURE, None, max_radius, w, [],
                                   [f"lower bound d_A/(2k+1) violated with k = {r.k}"],
                                   {"k": r.k}, {"x": x, "y": y})
            ratio = Fraction(db, da)
            b = max(g.norm(x), g.norm(y))
            if ratio > per.get(b, -1):
                per[b] = ratio
                arg[b] = (x, y, da, db)
    trace = cumulative(per, max_radius)
    K = trace[max_radius] if per else Fraction(0)
    rep = CheckReport("sandwich", CONSTANT, K, max_radius, None,
                      [(b, trace[b]) for b in range(max_radius + 1)],
                      [f"{len(H)} subgroup elements in the radius-{max_radius} ball"],
                      {"k": r.k, "lower": lower, "upper": K, "B_size": len(r.B)})
    if arg:
        b = max(arg, key=lambda t: (per[t], -t))
        x, y, da, db = arg[b]
        rep.data["extremal"] = {"x": g.format(x), "y": g.format(y), "d_A": da, "d_B": db}
    return rep


def mixed_ft_check(r: RewriteSystem, max_len: int) -> CheckReport:
    """FT constant of L′ ∪ L″ over A ∪ B, measured in d_A."""
    g = r.structure.group
    A = g.alphabet
    symbols = list(A) + [b for b in r.B if b not in A]
    inverses = dict(A.inverses)
    inverses.update({x: y for x, y in r.B.inverses.items() if x not in A and y not in A})
    AB = Alphabet(symbols, inverses)
    gens = dict(g.gens)
    for b in r.B:
        if b in gens and gens[b] != r.group_B.gens[b]:
            raise ContractError(f"letter {fsa.fmt_symbol(b)} has two values")
        gens[b] = r.group_B.gens[b]
    g3 = g.remark(AB, gens)
    lang = fsa.union(fsa.with_alphabet(r.l1, AB), fsa.with_alphabet(r.l2, AB))
    s3 = AutomaticStructure(g3, lang, "L′∪L″")
    rep = ft_scan(s3.catalog(max_len, g), max_len, kind="mixed_ft",
                  notes=["pairs drawn from L′ ∪ L″; distances in the original generators"])
    rep.extra["k"] = r.k
    return rep


# ------------------------------------------------------ induced structures

def induced_group(s: AutomaticStructure, phi) -> GroupModel:
    """φ's target marked by a ↦ (aπ)φ over s's alphabet."""
    if not phi.source.same_elements(s.group):
        raise ContractError("the homomorphism's source must be the structure's group")
    imgs = phi.on_marking(s.group)
    return phi.target.remark(s.alphabet, imgs)


def induced_structure(s: AutomaticStructure, phi, max_len: int):
    """(L^(φ), FT report): the same language read in the image group."""
    g = induced_group(s, phi)
    ind = AutomaticStructure(g, s.language, f"{s.name}^({phi.name})")
    rep = ft_constant(ind, max_len)
    rep.extra["structure"] = ind.name
    return ind, rep


# ----------------------------------------------------------- L̃ structure

def finite_kernel(phi, max_len: int) -> list:
    """Ker φ when it stabilizes between radius max_len//2 and max_len."""
    big = kernel_elements(phi, max_len)
    small = set(kernel_elements(phi, max_len // 2))
    if any(x not in small for x in big):
        src = phi.source
        first = next(x for x in big if x != src.identity)
        raise PreconditionError(
            f"kernel of {phi.name} looks infinite: {src.format(first)} lies in it",
            witness={"element": src.format(first), "word": fmt_word(src.shortlex_word(first))})
    return big


def shortlex_preimage(phi, y, limit: int):
    """Shortlex-least word over the source alphabet mapping to y, or None."""
    src = phi.source
    best = None
    for r in range(limit + 1):
        for x in src.ball(r)[len(src.ball(r - 1)) if r else 0:]:
            if phi.apply(x) == y:
                w = src.shortlex_word(x)
                if best is None or src.alphabet.key(w) < src.alphabet.key(best):
                    best = w
        if best is not None:
            return best
        if len(src.ball(r)) > ball_cap():
            break
    return None


class TildeStructure:
    """L̃ = (L″ relabeled through preimages)·L_Ker with its four checks."""

    def __init__(self, structure, rewrite, C, preimages, kernel_words, checks, image_report):
        self.structure = structure
        self.rewrite = rewrite
        self.C = C
        self.preimages = preimages
        self.kernel_words = kernel_words
        self.checks = checks
        self.image_report = image_report

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.checks.values())

    def factor(self, w):
        """Split w as w_C w_A with w_A ∈ L_Ker, or None."""
        for kw in sorted(self.kernel_words, key=len, reverse=True):
            n = len(kw)
            if n == 0 or tuple(w[len(w) - n:]) == tuple(kw):
                head = tuple(w[:len(w) - n])
                if all(x in self.C for x in head):
                    return head, tuple(kw)
        return None

    def to_json(self) -> dict:
        return {
            "name": self.structure.name,
            "C": {fsa.fmt_symbol(c): fmt_word(w) for c, w in self.C.items()},
            "kernel": [fmt_word(w) for w in self.kernel_words],
            "quasiconvexity": self.image_report.to_json(),
            "checks": {k: r.to_json() for k, r in self.checks.items()},
            "ok": self.ok,
        }


def tilde_structure(s: AutomaticStructure, phi, max_len: int) -> TildeStructure:
    """Automatic structure on φ's source from a quasiconvex image and finite kernel.

    ``s`` is a structure on φ's target. Each B-letter b of the rewriting of
    L″(Im φ) is replaced by the C-letter naming the shortlex-least preimage
    of bπ, and every kernel representative is appended.
    """
    src, tgt = phi.source, phi.target
    if not tgt.same_elements(s.group):
        raise ContractError("the structure must live on the homomorphism's target")
    kernel = finite_kernel(phi, max_len)
    H = image_subgroup(phi, metric_group=s.group)
    qrep = quasiconvexity(s, H, max_len)
    if not qrep.ok:
        raise PreconditionError(f"image of {phi.name} is not quasiconvex at bound {max_len}",
                                witness=qrep)
    r = rewrite_build(s, H, max_len, qrep)
    A1 = src.alphabet
    limit = max(2 * max_len, 4)
    pre = {}
    C = {}
    for b in r.B:
        w = shortlex_preimage(phi, r.letter_value(b), limit)
        if w is None:
            raise ResourceError(f"no preimage of {fsa.fmt_symbol(b)} within radius {limit}")
        label = w[0] if len(w) == 1 else f"({fmt_word(w)})"
        pre[b] = label
        C[label] = w
    symbols = list(A1) + [c for c in C if c not in A1]
    AC = Alphabet(symbols, dict(A1.inverses))
    gens = dict(src.gens)
    gens.update({c: src.evaluate(w) for c, w in C.items() if c not in A1})
    gtil = src.remark(AC, gens)
    kernel_words = sorted({src.shortlex_word(x) for x in kernel}, key=A1.key)
    head = fsa.relabel(r.l2, pre, AC)
    lang = fsa.concatenate(head, fsa.from_words(AC, kernel_words))
    tilde = AutomaticStructure(gtil, lang, f"{s.name}~")

    checks = {"rational": _rational_check(r, pre, kernel_words, tilde, max_len),
              "section": check_rational_section(tilde, max(1, max_len // 2)),
              "ft": ft_constant(tilde, max_len)}
    induced = AutomaticStructure(tgt.remark(AC, {c: phi.apply(x) for c, x in gtil.gens.items()}),
                                 lang, f"{tilde.name}^({phi.name})")
    u = union_structure(induced, r.structure_B())
    union_rep = ft_scan(u.catalog(max_len, s.group), max_len, kind="union_ft",
                        notes=["L̃^(φ) ∪ L″, distances in the target's generators"])
    checks["union"] = union_rep
    return TildeStructure(tilde, r, C, pre, kernel_words, checks, qrep)


def _rational_check(r, pre, kernel_words, tilde, max_len) -> CheckReport:
    """Automaton language against the literal relabel-and-append definition."""
    literal = set()
    for w in fsa.enumerate_words(r.l2, max_len):
        head = tuple(pre[b] for b in w)
        for kw in kernel_words:
            if len(head) + len(kw) <= max_len:
                literal.add(head + tuple(kw))
    built = set(fsa.enumerate_words(tilde.dfa, max_len))
    diff = sorted(literal ^ built, key=lambda w: (len(w), [fsa.fmt_symbol(x) for x in w]))
    if diff:
        w = diff[0]
        side = "literal only" if w in literal else "automaton only"
        return CheckReport("rational", FAILURE, None, max_len,
                           {"word": fmt_word(w), "side": side}, [], [], {}, {"word": w})
    return CheckReport("rational", CONSTANT, len(built), max_len, None, [],
                       [f"{len(built)} words agree up to length {max_len}"], {"states": tilde.dfa.n})
