"""Evaluable group models with marked generating alphabets.

Every model stores elements in a canonical hashable form so that equality
of elements is equality of Python values. A *marking* is an alphabet plus a
map from its symbols to elements; distances are taken in the Cayley graph
of the marking with undirected edges, so ``d(g, g·a) = 1`` whether or not
the alphabet contains a formal inverse of ``a``.
"""
from __future__ import annotations

import copy
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import ContractError, ResourceError
from .fsa import PAD, Alphabet, ConvolutionAlphabet, fmt_word

DEFAULT_BALL_CAP = 3_000_000


def ball_cap() -> int:
    raw = os.environ.get("AUTOGRP_BALL_CAP")
    return int(raw) if raw else DEFAULT_BALL_CAP


class _Exceeds:
    """Result of a capped distance computation that ran past its cap."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "EXCEEDS"

    def __bool__(self):
        return False


EXCEEDS = _Exceeds()


class _Cayley:
    """Lazily grown BFS ball around the identity for one marking."""

    def __init__(self, group: "GroupModel"):
        self.group = group
        steps = []
        for s in group.alphabet:
            g = group.gens[s]
            steps.append(g)
            steps.append(group.invert(g))
        uniq = []
        seen = set()
        for g in steps:
            if g not in seen and g != group.identity:
                seen.add(g)
                uniq.append(g)
        self.steps = uniq
        self.dist = {group.identity: 0}
        self.layers = [[group.identity]]
        self.complete = False

    def grow_to(self, radius: int):
        g = self.group
        cap = ball_cap()
        while len(self.layers) <= radius and not self.complete:
            nxt = []
            r = len(self.layers)
            for x in self.layers[-1]:
                for s in self.steps:
                    y = g.multiply(x, s)
                    if y not in self.dist:
                        self.dist[y] = r
                        nxt.append(y)
            if not nxt:
                self.complete = True
                break
            if len(self.dist) > cap:
                raise ResourceError(f"ball of radius {r} exceeds the ball cap ({cap})")
            self.layers.append(nxt)

    def norm(self, x, cap):
        while True:
            d = self.dist.get(x)
            if d is not None:
                return d if cap is None or d <= cap else EXCEEDS
            if self.complete:
                raise ContractError(f"{self.group.format(x)} is not generated by the marking")
            if cap is not None and len(self.layers) > cap:
                return EXCEEDS
            self.grow_to(len(self.layers))


class _WordTable:
    """Shortlex-least words over the forward letters, by BFS in symbol order."""

    def __init__(self, group: "GroupModel"):
        self.group = group
        self.words = {group.identity: ()}
        self.layer = [group.identity]
        self.complete = False

    def word(self, x, limit=None):
        g = self.group
        cap = ball_cap()
        while x not in self.words:
            if self.complete:
                raise ContractError(f"{g.format(x)} is not a monoid product of the marking")
            if limit is not None and self.layer and len(self.words[self.layer[0]]) >= limit:
                return None
            nxt = []
            for y in self.layer:
                wy = self.words[y]
                for s in g.alphabet:
                    z = g.multiply(y, g.gens[s])
                    if z not in self.words:
                        self.words[z] = wy + (s,)
                        nxt.append(z)
            if not nxt:
                self.complete = True
            if len(self.words) > cap:
                raise ResourceError(f"word table exceeds the ball cap ({cap})")
            self.layer = nxt
        return self.words[x]


class GroupModel:
    """Base class: subclasses provide identity, multiply, invert, format."""

    kind = "abstract"

    def __init__(self, alphabet: Alphabet, gens: dict):
        self.alphabet = alphabet
        self.gens = dict(gens)
        for s in alphabet:
            if s not in self.gens:
                raise ContractError(f"no image given for generator {s!r}")
        for s, t in alphabet.inverses.items():
            if self.multiply(self.gens[s], self.gens[t]) != self.identity:
                raise ContractError(f"formal inverses {s!r}, {t!r} do not multiply to 1")
        if "_native_gens" not in self.__dict__:
            self._native_gens = dict(self.gens)
        self._cayley = None
        self._words = None
        self._fast = False

    @property
    def native(self) -> bool:
        """True unless the model has been remarked away from its defaults."""
        return self.gens == self._native_gens

    # -- group operations, overridden
    identity = None

    def multiply(self, g, h):
        raise NotImplementedError

    def invert(self, g):
        raise NotImplementedError

    def format(self, g) -> str:
        return repr(g)

    def same_elements(self, other: "GroupModel") -> bool:
        """True when both models share the element representation."""
        return self.elements_key() == other.elements_key()

    def elements_key(self):
        raise NotImplementedError

    # -- derived
    def equals(self, g, h) -> bool:
        return g == h

    def gen(self, sym):
        try:
            return self.gens[sym]
        except KeyError:
            raise ContractError(f"symbol {sym!r} is not in the marked alphabet") from None

    def evaluate(self, word: Sequence):
        g = self.identity
        for s in word:
            g = self.multiply(g, self.gen(s))
        return g

    def evaluate_prefixes(self, word: Sequence, base=None) -> list:
        g = self.identity if base is None else base
        out = [g]
        for s in word:
            g = self.multiply(g, self.gen(s))
            out.append(g)
        return out

    def parse(self, text: str):
        return self.alphabet.parse(text)

    def conjugate(self, u, x):
        """u x u⁻¹"""
        return self.multiply(self.multiply(u, x), self.invert(u))

    def remark(self, alphabet: Alphabet, gens: dict) -> "GroupModel":
        """The same group with a different marked generating alphabet."""
        other = copy.copy(self)
        GroupModel.__init__(other, alphabet, gens)
        return other

    def remark_words(self, images: dict, inverses: dict | None = None) -> "GroupModel":
        """Remark with symbols given as words over the current alphabet."""
        alphabet = Alphabet(list(images), inverses)
        gens = {s: self.evaluate(self.alphabet.check_word(w)) for s, w in images.items()}
        return self.remark(alphabet, gens)

    # -- metric
    def _fast_norm(self):
        return None

    def norm(self, g, cap=None):
        f = self._fast
        if f is False:
            f = self._fast = self._fast_norm()
        if f is not None:
            n = f(g)
            return n if cap is None or n <= cap else EXCEEDS
        if self._cayley is None:
            self._cayley = _Cayley(self)
        return self._cayley.norm(g, cap)

    def distance(self, g, h, cap=None):
        return self.norm(self.multiply(self.invert(g), h), cap)

    def ball(self, radius: int) -> list:
        """Elements of norm ≤ radius, in BFS order."""
        if radius < 0:
            raise ContractError("radius must be non-negative")
        if self._cayley is None:
            self._cayley = _Cayley(self)
        c = self._cayley
        c.grow_to(radius)
        out = []
        for layer in c.layers[:radius + 1]:
            out.extend(layer)
        return out

    def sphere_sizes(self, radius: int) -> list:
        self.ball(radius)
        return [len(layer) for layer in self._cayley.layers[:radius + 1]]

    def shortlex_word(self, g, limit=None):
        """Shortlex-least word over the marked alphabet evaluating to g."""
        if self._words is None:
            self._words = _WordTable(self)
        return self._words.word(g, limit)

    def format_word(self, word) -> str:
        return fmt_word(word)

    def describe(self) -> str:
        return f"{self.kind} group"

    def __repr__(self):
        return f"<{self.describe()} marked by {list(self.alphabet)}>"


# --------------------------------------------------------------- free groups

def default_letters(rank: int) -> list:
    if rank > 26:
        return [f"x{i + 1}" for i in range(rank)]
    return [chr(ord("a") + i) for i in range(rank)]


def _inverse_name(name: str) -> str:
    if len(name) == 1 and name.isalpha():
        return name.swapcase()
    return name + "^-1"


class FreeGroup(GroupModel):
    """Free group; elements are freely reduced tuples of ±(i+1)."""

    kind = "free"
    identity = ()

    def __init__(self, rank: int, names: Sequence[str] | None = None,
                 inverse_names: Sequence[str] | None = None):
        if rank < 0:
            raise ContractError("rank must be non-negative")
        self.rank = rank
        names = list(names) if names else default_letters(rank)
        inv = list(inverse_names) if inverse_names else [_inverse_name(n) for n in names]
        if len(names) != rank or len(inv) != rank:
            raise ContractError("need one name and one inverse name per generator")
        self.names = names
        self.inverse_names = inv
        symbols = []
        inverses = {}
        gens = {}
        for i, (x, y) in enumerate(zip(names, inv)):
            symbols += [x, y]
            inverses[x] = y
            inverses[y] = x
            gens[x] = (i + 1,)
            gens[y] = (-(i + 1),)
        super().__init__(Alphabet(symbols, inverses), gens)

    def multiply(self, g, h):
        i = 0
        n = min(len(g), len(h))
        while i < n and g[-1 - i] == -h[i]:
            i += 1
        return g[:len(g) - i] + h[i:]

    def invert(self, g):
        return tuple(-x for x in reversed(g))

    def elements_key(self):
        return ("free", self.rank)

    def letter(self, x: int) -> str:
        return self.names[x - 1] if x > 0 else self.inverse_names[-x - 1]

    def element_word(self, g) -> tuple:
        """The reduced word of g over the standard letters."""
        return tuple(self.letter(x) for x in g)

    def element(self, word: Sequence[str]):
        """Evaluate a word over the standard letters regardless of the marking."""
        std = {}
        for i, (x, y) in enumerate(zip(self.names, self.inverse_names)):
            std[x] = (i + 1,)
            std[y] = (-(i + 1),)
        g = ()
        for s in word:
            if s not in std:
                raise ContractError(f"{s!r} is not a standard letter")
            g = self.multiply(g, std[s])
        return g

    def format(self, g) -> str:
        return fmt_word(self.element_word(g)) if g else "1"

    def is_standard(self) -> bool:
        vals = sorted(v for v in self.gens.values() if len(v) == 1)
        return (len(vals) == len(self.gens)
                and set(abs(v[0]) for v in vals) == set(range(1, self.rank + 1)))

    def _fast_norm(self):
        return len if self.is_standard() else None

    def shortlex_word(self, g, limit=None):
        if self.native:
            return self.element_word(g)
        return super().shortlex_word(g, limit)

    def describe(self):
        return f"free group of rank {self.rank}"


# ----------------------------------------------------- free abelian groups

class FreeAbelianGroup(GroupModel):
    """Z^rank with integer-vector elements."""

    kind = "free_abelian"

    def __init__(self, rank: int, names: Sequence[str] | None = None):
        self.rank = rank
        self.identity = (0,) * rank
        names = list(names) if names else default_letters(rank)
        symbols = []
        inverses = {}
        gens = {}
        for i, x in enumerate(names):
            y = _inverse_name(x)
            symbols += [x, y]
            inverses[x] = y
            inverses[y] = x
            e = [0] * rank
            e[i] = 1
            gens[x] = tuple(e)
            e[i] = -1
            gens[y] = tuple(e)
        self.names = names
        super().__init__(Alphabet(symbols, inverses), gens)

    def multiply(self, g, h):
        return tuple(x + y for x, y in zip(g, h))

    def invert(self, g):
        return tuple(-x for x in g)

    def elements_key(self):
        return ("free_abelian", self.rank)

    def format(self, g):
        return "(" + ",".join(str(x) for x in g) + ")"

    def _unit_letters(self):
        units = {}
        for s in self.alphabet:
            v = self.gens[s]
            nz = [i for i, x in enumerate(v) if x]
            if len(nz) != 1 or abs(v[nz[0]]) != 1:
                return None
            units.setdefault((nz[0], v[nz[0]]), s)
        if len(units) != 2 * self.rank:
            return None
        return units

    def _fast_norm(self):
        if self._unit_letters() is None:
            return None
        return lambda g: sum(abs(x) for x in g)

    def shortlex_word(self, g, limit=None):
        units = self._unit_letters()
        if units is None:
            return super().shortlex_word(g, limit)
        letters = []
        for i, x in enumerate(g):
            letters += [units[(i, 1 if x > 0 else -1)]] * abs(x)
        return tuple(sorted(letters, key=self.alphabet.index.__getitem__))

    def describe(self):
        return f"free abelian group of rank {self.rank}"


# ------------------------------------------------------------ finite groups

class FiniteGroup(GroupModel):
    """A finite group given by its multiplication table over 0..n-1."""

    kind = "finite"

    def __init__(self, table: Sequence[Sequence[int]], names: Sequence[str] | None = None,
                 generators: dict | None = None):
        n = len(table)
        self.table = [list(row) for row in table]
        if any(len(row) != n or any(not 0 <= x < n for x in row) for row in self.table):
            raise ContractError("multiplication table must be square over 0..n-1")
        ident = [e for e in range(n) if all(self.table[e][x] == x == self.table[x][e]
                                            for x in range(n))]
        if not ident:
            raise ContractError("multiplication table has no identity")
        self.identity = ident[0]
        self._inv = []
        for x in range(n):
            ys = [y for y in range(n) if self.table[x][y] == self.identity]
            if len(ys) != 1:
                raise ContractError(f"element {x} has no unique inverse")
            self._inv.append(ys[0])
        self.order = n
        if names is None:
            names = ["e" if x == self.identity else f"g{x}" for x in range(n)]
        self.names = list(names)
        if generators is None:
            generators = {self.names[x]: x for x in range(n)}
        symbols = list(generators)
        inverses = {}
        by_elem = {}
        for s in symbols:
            by_elem.setdefault(generators[s], s)
        for s in symbols:
            t = by_elem.get(self._inv[generators[s]])
            if t is not None and s not in inverses and t not in inverses:
                inverses[s] = t
                inverses[t] = s
        super().__init__(Alphabet(symbols, inverses), generators)

    def multiply(self, g, h):
        return self.table[g][h]

    def invert(self, g):
        return self._inv[g]

    def elements_key(self):
        return ("finite", tuple(map(tuple, self.table)))

    def elements(self):
        return list(range(self.order))

    def format(self, g):
        return self.names[g] if g < len(self.names) else str(g)

    def describe(self):
        return f"finite group of order {self.order}"


def cyclic_group(n: int, names=None) -> FiniteGroup:
    return FiniteGroup([[(i + j) % n for j in range(n)] for i in range(n)], names)


# ---------------------------------------------------------- direct products

class DirectProduct(GroupModel):
    """G1 × G2 with elements (g, h).

    ``marking="convolution"`` marks by the padded alphabet A_$ so that a
    convolution word evaluates componentwise; ``marking="disjoint"`` marks
    by A1 ∪ A2 (right symbols that collide get a trailing apostrophe).
    """

    kind = "product"

    def __init__(self, left: GroupModel, right: GroupModel, marking: str = "convolution"):
        self.left = left
        self.right = right
        self.marking = marking
        self.identity = (left.identity, right.identity)
        if marking == "convolution":
            alphabet = ConvolutionAlphabet(left.alphabet, right.alphabet)
            gens = {}
            for x, y in alphabet:
                gx = left.identity if x == PAD else left.gens[x]
                gy = right.identity if y == PAD else right.gens[y]
                gens[(x, y)] = (gx, gy)
        elif marking == "disjoint":
            symbols = list(left.alphabet)
            rename = {}
            for y in right.alphabet:
                name = y
                while name in symbols or name == PAD:
                    name = f"{name}'"
                rename[y] = name
                symbols.append(name)
            self.right_names = rename
            inverses = dict(left.alphabet.inverses)
            for y, z in right.alphabet.inverses.items():
                inverses[rename[y]] = rename[z]
            alphabet = Alphabet(symbols, inverses)
            gens = {x: (left.gens[x], right.identity) for x in left.alphabet}
            gens.update({rename[y]: (left.identity, right.gens[y]) for y in right.alphabet})
        else:
            raise ContractError(f"unknown product marking {marking!r}")
        super().__init__(alphabet, gens)

    def multiply(self, g, h):
        return (self.left.multiply(g[0], h[0]), self.right.multiply(g[1], h[1]))

    def invert(self, g):
        return (self.left.invert(g[0]), self.right.invert(g[1]))

    def elements_key(self):
        return ("product", self.left.elements_key(), self.right.elements_key())

    def format(self, g):
        return f"({self.left.format(g[0])}, {self.right.format(g[1])})"

    def shortlex_word(self, g, limit=None):
        if self.native and self.marking == "disjoint":
            # right-factor letters sort after the left ones, so they go last
            u = self.left.shortlex_word(g[0], limit)
            v = self.right.shortlex_word(g[1], limit)
            if u is None or v is None:
                return None
            w = tuple(u) + tuple(self.right_names[y] for y in v)
            return w if limit is None or len(w) <= limit else None
        return super().shortlex_word(g, limit)

    def pair(self, g, h):
        return (g, h)

    def _fast_norm(self):
        if self.marking == "disjoint" and self.native:
            return lambda g: self.left.norm(g[0]) + self.right.norm(g[1])
        if (self.marking == "convolution" and self.native
                and self.left.alphabet.involutive and self.right.alphabet.involutive):
            return lambda g: max(self.left.norm(g[0]), self.right.norm(g[1]))
        return None

    def describe(self):
        return f"direct product ({self.left.describe()}) x ({self.right.describe()})"


# ------------------------------------------------------ virtually free groups

class VirtuallyFreeGroup(GroupModel):
    """G = F b_0 ∪ F b_1 ∪ … ∪ F b_m with b_0 = 1.

    Elements are pairs (f, i) standing for f·b_i. The cocycle is given on
    generators: ``sigma[(i, x)] = (word, k)`` means b_i x = σ(i,x) b_k where x
    is a letter of F or a coset symbol β_j (with β_j ↦ b_j).
    """

    kind = "virtually_free"

    def __init__(self, free: FreeGroup, cosets: int, sigma: dict,
                 beta_names: Sequence[str] | None = None):
        self.free = free
        self.m = cosets
        self.beta = list(beta_names) if beta_names else [f"t{j}" for j in range(1, cosets + 1)]
        if len(self.beta) != cosets:
            raise ContractError("need one coset symbol per nontrivial coset")
        self.identity = ((), 0)
        fa = free.alphabet
        table = {}
        for (i, x), (w, k) in sigma.items():
            if not (0 <= i <= cosets and 0 <= k <= cosets):
                raise ContractError(f"coset index out of range in sigma entry ({i}, {x})")
            table[(i, x)] = (free.element(fa.parse(w) if isinstance(w, str) else w), k)
        for x in free.names:
            table.setdefault((0, x), (free.element((x,)), 0))
        for j, t in enumerate(self.beta, start=1):
            table.setdefault((0, t), ((), j))
        for i in range(cosets + 1):
            for x in free.names:
                if (i, x) not in table:
                    raise ContractError(f"sigma is missing the entry ({i}, {x})")
            for t in self.beta:
                if (i, t) not in table:
                    raise ContractError(f"sigma is missing the entry ({i}, {t})")
        # inverse letters: b_i x⁻¹ = σ(l,x)⁻¹ b_l where σ(l,x) lands in coset i
        for x, xi in zip(free.names, free.inverse_names):
            targets = {}
            for l in range(cosets + 1):
                f, i = table[(l, x)]
                if i in targets:
                    raise ContractError(f"letter {x} does not permute the cosets")
                targets[i] = (free.invert(f), l)
            for i in range(cosets + 1):
                table[(i, xi)] = targets[i]
        self.sigma = table
        self._binv = [((), 0)]
        for j, t in enumerate(self.beta, start=1):
            hits = [k for k in range(cosets + 1) if table[(k, t)][1] == 0]
            if len(hits) != 1:
                raise ContractError(f"coset symbol {t} has no unique inverse coset")
            k = hits[0]
            h = table[(k, t)][0]
            self._binv.append((free.invert(h), k))
        symbols = list(fa)
        inverses = dict(fa.inverses)
        gens = {x: (free.element((x,)), 0) for x in fa}
        for j, t in enumerate(self.beta, start=1):
            symbols.append(t)
            gens[t] = ((), j)
        for j, t in enumerate(self.beta, start=1):
            h, k = self._binv[j]
            if not h and k:
                u = self.beta[k - 1]
                if t not in inverses and u not in inverses:
                    inverses[t] = u
                    inverses[u] = t
        super().__init__(Alphabet(symbols, inverses), gens)

    def _act(self, i, word_elem):
        """b_i · f = σ(i, f) b_k for f ∈ F, extended letterwise."""
        free = self.free
        acc = ()
        for x in word_elem:
            f, i = self.sigma[(i, free.letter(x))]
            acc = free.multiply(acc, f)
        return acc, i

    def multiply(self, g, h):
        f, i = g
        e, k = h
        s, l = self._act(i, e)
        acc = self.free.multiply(f, s)
        if k:
            t, l = self.sigma[(l, self.beta[k - 1])]
            acc = self.free.multiply(acc, t)
        return (acc, l)

    def invert(self, g):
        f, i = g
        h, k = self._binv[i]
        s, l = self._act(k, self.free.invert(f))
        return (self.free.multiply(h, s), l)

    def elements_key(self):
        return ("virtually_free", self.free.rank, self.m,
                tuple(sorted((k, v) for k, v in self.sigma.items())))

    def format(self, g):
        f, i = g
        base = self.free.format(f)
        if i == 0:
            return base
        return self.beta[i - 1] if not f else f"{base}·{self.beta[i - 1]}"

    def describe(self):
        return f"virtually free group ({self.m + 1} cosets of a rank-{self.free.rank} free group)"


# ---------------------------------------------------------- geometry helpers

@dataclass
class PathTrace:
    """The path n ↦ x·(u^[n])π for n = 0..|u|."""

    group: GroupModel
    basepoint: object
    word: tuple
    points: list = field(default_factory=list)

    @classmethod
    def of(cls, group: GroupModel, word: Sequence, basepoint=None):
        base = group.identity if basepoint is None else basepoint
        word = tuple(word)
        return cls(group, base, word, group.evaluate_prefixes(word, base))


def gromov_product(group: GroupModel, u, v, cap=None):
    """(u|v) based at 1, as a Fraction (a half-integer)."""
    parts = [group.norm(u, cap), group.norm(v, cap), group.distance(u, v, cap)]
    if any(p is EXCEEDS for p in parts):
        return EXCEEDS
    return Fraction(parts[0] + parts[1] - parts[2], 2)


def compare_generating_sets(g: GroupModel, other: GroupModel, cap=None):
    """N_{A,A′} for two markings of the same group."""
    if not g.same_elements(other):
        raise ContractError("markings must belong to the same group")
    vals = [other.norm(g.gens[a], cap) for a in g.alphabet]
    vals += [g.norm(other.gens[a], cap) for a in other.alphabet]
    if any(v is EXCEEDS for v in vals):
        return EXCEEDS
    return max(vals, default=0)


# ----------------------------------------------------------------- JSON io

def group_from_json(doc: dict) -> GroupModel:
    kind = doc.get("kind")
    if kind == "free":
        rank = int(doc["rank"])
        names = inv = None
        alph = doc.get("alphabet")
        if alph:
            if len(alph) == rank:
                names = alph
            elif len(alph) == 2 * rank:
                names, inv = alph[0::2], alph[1::2]
            else:
                raise ContractError("free group alphabet must list rank or 2·rank symbols")
        g = FreeGroup(rank, names, inv)
    elif kind == "free_abelian":
        g = FreeAbelianGroup(int(doc["rank"]), doc.get("alphabet"))
    elif kind == "finite":
        gens = doc.get("generators")
        names = doc.get("names")
        if gens is None and doc.get("alphabet") is not None:
            gens = {s: i for i, s in enumerate(doc["alphabet"])}
            names = names or doc["alphabet"]
        g = FiniteGroup(doc["table"], names, gens)
    elif kind == "product":
        g = DirectProduct(group_from_json(doc["left"]), group_from_json(doc["right"]),
                          doc.get("marking", "convolution"))
    elif kind == "virtually_free":
        free = group_from_json(doc["free"])
        if not isinstance(free, FreeGroup):
            raise ContractError("virtually_free needs a free group")
        sigma = {}
        for i, x, w, k in doc["sigma"]:
            sigma[(int(i), x)] = (w, int(k))
        g = VirtuallyFreeGroup(free, int(doc["cosets"]), sigma, doc.get("beta"))
    else:
        raise ContractError(f"unknown group kind {kind!r}")
    mark = doc.get("marking_words")
    if mark:
        inverses = {}
        for s, t in mark.get("inverses", []):
            inverses[s] = t
            inverses[t] = s
        images = {s: g.parse(w) for s, w in mark["generators"].items()}
        g = g.remark_words(images, inverses)
    return g
