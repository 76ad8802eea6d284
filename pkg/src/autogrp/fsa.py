"""Finite-state automata over ordered finite alphabets.

Automata are immutable values. States are the integers ``0..n-1``; a
transition table maps ``(state, symbol)`` to a frozenset of targets and an
optional epsilon table maps a state to a frozenset of targets. Every
operation returns a new automaton and all public guarantees are stated on
recognised languages, not on state graphs.
"""
from __future__ import annotations

import os
from collections import deque
from typing import Hashable, Iterable, Sequence

from .errors import ContractError, ResourceError

PAD = "$"
DEFAULT_STATE_CAP = 100_000

Symbol = Hashable
Word = tuple


def state_cap() -> int:
    raw = os.environ.get("AUTOGRP_STATE_CAP")
    if raw:
        try:
            return int(raw)
        except ValueError:
            raise ContractError(f"AUTOGRP_STATE_CAP must be an integer, got {raw!r}")
    return DEFAULT_STATE_CAP


def fmt_symbol(sym) -> str:
    if isinstance(sym, tuple):
        return "(" + ",".join(fmt_symbol(s) for s in sym) + ")"
    return str(sym)


def fmt_word(word) -> str:
    if not word:
        return "ε"
    if all(isinstance(s, str) and len(s) == 1 for s in word):
        return "".join(word)
    return " ".join(fmt_symbol(s) for s in word)


class Alphabet:
    """Ordered list of distinct symbols with an optional formal-inverse map.

    The inverse map may be partial (a letter such as ``a2`` in ``{a, A, a2}``
    has no formal inverse) but wherever it is defined it is an involution.
    """

    def __init__(self, symbols: Iterable[Symbol], inverses: dict | None = None,
                 allow_pad: bool = False):
        self.symbols = tuple(symbols)
        if len(set(self.symbols)) != len(self.symbols):
            raise ContractError(f"alphabet symbols are not distinct: {self.symbols}")
        if not allow_pad and PAD in self.symbols:
            raise ContractError("the symbol '$' is reserved for padding")
        self.index = {s: i for i, s in enumerate(self.symbols)}
        inv = dict(inverses or {})
        for s, t in inv.items():
            if s not in self.index or t not in self.index:
                raise ContractError(f"inverse pair ({s!r}, {t!r}) uses unknown symbols")
            if inv.get(t) != s:
                raise ContractError(f"inverse map is not an involution at {s!r}")
        self.inverses = inv

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __contains__(self, sym):
        return sym in self.index

    def __eq__(self, other):
        return (isinstance(other, Alphabet) and self.symbols == other.symbols
                and self.inverses == other.inverses)

    def __hash__(self):
        return hash(self.symbols)

    def __repr__(self):
        return f"Alphabet({[fmt_symbol(s) for s in self.symbols]})"

    @property
    def involutive(self) -> bool:
        return len(self.inverses) == len(self.symbols)

    def inverse(self, sym):
        return self.inverses.get(sym)

    def invert_word(self, word: Sequence) -> Word:
        out = []
        for s in reversed(word):
            t = self.inverses.get(s)
            if t is None:
                raise ContractError(f"symbol {fmt_symbol(s)} has no formal inverse")
            out.append(t)
        return tuple(out)

    def check_word(self, word: Sequence) -> Word:
        for s in word:
            if s not in self.index:
                raise ContractError(f"symbol {fmt_symbol(s)} is not in {self!r}")
        return tuple(word)

    def parse(self, text: str) -> Word:
        """Tokenise ``text`` into symbols.

        Whitespace-separated tokens are taken literally; a token without
        spaces is split greedily by the longest matching symbol name.
        """
        text = text.strip()
        if text in ("", "ε", "1", "e") and text not in self.index:
            return ()
        names = sorted((s for s in self.symbols if isinstance(s, str)), key=len, reverse=True)
        out = []
        for token in text.split():
            i = 0
            while i < len(token):
                for name in names:
                    if token.startswith(name, i):
                        out.append(name)
                        i += len(name)
                        break
                else:
                    raise ContractError(f"cannot parse {token[i:]!r} over {self!r}")
        return tuple(out)

    def key(self, word: Sequence) -> tuple:
        """Shortlex sort key."""
        return (len(word), tuple(self.index[s] for s in word))

    def to_json(self):
        return [_sym_to_json(s) for s in self.symbols]


class ConvolutionAlphabet(Alphabet):
    """The padded alphabet (A×B) ∪ (A×{$}) ∪ ({$}×B)."""

    def __init__(self, left: Alphabet, right: Alphabet):
        if PAD in left or PAD in right:
            raise ContractError("'$' must not belong to either component alphabet")
        self.left = left
        self.right = right
        pairs = [(x, y) for x in left for y in right]
        pairs += [(x, PAD) for x in left]
        pairs += [(PAD, y) for y in right]
        inv = {}
        for x, y in pairs:
            ix = PAD if x == PAD else left.inverse(x)
            iy = PAD if y == PAD else right.inverse(y)
            if ix is not None and iy is not None:
                inv[(x, y)] = (ix, iy)
        super().__init__(pairs, inv, allow_pad=False)


def _sym_to_json(s):
    if isinstance(s, tuple):
        return [_sym_to_json(t) for t in s]
    return s


def _sym_from_json(s):
    if isinstance(s, list):
        return tuple(_sym_from_json(t) for t in s)
    return s


class Automaton:
    """A (possibly nondeterministic, possibly epsilon) finite automaton."""

    __slots__ = ("alphabet", "n", "initial", "finals", "delta", "eps")

    def __init__(self, alphabet: Alphabet, n: int, initial: int, finals: Iterable[int],
                 transitions: Iterable[tuple] = (), eps: Iterable[tuple] = ()):
        if not 0 <= initial < max(n, 1) or n < 1:
            raise ContractError("initial state must be one of the states")
        delta: dict = {}
        for p, s, q in transitions:
            if s not in alphabet:
                raise ContractError(f"transition symbol {fmt_symbol(s)} not in alphabet")
            if not (0 <= p < n and 0 <= q < n):
                raise ContractError(f"transition ({p}, {q}) leaves the state set")
            delta.setdefault((p, s), set()).add(q)
        epsd: dict = {}
        for p, q in eps:
            if not (0 <= p < n and 0 <= q < n):
                raise ContractError("epsilon move leaves the state set")
            if p != q:
                epsd.setdefault(p, set()).add(q)
        fin = frozenset(finals)
        if any(not 0 <= f < n for f in fin):
            raise ContractError("final states must be states")
        self.alphabet = alphabet
        self.n = n
        self.initial = initial
        self.finals = fin
        self.delta = {k: frozenset(v) for k, v in delta.items()}
        self.eps = {k: frozenset(v) for k, v in epsd.items()}

    @property
    def deterministic(self) -> bool:
        return not self.eps and all(len(v) <= 1 for v in self.delta.values())

    def transitions(self):
        for (p, s), qs in self.delta.items():
            for q in qs:
                yield p, s, q

    def step(self, p: int, sym) -> int | None:
        """Deterministic successor, or None."""
        qs = self.delta.get((p, sym))
        if not qs:
            return None
        return next(iter(qs))

    def __repr__(self):
        kind = "DFA" if self.deterministic else "NFA"
        return f"<{kind} {self.n} states over {len(self.alphabet)} symbols>"


# ---------------------------------------------------------------- builders

def empty(alphabet: Alphabet) -> Automaton:
    return Automaton(alphabet, 1, 0, ())


def epsilon(alphabet: Alphabet) -> Automaton:
    return Automaton(alphabet, 1, 0, (0,))


def universal(alphabet: Alphabet) -> Automaton:
    return Automaton(alphabet, 1, 0, (0,), [(0, s, 0) for s in alphabet])


def literal(alphabet: Alphabet, word: Sequence) -> Automaton:
    word = alphabet.check_word(word)
    trans = [(i, s, i + 1) for i, s in enumerate(word)]
    return Automaton(alphabet, len(word) + 1, 0, (len(word),), trans)


def from_words(alphabet: Alphabet, words: Iterable[Sequence]) -> Automaton:
    """Trie automaton for a finite language."""
    children: list[dict] = [{}]
    finals = set()
    for w in words:
        node = 0
        for s in alphabet.check_word(w):
            nxt = children[node].get(s)
            if nxt is None:
                nxt = len(children)
                children.append({})
                children[node][s] = nxt
            node = nxt
        finals.add(node)
    trans = [(p, s, q) for p, ch in enumerate(children) for s, q in ch.items()]
    return Automaton(alphabet, len(children), 0, finals, trans)


def symbol_star(alphabet: Alphabet, word: Sequence) -> Automaton:
    """(word)*"""
    return star(literal(alphabet, word))


def regex(alphabet: Alphabet, pattern: str) -> Automaton:
    """Minimal regular-expression builder: literals, ``|``, ``*``, parentheses.

    ``ε`` denotes the empty word; symbols are matched by longest name.
    """
    names = sorted((s for s in alphabet if isinstance(s, str)), key=len, reverse=True)
    toks = []
    i = 0
    while i < len(pattern):
        c = pattern[i]
        if c.isspace():
            i += 1
            continue
        if c in "()|*":
            toks.append(c)
            i += 1
            continue
        if c == "ε":
            toks.append(("eps",))
            i += 1
            continue
        for name in names:
            if pattern.startswith(name, i):
                toks.append(("sym", name))
                i += len(name)
                break
        else:
            raise ContractError(f"cannot parse regex at {pattern[i:]!r}")
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def parse_union():
        nonlocal pos
        a = parse_concat()
        while peek() == "|":
            pos += 1
            a = union(a, parse_concat())
        return a

    def parse_concat():
        a = epsilon(alphabet)
        while peek() is not None and peek() not in ("|", ")"):
            a = concatenate(a, parse_star())
        return a

    def parse_star():
        nonlocal pos
        a = parse_atom()
        while peek() == "*":
            pos += 1
            a = star(a)
        return a

    def parse_atom():
        nonlocal pos
        t = peek()
        if t == "(":
            pos += 1
            a = parse_union()
            if peek() != ")":
                raise ContractError("unbalanced parentheses in regex")
            pos += 1
            return a
        if isinstance(t, tuple):
            pos += 1
            return epsilon(alphabet) if t[0] == "eps" else literal(alphabet, (t[1],))
        raise ContractError(f"unexpected token {t!r} in regex")

    result = parse_union()
    if pos != len(toks):
        raise ContractError("trailing input in regex")
    return minimize(result)


# ----------------------------------------------------------- core algorithms

def _closure(a: Automaton, states: Iterable[int]) -> frozenset:
    seen = set(states)
    stack = list(seen)
    while stack:
        p = stack.pop()
        for q in a.eps.get(p, ()):
            if q not in seen:
                seen.add(q)
                stack.append(q)
    return frozenset(seen)


def determinize(a: Automaton, cap: int | None = None) -> Automaton:
    """Subset construction; the result has no dead (empty) subset state."""
    if a.deterministic:
        return a
    cap = state_cap() if cap is None else cap
    start = _closure(a, (a.initial,))
    ids = {start: 0}
    order = [start]
    trans = []
    queue = deque([start])
    while queue:
        subset = queue.popleft()
        p = ids[subset]
        for s in a.alphabet:
            tgt = set()
            for q in subset:
                tgt.update(a.delta.get((q, s), ()))
            if not tgt:
                continue
            tgt = _closure(a, tgt)
            if tgt not in ids:
                if len(ids) >= cap:
                    raise ResourceError(f"subset construction exceeded the state cap ({cap})")
                ids[tgt] = len(order)
                order.append(tgt)
                queue.append(tgt)
            trans.append((p, s, ids[tgt]))
    finals = [i for i, sub in enumerate(order) if sub & a.finals]
    return Automaton(a.alphabet, len(order), 0, finals, trans)


def complete(a: Automaton) -> Automaton:
    """Deterministic and complete (adds a sink only when needed)."""
    d = determinize(a)
    missing = [(p, s) for p in range(d.n) for s in d.alphabet if (p, s) not in d.delta]
    if not missing:
        return d
    sink = d.n
    trans = list(d.transitions()) + [(p, s, sink) for p, s in missing]
    trans += [(sink, s, sink) for s in d.alphabet]
    return Automaton(d.alphabet, d.n + 1, d.initial, d.finals, trans)


def _reachable(a: Automaton) -> list[int]:
    seen = {a.initial}
    order = [a.initial]
    queue = deque([a.initial])
    while queue:
        p = queue.popleft()
        nxt = sorted(a.eps.get(p, ()))
        for s in a.alphabet:
            nxt.extend(sorted(a.delta.get((p, s), ())))
        for q in nxt:
            if q not in seen:
                seen.add(q)
                order.append(q)
                queue.append(q)
    return order


def _coreachable(a: Automaton) -> set[int]:
    rev: dict = {}
    for p, _, q in a.transitions():
        rev.setdefault(q, set()).add(p)
    for p, qs in a.eps.items():
        for q in qs:
            rev.setdefault(q, set()).add(p)
    seen = set(a.finals)
    stack = list(seen)
    while stack:
        q = stack.pop()
        for p in rev.get(q, ()):
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def _renumber(a: Automaton, keep: list[int]) -> Automaton:
    ids = {old: new for new, old in enumerate(keep)}
    trans = [(ids[p], s, ids[q]) for p, s, q in a.transitions() if p in ids and q in ids]
    eps = [(ids[p], ids[q]) for p, qs in a.eps.items() for q in qs if p in ids and q in ids]
    finals = [ids[f] for f in a.finals if f in ids]
    return Automaton(a.alphabet, len(keep), ids[a.initial], finals, trans, eps)


def trim(a: Automaton) -> Automaton:
    """Remove states that are unreachable or cannot reach a final state."""
    co = _coreachable(a)
    keep = [p for p in _reachable(a) if p in co]
    if a.initial not in co:
        return empty(a.alphabet)
    return _renumber(a, keep)


def minimize(a: Automaton) -> Automaton:
    """Minimal complete DFA (Moore partition refinement)."""
    d = complete(a)
    d = _renumber(d, _reachable(d))
    syms = list(d.alphabet)
    block = [1 if p in d.finals else 0 for p in range(d.n)]
    while True:
        sigs = {}
        new_block = []
        for p in range(d.n):
            sig = (block[p],) + tuple(block[d.step(p, s)] for s in syms)
            new_block.append(sigs.setdefault(sig, len(sigs)))
        stable = len(sigs) == len(set(block))
        block = new_block
        if stable:
            break
    reps = {}
    for p in range(d.n):
        reps.setdefault(block[p], p)
    trans = {(block[p], s, block[d.step(p, s)]) for p in reps.values() for s in syms}
    finals = {block[p] for p in d.finals}
    m = Automaton(d.alphabet, len(reps), block[d.initial], finals, trans)
    return _renumber(m, _reachable(m))


def _product(a: Automaton, b: Automaton, accept) -> Automaton:
    if a.alphabet.symbols != b.alphabet.symbols:
        raise ContractError("boolean operations need automata over the same alphabet")
    da, db = complete(a), complete(b)
    cap = state_cap()
    start = (da.initial, db.initial)
    ids = {start: 0}
    order = [start]
    trans = []
    queue = deque([start])
    while queue:
        p, q = pair = queue.popleft()
        for s in da.alphabet:
            t = (da.step(p, s), db.step(q, s))
            if t not in ids:
                if len(ids) >= cap:
                    raise ResourceError(f"product construction exceeded the state cap ({cap})")
                ids[t] = len(order)
                order.append(t)
                queue.append(t)
            trans.append((ids[pair], s, ids[t]))
    finals = [i for i, (p, q) in enumerate(order) if accept(p in da.finals, q in db.finals)]
    return Automaton(a.alphabet, len(order), 0, finals, trans)


def boolean_op(a: Automaton, b: Automaton, kind: str) -> Automaton:
    ops = {
        "union": lambda x, y: x or y,
        "intersection": lambda x, y: x and y,
        "difference": lambda x, y: x and not y,
    }
    if kind not in ops:
        raise ContractError(f"unknown boolean operation {kind!r}")
    return _product(a, b, ops[kind])


def union(a, b):
    return boolean_op(a, b, "union")


def intersection(a, b):
    return boolean_op(a, b, "intersection")


def difference(a, b):
    return boolean_op(a, b, "difference")


def complement(a: Automaton) -> Automaton:
    d = complete(a)
    return Automaton(d.alphabet, d.n, d.initial, set(range(d.n)) - d.finals, d.transitions())


def _disjoint(a: Automaton, b: Automaton):
    """Transitions and eps moves of a and b with b shifted by a.n."""
    off = a.n
    trans = list(a.transitions()) + [(p + off, s, q + off) for p, s, q in b.transitions()]
    eps = [(p, q) for p, qs in a.eps.items() for q in qs]
    eps += [(p + off, q + off) for p, qs in b.eps.items() for q in qs]
    return off, trans, eps


def concatenate(a: Automaton, b: Automaton) -> Automaton:
    if a.alphabet.symbols != b.alphabet.symbols:
        raise ContractError("concatenation needs automata over the same alphabet")
    off, trans, eps = _disjoint(a, b)
    eps += [(f, b.initial + off) for f in a.finals]
    finals = [f + off for f in b.finals]
    return Automaton(a.alphabet, a.n + b.n, a.initial, finals, trans, eps)


def star(a: Automaton) -> Automaton:
    new = a.n
    trans = list(a.transitions())
    eps = [(p, q) for p, qs in a.eps.items() for q in qs]
    eps.append((new, a.initial))
    eps += [(f, new) for f in a.finals]
    return Automaton(a.alphabet, a.n + 1, new, [new], trans, eps)


def relabel(a: Automaton, mapping: dict, alphabet: Alphabet) -> Automaton:
    """Rename every transition symbol through ``mapping`` (letter to letter)."""
    trans = [(p, mapping[s], q) for p, s, q in a.transitions()]
    eps = [(p, q) for p, qs in a.eps.items() for q in qs]
    return Automaton(alphabet, a.n, a.initial, a.finals, trans, eps)


def with_alphabet(a: Automaton, alphabet: Alphabet) -> Automaton:
    """The same language viewed over a larger alphabet."""
    for s in a.alphabet:
        if s not in alphabet:
            raise ContractError(f"symbol {fmt_symbol(s)} missing from the target alphabet")
    eps = [(p, q) for p, qs in a.eps.items() for q in qs]
    return Automaton(alphabet, a.n, a.initial, a.finals, a.transitions(), eps)


def remove_epsilon(a: Automaton) -> Automaton:
    if not a.eps:
        return a
    trans = set()
    finals = set()
    for p in range(a.n):
        cl = _closure(a, (p,))
        if cl & a.finals:
            finals.add(p)
        for q in cl:
            for s in a.alphabet:
                for r in a.delta.get((q, s), ()):
                    trans.add((p, s, r))
    return Automaton(a.alphabet, a.n, a.initial, finals, trans)


def convolve(l1: Automaton, l2: Automaton) -> Automaton:
    """Automaton for {u ⋄ v : u ∈ L(l1), v ∈ L(l2)} over the padded alphabet."""
    conv = ConvolutionAlphabet(l1.alphabet, l2.alphabet)
    d1, d2 = trim(determinize(l1)), trim(determinize(l2))
    done = -1
    start = (d1.initial, d2.initial)
    ids = {start: 0}
    order = [start]
    trans = []
    queue = deque([start])
    cap = state_cap()

    def visit(t):
        if t not in ids:
            if len(ids) >= cap:
                raise ResourceError(f"convolution exceeded the state cap ({cap})")
            ids[t] = len(order)
            order.append(t)
            queue.append(t)
        return ids[t]

    while queue:
        p, q = pair = queue.popleft()
        src = ids[pair]
        for x, y in conv:
            if x != PAD and y != PAD:
                if p == done or q == done:
                    continue
                p2, q2 = d1.step(p, x), d2.step(q, y)
            elif y == PAD:
                if p == done or (q != done and q not in d2.finals):
                    continue
                p2, q2 = d1.step(p, x), done
            else:
                if q == done or (p != done and p not in d1.finals):
                    continue
                p2, q2 = done, d2.step(q, y)
            if p2 is None or q2 is None:
                continue
            trans.append((src, (x, y), visit((p2, q2))))
    finals = []
    for i, (p, q) in enumerate(order):
        ok1 = p == done or p in d1.finals
        ok2 = q == done or q in d2.finals
        if ok1 and ok2:
            finals.append(i)
    return Automaton(conv, len(order), 0, finals, trans)


def convolve_words(u: Sequence, v: Sequence) -> Word:
    n = max(len(u), len(v))
    return tuple((u[i] if i < len(u) else PAD, v[i] if i < len(v) else PAD) for i in range(n))


def project(word: Sequence, side: int) -> Word:
    """Strip padding from one component of a convolution word."""
    return tuple(s[side] for s in word if s[side] != PAD)


def prefix_closure(a: Automaton) -> Automaton:
    t = trim(a)
    if not t.finals:
        return t
    eps = [(p, q) for p, qs in t.eps.items() for q in qs]
    return Automaton(t.alphabet, t.n, t.initial, range(t.n), t.transitions(), eps)


def suffix_closure(a: Automaton) -> Automaton:
    t = trim(a)
    if not t.finals:
        return t
    new = t.n
    eps = [(p, q) for p, qs in t.eps.items() for q in qs]
    eps += [(new, p) for p in range(t.n)]
    return Automaton(t.alphabet, t.n + 1, new, t.finals, t.transitions(), eps)


def factor_closure(a: Automaton) -> Automaton:
    return prefix_closure(suffix_closure(a))


# ---------------------------------------------------------------- queries

def accepts(a: Automaton, word: Sequence) -> bool:
    cur = _closure(a, (a.initial,))
    for s in word:
        if s not in a.alphabet:
            return False
        nxt = set()
        for p in cur:
            nxt.update(a.delta.get((p, s), ()))
        if not nxt:
            return False
        cur = _closure(a, nxt)
    return bool(cur & a.finals)


def is_empty(a: Automaton) -> bool:
    return not (set(_reachable(a)) & a.finals)


def co_depths(d: Automaton) -> dict:
    """Length of the shortest accepted continuation from each state."""
    rev: dict = {}
    for p, _, q in d.transitions():
        rev.setdefault(q, set()).add(p)
    dist = {f: 0 for f in d.finals}
    queue = deque(d.finals)
    while queue:
        q = queue.popleft()
        for p in rev.get(q, ()):
            if p not in dist:
                dist[p] = dist[q] + 1
                queue.append(p)
    return dist


def enumerate_words(a: Automaton, max_len: int) -> list:
    """All accepted words of length at most ``max_len`` in shortlex order."""
    if max_len < 0:
        raise ContractError("max_len must be non-negative")
    d = trim(determinize(a))
    if not d.finals:
        return []
    co = co_depths(d)
    out = []
    layer = [((), d.initial)]
    for depth in range(max_len + 1):
        nxt = []
        for word, p in layer:
            if p in d.finals:
                out.append(word)
            if depth == max_len:
                continue
            for s in d.alphabet:
                q = d.step(p, s)
                if q is not None and depth + 1 + co[q] <= max_len:
                    nxt.append((word + (s,), q))
        layer = nxt
    return out


# ------------------------------------------------------------ serialization

def to_json(a: Automaton) -> dict:
    b = remove_epsilon(a)
    idx = b.alphabet.index
    trans = sorted(b.transitions(), key=lambda t: (t[0], idx[t[1]], t[2]))
    doc = {
        "alphabet": b.alphabet.to_json(),
        "states": b.n,
        "initial": b.initial,
        "finals": sorted(b.finals),
        "transitions": [[p, _sym_to_json(s), q] for p, s, q in trans],
    }
    if b.alphabet.inverses:
        doc["inverses"] = [[_sym_to_json(s), _sym_to_json(t)]
                           for s, t in b.alphabet.inverses.items() if idx[s] <= idx[t]]
    return doc


def from_json(doc: dict) -> Automaton:
    syms = [_sym_from_json(s) for s in doc["alphabet"]]
    inv = {}
    for s, t in doc.get("inverses", []):
        s, t = _sym_from_json(s), _sym_from_json(t)
        inv[s] = t
        inv[t] = s
    alphabet = Alphabet(syms, inv)
    trans = [(p, _sym_from_json(s), q) for p, s, q in doc["transitions"]]
    return Automaton(alphabet, doc["states"], doc["initial"], doc["finals"], trans)
