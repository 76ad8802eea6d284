import re

import pytest
from hypothesis import given, strategies as st

from autogrp import fsa
from autogrp.errors import ContractError, ResourceError
from autogrp.fsa import Alphabet, Automaton, ConvolutionAlphabet

from oracles import all_words, convolve_pairs, language

AB = Alphabet("ab")
XY = Alphabet("xy")


def lang(a, n):
    return {"".join(w) for w in fsa.enumerate_words(a, n)}


def brute(a, letters, n):
    return {w for w in all_words(letters, n) if fsa.accepts(a, tuple(w))}


@st.composite
def automata(draw, alphabet=AB, max_states=6):
    n = draw(st.integers(1, max_states))
    state = st.integers(0, n - 1)
    trans = draw(st.lists(st.tuples(state, st.sampled_from(alphabet.symbols), state), max_size=3 * n))
    eps = draw(st.lists(st.tuples(state, state), max_size=2))
    finals = draw(st.sets(state))
    return Automaton(alphabet, n, 0, finals, trans, eps)


# ------------------------------------------------------------- alphabets

def test_alphabet_rejects_pad_and_duplicates():
    with pytest.raises(ContractError):
        Alphabet(["a", "$"])
    with pytest.raises(ContractError):
        Alphabet(["a", "a"])


def test_partial_inverse_map():
    A = Alphabet(["a", "A", "a2"], {"a": "A", "A": "a"})
    assert A.inverse("a2") is None
    assert not A.involutive
    with pytest.raises(ContractError):
        Alphabet(["a", "b"], {"a": "b"})


def test_parse_greedy_and_empty():
    A = Alphabet(["a", "A", "a2"], {"a": "A", "A": "a"})
    assert A.parse("a2a") == ("a2", "a")
    assert A.parse("a a2") == ("a", "a2")
    assert A.parse("ε") == ()
    with pytest.raises(ContractError):
        A.parse("b")


def test_convolution_alphabet_order():
    C = ConvolutionAlphabet(Alphabet("ab"), Alphabet("x"))
    assert list(C) == [("a", "x"), ("b", "x"), ("a", "$"), ("b", "$"), ("$", "x")]


# ------------------------------------------------------------- builders

def test_regex_matches_python_re():
    for pat in ["a*b*", "(ab|b)*a", "a(a|b)*|ε", "(aa)*|b"]:
        a = fsa.regex(AB, pat)
        py = pat.replace("ε", "")
        assert lang(a, 6) == set(language(py, "ab", 6)), pat


def test_enumerate_small_cases():
    assert fsa.enumerate_words(fsa.regex(Alphabet("a"), "a*"), 2) == [(), ("a",), ("a", "a")]
    assert fsa.enumerate_words(fsa.empty(AB), 5) == []


def test_enumeration_is_shortlex():
    words = fsa.enumerate_words(fsa.universal(Alphabet("ba")), 3)
    assert words == sorted(words, key=Alphabet("ba").key)
    assert words[1:3] == [("b",), ("a",)]


# ------------------------------------------------- determinize / minimize

def test_determinize_union_of_a_and_aa():
    A = Alphabet("a")
    nfa = fsa.union(fsa.literal(A, "a"), fsa.literal(A, "aa"))
    d = fsa.trim(fsa.determinize(nfa))
    assert d.deterministic
    assert d.n == 3
    assert lang(d, 4) == {"a", "aa"}


def test_minimize_redundant_a_star():
    A = Alphabet("a")
    dfa = Automaton(A, 3, 0, [0, 1, 2], [(0, "a", 1), (1, "a", 2), (2, "a", 0)])
    m = fsa.minimize(fsa.complete(dfa))
    assert m.n <= 2
    assert len(m.finals) == 1
    assert lang(m, 5) == lang(dfa, 5)


def test_minimize_empty_language():
    m = fsa.minimize(fsa.empty(AB))
    assert m.n == 1 and not m.finals


def test_state_cap(monkeypatch):
    # third-from-last letter is a: 8 subset states
    trans = [(0, "a", 0), (0, "b", 0), (0, "a", 1)]
    trans += [(i, x, i + 1) for i in (1, 2) for x in "ab"]
    nfa = Automaton(AB, 4, 0, [3], trans)
    assert not nfa.deterministic
    monkeypatch.setenv("AUTOGRP_STATE_CAP", "3")
    with pytest.raises(ResourceError):
        fsa.determinize(nfa)


@given(automata())
def test_minimize_determinize_preserves_language(a):
    m = fsa.minimize(fsa.determinize(a))
    assert m.deterministic
    assert lang(m, 8) == brute(a, "ab", 8)


@given(automata())
def test_minimize_is_idempotent_in_size(a):
    m = fsa.minimize(fsa.determinize(a))
    assert fsa.minimize(m).n == m.n


# ------------------------------------------------------------- boolean ops

def test_intersection_example():
    A = Alphabet("a")
    r = fsa.intersection(fsa.regex(A, "a*"), fsa.regex(A, "(aa)*"))
    assert lang(r, 8) == {"a" * k for k in (0, 2, 4, 6, 8)}


def test_union_with_empty():
    a = fsa.regex(AB, "ab*")
    assert lang(fsa.union(a, fsa.empty(AB)), 6) == lang(a, 6)


@given(automata(), automata())
def test_boolean_ops_match_set_ops(a, b):
    la, lb = brute(a, "ab", 6), brute(b, "ab", 6)
    assert lang(fsa.union(a, b), 6) == la | lb
    assert lang(fsa.intersection(a, b), 6) == la & lb
    assert lang(fsa.difference(a, b), 6) == la - lb
    universe = set(all_words("ab", 6))
    assert lang(fsa.complement(a), 6) == universe - la
    # De Morgan
    assert lang(fsa.complement(fsa.union(a, b)), 6) == \
        lang(fsa.intersection(fsa.complement(a), fsa.complement(b)), 6)


@given(automata(max_states=4), automata(max_states=4))
def test_concatenate_and_star(a, b):
    la, lb = brute(a, "ab", 5), brute(b, "ab", 5)
    assert lang(fsa.concatenate(a, b), 5) == {u + v for u in la for v in lb if len(u + v) <= 5}
    star = {""}
    frontier = {""}
    while frontier:
        frontier = {u + v for u in frontier for v in la if v and len(u + v) <= 5} - star
        star |= frontier
    assert lang(fsa.star(a), 5) == star


# ------------------------------------------------------------- convolution

def test_convolve_words_example():
    assert fsa.convolve_words("ab", "a") == (("a", "a"), ("b", "$"))
    assert fsa.convolve_words("", "") == ()


def test_convolve_small_languages():
    l1 = fsa.from_words(AB, ["a", "aa"])
    l2 = fsa.from_words(XY, ["x"])
    got = set(fsa.enumerate_words(fsa.convolve(l1, l2), 2))
    assert got == {(("a", "x"),), (("a", "x"), ("a", "$"))}


@given(automata(max_states=4), automata(XY, max_states=4))
def test_convolve_matches_pairwise_definition(a, b):
    l1, l2 = brute(a, "ab", 6), brute(b, "xy", 6)
    got = set(fsa.enumerate_words(fsa.convolve(a, b), 6))
    assert got == convolve_pairs(l1, l2, 6)
    for w in got:
        assert "".join(fsa.project(w, 0)) in l1
        assert "".join(fsa.project(w, 1)) in l2


# ---------------------------------------------------------------- closures

def test_closures_of_ab():
    a = fsa.literal(AB, "ab")
    assert lang(fsa.prefix_closure(a), 3) == {"", "a", "ab"}
    assert lang(fsa.suffix_closure(a), 3) == {"", "b", "ab"}
    assert lang(fsa.factor_closure(a), 3) == {"", "a", "b", "ab"}


@given(automata(max_states=4))
def test_factor_closure_matches_substrings(a):
    # a factor of length ≤ 6 sits in an accepted word with prefix and suffix
    # shorter than the state count, by pumping
    la = brute(a, "ab", 6 + 2 * (a.n - 1))
    facts = {w[i:j] for w in la for i in range(len(w) + 1) for j in range(i, min(len(w), i + 6) + 1)}
    got = lang(fsa.factor_closure(a), 6)
    assert got == facts
    assert {w for w in la if len(w) <= 6} <= got
    assert lang(fsa.factor_closure(fsa.factor_closure(a)), 6) == got


def test_factorial_language_is_fixed():
    a = fsa.regex(AB, "a*b*")
    assert lang(fsa.factor_closure(a), 6) == lang(a, 6)


# ------------------------------------------------------------ relabel, io

def test_relabel_and_with_alphabet():
    a = fsa.regex(AB, "ab*")
    r = fsa.relabel(a, {"a": "x", "b": "y"}, XY)
    assert lang(r, 3) == {"x", "xy", "xyy"}
    big = Alphabet("abc")
    assert lang(fsa.with_alphabet(a, big), 3) == lang(a, 3)
    with pytest.raises(ContractError):
        fsa.with_alphabet(a, Alphabet("a"))


@given(automata())
def test_json_roundtrip(a):
    b = fsa.from_json(fsa.to_json(a))
    assert lang(b, 6) == lang(a, 6)


def test_json_roundtrip_convolution_symbols():
    c = fsa.convolve(fsa.regex(AB, "ab"), fsa.regex(XY, "x"))
    back = fsa.from_json(fsa.to_json(c))
    assert set(fsa.enumerate_words(back, 3)) == {(("a", "x"), ("b", "$"))}


@given(automata(), st.text("ab", max_size=6))
def test_accepts_agrees_with_enumeration(a, w):
    assert fsa.accepts(a, tuple(w)) == (w in lang(a, 6))


def test_is_empty():
    assert fsa.is_empty(fsa.empty(AB))
    assert not fsa.is_empty(fsa.epsilon(AB))
    assert fsa.is_empty(fsa.intersection(fsa.regex(AB, "a*"), fsa.regex(AB, "b(a|b)*")))


def test_python_re_sanity():
    # the oracle itself: fullmatch semantics
    assert re.fullmatch("a*", "") and not re.fullmatch("a", "aa")
