import pytest
from hypothesis import given, strategies as st

from autogrp import fsa
from autogrp.errors import ContractError
from autogrp.files import load_structure
from autogrp.groups import FreeAbelianGroup, FreeGroup, PathTrace
from autogrp.reports import CONSTANT, FAILURE, cumulative, from_trace, is_divergent
from autogrp.structures import (AutomaticStructure, async_ft_constant, bottleneck,
                                check_equivalence, check_rational_section, departure_estimate,
                                ft_constant, hausdorff_distance, hausdorff_ids,
                                length_diff_constant, shortlex_structure)

from oracles import (all_words, free_dist, free_prefixes, free_reduce, ft_oracle, language,
                     z_metric, z_value)


def z_prefixes(values):
    return lambda w: [sum(values[x] for x in w[:k]) for k in range(len(w) + 1)]


ZVALS = {"a": 1, "A": -1}
ZA2VALS = {"a": 1, "A": -1, "a2": 2}


def structure_words(s, n):
    return [tuple(w) for w in s.enumerate(n)]


# ------------------------------------------------------------ fellow travel

@pytest.mark.parametrize("n", [2, 4, 6])
def test_f2_shortlex_ft_matches_oracle(f2_shortlex, n):
    words = ["".join(w) for w in f2_shortlex.enumerate(n)]
    assert sorted(words) == sorted(w for w in all_words("aAbB", n) if free_reduce(w) == w)
    want = ft_oracle(words, free_prefixes, free_dist)
    rep = ft_constant(f2_shortlex, n)
    assert rep.ok and rep.value == want == 1


def test_f2_biautomatic(f2_shortlex):
    rep = ft_constant(f2_shortlex, 5, mode="biautomatic")
    assert rep.ok and rep.value == 1


@pytest.mark.parametrize("name,pattern,n", [
    ("z_geo.json", "a*|A*", 10),
    ("z_L1.json", "(aAa)*|(AaA)*", 9),
])
def test_z_ft_matches_oracle(name, pattern, n):
    s = load_structure(name)
    words = language(pattern, "aA", n)
    assert sorted("".join(w) for w in s.enumerate(n)) == sorted(words)
    d = z_metric([1, -1])
    want = ft_oracle(words, z_prefixes(ZVALS), d)
    rep = ft_constant(s, n)
    assert rep.value == want


def test_z_geodesic_ft_is_one():
    rep = ft_constant(load_structure("z_geo.json"), 10)
    assert rep.ok and rep.value == 1
    assert [v for _, v in rep.growth_trace] == [1] * 10


def test_z_a2_ft_matches_oracle():
    s = load_structure("z_a2.json")
    n = 8
    words = structure_words(s, n)
    d = z_metric([1, -1, 2, -2])
    assert ft_constant(s, n).value == ft_oracle(words, z_prefixes(ZA2VALS), d)


def test_finite_universal_language_ft_is_diameter():
    s = load_structure("finite_L_Astar.json")
    rep = ft_constant(s, 4)
    assert rep.ok and rep.value == 1
    assert rep.value == max(s.group.norm(g) for g in s.group.ball(4))


def test_ft_rejects_zero_length(f2_shortlex):
    with pytest.raises(ContractError):
        ft_constant(f2_shortlex, 0)
    with pytest.raises(ContractError):
        ft_constant(f2_shortlex, 3, mode="sideways")


def test_ft_failure_witness_is_real():
    # aⁿ and Aᵐaᵐ⁺ⁿ end together while their paths spread linearly
    Z = FreeAbelianGroup(1)
    s = AutomaticStructure(Z, fsa.regex(Z.alphabet, "a*|A*a*"))
    rep = ft_constant(s, 12)
    words = language("a*|A*a*", "aA", 12)
    assert rep.value == ft_oracle(words, z_prefixes(ZVALS), z_metric([1, -1]))
    assert rep.verdict == FAILURE
    u, v, k = rep.data["u"], rep.data["v"], rep.data["n"]
    pu = z_prefixes(ZVALS)(u)
    pv = z_prefixes(ZVALS)(v)
    assert abs(pu[min(k, len(u))] - pv[min(k, len(v))]) == rep.value
    assert abs(pu[-1] - pv[-1]) <= 1


# ------------------------------------------------ asynchronous fellow travel

def frechet_brute(p, q, d):
    """Enumerate every monotone coupling; steps advance one or both indices."""
    best = [None]

    def walk(i, j, worst):
        worst = max(worst, d(p[i], q[j]))
        if best[0] is not None and worst >= best[0]:
            return
        if i == len(p) - 1 and j == len(q) - 1:
            best[0] = worst
            return
        if i + 1 < len(p):
            walk(i + 1, j, worst)
        if j + 1 < len(q):
            walk(i, j + 1, worst)
        if i + 1 < len(p) and j + 1 < len(q):
            walk(i + 1, j + 1, worst)

    walk(0, 0, 0)
    return best[0]


ints = st.lists(st.integers(-4, 4), min_size=1, max_size=6)


@given(ints, ints)
def test_bottleneck_matches_brute_force(p, q):
    d = lambda x, y: abs(x - y)
    assert bottleneck(p, q, d) == frechet_brute(p, q, d)


@given(ints, ints)
def test_bottleneck_between_hausdorff_and_sync(p, q):
    d = lambda x, y: abs(x - y)
    n = max(len(p), len(q))
    sync = max(d(p[min(k, len(p) - 1)], q[min(k, len(q) - 1)]) for k in range(n))
    b = bottleneck(p, q, d)
    assert hausdorff_ids(p, q, d) <= b <= sync
    assert bottleneck(q, p, d) == b


def test_hausdorff_definition():
    d = lambda x, y: abs(x - y)
    assert hausdorff_ids([0, 1, 2], [0, 5], d) == 3
    F2 = FreeGroup(2)
    t1 = PathTrace.of(F2, "ab")
    t2 = PathTrace.of(F2, "ab")
    assert hausdorff_distance(t1, t2) == 0


def test_bottleneck_example_a2_cubed():
    Z = FreeAbelianGroup(1)
    d = lambda x, y: abs(x - y)
    p = [0, 2, 4, 6]
    q = list(range(7))
    assert bottleneck(p, q, d) == 1
    assert frechet_brute(p, q, d) == 1


def test_async_ft_of_z_a2():
    s = load_structure("z_a2.json")
    rep = async_ft_constant(s, 10)
    assert rep.ok and rep.value <= 2


def test_async_le_sync(f2_shortlex):
    a = async_ft_constant(f2_shortlex, 5).value
    assert a <= ft_constant(f2_shortlex, 5).value


# -------------------------------------------------------------- departure

def departure_oracle(words, prefixes, norm, r, max_len):
    worst = 0
    for w in words:
        pts = prefixes(w)
        for s in range(len(w) + 1):
            for t in range(1, len(w) - s + 1):
                if norm(pts[s + t] - pts[s]) <= r:
                    worst = max(worst, t)
    if not words or max(len(w) for w in words) == 0:
        return 0
    return 1 + worst


def test_departure_z_geodesics():
    rep = departure_estimate(load_structure("z_geo.json"), [0, 1, 2, 3, 4], 10)
    assert rep.ok
    assert rep.value == {0: 1, 1: 2, 2: 3, 3: 4, 4: 5}


@pytest.mark.parametrize("pattern,py", [
    ("a*|A*", "a*|A*"),
    ("(aA)*a*", "(aA)*a*"),
    ("a*(A|ε)", "a*A?"),
])
def test_departure_matches_oracle(pattern, py):
    Z = FreeAbelianGroup(1)
    s = AutomaticStructure(Z, fsa.regex(Z.alphabet, pattern))
    n = 8
    words = language(py, "aA", n)
    rep = departure_estimate(s, [0, 1, 2], n)
    for r in (0, 1, 2):
        assert rep.extra["D"][r] == departure_oracle(words, z_prefixes(ZVALS), abs, r, n)


def test_departure_empty_word_only():
    Z = FreeAbelianGroup(1)
    s = AutomaticStructure(Z, fsa.epsilon(Z.alphabet))
    rep = departure_estimate(s, [0, 1], 5)
    assert rep.value == {0: 0, 1: 0}


def test_departure_failure_on_loops():
    Z = FreeAbelianGroup(1)
    s = AutomaticStructure(Z, fsa.regex(Z.alphabet, "(aA)*"))
    rep = departure_estimate(s, [0], 8)
    assert rep.verdict == FAILURE
    w = rep.data["w"]
    pts = z_prefixes(ZVALS)(w)
    k, t = rep.data["s"], rep.data["t"]
    assert t == 8 and pts[k] == pts[k + t]


def test_departure_free_shortlex(f2_shortlex):
    rep = departure_estimate(f2_shortlex, [0, 1, 2], 6)
    assert rep.value == {0: 1, 1: 2, 2: 3}


# ------------------------------------------------- length differences, K

def k_oracle(words, vals, max_len, limit):
    by_value = {}
    for w in words:
        by_value.setdefault(z_value(w, vals), len(w))
    worst = 0
    for w in words:
        if len(w) > max_len:
            continue
        x = z_value(w, vals)
        for st_ in set(vals.values()) | {-v for v in vals.values()}:
            y = x + st_
            worst = max(worst, by_value[y] - len(w))
    return worst


def test_length_diff_z_l1():
    s = load_structure("z_L1.json")
    words = [""] + [u * k for k in range(1, 11) for u in ("aAa", "AaA")]
    rep = length_diff_constant(s, 9)
    assert rep.ok
    assert rep.value == k_oracle(words, ZVALS, 9, 30) == 3


def test_length_diff_corollary():
    s = load_structure("z_a2_geo.json")
    rep = length_diff_constant(s, 6, corollary_radius=5)
    assert rep.ok and rep.extra["corollary_holds"]


def test_length_diff_grows_without_mixed_words():
    # a2⁶ sits next to 13, whose only representative is a¹³
    rep = length_diff_constant(load_structure("z_a2.json"), 6)
    assert rep.verdict == FAILURE


# ------------------------------------------------------ rational sections

def test_section_even_words_misses_odd_elements():
    Z = FreeAbelianGroup(1)
    s = AutomaticStructure(Z, fsa.regex(Z.alphabet, "(aa)*|(AA)*"))
    rep = check_rational_section(s, 2)
    assert not rep.ok
    assert rep.data["element"] in {(1,), (-1,)}


def test_section_shortlex(f2_shortlex):
    rep = check_rational_section(f2_shortlex, 3)
    assert rep.ok
    assert rep.extra["longest_representative"] == 3


# ------------------------------------------------------------ equivalence

def test_equivalence_reflexive_and_symmetric():
    a = load_structure("z_geo.json")
    b = load_structure("z_L1.json")
    same = check_equivalence(a, a, max_len=8)
    assert same.ok and same.value <= 1
    ab = check_equivalence(a, b, max_len=8)
    ba = check_equivalence(b, a, max_len=8)
    assert ab.value == ba.value


def test_equivalence_sync_stricter_than_async():
    a = load_structure("z_geo.json")
    b = load_structure("z_a2_geo.json")
    # a2ⁿ runs at twice the speed of a²ⁿ
    assert not check_equivalence(a, b, mode="synchronous", max_len=8).ok
    assert check_equivalence(a, b, max_len=8).ok


def test_equivalence_requires_same_group(f2_shortlex):
    with pytest.raises(ContractError):
        check_equivalence(f2_shortlex, load_structure("z_geo.json"))


# --------------------------------------------------------------- builders

def test_shortlex_f2_automaton_size(f2_shortlex):
    assert f2_shortlex.dfa.n == 5


def test_shortlex_uniqueness(f2_shortlex):
    assert f2_shortlex.check_uniqueness(5) is None
    assert load_structure("z_L1.json").check_uniqueness(9) is None
    u, v = load_structure("finite_L_Astar.json").check_uniqueness(2)
    K = load_structure("finite_L_Astar.json").group
    assert u != v and K.evaluate(u) == K.evaluate(v)


def test_rep_is_shortlex_least_geodesic():
    F2 = FreeGroup(2)
    s = shortlex_structure(F2)
    for g in F2.ball(3):
        w = s.rep(g, 3)
        assert len(w) == F2.norm(g)
    Z = FreeAbelianGroup(1)
    s = AutomaticStructure(Z, fsa.regex(Z.alphabet, "(aAa)*|(AaA)*"))
    assert s.rep((1,), 5) == tuple("aAa")
    assert s.rep((1,), 2) is None


def test_words_for(f2_shortlex):
    Z = FreeAbelianGroup(1)
    s = AutomaticStructure(Z, fsa.universal(Z.alphabet))
    got = s.words_for((0,), 2)
    assert got == [(), ("a", "A"), ("A", "a")]


def test_alphabet_mismatch():
    with pytest.raises(ContractError):
        AutomaticStructure(FreeGroup(2), fsa.universal(fsa.Alphabet("ab")))


# ------------------------------------------------------ divergence rule

def test_divergence_rule():
    assert is_divergent({1: 1, 2: 2, 3: 3, 4: 4}, 4)
    assert not is_divergent({1: 1, 2: 2, 3: 2, 4: 3}, 4)
    assert not is_divergent({1: 2, 2: 2, 3: 2, 4: 2}, 4)
    # four values, but flat across the upper half
    assert not is_divergent({1: 1, 2: 2, 3: 3, 4: 4, 5: 4, 6: 4, 7: 4, 8: 4}, 8)


@given(st.dictionaries(st.integers(0, 10), st.integers(0, 20)))
def test_cumulative_is_monotone(per):
    tr = cumulative(per, 10)
    vals = [tr[b] for b in range(11)]
    assert vals == sorted(vals)
    assert all(tr[b] >= per[b] for b in per)


def test_from_trace_constant_and_failure():
    rep = from_trace("x", {1: 1, 2: 1}, 2, lambda: (None, {}))
    assert rep.verdict == CONSTANT and rep.value == 1 and rep.exit_code == 0
    rep = from_trace("x", {b: b for b in range(1, 9)}, 8, lambda: ({"w": "a"}, {}))
    assert rep.verdict == FAILURE and rep.exit_code == 2
    assert rep.to_json()["witness"] == {"w": "a"}
    assert "witness w: a" in rep.table()
