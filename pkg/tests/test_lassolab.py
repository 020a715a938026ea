import json
import random

import pytest

from lassokit.core import (
    Alphabet,
    InputError,
    Lasso,
    ParityAutomaton,
    accepts_lasso,
    lasso,
)
from lassokit.lassolab import (
    PrecisionReport,
    automaton_oracle,
    check_lasso_precise,
    default_inclusion_bound,
    enumerate_bases,
    unroll,
)
from lassokit.ltl import ApLetterMap, ltl_oracle, parse_ltl

from helpers import rand_lasso

AB = Alphabet(("a", "b"))

# Exact safety automaton for "every letter is a".
ONLY_A = ParityAutomaton(
    alphabet=AB,
    states=("s",),
    initial=frozenset({"s"}),
    transitions={("s", "a"): frozenset({"s"})},
    coloring={"s": 0},
)

# Agrees with ONLY_A on all base-1 lassos but also accepts a(ba)^w words:
# after the first a, anything goes.
LEAKY = ParityAutomaton(
    alphabet=AB,
    states=("x", "y"),
    initial=frozenset({"x"}),
    transitions={
        ("x", "a"): frozenset({"y"}),
        ("y", "a"): frozenset({"y"}),
        ("y", "b"): frozenset({"y"}),
    },
    coloring={"x": 0, "y": 0},
)


def in_only_a(w: Lasso) -> bool:
    return all(c == "a" for c in w.base)


class TestUnroll:
    def test_identity(self):
        w = lasso("a", "ba")
        assert unroll(w, w.length) == w

    def test_length_and_word(self):
        w = lasso("a", "ab")
        for n2 in range(w.length, 9):
            u = unroll(w, n2)
            assert u.length == n2
            assert u.prefix(16) == w.prefix(16)
            assert u.canonical() == w.canonical()

    def test_shrinking_rejected(self):
        with pytest.raises(InputError):
            unroll(lasso("a", "ab"), 2)

    def test_random(self):
        rng = random.Random(7)
        for _ in range(200):
            w = rand_lasso(rng, AB)
            u = unroll(w, w.length + rng.randrange(0, 6))
            assert u.prefix(24) == w.prefix(24)
            assert u.canonical() == w.canonical()


class TestEnumerateBases:
    def test_counts(self):
        for n in (1, 2, 3):
            out = list(enumerate_bases(AB, n))
            assert len(out) == 2**n * n
            assert all(w.length == n for w in out)
            assert len({(w.stem, w.loop) for w in out}) == len(out)

    def test_order_and_membership(self):
        out = list(enumerate_bases(AB, 2))
        assert out[0] == Lasso((), ("a", "a"))
        assert out[1] == Lasso(("a",), ("a",))
        assert Lasso(("a",), ("b",)) in out
        assert Lasso((), ("b", "a")) in out

    def test_zero_rejected(self):
        with pytest.raises(InputError):
            list(enumerate_bases(AB, 0))


class TestAutomatonOracle:
    def test_wraps_acceptance(self):
        oracle = automaton_oracle(LEAKY)
        for w in enumerate_bases(AB, 2):
            assert oracle(w) == accepts_lasso(LEAKY, w)
        assert oracle.automaton is LEAKY


class TestPrecisionReport:
    def test_merge_adds_counts(self):
        a = PrecisionReport(2, 3, checked_equal=4, checked_inclusion=6)
        b = PrecisionReport(2, 3, checked_equal=1, checked_inclusion=2)
        b.inclusion_violations.append(lasso("", "b"))
        out = a.merge(b)
        assert out.checked_equal == 5
        assert out.checked_inclusion == 8
        assert out.agree and not out.ok

    def test_merge_needs_same_bounds(self):
        with pytest.raises(InputError):
            PrecisionReport(2, 3).merge(PrecisionReport(2, 4))

    def test_json_round_trip(self):
        r = PrecisionReport(1, 2, checked_equal=2)
        r.mismatches.append((lasso("a", "b"), True, False))
        assert json.loads(r.to_json()) == r.to_dict()
        entry = r.to_dict()["mismatches"][0]
        assert entry["base"] == ["a", "b"] and entry["split"] == 1

    def test_summary_verdict(self):
        good = PrecisionReport(1, 1)
        assert "verdict: ok" in good.summary()
        bad = PrecisionReport(1, 1)
        bad.inclusion_violations.append(lasso("", "b"))
        assert "FAILED" in bad.summary()
        assert "accepted outside language" in bad.summary()


class TestCheckLassoPrecise:
    def test_exact_automaton_passes(self):
        report = check_lasso_precise(ONLY_A, in_only_a, 2)
        assert report.ok
        assert report.checked_equal == 8
        assert not report.exact_inclusion

    def test_default_bound(self):
        assert default_inclusion_bound(ONLY_A, 2) == 2
        assert default_inclusion_bound(LEAKY, 1) == 2

    def test_leak_caught_at_default_bound(self):
        # Precise at base 1, but (ab)^w leaks in at base 2 = |LEAKY|.
        report = check_lasso_precise(LEAKY, in_only_a, 1)
        assert report.agree
        assert not report.ok
        assert lasso("", "ab") in report.inclusion_violations

    def test_small_bound_hides_leak(self):
        report = check_lasso_precise(LEAKY, in_only_a, 1, inclusion_bound=1)
        assert report.ok  # the check is only as strong as its bound

    def test_mismatch_reported(self):
        trans = dict(ONLY_A.transitions)
        trans[("s", "b")] = frozenset({"s"})
        sloppy = ParityAutomaton(AB, ("s",), frozenset({"s"}), trans, {"s": 0})
        report = check_lasso_precise(sloppy, in_only_a, 1, inclusion_bound=1)
        assert not report.agree
        assert (lasso("", "b"), False, True) in report.mismatches

    def test_exact_inclusion_from_reference(self):
        report = check_lasso_precise(LEAKY, in_only_a, 1, reference=ONLY_A)
        assert report.exact_inclusion
        assert report.inclusion_bound == 1
        assert not report.ok  # product test sees past the bound

    def test_exact_inclusion_from_oracle_attachment(self):
        report = check_lasso_precise(ONLY_A, automaton_oracle(ONLY_A), 3)
        assert report.ok and report.exact_inclusion

    def test_jobs_equivalent(self):
        seq = check_lasso_precise(LEAKY, in_only_a, 2, inclusion_bound=3)
        for jobs in (2, 5, 64):
            par = check_lasso_precise(LEAKY, in_only_a, 2, inclusion_bound=3, jobs=jobs)
            assert par.checked_equal == seq.checked_equal
            assert par.checked_inclusion == seq.checked_inclusion
            assert sorted(map(str, par.inclusion_violations)) == sorted(
                map(str, seq.inclusion_violations)
            )
            assert par.ok == seq.ok

    def test_bad_bounds(self):
        with pytest.raises(InputError):
            check_lasso_precise(ONLY_A, in_only_a, 0)
        with pytest.raises(InputError):
            check_lasso_precise(ONLY_A, in_only_a, 2, inclusion_bound=1)

    def test_against_ltl_oracle(self):
        pmap = ApLetterMap.from_aps(["p"])
        sigma = Alphabet(pmap.letters)
        always_p = ParityAutomaton(
            alphabet=sigma,
            states=("s",),
            initial=frozenset({"s"}),
            transitions={("s", "{p}"): frozenset({"s"})},
            coloring={"s": 0},
        )
        oracle = ltl_oracle(parse_ltl("G p", ["p"]), pmap)
        assert check_lasso_precise(always_p, oracle, 2, inclusion_bound=4).ok
