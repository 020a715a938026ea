"""Shared test utilities: an independent LTL oracle and seeded generators.

The naive evaluator here deliberately avoids the fixpoint-sweep scheme of
the library: it applies the quantifier semantics of each temporal
operator directly over the window [i, max(i, |stem|) + |loop|).  That
window is exact because the truth value of any future-time formula is
periodic past the stem, so one full period past stabilization decides
every unbounded quantifier: a true until must find its witness there, a
violated release its refutation, and so on.
"""

from __future__ import annotations

import random

from lassokit.core import Alphabet, Lasso, ParityAutomaton
from lassokit.ltl import ApLetterMap, LtlFormula, atom
from lassokit import ltl


def naive_eval(f: LtlFormula, w: Lasso, m: ApLetterMap) -> bool:
    period = len(w.loop)
    stem_len = len(w.stem)

    def letter(i: int) -> str:
        if i < stem_len:
            return w.stem[i]
        return w.loop[(i - stem_len) % period]

    def window(i: int) -> range:
        # Truth values of any subformula repeat with the loop period once
        # past the stem, so one full period past stabilization is decisive.
        return range(i, max(i, stem_len) + period)

    memo: dict[tuple[int, int], bool] = {}

    def ev(g: LtlFormula, i: int) -> bool:
        key = (id(g), i)
        if key in memo:
            return memo[key]
        k = g.kind
        if k == "atom":
            out = m.truth(letter(i), g.name)
        elif k == "true":
            out = True
        elif k == "false":
            out = False
        elif k == "not":
            out = not ev(g.operands[0], i)
        elif k == "and":
            out = ev(g.operands[0], i) and ev(g.operands[1], i)
        elif k == "or":
            out = ev(g.operands[0], i) or ev(g.operands[1], i)
        elif k == "implies":
            out = (not ev(g.operands[0], i)) or ev(g.operands[1], i)
        elif k == "next":
            out = ev(g.operands[0], i + 1)
        elif k == "eventually":
            out = any(ev(g.operands[0], j) for j in window(i))
        elif k == "always":
            out = all(ev(g.operands[0], j) for j in window(i))
        elif k == "until":
            a, b = g.operands
            out = False
            for j in window(i):
                if ev(b, j):
                    out = True
                    break
                if not ev(a, j):
                    break
        elif k == "release":
            a, b = g.operands
            out = True
            for j in window(i):
                if not ev(b, j):
                    out = False
                    break
                if ev(a, j):
                    break
        else:
            raise AssertionError(k)
        memo[key] = out
        return out

    return ev(f, 0)


_KINDS = (
    "atom", "atom", "not", "and", "or", "implies",
    "next", "eventually", "always", "until", "release",
)


def rand_formula(rng: random.Random, aps, budget: int) -> LtlFormula:
    """Random formula with at most ``budget`` nodes."""
    if budget <= 1:
        return atom(rng.choice(aps))
    kind = rng.choice(_KINDS)
    if kind == "atom":
        return atom(rng.choice(aps))
    if kind in ("not", "next", "eventually", "always"):
        inner = rand_formula(rng, aps, budget - 1)
        build = {
            "not": ltl.neg,
            "next": ltl.next_,
            "eventually": ltl.eventually,
            "always": ltl.always,
        }[kind]
        return build(inner)
    split = rng.randint(1, budget - 2) if budget > 2 else 1
    left = rand_formula(rng, aps, split)
    right = rand_formula(rng, aps, budget - 1 - split)
    build = {
        "and": ltl.conj,
        "or": ltl.disj,
        "implies": ltl.implies,
        "until": ltl.until,
        "release": ltl.release,
    }[kind]
    return build(left, right)


def rand_lasso(rng: random.Random, alphabet: Alphabet, max_stem=3, max_loop=3) -> Lasso:
    stem = tuple(
        rng.choice(alphabet.letters) for _ in range(rng.randint(0, max_stem))
    )
    loop = tuple(
        rng.choice(alphabet.letters) for _ in range(rng.randint(1, max_loop))
    )
    return Lasso(stem, loop)


def rand_automaton(
    rng: random.Random,
    alphabet: Alphabet,
    max_states=4,
    max_color=3,
    deterministic=False,
    density=0.8,
) -> ParityAutomaton:
    k = rng.randint(1, max_states)
    names = tuple(f"s{i}" for i in range(k))
    transitions = {}
    for q in names:
        for a in alphabet.letters:
            if rng.random() > density:
                continue
            if deterministic:
                targets = frozenset({rng.choice(names)})
            else:
                pick = [t for t in names if rng.random() < 0.5]
                if not pick:
                    pick = [rng.choice(names)]
                targets = frozenset(pick)
            transitions[(q, a)] = targets
    initial = frozenset({names[0]} if deterministic else
                        {t for t in names if rng.random() < 0.4} or {names[0]})
    coloring = {q: rng.randint(0, max_color) for q in names}
    return ParityAutomaton(
        alphabet=alphabet,
        states=names,
        initial=initial,
        transitions=transitions,
        coloring=coloring,
    )


def same_automaton(a: ParityAutomaton, b: ParityAutomaton) -> bool:
    """Field-wise comparison; the automaton class keeps identity equality."""
    return (
        a.alphabet == b.alphabet
        and a.states == b.states
        and a.initial == b.initial
        and a.transitions == b.transitions
        and a.coloring == b.coloring
    )


def in_omega(w: Lasso, k: int) -> bool:
    """Reference predicate for the blow-up family: exactly one 2, its
    trigger 1 exactly k letters earlier with at most k-1 letters before
    it, and only 1 afterwards."""
    c = w.canonical()
    if c.loop.count("2") or c.stem.count("2") != 1:
        return False
    t = c.stem.index("2")
    if t < k or t - k > k - 1 or c.stem[t - k] != "1":
        return False
    if any(x not in ("0", "1", "2") for x in c.base):
        return False
    span = len(c.stem) + len(c.loop)
    return all(c.letter(i) == "1" for i in range(t + 1, span))
