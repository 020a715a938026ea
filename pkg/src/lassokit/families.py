"""Fixture languages and automata with known size behaviour.

These are executable witnesses used by the test suite and the `family`
CLI subcommand: languages that force construction blow-ups, tiny automata
with known precise approximations, and the two standing example formulas.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .core import Alphabet, InputError, Lasso, MembershipOracle, ParityAutomaton
from .ltl import ApLetterMap, LtlFormula, always, atom, conj, eventually, implies


def phi_n_oracle(alphabet: Alphabet, n: int) -> MembershipOracle:
    """Membership in {sigma^omega | sigma a word of length n}.

    A word qualifies iff it is purely periodic with period n.  Checking
    offset-n equality over the first |u|+|v| positions is enough: beyond
    the stem both sides of the comparison repeat with the loop period.
    """
    if n < 1:
        raise InputError("period must be positive")
    letters = set(alphabet)

    def oracle(w: Lasso) -> bool:
        if any(x not in letters for x in w.stem + w.loop):
            return False
        span = len(w.stem) + len(w.loop)
        return all(w.letter(i) == w.letter(i + n) for i in range(span))

    return oracle


def gf_one() -> ParityAutomaton:
    """2-state deterministic Buchi automaton: letter 1 occurs infinitely
    often (over the alphabet {0, 1})."""
    sigma = Alphabet(("0", "1"))
    transitions = {
        ("lo", "0"): frozenset({"lo"}),
        ("lo", "1"): frozenset({"hi"}),
        ("hi", "0"): frozenset({"lo"}),
        ("hi", "1"): frozenset({"hi"}),
    }
    return ParityAutomaton(
        sigma, ("lo", "hi"), frozenset({"lo"}), transitions, {"lo": 1, "hi": 2}
    )


def omega_k(k: int) -> ParityAutomaton:
    """Nondeterministic parity automaton with 2k+1 states whose language
    consists of the words over {0,1,2} containing exactly one 2, preceded
    k positions earlier by a 1 that has at most k-1 letters before it, and
    followed by 1 forever.

    Any deterministic automaton matching it on short lassos needs a state
    per k-letter history, which is what makes it a useful stress fixture.
    """
    if k < 1:
        raise InputError("k must be positive")
    sigma = Alphabet(("0", "1", "2"))

    def guess(i: int) -> str:  # still scanning, the marked 1 not yet chosen
        return f"g{i}"

    def commit(i: int) -> str:  # the marked 1 was i-1 letters ago
        return f"c{i}"

    accept = "acc"
    states = [guess(i) for i in range(1, k + 1)]
    states += [commit(i) for i in range(1, k + 1)]
    states.append(accept)
    transitions: dict[tuple[str, str], frozenset[str]] = {
        (accept, "1"): frozenset({accept})
    }
    for i in range(1, k + 1):
        if i < k:
            transitions[(guess(i), "0")] = frozenset({guess(i + 1)})
            transitions[(guess(i), "1")] = frozenset({guess(i + 1), commit(1)})
            transitions[(commit(i), "0")] = frozenset({commit(i + 1)})
            transitions[(commit(i), "1")] = frozenset({commit(i + 1)})
        else:
            transitions[(guess(k), "1")] = frozenset({commit(1)})
            transitions[(commit(k), "2")] = frozenset({accept})
    coloring = {q: 1 for q in states}
    coloring[accept] = 0
    return ParityAutomaton(
        sigma, tuple(states), frozenset({guess(1)}), transitions, coloring
    )


def fixture_formulas() -> list[tuple[LtlFormula, ApLetterMap]]:
    """The two standing example formulas with their letter maps: a pair of
    fairness implications over {p,q,r,s}, and persistence-plus-recurrence
    over {p,q}."""
    p, q, r, s = atom("p"), atom("q"), atom("r"), atom("s")
    fair = conj(
        implies(always(eventually(p)), always(eventually(q))),
        implies(always(eventually(r)), always(eventually(s))),
    )
    pr = conj(eventually(always(p)), always(eventually(q)))
    return [
        (fair, ApLetterMap.from_aps(("p", "q", "r", "s"))),
        (pr, ApLetterMap.from_aps(("p", "q"))),
    ]


def fg_gf_dpa() -> tuple[ParityAutomaton, ApLetterMap]:
    """Hand-built 3-state, 3-color DPA for the persistence-plus-recurrence
    fixture formula (eventually always p, and q infinitely often).

    States classify the letter just read; the class of any letter read
    infinitely often shows up as a color seen infinitely often.  Three
    colors are genuinely needed: the language is neither expressible with
    a top color 2 nor as a complement of one.
    """
    amap = ApLetterMap.from_aps(("p", "q"))
    sigma = amap.alphabet

    def klass(x: str) -> str:
        if not amap.truth(x, "p"):
            return "no_p"
        return "p_and_q" if amap.truth(x, "q") else "p_only"

    states = ("p_only", "p_and_q", "no_p")
    transitions = {
        (q, x): frozenset({klass(x)}) for q in states for x in sigma
    }
    coloring = {"p_only": 1, "p_and_q": 2, "no_p": 3}
    return (
        ParityAutomaton(sigma, states, frozenset({"p_only"}), transitions, coloring),
        amap,
    )


def fairness_pairs_safety() -> tuple[ParityAutomaton, ApLetterMap]:
    """4-state safety automaton, 2-lasso-precise for the fairness-pair
    fixture formula.

    Each half of the formula is tracked by one obligation bit: seeing p
    raises the p-obligation, seeing q clears it, and a run dies if p
    arrives while the obligation is still up.  Words surviving forever
    discharge every p within one step, so both implications hold; on
    lassos of base at most 2, every word of the formula can be written so
    that it survives.
    """
    amap = ApLetterMap.from_aps(("p", "q", "r", "s"))
    sigma = amap.alphabet

    def step(bit: int, x: str, trigger: str, reset: str) -> Optional[int]:
        if amap.truth(x, reset):
            return 0
        if amap.truth(x, trigger):
            return None if bit else 1
        return bit

    def name(b1: int, b2: int) -> str:
        return f"ob{b1}{b2}"

    states = tuple(name(a, b) for a in (0, 1) for b in (0, 1))
    transitions: dict[tuple[str, str], frozenset[str]] = {}
    for b1 in (0, 1):
        for b2 in (0, 1):
            for x in sigma:
                n1 = step(b1, x, "p", "q")
                n2 = step(b2, x, "r", "s")
                if n1 is None or n2 is None:
                    continue
                transitions[(name(b1, b2), x)] = frozenset({name(n1, n2)})
    return (
        ParityAutomaton(
            sigma, states, frozenset({name(0, 0)}), transitions, {q: 0 for q in states}
        ),
        amap,
    )


@dataclass(frozen=True)
class FamilySpec:
    """CLI-facing fixture descriptor."""

    name: str
    build: Callable[..., object]
    parameters: tuple[str, ...] = ()
    note: str = ""


FAMILIES: dict[str, FamilySpec] = {
    "gf1": FamilySpec(
        "gf1",
        lambda: gf_one(),
        (),
        "2-state Buchi fixture: 1 occurs infinitely often",
    ),
    "omega": FamilySpec(
        "omega",
        omega_k,
        ("k",),
        "2k+1-state NPA whose precise determinizations blow up",
    ),
    "phi-n": FamilySpec(
        "phi-n",
        phi_n_oracle,
        ("alphabet", "n"),
        "purely periodic words of period n; forces alphabet^n states",
    ),
    "fg-gf": FamilySpec(
        "fg-gf",
        lambda: fg_gf_dpa()[0],
        (),
        "3-color DPA for persistence plus recurrence",
    ),
    "fairness-pairs": FamilySpec(
        "fairness-pairs",
        lambda: fairness_pairs_safety()[0],
        (),
        "4-state safety automaton, 2-lasso-precise for paired fairness",
    ),
}
