"""Constructions that trade acceptance strength for lasso precision.

Each construction returns an automaton whose language is contained in the
input language while agreeing with it on all lassos up to the requested
base length n.  Over-approximation is obtained by sandwiching an
under-approximation between two complementations.
"""

from __future__ import annotations

from collections import deque
from typing import Optional, Union

from .core import (
    Alphabet,
    ContractViolation,
    InputError,
    Lasso,
    MembershipOracle,
    ParityAutomaton,
    complement_dpa,
    complete_with_sink,
    is_buchi,
    is_deterministic,
    is_safety,
)


def safety_state_bound(alphabet_size: int, n: int) -> int:
    """Worst-case state count of the two-phase safety construction."""
    return (alphabet_size + 1) ** n + alphabet_size**n * (n + 1) ** n


def counter_state_bound(a: ParityAutomaton, n: int) -> int:
    """Worst-case state count of the visit-counter construction."""
    f = sum(1 for q in a.states if _accepting_set(a, q))
    rest = a.size - f
    return n * rest * rest + f


def color_reduction_state_bound(a: ParityAutomaton, n: int, m_prime: int) -> int:
    """Worst-case state count of the color-reduction construction."""
    return (n * a.size + 1) * a.size * (a.color_count - m_prime + 2)


def build_safety_lasso_precise(
    phi: MembershipOracle, alphabet: Alphabet, n: int
) -> ParityAutomaton:
    """Deterministic safety automaton that is n-lasso-precise for ``phi``.

    Phase one stores the first n letters.  At the phase boundary the oracle
    is asked, once per split position, whether the stored word closed at
    that position belongs to the language; phase two then advances one loop
    pointer per still-viable split and kills the run once all pointers die.
    """
    if n < 1:
        raise InputError("precision bound must be positive")

    def p1_name(prefix: tuple[str, ...]) -> str:
        return "p1[%s]" % ",".join(prefix)

    def p2_name(word: tuple[str, ...], ts: tuple[Optional[int], ...]) -> str:
        marks = ",".join("-" if t is None else str(t) for t in ts)
        return "p2[%s;%s]" % (",".join(word), marks)

    def enter_phase2(word: tuple[str, ...]) -> tuple[Optional[int], ...]:
        # Pointer i (1-based) survives iff the stored word, looped from
        # position i, induces a word of the language.
        out = []
        for i in range(1, n + 1):
            w = Lasso(word[: i - 1], word[i - 1 :])
            out.append(i if phi(w) else None)
        return tuple(out)

    transitions: dict[tuple[str, str], frozenset[str]] = {}
    coloring: dict[str, int] = {}
    states: list[str] = []
    seen: set[str] = set()

    def declare(name: str) -> None:
        if name not in seen:
            seen.add(name)
            states.append(name)
            coloring[name] = 0

    start = p1_name(())
    declare(start)
    todo: deque[tuple[str, tuple]] = deque([("p1", ())])
    visited: set[tuple] = {("p1", ())}
    while todo:
        kind, payload = todo.popleft()
        if kind == "p1":
            prefix = payload
            src = p1_name(prefix)
            for x in alphabet:
                word = prefix + (x,)
                if len(word) < n:
                    dst_key = ("p1", word)
                    dst = p1_name(word)
                else:
                    ts = enter_phase2(word)
                    dst_key = ("p2", (word, ts))
                    dst = p2_name(word, ts)
                declare(dst)
                transitions[(src, x)] = frozenset({dst})
                if dst_key not in visited:
                    visited.add(dst_key)
                    todo.append(dst_key)
        else:
            word, ts = payload
            src = p2_name(word, ts)
            if all(t is None for t in ts):
                continue  # every loop hypothesis failed: reject from here
            for x in alphabet:
                nts = []
                for i, t in enumerate(ts, start=1):
                    if t is None or word[t - 1] != x:
                        nts.append(None)
                    elif t < n:
                        nts.append(t + 1)
                    else:
                        nts.append(i)
                nts_t = tuple(nts)
                dst = p2_name(word, nts_t)
                declare(dst)
                transitions[(src, x)] = frozenset({dst})
                key = ("p2", (word, nts_t))
                if key not in visited:
                    visited.add(key)
                    todo.append(key)

    out = ParityAutomaton(
        alphabet, tuple(states), frozenset({start}), transitions, coloring
    )
    assert out.size <= safety_state_bound(len(alphabet), n)
    return out


def _accepting_set(a: ParityAutomaton, q: str) -> bool:
    # Buchi inputs mark color-2 states; a safety automaton behaves like a
    # Buchi automaton whose states are all accepting.
    if is_safety(a):
        return True
    return a.coloring[q] == 2


def buechi_to_safety(a: ParityAutomaton, n: int) -> ParityAutomaton:
    """Safety automaton n-lasso-precise for a Buchi (or safety) input.

    Counts steps since the last visit to an accepting state; a run dies
    when the count would exceed n times the number of non-accepting states.
    Determinism is preserved.
    """
    if not (is_buchi(a) or is_safety(a)):
        raise ContractViolation("input must be a Buchi or safety automaton")
    if n < 1:
        raise InputError("precision bound must be positive")
    in_f = {q: _accepting_set(a, q) for q in a.states}
    bound = n * sum(1 for q in a.states if not in_f[q])

    def name(q: str, c: int) -> str:
        return f"({q},{c})"

    initial = {(q, 0 if in_f[q] else 1) for q in a.initial}
    transitions: dict[tuple[str, str], frozenset[str]] = {}
    seen = set(initial)
    todo = deque(initial)
    while todo:
        q, c = todo.popleft()
        for x in a.alphabet:
            targets = set()
            for q2 in a.successors(q, x):
                if in_f[q2]:
                    targets.add((q2, 0))
                elif c + 1 <= bound:
                    targets.add((q2, c + 1))
            if not targets:
                continue
            transitions[(name(q, c), x)] = frozenset(name(*t) for t in targets)
            for t in targets:
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
    states = tuple(sorted(name(q, c) for q, c in seen))
    out = ParityAutomaton(
        a.alphabet,
        states,
        frozenset(name(q, c) for q, c in initial),
        transitions,
        {name(q, c): 0 for q, c in seen},
    )
    assert out.size <= counter_state_bound(a, n)
    return out


def reduce_parity_colors(a: ParityAutomaton, n: int, m_prime: int) -> ParityAutomaton:
    """n-lasso-precise reduction of a deterministic parity automaton to at
    most ``m_prime`` colors.

    After skipping n*|Q| steps the construction tracks the highest color at
    or above the elimination threshold, resetting a step counter whenever
    the tracked color reappears and killing the run when the counter would
    reach n*|Q| (the tracked color went stale).  Runs that never see an
    eliminated color fall through to the original coloring.  For
    ``m_prime = 1`` the output must be safety, so a stale *odd* tracked
    color is not refreshed by mere reappearance; only a strictly higher
    color rescues the run.
    """
    if not is_deterministic(a):
        raise ContractViolation("color reduction requires a deterministic automaton")
    if n < 1:
        raise InputError("precision bound must be positive")
    m = a.color_count
    if not 0 < m_prime < m:
        raise ContractViolation(
            f"color budget must satisfy 0 < m_prime < {m}, got {m_prime}"
        )
    palette = a.colors
    lo, hi = palette[0], palette[-1]
    assert palette == tuple(range(lo, hi + 1)), "constructor guarantees gap-free colors"
    thr = lo + m_prime  # colors >= thr are eliminated, colors < thr survive
    limit = n * a.size
    kill_odd = m_prime == 1
    pinned_live = m_prime > 1 or lo % 2 == 0
    kept_even = max((c for c in range(lo, thr) if c % 2 == 0), default=0)
    kept_odd = max((c for c in range(lo, thr) if c % 2 == 1), default=1)

    def color_of(kind: str, q: str, h: int) -> int:
        if m_prime == 1:
            return 0
        if kind == "p1" or h == -1:
            return lo if kind != "pin" else a.coloring[q]
        return kept_even if h % 2 == 0 else kept_odd

    def mk(kind: str, q: str, c: int, h: int) -> tuple:
        return (kind, q, c, h)

    def name(node: tuple) -> str:
        kind, q, c, h = node
        if kind == "p1":
            return f"skip[{q},{c}]"
        mark = "-" if h == -1 else str(h)
        return f"track[{q},{c},{mark}]"

    (q0,) = a.initial
    start = mk("p1", q0, 0, -1)
    seen = {start}
    todo = deque([start])
    transitions: dict[tuple[str, str], frozenset[str]] = {}
    coloring: dict[str, int] = {}
    order: list[tuple] = []
    while todo:
        node = todo.popleft()
        order.append(node)
        kind, q, c, h = node
        for x in a.alphabet:
            nxt = a.successors(q, x)
            if not nxt:
                continue
            (q2,) = nxt
            mu2 = a.coloring[q2]
            if kind == "p1":
                if c < limit - 1:
                    dst = mk("p1", q2, c + 1, -1)
                else:
                    dst = mk("t", q2, 0, mu2 if mu2 >= thr else -1)
            elif h == -1:
                if c == limit:  # pinned: no eliminated color showed up in time
                    if not pinned_live or mu2 >= thr:
                        continue
                    dst = mk("t", q2, limit, -1)
                elif mu2 >= thr:
                    dst = mk("t", q2, 0, mu2)
                else:
                    dst = mk("t", q2, c + 1, -1)
            else:
                if mu2 >= thr and mu2 > h:
                    dst = mk("t", q2, 0, mu2)
                elif mu2 == h and not (kill_odd and h % 2 == 1):
                    dst = mk("t", q2, 0, h)
                else:
                    if c + 1 >= limit:
                        continue  # tracked color went stale: reject
                    dst = mk("t", q2, c + 1, h)
            transitions[(name(node), x)] = frozenset({name(dst)})
            if dst not in seen:
                seen.add(dst)
                todo.append(dst)

    for node in order:
        kind, q, c, h = node
        node_kind = kind if not (kind == "t" and h == -1 and c == limit) else "pin"
        coloring[name(node)] = color_of(node_kind, q, h)
    out = ParityAutomaton(
        a.alphabet,
        tuple(name(v) for v in order),
        frozenset({name(start)}),
        transitions,
        coloring,
    )
    assert out.size <= color_reduction_state_bound(a, n, m_prime)
    assert out.color_count <= m_prime
    return out


def drop_one_color(a: ParityAutomaton, n: int) -> ParityAutomaton:
    """Shed the highest color class while staying n-lasso-precise."""
    if a.color_count < 2:
        raise ContractViolation("need at least two colors to drop one")
    return reduce_parity_colors(a, n, a.color_count - 1)


def _empty_safety(alphabet: Alphabet) -> ParityAutomaton:
    return ParityAutomaton(alphabet, ("void",), frozenset({"void"}), {}, {"void": 0})


def overapproximate(
    a: ParityAutomaton, n: int, mode: Union[str, int] = "safety"
) -> ParityAutomaton:
    """n-lasso-precise over-approximation: complement, under-approximate,
    complement again.  ``mode`` is "safety" or a color budget."""
    if not is_deterministic(a):
        raise ContractViolation("over-approximation requires a deterministic automaton")
    comp = complement_dpa(complete_with_sink(a))
    budget = 1 if mode == "safety" else int(mode)
    if budget < 1:
        raise InputError("color budget must be positive")
    if comp.color_count <= budget:
        inner = comp if budget > 1 or is_safety(comp) else _empty_safety(comp.alphabet)
    else:
        inner = reduce_parity_colors(comp, n, budget)
    return complement_dpa(complete_with_sink(inner))
