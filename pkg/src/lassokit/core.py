"""Core automaton model: parity automata over finite alphabets, lasso words,
acceptance checks, emptiness, complementation and safety products.

Conventions used throughout the package:

* Acceptance is max-even parity: a run is accepting iff the highest color
  visited infinitely often is even.
* Transition functions may be partial.  A missing entry means the automaton
  rejects by killing the run; ``transitions`` never stores empty successor
  sets.
* Colors are normalized on construction to a gap-free range that starts at
  0 or 1, merging neighbouring colors of equal parity.  This keeps the
  color count equal to the size of the coloring image, so an automaton with
  image {1, 2} is a Buchi automaton and image {0} is a safety automaton.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence


class LassokitError(Exception):
    """Base class for all package errors."""


class InputError(LassokitError):
    """Malformed caller input: unknown letters, empty loops, bad bounds."""


class ContractViolation(LassokitError):
    """A documented precondition of an operation does not hold."""


class ParseError(LassokitError):
    """Rejected text input (LTL or automaton files); message carries position info."""


class ResourceLimit(LassokitError):
    """A configured search or expansion ceiling was exceeded."""


class SolverFailure(LassokitError):
    """An external solver misbehaved (crash, unparsable output)."""


# A membership oracle decides whether the infinite word induced by a lasso
# belongs to some fixed language.
MembershipOracle = Callable[["Lasso"], bool]


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite alphabet of distinct, non-empty letter names."""

    letters: tuple[str, ...]

    def __post_init__(self):
        if not self.letters:
            raise InputError("alphabet must not be empty")
        if len(set(self.letters)) != len(self.letters):
            raise InputError("alphabet letters must be distinct")
        if any(not l for l in self.letters):
            raise InputError("alphabet letters must be non-empty strings")

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __contains__(self, letter: str) -> bool:
        return letter in self.letters

    def __getitem__(self, i: int) -> str:
        return self.letters[i]

    def index(self, letter: str) -> int:
        try:
            return self.letters.index(letter)
        except ValueError:
            raise InputError(f"letter {letter!r} not in alphabet") from None


def _canonical_parts(stem: tuple, loop: tuple) -> tuple[tuple, tuple]:
    """Shrink loop to its primitive period, then retract the stem into it."""
    n = len(loop)
    for p in range(1, n + 1):
        if n % p == 0 and all(loop[i] == loop[i % p] for i in range(n)):
            loop = loop[:p]
            break
    while stem and stem[-1] == loop[-1]:
        stem = stem[:-1]
        loop = loop[-1:] + loop[:-1]
    return stem, loop


@dataclass(frozen=True)
class Lasso:
    """Ultimately periodic word ``stem . loop^w`` given by finite letter tuples.

    The base is ``stem + loop`` and its length is the size of the lasso.
    The loop must be non-empty; the stem may be empty.
    """

    stem: tuple[str, ...]
    loop: tuple[str, ...]

    def __post_init__(self):
        if not self.loop:
            raise InputError("lasso loop must be non-empty")

    @property
    def base(self) -> tuple[str, ...]:
        return self.stem + self.loop

    @property
    def length(self) -> int:
        return len(self.stem) + len(self.loop)

    def letter(self, i: int) -> str:
        """Letter of the induced infinite word at position i >= 0."""
        if i < len(self.stem):
            return self.stem[i]
        return self.loop[(i - len(self.stem)) % len(self.loop)]

    def prefix(self, k: int) -> tuple[str, ...]:
        return tuple(self.letter(i) for i in range(k))

    def canonical(self) -> "Lasso":
        """Shortest lasso denoting the same infinite word."""
        stem, loop = _canonical_parts(self.stem, self.loop)
        return Lasso(stem, loop)

    def __str__(self):
        return "(%s, %s)" % ("".join(self.stem), "".join(self.loop))


def lasso(stem: Sequence[str] | str, loop: Sequence[str] | str) -> Lasso:
    """Convenience constructor; strings are split into single-char letters."""
    return Lasso(tuple(stem), tuple(loop))


@dataclass(frozen=True)
class RunLasso:
    """A lasso-shaped run: one state per base position plus the loop start."""

    states: tuple[str, ...]
    loop_start: int

    def __post_init__(self):
        if not 0 <= self.loop_start < len(self.states):
            raise InputError("run loop start out of range")

    @property
    def loop_states(self) -> tuple[str, ...]:
        return self.states[self.loop_start:]


def minimize_run(run: RunLasso) -> RunLasso:
    """Canonical form of a run lasso (primitive loop, maximal stem retraction)."""
    stem, loop = _canonical_parts(
        run.states[: run.loop_start], run.states[run.loop_start:]
    )
    return RunLasso(stem + loop, len(stem))


def _normalize_coloring(coloring: Mapping[str, int]) -> dict[str, int]:
    """Re-index colors to a contiguous block, merging same-parity neighbours.

    The relative order and the parity of every color are preserved, so the
    max-even acceptance condition is unchanged.  The lowest resulting color
    is 0 or 1 depending on the parity of the lowest input color group.
    """
    used = sorted(set(coloring.values()))
    remap: dict[int, int] = {}
    nxt = -1
    parity = None
    for c in used:
        if parity is None or c % 2 != parity:
            nxt = (c % 2) if nxt < 0 else nxt + 1
            parity = c % 2
        remap[c] = nxt
    return {q: remap[c] for q, c in coloring.items()}


@dataclass(frozen=True, eq=False)
class ParityAutomaton:
    """Nondeterministic parity automaton with max-even acceptance.

    ``transitions`` maps (state, letter) to a non-empty frozenset of
    successor states; absent keys denote rejection.  ``coloring`` is total
    over ``states`` and normalized on construction.
    """

    alphabet: Alphabet
    states: tuple[str, ...]
    initial: frozenset[str]
    transitions: dict[tuple[str, str], frozenset[str]]
    coloring: dict[str, int]

    def __post_init__(self):
        state_set = set(self.states)
        if len(state_set) != len(self.states):
            raise InputError("automaton states must be distinct")
        if not self.initial:
            raise InputError("automaton needs at least one initial state")
        if not self.initial <= state_set:
            raise InputError("initial states must be declared states")
        cleaned: dict[tuple[str, str], frozenset[str]] = {}
        for (q, a), targets in self.transitions.items():
            if q not in state_set:
                raise InputError(f"transition from undeclared state {q!r}")
            if a not in self.alphabet:
                raise InputError(f"transition on unknown letter {a!r}")
            tgt = frozenset(targets)
            if not tgt:
                continue
            if not tgt <= state_set:
                raise InputError(f"transition from {q!r} to undeclared state")
            cleaned[(q, a)] = tgt
        if set(self.coloring) != state_set:
            raise InputError("coloring must assign exactly the declared states")
        if any(c < 0 for c in self.coloring.values()):
            raise InputError("colors must be non-negative")
        object.__setattr__(self, "transitions", cleaned)
        object.__setattr__(self, "coloring", _normalize_coloring(self.coloring))

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def colors(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.coloring.values())))

    @property
    def color_count(self) -> int:
        return len(set(self.coloring.values()))

    def successors(self, q: str, a: str) -> frozenset[str]:
        return self.transitions.get((q, a), frozenset())


def is_deterministic(a: ParityAutomaton) -> bool:
    """Single initial state and at most one successor per state and letter."""
    if len(a.initial) != 1:
        return False
    return all(len(t) == 1 for t in a.transitions.values())


def is_complete(a: ParityAutomaton) -> bool:
    """Every state has at least one successor on every letter."""
    return all(
        (q, x) in a.transitions for q in a.states for x in a.alphabet
    )


def is_buchi(a: ParityAutomaton) -> bool:
    return set(a.coloring.values()) <= {1, 2}


def is_safety(a: ParityAutomaton) -> bool:
    return set(a.coloring.values()) == {0}


def reachable_states(a: ParityAutomaton) -> set[str]:
    seen = set(a.initial)
    todo = deque(seen)
    while todo:
        q = todo.popleft()
        for x in a.alphabet:
            for q2 in a.successors(q, x):
                if q2 not in seen:
                    seen.add(q2)
                    todo.append(q2)
    return seen


def _sccs(nodes: list, succ: Mapping) -> list[list]:
    """Tarjan's algorithm, iterative to dodge recursion limits."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    result: list[list] = []
    counter = [0]
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ.get(root, ())))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ.get(w, ()))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                result.append(comp)
    return result


def _has_accepting_cycle(nodes: Iterable, edges: Mapping, color_of) -> bool:
    """Max-even cycle test: scan colors from the top even color downward;
    in the subgraph restricted to colors <= c, any SCC that contains a
    color-c node and at least one internal edge witnesses acceptance."""
    nodes = list(nodes)
    if not nodes:
        return False
    top = max(color_of(v) for v in nodes)
    for c in range(top - top % 2, -1, -2):
        sub = [v for v in nodes if color_of(v) <= c]
        if not sub:
            continue
        subset = set(sub)
        sub_edges = {
            v: [w for w in edges.get(v, ()) if w in subset] for v in sub
        }
        for comp in _sccs(sub, sub_edges):
            if not any(color_of(v) == c for v in comp):
                continue
            comp_set = set(comp)
            if len(comp) > 1 or comp[0] in sub_edges.get(comp[0], ()):
                if any(w in comp_set for v in comp for w in sub_edges[v]):
                    return True
    return False


def accepts_lasso(a: ParityAutomaton, w: Lasso) -> bool:
    """Decide membership of the induced infinite word in L(a).

    Works on the product of base positions and states; cycles can only
    form among loop positions, and the run is accepting iff some reachable
    cycle has an even maximal color.
    """
    base = w.base
    for letter in base:
        if letter not in a.alphabet:
            raise InputError(f"lasso letter {letter!r} not in automaton alphabet")
    n = len(base)
    wrap = len(w.stem)

    def nxt(i: int) -> int:
        return i + 1 if i + 1 < n else wrap

    start = [(0, q) for q in a.initial]
    edges: dict[tuple[int, str], list[tuple[int, str]]] = {}
    todo = deque(start)
    seen = set(start)
    while todo:
        i, q = todo.popleft()
        outs = []
        for q2 in a.successors(q, base[i]):
            node = (nxt(i), q2)
            outs.append(node)
            if node not in seen:
                seen.add(node)
                todo.append(node)
        edges[(i, q)] = outs
    return _has_accepting_cycle(seen, edges, lambda v: a.coloring[v[1]])


def find_accepting_lasso(
    a: ParityAutomaton,
) -> Optional[tuple[RunLasso, Lasso]]:
    """Return an accepted lasso (run and word) of base length <= |a|, or None.

    The witness takes a shortest path to an accepting simple cycle and is
    cut at the first cycle contact, so stem and loop states are disjoint.
    """
    reach = reachable_states(a)
    succ: dict[str, list[tuple[str, str]]] = {q: [] for q in reach}
    for q in reach:
        for x in a.alphabet:
            for q2 in a.successors(q, x):
                succ[q].append((x, q2))
    if not reach:
        return None
    top = max(a.coloring[q] for q in reach)
    for c in range(top - top % 2, -1, -2):
        sub = {q for q in reach if a.coloring[q] <= c}
        sub_edges = {q: [q2 for (_x, q2) in succ[q] if q2 in sub] for q in sub}
        for comp in _sccs(list(sub), sub_edges):
            comp_set = set(comp)
            anchors = [q for q in comp if a.coloring[q] == c]
            if not anchors:
                continue
            anchor = anchors[0]
            cycle = _cycle_through(anchor, comp_set, succ)
            if cycle is None:
                continue
            stem_path = _path_to_cycle(a, {s for s, _x in cycle}, succ)
            return _assemble_witness(stem_path, cycle)
    return None


def _cycle_through(anchor, comp_set, succ):
    """Simple cycle through anchor inside comp_set, as [(state, letter), ...]."""
    parent: dict[str, tuple[str, str]] = {}
    todo = deque()
    for x, q2 in succ[anchor]:
        if q2 not in comp_set:
            continue
        if q2 == anchor:
            return [(anchor, x)]
        if q2 not in parent:
            parent[q2] = (anchor, x)
            todo.append(q2)
    while todo:
        q = todo.popleft()
        for x, q2 in succ[q]:
            if q2 not in comp_set:
                continue
            if q2 == anchor:
                steps = [(q, x)]
                while q != anchor:
                    p, px = parent[q]
                    steps.append((p, px))
                    q = p
                steps.reverse()
                return steps
            if q2 not in parent:
                parent[q2] = (q, x)
                todo.append(q2)
    return None


def _path_to_cycle(a, cycle_states, succ):
    """Shortest path from an initial state to the first cycle contact."""
    for q0 in sorted(a.initial):
        if q0 in cycle_states:
            return [(q0, None)]
    parent: dict[str, tuple[str, str]] = {}
    todo = deque(sorted(a.initial))
    seen = set(a.initial)
    while todo:
        q = todo.popleft()
        for x, q2 in succ[q]:
            if q2 in seen:
                continue
            seen.add(q2)
            parent[q2] = (q, x)
            if q2 in cycle_states:
                path = [(q2, None)]
                while q2 in parent:
                    p, px = parent[q2]
                    path.append((p, px))
                    q2 = p
                path.reverse()
                return path
            todo.append(q2)
    raise LassokitError("cycle unreachable despite reachability analysis")


def _assemble_witness(stem_path, cycle):
    entry = stem_path[-1][0]
    k = next(i for i, (s, _x) in enumerate(cycle) if s == entry)
    rotated = cycle[k:] + cycle[:k]
    stem_states = tuple(s for s, _x in stem_path[:-1])
    stem_letters = tuple(x for _s, x in stem_path[:-1])
    loop_states = tuple(s for s, _x in rotated)
    loop_letters = tuple(x for _s, x in rotated)
    run = RunLasso(stem_states + loop_states, len(stem_states))
    return run, Lasso(stem_letters, loop_letters)


def is_empty(a: ParityAutomaton) -> bool:
    """True iff no infinite run from an initial state is accepting."""
    return find_accepting_lasso(a) is None


def complete_with_sink(a: ParityAutomaton, sink_name: str = "sink") -> ParityAutomaton:
    """Total-ize the transition function with one rejecting (odd) sink state.

    Returns the automaton unchanged when it is already complete.
    """
    if is_complete(a):
        return a
    sink = sink_name
    while sink in a.states:
        sink = sink + "'"
    transitions = dict(a.transitions)
    for q in a.states + (sink,):
        for x in a.alphabet:
            transitions.setdefault((q, x), frozenset({sink}))
    coloring = dict(a.coloring)
    coloring[sink] = 1
    return ParityAutomaton(
        a.alphabet, a.states + (sink,), a.initial, transitions, coloring
    )


def complement_dpa(a: ParityAutomaton) -> ParityAutomaton:
    """Complement a deterministic complete parity automaton by shifting all
    colors up by one, which flips the parity of the maximal recurring color."""
    if not is_deterministic(a):
        raise ContractViolation("complement requires a deterministic automaton")
    if not is_complete(a):
        raise ContractViolation("complement requires a complete automaton")
    coloring = {q: c + 1 for q, c in a.coloring.items()}
    return ParityAutomaton(a.alphabet, a.states, a.initial, dict(a.transitions), coloring)


def product_safety(s: ParityAutomaton, a: ParityAutomaton) -> ParityAutomaton:
    """Product of a safety automaton with an arbitrary parity automaton.

    The safety side only prunes runs, so the product inherits the parity
    coloring of ``a`` and recognizes the intersection of both languages.
    """
    if not is_safety(s):
        raise ContractViolation("left product operand must be a safety automaton")
    if s.alphabet.letters != a.alphabet.letters:
        raise InputError("product requires identical alphabets")

    def name(p: str, q: str) -> str:
        return f"({p},{q})"

    initial = {(p, q) for p in s.initial for q in a.initial}
    seen = set(initial)
    todo = deque(initial)
    transitions: dict[tuple[str, str], frozenset[str]] = {}
    while todo:
        p, q = todo.popleft()
        for x in s.alphabet:
            targets = {
                (p2, q2)
                for p2 in s.successors(p, x)
                for q2 in a.successors(q, x)
            }
            if not targets:
                continue
            transitions[(name(p, q), x)] = frozenset(name(p2, q2) for p2, q2 in targets)
            for t in targets:
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
    states = tuple(sorted(name(p, q) for p, q in seen))
    coloring = {name(p, q): a.coloring[q] for p, q in seen}
    return ParityAutomaton(
        s.alphabet,
        states,
        frozenset(name(p, q) for p, q in initial),
        transitions,
        coloring,
    )


def check_inclusion_exact(
    s: ParityAutomaton, ref: ParityAutomaton
) -> tuple[bool, Optional[Lasso]]:
    """Exact test of L(s) <= L(ref) for safety s against deterministic ref.

    Implemented as emptiness of the product with the complemented reference;
    on failure the witness lasso lies in L(s) but not in L(ref).
    """
    if not is_deterministic(ref):
        raise ContractViolation("inclusion reference must be deterministic")
    bad = product_safety(s, complement_dpa(complete_with_sink(ref)))
    hit = find_accepting_lasso(bad)
    if hit is None:
        return True, None
    _run, word = hit
    return False, word.canonical()
