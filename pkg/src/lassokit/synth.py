"""Bounded synthesis of lasso-precise automata.

The decision problem: does a deterministic parity automaton with k states
and m colors exist whose language is contained in a formula's language and
matches it on all lassos of base length n?  It is encoded as a 2-QBF
query: existential variables choose transitions and colors, universal
variables range over candidate words (letter bits plus a loop marker) and
candidate runs (state selectors plus a run-loop marker).

Solving happens one of three ways: expanding the universals for tiny
instances and deciding the residual SAT problem internally, handing a
QDIMACS file to an external solver, or enumerating automata directly
(the brute force path, which doubles as the test oracle for the other
two).
"""

from __future__ import annotations

import itertools
import os
import re
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from typing import Optional

from .boolexpr import ExprPool, solve_cnf
from .core import (
    Alphabet,
    ContractViolation,
    InputError,
    Lasso,
    ParityAutomaton,
    ResourceLimit,
    SolverFailure,
    accepts_lasso,
)
from .lassolab import PrecisionReport, check_lasso_precise
from .ltl import ApLetterMap, LtlFormula, ltl_oracle

DEFAULT_EXPANSION_LIMIT = 1_000_000
DEFAULT_SEARCH_CEILING = 1_000_000
SOLVER_ENV_VAR = "LASSOKIT_QBF_SOLVER"


@dataclass(frozen=True)
class SynthesisQuery:
    """One synthesis instance: formula, letter map, and the three budgets."""

    formula: LtlFormula
    ap_map: ApLetterMap
    n: int
    k: int
    m: int
    target: str = "deterministic"

    def __post_init__(self):
        if min(self.n, self.k, self.m) < 1:
            raise InputError("bounds n, k, m must all be positive")
        if self.target not in ("deterministic", "nondeterministic"):
            raise InputError(f"unknown target kind {self.target!r}")
        missing = self.formula.atoms() - set(self.ap_map.aps)
        if missing:
            raise InputError(f"formula atoms {sorted(missing)} not in the letter map")


@dataclass
class QbfProblem:
    """Encoded 2-QBF query plus the bookkeeping to decode models.

    ``parts`` maps subformula names to pool node ids so tests can probe
    each piece of the matrix on its own.
    """

    query: SynthesisQuery
    pool: ExprPool
    matrix: int
    universal_part: int
    parts: dict[str, int]
    trans_vars: dict[tuple[int, int, int], int]
    color_vars: dict[tuple[int, int], int]
    letter_vars: dict[tuple[int, int], int]
    word_loop_vars: dict[int, int]
    run_state_vars: dict[tuple[int, int], int]
    run_loop_vars: dict[int, int]
    var_roles: dict[int, str] = field(default_factory=dict)

    @property
    def var_count(self) -> int:
        return len(self.var_roles)

    @property
    def existential_vars(self) -> list[int]:
        return sorted(set(self.trans_vars.values()) | set(self.color_vars.values()))

    @property
    def universal_vars(self) -> list[int]:
        return sorted(
            set(self.letter_vars.values())
            | set(self.word_loop_vars.values())
            | set(self.run_state_vars.values())
            | set(self.run_loop_vars.values())
        )


def encode(q: SynthesisQuery) -> QbfProblem:
    """Build the quantified matrix for the query.

    Shape: automaton-wellformedness AND (loop-marker-wellformed IMPLIES
    (size-k accepting runs yield formula words) AND (formula words of base
    n keep the run alive and any closed run loop has even maximal color)).
    """
    k, n, m = q.k, q.n, q.m
    aps = q.ap_map.aps
    sigma = q.ap_map.alphabet
    S = len(sigma)
    N = max(k, n)
    R = n * k
    s_bits = max(0, (k - 1).bit_length())

    pool = ExprPool()
    roles: dict[int, str] = {}
    counter = itertools.count(1)

    def fresh(role: str) -> int:
        v = next(counter)
        roles[v] = role
        return v

    trans_vars = {
        (s, li, s2): fresh(f"trans q{s} --{sigma[li]}--> q{s2}")
        for s in range(k)
        for li in range(S)
        for s2 in range(k)
    }
    color_vars = {
        (s, c): fresh(f"color q{s} = {c}") for s in range(k) for c in range(m)
    }
    letter_vars = {
        (j, b): fresh(f"letter bit: position {j}, ap {aps[b]}")
        for j in range(N)
        for b in range(len(aps))
    }
    word_loop_vars = {j: fresh(f"word loop starts at {j}") for j in range(N)}
    run_state_vars = {
        (j, b): fresh(f"run state bit {b} at step {j}")
        for j in range(R)
        for b in range(s_bits)
    }
    run_loop_vars = {j: fresh(f"run loop starts at {j}") for j in range(R)}

    P = pool
    tv = {key: P.var(v) for key, v in trans_vars.items()}
    cv = {key: P.var(v) for key, v in color_vars.items()}
    lettv = {key: P.var(v) for key, v in letter_vars.items()}
    lv = {key: P.var(v) for key, v in word_loop_vars.items()}
    sv = {key: P.var(v) for key, v in run_state_vars.items()}
    rv = {key: P.var(v) for key, v in run_loop_vars.items()}

    # --- automaton wellformedness ---------------------------------------
    shape_parts = []
    if q.target == "deterministic":
        for s in range(k):
            for li in range(S):
                shape_parts.append(
                    P.at_most_one([tv[(s, li, s2)] for s2 in range(k)])
                )
    for s in range(k):
        shape_parts.append(P.exactly_one([cv[(s, c)] for c in range(m)]))
    automaton_shape = P.conj_all(shape_parts)

    # --- universal wellformedness ---------------------------------------
    loop_onehot = P.exactly_one([lv[j] for j in range(N)])
    # Letters are AP valuations, so every bit pattern denotes a letter.
    letters_valid = P.TRUE

    # --- helpers over the symbolic word and run -------------------------
    def word_letter_bit(j: int, b: int) -> int:
        return lettv[(j, b)]

    def word_letter_eq(j: int, li: int) -> int:
        mask = q.ap_map.mask_of(sigma[li])
        return P.conj_all(
            word_letter_bit(j, b) if mask >> b & 1 else P.neg(word_letter_bit(j, b))
            for b in range(len(aps))
        )

    def run_state_eq(j: int, s: int) -> int:
        return P.conj_all(
            sv[(j, b)] if s >> b & 1 else P.neg(sv[(j, b)]) for b in range(s_bits)
        )

    def run_state_valid(j: int) -> int:
        if k == 1 << s_bits or s_bits == 0:
            return P.TRUE
        return P.disj_all(run_state_eq(j, s) for s in range(k))

    def mu_eq(j: int, c: int) -> int:
        # color of the run state at step j
        return P.disj_all(
            P.conj(run_state_eq(j, s), cv[(s, c)]) for s in range(k)
        )

    def even_max(colors_seen: list[int]) -> int:
        # max-even over "color c occurs in the loop" flags
        out = []
        for c in range(0, m, 2):
            higher = [P.neg(colors_seen[c2]) for c2 in range(c + 1, m)]
            out.append(P.conj_all([colors_seen[c]] + higher))
        return P.disj_all(out)

    # --- bounded formula evaluation on the symbolic word ----------------
    def formula_value(base: int) -> int:
        """word (prefix of length base with marked loop) satisfies the formula"""
        cases = []
        for lw in range(base):
            cases.append(P.conj(lv[lw], _eval_formula(P, q.formula, base, lw, atom_bit)))
        return P.disj_all(cases)

    def atom_bit(pos: int, name: str) -> int:
        return word_letter_bit(pos, aps.index(name))

    word_models_k = formula_value(k)
    word_models_n = formula_value(n)

    # --- size-k runs imply the formula ----------------------------------
    def strict_step(j: int, j2: int) -> int:
        # the run takes an existing transition from step j to step j2
        out = []
        for s in range(k):
            per_letter = []
            for li in range(S):
                succ = P.disj_all(
                    P.conj(tv[(s, li, s2)], run_state_eq(j2, s2)) for s2 in range(k)
                )
                per_letter.append(P.conj(word_letter_eq(j, li), succ))
            out.append(P.conj(run_state_eq(j, s), P.disj_all(per_letter)))
        return P.disj_all(out)

    after_l = []
    acc = P.FALSE
    for j in range(N):
        acc = P.disj(acc, lv[j])
        after_l.append(acc)

    strict_match = P.conj_all(
        [run_state_eq(0, 0)]
        + [run_state_valid(j) for j in range(k)]
        + [strict_step(j, j + 1) for j in range(k - 1)]
        + [P.disj_all(P.conj(lv[lw], strict_step(k - 1, lw)) for lw in range(k))]
    )
    k_loop_colors = [
        P.disj_all(P.conj(after_l[j], mu_eq(j, c)) for j in range(k))
        for c in range(m)
    ]
    k_run_accepting = even_max(k_loop_colors)
    valid_k = P.disj_all(lv[j] for j in range(k))
    runs_imply_formula = P.implies(
        P.conj(valid_k, strict_match, k_run_accepting), word_models_k
    )

    # --- formula words of base n are accepted ---------------------------
    def run_word_bit(j: int, b: int) -> int:
        # bit b of the letter consumed at run step j; steps beyond the word
        # base wrap into the word loop
        cases = []
        for lw in range(n):
            pos = j if j < n else lw + (j - lw) % (n - lw)
            cases.append(P.conj(lv[lw], word_letter_bit(pos, b)))
        return P.disj_all(cases)

    def run_word_eq(j: int, li: int) -> int:
        mask = q.ap_map.mask_of(sigma[li])
        return P.conj_all(
            run_word_bit(j, b) if mask >> b & 1 else P.neg(run_word_bit(j, b))
            for b in range(len(aps))
        )

    def defined_at(j: int) -> int:
        out = []
        for s in range(k):
            per_letter = P.disj_all(
                P.conj(
                    run_word_eq(j, li),
                    P.disj_all(tv[(s, li, s2)] for s2 in range(k)),
                )
                for li in range(S)
            )
            out.append(P.conj(run_state_eq(j, s), per_letter))
        return P.disj_all(out)

    def taken_step(j: int, j2: int) -> int:
        out = []
        for s in range(k):
            per_letter = []
            for li in range(S):
                succ = P.disj_all(
                    P.conj(tv[(s, li, s2)], run_state_eq(j2, s2)) for s2 in range(k)
                )
                per_letter.append(P.conj(run_word_eq(j, li), succ))
            out.append(P.conj(run_state_eq(j, s), P.disj_all(per_letter)))
        return P.disj_all(out)

    defined = [defined_at(j) for j in range(R)]
    tolerant_match = P.conj_all(
        [run_state_eq(0, 0)]
        + [run_state_valid(j) for j in range(R)]
        + [P.implies(defined[j], taken_step(j, j + 1)) for j in range(R - 1)]
    )
    run_all_defined = P.conj_all(defined)

    run_loop_onehot = P.exactly_one([rv[j] for j in range(R)])
    wrap_cases = []
    for rw in range(R):
        compatible = P.disj_all(
            lv[lw] for lw in range(n) if rw >= lw and (R - rw) % (n - lw) == 0
        )
        wrap_cases.append(P.conj(rv[rw], compatible, taken_step(R - 1, rw)))
    run_loop_valid = P.conj(run_loop_onehot, P.disj_all(wrap_cases))

    after_r = []
    acc = P.FALSE
    for j in range(R):
        acc = P.disj(acc, rv[j])
        after_r.append(acc)
    n_loop_colors = [
        P.disj_all(P.conj(after_r[j], mu_eq(j, c)) for j in range(R))
        for c in range(m)
    ]
    run_loop_colors_even = even_max(n_loop_colors)

    valid_n = P.disj_all(lv[j] for j in range(n))
    formula_words_accepted = P.implies(
        P.conj(valid_n, word_models_n, tolerant_match),
        P.conj(run_all_defined, P.implies(run_loop_valid, run_loop_colors_even)),
    )

    universal_part = P.implies(
        P.conj(loop_onehot, letters_valid),
        P.conj(runs_imply_formula, formula_words_accepted),
    )
    matrix = P.conj(automaton_shape, universal_part)

    parts = {
        "automaton_shape": automaton_shape,
        "loop_onehot": loop_onehot,
        "letters_valid": letters_valid,
        "word_models_k": word_models_k,
        "word_models_n": word_models_n,
        "run_match_strict": strict_match,
        "run_accepting_k": k_run_accepting,
        "runs_imply_formula": runs_imply_formula,
        "run_match_tolerant": tolerant_match,
        "run_all_defined": run_all_defined,
        "run_loop_valid": run_loop_valid,
        "run_loop_colors_even": run_loop_colors_even,
        "formula_words_accepted": formula_words_accepted,
    }

    problem = QbfProblem(
        query=q,
        pool=pool,
        matrix=matrix,
        universal_part=universal_part,
        parts=parts,
        trans_vars=trans_vars,
        color_vars=color_vars,
        letter_vars=letter_vars,
        word_loop_vars=word_loop_vars,
        run_state_vars=run_state_vars,
        run_loop_vars=run_loop_vars,
        var_roles=roles,
    )
    declared = set(roles)
    if not pool.free_vars(matrix) <= declared:
        raise ContractViolation("matrix references undeclared variables")
    return problem


def _eval_formula(pool: ExprPool, f: LtlFormula, base: int, lw: int, atom_bit) -> int:
    """Loop-aware bounded semantics on the word with loop start lw.

    Temporal operators are evaluated with two backward sweeps over the
    loop (the second seeded by the first) and one over the stem, the same
    scheme the concrete lasso evaluator uses.
    """
    P = pool
    memo: dict[tuple[int, int], int] = {}

    def nxt(j: int) -> int:
        return j + 1 if j + 1 < base else lw

    def until(a: LtlFormula, b: LtlFormula, dual: bool) -> dict[int, int]:
        def step(j: int, follow: int) -> int:
            if dual:
                return P.conj(ev(b, j), P.disj(ev(a, j), follow))
            return P.disj(ev(b, j), P.conj(ev(a, j), follow))

        vals: dict[int, int] = {}
        wrap = P.TRUE if dual else P.FALSE
        for _sweep in range(2):
            for j in range(base - 1, lw - 1, -1):
                vals[j] = step(j, wrap if j == base - 1 else vals[j + 1])
            wrap = vals[lw]
        for j in range(lw - 1, -1, -1):
            vals[j] = step(j, vals[j + 1])
        return vals

    def ev(g: LtlFormula, j: int) -> int:
        key = (id(g), j)
        got = memo.get(key)
        if got is not None:
            return got
        kind = g.kind
        if kind == "atom":
            out = atom_bit(j, g.name)
        elif kind == "true":
            out = P.TRUE
        elif kind == "false":
            out = P.FALSE
        elif kind == "not":
            out = P.neg(ev(g.operands[0], j))
        elif kind == "and":
            out = P.conj(*(ev(x, j) for x in g.operands))
        elif kind == "or":
            out = P.disj(*(ev(x, j) for x in g.operands))
        elif kind == "implies":
            out = P.implies(ev(g.operands[0], j), ev(g.operands[1], j))
        elif kind == "next":
            out = ev(g.operands[0], nxt(j))
        else:
            from . import ltl as _ltl

            if kind == "until":
                a, b = g.operands
                table = until(a, b, dual=False)
            elif kind == "release":
                a, b = g.operands
                table = until(a, b, dual=True)
            elif kind == "eventually":
                table = until(_ltl.true(), g.operands[0], dual=False)
            else:  # always
                table = until(_ltl.false(), g.operands[0], dual=True)
            for pos, val in table.items():
                memo[(id(g), pos)] = val
            return table[j]
        memo[key] = out
        return out

    return ev(f, 0)


# ---------------------------------------------------------------------------
# QDIMACS emission

def emit_qdimacs(p: QbfProblem) -> str:
    """Render the problem as prenex ∃∀∃ CNF in QDIMACS.

    Tseitin auxiliaries land in the innermost existential block.  Output is
    deterministic for a fixed problem, and `c` comments map variable
    indices to their roles.
    """
    clauses, next_var = p.pool.tseitin([p.matrix], p.var_count + 1)
    aux = list(range(p.var_count + 1, next_var))
    q = p.query
    lines = [
        f"c lasso-precise synthesis: n={q.n} k={q.k} m={q.m} "
        f"target={q.target} formula={q.formula}"
    ]
    for v in sorted(p.var_roles):
        lines.append(f"c var {v}: {p.var_roles[v]}")
    lines.append(f"p cnf {next_var - 1} {len(clauses)}")
    lines.append("e " + " ".join(str(v) for v in p.existential_vars) + " 0")
    lines.append("a " + " ".join(str(v) for v in p.universal_vars) + " 0")
    if aux:
        lines.append("e " + " ".join(str(v) for v in aux) + " 0")
    for cl in clauses:
        lines.append(" ".join(str(lit) for lit in cl) + " 0")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# internal decision by universal expansion

def canonical_assignment_count(p: QbfProblem) -> int:
    """Universal assignments that survive loop wellformedness: every word
    (letters plus one loop marker) times every run (states plus one
    run-loop marker)."""
    q = p.query
    S = len(q.ap_map.alphabet)
    N = max(q.k, q.n)
    R = q.n * q.k
    return (S**N * N) * (q.k**R * R)


def solve_by_expansion(
    p: QbfProblem, limit: int = DEFAULT_EXPANSION_LIMIT
) -> Optional[dict[int, bool]]:
    """Decide the query by instantiating all canonical universal assignments.

    Returns a model over the transition and color variables, or None for
    unsatisfiable.  Raises ResourceLimit when the canonical assignment
    count exceeds ``limit``.  Skipped non-canonical assignments are all
    vacuous: garbage loop markers falsify the loop guard, garbage run
    states falsify the run validity conjuncts.
    """
    count = canonical_assignment_count(p)
    if count > limit:
        raise ResourceLimit(
            f"expansion needs {count} universal instances, limit is {limit}"
        )
    q = p.query
    pool = p.pool
    sigma = q.ap_map.alphabet
    S = len(sigma)
    N = max(q.k, q.n)
    R = q.n * q.k
    s_bits = max(0, (q.k - 1).bit_length())
    ap_count = len(q.ap_map.aps)
    TRUE, FALSE = pool.TRUE, pool.FALSE
    instances: dict[int, None] = {}

    def expand_runs(node: int) -> bool:
        # DFS over run positions, then run-loop markers; False means some
        # instance is constantly false, i.e. the whole query is UNSAT.
        stack = [(0, node)]
        while stack:
            j, cur = stack.pop()
            if j == R or s_bits == 0:
                for rw in range(R):
                    asg = {p.run_loop_vars[i]: i == rw for i in range(R)}
                    inst = pool.fold(cur, asg)
                    if inst == FALSE:
                        return False
                    if inst != TRUE:
                        instances[inst] = None
                continue
            for s in range(q.k):
                asg = {
                    p.run_state_vars[(j, b)]: bool(s >> b & 1)
                    for b in range(s_bits)
                }
                child = pool.fold(cur, asg)
                if child == FALSE:
                    return False
                if child != TRUE:
                    stack.append((j + 1, child))
        return True

    for letters in itertools.product(range(S), repeat=N):
        word_asg = {}
        for j, li in enumerate(letters):
            mask = q.ap_map.mask_of(sigma[li])
            for b in range(ap_count):
                word_asg[p.letter_vars[(j, b)]] = bool(mask >> b & 1)
        for lw in range(N):
            asg = dict(word_asg)
            for j in range(N):
                asg[p.word_loop_vars[j]] = j == lw
            inst = pool.fold(p.universal_part, asg)
            if inst == FALSE:
                return None
            if inst == TRUE:
                continue
            if not expand_runs(inst):
                return None

    big = pool.conj_all([p.parts["automaton_shape"]] + list(instances))
    if big == FALSE:
        return None
    clauses, next_var = pool.tseitin([big], p.var_count + 1)
    model = solve_cnf(clauses, next_var - 1)
    if model is None:
        return None
    return {v: model.get(v, False) for v in p.existential_vars}


def model_satisfies(p: QbfProblem, model: dict[int, bool]) -> bool:
    """Whether fixing the existential variables to ``model`` makes the
    matrix valid for every universal assignment (decided exactly by
    refuting the negated residual)."""
    asg = {v: bool(model.get(v, False)) for v in p.existential_vars}
    residual = p.pool.fold(p.matrix, asg)
    negated = p.pool.neg(residual)
    if negated == p.pool.FALSE:
        return True
    if negated == p.pool.TRUE:
        return False
    clauses, next_var = p.pool.tseitin([negated], p.var_count + 1)
    return solve_cnf(clauses, next_var - 1) is None


# ---------------------------------------------------------------------------
# model decoding and certificate checking

def decode(p: QbfProblem, model: dict[int, bool]) -> ParityAutomaton:
    """Read the chosen automaton out of a model.

    States are named q0..q{k-1} with q0 initial.  A state with no chosen
    color, or several, means the wellformedness part of the encoding was
    violated and is reported as a contract violation.
    """
    q = p.query
    sigma = q.ap_map.alphabet
    names = [f"q{s}" for s in range(q.k)]
    coloring = {}
    for s in range(q.k):
        picked = [c for c in range(q.m) if model.get(p.color_vars[(s, c)], False)]
        if len(picked) != 1:
            raise ContractViolation(
                f"model picks {len(picked)} colors for state q{s}"
            )
        coloring[names[s]] = picked[0]
    transitions: dict[tuple[str, str], set[str]] = {}
    for (s, li, s2), v in p.trans_vars.items():
        if model.get(v, False):
            transitions.setdefault((names[s], sigma[li]), set()).add(names[s2])
    return ParityAutomaton(
        alphabet=sigma,
        states=tuple(names),
        initial=frozenset({names[0]}),
        transitions={key: frozenset(t) for key, t in transitions.items()},
        coloring=coloring,
    )


def verify_certificate(q: SynthesisQuery, a: ParityAutomaton) -> PrecisionReport:
    """Independent re-check of a synthesized automaton: base-n agreement
    plus containment on all bases up to n*k."""
    phi = ltl_oracle(q.formula, q.ap_map)
    return check_lasso_precise(a, phi, q.n, inclusion_bound=q.n * q.k)


# ---------------------------------------------------------------------------
# brute-force enumeration (independent oracle for the encoding)

def search_space_size(alphabet_size: int, k: int, m: int, target: str) -> int:
    """Documented pre-pruning candidate count for the enumerator."""
    if target == "deterministic":
        return (k + 1) ** (k * alphabet_size) * m**k
    return (1 << k) ** (k * alphabet_size) * m**k * k


def _canonical_reach(table: tuple, k: int, S: int) -> Optional[int]:
    """Reachable-state count if the successor table is in canonical form.

    Canonical means: states are numbered in first-visit order (scanning
    states, then letters, in index order from state 0), and rows of
    never-visited states are all dead.  Every automaton language has
    exactly one canonical representative, so enumeration may skip the
    rest.
    """
    seen = 1
    i = 0
    while i < seen:
        base = i * S
        for li in range(S):
            t = table[base + li]
            if t >= k:
                continue
            if t > seen:
                return None
            if t == seen:
                seen += 1
        i += 1
    for cell in range(seen * S, k * S):
        if table[cell] < k:
            return None
    return seen


def _det_accepts(table, mu, k: int, S: int, stem, loop) -> bool:
    """Run the successor table on the lasso; dead cell means rejection.
    max-even over the colors that recur once the loop closes on itself."""
    s = 0
    for li in stem:
        s = table[s * S + li]
        if s >= k:
            return False
    entry_round = {}
    rounds = []
    while s not in entry_round:
        entry_round[s] = len(rounds)
        colors = []
        for li in loop:
            colors.append(mu[s])
            s = table[s * S + li]
            if s >= k:
                return False
        rounds.append(colors)
    best = -1
    for colors in rounds[entry_round[s]:]:
        for c in colors:
            if c > best:
                best = c
    return best % 2 == 0


def _index_lassos(alphabet: Alphabet, length: int):
    S = len(alphabet)
    for word in itertools.product(range(S), repeat=length):
        for split in range(length):
            yield word[:split], word[split:]


def search_lasso_precise(
    alphabet: Alphabet,
    oracle,
    n: int,
    k: int,
    m: int,
    target: str = "deterministic",
    ceiling: int = DEFAULT_SEARCH_CEILING,
    jobs: int = 1,
    inclusion_bound: Optional[int] = None,
) -> Optional[ParityAutomaton]:
    """Enumerate k-state, m-color automata over the alphabet and return the
    first one that agrees with the oracle on every base-n lasso and accepts
    no counterexample lasso of base up to the inclusion bound (default
    n*k).

    Deterministic candidates are enumerated up to renaming (initial state
    fixed, states numbered in visit order); the nondeterministic mode
    enumerates subset transition tables with initial sets {q0..qi} and is
    only meant for very small k.  Raises ResourceLimit when the documented
    pre-pruning count exceeds the ceiling.
    """
    S = len(alphabet)
    space = search_space_size(S, k, m, target)
    if space > ceiling:
        raise ResourceLimit(
            f"search space has {space} candidates, ceiling is {ceiling}"
        )
    bound = n * k if inclusion_bound is None else inclusion_bound

    cache: dict[Lasso, bool] = {}

    def phi(w: Lasso) -> bool:
        got = cache.get(w)
        if got is None:
            got = bool(oracle(w))
            cache[w] = got
        return got

    equality = []
    for stem, loop in _index_lassos(alphabet, n):
        w = Lasso(tuple(alphabet[i] for i in stem), tuple(alphabet[i] for i in loop))
        equality.append((stem, loop, phi(w)))
    inclusion = []
    for length in range(1, bound + 1):
        if length == n:
            continue
        inclusion.extend(_index_lassos(alphabet, length))

    if target == "deterministic":
        found = _scan_deterministic(
            alphabet, phi, n, k, m, equality, inclusion, bound, jobs
        )
    else:
        found = _scan_nondeterministic(alphabet, phi, n, k, m, equality, bound)
    if found is None:
        return None
    report = check_lasso_precise(found, phi, n, inclusion_bound=bound)
    if not report.ok:
        raise ContractViolation(
            "fast candidate test disagrees with check_lasso_precise"
        )
    return found


def _decode_det_table(index: int, k: int, S: int) -> tuple:
    digits = []
    for _ in range(k * S):
        index, d = divmod(index, k + 1)
        digits.append(d)
    return tuple(digits)


def _build_det(alphabet: Alphabet, table, mu, k: int) -> ParityAutomaton:
    S = len(alphabet)
    names = [f"q{s}" for s in range(k)]
    transitions = {}
    for s in range(k):
        for li in range(S):
            t = table[s * S + li]
            if t < k:
                transitions[(names[s], alphabet[li])] = frozenset({names[t]})
    coloring = {names[s]: mu[s] for s in range(k)}
    return ParityAutomaton(
        alphabet=alphabet,
        states=tuple(names),
        initial=frozenset({names[0]}),
        transitions=transitions,
        coloring=coloring,
    )


def _scan_deterministic(alphabet, phi, n, k, m, equality, inclusion, bound, jobs):
    S = len(alphabet)
    total = (k + 1) ** (k * S)

    def test_table(table) -> Optional[ParityAutomaton]:
        reach = _canonical_reach(table, k, S)
        if reach is None:
            return None
        for mu_r in itertools.product(range(m), repeat=reach):
            mu = mu_r + (0,) * (k - reach)
            ok = True
            for stem, loop, want in equality:
                if _det_accepts(table, mu, k, S, stem, loop) != want:
                    ok = False
                    break
            if not ok:
                continue
            for stem, loop in inclusion:
                if _det_accepts(table, mu, k, S, stem, loop):
                    w = Lasso(
                        tuple(alphabet[i] for i in stem),
                        tuple(alphabet[i] for i in loop),
                    )
                    if not phi(w):
                        ok = False
                        break
            if ok:
                return _build_det(alphabet, table, mu, k)
        return None

    def scan_range(lo: int, hi: int):
        for idx in range(lo, hi):
            got = test_table(_decode_det_table(idx, k, S))
            if got is not None:
                return idx, got
        return None

    if jobs <= 1:
        hit = scan_range(0, total)
        return hit[1] if hit else None
    from concurrent.futures import ThreadPoolExecutor

    chunk = max(1, total // (jobs * 4))
    ranges = [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]
    best = None
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        for hit in pool.map(lambda r: scan_range(*r), ranges):
            if hit is not None and (best is None or hit[0] < best[0]):
                best = hit
    return best[1] if best else None


def _scan_nondeterministic(alphabet, phi, n, k, m, equality, bound):
    # experimental mode: no symmetry pruning beyond the initial-set shape
    S = len(alphabet)
    names = [f"q{s}" for s in range(k)]
    eq_lassos = [
        Lasso(tuple(alphabet[i] for i in stem), tuple(alphabet[i] for i in loop))
        for stem, loop, _ in equality
    ]
    wants = [want for _, _, want in equality]
    extra = []
    for length in range(1, bound + 1):
        if length == n:
            continue
        for stem, loop in _index_lassos(alphabet, length):
            extra.append(
                Lasso(
                    tuple(alphabet[i] for i in stem),
                    tuple(alphabet[i] for i in loop),
                )
            )
    for i0 in range(1, k + 1):
        initial = frozenset(names[:i0])
        for table in itertools.product(range(1 << k), repeat=k * S):
            for mu_r in itertools.product(range(m), repeat=k):
                transitions = {}
                for s in range(k):
                    for li in range(S):
                        bits = table[s * S + li]
                        if bits:
                            transitions[(names[s], alphabet[li])] = frozenset(
                                names[t] for t in range(k) if bits >> t & 1
                            )
                cand = ParityAutomaton(
                    alphabet=alphabet,
                    states=tuple(names),
                    initial=initial,
                    transitions=transitions,
                    coloring={names[s]: mu_r[s] for s in range(k)},
                )
                if all(
                    accepts_lasso(cand, w) == want
                    for w, want in zip(eq_lassos, wants)
                ) and not any(
                    accepts_lasso(cand, w) and not phi(w) for w in extra
                ):
                    return cand
    return None


def brute_force_search(
    q: SynthesisQuery,
    ceiling: int = DEFAULT_SEARCH_CEILING,
    jobs: int = 1,
) -> Optional[ParityAutomaton]:
    """Enumerate candidate automata for the query directly.

    Serves as the independent oracle for the encoding path: the two must
    agree on satisfiability for every query either can afford.
    """
    phi = ltl_oracle(q.formula, q.ap_map)
    return search_lasso_precise(
        q.ap_map.alphabet,
        phi,
        q.n,
        q.k,
        q.m,
        target=q.target,
        ceiling=ceiling,
        jobs=jobs,
    )


# ---------------------------------------------------------------------------
# external solver bridge

def default_solver_command() -> Optional[str]:
    """Solver command from the environment, if configured."""
    got = os.environ.get(SOLVER_ENV_VAR, "").strip()
    return got or None


def solve_external(
    p: QbfProblem, command: str, timeout: float = 600.0
) -> tuple[bool, Optional[dict[int, bool]]]:
    """Hand the problem to an external QBF solver via a QDIMACS file.

    The command gets the file path as its last argument.  The verdict is
    read from the exit code (10 SAT / 20 UNSAT) or from an `s` status
    line or a SAT/UNSAT word in the output.  Existential assignments are
    read from V/v certificate lines when present; without them the result
    degrades to verdict-only (model is None).  Unreachable commands,
    timeouts, and undecipherable output raise SolverFailure.
    """
    text = emit_qdimacs(p)
    fd, path = tempfile.mkstemp(suffix=".qdimacs", prefix="lassokit-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        argv = shlex.split(command) + [path]
        try:
            proc = subprocess.run(
                argv, capture_output=True, text=True, timeout=timeout
            )
        except FileNotFoundError as exc:
            raise SolverFailure(f"solver command not found: {argv[0]}") from exc
        except subprocess.TimeoutExpired as exc:
            raise SolverFailure(f"solver timed out after {timeout}s") from exc
        output = (proc.stdout or "") + "\n" + (proc.stderr or "")
        verdict = _parse_verdict(proc.returncode, output)
        if verdict is None:
            raise SolverFailure(
                f"cannot read a verdict from solver exit code {proc.returncode}"
            )
        if not verdict:
            return False, None
        literals = _parse_certificate(output)
        if not literals:
            return True, None
        model = {v: literals.get(v, False) for v in p.existential_vars}
        return True, model
    finally:
        try:
            os.unlink(path)
        except OSError:
            pass


def _parse_verdict(returncode: int, output: str) -> Optional[bool]:
    if returncode == 10:
        return True
    if returncode == 20:
        return False
    for line in output.splitlines():
        stripped = line.strip()
        if not stripped.startswith(("s ", "s\t")):
            continue
        tail = stripped[1:].strip()
        if tail.startswith("cnf"):
            bits = tail.split()
            if len(bits) >= 2 and bits[1] in ("0", "1"):
                return bits[1] == "1"
        if re.search(r"\bUNSAT(?:ISFIABLE)?\b", tail):
            return False
        if re.search(r"\bSAT(?:ISFIABLE)?\b", tail):
            return True
    if re.search(r"\bUNSAT(?:ISFIABLE)?\b", output):
        return False
    if re.search(r"\bSAT(?:ISFIABLE)?\b", output):
        return True
    return None


def _parse_certificate(output: str) -> dict[int, bool]:
    lits: dict[int, bool] = {}
    for line in output.splitlines():
        stripped = line.strip()
        if not stripped or stripped[0] not in "Vv":
            continue
        body = stripped[1:].strip()
        if not body or not re.fullmatch(r"[-\d\s]+", body):
            continue
        for tok in body.split():
            val = int(tok)
            if val == 0:
                continue
            lits[abs(val)] = val > 0
    return lits


# ---------------------------------------------------------------------------
# minimal-size synthesis

def synthesize_minimal(
    formula: LtlFormula,
    ap_map: ApLetterMap,
    n: int,
    m: int,
    k_max: int,
    target: str = "deterministic",
    solver: Optional[str] = None,
    expansion_limit: int = DEFAULT_EXPANSION_LIMIT,
    search_ceiling: int = DEFAULT_SEARCH_CEILING,
    jobs: int = 1,
) -> Optional[tuple[int, ParityAutomaton]]:
    """Smallest state budget in 1..k_max admitting a lasso-precise
    underapproximation, with its witness automaton.

    Uses the external solver when one is given, otherwise internal
    expansion, falling back to brute force when expansion would exceed its
    limit.  Every certificate is re-verified before being returned; a
    certificate failing re-verification raises SolverFailure.
    """
    if k_max < 1:
        raise InputError("state budget must be positive")
    for k in range(1, k_max + 1):
        q = SynthesisQuery(formula, ap_map, n, k, m, target)
        a = solve_query(q, solver, expansion_limit, search_ceiling, jobs)
        if a is None:
            continue
        report = verify_certificate(q, a)
        if not report.ok:
            raise SolverFailure(
                f"certificate for k={k} failed independent re-verification: "
                + report.summary()
            )
        return k, a
    return None


def solve_query(
    q: SynthesisQuery,
    solver: Optional[str] = None,
    expansion_limit: int = DEFAULT_EXPANSION_LIMIT,
    search_ceiling: int = DEFAULT_SEARCH_CEILING,
    jobs: int = 1,
) -> Optional[ParityAutomaton]:
    """Decide one query and produce a witness automaton or None.

    Engine order: the external solver when a command is given, otherwise
    internal expansion, with brute force as the fallback when expansion is
    over its limit.
    """
    if solver:
        p = encode(q)
        verdict, model = solve_external(p, solver)
        if not verdict:
            return None
        if model is not None:
            return decode(p, model)
        # verdict-only solver: materialize a witness by enumeration
        a = brute_force_search(q, ceiling=search_ceiling, jobs=jobs)
        if a is None:
            raise SolverFailure(
                "external solver reported SAT but no witness could be"
                " materialized by enumeration"
            )
        return a
    try:
        p = encode(q)
        model = solve_by_expansion(p, expansion_limit)
        return decode(p, model) if model is not None else None
    except ResourceLimit:
        return brute_force_search(q, ceiling=search_ceiling, jobs=jobs)
