"""Lasso laboratory: unrolling, exhaustive base enumeration, and the
bounded precision check that compares an automaton against a membership
oracle on all small lassos.
"""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .core import (
    Alphabet,
    InputError,
    Lasso,
    MembershipOracle,
    ParityAutomaton,
    accepts_lasso,
    check_inclusion_exact,
    is_deterministic,
    is_safety,
)


def unroll(w: Lasso, n2: int) -> Lasso:
    """Re-represent ``w`` with base length ``n2`` without changing the word.

    The extra letters are shifted from the loop into the stem, rotating the
    loop accordingly, so any lasso of size n also counts as one of size
    n2 >= n.
    """
    if n2 < w.length:
        raise InputError(f"cannot unroll a lasso of size {w.length} to size {n2}")
    shift = n2 - w.length
    period = len(w.loop)
    moved = tuple(w.loop[i % period] for i in range(shift))
    turn = shift % period
    return Lasso(w.stem + moved, w.loop[turn:] + w.loop[:turn])


def enumerate_bases(alphabet: Alphabet, n: int) -> Iterator[Lasso]:
    """All lassos with base length exactly n: every base word combined with
    every split position, in lexicographic (word, split) order."""
    if n < 1:
        raise InputError("base length must be positive")
    for word in itertools.product(alphabet.letters, repeat=n):
        for split in range(n):
            yield Lasso(word[:split], word[split:])


def automaton_oracle(a: ParityAutomaton) -> MembershipOracle:
    """Membership oracle backed by the automaton's own acceptance check.

    The automaton is attached to the callable so that precision checks can
    upgrade the containment half to an exact product-based test.
    """

    def oracle(w: Lasso) -> bool:
        return accepts_lasso(a, w)

    oracle.automaton = a
    return oracle


@dataclass
class PrecisionReport:
    """Outcome of a bounded precision check.

    ``mismatches`` holds lassos of base length exactly n where automaton and
    oracle disagree; ``inclusion_violations`` holds accepted lassos of base
    length up to the inclusion bound that the oracle rejects.
    """

    n: int
    inclusion_bound: int
    checked_equal: int = 0
    checked_inclusion: int = 0
    exact_inclusion: bool = False
    mismatches: list[tuple[Lasso, bool, bool]] = field(default_factory=list)
    inclusion_violations: list[Lasso] = field(default_factory=list)

    @property
    def agree(self) -> bool:
        return not self.mismatches

    @property
    def ok(self) -> bool:
        return not self.mismatches and not self.inclusion_violations

    def merge(self, other: "PrecisionReport") -> "PrecisionReport":
        if (self.n, self.inclusion_bound) != (other.n, other.inclusion_bound):
            raise InputError("cannot merge reports with different bounds")
        out = PrecisionReport(self.n, self.inclusion_bound)
        out.checked_equal = self.checked_equal + other.checked_equal
        out.checked_inclusion = self.checked_inclusion + other.checked_inclusion
        out.exact_inclusion = self.exact_inclusion or other.exact_inclusion
        out.mismatches = self.mismatches + other.mismatches
        out.inclusion_violations = self.inclusion_violations + other.inclusion_violations
        return out

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "inclusion_bound": self.inclusion_bound,
            "checked_equal": self.checked_equal,
            "checked_inclusion": self.checked_inclusion,
            "exact_inclusion": self.exact_inclusion,
            "ok": self.ok,
            "mismatches": [
                {
                    "base": list(w.base),
                    "split": len(w.stem),
                    "in_language": ref,
                    "accepted": got,
                }
                for w, ref, got in self.mismatches
            ],
            "inclusion_violations": [
                {"base": list(w.base), "split": len(w.stem)}
                for w in self.inclusion_violations
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def summary(self) -> str:
        how = " (plus exact product test)" if self.exact_inclusion else ""
        lines = [
            f"precision check at n={self.n}, inclusion bound {self.inclusion_bound}",
            f"  equality lassos checked: {self.checked_equal}, mismatches: {len(self.mismatches)}",
            f"  inclusion lassos checked: {self.checked_inclusion}{how}, "
            f"violations: {len(self.inclusion_violations)}",
            f"  verdict: {'ok' if self.ok else 'FAILED'}",
        ]
        for w, ref, got in self.mismatches[:10]:
            lines.append(f"  mismatch {w}: language={ref} automaton={got}")
        for w in self.inclusion_violations[:10]:
            lines.append(f"  accepted outside language: {w}")
        return "\n".join(lines)


def default_inclusion_bound(a: ParityAutomaton, n: int) -> int:
    """Default bound B = max(n, |a|); documented heuristic, callers may widen."""
    return max(n, a.size)


def _scan(a, phi, n, lengths_and_words) -> PrecisionReport:
    report = PrecisionReport(0, 0)  # bounds fixed up by caller before merge
    for length, word in lengths_and_words:
        for split in range(length):
            w = Lasso(word[:split], word[split:])
            got = accepts_lasso(a, w)
            if length == n:
                ref = phi(w)
                report.checked_equal += 1
                if got != ref:
                    report.mismatches.append((w, ref, got))
            else:
                report.checked_inclusion += 1
                if got and not phi(w):
                    report.inclusion_violations.append(w)
    return report


def check_lasso_precise(
    a: ParityAutomaton,
    phi: MembershipOracle,
    n: int,
    inclusion_bound: Optional[int] = None,
    jobs: int = 1,
    reference: Optional[ParityAutomaton] = None,
) -> PrecisionReport:
    """Compare ``a`` against the oracle on all lassos of base length n
    (equality) and check that every accepted lasso satisfies the oracle.

    The containment half is decided exactly (product with the complemented
    reference) whenever a deterministic reference automaton is known, either
    passed explicitly or carried by an automaton_oracle, and ``a`` is a
    safety automaton.  Otherwise it is tested exhaustively on all bases up
    to the inclusion bound, which defaults to max(n, |a|); callers checking
    a large automaton against a bare oracle should pass a bound that they
    can afford.  ``jobs`` splits the enumeration into chunks evaluated on a
    thread pool, merged associatively.
    """
    if n < 1:
        raise InputError("precision bound must be positive")
    ref_auto = reference if reference is not None else getattr(phi, "automaton", None)
    exact = (
        ref_auto is not None
        and is_safety(a)
        and is_deterministic(ref_auto)
        and ref_auto.alphabet.letters == a.alphabet.letters
    )
    if inclusion_bound is None:
        bound = n if exact else default_inclusion_bound(a, n)
    else:
        bound = inclusion_bound
    if bound < n:
        raise InputError("inclusion bound must be at least the precision bound")

    work: list[tuple[int, tuple[str, ...]]] = []
    for length in range(1, bound + 1):
        for word in itertools.product(a.alphabet.letters, repeat=length):
            work.append((length, word))

    if jobs <= 1:
        parts = [_scan(a, phi, n, work)]
    else:
        chunk = max(1, len(work) // jobs)
        slices = [work[i : i + chunk] for i in range(0, len(work), chunk)]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda s: _scan(a, phi, n, s), slices))

    total = PrecisionReport(n, bound)
    for p in parts:
        p.n, p.inclusion_bound = n, bound
        total = total.merge(p)
    if exact:
        total.exact_inclusion = True
        included, witness = check_inclusion_exact(a, ref_auto)
        if not included:
            total.inclusion_violations.append(witness)
    return total
