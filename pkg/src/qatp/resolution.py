"""Classical resolution engines.

``saturate`` runs propositional resolution to a fixed point in batched
rounds: every ordered pair of current clauses (self-pairs included) is
resolved before any resolvent is inserted, which keeps the derivation order
deterministic and aligned with the quantum pipeline's per-round semantics.
Subsumption deletion is deliberately not performed.

The first-order engine (``unify``/``resolve_fol``/``fol_saturate``) exists
as a correctness oracle; quantum reasoning always goes through Herbrand
grounding instead of unification.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import VocabularyError
from .formula import (
    ABSENT, NEG, POS, Atom, Clause, ClauseSet, FolClause, Function, Literal,
    Variable,
)

VALID = "valid"
INVALID = "invalid"
TAUTOLOGY = "tautology"  # unreachable for positional clauses; kept for API parity

REFUTED = "Refuted"
SATURATED = "Saturated"
BUDGET_EXCEEDED = "BudgetExceeded"


@dataclass(frozen=True)
class ResolventOutcome:
    kind: str
    clause: Clause | None = None
    resolved_var: int | None = None


@dataclass
class TraceStep:
    step: int
    premise_ids: tuple
    resolvent: Clause
    resolved_var: int | None

    def to_json(self, names=None):
        return {
            "step": self.step,
            "premise_ids": list(self.premise_ids),
            "resolvent": self.resolvent.render(names),
            "resolved_var": self.resolved_var,
        }


@dataclass
class ProofResult:
    verdict: str
    trace: list = field(default_factory=list)
    rounds: int = 0
    stats: dict = field(default_factory=dict)
    clauses: list = field(default_factory=list)  # full derivation order

    @property
    def refuted(self):
        return self.verdict == REFUTED

    def trace_json(self, names=None) -> str:
        return json.dumps([s.to_json(names) for s in self.trace], indent=2)


def resolve_pair(c1: Clause, c2: Clause) -> ResolventOutcome:
    """Resolve two positional clauses.

    Valid exactly when one variable occurs positively in one premise and
    negatively in the other; the remaining literals are unioned (duplicates
    merge structurally, which is the factoring case).  Zero or two-plus
    complementary pairs give Invalid.
    """
    if c1.num_vars != c2.num_vars:
        raise VocabularyError("clauses over different vocabularies")
    comp = (c1.pos & c2.neg) | (c1.neg & c2.pos)
    if comp == 0 or comp & (comp - 1):
        return ResolventOutcome(INVALID)
    var = comp.bit_length() - 1
    pos = (c1.pos | c2.pos) & ~comp
    neg = (c1.neg | c2.neg) & ~comp
    return ResolventOutcome(VALID, Clause(c1.num_vars, pos, neg), var)


@dataclass
class SaturationBudget:
    max_rounds: int = 64
    max_clauses: int = 100_000


def saturate(kb: ClauseSet, budget: SaturationBudget | None = None) -> ProofResult:
    """Propositional resolution to refutation or fixed point.

    Rounds are batched: all ordered pairs over the current clause list are
    examined, then the new resolvents are appended in (i, j) order.
    """
    budget = budget or SaturationBudget()
    clauses = list(kb.clauses)
    seen = {(c.pos, c.neg) for c in clauses}
    trace = []
    stats = {"pair_queries": 0, "clauses_added": 0}
    step = 0

    for c in clauses:
        if c.is_empty():
            return ProofResult(REFUTED, trace, 0, stats, clauses)

    for round_no in range(1, budget.max_rounds + 1):
        n = len(clauses)
        new_this_round = []
        found_empty = False
        for i in range(n):
            for j in range(n):
                stats["pair_queries"] += 1
                out = resolve_pair(clauses[i], clauses[j])
                if out.kind != VALID:
                    continue
                key = (out.clause.pos, out.clause.neg)
                if key in seen:
                    continue
                seen.add(key)
                step += 1
                trace.append(TraceStep(step, (i, j), out.clause, out.resolved_var))
                new_this_round.append(out.clause)
                stats["clauses_added"] += 1
                if out.clause.is_empty():
                    found_empty = True
                    break
            if found_empty:
                break
        clauses.extend(new_this_round)
        if found_empty:
            return ProofResult(REFUTED, trace, round_no, stats, clauses)
        if not new_this_round:
            return ProofResult(SATURATED, trace, round_no, stats, clauses)
        if len(clauses) > budget.max_clauses:
            return ProofResult(BUDGET_EXCEEDED, trace, round_no, stats, clauses)
    return ProofResult(BUDGET_EXCEEDED, trace, budget.max_rounds, stats, clauses)


# ---------------------------------------------------------------------------
# Unification

@dataclass(frozen=True)
class Substitution:
    """Idempotent variable->term mapping with a passed occurs check."""

    bindings: tuple  # sorted tuple of (name, term)

    @staticmethod
    def from_dict(d: dict) -> "Substitution":
        return Substitution(tuple(sorted(d.items(), key=lambda kv: kv[0])))

    def as_dict(self) -> dict:
        return dict(self.bindings)

    def apply_term(self, t):
        return _apply(t, self.as_dict())

    def apply_atom(self, a: Atom) -> Atom:
        d = self.as_dict()
        return Atom(a.predicate, tuple(_apply(x, d) for x in a.args))

    def apply_clause(self, c: FolClause) -> FolClause:
        return FolClause(tuple(Literal(l.sign, self.apply_atom(l.atom))
                               for l in c.literals))

    def is_empty(self):
        return not self.bindings


def _apply(t, d):
    if isinstance(t, Variable):
        seen = t
        while isinstance(seen, Variable) and seen.name in d:
            seen = d[seen.name]
        if isinstance(seen, Variable):
            return seen
        return _apply(seen, d)
    if isinstance(t, Function):
        return Function(t.name, tuple(_apply(a, d) for a in t.args))
    return t


def _occurs(name, t, d):
    t = _walk(t, d)
    if isinstance(t, Variable):
        return t.name == name
    if isinstance(t, Function):
        return any(_occurs(name, a, d) for a in t.args)
    return False


def _walk(t, d):
    while isinstance(t, Variable) and t.name in d:
        t = d[t.name]
    return t


def _unify_terms(a, b, d):
    a, b = _walk(a, d), _walk(b, d)
    if isinstance(a, Variable):
        if isinstance(b, Variable) and b.name == a.name:
            return d
        if _occurs(a.name, b, d):
            return None
        d = dict(d)
        d[a.name] = b
        return d
    if isinstance(b, Variable):
        return _unify_terms(b, a, d)
    if isinstance(a, type(b)) and isinstance(a, Function):
        if a.name != b.name or len(a.args) != len(b.args):
            return None
        for x, y in zip(a.args, b.args):
            d = _unify_terms(x, y, d)
            if d is None:
                return None
        return d
    if isinstance(a, type(b)):  # both constants
        return d if a.name == b.name else None
    return None


def unify(a: Atom, b: Atom) -> Substitution | None:
    """Most general unifier of two atoms, or None on clash/occurs failure."""
    if a.predicate != b.predicate or len(a.args) != len(b.args):
        return None
    d = {}
    for x, y in zip(a.args, b.args):
        d = _unify_terms(x, y, d)
        if d is None:
            return None
    # normalize to an idempotent mapping
    resolved = {name: _apply(Variable(name), d) for name in d}
    return Substitution.from_dict(resolved)


def _rename_clause(c: FolClause, suffix: str) -> FolClause:
    mapping = {v: Variable(v + suffix) for v in c.variables()}
    return FolClause(tuple(
        Literal(l.sign, Atom(l.atom.predicate,
                             tuple(_apply(a, mapping) for a in l.atom.args)))
        for l in c.literals))


def _canonical(c: FolClause):
    """Rename variables by first occurrence so alphabetic variants collide."""
    mapping = {}
    for i, v in enumerate(c.variables()):
        mapping[v] = Variable(f"_{i}")
    out = tuple(sorted(
        (l.sign, str(Substitution.from_dict(mapping).apply_atom(l.atom)))
        for l in c.literals))
    return out


def _dedup_literals(lits):
    out = []
    for l in lits:
        if l not in out:
            out.append(l)
    return tuple(out)


def factors(c: FolClause) -> list:
    """All one-step factors: unify two same-sign literals, apply globally."""
    out = []
    for i in range(len(c.literals)):
        for j in range(i + 1, len(c.literals)):
            li, lj = c.literals[i], c.literals[j]
            if li.sign != lj.sign:
                continue
            theta = unify(li.atom, lj.atom)
            if theta is None:
                continue
            lits = _dedup_literals(tuple(
                Literal(l.sign, theta.apply_atom(l.atom)) for l in c.literals))
            out.append(FolClause(lits))
    return out


def resolve_fol(c1: FolClause, c2: FolClause) -> list:
    """Binary resolvents over all unifiable complementary pairs plus the
    factors of each input (binary resolution alone is not complete).

    Premises are standardized apart internally.
    """
    a = _rename_clause(c1, "_l")
    b = _rename_clause(c2, "_r")
    out = []
    keys = set()

    def push(clause):
        k = _canonical(clause)
        if k not in keys:
            keys.add(k)
            out.append(clause)

    for i, li in enumerate(a.literals):
        for j, lj in enumerate(b.literals):
            if li.sign == lj.sign:
                continue
            theta = unify(li.atom, lj.atom)
            if theta is None:
                continue
            rest = [l for k, l in enumerate(a.literals) if k != i]
            rest += [l for k, l in enumerate(b.literals) if k != j]
            lits = _dedup_literals(tuple(
                Literal(l.sign, theta.apply_atom(l.atom)) for l in rest))
            signs = {}
            taut = False
            for l in lits:
                key = str(l.atom)
                if signs.setdefault(key, l.sign) != l.sign:
                    taut = True
                    break
            if not taut:
                push(FolClause(lits))
    for f in factors(a) + factors(b):
        push(f)
    return out


def fol_saturate(clauses, max_clauses: int = 20_000,
                 max_steps: int = 200_000) -> ProofResult:
    """Given-clause resolution over first-order clauses, smallest first.

    Sound; finds refutations fairly but is capped rather than complete
    (first-order validity is only semi-decidable).
    """
    usable = []
    keys = set()
    stats = {"pair_queries": 0, "clauses_added": 0}

    def admit(c):
        k = _canonical(c)
        if k in keys:
            return False
        keys.add(k)
        usable.append(c)
        stats["clauses_added"] += 1
        return True

    for c in clauses:
        if c.is_empty():
            return ProofResult(REFUTED, [], 0, stats, list(clauses))
        admit(c)

    agenda = sorted(range(len(usable)), key=lambda i: len(usable[i].literals))
    processed = []
    steps = 0
    while agenda:
        agenda.sort(key=lambda i: (len(usable[i].literals), i))
        given = agenda.pop(0)
        processed.append(given)
        for other in processed:
            steps += 1
            stats["pair_queries"] += 1
            if steps > max_steps or len(usable) > max_clauses:
                return ProofResult(BUDGET_EXCEEDED, [], steps, stats, usable)
            for r in resolve_fol(usable[given], usable[other]):
                if r.is_empty():
                    stats["clauses_added"] += 1
                    return ProofResult(REFUTED, [], steps, stats, usable + [r])
                if admit(r):
                    agenda.append(len(usable) - 1)
    return ProofResult(SATURATED, [], steps, stats, usable)


def entails_by_truth_table(kb: ClauseSet, clause: Clause) -> bool:
    """Brute-force entailment check; oracle for soundness tests (N small)."""
    n = kb.num_vars
    for bits in range(1 << n):
        if not _clause_true(clause, bits, n):
            ok = all(_clause_true(c, bits, n) for c in kb.clauses)
            if ok:
                return False
    return True


def unsat_by_truth_table(kb: ClauseSet) -> bool:
    n = kb.num_vars
    for bits in range(1 << n):
        if all(_clause_true(c, bits, n) for c in kb.clauses):
            return False
    return True


def _clause_true(c: Clause, bits: int, n: int) -> bool:
    return bool(c.pos & bits or c.neg & ~bits & ((1 << n) - 1))
