"""Logic front end: formula ASTs, CNF conversion, Skolemization, and
Herbrand grounding.

Propositional formulas are trees of Var/Not/And/Or/Implies nodes.  First-order
formulas add Atom leaves (predicate applications over terms) and
Forall/Exists nodes.  Clause-form output uses a positional encoding: every
clause is a pair of bitmasks (positive / negative occurrence) over a frozen
variable vocabulary, which makes duplicate literals and tautologies
structurally unrepresentable.

Surface syntax is s-expressions, e.g. ``(or A (not C))`` or
``(forall x (implies (Man x) (Mortal x)))``.  In first-order terms a bare
name starting with a lowercase letter is a variable; anything else is a
constant.  DIMACS CNF is accepted for propositional input.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import BudgetError, ParseError, VocabularyError

ABSENT, POS, NEG = 0, 1, 2

DEFAULT_GROUND_CAP = 10_000
DEFAULT_TERM_CAP = 10_000


# ---------------------------------------------------------------------------
# ASTs

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Not:
    child: object


@dataclass(frozen=True)
class And:
    children: tuple


@dataclass(frozen=True)
class Or:
    children: tuple


@dataclass(frozen=True)
class Implies:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Variable:
    """First-order variable (ranges over domain objects)."""

    name: str


@dataclass(frozen=True)
class Constant:
    name: str


@dataclass(frozen=True)
class Function:
    name: str
    args: tuple

    def __str__(self):
        return f"{self.name}({','.join(map(str, self.args))})"


def term_is_ground(t) -> bool:
    if isinstance(t, Variable):
        return False
    if isinstance(t, Constant):
        return True
    return all(term_is_ground(a) for a in t.args)


def term_depth(t) -> int:
    if isinstance(t, (Variable, Constant)):
        return 0
    return 1 + max((term_depth(a) for a in t.args), default=0)


def term_str(t) -> str:
    if isinstance(t, (Variable, Constant)):
        return t.name
    return f"{t.name}({','.join(term_str(a) for a in t.args)})"


@dataclass(frozen=True)
class Atom:
    """Predicate application; the FOL leaf node."""

    predicate: str
    args: tuple

    def __str__(self):
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(term_str(a) for a in self.args)})"


@dataclass(frozen=True)
class Forall:
    var: str
    child: object


@dataclass(frozen=True)
class Exists:
    var: str
    child: object


@dataclass(frozen=True)
class Literal:
    sign: int  # POS or NEG
    atom: Atom

    def negated(self):
        return Literal(POS if self.sign == NEG else NEG, self.atom)

    def __str__(self):
        return str(self.atom) if self.sign == POS else f"~{self.atom}"


@dataclass(frozen=True)
class FolClause:
    """Disjunction of first-order literals; variables implicitly universal."""

    literals: tuple

    def variables(self):
        seen = []
        for lit in self.literals:
            for v in _term_vars_many(lit.atom.args):
                if v not in seen:
                    seen.append(v)
        return seen

    def is_empty(self):
        return not self.literals

    def __str__(self):
        return " | ".join(map(str, self.literals)) if self.literals else "[]"


def _term_vars(t, out):
    if isinstance(t, Variable):
        if t.name not in out:
            out.append(t.name)
    elif isinstance(t, Function):
        for a in t.args:
            _term_vars(a, out)


def _term_vars_many(terms):
    out = []
    for t in terms:
        _term_vars(t, out)
    return out


# ---------------------------------------------------------------------------
# Positional clauses

@dataclass(frozen=True)
class Clause:
    """Positional clause over a vocabulary of ``num_vars`` variables.

    ``pos``/``neg`` are bitmasks; bit i set means variable i occurs with that
    polarity.  A variable cannot be both positive and negative (enforced at
    construction), so tautologies are unrepresentable by design.
    """

    num_vars: int
    pos: int
    neg: int

    def __post_init__(self):
        if self.pos & self.neg:
            raise ValueError("variable occurs with both polarities")
        if self.pos >> self.num_vars or self.neg >> self.num_vars:
            raise ValueError("literal outside vocabulary")

    @staticmethod
    def from_statuses(statuses) -> "Clause":
        pos = neg = 0
        for i, s in enumerate(statuses):
            if s == POS:
                pos |= 1 << i
            elif s == NEG:
                neg |= 1 << i
            elif s != ABSENT:
                raise ValueError(f"bad status {s!r}")
        return Clause(len(statuses), pos, neg)

    def status(self, i: int) -> int:
        if self.pos >> i & 1:
            return POS
        if self.neg >> i & 1:
            return NEG
        return ABSENT

    def statuses(self) -> tuple:
        return tuple(self.status(i) for i in range(self.num_vars))

    def is_empty(self) -> bool:
        return self.pos == 0 and self.neg == 0

    def literal_count(self) -> int:
        return bin(self.pos | self.neg).count("1")

    def render(self, names=None) -> str:
        if self.is_empty():
            return "[]"
        parts = []
        for i in range(self.num_vars):
            name = names[i] if names else f"v{i}"
            if self.pos >> i & 1:
                parts.append(name)
            elif self.neg >> i & 1:
                parts.append(f"~{name}")
        return " | ".join(parts)


@dataclass
class ClauseSet:
    """Ordered, duplicate-free clause list over a frozen vocabulary."""

    num_vars: int
    names: list
    clauses: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.names) != self.num_vars:
            raise VocabularyError("names/num_vars mismatch")
        seen = set()
        for c in self.clauses:
            if c.num_vars != self.num_vars:
                raise VocabularyError("clause vocabulary size mismatch")
            key = (c.pos, c.neg)
            if key in seen:
                raise ValueError("duplicate clause in ClauseSet")
            seen.add(key)

    def add(self, clause: Clause) -> bool:
        """Append if new; returns True when the set grew."""
        if clause.num_vars != self.num_vars:
            raise VocabularyError("clause vocabulary size mismatch")
        for c in self.clauses:
            if c.pos == clause.pos and c.neg == clause.neg:
                return False
        self.clauses.append(clause)
        return True

    def __contains__(self, clause):
        return any(c.pos == clause.pos and c.neg == clause.neg for c in self.clauses)

    def __len__(self):
        return len(self.clauses)

    def copy(self) -> "ClauseSet":
        return ClauseSet(self.num_vars, list(self.names), list(self.clauses))

    def render(self) -> list:
        return [c.render(self.names) for c in self.clauses]


def clause_from_names(names_to_sign: dict, vocab: list) -> Clause:
    """Build a Clause from {"A": POS, "C": NEG} over the given vocabulary."""
    statuses = [ABSENT] * len(vocab)
    for name, sign in names_to_sign.items():
        statuses[vocab.index(name)] = sign
    return Clause.from_statuses(statuses)


# ---------------------------------------------------------------------------
# S-expression parsing

_CONNECTIVES = {"and", "or", "not", "implies", "forall", "exists"}


def _tokenize(text):
    tokens = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == ";":  # comment to end of line
            while i < len(text) and text[i] != "\n":
                i += 1
        elif ch in "()":
            tokens.append((ch, line, col))
            col += 1
            i += 1
        else:
            j = i
            while j < len(text) and text[j] not in " \t\r\n();":
                j += 1
            tokens.append((text[i:j], line, col))
            col += j - i
            i = j
    return tokens


def _parse_sexprs(text):
    """Parse text into a list of nested lists/strings with positions."""
    tokens = _tokenize(text)
    pos = 0

    def parse_one():
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError("unexpected end of input: unbalanced parenthesis")
        tok, line, col = tokens[pos]
        pos += 1
        if tok == "(":
            items = []
            while True:
                if pos >= len(tokens):
                    raise ParseError("unbalanced parenthesis", line, col)
                if tokens[pos][0] == ")":
                    pos += 1
                    return items
                items.append(parse_one())
        if tok == ")":
            raise ParseError("unexpected ')'", line, col)
        return (tok, line, col)

    out = []
    while pos < len(tokens):
        out.append(parse_one())
    return out


def _sexpr_to_prop(node):
    if isinstance(node, tuple):
        name, line, col = node
        if name.lower() in _CONNECTIVES:
            raise ParseError(f"operator '{name}' used as a variable", line, col)
        return Var(name)
    if not node:
        raise ParseError("empty form '()' is not a formula")
    head = node[0]
    if isinstance(head, tuple):
        op, line, col = head
        rest = node[1:]
        low = op.lower()
        if low == "not":
            if len(rest) != 1:
                raise ParseError("'not' takes one argument", line, col)
            return Not(_sexpr_to_prop(rest[0]))
        if low == "and":
            return And(tuple(_sexpr_to_prop(r) for r in rest))
        if low == "or":
            return Or(tuple(_sexpr_to_prop(r) for r in rest))
        if low == "implies":
            if len(rest) != 2:
                raise ParseError("'implies' takes two arguments", line, col)
            return Implies(_sexpr_to_prop(rest[0]), _sexpr_to_prop(rest[1]))
        if low in ("forall", "exists"):
            raise ParseError("quantifier in propositional formula", line, col)
        raise ParseError(f"unknown operator '{op}'", line, col)
    raise ParseError("operator position must be a symbol")


def parse_prop(text: str):
    """Parse a propositional formula from s-expression text."""
    forms = _parse_sexprs(text)
    if not forms:
        raise ParseError("no formula in input")
    if len(forms) > 1:
        raise ParseError("expected a single formula")
    return _sexpr_to_prop(forms[0])


def _sexpr_to_term(node):
    if isinstance(node, tuple):
        name, _, _ = node
        if name[0].islower():
            return Variable(name)
        return Constant(name)
    if not node or not isinstance(node[0], tuple):
        raise ParseError("function application needs a symbol head")
    fname = node[0][0]
    return Function(fname, tuple(_sexpr_to_term(a) for a in node[1:]))


def _sexpr_to_fol(node):
    if isinstance(node, tuple):
        name, line, col = node
        raise ParseError(f"bare symbol '{name}' is not a first-order formula", line, col)
    if not node:
        raise ParseError("empty form '()' is not a formula")
    head = node[0]
    if not isinstance(head, tuple):
        raise ParseError("operator position must be a symbol")
    op, line, col = head
    rest = node[1:]
    low = op.lower()
    if low == "not":
        if len(rest) != 1:
            raise ParseError("'not' takes one argument", line, col)
        return Not(_sexpr_to_fol(rest[0]))
    if low == "and":
        return And(tuple(_sexpr_to_fol(r) for r in rest))
    if low == "or":
        return Or(tuple(_sexpr_to_fol(r) for r in rest))
    if low == "implies":
        if len(rest) != 2:
            raise ParseError("'implies' takes two arguments", line, col)
        return Implies(_sexpr_to_fol(rest[0]), _sexpr_to_fol(rest[1]))
    if low in ("forall", "exists"):
        if len(rest) != 2 or not isinstance(rest[0], tuple):
            raise ParseError(f"'{low}' takes a variable and a body", line, col)
        vname = rest[0][0]
        cls = Forall if low == "forall" else Exists
        return cls(vname, _sexpr_to_fol(rest[1]))
    # predicate application
    return Atom(op, tuple(_sexpr_to_term(a) for a in rest))


def parse_fol(text: str):
    """Parse a first-order formula from s-expression text."""
    forms = _parse_sexprs(text)
    if not forms:
        raise ParseError("no formula in input")
    if len(forms) > 1:
        raise ParseError("expected a single formula")
    return _sexpr_to_fol(forms[0])


def parse_fol_problem(text: str):
    """Parse a problem file of ``(axiom F)`` forms and one ``(conjecture F)``.

    Returns (axioms, conjecture) where conjecture may be None.
    """
    axioms, conjecture = [], None
    for form in _parse_sexprs(text):
        if isinstance(form, tuple) or not form or not isinstance(form[0], tuple):
            raise ParseError("expected (axiom ...) or (conjecture ...) forms")
        kind = form[0][0].lower()
        if kind == "axiom":
            if len(form) != 2:
                raise ParseError("'axiom' takes one formula", form[0][1], form[0][2])
            axioms.append(_sexpr_to_fol(form[1]))
        elif kind == "conjecture":
            if len(form) != 2 or conjecture is not None:
                raise ParseError("exactly one 'conjecture' form expected", form[0][1], form[0][2])
            conjecture = _sexpr_to_fol(form[1])
        else:
            raise ParseError(f"unknown form '{kind}'", form[0][1], form[0][2])
    return axioms, conjecture


# ---------------------------------------------------------------------------
# DIMACS

def parse_dimacs(text: str) -> ClauseSet:
    """Parse DIMACS CNF (``p cnf N M`` header, zero-terminated clauses)."""
    num_vars = None
    declared = None
    clauses = []
    pending = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError("bad DIMACS header", lineno, 1)
            num_vars, declared = int(parts[2]), int(parts[3])
            continue
        if num_vars is None:
            raise ParseError("clause before 'p cnf' header", lineno, 1)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal '{tok}'", lineno, 1) from None
            if lit == 0:
                clauses.append(pending)
                pending = []
            else:
                if abs(lit) > num_vars:
                    raise ParseError(f"literal {lit} out of range", lineno, 1)
                pending.append(lit)
    if pending:
        raise ParseError("final clause not zero-terminated")
    if num_vars is None:
        raise ParseError("missing 'p cnf' header")
    if declared is not None and len(clauses) != declared:
        raise ParseError(f"header declares {declared} clauses, found {len(clauses)}")
    names = [f"x{i + 1}" for i in range(num_vars)]
    out = ClauseSet(num_vars, names)
    for lits in clauses:
        statuses = [ABSENT] * num_vars
        taut = False
        for lit in lits:
            idx = abs(lit) - 1
            want = POS if lit > 0 else NEG
            if statuses[idx] not in (ABSENT, want):
                taut = True
                break
            statuses[idx] = want
        if not taut:
            out.add(Clause.from_statuses(statuses))
    return out


# ---------------------------------------------------------------------------
# CNF conversion (propositional)

def _eliminate_implies(f):
    if isinstance(f, Var):
        return f
    if isinstance(f, Not):
        return Not(_eliminate_implies(f.child))
    if isinstance(f, And):
        return And(tuple(_eliminate_implies(c) for c in f.children))
    if isinstance(f, Or):
        return Or(tuple(_eliminate_implies(c) for c in f.children))
    if isinstance(f, Implies):
        return Or((Not(_eliminate_implies(f.lhs)), _eliminate_implies(f.rhs)))
    raise TypeError(f"unexpected node {f!r}")


def _to_nnf(f, negate=False):
    """Push negations to the leaves; eliminates double negation."""
    if isinstance(f, Var):
        return Not(f) if negate else f
    if isinstance(f, Not):
        return _to_nnf(f.child, not negate)
    if isinstance(f, And):
        cls = Or if negate else And
        return cls(tuple(_to_nnf(c, negate) for c in f.children))
    if isinstance(f, Or):
        cls = And if negate else Or
        return cls(tuple(_to_nnf(c, negate) for c in f.children))
    raise TypeError(f"unexpected node {f!r}")


def _collect_vars(f, out):
    if isinstance(f, Var):
        if f.name not in out:
            out.append(f.name)
    elif isinstance(f, Not):
        _collect_vars(f.child, out)
    elif isinstance(f, (And, Or)):
        for c in f.children:
            _collect_vars(c, out)
    elif isinstance(f, Implies):
        _collect_vars(f.lhs, out)
        _collect_vars(f.rhs, out)


def _distribute(f):
    """NNF tree -> list of clauses, each a list of (name, sign) literals.

    Returns None for the constant true (empty conjunction).
    """
    if isinstance(f, Var):
        return [[(f.name, POS)]]
    if isinstance(f, Not):
        return [[(f.child.name, NEG)]]
    if isinstance(f, And):
        out = []
        for c in f.children:
            out.extend(_distribute(c))
        return out
    if isinstance(f, Or):
        if not f.children:
            return [[]]  # empty disjunction: constant false
        parts = [_distribute(c) for c in f.children]
        out = []
        for combo in itertools.product(*parts):
            merged = []
            for clause in combo:
                merged.extend(clause)
            out.append(merged)
        return out
    raise TypeError(f"unexpected node {f!r}")


def to_cnf(f, vocab=None) -> ClauseSet:
    """Convert a propositional formula to clause form.

    Tautological clauses are dropped (the positional encoding cannot express
    them) and duplicate clauses are merged, so the result is equivalent to
    the input for satisfiability and entailment purposes.
    """
    f = _eliminate_implies(f)
    f = _to_nnf(f)
    if vocab is None:
        vocab = []
        _collect_vars(f, vocab)
    index = {name: i for i, name in enumerate(vocab)}
    cs = ClauseSet(len(vocab), list(vocab))
    for lits in _distribute(f):
        statuses = [ABSENT] * len(vocab)
        taut = False
        for name, sign in lits:
            if name not in index:
                raise VocabularyError(f"variable '{name}' missing from vocabulary")
            i = index[name]
            if statuses[i] not in (ABSENT, sign):
                taut = True
                break
            statuses[i] = sign
        if not taut:
            cs.add(Clause.from_statuses(statuses))
    return cs


def eval_prop(f, assignment: dict) -> bool:
    """Truth value of a formula under a name->bool assignment."""
    if isinstance(f, Var):
        return assignment[f.name]
    if isinstance(f, Not):
        return not eval_prop(f.child, assignment)
    if isinstance(f, And):
        return all(eval_prop(c, assignment) for c in f.children)
    if isinstance(f, Or):
        return any(eval_prop(c, assignment) for c in f.children)
    if isinstance(f, Implies):
        return (not eval_prop(f.lhs, assignment)) or eval_prop(f.rhs, assignment)
    raise TypeError(f"unexpected node {f!r}")


def eval_clauseset(cs: ClauseSet, bits: int) -> bool:
    """Truth of a clause set under assignment encoded as a bitmask."""
    for c in cs.clauses:
        if (c.pos & bits) == 0 and (c.neg & ~bits & ((1 << cs.num_vars) - 1)) == 0:
            return False
    return True


# ---------------------------------------------------------------------------
# Skolemization

def _subst_term(t, mapping):
    if isinstance(t, Variable):
        return mapping.get(t.name, t)
    if isinstance(t, Function):
        return Function(t.name, tuple(_subst_term(a, mapping) for a in t.args))
    return t


def _subst_formula(f, mapping):
    if isinstance(f, Atom):
        return Atom(f.predicate, tuple(_subst_term(a, mapping) for a in f.args))
    if isinstance(f, Not):
        return Not(_subst_formula(f.child, mapping))
    if isinstance(f, And):
        return And(tuple(_subst_formula(c, mapping) for c in f.children))
    if isinstance(f, Or):
        return Or(tuple(_subst_formula(c, mapping) for c in f.children))
    if isinstance(f, Implies):
        return Implies(_subst_formula(f.lhs, mapping), _subst_formula(f.rhs, mapping))
    if isinstance(f, (Forall, Exists)):
        inner = {k: v for k, v in mapping.items() if k != f.var}
        return type(f)(f.var, _subst_formula(f.child, inner))
    raise TypeError(f"unexpected node {f!r}")


def _collect_symbols(f, symbols):
    if isinstance(f, Atom):
        for a in f.args:
            _collect_term_symbols(a, symbols)
        for name in _term_vars_many(f.args):
            symbols.add(name)
    elif isinstance(f, Not):
        _collect_symbols(f.child, symbols)
    elif isinstance(f, (And, Or)):
        for c in f.children:
            _collect_symbols(c, symbols)
    elif isinstance(f, Implies):
        _collect_symbols(f.lhs, symbols)
        _collect_symbols(f.rhs, symbols)
    elif isinstance(f, (Forall, Exists)):
        _collect_symbols(f.child, symbols)


def _collect_term_symbols(t, symbols):
    if isinstance(t, (Constant, Function)):
        symbols.add(t.name)
    if isinstance(t, Function):
        for a in t.args:
            _collect_term_symbols(a, symbols)


class _FreshNames:
    def __init__(self, taken):
        self.taken = set(taken)
        self.counter = 0

    def next(self, prefix):
        while True:
            self.counter += 1
            name = f"{prefix}{self.counter}"
            if name not in self.taken:
                self.taken.add(name)
                return name


def _fol_nnf(f, negate=False):
    if isinstance(f, Atom):
        return Not(f) if negate else f
    if isinstance(f, Not):
        return _fol_nnf(f.child, not negate)
    if isinstance(f, Implies):
        return _fol_nnf(Or((Not(f.lhs), f.rhs)), negate)
    if isinstance(f, And):
        cls = Or if negate else And
        return cls(tuple(_fol_nnf(c, negate) for c in f.children))
    if isinstance(f, Or):
        cls = And if negate else Or
        return cls(tuple(_fol_nnf(c, negate) for c in f.children))
    if isinstance(f, Forall):
        cls = Exists if negate else Forall
        return cls(f.var, _fol_nnf(f.child, negate))
    if isinstance(f, Exists):
        cls = Forall if negate else Exists
        return cls(f.var, _fol_nnf(f.child, negate))
    raise TypeError(f"unexpected node {f!r}")


def _standardize_apart(f, fresh, used):
    """Rename binders so no variable is bound by two quantifiers.

    ``used`` is shared across the traversal, so sibling scopes get distinct
    names too.
    """
    if isinstance(f, Atom):
        return f
    if isinstance(f, Not):
        return Not(_standardize_apart(f.child, fresh, used))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_standardize_apart(c, fresh, used) for c in f.children))
    if isinstance(f, (Forall, Exists)):
        child = f.child
        name = f.var
        if name in used:
            name = fresh.next("v")
            child = _subst_formula(child, {f.var: Variable(name)})
        used.add(name)
        return type(f)(name, _standardize_apart(child, fresh, used))
    raise TypeError(f"unexpected node {f!r}")


def _free_vars(f, bound, out):
    if isinstance(f, Atom):
        for name in _term_vars_many(f.args):
            if name not in bound and name not in out:
                out.append(name)
    elif isinstance(f, Not):
        _free_vars(f.child, bound, out)
    elif isinstance(f, (And, Or)):
        for c in f.children:
            _free_vars(c, bound, out)
    elif isinstance(f, Implies):
        _free_vars(f.lhs, bound, out)
        _free_vars(f.rhs, bound, out)
    elif isinstance(f, (Forall, Exists)):
        _free_vars(f.child, bound | {f.var}, out)


def _skolem_transform(f, universals, fresh):
    if isinstance(f, Atom):
        return f
    if isinstance(f, Not):
        return Not(_skolem_transform(f.child, universals, fresh))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_skolem_transform(c, universals, fresh) for c in f.children))
    if isinstance(f, Forall):
        return Forall(f.var, _skolem_transform(f.child, universals + [f.var], fresh))
    if isinstance(f, Exists):
        name = fresh.next("sk")
        if universals:
            replacement = Function(name, tuple(Variable(v) for v in universals))
        else:
            replacement = Constant(name)
        child = _subst_formula(f.child, {f.var: replacement})
        return _skolem_transform(child, universals, fresh)
    raise TypeError(f"unexpected node {f!r}")


def _drop_universals(f):
    if isinstance(f, Forall):
        return _drop_universals(f.child)
    if isinstance(f, Not):
        return Not(_drop_universals(f.child))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_drop_universals(c) for c in f.children))
    return f


def _fol_distribute(f):
    if isinstance(f, Atom):
        return [[Literal(POS, f)]]
    if isinstance(f, Not):
        return [[Literal(NEG, f.child)]]
    if isinstance(f, And):
        out = []
        for c in f.children:
            out.extend(_fol_distribute(c))
        return out
    if isinstance(f, Or):
        if not f.children:
            return [[]]
        parts = [_fol_distribute(c) for c in f.children]
        out = []
        for combo in itertools.product(*parts):
            merged = []
            for clause in combo:
                merged.extend(clause)
            out.append(merged)
        return out
    raise TypeError(f"unexpected node {f!r}")


def skolemize(f) -> list:
    """First-order formula -> quantifier-free clause list.

    Standardizes bound variables apart, pushes negations inward, replaces
    existentials with fresh Skolem functions of the in-scope universals,
    drops the remaining universal quantifiers, and distributes to clause
    form.  Satisfiability-preserving.
    """
    symbols = set()
    _collect_symbols(f, symbols)
    fresh = _FreshNames(symbols)
    free = []
    _free_vars(f, set(), free)
    for name in reversed(free):  # free variables read as outermost universals
        f = Forall(name, f)
    f = _fol_nnf(f)
    f = _standardize_apart(f, fresh, set())
    f = _skolem_transform(f, [], fresh)
    f = _drop_universals(f)
    clauses = []
    for lits in _fol_distribute(f):
        dedup = []
        taut = False
        for lit in lits:
            if lit.negated() in dedup:
                taut = True
                break
            if lit not in dedup:
                dedup.append(lit)
        if not taut:
            clauses.append(FolClause(tuple(dedup)))
    return clauses


# ---------------------------------------------------------------------------
# Herbrand universe and grounding

def _clause_symbols(clauses):
    constants, functions = [], {}

    def walk(t):
        if isinstance(t, Constant):
            if t.name not in constants:
                constants.append(t.name)
        elif isinstance(t, Function):
            arity = len(t.args)
            if functions.setdefault(t.name, arity) != arity:
                raise VocabularyError(f"function '{t.name}' used with two arities")
            for a in t.args:
                walk(a)

    for c in clauses:
        for lit in c.literals:
            for a in lit.atom.args:
                walk(a)
    return constants, functions


def _term_sort_key(t):
    if isinstance(t, Constant):
        return (0, t.name, ())
    return (term_depth(t), t.name, tuple(_term_sort_key(a) for a in t.args))


def herbrand_universe(clauses, depth: int, cap: int = DEFAULT_TERM_CAP) -> list:
    """All ground terms of function-nesting depth <= depth, sorted.

    If the clause set has no constant symbol a fresh constant ``c0`` is
    injected (the customary convention so the universe is nonempty).
    """
    constants, functions = _clause_symbols(clauses)
    if not constants:
        constants = ["c0"]
    universe = [Constant(name) for name in sorted(constants)]
    frontier = list(universe)
    for _ in range(depth):
        if not functions:
            break
        existing = set(universe)
        new_terms = []
        for fname in sorted(functions):
            arity = functions[fname]
            for args in itertools.product(universe, repeat=arity):
                t = Function(fname, args)
                if t not in existing:
                    new_terms.append(t)
                    existing.add(t)
                if len(universe) + len(new_terms) > cap:
                    raise BudgetError(
                        f"Herbrand universe exceeds cap of {cap} terms")
        if not new_terms:
            break
        universe.extend(new_terms)
        frontier = new_terms
    universe.sort(key=_term_sort_key)
    return universe


def ground(clauses, universe, cap: int = DEFAULT_GROUND_CAP) -> ClauseSet:
    """Propositionalize: apply every universe substitution to every clause.

    Each distinct ground atom gets a propositional index in order of first
    appearance; duplicate ground clauses and tautologies are dropped.
    """
    if not universe:
        raise ValueError("empty Herbrand universe")
    atom_index = {}
    names = []
    raw_clauses = []

    def atom_id(a: Atom) -> int:
        key = str(a)
        if key not in atom_index:
            atom_index[key] = len(names)
            names.append(key)
        return atom_index[key]

    count = 0
    for c in clauses:
        vs = c.variables()
        for combo in itertools.product(universe, repeat=len(vs)):
            mapping = dict(zip(vs, combo))
            lits = []
            taut = False
            for lit in c.literals:
                ga = Atom(lit.atom.predicate,
                          tuple(_subst_term(a, mapping) for a in lit.atom.args))
                idx = atom_id(ga)
                pair = (idx, lit.sign)
                if (idx, POS if lit.sign == NEG else NEG) in lits:
                    taut = True
                    break
                if pair not in lits:
                    lits.append(pair)
            if taut:
                continue
            raw_clauses.append(lits)
            count += 1
            if count > cap:
                raise BudgetError(f"ground instance count exceeds cap of {cap}")

    cs = ClauseSet(len(names), names)
    for lits in raw_clauses:
        pos = neg = 0
        for idx, sign in lits:
            if sign == POS:
                pos |= 1 << idx
            else:
                neg |= 1 << idx
        clause = Clause(len(names), pos, neg)
        if clause not in cs:
            cs.add(clause)
    return cs


def ground_relevant(clauses, universe, rounds: int = 30,
                    cap: int = DEFAULT_GROUND_CAP) -> ClauseSet:
    """Goal-directed grounding: keep instances that connect to known atoms.

    Seeds the atom pool with the atoms of variable-free clauses, then
    repeatedly instantiates clauses whose literals match (same or
    complementary) a pooled atom, binding any leftover variables with
    universe terms.  Every output clause is a genuine ground instance, so
    the reduction is sound; it trades refutation completeness for ground
    sets small enough to saturate.
    """
    pool = set()
    instances = []
    seen = set()

    def add_instance(c, mapping):
        lits = []
        for lit in c.literals:
            ga = Atom(lit.atom.predicate,
                      tuple(_subst_term(a, mapping) for a in lit.atom.args))
            lits.append(Literal(lit.sign, ga))
        key = frozenset((l.sign, str(l.atom)) for l in lits)
        signs = {}
        for l in lits:
            k = str(l.atom)
            if signs.setdefault(k, l.sign) != l.sign:
                return  # tautology
        if key in seen:
            return
        seen.add(key)
        instances.append(FolClause(tuple(lits)))
        for l in lits:
            pool.add(str(l.atom))

    for c in clauses:
        if not c.variables():
            add_instance(c, {})

    parsed_pool = {}
    for _ in range(rounds):
        before = len(instances)
        pool_now = list(pool)
        for key in pool_now:
            if key not in parsed_pool:
                parsed_pool[key] = _parse_ground_atom(key)
        for c in clauses:
            vs = c.variables()
            if not vs:
                continue
            partial = []
            for lit in c.literals:
                for key in pool_now:
                    pred, args = parsed_pool[key]
                    m = _match_atom(lit.atom, pred, args)
                    if m is not None and m not in partial:
                        partial.append(m)
            for mapping in partial:
                free = [v for v in vs if v not in mapping]
                if len(free) > 2:
                    continue  # keep the instance fan-out bounded
                for combo in itertools.product(universe, repeat=len(free)):
                    full = dict(mapping)
                    full.update(dict(zip(free, combo)))
                    add_instance(c, full)
                    if len(instances) > cap:
                        raise BudgetError(
                            f"relevant ground instances exceed cap of {cap}")
        if len(instances) == before:
            break
    return ground(instances, universe, cap=cap)


def _match_atom(pattern: Atom, pred: str, args: tuple):
    """Match a possibly-variable atom against a parsed ground atom."""
    if pred != pattern.predicate or len(args) != len(pattern.args):
        return None
    mapping = {}
    if _match_terms(pattern.args, args, mapping):
        return mapping
    return None


def _match_terms(patterns, grounds, mapping):
    for p, g in zip(patterns, grounds):
        if isinstance(p, Variable):
            if p.name in mapping and mapping[p.name] != g:
                return False
            mapping[p.name] = g
        elif isinstance(p, Constant):
            if not isinstance(g, Constant) or g.name != p.name:
                return False
        else:
            if not isinstance(g, Function) or g.name != p.name or len(g.args) != len(p.args):
                return False
            if not _match_terms(p.args, g.args, mapping):
                return False
    return True


def _parse_ground_atom(key: str):
    """Inverse of Atom.__str__ for ground atoms, e.g. ``P(A,F(B,c0))``."""
    name, args, pos = _parse_ground_name(key, 0)
    if pos != len(key):
        raise ValueError(f"unparseable ground atom {key!r}")
    return name, args if args is not None else ()


def _parse_ground_name(s: str, i: int):
    """Returns (name, args-or-None, next-index); args None means bare name."""
    j = i
    while j < len(s) and s[j] not in "(),":
        j += 1
    name = s[i:j]
    if j < len(s) and s[j] == "(":
        args = []
        j += 1
        while s[j] != ")":
            inner_name, inner_args, j = _parse_ground_name(s, j)
            if inner_args is None:
                args.append(Constant(inner_name))
            else:
                args.append(Function(inner_name, tuple(inner_args)))
            if s[j] == ",":
                j += 1
        return name, tuple(args), j + 1
    return name, None, j


def fol_clause_from_ground(key_literals) -> FolClause:
    """Build a ground FolClause from (sign, 'P(A,B)') pairs; fixture helper."""
    lits = []
    for sign, key in key_literals:
        pred, args = _parse_ground_atom(key)
        lits.append(Literal(sign, Atom(pred, args)))
    return FolClause(tuple(lits))
