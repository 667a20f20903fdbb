"""Sorted first-order syntax shared by every other module.

Terms are hash-consed inside a :class:`TermBank`; two structurally equal
terms built in the same bank are the same Python object and carry the same
integer id.  Formulas are a small immutable tree over Boolean atoms (terms of
sort ``Bool``); ground input is clausified later by the engine.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Union


class SortError(Exception):
    """Ill-sorted term construction (arity or argument sort mismatch)."""


class UnboundVariable(Exception):
    pass


@dataclass(frozen=True)
class Sort:
    name: str
    builtin: bool = False

    def __str__(self) -> str:
        return self.name


BOOL = Sort("Bool", True)
INT = Sort("Int", True)

ARITH_FUNCTIONS = frozenset({"+", "-", "*"})
ARITH_PREDICATES = frozenset({"<=", "<", ">=", ">"})


@dataclass(frozen=True, eq=False)
class Symbol:
    """Function or predicate symbol.  Compared by identity."""

    name: str
    arg_sorts: tuple[Sort, ...]
    sort: Sort
    extension: bool = False
    builtin: bool = False
    # numerals and true/false carry their interpreted value
    value: Union[int, bool, None] = None

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)

    @property
    def is_predicate(self) -> bool:
        return self.sort == BOOL

    @property
    def is_arith(self) -> bool:
        return self.builtin and (self.name in ARITH_FUNCTIONS or self.name in ARITH_PREDICATES)

    def __repr__(self) -> str:
        return f"Symbol({self.name})"


@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort

    def __repr__(self) -> str:
        return self.name


class Term:
    __slots__ = ("head", "args", "sort", "id", "ground", "_hash")

    def __init__(self, head: Union[Symbol, Var], args: tuple[Term, ...], sort: Sort, id: int):
        self.head = head
        self.args = args
        self.sort = sort
        self.id = id
        self.ground = not isinstance(head, Var) and all(a.ground for a in args)
        self._hash = hash(id)

    def __hash__(self) -> int:
        return self._hash

    @property
    def is_var(self) -> bool:
        return isinstance(self.head, Var)

    @property
    def name(self) -> str:
        return self.head.name

    def __repr__(self) -> str:
        return to_text(self)

    def __lt__(self, other: Term) -> bool:
        return self.id < other.id


class TermBank:
    """Interning arena.  One bank per problem."""

    def __init__(self) -> None:
        self._table: dict[tuple, Term] = {}
        self.terms: list[Term] = []

    def mk(self, head: Union[Symbol, Var], args: Iterable[Term] = ()) -> Term:
        args = tuple(args)
        key = (head, tuple(a.id for a in args))
        t = self._table.get(key)
        if t is not None:
            return t
        if isinstance(head, Var):
            if args:
                raise SortError(f"variable {head.name} applied to arguments")
            sort = head.sort
        else:
            if len(args) != head.arity:
                raise SortError(
                    f"{head.name} expects {head.arity} argument(s), got {len(args)} "
                    f"(position {min(len(args), head.arity) + 1})"
                )
            for i, (a, s) in enumerate(zip(args, head.arg_sorts), start=1):
                if a.sort != s:
                    raise SortError(f"{head.name}: argument {i} has sort {a.sort}, expected {s}")
            sort = head.sort
        t = Term(head, args, sort, len(self.terms))
        self._table[key] = t
        self.terms.append(t)
        return t

    def var(self, v: Var) -> Term:
        return self.mk(v)

    def __len__(self) -> int:
        return len(self.terms)


class Signature:
    """Sorts and symbols of a problem, plus the builtin Bool/Int vocabulary."""

    def __init__(self) -> None:
        self.sorts: dict[str, Sort] = {"Bool": BOOL, "Int": INT}
        self.symbols: dict[str, Symbol] = {}
        self.true = Symbol("true", (), BOOL, builtin=True, value=True)
        self.false = Symbol("false", (), BOOL, builtin=True, value=False)
        self._eq: dict[Sort, Symbol] = {}
        self._numerals: dict[int, Symbol] = {}
        self._arith: dict[tuple[str, int], Symbol] = {}

    def declare_sort(self, name: str) -> Sort:
        if name in self.sorts:
            raise SortError(f"sort {name} already declared")
        s = Sort(name)
        self.sorts[name] = s
        return s

    def declare_fun(self, name: str, arg_sorts: Iterable[Sort], sort: Sort,
                    extension: bool = False) -> Symbol:
        if name in self.symbols or name in ("true", "false", "=", "distinct"):
            raise SortError(f"symbol {name} already declared")
        arg_sorts = tuple(arg_sorts)
        if BOOL in arg_sorts:
            raise SortError(f"{name}: Bool is not allowed as an argument sort")
        sym = Symbol(name, arg_sorts, sort, extension=extension)
        self.symbols[name] = sym
        return sym

    def eq(self, sort: Sort) -> Symbol:
        sym = self._eq.get(sort)
        if sym is None:
            sym = Symbol("=", (sort, sort), BOOL, builtin=True)
            self._eq[sort] = sym
        return sym

    def numeral(self, n: int) -> Symbol:
        sym = self._numerals.get(n)
        if sym is None:
            sym = Symbol(str(n), (), INT, builtin=True, value=n)
            self._numerals[n] = sym
        return sym

    def arith(self, name: str, arity: int) -> Symbol:
        key = (name, arity)
        sym = self._arith.get(key)
        if sym is None:
            if name in ARITH_PREDICATES:
                if arity != 2:
                    raise SortError(f"{name} is binary")
                sym = Symbol(name, (INT, INT), BOOL, builtin=True)
            elif name in ARITH_FUNCTIONS:
                if arity not in (1, 2) or (arity == 1 and name != "-"):
                    raise SortError(f"{name} applied to {arity} argument(s)")
                sym = Symbol(name, (INT,) * arity, INT, builtin=True)
            else:
                raise KeyError(name)
            self._arith[key] = sym
        return sym

    def user_symbols(self) -> list[Symbol]:
        return list(self.symbols.values())

    def user_sorts(self) -> list[Sort]:
        return [s for s in self.sorts.values() if not s.builtin]


# --- formulas -------------------------------------------------------------

@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Formula", ...]


# An atom is a Term of sort Bool.
Formula = Union[Term, Not, And, Or]

TRUE = And(())
FALSE = Or(())


@dataclass(frozen=True)
class Literal:
    atom: Term
    positive: bool = True

    def negate(self) -> Literal:
        return Literal(self.atom, not self.positive)

    def __repr__(self) -> str:
        return repr(self.atom) if self.positive else f"(not {self.atom!r})"


Clause = tuple[Literal, ...]
Substitution = Mapping[Var, Term]


def clause_formula(clause: Clause) -> Formula:
    return Or(tuple(l.atom if l.positive else Not(l.atom) for l in clause))


# --- traversal ------------------------------------------------------------

def iter_subterms(t: Term) -> Iterator[Term]:
    """All subterms of ``t`` (each once), children before parents."""
    seen: set[int] = set()
    stack = [(t, False)]
    while stack:
        u, expanded = stack.pop()
        if u.id in seen:
            continue
        if expanded or not u.args:
            seen.add(u.id)
            yield u
        else:
            stack.append((u, True))
            stack.extend((a, False) for a in reversed(u.args))


def formula_atoms(f: Formula) -> Iterator[Term]:
    if isinstance(f, Term):
        yield f
    elif isinstance(f, Not):
        yield from formula_atoms(f.arg)
    else:
        for a in f.args:
            yield from formula_atoms(a)


def _roots(item) -> Iterator[Term]:
    if isinstance(item, Term):
        yield item
    elif isinstance(item, Literal):
        yield item.atom
    elif isinstance(item, (Not, And, Or)):
        yield from formula_atoms(item)
    elif isinstance(item, tuple):  # clause
        for x in item:
            yield from _roots(x)
    elif hasattr(item, "body"):  # parsed axiom
        yield from formula_atoms(item.body)
    else:
        raise TypeError(f"cannot collect subterms of {type(item).__name__}")


def subterms(items: Iterable) -> set[Term]:
    """Ground non-Boolean subterms occurring in ``items``.

    ``items`` may mix terms, literals, clauses, formulas and axioms.
    """
    out: set[Term] = set()
    for item in items:
        for root in _roots(item):
            for u in iter_subterms(root):
                if u.ground and u.sort != BOOL:
                    out.add(u)
    return out


def free_vars(item) -> list[Var]:
    """Variables in order of first occurrence."""
    out: dict[Var, None] = {}
    for root in _roots(item):
        for u in iter_subterms(root):
            if isinstance(u.head, Var):
                out.setdefault(u.head)
    return list(out)


def substitute(bank: TermBank, t: Term, sigma: Substitution,
               _memo: Optional[dict[int, Term]] = None) -> Term:
    if t.ground:
        return t
    memo = {} if _memo is None else _memo
    hit = memo.get(t.id)
    if hit is not None:
        return hit
    if isinstance(t.head, Var):
        try:
            r = sigma[t.head]
        except KeyError:
            raise UnboundVariable(f"variable {t.head.name} is not bound by the substitution") from None
    else:
        r = bank.mk(t.head, [substitute(bank, a, sigma, memo) for a in t.args])
    memo[t.id] = r
    return r


def apply_subst(bank: TermBank, clause: Clause, sigma: Substitution) -> Clause:
    memo: dict[int, Term] = {}
    return tuple(Literal(substitute(bank, l.atom, sigma, memo), l.positive) for l in clause)


def is_ground_clause(clause: Clause) -> bool:
    return all(l.atom.ground for l in clause)


def check_sorts(t: Term) -> bool:
    """Recursive sort checker, independent of :meth:`TermBank.mk`."""
    if isinstance(t.head, Var):
        return not t.args and t.sort == t.head.sort
    if len(t.args) != len(t.head.arg_sorts) or t.sort != t.head.sort:
        return False
    return all(a.sort == s and check_sorts(a) for a, s in zip(t.args, t.head.arg_sorts))


# --- text -----------------------------------------------------------------

_SIMPLE_EXTRA = set("~!@$%^&*_-+=<>.?/")


def quote_symbol(name: str) -> str:
    if name and not name[0].isdigit() and all(c.isalnum() or c in _SIMPLE_EXTRA for c in name):
        return name
    if name.lstrip("-").isdigit():
        return name
    return f"|{name}|"


def to_text(t: Term) -> str:
    head = t.head
    if isinstance(head, Symbol) and head.value is not None and not isinstance(head.value, bool):
        return str(head.value) if head.value >= 0 else f"(- {-head.value})"
    name = quote_symbol(head.name)
    if not t.args:
        return name
    return "(" + name + " " + " ".join(to_text(a) for a in t.args) + ")"


def formula_text(f: Formula) -> str:
    if isinstance(f, Term):
        return to_text(f)
    if isinstance(f, Not):
        return f"(not {formula_text(f.arg)})"
    if isinstance(f, And):
        return "true" if not f.args else "(and " + " ".join(formula_text(a) for a in f.args) + ")"
    return "false" if not f.args else "(or " + " ".join(formula_text(a) for a in f.args) + ")"


def clause_text(clause: Clause) -> str:
    if len(clause) == 1:
        return repr(clause[0])
    return formula_text(clause_formula(clause))


def structural_key(t: Term):
    """Bank-independent structural identity of a term."""
    head = t.head
    if isinstance(head, Var):
        return ("var", head.name, head.sort.name)
    return (head.name, head.sort.name, tuple(s.name for s in head.arg_sorts),
            tuple(structural_key(a) for a in t.args))


def formula_key(f: Formula):
    if isinstance(f, Term):
        return structural_key(f)
    if isinstance(f, Not):
        return ("not", formula_key(f.arg))
    tag = "and" if isinstance(f, And) else "or"
    return (tag, tuple(formula_key(a) for a in f.args))


@dataclass
class Axiom:
    """A parsed universally quantified axiom (before flattening)."""

    variables: tuple[Var, ...]
    body: Formula
    patterns: Optional[tuple[Term, ...]] = None


@dataclass
class PsiRule:
    var: Var
    template: Term


@dataclass
class Problem:
    signature: Signature
    bank: TermBank
    assertions: list[Formula] = field(default_factory=list)
    axioms: list[Axiom] = field(default_factory=list)
    psi_rules: list[PsiRule] = field(default_factory=list)
    logic: Optional[str] = None
    # terms added by Psi-closure; matching on them can be delayed
    stage_one: frozenset[Term] = frozenset()

    def mk(self, name: str, *args: Term) -> Term:
        """Convenience constructor by symbol name (user symbols and ``=``)."""
        sig = self.signature
        if name == "=":
            if len(args) != 2:
                raise SortError("= expects 2 arguments")
            return self.bank.mk(sig.eq(args[0].sort), args)
        if name in ("true", "false"):
            return self.bank.mk(sig.true if name == "true" else sig.false)
        if name in ARITH_FUNCTIONS or name in ARITH_PREDICATES:
            return self.bank.mk(sig.arith(name, len(args)), args)
        return self.bank.mk(sig.symbols[name], args)

    def num(self, n: int) -> Term:
        return self.bank.mk(self.signature.numeral(n))

    def var(self, name: str, sort: Sort) -> Term:
        return self.bank.mk(Var(name, sort))

    def key(self):
        """Structural identity used by round-trip tests."""
        sig = self.signature
        return (
            self.logic,
            tuple(s.name for s in sig.user_sorts()),
            tuple((s.name, tuple(a.name for a in s.arg_sorts), s.sort.name, s.extension)
                  for s in sig.user_symbols()),
            tuple(formula_key(f) for f in self.assertions),
            tuple((tuple((v.name, v.sort.name) for v in ax.variables), formula_key(ax.body),
                   None if ax.patterns is None else tuple(structural_key(p) for p in ax.patterns))
                  for ax in self.axioms),
            tuple((r.var.name, r.var.sort.name, structural_key(r.template)) for r in self.psi_rules),
        )
