"""Reader and printer for ``.lte.smt2`` problem files.

The ground fragment is plain SMT-LIB 2.  Two additions:

* ``(declare-fun f (S) S :extension)`` marks an extension symbol;
* ``(declare-psi-rule ((x S)) template)`` declares a Psi-closure rule.

Axioms are ``(assert (forall ((x S) ...) body))`` where the body may be wrapped
in ``(! body :pattern (p1 ... pn))``.
"""
from __future__ import annotations

from typing import Iterable, Optional, Union

from .core import (
    ARITH_FUNCTIONS, ARITH_PREDICATES, BOOL, FALSE, INT, TRUE, And, Axiom, Formula,
    Not, Or, Problem, PsiRule, Signature, Sort, SortError, Term, TermBank, Var,
    formula_text, free_vars, quote_symbol, to_text,
)


class ParseError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.msg = msg
        self.line = line
        self.col = col


class UnsupportedConstruct(ParseError):
    pass


# --- s-expressions ---------------------------------------------------------

class Atom(str):
    line: int
    col: int
    quoted: bool

    def __new__(cls, text: str, line: int, col: int, quoted: bool = False):
        obj = super().__new__(cls, text)
        obj.line, obj.col, obj.quoted = line, col, quoted
        return obj


class SList(list):
    line: int = 0
    col: int = 0


SExpr = Union[Atom, SList]


def _pos(e) -> tuple[int, int]:
    return getattr(e, "line", 0), getattr(e, "col", 0)


def read_sexprs(text: str) -> list[SExpr]:
    out: list[SExpr] = []
    stack: list[SList] = []
    i, n = 0, len(text)
    line, col = 1, 1

    def advance(k: int) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    def emit(e: SExpr) -> None:
        if stack:
            stack[-1].append(e)
        else:
            out.append(e)

    while i < n:
        c = text[i]
        if c.isspace():
            advance(1)
        elif c == ";":
            while i < n and text[i] != "\n":
                advance(1)
        elif c == "(":
            lst = SList()
            lst.line, lst.col = line, col
            stack.append(lst)
            advance(1)
        elif c == ")":
            if not stack:
                raise ParseError("unbalanced ')'", line, col)
            lst = stack.pop()
            advance(1)
            emit(lst)
        elif c == "|":
            l0, c0 = line, col
            j = text.find("|", i + 1)
            if j < 0:
                raise ParseError("unterminated quoted symbol", l0, c0)
            name = text[i + 1:j]
            advance(j + 1 - i)
            emit(Atom(name, l0, c0, quoted=True))
        elif c == '"':
            l0, c0 = line, col
            j = i + 1
            while True:
                j = text.find('"', j)
                if j < 0:
                    raise ParseError("unterminated string literal", l0, c0)
                if j + 1 < n and text[j + 1] == '"':
                    j += 2
                    continue
                break
            s = text[i:j + 1]
            advance(j + 1 - i)
            emit(Atom(s, l0, c0, quoted=True))
        else:
            l0, c0 = line, col
            j = i
            while j < n and not text[j].isspace() and text[j] not in '()|";':
                j += 1
            tok = text[i:j]
            advance(j - i)
            emit(Atom(tok, l0, c0))
    if stack:
        raise ParseError("unbalanced '(': missing ')'", stack[-1].line, stack[-1].col)
    return out


def _is_numeral(a: SExpr) -> bool:
    return isinstance(a, Atom) and not a.quoted and a.isdigit()


# --- elaboration -----------------------------------------------------------

_IGNORED = {"set-info", "set-option", "check-sat", "exit", "get-model", "get-info"}
_UNSUPPORTED = {"push", "pop", "define-fun", "define-sort", "declare-datatypes",
                "declare-datatype", "get-value", "check-sat-assuming", "define-fun-rec"}


class _Reader:
    def __init__(self) -> None:
        self.sig = Signature()
        self.bank = TermBank()
        self.problem = Problem(self.sig, self.bank)

    # sorts
    def sort(self, e: SExpr) -> Sort:
        if isinstance(e, Atom):
            s = self.sig.sorts.get(str(e))
            if s is None:
                raise ParseError(f"undeclared sort {e}", *_pos(e))
            return s
        raise UnsupportedConstruct("parametric sorts are not supported", *_pos(e))

    def command(self, cmd: SExpr) -> None:
        if not isinstance(cmd, SList) or not cmd or not isinstance(cmd[0], Atom):
            raise ParseError("expected a command", *_pos(cmd))
        name = str(cmd[0])
        if name in _IGNORED:
            return
        if name in _UNSUPPORTED:
            raise UnsupportedConstruct(f"unsupported command {name}", *_pos(cmd))
        if name == "set-logic":
            self.problem.logic = str(cmd[1])
        elif name == "declare-sort":
            if len(cmd) == 3 and str(cmd[2]) != "0":
                raise UnsupportedConstruct("parametric sorts are not supported", *_pos(cmd))
            self._declare(lambda: self.sig.declare_sort(str(cmd[1])), cmd)
        elif name == "declare-const":
            if len(cmd) != 3:
                raise ParseError("declare-const expects a name and a sort", *_pos(cmd))
            self._declare(lambda: self.sig.declare_fun(str(cmd[1]), (), self.sort(cmd[2])), cmd)
        elif name == "declare-fun":
            self.declare_fun(cmd)
        elif name == "assert":
            if len(cmd) != 2:
                raise ParseError("assert expects one formula", *_pos(cmd))
            self.assertion(cmd[1])
        elif name == "declare-psi-rule":
            self.psi_rule(cmd)
        else:
            raise UnsupportedConstruct(f"unknown command {name}", *_pos(cmd))

    def _declare(self, thunk, cmd):
        try:
            return thunk()
        except SortError as exc:
            raise ParseError(str(exc), *_pos(cmd)) from None

    def declare_fun(self, cmd: SList) -> None:
        if len(cmd) < 4 or not isinstance(cmd[2], SList):
            raise ParseError("declare-fun expects a name, argument sorts and a result sort", *_pos(cmd))
        attrs = [str(a) for a in cmd[4:]]
        for a in attrs:
            if a != ":extension":
                raise UnsupportedConstruct(f"unknown attribute {a}", *_pos(cmd))
        args = [self.sort(s) for s in cmd[2]]
        result = self.sort(cmd[3])
        self._declare(lambda: self.sig.declare_fun(str(cmd[1]), args, result,
                                                   extension=":extension" in attrs), cmd)

    def psi_rule(self, cmd: SList) -> None:
        if len(cmd) != 3 or not isinstance(cmd[1], SList):
            raise ParseError("declare-psi-rule expects ((x S)) template", *_pos(cmd))
        binders = self.binders(cmd[1])
        if len(binders) != 1:
            raise ParseError("a psi rule binds exactly one template variable", *_pos(cmd))
        v = binders[0]
        t = self.term(cmd[2], {v.name: v})
        if t.sort == BOOL:
            raise ParseError("psi template must be a non-Boolean term", *_pos(cmd[2]))
        if free_vars(t) != [v]:
            raise ParseError(f"psi template must contain {v.name}", *_pos(cmd[2]))
        self.problem.psi_rules.append(PsiRule(v, t))

    def binders(self, e: SList) -> list[Var]:
        out = []
        for b in e:
            if not isinstance(b, SList) or len(b) != 2 or not isinstance(b[0], Atom):
                raise ParseError("malformed binder", *_pos(b))
            s = self.sort(b[1])
            if s == BOOL:
                raise UnsupportedConstruct("Boolean quantified variables are not supported", *_pos(b))
            out.append(Var(str(b[0]), s))
        return out

    def assertion(self, e: SExpr) -> None:
        if isinstance(e, SList) and e and e[0] == "forall":
            variables: list[Var] = []
            env: dict[str, Var] = {}
            body = e
            while isinstance(body, SList) and body and body[0] == "forall":
                if len(body) != 3 or not isinstance(body[1], SList):
                    raise ParseError("malformed forall", *_pos(body))
                for v in self.binders(body[1]):
                    if v.name in env:
                        raise ParseError(f"variable {v.name} bound twice", *_pos(body))
                    env[v.name] = v
                    variables.append(v)
                body = body[2]
            patterns = None
            if isinstance(body, SList) and body and body[0] == "!":
                patterns, body = self.annotations(body, env)
            f = self.formula(body, env)
            self.problem.axioms.append(Axiom(tuple(variables), f, patterns))
        else:
            self.problem.assertions.append(self.formula(e, {}))

    def annotations(self, e: SList, env) -> tuple[Optional[tuple[Term, ...]], SExpr]:
        body = e[1]
        pats: Optional[list[Term]] = None
        i = 2
        while i < len(e):
            key = str(e[i])
            if key == ":pattern":
                if i + 1 >= len(e) or not isinstance(e[i + 1], SList):
                    raise ParseError(":pattern expects a term list", *_pos(e[i]))
                pats = pats or []
                for p in e[i + 1]:
                    t = self.term(p, env)
                    if t not in pats:
                        pats.append(t)
                i += 2
            elif key in (":named", ":qid"):
                i += 2
            else:
                raise UnsupportedConstruct(f"unsupported annotation {key}", *_pos(e[i]))
        return (tuple(pats) if pats is not None else None), body

    # formulas and terms
    def formula(self, e: SExpr, env) -> Formula:
        r = self.expr(e, env)
        if isinstance(r, Term) and r.sort != BOOL:
            raise ParseError(f"expected a formula, got a term of sort {r.sort}", *_pos(e))
        return r

    def term(self, e: SExpr, env) -> Term:
        r = self.expr(e, env)
        if not isinstance(r, Term) or r.sort == BOOL:
            raise ParseError("Boolean expression in term position", *_pos(e))
        return r

    def expr(self, e: SExpr, env) -> Union[Term, Formula]:
        if isinstance(e, Atom):
            return self.atom(e, env)
        if not e:
            raise ParseError("empty application", *_pos(e))
        head = e[0]
        if isinstance(head, SList):
            raise UnsupportedConstruct("indexed or qualified identifiers are not supported", *_pos(e))
        h = str(head)
        args = e[1:]
        if not head.quoted:
            if h in ("and", "or"):
                parts = tuple(self.formula(a, env) for a in args)
                return And(parts) if h == "and" else Or(parts)
            if h == "not":
                if len(args) != 1:
                    raise ParseError("not expects one argument", *_pos(e))
                return Not(self.formula(args[0], env))
            if h == "=>":
                if len(args) < 2:
                    raise ParseError("=> expects at least two arguments", *_pos(e))
                fs = [self.formula(a, env) for a in args]
                out = fs[-1]
                for f in reversed(fs[:-1]):
                    out = Or((Not(f), out))
                return out
            if h in ("=", "distinct"):
                return self.equality(h, args, env, e)
            if h in ("forall", "exists"):
                raise UnsupportedConstruct(f"nested {h} is not supported", *_pos(e))
            if h in ("ite", "let", "xor", "!"):
                raise UnsupportedConstruct(f"{h} is not supported", *_pos(e))
            if h in ARITH_FUNCTIONS or h in ARITH_PREDICATES:
                return self.arith(h, args, env, e)
        sym = self.sig.symbols.get(h)
        if sym is None:
            raise ParseError(f"undeclared symbol {h}", *_pos(head))
        terms = [self.term(a, env) for a in args]
        try:
            return self.bank.mk(sym, terms)
        except SortError as exc:
            raise ParseError(str(exc), *_pos(e)) from None

    def atom(self, e: Atom, env) -> Union[Term, Formula]:
        s = str(e)
        if not e.quoted:
            if s in env:
                return self.bank.mk(env[s])
            if s == "true":
                return TRUE
            if s == "false":
                return FALSE
            if _is_numeral(e):
                return self.bank.mk(self.sig.numeral(int(s)))
            if s[:1].isdigit() or s.startswith('"'):
                raise UnsupportedConstruct(f"unsupported literal {s}", *_pos(e))
        elif s in env:
            return self.bank.mk(env[s])
        sym = self.sig.symbols.get(s)
        if sym is None:
            raise ParseError(f"undeclared symbol {s}", *_pos(e))
        try:
            return self.bank.mk(sym)
        except SortError as exc:
            raise ParseError(str(exc), *_pos(e)) from None

    def equality(self, h: str, args, env, e) -> Formula:
        if len(args) < 2:
            raise ParseError(f"{h} expects at least two arguments", *_pos(e))
        parts = [self.expr(a, env) for a in args]
        boolean = [not isinstance(p, Term) or p.sort == BOOL for p in parts]
        if any(boolean):
            if not all(boolean):
                raise ParseError("= between Bool and non-Bool expressions", *_pos(e))
            if h == "distinct":
                raise UnsupportedConstruct("distinct over Bool is not supported", *_pos(e))
            # Boolean equality is lowered to a conjunction of implications
            conj = []
            for a, b in zip(parts, parts[1:]):
                conj.append(Or((Not(a), b)))
                conj.append(Or((a, Not(b))))
            return conj[0] if len(conj) == 1 else And(tuple(conj))
        sort = parts[0].sort
        for p, a in zip(parts, args):
            if p.sort != sort:
                raise ParseError(f"= between sorts {sort} and {p.sort}", *_pos(a))
        eq = self.sig.eq(sort)
        if h == "=":
            atoms = [self.bank.mk(eq, (a, b)) for a, b in zip(parts, parts[1:])]
            return atoms[0] if len(atoms) == 1 else And(tuple(atoms))
        lits = [Not(self.bank.mk(eq, (parts[i], parts[j])))
                for i in range(len(parts)) for j in range(i + 1, len(parts))]
        return lits[0] if len(lits) == 1 else And(tuple(lits))

    def arith(self, h: str, args, env, e) -> Union[Term, Formula]:
        if h == "-" and len(args) == 1 and _is_numeral(args[0]):
            return self.bank.mk(self.sig.numeral(-int(str(args[0]))))
        terms = [self.term(a, env) for a in args]
        for t, a in zip(terms, args):
            if t.sort != INT:
                raise ParseError(f"{h} expects Int arguments, got {t.sort}", *_pos(a))
        try:
            if h in ARITH_PREDICATES:
                if len(terms) < 2:
                    raise ParseError(f"{h} expects at least two arguments", *_pos(e))
                sym = self.sig.arith(h, 2)
                atoms = [self.bank.mk(sym, (a, b)) for a, b in zip(terms, terms[1:])]
                return atoms[0] if len(atoms) == 1 else And(tuple(atoms))
            if len(terms) == 1:
                return self.bank.mk(self.sig.arith(h, 1), terms)
            if not terms:
                raise ParseError(f"{h} expects arguments", *_pos(e))
            sym = self.sig.arith(h, 2)
            out = terms[0]
            for t in terms[1:]:
                out = self.bank.mk(sym, (out, t))
            return out
        except SortError as exc:
            raise ParseError(str(exc), *_pos(e)) from None


def parse(text: str) -> Problem:
    """Parse problem text.  Raises :class:`ParseError` with line/column."""
    reader = _Reader()
    for cmd in read_sexprs(text):
        reader.command(cmd)
    return reader.problem


def parse_file(path) -> Problem:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


# --- printing --------------------------------------------------------------

def infer_logic(problem: Problem) -> str:
    uses_int = False
    for sym in problem.signature.user_symbols():
        if INT in sym.arg_sorts or sym.sort == INT:
            uses_int = True
    for t in problem.bank.terms:
        if t.sort == INT:
            uses_int = True
            break
    return "UFLIA" if uses_int else "UF"


def declarations(problem: Problem, extension_marks: bool = True,
                 extra_symbols: Iterable = ()) -> list[str]:
    sig = problem.signature
    lines = [f"(declare-sort {quote_symbol(s.name)} 0)" for s in sig.user_sorts()]
    for sym in list(sig.user_symbols()) + list(extra_symbols):
        args = " ".join(quote_symbol(s.name) for s in sym.arg_sorts)
        mark = " :extension" if extension_marks and sym.extension else ""
        lines.append(f"(declare-fun {quote_symbol(sym.name)} ({args}) {quote_symbol(sym.sort.name)}{mark})")
    return lines


def _binders(variables) -> str:
    return " ".join(f"({quote_symbol(v.name)} {quote_symbol(v.sort.name)})" for v in variables)


def axiom_text(ax: Axiom, with_patterns: bool = True) -> str:
    body = formula_text(ax.body)
    if with_patterns and ax.patterns is not None:
        body = f"(! {body} :pattern ({' '.join(to_text(p) for p in ax.patterns)}))"
    if not ax.variables:
        return body
    return f"(forall ({_binders(ax.variables)}) {body})"


def print_problem(problem: Problem, extra_assertions: Iterable[str] = (),
                  standard: bool = False, check_sat: bool = True) -> str:
    """Render ``problem``; deterministic.

    With ``standard=True`` the output drops the extension attribute and the
    psi-rule command so that unmodified SMT-LIB solvers accept it.
    """
    logic = infer_logic(problem) if standard else problem.logic
    lines = []
    if logic:
        lines.append(f"(set-logic {logic})")
    lines.extend(declarations(problem, extension_marks=not standard))
    if not standard:
        for r in problem.psi_rules:
            lines.append(f"(declare-psi-rule ({_binders([r.var])}) {to_text(r.template)})")
    for f in problem.assertions:
        lines.append(f"(assert {formula_text(f)})")
    for ax in problem.axioms:
        lines.append(f"(assert {axiom_text(ax)})")
    for s in extra_assertions:
        lines.append(f"(assert {s})")
    if check_sat:
        lines.append("(check-sat)")
    return "\n".join(lines) + "\n"
