"""Many-sorted signatures, terms, and state formulas.

The surface syntax (ASCII) is:

    formula := "true" | "false" | "@" IDENT | IDENT | IDENT "(" [term {"," term}] ")"
             | term "=" term
             | "!" formula | formula "&" formula | formula "|" formula
             | formula "->" formula
             | ("EX"|"AX"|"EF"|"AF"|"EG"|"AG") formula
             | ("E"|"A") "[" formula "U" formula "]"
             | ("exists"|"forall") IDENT ":" IDENT "." formula
             | "(" formula ")"
    term    := IDENT | IDENT "(" [term {"," term}] ")" | IDENT ":" IDENT
             | "#" IDENT ":" NUMBER

Precedence: ! > & > | > -> (right-associative); prefix modalities and
quantifiers bind their whole suffix.  A bare identifier in formula position
is a 0-ary predicate.  A free (valuation-bound) variable is written with a
sort annotation `x:S`; later occurrences may omit it.  `#S:3` denotes the
fourth element of sort S's domain enumeration; such literals are normally
introduced only by substitution.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Union

from .errors import ParseError, SortError, UnknownIdentifierError

# --------------------------------------------------------------------------- #
# Signature

# E, A, and U are contextual (E/A only introduce an until when followed by
# '['; U only separates the two until operands), so they stay declarable.
RESERVED_WORDS = frozenset(
    {"true", "false", "exists", "forall", "EX", "AX", "EF", "AF", "EG", "AG"}
)

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_PLAYER_RE = re.compile(r"[A-Za-z0-9_]+\Z")


@dataclass(frozen=True)
class FuncDecl:
    args: tuple[str, ...]
    result: str
    rigid: bool = False


@dataclass(frozen=True)
class PredDecl:
    args: tuple[str, ...]
    rigid: bool = False


class Signature:
    """Declared sorts, function/predicate profiles, and player identifiers.

    Sort, function, predicate, and player names live in pairwise disjoint
    namespaces; every sort mentioned in a profile must be declared.
    """

    def __init__(
        self,
        sorts: Iterable[str] = (),
        functions: Mapping[str, FuncDecl] | None = None,
        predicates: Mapping[str, PredDecl] | None = None,
        players: Iterable[str] = (),
    ):
        self.sorts = frozenset(sorts)
        self.functions = dict(functions or {})
        self.predicates = dict(predicates or {})
        self.players = tuple(players)
        self._check()

    def _check(self) -> None:
        names: dict[str, str] = {}
        for kind, group in (
            ("sort", self.sorts),
            ("function", self.functions),
            ("predicate", self.predicates),
            ("player", self.players),
        ):
            for name in group:
                if name in names:
                    raise SortError(f"name {name!r} declared as both {names[name]} and {kind}")
                names[name] = kind
        for name in set(self.sorts) | set(self.functions) | set(self.predicates):
            if not _IDENT_RE.match(name):
                raise SortError(f"{name!r} is not a valid identifier")
            if name in RESERVED_WORDS:
                raise SortError(f"{name!r} is a reserved word")
        for player in self.players:
            if not _PLAYER_RE.match(player):
                raise SortError(f"player id {player!r} is not a valid identifier")
        for fname, decl in self.functions.items():
            for s in (*decl.args, decl.result):
                if s not in self.sorts:
                    raise SortError(f"function {fname!r} mentions undeclared sort {s!r}")
        for pname, decl in self.predicates.items():
            for s in decl.args:
                if s not in self.sorts:
                    raise SortError(f"predicate {pname!r} mentions undeclared sort {s!r}")

    def __repr__(self) -> str:
        return (
            f"Signature(sorts={sorted(self.sorts)}, functions={sorted(self.functions)}, "
            f"predicates={sorted(self.predicates)}, players={list(self.players)})"
        )


# --------------------------------------------------------------------------- #
# Terms and domain elements


def _node(cls):
    """Freeze a syntax-node dataclass and cache its hash.

    Nodes are used as labeling keys, so they are hashed constantly; the
    recursive dataclass hash would re-walk the subtree every time.
    """
    cls = dataclass(frozen=True)(cls)
    plain_hash = cls.__hash__

    def cached_hash(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = plain_hash(self)
            object.__setattr__(self, "_hash", h)
        return h

    cls.__hash__ = cached_hash
    return cls


@dataclass(frozen=True)
class DomainElem:
    """An element of a sort's domain: a tagged atom with its enumeration index."""

    sort: str
    label: str
    index: int


@_node
class Var:
    name: str
    sort: str


@_node
class App:
    func: str
    args: tuple["Term", ...] = ()


@_node
class DomainConst:
    """A ground literal naming a domain element by its enumeration index."""

    sort: str
    index: int


Term = Union[Var, App, DomainConst]


def term_sort(t: Term, sig: Signature) -> str:
    if isinstance(t, Var):
        return t.sort
    if isinstance(t, DomainConst):
        return t.sort
    return sig.functions[t.func].result


# --------------------------------------------------------------------------- #
# Formulas


class Formula:
    def __str__(self) -> str:
        return pretty(self)


@_node
class Top(Formula):
    pass


@_node
class Bottom(Formula):
    pass


@_node
class PlayerAtom(Formula):
    player: str


@_node
class Pred(Formula):
    name: str
    args: tuple[Term, ...] = ()


@_node
class Eq(Formula):
    left: Term
    right: Term


@_node
class Not(Formula):
    body: Formula


@_node
class And(Formula):
    left: Formula
    right: Formula


@_node
class Or(Formula):
    left: Formula
    right: Formula


@_node
class Implies(Formula):
    left: Formula
    right: Formula


@_node
class EX(Formula):
    body: Formula


@_node
class AX(Formula):
    body: Formula


@_node
class EF(Formula):
    body: Formula


@_node
class AF(Formula):
    body: Formula


@_node
class EG(Formula):
    body: Formula


@_node
class AG(Formula):
    body: Formula


@_node
class EU(Formula):
    left: Formula
    right: Formula


@_node
class AU(Formula):
    left: Formula
    right: Formula


@_node
class Exists(Formula):
    var: Var
    body: Formula


@_node
class Forall(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True)
class FormulaMetrics:
    modal_count: int
    quantifier_count: int


# --------------------------------------------------------------------------- #
# Formula utilities


def _term_vars(t: Term) -> frozenset[Var]:
    if isinstance(t, Var):
        return frozenset((t,))
    if isinstance(t, App):
        out: frozenset[Var] = frozenset()
        for a in t.args:
            out |= _term_vars(a)
        return out
    return frozenset()


@lru_cache(maxsize=None)
def free_variables(f: Formula) -> frozenset[Var]:
    """The free sorted variables of a formula; quantifiers bind."""
    if isinstance(f, (Top, Bottom, PlayerAtom)):
        return frozenset()
    if isinstance(f, Pred):
        out: frozenset[Var] = frozenset()
        for a in f.args:
            out |= _term_vars(a)
        return out
    if isinstance(f, Eq):
        return _term_vars(f.left) | _term_vars(f.right)
    if isinstance(f, (Not, EX, AX, EF, AF, EG, AG)):
        return free_variables(f.body)
    if isinstance(f, (And, Or, Implies, EU, AU)):
        return free_variables(f.left) | free_variables(f.right)
    if isinstance(f, (Exists, Forall)):
        return free_variables(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def _subst_term(t: Term, x: Var, c: DomainConst) -> Term:
    if isinstance(t, Var):
        return c if t == x else t
    if isinstance(t, App):
        return App(t.func, tuple(_subst_term(a, x, c) for a in t.args))
    return t


def substitute(f: Formula, x: Var, d: DomainElem) -> Formula:
    """Replace free occurrences of `x` by the ground literal for `d`.

    The result is canonical: structurally equal substitution results compare
    equal, which makes them usable as labeling keys.
    """
    if d.sort != x.sort:
        raise SortError(f"cannot substitute {d.sort} element for variable of sort {x.sort}")
    c = DomainConst(d.sort, d.index)

    def go(g: Formula) -> Formula:
        if isinstance(g, (Top, Bottom, PlayerAtom)):
            return g
        if isinstance(g, Pred):
            return Pred(g.name, tuple(_subst_term(a, x, c) for a in g.args))
        if isinstance(g, Eq):
            return Eq(_subst_term(g.left, x, c), _subst_term(g.right, x, c))
        if isinstance(g, Not):
            return Not(go(g.body))
        if isinstance(g, (And, Or, Implies, EU, AU)):
            return type(g)(go(g.left), go(g.right))
        if isinstance(g, (EX, AX, EF, AF, EG, AG)):
            return type(g)(go(g.body))
        if isinstance(g, (Exists, Forall)):
            if g.var == x:
                return g
            return type(g)(g.var, go(g.body))
        raise TypeError(f"not a formula: {g!r}")

    return go(f)


def expand_abbreviations(f: Formula) -> Formula:
    """Rewrite to the core connectives.

    Core: true, player atoms, predicates, equality, !, ->, AX, E[.U.],
    A[.U.], exists.  Everything else rewrites by the usual identities:
    false = !true, a & b = !(a -> !b), a | b = !a -> b, EX a = !AX !a,
    AF a = A[true U a], EF a = E[true U a], AG a = !E[true U !a],
    EG a = !A[true U !a], forall x a = !exists x !a.
    """
    if isinstance(f, (Top, PlayerAtom, Pred, Eq)):
        return f
    if isinstance(f, Bottom):
        return Not(Top())
    if isinstance(f, Not):
        return Not(expand_abbreviations(f.body))
    if isinstance(f, And):
        return Not(Implies(expand_abbreviations(f.left), Not(expand_abbreviations(f.right))))
    if isinstance(f, Or):
        return Implies(Not(expand_abbreviations(f.left)), expand_abbreviations(f.right))
    if isinstance(f, Implies):
        return Implies(expand_abbreviations(f.left), expand_abbreviations(f.right))
    if isinstance(f, EX):
        return Not(AX(Not(expand_abbreviations(f.body))))
    if isinstance(f, AX):
        return AX(expand_abbreviations(f.body))
    if isinstance(f, AF):
        return AU(Top(), expand_abbreviations(f.body))
    if isinstance(f, EF):
        return EU(Top(), expand_abbreviations(f.body))
    if isinstance(f, AG):
        return Not(EU(Top(), Not(expand_abbreviations(f.body))))
    if isinstance(f, EG):
        return Not(AU(Top(), Not(expand_abbreviations(f.body))))
    if isinstance(f, EU):
        return EU(expand_abbreviations(f.left), expand_abbreviations(f.right))
    if isinstance(f, AU):
        return AU(expand_abbreviations(f.left), expand_abbreviations(f.right))
    if isinstance(f, Exists):
        return Exists(f.var, expand_abbreviations(f.body))
    if isinstance(f, Forall):
        return Not(Exists(f.var, Not(expand_abbreviations(f.body))))
    raise TypeError(f"not a formula: {f!r}")


def metrics(f: Formula) -> FormulaMetrics:
    """Modal and quantifier connective counts of the expanded core form."""
    modal = 0
    quant = 0
    stack = [expand_abbreviations(f)]
    while stack:
        g = stack.pop()
        if isinstance(g, AX):
            modal += 1
            stack.append(g.body)
        elif isinstance(g, (EU, AU)):
            modal += 1
            stack.extend((g.left, g.right))
        elif isinstance(g, Exists):
            quant += 1
            stack.append(g.body)
        elif isinstance(g, Not):
            stack.append(g.body)
        elif isinstance(g, Implies):
            stack.extend((g.left, g.right))
    return FormulaMetrics(modal, quant)


def well_formed(f: Formula, sig: Signature) -> None:
    """Raise if `f` uses undeclared identifiers, breaks a profile, or
    rebinds a variable along one quantifier path."""

    def term(t: Term, scope: frozenset[str]) -> str:
        if isinstance(t, Var):
            if t.sort not in sig.sorts:
                raise SortError(f"variable {t.name!r} has undeclared sort {t.sort!r}")
            return t.sort
        if isinstance(t, DomainConst):
            if t.sort not in sig.sorts:
                raise UnknownIdentifierError(f"unknown sort {t.sort!r}")
            if t.index < 0:
                raise SortError(f"negative domain index in #{t.sort}:{t.index}")
            return t.sort
        decl = sig.functions.get(t.func)
        if decl is None:
            raise UnknownIdentifierError(f"unknown function {t.func!r}")
        if len(t.args) != len(decl.args):
            raise SortError(f"function {t.func!r} expects {len(decl.args)} arguments")
        for a, s in zip(t.args, decl.args):
            if term(a, scope) != s:
                raise SortError(f"argument of {t.func!r} has sort {term(a, scope)!r}, expected {s!r}")
        return decl.result

    def go(g: Formula, scope: frozenset[str]) -> None:
        if isinstance(g, (Top, Bottom)):
            return
        if isinstance(g, PlayerAtom):
            if g.player not in sig.players:
                raise UnknownIdentifierError(f"unknown player {g.player!r}")
            return
        if isinstance(g, Pred):
            decl = sig.predicates.get(g.name)
            if decl is None:
                raise UnknownIdentifierError(f"unknown predicate {g.name!r}")
            if len(g.args) != len(decl.args):
                raise SortError(f"predicate {g.name!r} expects {len(decl.args)} arguments")
            for a, s in zip(g.args, decl.args):
                if term(a, scope) != s:
                    raise SortError(f"argument of {g.name!r} has wrong sort")
            return
        if isinstance(g, Eq):
            if term(g.left, scope) != term(g.right, scope):
                raise SortError("equality between terms of different sorts")
            return
        if isinstance(g, (Not, EX, AX, EF, AF, EG, AG)):
            go(g.body, scope)
            return
        if isinstance(g, (And, Or, Implies, EU, AU)):
            go(g.left, scope)
            go(g.right, scope)
            return
        if isinstance(g, (Exists, Forall)):
            if g.var.name in scope:
                raise SortError(f"variable {g.var.name!r} bound twice on one quantifier path")
            if g.var.sort not in sig.sorts:
                raise UnknownIdentifierError(f"unknown sort {g.var.sort!r}")
            go(g.body, scope | {g.var.name})
            return
        raise TypeError(f"not a formula: {g!r}")

    go(f, frozenset())


# --------------------------------------------------------------------------- #
# Printer

_LVL_IMPLIES = 1
_LVL_OR = 2
_LVL_AND = 3
_LVL_NOT = 4
_LVL_ATOM = 5

_MODALITY_WORD = {EX: "EX", AX: "AX", EF: "EF", AF: "AF", EG: "EG", AG: "AG"}


def _pretty_term(t: Term, bound: frozenset[str]) -> str:
    if isinstance(t, Var):
        return t.name if t.name in bound else f"{t.name}:{t.sort}"
    if isinstance(t, DomainConst):
        return f"#{t.sort}:{t.index}"
    if not t.args:
        return t.func
    return f"{t.func}({', '.join(_pretty_term(a, bound) for a in t.args)})"


def pretty(f: Formula) -> str:
    """Surface syntax for a formula; reparses to a structurally equal tree."""

    def go(g: Formula, min_level: int, bound: frozenset[str]) -> str:
        text, level = render(g, bound)
        return f"({text})" if level < min_level else text

    def render(g: Formula, bound: frozenset[str]) -> tuple[str, int]:
        if isinstance(g, Top):
            return "true", _LVL_ATOM
        if isinstance(g, Bottom):
            return "false", _LVL_ATOM
        if isinstance(g, PlayerAtom):
            return f"@{g.player}", _LVL_ATOM
        if isinstance(g, Pred):
            if not g.args:
                return g.name, _LVL_ATOM
            return f"{g.name}({', '.join(_pretty_term(a, bound) for a in g.args)})", _LVL_ATOM
        if isinstance(g, Eq):
            return f"{_pretty_term(g.left, bound)} = {_pretty_term(g.right, bound)}", _LVL_ATOM
        if isinstance(g, Not):
            return f"!{go(g.body, _LVL_NOT, bound)}", _LVL_NOT
        if isinstance(g, And):
            return f"{go(g.left, _LVL_AND, bound)} & {go(g.right, _LVL_AND + 1, bound)}", _LVL_AND
        if isinstance(g, Or):
            return f"{go(g.left, _LVL_OR, bound)} | {go(g.right, _LVL_OR + 1, bound)}", _LVL_OR
        if isinstance(g, Implies):
            return f"{go(g.left, _LVL_IMPLIES + 1, bound)} -> {go(g.right, _LVL_IMPLIES, bound)}", _LVL_IMPLIES
        if isinstance(g, (EX, AX, EF, AF, EG, AG)):
            return f"{_MODALITY_WORD[type(g)]} {go(g.body, 0, bound)}", 0
        if isinstance(g, EU):
            return f"E[{go(g.left, 0, bound)} U {go(g.right, 0, bound)}]", _LVL_ATOM
        if isinstance(g, AU):
            return f"A[{go(g.left, 0, bound)} U {go(g.right, 0, bound)}]", _LVL_ATOM
        if isinstance(g, Exists):
            return f"exists {g.var.name}:{g.var.sort} . {go(g.body, 0, bound | {g.var.name})}", 0
        if isinstance(g, Forall):
            return f"forall {g.var.name}:{g.var.sort} . {go(g.body, 0, bound | {g.var.name})}", 0
        raise TypeError(f"not a formula: {g!r}")

    return go(f, 0, frozenset())


# --------------------------------------------------------------------------- #
# Lexer / parser

_TOKEN_RE = re.compile(
    r"""
    (?P<WS>\s+)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<NUM>[0-9]+)
  | (?P<ARROW>->)
  | (?P<SYM>[()\[\],.:=!&|@\#])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # IDENT NUM ARROW SYM EOF
    value: str
    pos: int


def _lex(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "WS":
            toks.append(_Tok(m.lastgroup, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("EOF", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, sig: Signature):
        self.sig = sig
        self.toks = _lex(text)
        self.i = 0
        # Names already present anywhere; used to pick fresh names when a
        # shadowed binder is renamed.
        self.used = {t.value for t in self.toks if t.kind == "IDENT"}
        self.used |= sig.sorts | set(sig.functions) | set(sig.predicates) | set(sig.players)
        self.free: dict[str, Var] = {}

    # -- token helpers ------------------------------------------------------

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value: str, what: str | None = None) -> _Tok:
        t = self.next()
        if t.value != value:
            raise ParseError(f"found {t.value or 'end of input'!r}", t.pos, what or repr(value))
        return t

    def at_sym(self, value: str) -> bool:
        t = self.peek()
        return t.kind in ("SYM", "ARROW") and t.value == value

    def eat_sym(self, value: str) -> bool:
        if self.at_sym(value):
            self.i += 1
            return True
        return False

    # -- grammar ------------------------------------------------------------

    def parse(self) -> Formula:
        f = self.formula({})
        t = self.peek()
        if t.kind != "EOF":
            raise ParseError(f"trailing input {t.value!r}", t.pos)
        return f

    def formula(self, scope: dict[str, Var]) -> Formula:
        left = self.disjunction(scope)
        if self.eat_sym("->"):
            return Implies(left, self.formula(scope))
        return left

    def disjunction(self, scope: dict[str, Var]) -> Formula:
        f = self.conjunction(scope)
        while self.eat_sym("|"):
            f = Or(f, self.conjunction(scope))
        return f

    def conjunction(self, scope: dict[str, Var]) -> Formula:
        f = self.unary(scope)
        while self.eat_sym("&"):
            f = And(f, self.unary(scope))
        return f

    def unary(self, scope: dict[str, Var]) -> Formula:
        t = self.peek()
        if self.eat_sym("!"):
            return Not(self.unary(scope))
        if t.kind == "IDENT":
            word = t.value
            if word in ("EX", "AX", "EF", "AF", "EG", "AG"):
                self.next()
                body = self.formula(scope)  # modalities bind their whole suffix
                return {"EX": EX, "AX": AX, "EF": EF, "AF": AF, "EG": EG, "AG": AG}[word](body)
            if word in ("E", "A") and self.toks[self.i + 1].value == "[":
                self.next()
                self.expect("[")
                left = self.formula(scope)
                self.expect("U", "'U' between the until operands")
                right = self.formula(scope)
                self.expect("]")
                return EU(left, right) if word == "E" else AU(left, right)
            if word in ("exists", "forall"):
                return self.quantifier(scope)
        return self.atom(scope)

    def quantifier(self, scope: dict[str, Var]) -> Formula:
        kw = self.next().value
        name_tok = self.next()
        if name_tok.kind != "IDENT":
            raise ParseError(f"found {name_tok.value!r}", name_tok.pos, "a variable name")
        name = name_tok.value
        if name in RESERVED_WORDS:
            raise ParseError(f"{name!r} is a reserved word", name_tok.pos)
        if self._declared(name):
            raise ParseError(f"variable {name!r} collides with a declared symbol", name_tok.pos)
        self.expect(":")
        sort_tok = self.next()
        if sort_tok.kind != "IDENT" or sort_tok.value not in self.sig.sorts:
            raise UnknownIdentifierError(f"unknown sort {sort_tok.value!r}")
        self.expect(".")
        bound_name = name
        if name in scope or name in self.free:
            # No variable may be bound twice on one quantifier path, and a
            # binder must not capture an annotated free variable: rename.
            k = 2
            while f"{name}_{k}" in self.used:
                k += 1
            bound_name = f"{name}_{k}"
            self.used.add(bound_name)
        var = Var(bound_name, sort_tok.value)
        inner = dict(scope)
        inner[name] = var
        body = self.formula(inner)
        return Exists(var, body) if kw == "exists" else Forall(var, body)

    def atom(self, scope: dict[str, Var]) -> Formula:
        t = self.peek()
        if self.eat_sym("("):
            f = self.formula(scope)
            self.expect(")")
            return f
        if self.eat_sym("@"):
            p = self.next()
            if p.kind not in ("IDENT", "NUM"):
                raise ParseError(f"found {p.value!r}", p.pos, "a player id after '@'")
            if p.value not in self.sig.players:
                raise UnknownIdentifierError(f"unknown player {p.value!r}")
            return PlayerAtom(p.value)
        if t.kind == "IDENT" and t.value == "true":
            self.next()
            return Top()
        if t.kind == "IDENT" and t.value == "false":
            self.next()
            return Bottom()
        if t.kind == "IDENT" and t.value in self.sig.predicates:
            name = self.next().value
            decl = self.sig.predicates[name]
            args: tuple[Term, ...] = ()
            if self.at_sym("("):
                args = self.term_list(scope)
            if len(args) != len(decl.args):
                raise SortError(f"predicate {name!r} expects {len(decl.args)} arguments, got {len(args)}")
            for a, s in zip(args, decl.args):
                got = term_sort(a, self.sig)
                if got != s:
                    raise SortError(f"argument of {name!r} has sort {got!r}, expected {s!r}")
            return Pred(name, args)
        # Otherwise this must be an equality between terms.
        left = self.term(scope)
        eq = self.next()
        if eq.value != "=":
            raise ParseError(f"found {eq.value or 'end of input'!r}", eq.pos, "'=' after a term")
        right = self.term(scope)
        ls, rs = term_sort(left, self.sig), term_sort(right, self.sig)
        if ls != rs:
            raise SortError(f"equality between sorts {ls!r} and {rs!r}")
        return Eq(left, right)

    def term_list(self, scope: dict[str, Var]) -> tuple[Term, ...]:
        self.expect("(")
        if self.eat_sym(")"):
            return ()
        args = [self.term(scope)]
        while self.eat_sym(","):
            args.append(self.term(scope))
        self.expect(")")
        return tuple(args)

    def term(self, scope: dict[str, Var]) -> Term:
        t = self.peek()
        if self.eat_sym("#"):
            sort_tok = self.next()
            if sort_tok.kind != "IDENT" or sort_tok.value not in self.sig.sorts:
                raise UnknownIdentifierError(f"unknown sort {sort_tok.value!r}")
            self.expect(":")
            num = self.next()
            if num.kind != "NUM":
                raise ParseError(f"found {num.value!r}", num.pos, "a domain index")
            return DomainConst(sort_tok.value, int(num.value))
        if t.kind != "IDENT":
            raise ParseError(f"found {t.value or 'end of input'!r}", t.pos, "a term")
        if t.value in RESERVED_WORDS:
            raise ParseError(f"{t.value!r} is a reserved word", t.pos, "a term")
        name = self.next().value
        if name in self.sig.functions:
            decl = self.sig.functions[name]
            args: tuple[Term, ...] = ()
            if self.at_sym("("):
                args = self.term_list(scope)
            if len(args) != len(decl.args):
                raise SortError(f"function {name!r} expects {len(decl.args)} arguments, got {len(args)}")
            for a, s in zip(args, decl.args):
                got = term_sort(a, self.sig)
                if got != s:
                    raise SortError(f"argument of {name!r} has sort {got!r}, expected {s!r}")
            return App(name, args)
        if name in scope:
            if self.at_sym(":"):
                raise ParseError(f"variable {name!r} is already bound; drop the annotation", t.pos)
            return scope[name]
        if self.at_sym(":"):
            self.next()
            sort_tok = self.next()
            if sort_tok.kind != "IDENT" or sort_tok.value not in self.sig.sorts:
                raise UnknownIdentifierError(f"unknown sort {sort_tok.value!r}")
            if self._declared(name):
                raise ParseError(f"variable {name!r} collides with a declared symbol", t.pos)
            prev = self.free.get(name)
            if prev is not None and prev.sort != sort_tok.value:
                raise SortError(f"free variable {name!r} annotated with sorts {prev.sort!r} and {sort_tok.value!r}")
            var = Var(name, sort_tok.value)
            self.free[name] = var
            return var
        if name in self.free:
            return self.free[name]
        raise UnknownIdentifierError(f"unknown identifier {name!r}")

    def _declared(self, name: str) -> bool:
        return (
            name in self.sig.sorts
            or name in self.sig.functions
            or name in self.sig.predicates
            or name in self.sig.players
        )


def parse_formula(text: str, sig: Signature) -> Formula:
    """Parse surface syntax against a signature.

    Raises ParseError (with the offending position), SortError, or
    UnknownIdentifierError.  Free variables must carry a sort annotation on
    first use; binders that would shadow an enclosing binder are renamed.
    """
    parser = _Parser(text, sig)
    try:
        return parser.parse()
    except RecursionError:
        raise ParseError("formula is nested too deeply", parser.peek().pos) from None
