"""Surface syntax and abstract syntax for guarded two-variable formulas.

A problem file declares a signature and a list of sentences:

    sig { unary P, Q; equiv E1, E2; }
    formula {
        exists x (P(x) & Q(x));
        forall x (P(x) -> exists y (E1(x,y) & Q(y)));
    }

Binary symbols declared with one of the constrained kinds (``equiv``,
``trans``, ``preord``, ``peq``, ``porder``) must be interpreted as an
equivalence / transitive relation / preorder / partial equivalence /
partial order respectively, and may only occur in guard positions.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterator, Optional


class SpecialKind(enum.Enum):
    EQUIV = "equiv"
    TRANS = "trans"
    PREORDER = "preord"
    PARTIAL_EQUIV = "peq"
    PARTIAL_ORDER = "porder"

    @property
    def reflexive(self) -> bool:
        return self in (SpecialKind.EQUIV, SpecialKind.PREORDER,
                        SpecialKind.PARTIAL_ORDER)

    @property
    def symmetric(self) -> bool:
        return self in (SpecialKind.EQUIV, SpecialKind.PARTIAL_EQUIV)

    @property
    def antisymmetric(self) -> bool:
        return self is SpecialKind.PARTIAL_ORDER


_KIND_KEYWORDS = {kind.value: kind for kind in SpecialKind}


@dataclass(frozen=True)
class Signature:
    """Relation symbols split into unary, plain binary, and constrained binary."""

    unary: tuple[str, ...] = ()
    binary: tuple[str, ...] = ()
    special: tuple[tuple[str, SpecialKind], ...] = ()

    def __post_init__(self) -> None:
        names = list(self.unary) + list(self.binary) + [n for n, _ in self.special]
        if len(names) != len(set(names)):
            raise ValueError("duplicate symbol name in signature")

    @property
    def special_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.special)

    def kind_of(self, name: str) -> SpecialKind:
        for n, kind in self.special:
            if n == name:
                return kind
        raise KeyError(name)

    def is_unary(self, name: str) -> bool:
        return name in self.unary

    def is_special(self, name: str) -> bool:
        return any(n == name for n, _ in self.special)

    def is_binary(self, name: str) -> bool:
        """True for any binary symbol, plain or constrained."""
        return name in self.binary or self.is_special(name)

    def arity(self, name: str) -> int:
        if name in self.unary:
            return 1
        if self.is_binary(name):
            return 2
        raise KeyError(name)

    def declares(self, name: str) -> bool:
        return name in self.unary or self.is_binary(name)

    def with_extra_unary(self, names: tuple[str, ...]) -> "Signature":
        return Signature(self.unary + names, self.binary, self.special)

    def with_extra_binary(self, names: tuple[str, ...]) -> "Signature":
        return Signature(self.unary, self.binary + names, self.special)

    def with_kinds(self, mapping: dict[str, SpecialKind]) -> "Signature":
        """Reinterpret the kinds of the named special symbols."""
        new_special = tuple((n, mapping.get(n, k)) for n, k in self.special)
        return Signature(self.unary, self.binary, new_special)


# ---------------------------------------------------------------------------
# Abstract syntax
# ---------------------------------------------------------------------------

class Formula:
    """Base class for formula nodes; all subclasses are frozen dataclasses."""

    __slots__ = ()


@dataclass(frozen=True)
class Pred(Formula):
    name: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Eq(Formula):
    left: str
    right: str


@dataclass(frozen=True)
class Const(Formula):
    """Boolean constant; appears only through simplification, never parsed."""

    value: bool


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


TRUE = Const(True)
FALSE = Const(False)


def free_vars(f: Formula) -> frozenset:
    if isinstance(f, Pred):
        return frozenset(f.args)
    if isinstance(f, Eq):
        return frozenset((f.left, f.right))
    if isinstance(f, Const):
        return frozenset()
    if isinstance(f, Not):
        return free_vars(f.sub)
    if isinstance(f, (And, Or, Implies, Iff)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def node_count(f: Formula) -> int:
    if isinstance(f, (Pred, Eq, Const)):
        return 1
    if isinstance(f, Not):
        return 1 + node_count(f.sub)
    if isinstance(f, (And, Or, Implies, Iff)):
        return 1 + node_count(f.left) + node_count(f.right)
    if isinstance(f, (Exists, Forall)):
        return 1 + node_count(f.body)
    raise TypeError(f"not a formula: {f!r}")


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Not):
        yield from subformulas(f.sub)
    elif isinstance(f, (And, Or, Implies, Iff)):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, (Exists, Forall)):
        yield from subformulas(f.body)


def conjuncts_of(f: Formula) -> list[Formula]:
    """Flatten a chain of conjunctions into a list."""
    if isinstance(f, And):
        return conjuncts_of(f.left) + conjuncts_of(f.right)
    return [f]


def and_all(parts: list[Formula]) -> Formula:
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def swap_xy(f: Formula) -> Formula:
    """Exchange the variables x and y throughout (free and bound alike)."""
    flip = {"x": "y", "y": "x"}
    if isinstance(f, Pred):
        return Pred(f.name, tuple(flip.get(a, a) for a in f.args))
    if isinstance(f, Eq):
        return Eq(flip.get(f.left, f.left), flip.get(f.right, f.right))
    if isinstance(f, Const):
        return f
    if isinstance(f, Not):
        return Not(swap_xy(f.sub))
    if isinstance(f, (And, Or, Implies, Iff)):
        cls = type(f)
        return cls(swap_xy(f.left), swap_xy(f.right))
    if isinstance(f, Exists):
        return Exists(flip.get(f.var, f.var), swap_xy(f.body))
    if isinstance(f, Forall):
        return Forall(flip.get(f.var, f.var), swap_xy(f.body))
    raise TypeError(f"not a formula: {f!r}")


def simplify_consts(f: Formula) -> Formula:
    """Fold boolean constants introduced by substitution."""
    if isinstance(f, (Pred, Eq, Const)):
        return f
    if isinstance(f, Not):
        s = simplify_consts(f.sub)
        if isinstance(s, Const):
            return Const(not s.value)
        return Not(s)
    if isinstance(f, And):
        a, b = simplify_consts(f.left), simplify_consts(f.right)
        if isinstance(a, Const):
            return b if a.value else FALSE
        if isinstance(b, Const):
            return a if b.value else FALSE
        return And(a, b)
    if isinstance(f, Or):
        a, b = simplify_consts(f.left), simplify_consts(f.right)
        if isinstance(a, Const):
            return TRUE if a.value else b
        if isinstance(b, Const):
            return TRUE if b.value else a
        return Or(a, b)
    if isinstance(f, Implies):
        a, b = simplify_consts(f.left), simplify_consts(f.right)
        if isinstance(a, Const):
            return b if a.value else TRUE
        if isinstance(b, Const):
            return TRUE if b.value else Not(a)
        return Implies(a, b)
    if isinstance(f, Iff):
        a, b = simplify_consts(f.left), simplify_consts(f.right)
        if isinstance(a, Const):
            return b if a.value else simplify_consts(Not(b))
        if isinstance(b, Const):
            return a if b.value else Not(a)
        return Iff(a, b)
    if isinstance(f, Exists):
        s = simplify_consts(f.body)
        if isinstance(s, Const):
            return s
        return Exists(f.var, s)
    if isinstance(f, Forall):
        s = simplify_consts(f.body)
        if isinstance(s, Const):
            return s
        return Forall(f.var, s)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Pretty printing
# ---------------------------------------------------------------------------

_PREC = {"iff": 1, "implies": 2, "or": 3, "and": 4, "unary": 5}


def pretty(f: Formula) -> str:
    return _pretty(f, 0)


def _pretty(f: Formula, outer: int) -> str:
    if isinstance(f, Pred):
        return f"{f.name}({', '.join(f.args)})"
    if isinstance(f, Eq):
        return f"{f.left} = {f.right}"
    if isinstance(f, Const):
        # The grammar has no boolean literals; render as a trivial equality.
        return "x = x" if f.value else "!(x = x)"
    if isinstance(f, Not):
        if isinstance(f.sub, Eq):
            return f"{f.sub.left} != {f.sub.right}"
        return "!" + _pretty(f.sub, _PREC["unary"])
    if isinstance(f, And):
        text = f"{_pretty(f.left, _PREC['and'])} & {_pretty(f.right, _PREC['and'])}"
        return _paren(text, _PREC["and"], outer)
    if isinstance(f, Or):
        text = f"{_pretty(f.left, _PREC['or'])} | {_pretty(f.right, _PREC['or'])}"
        return _paren(text, _PREC["or"], outer)
    if isinstance(f, Implies):
        text = (f"{_pretty(f.left, _PREC['implies'] + 1)} -> "
                f"{_pretty(f.right, _PREC['implies'])}")
        return _paren(text, _PREC["implies"], outer)
    if isinstance(f, Iff):
        text = (f"{_pretty(f.left, _PREC['iff'] + 1)} <-> "
                f"{_pretty(f.right, _PREC['iff'] + 1)}")
        return _paren(text, _PREC["iff"], outer)
    if isinstance(f, Exists):
        return f"exists {f.var} ({pretty(f.body)})"
    if isinstance(f, Forall):
        return f"forall {f.var} ({pretty(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


def _paren(text: str, prec: int, outer: int) -> str:
    return f"({text})" if prec < outer else text


# ---------------------------------------------------------------------------
# Tokenizer / parser
# ---------------------------------------------------------------------------

class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<op><->|->|!=|[{}();,=&|!])
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "op", "name", "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.take()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}",
                             tok.line, tok.col)
        return tok

    def fail(self, message: str) -> None:
        tok = self.peek()
        raise ParseError(message, tok.line, tok.col)

    # -- problem ------------------------------------------------------------

    def parse_problem(self) -> "Problem":
        self.expect("sig")
        self.expect("{")
        unary: list[str] = []
        binary: list[str] = []
        special: list[tuple[str, SpecialKind]] = []
        seen: set = set()
        while self.peek().text != "}":
            tok = self.take()
            if tok.kind != "name" or (tok.text not in ("unary", "binary")
                                      and tok.text not in _KIND_KEYWORDS):
                raise ParseError(f"expected a declaration keyword, found {tok.text!r}",
                                 tok.line, tok.col)
            keyword = tok.text
            while True:
                name_tok = self.take()
                if name_tok.kind != "name":
                    raise ParseError("expected a symbol name", name_tok.line, name_tok.col)
                name = name_tok.text
                if name in seen:
                    raise ParseError(f"symbol {name!r} declared twice",
                                     name_tok.line, name_tok.col)
                if name in ("x", "y"):
                    raise ParseError("'x' and 'y' are reserved for variables",
                                     name_tok.line, name_tok.col)
                seen.add(name)
                if keyword == "unary":
                    unary.append(name)
                elif keyword == "binary":
                    binary.append(name)
                else:
                    special.append((name, _KIND_KEYWORDS[keyword]))
                if self.peek().text == ",":
                    self.take()
                    continue
                break
            self.expect(";")
        self.expect("}")
        sig = Signature(tuple(unary), tuple(binary), tuple(special))

        self.expect("formula")
        self.expect("{")
        sentences: list[Formula] = []
        while self.peek().text != "}":
            sentence = self.parse_formula(sig)
            self.expect(";")
            fv = free_vars(sentence)
            if fv:
                self.fail(f"sentence has free variables: {', '.join(sorted(fv))}")
            sentences.append(sentence)
        self.expect("}")
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"unexpected trailing input {tok.text!r}", tok.line, tok.col)
        if not sentences:
            raise ParseError("formula block is empty", tok.line, tok.col)
        return Problem(sig, and_all(sentences))

    # -- formulas -----------------------------------------------------------

    def parse_formula(self, sig: Signature) -> Formula:
        return self._iff(sig)

    def _iff(self, sig: Signature) -> Formula:
        left = self._implies(sig)
        while self.peek().text == "<->":
            self.take()
            right = self._implies(sig)
            left = Iff(left, right)
        return left

    def _implies(self, sig: Signature) -> Formula:
        left = self._or(sig)
        if self.peek().text == "->":
            self.take()
            right = self._implies(sig)  # right-associative
            return Implies(left, right)
        return left

    def _or(self, sig: Signature) -> Formula:
        left = self._and(sig)
        while self.peek().text == "|":
            self.take()
            left = Or(left, self._and(sig))
        return left

    def _and(self, sig: Signature) -> Formula:
        left = self._unary(sig)
        while self.peek().text == "&":
            self.take()
            left = And(left, self._unary(sig))
        return left

    def _unary(self, sig: Signature) -> Formula:
        tok = self.peek()
        if tok.text == "!":
            self.take()
            return Not(self._unary(sig))
        if tok.text in ("exists", "forall"):
            self.take()
            var_tok = self.take()
            if var_tok.text not in ("x", "y"):
                raise ParseError("quantified variable must be x or y",
                                 var_tok.line, var_tok.col)
            body = self._unary(sig)
            return (Exists if tok.text == "exists" else Forall)(var_tok.text, body)
        if tok.text == "(":
            self.take()
            inner = self._iff(sig)
            self.expect(")")
            return inner
        return self._atom(sig)

    def _atom(self, sig: Signature) -> Formula:
        tok = self.take()
        if tok.kind != "name":
            raise ParseError(f"expected an atom, found {tok.text or 'end of input'!r}",
                             tok.line, tok.col)
        if tok.text in ("x", "y"):
            op = self.take()
            if op.text not in ("=", "!="):
                raise ParseError("expected '=' or '!=' after a variable",
                                 op.line, op.col)
            rhs = self.take()
            if rhs.text not in ("x", "y"):
                raise ParseError("equality must relate the variables x and y",
                                 rhs.line, rhs.col)
            eq = Eq(tok.text, rhs.text)
            return Not(eq) if op.text == "!=" else eq
        name = tok.text
        if not sig.declares(name):
            raise ParseError(f"undeclared symbol {name!r}", tok.line, tok.col)
        self.expect("(")
        args = []
        while True:
            arg = self.take()
            if arg.text not in ("x", "y"):
                raise ParseError("arguments must be the variables x and y",
                                 arg.line, arg.col)
            args.append(arg.text)
            if self.peek().text == ",":
                self.take()
                continue
            break
        self.expect(")")
        if len(args) != sig.arity(name):
            raise ParseError(
                f"symbol {name!r} has arity {sig.arity(name)}, got {len(args)} arguments",
                tok.line, tok.col)
        return Pred(name, tuple(args))


# ---------------------------------------------------------------------------
# Problems, guardedness, fragments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Problem:
    signature: Signature
    sentence: Formula
    equality_used: bool = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "equality_used", _equality_used(self.sentence))


def parse_problem(text: str) -> Problem:
    return _Parser(text).parse_problem()


def render_problem(p: Problem) -> str:
    """Render a problem back into the surface grammar, deterministically."""
    lines = ["sig {"]
    if p.signature.unary:
        lines.append("    unary " + ", ".join(p.signature.unary) + ";")
    if p.signature.binary:
        lines.append("    binary " + ", ".join(p.signature.binary) + ";")
    by_kind: dict = {}
    for name, kind in p.signature.special:
        by_kind.setdefault(kind, []).append(name)
    for kind in SpecialKind:
        if kind in by_kind:
            lines.append(f"    {kind.value} " + ", ".join(by_kind[kind]) + ";")
    lines.append("}")
    lines.append("formula {")
    for sentence in conjuncts_of(p.sentence):
        lines.append("    " + pretty(sentence) + ";")
    lines.append("}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class GuardShape:
    """Analysis of one quantifier block: guard atom plus residual matrix."""

    quantifier: str           # "exists" | "forall"
    variables: tuple[str, ...]
    guard: Formula            # Pred or Eq
    rest: Formula             # body with the guard factored out


def _strip_block(f: Formula) -> tuple[str, tuple[str, ...], Formula]:
    """Strip a maximal chain of same-kind quantifiers from the root."""
    kind = "exists" if isinstance(f, Exists) else "forall"
    variables = [f.var]
    body = f.body
    cls = type(f)
    while isinstance(body, cls) and body.var not in variables:
        variables.append(body.var)
        body = body.body
    return kind, tuple(variables), body


def _is_atom(f: Formula) -> bool:
    return isinstance(f, (Pred, Eq))


def _atom_vars(f: Formula) -> frozenset:
    if isinstance(f, Pred):
        return frozenset(f.args)
    if isinstance(f, Eq):
        return frozenset((f.left, f.right))
    return frozenset()


def analyze_block(f: Formula) -> Optional[GuardShape]:
    """Decompose a quantified formula into guard and rest, or None if unguarded.

    Existential bodies are conjunctions whose first conjunct is the guard; a
    single atom guards itself.  Universal bodies are implications whose
    antecedent is the guard; a conjunctive antecedent is flattened once, with
    the leading atom as guard and the remaining conjuncts moved into the
    consequent.  The guard must contain every free variable of the rest.
    """
    if not isinstance(f, (Exists, Forall)):
        return None
    kind, variables, body = _strip_block(f)
    if kind == "exists":
        parts = conjuncts_of(body)
        guard = parts[0]
        if not _is_atom(guard):
            return None
        rest = and_all(parts[1:]) if len(parts) > 1 else guard
        if not free_vars(rest) <= _atom_vars(guard):
            return None
        return GuardShape(kind, variables, guard, rest)
    if not isinstance(body, Implies):
        return None
    ant_parts = conjuncts_of(body.left)
    guard = ant_parts[0]
    if not _is_atom(guard):
        return None
    if len(ant_parts) > 1:
        rest: Formula = Implies(and_all(ant_parts[1:]), body.right)
    else:
        rest = body.right
    if not free_vars(rest) <= _atom_vars(guard):
        return None
    return GuardShape(kind, variables, guard, rest)


def validate_guardedness(p: Problem) -> list[str]:
    """Return human-readable violations; empty list means the problem is fine."""
    violations: list[str] = []
    guard_atoms: set = set()  # id() of Pred nodes standing in guard position

    def walk(f: Formula) -> None:
        if isinstance(f, (Exists, Forall)):
            shape = analyze_block(f)
            if shape is None:
                violations.append(f"unguarded quantifier: {pretty(f)}")
                # Keep walking so special-symbol misuse is still reported.
                walk_children(f)
                return
            if isinstance(shape.guard, Pred):
                guard_atoms.add(id(shape.guard))
            walk(shape.rest)
            return
        walk_children(f)

    def walk_children(f: Formula) -> None:
        if isinstance(f, Not):
            walk(f.sub)
        elif isinstance(f, (And, Or, Implies, Iff)):
            walk(f.left)
            walk(f.right)
        elif isinstance(f, (Exists, Forall)):
            walk(f.body)

    walk(p.sentence)

    def check_special(f: Formula) -> None:
        if isinstance(f, Pred) and p.signature.is_special(f.name):
            if id(f) not in guard_atoms:
                violations.append(
                    f"special symbol outside guard position: {pretty(f)}")
        elif isinstance(f, Not):
            check_special(f.sub)
        elif isinstance(f, (And, Or, Implies, Iff)):
            check_special(f.left)
            check_special(f.right)
        elif isinstance(f, (Exists, Forall)):
            check_special(f.body)

    check_special(p.sentence)
    return violations


def _equality_used(sentence: Formula) -> bool:
    """True when equality occurs anywhere except as a trivial x = x guard."""

    def walk(f: Formula) -> bool:
        if isinstance(f, Eq):
            return True
        if isinstance(f, (Pred, Const)):
            return False
        if isinstance(f, Not):
            return walk(f.sub)
        if isinstance(f, (And, Or, Implies, Iff)):
            return walk(f.left) or walk(f.right)
        if isinstance(f, (Exists, Forall)):
            shape = analyze_block(f)
            if shape is not None:
                trivial_guard = (isinstance(shape.guard, Eq)
                                 and shape.guard.left == shape.guard.right)
                if trivial_guard:
                    return walk(shape.rest)
                return walk(shape.guard) or walk(shape.rest)
            return walk(f.body)
        raise TypeError(f"not a formula: {f!r}")

    return walk(sentence)


FRAGMENTS = ("EG", "EG_NO_EQ", "TSG", "TG", "TRG", "PG", "MIXED")

_UNIFORM_FRAGMENT = {
    SpecialKind.EQUIV: "EG",
    SpecialKind.PARTIAL_EQUIV: "TSG",
    SpecialKind.TRANS: "TG",
    SpecialKind.PREORDER: "TRG",
    SpecialKind.PARTIAL_ORDER: "PG",
}


def fragment_of(p: Problem) -> str:
    kinds = {kind for _, kind in p.signature.special}
    if not kinds or kinds == {SpecialKind.EQUIV}:
        return "EG" if p.equality_used else "EG_NO_EQ"
    if len(kinds) == 1:
        return _UNIFORM_FRAGMENT[next(iter(kinds))]
    return "MIXED"
