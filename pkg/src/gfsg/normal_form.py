"""Scott-style normal form for guarded two-variable sentences.

Rewrites a validated problem into a stream of normal-form sentences whose
conjuncts fall into a seven-kind taxonomy, with guards over constrained
binary symbols normalized by orientation (mutual, strictly forward, or
strictly backward).  Also provides the conjunct groupings consumed by the
deciders and the kind-lowering reductions that replace transitive,
partial-equivalence, and partial-order guards by preorders or equivalences.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterator, Optional

from .syntax import (
    And,
    Const,
    Eq,
    Exists,
    FALSE,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Pred,
    Problem,
    Signature,
    SpecialKind,
    TRUE,
    analyze_block,
    and_all,
    conjuncts_of,
    free_vars,
    node_count,
    simplify_consts,
    swap_xy,
    validate_guardedness,
)


class Orientation(enum.Enum):
    """Normalized direction of a special guard between x and y."""

    SYM = "sym"     # S(x,y) & S(y,x)
    DOWN = "down"   # S(x,y) & !S(y,x)
    UP = "up"       # S(y,x) & !S(x,y)


class ConjKind(enum.Enum):
    EXISTS = "exists"                              # exists x (p(x) & psi(x))
    FORALL2_SPECIAL = "forall2_special"            # forall x y (eta -> psi)
    FORALL1_SPECIAL_REFLEX = "forall1_special"     # forall x (S(x,x) -> psi)
    FORALL2 = "forall2"                            # forall x y (q -> psi)
    FORALL1 = "forall1"                            # forall x (q(x) -> psi)
    FORALL_EXISTS_SPECIAL = "forall_exists_special"  # forall x (p -> exists y (eta & psi))
    FORALL_EXISTS = "forall_exists"                # forall x (p -> exists y (q & psi))


_SPECIAL_KINDS = (
    ConjKind.FORALL2_SPECIAL,
    ConjKind.FORALL1_SPECIAL_REFLEX,
    ConjKind.FORALL_EXISTS_SPECIAL,
)
_UNIV_KINDS = (
    ConjKind.FORALL2_SPECIAL,
    ConjKind.FORALL1_SPECIAL_REFLEX,
    ConjKind.FORALL2,
    ConjKind.FORALL1,
)


@dataclass(frozen=True)
class NFConjunct:
    """One normal-form conjunct.

    ``guard`` holds the guard atom for the non-special kinds; the special
    kinds describe their guard by ``symbol`` plus ``orientation`` instead.
    ``trigger`` is the one-variable antecedent atom of the forall-exists
    kinds.  ``matrix`` is quantifier-free and never mentions a constrained
    binary symbol.
    """

    kind: ConjKind
    matrix: Formula
    guard: Optional[Formula] = None
    symbol: Optional[str] = None
    orientation: Optional[Orientation] = None
    trigger: Optional[Formula] = None

    def guard_formula(self) -> Formula:
        """The guard as a quantifier-free formula over x (and y)."""
        if self.kind is ConjKind.FORALL1_SPECIAL_REFLEX:
            return Pred(self.symbol, ("x", "x"))
        if self.kind in (ConjKind.FORALL2_SPECIAL, ConjKind.FORALL_EXISTS_SPECIAL):
            fwd = Pred(self.symbol, ("x", "y"))
            bwd = Pred(self.symbol, ("y", "x"))
            if self.orientation is Orientation.SYM:
                return And(fwd, bwd)
            if self.orientation is Orientation.DOWN:
                return And(fwd, Not(bwd))
            return And(bwd, Not(fwd))
        return self.guard

    def to_formula(self) -> Formula:
        guard = self.guard_formula()
        if self.kind is ConjKind.EXISTS:
            body = guard if self.matrix == guard else simplify_consts(And(guard, self.matrix))
            return Exists("x", body)
        if self.kind in (ConjKind.FORALL1, ConjKind.FORALL1_SPECIAL_REFLEX):
            return Forall("x", Implies(guard, self.matrix))
        if self.kind in (ConjKind.FORALL2, ConjKind.FORALL2_SPECIAL):
            return Forall("x", Forall("y", Implies(guard, self.matrix)))
        witness = simplify_consts(And(guard, self.matrix))
        return Forall("x", Implies(self.trigger, Exists("y", witness)))


@dataclass(frozen=True)
class NFSentence:
    """A normal-form sentence: a conjunction of NFConjuncts over a signature."""

    signature: Signature
    conjuncts: tuple[NFConjunct, ...]
    equality: bool

    def to_formula(self) -> Formula:
        return and_all([c.to_formula() for c in self.conjuncts])

    def size(self) -> int:
        return node_count(self.to_formula())

    @property
    def h(self) -> int:
        return sum(1 for c in self.conjuncts if c.kind is ConjKind.FORALL_EXISTS)

    def _count(self, symbol: str, orientation: Orientation) -> int:
        return sum(
            1
            for c in self.conjuncts
            if c.kind is ConjKind.FORALL_EXISTS_SPECIAL
            and c.symbol == symbol
            and c.orientation is orientation
        )

    @property
    def h_sym(self) -> dict:
        return {s: self._count(s, Orientation.SYM) for s in self.signature.special_names}

    @property
    def m_lower(self) -> dict:
        return {s: self._count(s, Orientation.DOWN) for s in self.signature.special_names}

    @property
    def m_upper(self) -> dict:
        return {s: self._count(s, Orientation.UP) for s in self.signature.special_names}


@dataclass(frozen=True)
class Grouping:
    """The conjunct subsets the deciders quantify over."""

    phi_univ: tuple[NFConjunct, ...]
    phi_sym_S: dict
    phi_sym: tuple[NFConjunct, ...]
    phi_eq: tuple[NFConjunct, ...]
    phi_full_T: dict
    nonsym_fe: tuple[NFConjunct, ...]


def group(nf: NFSentence) -> Grouping:
    univ = tuple(c for c in nf.conjuncts if c.kind in _UNIV_KINDS)
    exists = tuple(c for c in nf.conjuncts if c.kind is ConjKind.EXISTS)
    fe_plain = tuple(c for c in nf.conjuncts if c.kind is ConjKind.FORALL_EXISTS)
    fe_special = tuple(c for c in nf.conjuncts if c.kind is ConjKind.FORALL_EXISTS_SPECIAL)
    sym_by_symbol = {}
    full_by_symbol = {}
    for s in nf.signature.special_names:
        mine = tuple(c for c in fe_special if c.symbol == s)
        sym_by_symbol[s] = univ + tuple(c for c in mine if c.orientation is Orientation.SYM)
        full_by_symbol[s] = univ + mine
    sym_fe = tuple(c for c in fe_special if c.orientation is Orientation.SYM)
    nonsym = tuple(c for c in fe_special if c.orientation is not Orientation.SYM)
    phi_sym = univ + sym_fe + exists
    return Grouping(
        phi_univ=univ,
        phi_sym_S=sym_by_symbol,
        phi_sym=phi_sym,
        phi_eq=phi_sym + fe_plain,
        phi_full_T=full_by_symbol,
        nonsym_fe=nonsym,
    )


# ---------------------------------------------------------------------------
# Formula utilities
# ---------------------------------------------------------------------------


def _is_qf(f: Formula) -> bool:
    if isinstance(f, (Exists, Forall)):
        return False
    if isinstance(f, (Pred, Eq, Const)):
        return True
    if isinstance(f, Not):
        return _is_qf(f.sub)
    return _is_qf(f.left) and _is_qf(f.right)


def _strip_vacuous(f: Formula) -> Formula:
    """Drop quantifiers whose variable does not occur freely in the body."""
    if isinstance(f, (Pred, Eq, Const)):
        return f
    if isinstance(f, Not):
        return Not(_strip_vacuous(f.sub))
    if isinstance(f, (Exists, Forall)):
        body = _strip_vacuous(f.body)
        if f.var not in free_vars(body):
            return body
        return type(f)(f.var, body)
    return type(f)(_strip_vacuous(f.left), _strip_vacuous(f.right))


def _used_symbols(f: Formula, into: set) -> None:
    if isinstance(f, Pred):
        into.add(f.name)
        return
    if isinstance(f, (Eq, Const)):
        return
    if isinstance(f, Not):
        _used_symbols(f.sub, into)
        return
    if isinstance(f, (Exists, Forall)):
        _used_symbols(f.body, into)
        return
    _used_symbols(f.left, into)
    _used_symbols(f.right, into)


def _subst_markers(f: Formula, values: dict) -> Formula:
    if isinstance(f, Pred):
        if f.name in values:
            return TRUE if values[f.name] else FALSE
        return f
    if isinstance(f, (Eq, Const)):
        return f
    if isinstance(f, Not):
        return Not(_subst_markers(f.sub, values))
    if isinstance(f, (Exists, Forall)):
        return type(f)(f.var, _subst_markers(f.body, values))
    return type(f)(_subst_markers(f.left, values), _subst_markers(f.right, values))


def _eval_prop(f: Formula, values: dict) -> bool:
    if isinstance(f, Pred):
        return values[f.name]
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Not):
        return not _eval_prop(f.sub, values)
    if isinstance(f, And):
        return _eval_prop(f.left, values) and _eval_prop(f.right, values)
    if isinstance(f, Or):
        return _eval_prop(f.left, values) or _eval_prop(f.right, values)
    if isinstance(f, Implies):
        return (not _eval_prop(f.left, values)) or _eval_prop(f.right, values)
    if isinstance(f, Iff):
        return _eval_prop(f.left, values) == _eval_prop(f.right, values)
    raise AssertionError(f"skeleton is not propositional: {f!r}")


class _Names:
    """Deterministic fresh-name allocator avoiding declared symbols."""

    def __init__(self, taken) -> None:
        self._taken = set(taken)
        self._counters: dict = {}

    def fresh(self, stem: str) -> str:
        n = self._counters.get(stem, 0)
        while True:
            n += 1
            name = f"{stem}{n}"
            if name not in self._taken:
                self._counters[stem] = n
                self._taken.add(name)
                return name


# ---------------------------------------------------------------------------
# The normal-form transformation
# ---------------------------------------------------------------------------


class _SkipAssignment(Exception):
    """A marker assignment forced an unsatisfiable conjunct; drop the disjunct."""


@dataclass
class _PreparedMarker:
    name: str
    shape: str                      # exists1 | exists2 | forall1 | forall2 | forall_exists
    guard: Formula
    matrix: Formula                 # may still contain inner markers
    trigger: Optional[Formula] = None
    swapped: bool = False           # two-variable block bound y before x


@dataclass
class _SentenceExpansion:
    common: list
    alts: list                      # non-empty list of conjunct lists


class _Scottifier:
    def __init__(self, problem: Problem) -> None:
        self.problem = problem
        self.signature = problem.signature
        self.equality = problem.equality_used
        taken = (
            list(problem.signature.unary)
            + list(problem.signature.binary)
            + list(problem.signature.special_names)
        )
        self.names = _Names(taken)
        self.fresh_order: list = []
        self._sink: list = []

    # -- fresh symbols ------------------------------------------------------

    def _fresh_unary(self, stem: str) -> str:
        name = self.names.fresh(stem)
        self.fresh_order.append(name)
        return name

    # -- emission helpers ---------------------------------------------------

    def _emit(self, conj: NFConjunct) -> None:
        self._sink.append(conj)

    def _is_special_atom(self, f: Formula) -> bool:
        return isinstance(f, Pred) and self.signature.is_special(f.name)

    def emit_exists(self, guard: Formula, matrix: Formula) -> None:
        if "y" in free_vars(guard) | free_vars(matrix):
            guard, matrix = swap_xy(guard), swap_xy(matrix)
        matrix = simplify_consts(matrix)
        if matrix == FALSE:
            raise _SkipAssignment
        self._emit(NFConjunct(ConjKind.EXISTS, matrix, guard=guard))

    def emit_forall1(self, guard: Formula, matrix: Formula) -> None:
        if "y" in free_vars(guard) | free_vars(matrix):
            guard, matrix = swap_xy(guard), swap_xy(matrix)
        matrix = simplify_consts(matrix)
        if matrix == TRUE:
            return
        if self._is_special_atom(guard):
            symbol = guard.name
            if self.equality:
                self._emit(
                    NFConjunct(
                        ConjKind.FORALL2_SPECIAL,
                        simplify_consts(Implies(Eq("x", "y"), matrix)),
                        symbol=symbol,
                        orientation=Orientation.SYM,
                    )
                )
            else:
                self._emit(
                    NFConjunct(
                        ConjKind.FORALL1_SPECIAL_REFLEX,
                        matrix,
                        symbol=symbol,
                        orientation=Orientation.SYM,
                    )
                )
            return
        if self.equality:
            body = matrix if guard == Eq("x", "x") else Implies(guard, matrix)
            self._emit(NFConjunct(ConjKind.FORALL2, simplify_consts(body), guard=Eq("x", "y")))
        else:
            self._emit(NFConjunct(ConjKind.FORALL1, matrix, guard=guard))

    def _orientations_for(self, guard: Formula) -> list:
        """Split a plain special guard atom into exhaustive orientations."""
        kind = self.signature.kind_of(guard.name)
        forward = guard.args == ("x", "y")
        if kind.symmetric:
            return [Orientation.SYM]
        return [Orientation.SYM, Orientation.DOWN if forward else Orientation.UP]

    def emit_forall2(self, guard: Formula, matrix: Formula) -> None:
        matrix = simplify_consts(matrix)
        if matrix == TRUE:
            return
        if self._is_special_atom(guard):
            for orientation in self._orientations_for(guard):
                self._emit(
                    NFConjunct(
                        ConjKind.FORALL2_SPECIAL,
                        matrix,
                        symbol=guard.name,
                        orientation=orientation,
                    )
                )
            return
        self._emit(NFConjunct(ConjKind.FORALL2, matrix, guard=guard))

    def emit_forall_exists(self, trigger: Formula, guard: Formula, matrix: Formula) -> None:
        if "y" in free_vars(trigger):
            trigger, guard, matrix = swap_xy(trigger), swap_xy(guard), swap_xy(matrix)
        matrix = simplify_consts(matrix)
        if matrix == FALSE:
            # witnesses are impossible, so the trigger must be empty
            self.emit_forall1(trigger, FALSE)
            return
        if self._is_special_atom(guard):
            orientations = self._orientations_for(guard)
            if len(orientations) == 1:
                self._emit(
                    NFConjunct(
                        ConjKind.FORALL_EXISTS_SPECIAL,
                        matrix,
                        symbol=guard.name,
                        orientation=orientations[0],
                        trigger=trigger,
                    )
                )
                return
            cases = [(self._fresh_unary("_w"), orientation) for orientation in orientations]
            self.emit_forall1(trigger, Or(*(Pred(c, ("x",)) for c, _ in cases)))
            for case_name, orientation in cases:
                self._emit(
                    NFConjunct(
                        ConjKind.FORALL_EXISTS_SPECIAL,
                        matrix,
                        symbol=guard.name,
                        orientation=orientation,
                        trigger=Pred(case_name, ("x",)),
                    )
                )
            return
        self._emit(NFConjunct(ConjKind.FORALL_EXISTS, matrix, guard=guard, trigger=trigger))

    # -- renaming of open quantified subformulas ----------------------------

    def _rename_open(self, f: Formula, pol: int) -> Formula:
        if isinstance(f, (Pred, Eq, Const)):
            return f
        if isinstance(f, Not):
            return Not(self._rename_open(f.sub, -pol))
        if isinstance(f, And):
            return And(self._rename_open(f.left, pol), self._rename_open(f.right, pol))
        if isinstance(f, Or):
            return Or(self._rename_open(f.left, pol), self._rename_open(f.right, pol))
        if isinstance(f, Implies):
            return Implies(self._rename_open(f.left, -pol), self._rename_open(f.right, pol))
        if isinstance(f, Iff):
            return Iff(self._rename_open(f.left, 0), self._rename_open(f.right, 0))
        outer_vars = free_vars(f)
        assert len(outer_vars) == 1, "nested closed subformulas must already be markers"
        (outer,) = outer_vars
        shape = analyze_block(f)
        assert shape is not None, "validated problems have guarded quantifiers"
        assert len(shape.variables) == 1
        rest = self._rename_open(shape.rest, pol)
        name = self._fresh_unary("_d")
        atom = Pred(name, (outer,))
        if isinstance(f, Exists):
            if shape.rest == shape.guard:
                rest = TRUE
            if pol >= 0:
                self.emit_forall_exists(atom, shape.guard, rest)
            if pol <= 0:
                self.emit_forall2(shape.guard, Implies(rest, atom))
            return atom
        if pol >= 0:
            self.emit_forall2(shape.guard, Implies(atom, rest))
        if pol <= 0:
            bar = Pred(self._fresh_unary("_d"), (outer,))
            self.emit_forall1(Eq(outer, outer), Or(atom, bar))
            self.emit_forall_exists(bar, shape.guard, simplify_consts(Not(rest)))
        return atom

    # -- marker decomposition ------------------------------------------------

    def _decompose(self, sentence: Formula):
        markers: list = []
        seen: dict = {}

        def walk(f: Formula) -> Formula:
            if isinstance(f, (Pred, Eq, Const)):
                return f
            if isinstance(f, Not):
                return Not(walk(f.sub))
            if isinstance(f, (Exists, Forall)):
                inner = type(f)(f.var, walk(f.body))
                if free_vars(inner):
                    return inner
                if inner in seen:
                    return Pred(seen[inner], ())
                name = self.names.fresh("_m")
                seen[inner] = name
                markers.append((name, inner))
                return Pred(name, ())
            return type(f)(walk(f.left), walk(f.right))

        skeleton = walk(sentence)
        return skeleton, markers

    def _prepare(self, body: Formula, pol: int) -> _PreparedMarker:
        shape = analyze_block(body)
        assert shape is not None, "validated problems have guarded quantifiers"
        swapped = False
        guard, rest = shape.guard, shape.rest
        if len(shape.variables) == 2:
            if shape.variables == ("y", "x"):
                swapped = True
                guard, rest = swap_xy(guard), swap_xy(rest)
            kind = "exists2" if shape.quantifier == "exists" else "forall2"
            return _PreparedMarker(
                "", kind, guard, self._rename_open(rest, pol), swapped=swapped
            )
        if shape.quantifier == "exists":
            if rest == guard:
                rest = TRUE
            return _PreparedMarker("", "exists1", guard, self._rename_open(rest, pol))
        if isinstance(rest, Exists):
            inner = analyze_block(rest)
            assert inner is not None and len(inner.variables) == 1
            inner_rest = inner.rest if inner.rest != inner.guard else TRUE
            return _PreparedMarker(
                "",
                "forall_exists",
                inner.guard,
                self._rename_open(inner_rest, pol),
                trigger=guard,
            )
        return _PreparedMarker("", "forall1", guard, self._rename_open(rest, pol))

    # -- enforcement of a prepared marker under one assignment ---------------

    def _enforce(self, prep: _PreparedMarker, sign: bool, values: dict) -> None:
        matrix = simplify_consts(_subst_markers(prep.matrix, values))
        negated = simplify_consts(Not(matrix))
        if prep.shape == "exists1":
            if sign:
                self.emit_exists(prep.guard, matrix)
            else:
                self.emit_forall1(prep.guard, negated)
        elif prep.shape == "exists2":
            if sign:
                if matrix == FALSE:
                    raise _SkipAssignment
                name = self._fresh_unary("_d")
                atom = Pred(name, ("x",))
                self.emit_exists(atom, atom)
                self.emit_forall_exists(atom, prep.guard, matrix)
            else:
                self.emit_forall2(prep.guard, negated)
        elif prep.shape == "forall1":
            if sign:
                self.emit_forall1(prep.guard, matrix)
            else:
                self.emit_exists(prep.guard, negated)
        elif prep.shape == "forall2":
            if sign:
                self.emit_forall2(prep.guard, matrix)
            else:
                if negated == FALSE:
                    raise _SkipAssignment
                name = self._fresh_unary("_d")
                atom = Pred(name, ("x",))
                self.emit_exists(atom, atom)
                self.emit_forall_exists(atom, prep.guard, negated)
        else:
            assert prep.shape == "forall_exists"
            if sign:
                if matrix == FALSE:
                    self.emit_forall1(prep.trigger, FALSE)
                else:
                    self.emit_forall_exists(prep.trigger, prep.guard, matrix)
            else:
                if matrix == FALSE:
                    self.emit_exists(prep.trigger, TRUE)
                    return
                name = self._fresh_unary("_d")
                atom = Pred(name, ("x",))
                self.emit_forall2(prep.guard, simplify_consts(Implies(matrix, atom)))
                self.emit_exists(prep.trigger, Not(atom))

    # -- per-sentence expansion ----------------------------------------------

    def expand_sentence(self, sentence: Formula) -> _SentenceExpansion:
        sentence = _strip_vacuous(simplify_consts(sentence))
        if sentence == TRUE:
            return _SentenceExpansion([], [[]])
        if sentence == FALSE:
            return _SentenceExpansion([], [])
        skeleton, markers = self._decompose(sentence)
        names = [name for name, _ in markers]
        assert len(names) <= 16, "too many closed subformulas in one sentence"
        assignments = []
        for bits in itertools.product((False, True), repeat=len(names)):
            values = dict(zip(names, bits))
            if _eval_prop(skeleton, values):
                assignments.append(values)
        if not assignments:
            return _SentenceExpansion([], [])
        signs_used: dict = {name: set() for name in names}
        for values in assignments:
            for name in names:
                signs_used[name].add(values[name])
        common: list = []
        self._sink = common
        prepared = {}
        for name, body in markers:
            used = signs_used[name]
            pol = 0 if len(used) == 2 else (1 if True in used else -1)
            prepared[name] = self._prepare(body, pol)
        alts: list = []
        for values in assignments:
            alt: list = []
            self._sink = alt
            try:
                for name, _ in markers:
                    self._enforce(prepared[name], values[name], values)
            except _SkipAssignment:
                continue
            if alt not in alts:
                alts.append(alt)
        self._sink = []
        return _SentenceExpansion(common, alts)

    # -- whole-problem expansion ----------------------------------------------

    def expand(self) -> Iterator[NFSentence]:
        expansions = [self.expand_sentence(s) for s in conjuncts_of(self.problem.sentence)]
        base = self.signature
        fresh_order = list(self.fresh_order)
        equality = self.equality
        for choice in itertools.product(*(e.alts for e in expansions)):
            conjuncts: list = []
            for expansion, alt in zip(expansions, choice):
                for conj in itertools.chain(expansion.common, alt):
                    if conj not in conjuncts:
                        conjuncts.append(conj)
            used: set = set()
            for conj in conjuncts:
                for part in (conj.guard, conj.trigger, conj.matrix):
                    if part is not None:
                        _used_symbols(part, used)
            sig = base.with_extra_unary(tuple(n for n in fresh_order if n in used))
            yield NFSentence(sig, tuple(conjuncts), equality)


def scottify(p: Problem) -> Iterator[NFSentence]:
    """Stream the normal-form disjuncts of a validated problem.

    The disjunction of the yielded sentences is satisfiable over exactly the
    same domains as ``p``; each sentence extends the signature with fresh
    unary symbols only.  An empty stream means the problem is contradictory
    at the propositional level.
    """
    errors = validate_guardedness(p)
    if errors:
        raise ValueError("; ".join(errors))
    return _Scottifier(p).expand()


def check_nf(nf: NFSentence) -> None:
    """Assert the structural invariants of a normal-form sentence."""
    special = set(nf.signature.special_names)

    def special_free(f: Formula) -> bool:
        used: set = set()
        _used_symbols(f, used)
        return not (used & special)

    for c in nf.conjuncts:
        assert _is_qf(c.matrix), f"matrix not quantifier-free: {c}"
        assert special_free(c.matrix), f"special symbol in matrix: {c}"
        if c.kind in _SPECIAL_KINDS:
            assert c.symbol in special and c.orientation is not None
            assert c.guard is None
        else:
            assert c.symbol is None and c.orientation is None
            assert isinstance(c.guard, (Pred, Eq))
        if c.kind in (ConjKind.FORALL_EXISTS, ConjKind.FORALL_EXISTS_SPECIAL):
            assert isinstance(c.trigger, (Pred, Eq))
            assert free_vars(c.trigger) <= {"x"}
        else:
            assert c.trigger is None
        if nf.equality:
            assert c.kind not in (ConjKind.FORALL1, ConjKind.FORALL1_SPECIAL_REFLEX)


def rewrite_one_var_conjuncts(nf: NFSentence) -> NFSentence:
    """Rewrite one-variable universal conjuncts into two-variable form.

    Sound in plain first-order terms; used on the preorder path, where the
    decision machinery assumes equality-style two-variable conjuncts.
    """
    out = []
    for c in nf.conjuncts:
        if c.kind is ConjKind.FORALL1:
            body = c.matrix if c.guard == Eq("x", "x") else Implies(c.guard, c.matrix)
            out.append(NFConjunct(ConjKind.FORALL2, simplify_consts(body), guard=Eq("x", "y")))
        elif c.kind is ConjKind.FORALL1_SPECIAL_REFLEX:
            out.append(
                NFConjunct(
                    ConjKind.FORALL2_SPECIAL,
                    Implies(Eq("x", "y"), c.matrix),
                    symbol=c.symbol,
                    orientation=Orientation.SYM,
                )
            )
        else:
            out.append(c)
    return NFSentence(nf.signature, tuple(out), True)


def reinterpret_equivalences_as_preorders(nf: NFSentence):
    """Regard every equivalence symbol as a preorder.

    All guards over an equivalence symbol are mutual after normalization, so
    a preorder model can be folded back by keeping only the mutual pairs of
    the flipped symbols; returns the reinterpreted sentence and the symbols
    whose interpretation must be symmetrized on the way back.
    """
    flipped = []
    for name, kind in nf.signature.special:
        assert kind in (SpecialKind.EQUIV, SpecialKind.PREORDER)
        if kind is SpecialKind.EQUIV:
            flipped.append(name)
    for c in nf.conjuncts:
        if c.symbol in flipped:
            assert c.orientation is Orientation.SYM
    sig = nf.signature.with_kinds({name: SpecialKind.PREORDER for name in flipped})
    return NFSentence(sig, nf.conjuncts, nf.equality), tuple(flipped)


# ---------------------------------------------------------------------------
# Kind-lowering reductions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Reduction:
    """A reduced problem plus the data needed to translate models back."""

    original: Problem
    problem: Problem
    diagonal_markers: tuple         # (symbol, marker): drop unmarked self-loops
    fresh_symbols: tuple            # symbols absent from the original signature


def _mark_atoms(f: Formula, markers: dict) -> Formula:
    if isinstance(f, Pred):
        if f.name in markers:
            marked = Pred(markers[f.name], (f.args[0],))
            if f.args[0] == f.args[1]:
                return And(f, marked)
            return And(f, Or(Not(Eq(f.args[0], f.args[1])), marked))
        return f
    if isinstance(f, (Eq, Const)):
        return f
    if isinstance(f, Not):
        return Not(_mark_atoms(f.sub, markers))
    if isinstance(f, (Exists, Forall)):
        return type(f)(f.var, _mark_atoms(f.body, markers))
    return type(f)(_mark_atoms(f.left, markers), _mark_atoms(f.right, markers))


def reduce_special_kinds(p: Problem) -> Reduction:
    """Lower every special symbol to a preorder or an equivalence.

    Transitive and partial-equivalence symbols gain a reflexivity marker and
    an auxiliary plain binary relation constraining which mutual pairs may be
    unmarked; partial orders gain an auxiliary relation simulating weak
    antisymmetry.  The result is satisfiable over exactly the same domains.
    """
    names = _Names(
        list(p.signature.unary) + list(p.signature.binary) + list(p.signature.special_names)
    )
    kind_changes: dict = {}
    markers: dict = {}
    marker_pairs = []
    extra_unary = []
    extra_binary = []
    chi: list = []
    for symbol, kind in p.signature.special:
        if kind in (SpecialKind.TRANS, SpecialKind.PARTIAL_EQUIV):
            u = names.fresh(f"_u_{symbol}_")
            r = names.fresh(f"_r_{symbol}_")
            extra_unary.append(u)
            extra_binary.append(r)
            markers[symbol] = u
            marker_pairs.append((symbol, u))
            kind_changes[symbol] = (
                SpecialKind.PREORDER if kind is SpecialKind.TRANS else SpecialKind.EQUIV
            )
            sxy = Pred(symbol, ("x", "y"))
            rxy = Pred(r, ("x", "y"))
            ryx = Pred(r, ("y", "x"))
            chi.append(Forall("x", Forall("y", Implies(sxy, rxy))))
            chi.append(
                Forall(
                    "x",
                    Implies(
                        Eq("x", "x"),
                        Implies(
                            Not(Pred(u, ("x",))),
                            Forall("y", Implies(rxy, Or(Not(ryx), Eq("x", "y")))),
                        ),
                    ),
                )
            )
        elif kind is SpecialKind.PARTIAL_ORDER:
            r = names.fresh(f"_r_{symbol}_")
            extra_binary.append(r)
            kind_changes[symbol] = SpecialKind.PREORDER
            sxy = Pred(symbol, ("x", "y"))
            rxy = Pred(r, ("x", "y"))
            ryx = Pred(r, ("y", "x"))
            chi.append(Forall("x", Forall("y", Implies(sxy, rxy))))
            chi.append(Forall("x", Forall("y", Implies(rxy, Or(Not(ryx), Eq("x", "y"))))))
    if not kind_changes:
        return Reduction(p, p, (), ())
    signature = (
        p.signature.with_kinds(kind_changes)
        .with_extra_unary(tuple(extra_unary))
        .with_extra_binary(tuple(extra_binary))
    )
    sentences = [_mark_atoms(s, markers) for s in conjuncts_of(p.sentence)]
    reduced = Problem(signature, and_all(sentences + chi))
    errors = validate_guardedness(reduced)
    assert not errors, f"reduction broke guardedness: {errors}"
    return Reduction(p, reduced, tuple(marker_pairs), tuple(extra_unary + extra_binary))


def reduce_tg_to_trg(p: Problem) -> Problem:
    """Replace transitive guards by preorder guards (and partial equivalences
    by equivalences), preserving finite satisfiability over the same domains."""
    allowed = (
        SpecialKind.TRANS,
        SpecialKind.PREORDER,
        SpecialKind.PARTIAL_EQUIV,
        SpecialKind.EQUIV,
    )
    for _, kind in p.signature.special:
        if kind not in allowed:
            raise ValueError(f"cannot reduce special kind {kind.value} here")
    return reduce_special_kinds(p).problem
