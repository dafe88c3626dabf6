"""Explicit finite relational structures and checking utilities.

A FiniteStructure stores one atomic 1-type per element and one atomic 2-type
per unordered pair of distinct elements.  Each pair records which endpoint
plays the role of x; all queries go through accessors that transpose on
demand, so orientation is handled in exactly one place.

The module also provides the model checker used to verify every positive
verdict the package produces, the kind-axiom checker for constrained binary
symbols, clique extraction, and the JSON interchange format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .syntax import (
    And,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Pred,
    Problem,
    Signature,
    pretty,
)
from .atomic_types import OneType, TwoType, TypeContext
from .normal_form import ConjKind, NFConjunct, NFSentence


class FiniteStructure:
    """An explicit interpretation of a signature over {0, ..., n-1}."""

    def __init__(
        self,
        context: TypeContext,
        one_types: Sequence[OneType],
        pairs: Dict[Tuple[int, int], TwoType],
    ) -> None:
        assert len(one_types) >= 1, "structures are non-empty"
        n = len(one_types)
        for (a, b), beta in pairs.items():
            assert 0 <= a < b < n, "pair keys are ordered (a < b)"
            assert beta.alpha == one_types[a] and beta.alpha_prime == one_types[b], (
                "pair 2-type must agree with endpoint 1-types"
            )
        assert len(pairs) == n * (n - 1) // 2, "2-types must be total"
        self.context = context
        self.signature = context.signature
        self.size = n
        self.one_types = tuple(one_types)
        self.pairs = dict(pairs)

    # -- typed accessors -----------------------------------------------------

    def one_type_of(self, a: int) -> OneType:
        return self.one_types[a]

    def two_type_of(self, a: int, b: int) -> TwoType:
        """The 2-type of (a, b) with a playing x; a and b must differ."""
        assert a != b
        if a < b:
            return self.pairs[(a, b)]
        return self.context.transpose(self.pairs[(b, a)])

    def holds_unary(self, name: str, a: int) -> bool:
        return self.context.unary_value(self.one_types[a], name)

    def holds_binary(self, name: str, a: int, b: int) -> bool:
        if a == b:
            return self.context.self_loop(self.one_types[a], name)
        return self.context.cross_value(self.two_type_of(a, b), name, True)

    # -- relation views --------------------------------------------------------

    def unary_set(self, name: str) -> List[int]:
        return [a for a in range(self.size) if self.holds_unary(name, a)]

    def binary_pairs(self, name: str) -> List[Tuple[int, int]]:
        return [
            (a, b)
            for a in range(self.size)
            for b in range(self.size)
            if self.holds_binary(name, a, b)
        ]

    def relations(self):
        """Export as plain sets: ({name: set of ints}, {name: set of pairs})."""
        unary = {name: set(self.unary_set(name)) for name in self.signature.unary}
        binary = {
            name: set(self.binary_pairs(name))
            for name in self.signature.binary + self.signature.special_names
        }
        return unary, binary

    @staticmethod
    def from_relations(
        signature: Signature,
        size: int,
        unary: Dict[str, Iterable[int]],
        binary: Dict[str, Iterable[Tuple[int, int]]],
    ) -> "FiniteStructure":
        context = TypeContext(signature)
        unary_sets = {name: set(unary.get(name, ())) for name in signature.unary}
        binary_names = signature.binary + signature.special_names
        binary_sets = {name: set(map(tuple, binary.get(name, ()))) for name in binary_names}
        one_types = []
        for a in range(size):
            one_types.append(
                context.make_one_type(
                    unaries=[u for u in signature.unary if a in unary_sets[u]],
                    self_loops=[b for b in binary_names if (a, a) in binary_sets[b]],
                )
            )
        pairs = {}
        for a in range(size):
            for b in range(a + 1, size):
                cross = [
                    (name, fwd)
                    for name in binary_names
                    for fwd in (True, False)
                    if ((a, b) if fwd else (b, a)) in binary_sets[name]
                ]
                pairs[(a, b)] = context.make_two_type(one_types[a], one_types[b], cross)
        return FiniteStructure(context, one_types, pairs)

    # -- restriction and signature surgery -------------------------------------

    def restrict(self, elements: Sequence[int]) -> "FiniteStructure":
        """Substructure on the given elements, reindexed in the given order."""
        assert len(set(elements)) == len(elements) >= 1
        one_types = [self.one_types[old] for old in elements]
        pairs = {}
        for i, a in enumerate(elements):
            for j in range(i + 1, len(elements)):
                pairs[(i, j)] = self.two_type_of(a, elements[j])
        return FiniteStructure(self.context, one_types, pairs)

    def with_signature(self, signature: Signature) -> "FiniteStructure":
        """Reinterpret over another signature, dropping undeclared symbols."""
        unary, binary = self.relations()
        return FiniteStructure.from_relations(
            signature,
            self.size,
            {name: unary.get(name, set()) for name in signature.unary},
            {
                name: binary.get(name, set())
                for name in signature.binary + signature.special_names
            },
        )

    # -- JSON interchange --------------------------------------------------------

    def to_json(self) -> str:
        unary = {name: self.unary_set(name) for name in self.signature.unary}
        binary = {
            name: [list(pair) for pair in self.binary_pairs(name)]
            for name in self.signature.binary + self.signature.special_names
        }
        doc = {"domain": self.size, "unary": unary, "binary": binary}
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    @staticmethod
    def from_json(text: str, signature: Signature) -> "FiniteStructure":
        doc = json.loads(text)
        size = doc.get("domain")
        if not isinstance(size, int) or size < 1:
            raise ValueError("'domain' must be a positive integer")
        unary = doc.get("unary", {})
        binary = doc.get("binary", {})
        binary_names = set(signature.binary) | set(signature.special_names)
        for name in unary:
            if name not in signature.unary:
                raise ValueError(f"undeclared unary symbol in structure: {name}")
        for name in binary:
            if name not in binary_names:
                raise ValueError(f"undeclared binary symbol in structure: {name}")
        for name, members in unary.items():
            for a in members:
                if not isinstance(a, int) or not 0 <= a < size:
                    raise ValueError(f"unary {name}: element {a!r} out of range")
        pairs = {}
        for name, entries in binary.items():
            seen = set()
            for entry in entries:
                if not (isinstance(entry, list) and len(entry) == 2):
                    raise ValueError(f"binary {name}: malformed pair {entry!r}")
                a, b = entry
                if not all(isinstance(v, int) and 0 <= v < size for v in (a, b)):
                    raise ValueError(f"binary {name}: pair {entry!r} out of range")
                seen.add((a, b))
            pairs[name] = seen
        return FiniteStructure.from_relations(signature, size, unary, pairs)

    # -- evaluation ----------------------------------------------------------------

    def eval_fo(self, f: Formula, env: Optional[Dict[str, int]] = None) -> bool:
        env = env or {}
        if isinstance(f, Pred):
            if len(f.args) == 1:
                return self.holds_unary(f.name, env[f.args[0]])
            return self.holds_binary(f.name, env[f.args[0]], env[f.args[1]])
        if isinstance(f, Eq):
            return env[f.left] == env[f.right]
        if isinstance(f, Const):
            return f.value
        if isinstance(f, Not):
            return not self.eval_fo(f.sub, env)
        if isinstance(f, And):
            return self.eval_fo(f.left, env) and self.eval_fo(f.right, env)
        if isinstance(f, Or):
            return self.eval_fo(f.left, env) or self.eval_fo(f.right, env)
        if isinstance(f, Implies):
            return not self.eval_fo(f.left, env) or self.eval_fo(f.right, env)
        if isinstance(f, Iff):
            return self.eval_fo(f.left, env) == self.eval_fo(f.right, env)
        if isinstance(f, Exists):
            return any(self.eval_fo(f.body, {**env, f.var: a}) for a in range(self.size))
        if isinstance(f, Forall):
            return all(self.eval_fo(f.body, {**env, f.var: a}) for a in range(self.size))
        raise TypeError(f"unknown formula node: {f!r}")

    def satisfies_problem(self, p: Problem) -> bool:
        return not check_special(self, p.signature) and self.eval_fo(p.sentence)


class StructureBuilder:
    """Incremental construction with set-once discipline on every 2-type."""

    def __init__(self, context: TypeContext, size: int) -> None:
        assert size >= 1
        self.context = context
        self.size = size
        self._one: List[Optional[OneType]] = [None] * size
        self._pairs: Dict[Tuple[int, int], TwoType] = {}

    def assign_one(self, a: int, alpha: OneType) -> None:
        assert self._one[a] is None or self._one[a] == alpha, f"1-type of {a} reassigned"
        self._one[a] = alpha

    def one_type_of(self, a: int) -> OneType:
        alpha = self._one[a]
        assert alpha is not None
        return alpha

    def pair_defined(self, a: int, b: int) -> bool:
        assert a != b
        return (min(a, b), max(a, b)) in self._pairs

    def assign_pair(self, a: int, b: int, beta: TwoType) -> None:
        """Record the 2-type of (a, b) with a playing x.  Asserts the pair
        was never assigned before: the constructions define each 2-type at
        most once."""
        assert a != b
        key = (min(a, b), max(a, b))
        assert key not in self._pairs, f"2-type of pair {key} defined twice"
        oriented = beta if a < b else self.context.transpose(beta)
        assert oriented.alpha == self._one[key[0]] and self._one[key[0]] is not None
        assert oriented.alpha_prime == self._one[key[1]] and self._one[key[1]] is not None
        self._pairs[key] = oriented

    def fill_missing_binary_free(self) -> None:
        for a in range(self.size):
            for b in range(a + 1, self.size):
                if (a, b) not in self._pairs:
                    self._pairs[(a, b)] = self.context.binary_free(
                        self.one_type_of(a), self.one_type_of(b)
                    )

    def build(self) -> FiniteStructure:
        assert all(alpha is not None for alpha in self._one), "untyped element"
        return FiniteStructure(self.context, [a for a in self._one if a is not None], self._pairs)


# ---------------------------------------------------------------------------
# Kind axioms, cliques and the model checker
# ---------------------------------------------------------------------------


def check_special(s: FiniteStructure, signature: Optional[Signature] = None) -> List[str]:
    """Violations of the semantic constraints of every constrained symbol."""
    signature = signature or s.signature
    violations = []
    for name, kind in signature.special:
        pairs = {
            (a, b)
            for a in range(s.size)
            for b in range(s.size)
            if s.holds_binary(name, a, b)
        }
        if kind.reflexive:
            for a in range(s.size):
                if (a, a) not in pairs:
                    violations.append(f"{name}: missing self-loop at {a}")
        if kind.symmetric:
            for a, b in pairs:
                if (b, a) not in pairs:
                    violations.append(f"{name}: {a},{b} present but {b},{a} absent")
        if kind.antisymmetric:
            for a, b in pairs:
                if a != b and (b, a) in pairs:
                    violations.append(f"{name}: antisymmetry broken on {a},{b}")
        for a, b in pairs:
            for c in range(s.size):
                if (b, c) in pairs and (a, c) not in pairs:
                    violations.append(f"{name}: transitivity broken on {a},{b},{c}")
    return violations


def cliques(s: FiniteStructure, symbol: str) -> List[Tuple[int, ...]]:
    """Partition the domain into maximal mutual-``symbol`` sets.

    Elements lacking a self-loop cannot be mutually related to anything
    (transitivity closes mutual pairs into self-loops) and end up in
    singleton parts.  Requires the symbol to be transitive.
    """
    pairs = {
        (a, b)
        for a in range(s.size)
        for b in range(s.size)
        if s.holds_binary(symbol, a, b)
    }
    for a, b in pairs:
        for c in range(s.size):
            if (b, c) in pairs and (a, c) not in pairs:
                raise ValueError(f"{symbol} is not transitive; cliques undefined")
    parent = list(range(s.size))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in pairs:
        if a < b and (b, a) in pairs:
            parent[find(a)] = find(b)
    groups: Dict[int, List[int]] = {}
    for a in range(s.size):
        groups.setdefault(find(a), []).append(a)
    return sorted(tuple(sorted(g)) for g in groups.values())


def _conjunct_label(c: NFConjunct) -> str:
    return pretty(c.to_formula())


def model_check(s: FiniteStructure, nf: NFSentence) -> List[str]:
    """Violated conjuncts of a normal-form sentence, with witnesses."""
    ctx = s.context
    violations = []
    for c in nf.conjuncts:
        if c.kind is ConjKind.EXISTS:
            ok = any(
                ctx.eval_one(c.guard_formula(), s.one_type_of(a))
                and ctx.eval_one(c.matrix, s.one_type_of(a))
                for a in range(s.size)
            )
            if not ok:
                violations.append(f"no witness for: {_conjunct_label(c)}")
        elif c.kind in (
            ConjKind.FORALL2_SPECIAL,
            ConjKind.FORALL2,
        ):
            guard = c.guard_formula()
            for a in range(s.size):
                if ctx.eval_one(guard, s.one_type_of(a)) and not ctx.eval_one(
                    c.matrix, s.one_type_of(a)
                ):
                    violations.append(f"element {a} violates: {_conjunct_label(c)}")
                for b in range(s.size):
                    if a == b:
                        continue
                    beta = s.two_type_of(a, b)
                    if ctx.eval_two(guard, beta) and not ctx.eval_two(c.matrix, beta):
                        violations.append(
                            f"pair {a},{b} violates: {_conjunct_label(c)}"
                        )
        elif c.kind in (ConjKind.FORALL1, ConjKind.FORALL1_SPECIAL_REFLEX):
            guard = c.guard_formula()
            for a in range(s.size):
                if ctx.eval_one(guard, s.one_type_of(a)) and not ctx.eval_one(
                    c.matrix, s.one_type_of(a)
                ):
                    violations.append(f"element {a} violates: {_conjunct_label(c)}")
        else:  # witness-demanding conjuncts
            guard = c.guard_formula()
            for a in range(s.size):
                if not ctx.eval_one(c.trigger, s.one_type_of(a)):
                    continue
                if ctx.eval_one(guard, s.one_type_of(a)) and ctx.eval_one(
                    c.matrix, s.one_type_of(a)
                ):
                    continue
                found = False
                for b in range(s.size):
                    if b == a:
                        continue
                    beta = s.two_type_of(a, b)
                    if ctx.eval_two(guard, beta) and ctx.eval_two(c.matrix, beta):
                        found = True
                        break
                if not found:
                    violations.append(
                        f"element {a} lacks a witness for: {_conjunct_label(c)}"
                    )
    return violations


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    """Outcome of a satisfiability question."""

    status: str  # "sat" | "unsat" | "unknown"
    model: Optional[FiniteStructure] = None
    certificate: Optional[object] = None
    reason: str = ""

    @staticmethod
    def sat(model: FiniteStructure, certificate: Optional[object] = None) -> "Verdict":
        return Verdict("sat", model=model, certificate=certificate)

    @staticmethod
    def unsat(reason: str = "") -> "Verdict":
        return Verdict("unsat", reason=reason)

    @staticmethod
    def unknown(reason: str) -> "Verdict":
        return Verdict("unknown", reason=reason)
