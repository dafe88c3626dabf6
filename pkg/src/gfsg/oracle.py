"""Bounded brute-force model search, independent of the deciders.

The oracle enumerates candidate structures of sizes 1..max_size: first a
nondecreasing sequence of 1-types (canonical symmetry breaking over element
relabelling), then a 2-type for every unordered pair, assigned column by
column.  Pruning uses only facts that hold in every completion:

- per-element constraints (universal sentences instantiated with x = y,
  reflexivity of the constrained kinds),
- per-pair tables (universal sentences over pairs, symmetry/antisymmetry,
  the two-element transitivity closure),
- transitivity over fully assigned triples,
- witness feasibility: an element whose remaining candidate partners can no
  longer supply a required witness kills the branch.

Sentences the compiler cannot classify (boolean combinations of blocks,
nested quantification inside matrices, existential sentences) do not prune;
every complete candidate passes through the full evaluator and the kind
checker before being returned, so the search is sound and complete within
the size bound regardless of how much the compiler understood.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .syntax import (
    And,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Problem,
    analyze_block,
    conjuncts_of,
    swap_xy,
)
from .atomic_types import OneType, TwoType, TypeContext
from .structures import FiniteStructure


class OracleTimeout(Exception):
    """Raised when the search exceeds its time budget."""


def _quantifier_free(f: Formula) -> bool:
    if isinstance(f, (Exists, Forall)):
        return False
    if isinstance(f, Not):
        return _quantifier_free(f.sub)
    if hasattr(f, "left"):
        return _quantifier_free(f.left) and _quantifier_free(f.right)
    return True


@dataclass
class _WitnessNeed:
    trigger: Formula  # atom over x
    requirement: Formula  # guard and matrix, over x (source) and y (witness)


class _Compiled:
    """Constraint tables extracted from the surface sentences."""

    def __init__(self, p: Problem) -> None:
        self.context = TypeContext(p.signature)
        self.element_constraints: List[Formula] = []  # hold of every element
        self.pair_constraints: List[Formula] = []  # hold of every ordered pair
        self.witness_needs: List[_WitnessNeed] = []
        self.exists1_needs: List[Formula] = []  # some element satisfies
        self.exists2_needs: List[Formula] = []  # some element or pair satisfies
        self.special_columns = [
            i
            for i, name in enumerate(self.context.binaries)
            if name in p.signature.special_names
        ]
        # True when every sentence was captured by a table above; only then
        # may cross assignments that no table distinguishes be collapsed.
        self.covered = all(self._compile(s) for s in conjuncts_of(p.sentence))
        self._allowed_cache: Dict[Tuple[int, int], Tuple[int, ...]] = {}
        self._possible_cache: Dict[Tuple[int, int, int], bool] = {}
        self._possible_e2_cache: Dict[Tuple[int, int, int], bool] = {}
        self._element_cache: Dict[int, bool] = {}
        self._self_witness_cache: Dict[Tuple[int, int], bool] = {}

    def _compile(self, sentence: Formula) -> bool:
        if isinstance(sentence, Not):
            inner = analyze_block(sentence.sub)
            if (
                inner is not None
                and inner.quantifier == "exists"
                and _quantifier_free(inner.rest)
            ):
                forbidden: Formula = And(inner.guard, inner.rest)
                if len(inner.variables) == 1:
                    if inner.variables == ("y",):
                        forbidden = swap_xy(forbidden)
                    self.element_constraints.append(Not(forbidden))
                else:
                    self.pair_constraints.append(Not(forbidden))
                return True
            return False
        shape = analyze_block(sentence)
        if shape is None:
            return False  # left to the final gate
        guard, rest = shape.guard, shape.rest
        if shape.quantifier == "exists":
            if not _quantifier_free(rest):
                return False
            requirement = And(guard, rest)
            if len(shape.variables) == 1:
                if shape.variables == ("y",):
                    requirement = swap_xy(requirement)
                self.exists1_needs.append(requirement)
            else:
                self.exists2_needs.append(requirement)
            return True
        if len(shape.variables) == 2:
            if _quantifier_free(rest):
                self.pair_constraints.append(Implies(guard, rest))
                return True
            return False
        if shape.variables == ("y",):
            guard, rest = swap_xy(guard), swap_xy(rest)
        if _quantifier_free(rest):
            self.element_constraints.append(Implies(guard, rest))
            return True
        if isinstance(rest, Exists):
            inner = analyze_block(rest)
            if inner is not None and len(inner.variables) == 1 and _quantifier_free(
                inner.rest
            ):
                requirement = And(inner.guard, inner.rest)
                if inner.variables == ("x",):  # inner quantifier shadows x
                    requirement = swap_xy(requirement)
                self.witness_needs.append(_WitnessNeed(guard, requirement))
                return True
            return False
        if isinstance(rest, Not) and isinstance(rest.sub, Exists):
            inner = analyze_block(rest.sub)
            if inner is not None and len(inner.variables) == 1 and _quantifier_free(
                inner.rest
            ):
                forbidden = And(inner.guard, inner.rest)
                if inner.variables == ("x",):  # inner quantifier shadows x
                    forbidden = swap_xy(forbidden)
                self.pair_constraints.append(Implies(guard, Not(forbidden)))
                return True
        return False

    # -- memoized tables ---------------------------------------------------

    def element_ok(self, alpha: OneType) -> bool:
        cached = self._element_cache.get(alpha.bits)
        if cached is None:
            ctx = self.context
            cached = (
                ctx.is_special_one(alpha)
                and all(ctx.eval_one(f, alpha) for f in self.element_constraints)
                and all(ctx.eval_one(f, alpha) for f in self.pair_constraints)
            )
            self._element_cache[alpha.bits] = cached
        return cached

    def allowed_cross(self, alpha: OneType, alpha_prime: OneType) -> Tuple[int, ...]:
        key = (alpha.bits, alpha_prime.bits)
        cached = self._allowed_cache.get(key)
        if cached is None:
            ctx = self.context
            out = []
            for beta in ctx.all_two_types(alpha, alpha_prime):
                if not ctx.is_special_two(beta):
                    continue
                flipped = ctx.transpose(beta)
                if all(
                    ctx.eval_two(f, beta) and ctx.eval_two(f, flipped)
                    for f in self.pair_constraints
                ):
                    out.append(beta.cross)
            if self.covered:
                out = self._collapse(alpha, alpha_prime, out)
            cached = tuple(out)
            self._allowed_cache[key] = cached
        return cached

    def _collapse(
        self, alpha: OneType, alpha_prime: OneType, crosses: List[int]
    ) -> List[int]:
        """Drop crosses that differ only in bits no sentence can observe.

        Sound only when every sentence compiled: then a candidate structure
        satisfies the problem iff its 1-types and the per-pair observations
        below do, so one representative per observation class suffices.
        """
        ctx = self.context
        seen = set()
        kept = []
        for cross in crosses:
            beta = TwoType(alpha, alpha_prime, cross)
            flipped = ctx.transpose(beta)
            special = 0
            for col in self.special_columns:
                special |= cross & (0b11 << (2 * col))
            obs = (
                special,
                tuple(
                    ctx.eval_two(n.requirement, b)
                    for n in self.witness_needs
                    for b in (beta, flipped)
                ),
                tuple(
                    ctx.eval_two(f, b)
                    for f in self.exists2_needs
                    for b in (beta, flipped)
                ),
            )
            if obs not in seen:
                seen.add(obs)
                kept.append(cross)
        return kept

    def self_witness(self, w: int, alpha: OneType) -> bool:
        key = (w, alpha.bits)
        cached = self._self_witness_cache.get(key)
        if cached is None:
            cached = self.context.eval_one(self.witness_needs[w].requirement, alpha)
            self._self_witness_cache[key] = cached
        return cached

    def possible_witness(self, w: int, alpha: OneType, alpha_prime: OneType) -> bool:
        """Whether some admissible pair 2-type lets alpha_prime witness alpha."""
        key = (w, alpha.bits, alpha_prime.bits)
        cached = self._possible_cache.get(key)
        if cached is None:
            requirement = self.witness_needs[w].requirement
            cached = any(
                self.context.eval_two(requirement, TwoType(alpha, alpha_prime, cross))
                for cross in self.allowed_cross(alpha, alpha_prime)
            )
            self._possible_cache[key] = cached
        return cached

    def possible_exists2(self, e: int, alpha: OneType, alpha_prime: OneType) -> bool:
        """Whether some admissible pair 2-type satisfies the e-th pair demand."""
        key = (e, alpha.bits, alpha_prime.bits)
        cached = self._possible_e2_cache.get(key)
        if cached is None:
            requirement = self.exists2_needs[e]
            cached = any(
                self.context.eval_two(requirement, TwoType(alpha, alpha_prime, cross))
                for cross in self.allowed_cross(alpha, alpha_prime)
            )
            self._possible_e2_cache[key] = cached
        return cached


class _Searcher:
    def __init__(self, p: Problem, compiled: _Compiled, deadline: Optional[float]):
        self.problem = p
        self.c = compiled
        self.ctx = compiled.context
        self.deadline = deadline
        self.special_cols = [
            self.ctx.binaries.index(name) for name in p.signature.special_names
        ]

    def _tick(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise OracleTimeout()

    def search_size(self, n: int) -> Optional[FiniteStructure]:
        admissible = [a for a in self.ctx.all_one_types() if self.c.element_ok(a)]
        for types in itertools.combinations_with_replacement(admissible, n):
            self._tick()
            if not self._exists_feasible(types):
                continue
            if not self._witnesses_feasible(types):
                continue
            found = self._search_pairs(types)
            if found is not None:
                return found
        return None

    def _exists_feasible(self, types) -> bool:
        n = len(types)
        for req in self.c.exists1_needs:
            if not any(self.ctx.eval_one(req, t) for t in types):
                return False
        for e, req in enumerate(self.c.exists2_needs):
            if any(self.ctx.eval_one(req, t) for t in types):
                continue
            if not any(
                self.c.possible_exists2(e, types[i], types[j])
                for i in range(n)
                for j in range(n)
                if i != j
            ):
                return False
        return True

    def _witnesses_feasible(self, types) -> bool:
        n = len(types)
        for w in range(len(self.c.witness_needs)):
            trigger = self.c.witness_needs[w].trigger
            for i in range(n):
                if not self.ctx.eval_one(trigger, types[i]):
                    continue
                if self.c.self_witness(w, types[i]):
                    continue
                if not any(
                    self.c.possible_witness(w, types[i], types[j])
                    for j in range(n)
                    if j != i
                ):
                    return False
        return True

    def _search_pairs(self, types) -> Optional[FiniteStructure]:
        n = len(types)
        pair_order = [(i, j) for j in range(n) for i in range(j)]
        crosses: Dict[Tuple[int, int], int] = {}
        # directed special edges, self-loops preset from the 1-types
        adj: List[set] = []
        for col in self.special_cols:
            name = self.ctx.binaries[col]
            adj.append({(a, a) for a in range(n) if self.ctx.self_loop(types[a], name)})
        needs = self.c.witness_needs
        satisfied = [
            [
                not self.ctx.eval_one(needs[w].trigger, types[i])
                or self.c.self_witness(w, types[i])
                for i in range(n)
            ]
            for w in range(len(needs))
        ]

        def transitive_with(s: int, i: int, j: int) -> bool:
            # all pairs within {0..j} x {0..j} involving only elements
            # <= j and assigned so far are in adj[s]; the triple {i, j, c}
            # becomes fully known exactly when c < i
            edges = adj[s]
            for c in range(i):
                trio = (
                    ((i, j), (j, c), (i, c)),
                    ((i, c), (c, j), (i, j)),
                    ((j, i), (i, c), (j, c)),
                    ((j, c), (c, i), (j, i)),
                    ((c, i), (i, j), (c, j)),
                    ((c, j), (j, i), (c, i)),
                )
                for first, second, closing in trio:
                    if first in edges and second in edges and closing not in edges:
                        return False
            return True

        def assign(k: int) -> Optional[FiniteStructure]:
            self._tick()
            if k == len(pair_order):
                return self._finish(types, crosses)
            i, j = pair_order[k]
            for cross in self.c.allowed_cross(types[i], types[j]):
                added = []
                for s, col in enumerate(self.special_cols):
                    if cross >> 2 * col & 1:
                        added.append((s, (i, j)))
                        adj[s].add((i, j))
                    if cross >> (2 * col + 1) & 1:
                        added.append((s, (j, i)))
                        adj[s].add((j, i))
                if all(transitive_with(s, i, j) for s in range(len(self.special_cols))):
                    crosses[(i, j)] = cross
                    newly = self._record_witnesses(satisfied, types, i, j, cross)
                    feasible = i != j - 1 or self._future_feasible(satisfied, types, j)
                    if feasible:
                        found = assign(k + 1)
                        if found is not None:
                            return found
                    for w, e in newly:
                        satisfied[w][e] = False
                    del crosses[(i, j)]
                for s, edge in added:
                    adj[s].discard(edge)
            return None

        return assign(0)

    def _record_witnesses(self, satisfied, types, i, j, cross):
        newly = []
        beta = TwoType(types[i], types[j], cross)
        flipped = self.ctx.transpose(beta)
        for w, need in enumerate(self.c.witness_needs):
            if not satisfied[w][i] and self.ctx.eval_two(need.requirement, beta):
                satisfied[w][i] = True
                newly.append((w, i))
            if not satisfied[w][j] and self.ctx.eval_two(need.requirement, flipped):
                satisfied[w][j] = True
                newly.append((w, j))
        return newly

    def _future_feasible(self, satisfied, types, j) -> bool:
        n = len(types)
        future = range(j + 1, n)
        for w in range(len(self.c.witness_needs)):
            for i in range(j + 1):
                if satisfied[w][i]:
                    continue
                if not any(
                    self.c.possible_witness(w, types[i], types[f]) for f in future
                ):
                    return False
        return True

    def _finish(self, types, crosses) -> Optional[FiniteStructure]:
        pairs = {
            (a, b): TwoType(types[a], types[b], cross)
            for (a, b), cross in crosses.items()
        }
        candidate = FiniteStructure(self.ctx, list(types), pairs)
        if candidate.satisfies_problem(self.problem):
            return candidate
        return None


def brute_force_find_model(
    p: Problem, max_size: int, time_limit: Optional[float] = None
) -> Optional[FiniteStructure]:
    """Search for a model of ``p`` of minimal size ≤ max_size.

    Complete within the bound: returns None only when no model of any size
    up to ``max_size`` exists.  Raises OracleTimeout when ``time_limit``
    seconds elapse first.
    """
    deadline = None if time_limit is None else time.monotonic() + time_limit
    compiled = _Compiled(p)
    searcher = _Searcher(p, compiled, deadline)
    for n in range(1, max_size + 1):
        found = searcher.search_size(n)
        if found is not None:
            return found
    return None
