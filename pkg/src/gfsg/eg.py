"""Finite satisfiability for sentences whose constrained symbols are
equivalences.

The decision pipeline has three phases.  A type-elimination fixpoint first
discards 1-types that can never be realized because some witness obligation
is unsatisfiable at the type level; an unsatisfiable existential conjunct at
this point already refutes the sentence.  A counting relaxation then looks
for a linear refutation: every finite model induces element counts per
1-type that satisfy the existential rows and a family of injection rows
(each element of a "solitary" trigger type consumes a witness companion in
its own class, and companions in disjoint classes are distinct), so an
infeasible relaxation proves unsatisfiability.  Finally a model search
enumerates small admissible class profiles per symbol, assembles candidate
profile tuples, solves their class-distribution system, and builds an
explicit model on a layered grid; the verdict is SAT only after the built
model passes the internal checker.

Sentences without equality admit an exact support-level decision:
``decide_eg_no_equality`` eliminates 1-types through an exhaustive search
for witness-closed class supports and builds a model directly from the
surviving supports.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from .atomic_types import OneType, TwoType, TypeContext
from .counting import (
    ClassOracle,
    ClassSearchBudget,
    ClassWitness,
    CountingType,
    class_witness_errors,
    cut,
    extend_class,
    m_phi,
    sym_fe_conjuncts,
)
from .linear import (
    GEQ,
    GammaSystem,
    Solution,
    bounded_solution,
    build_gamma,
    dump,
    make_system,
    solve_rational,
)
from .normal_form import ConjKind, NFConjunct, NFSentence, Orientation, group
from .structures import FiniteStructure, StructureBuilder, Verdict, check_special, model_check
from .syntax import SpecialKind


@dataclass(frozen=True)
class SearchBudgets:
    """Resource limits for the model search.

    ``type_size`` bounds the total count of enumerated class profiles,
    ``support_width`` their support size.  ``gamma_solves`` bounds the number
    of profile tuples whose distribution system is solved, ``raw_tuples`` the
    number of tuples inspected at all.  ``max_domain`` bounds the size of any
    built model; ``class_nodes`` and ``support_nodes`` bound the class and
    support searches.
    """

    type_size: int = 4
    support_width: int = 3
    types_per_symbol: int = 256
    tuple_width: int = 2
    raw_tuples: int = 200_000
    gamma_solves: int = 800
    lifts_per_symbol: int = 8
    class_nodes: int = 200_000
    support_nodes: int = 50_000
    max_domain: int = 2000
    clique_limit: int = 64
    # limits for the one-way-edge machinery of the preorder deciders
    enrich_width: int = 8
    enrich_sets: int = 3
    abstract_nodes: int = 60_000
    concrete_states: int = 4000


DEFAULT_BUDGETS = SearchBudgets()


@dataclass
class EGCertificate:
    """What the decision rests on: a refutation system or a solved one."""

    kind: str  # "elimination" | "refutation" | "distribution" | "support"
    lp_text: str = ""
    members: Optional[Dict[str, Tuple[CountingType, ...]]] = None
    solution: Optional[Dict[str, int]] = None


def cross_pair_candidates(
    ctx: TypeContext, alpha: OneType, alpha_prime: OneType
) -> Tuple[TwoType, ...]:
    """Admissible 2-types between class-disjoint elements, canonical order.

    Every constrained symbol is absent in both directions; the plain binary
    symbols range over all choices.
    """
    plain = ctx.signature.binary
    out: List[TwoType] = []
    for mask in range(1 << (2 * len(plain))):
        atoms: List[Tuple[str, bool]] = []
        for j, name in enumerate(plain):
            if mask >> (2 * j) & 1:
                atoms.append((name, True))
            if mask >> (2 * j + 1) & 1:
                atoms.append((name, False))
        beta = ctx.make_two_type(alpha, alpha_prime, atoms)
        if ctx.is_univ_admissible_2(beta):
            out.append(beta)
    return tuple(out)


class _Search:
    """Shared state for one decision run."""

    def __init__(self, nf: NFSentence, budgets: SearchBudgets) -> None:
        self.nf = nf
        self.budgets = budgets
        self.oracle = ClassOracle(nf, budget=budgets.class_nodes)
        self.ctx = self.oracle.context
        self.grouping = self.oracle.grouping
        self.symbols = nf.signature.special_names
        self.exists = [c for c in nf.conjuncts if c.kind is ConjKind.EXISTS]
        self.plain_fe = [c for c in nf.conjuncts if c.kind is ConjKind.FORALL_EXISTS]
        self.sym_fe: Dict[str, List[NFConjunct]] = {
            s: list(sym_fe_conjuncts(self.grouping, s)) for s in self.symbols
        }
        for c in nf.conjuncts:
            if c.kind is ConjKind.FORALL_EXISTS_SPECIAL and c.orientation is not Orientation.SYM:
                raise ValueError("one-sided constrained witness conjunct in equivalence decision")
        self._cross: Dict[Tuple[OneType, OneType], Tuple[TwoType, ...]] = {}

    # -- type-level witness tests -------------------------------------------

    def cross_candidates(self, a: OneType, b: OneType) -> Tuple[TwoType, ...]:
        key = (a, b)
        if key not in self._cross:
            self._cross[key] = cross_pair_candidates(self.ctx, a, b)
        return self._cross[key]

    def self_witnesses(self, conj: NFConjunct, alpha: OneType) -> bool:
        """Whether an element of this type can be its own witness."""
        return self.ctx.eval_one(conj.guard_formula(), alpha) and self.ctx.eval_one(
            conj.matrix, alpha
        )

    def plain_witness_beta(
        self, conj: NFConjunct, a: OneType, b: OneType
    ) -> Optional[TwoType]:
        """A class-disjoint 2-type making ``b`` a witness for ``a``."""
        for beta in self.cross_candidates(a, b):
            if self.ctx.eval_two(conj.guard_formula(), beta) and self.ctx.eval_two(
                conj.matrix, beta
            ):
                return beta
        return None

    def sym_witness_ok(self, symbol: str, conj: NFConjunct, a: OneType, b: OneType) -> bool:
        """Whether some within-class 2-type makes ``b`` a witness for ``a``."""
        return any(
            self.ctx.eval_two(conj.matrix, beta)
            for beta in self.oracle.class_pairs(symbol, a, b)
        )

    def exists_support(self, conj: NFConjunct, alive: Sequence[OneType]) -> List[OneType]:
        return [
            a
            for a in alive
            if self.ctx.eval_one(conj.guard_formula(), a) and self.ctx.eval_one(conj.matrix, a)
        ]

    # -- phase 0: type elimination ------------------------------------------

    def type_supported(self, alpha: OneType, alive: Sequence[OneType]) -> bool:
        for conj in self.plain_fe:
            if not self.ctx.eval_one(conj.trigger, alpha):
                continue
            if self.self_witnesses(conj, alpha):
                continue
            if not any(self.plain_witness_beta(conj, alpha, b) for b in alive):
                return False
        for symbol in self.symbols:
            for conj in self.sym_fe[symbol]:
                if not self.ctx.eval_one(conj.trigger, alpha):
                    continue
                if self.self_witnesses(conj, alpha):
                    continue
                if not any(self.sym_witness_ok(symbol, conj, alpha, b) for b in alive):
                    return False
        return True

    def eliminate(self) -> Tuple[OneType, ...]:
        """The 1-types that survive the witness-elimination fixpoint.

        A realized type always survives: its witnesses in a model are
        realized, and stripping the constrained bits from a witnessing
        2-type leaves an admissible class-disjoint candidate, while a
        within-class witness stays a within-class candidate.
        """
        alive = [a for a in self.ctx.all_one_types() if self.ctx.is_univ_admissible_1(a)]
        while True:
            kept = [a for a in alive if self.type_supported(a, alive)]
            if len(kept) == len(alive):
                return tuple(kept)
            alive = kept

    # -- phase 1: counting refutation ----------------------------------------

    def refutation_system(self, alive: Sequence[OneType]):
        """A linear system every finite model's 1-type counts satisfy."""
        order = {a: i for i, a in enumerate(alive)}
        variables = [f"n{i}" for i in range(len(alive))]
        legend = [(f"n{i}", self.ctx.format_one(a)) for i, a in enumerate(alive)]
        rows: List[tuple] = []
        for j, conj in enumerate(self.exists):
            support = self.exists_support(conj, alive)
            rows.append(
                ({f"n{order[a]}": 1 for a in support}, GEQ, 1, f"exists{j}")
            )
        for symbol in self.symbols:
            for d, conj in enumerate(self.sym_fe[symbol]):
                rows.extend(self._injection_rows(symbol, d, conj, alive, order))
        return make_system(variables, rows, positivity=False, legend=legend)

    def _injection_rows(
        self,
        symbol: str,
        d: int,
        conj: NFConjunct,
        alive: Sequence[OneType],
        order: Mapping[OneType, int],
    ) -> List[tuple]:
        """Injection rows for one within-class witness conjunct.

        A trigger type is solitary when no class can hold two elements of it;
        a set of pairwise-incompatible solitary trigger types puts at most
        one trigger element into any class, and each such element needs a
        companion of a witness type in its class.  Companions of triggers in
        different classes are distinct and never of a trigger type, so the
        witness-type counts dominate the trigger-type counts.
        """
        triggers = [
            a
            for a in alive
            if self.ctx.self_loop(a, symbol)
            and self.ctx.eval_one(conj.trigger, a)
            and not self.self_witnesses(conj, a)
        ]
        solitary = [a for a in triggers if not self.oracle.class_pairs(symbol, a, a)]
        if not solitary:
            return []
        incompatible = {
            a: {
                b
                for b in solitary
                if b != a and not self.oracle.class_pairs(symbol, a, b)
            }
            for a in solitary
        }
        rows: List[tuple] = []
        for group_idx, chosen in enumerate(
            _maximal_cliques(solitary, incompatible, self.budgets.clique_limit)
        ):
            witnesses: Set[OneType] = set()
            for a in chosen:
                for b in alive:
                    if self.sym_witness_ok(symbol, conj, a, b):
                        witnesses.add(b)
            witnesses -= set(chosen)
            coeffs: Dict[str, int] = {f"n{order[b]}": 1 for b in sorted(witnesses)}
            for a in chosen:
                coeffs[f"n{order[a]}"] = coeffs.get(f"n{order[a]}", 0) - 1
            rows.append((coeffs, GEQ, 0, f"injection[{symbol},{d},{group_idx}]"))
        return rows

    # -- phase 2: class profiles and tuples -----------------------------------

    def enumerate_profiles(self, symbol: str, alive: Sequence[OneType]) -> List[CountingType]:
        looped = [a for a in alive if self.ctx.self_loop(a, symbol)]
        out: List[CountingType] = []
        b = self.budgets
        for total in range(1, b.type_size + 1):
            for width in range(1, min(total, b.support_width) + 1):
                for support in itertools.combinations(looped, width):
                    for counts in _compositions(total, width):
                        theta = CountingType.of(dict(zip(support, counts)))
                        if self.oracle.admissible(theta, symbol):
                            out.append(theta)
                            if len(out) >= b.types_per_symbol:
                                return out
        return out

    def lifted_profiles(
        self, symbol: str, base: Sequence[CountingType], m_eff: int
    ) -> List[CountingType]:
        """Full-count variants of small admissible profiles.

        Raising a subset of counts to 2 and checking admissibility justifies
        raising them all the way: a class grows one duplicate at a time by
        copying the rows of an element of the same type.
        """
        if m_eff <= self.budgets.type_size:
            return []
        out: List[CountingType] = []
        seen: Set[CountingType] = set()
        for theta in base:
            support = theta.support
            if len(support) > self.budgets.support_width:
                continue
            for r in range(1, len(support) + 1):
                for lifted in itertools.combinations(support, r):
                    probe = CountingType.of(
                        {
                            a: max(2, theta.count(a)) if a in lifted else theta.count(a)
                            for a in support
                        }
                    )
                    if not self.oracle.admissible(probe, symbol):
                        continue
                    full = CountingType.of(
                        {
                            a: m_eff if a in lifted else theta.count(a)
                            for a in support
                        },
                        cap=m_eff,
                    )
                    if full not in seen:
                        seen.add(full)
                        out.append(full)
                        if len(out) >= self.budgets.lifts_per_symbol:
                            return out
        return out

    def tuple_closed(self, types: Sequence[OneType]) -> bool:
        """Existential support and class-disjoint witnesses inside the tuple."""
        pool = list(types)
        for conj in self.exists:
            if not self.exists_support(conj, pool):
                return False
        for alpha in pool:
            for conj in self.plain_fe:
                if not self.ctx.eval_one(conj.trigger, alpha):
                    continue
                if self.self_witnesses(conj, alpha):
                    continue
                if not any(self.plain_witness_beta(conj, alpha, b) for b in pool):
                    return False
        return True

    def plain_witness_choice(
        self, types: Sequence[OneType]
    ) -> Dict[Tuple[OneType, int], Tuple[OneType, TwoType]]:
        """The least class-disjoint witness per (type, conjunct) obligation."""
        choice: Dict[Tuple[OneType, int], Tuple[OneType, TwoType]] = {}
        for alpha in types:
            for d, conj in enumerate(self.plain_fe):
                if not self.ctx.eval_one(conj.trigger, alpha):
                    continue
                if self.self_witnesses(conj, alpha):
                    continue
                for b in sorted(types):
                    beta = self.plain_witness_beta(conj, alpha, b)
                    if beta is not None:
                        choice[(alpha, d)] = (b, beta)
                        break
                else:
                    raise AssertionError("witness obligation unsatisfied in a closed tuple")
        return choice


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """Positive integer tuples of fixed length and sum, lexicographic."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _maximal_cliques(
    vertices: Sequence[OneType],
    adjacent: Mapping[OneType, Set[OneType]],
    limit: int,
) -> List[Tuple[OneType, ...]]:
    """Maximal cliques of a small graph, deterministically, at most ``limit``."""
    ordered = sorted(vertices)
    out: List[Tuple[OneType, ...]] = []

    def expand(chosen: List[OneType], candidates: List[OneType], excluded: List[OneType]) -> None:
        if len(out) >= limit:
            return
        if not candidates and not excluded:
            out.append(tuple(chosen))
            return
        for i, v in enumerate(candidates):
            if len(out) >= limit:
                return
            expand(
                chosen + [v],
                [u for u in candidates[i + 1 :] if u in adjacent[v]],
                [u for u in excluded if u in adjacent[v]],
            )
            excluded = excluded + [v]

    expand([], ordered, [])
    return out


# -- model assembly ----------------------------------------------------------


@dataclass
class _Part:
    """One class of one symbol's partition of the base domain."""

    indices: List[int]
    target: Dict[OneType, int]
    witness: Optional[ClassWitness] = None
    image: Optional[Dict[int, int]] = None


def _realize_part(
    search: _Search,
    symbol: str,
    member: CountingType,
    part: _Part,
    base_types: Sequence[OneType],
    require_two: bool,
) -> None:
    """Attach a verified witness structure and element mapping to a part."""
    witness = search.oracle.witness(member, symbol)
    if witness is None:
        raise AssertionError("member profile lost its witness")
    for alpha in sorted(part.target):
        have = witness.theta.count(alpha)
        for _ in range(part.target[alpha] - have):
            witness = extend_class(search.ctx, witness, alpha, require_two=require_two)
    errors = class_witness_errors(search.ctx, search.grouping, witness)
    if errors:
        raise AssertionError("padded class failed verification: " + errors[0])
    by_type: Dict[OneType, List[int]] = {}
    for i in range(witness.structure.size):
        by_type.setdefault(witness.structure.one_types[i], []).append(i)
    image: Dict[int, int] = {}
    taken: Dict[OneType, int] = {}
    for b in sorted(part.indices, key=lambda b: (base_types[b], b)):
        alpha = base_types[b]
        image[b] = by_type[alpha][taken.get(alpha, 0)]
        taken[alpha] = taken.get(alpha, 0) + 1
    part.witness = witness
    part.image = image


def _assemble_grid(
    search: _Search,
    base_types: Sequence[OneType],
    partitions: Mapping[str, List[_Part]],
    witness_choice: Mapping[Tuple[OneType, int], Tuple[OneType, TwoType]],
) -> Optional[FiniteStructure]:
    """Build the layered-grid model, or None when it would be oversized.

    The base domain is laid out along every symbol's axis of a k-dimensional
    grid; the 1-type at a grid point depends only on the coordinate sum, so
    every axis-parallel line visits each base element exactly once and can
    carry that symbol's class partition.  The grid is replicated into three
    banks of one layer per class-disjoint witness conjunct, and witness edges
    go from bank j to bank j+1, so no pair is assigned twice.
    """
    ctx = search.ctx
    symbols = list(partitions.keys())
    l = len(base_types)
    k = len(symbols)
    h = len(search.plain_fe)
    copies = 3 * h if h else 1
    total = copies * l**k
    if total > search.budgets.max_domain:
        return None

    def point(copy: int, coords: Sequence[int]) -> int:
        index = copy
        for x in coords:
            index = index * l + x
        return index

    builder = StructureBuilder(ctx, total)
    for copy in range(copies):
        for coords in itertools.product(range(l), repeat=k):
            builder.assign_one(point(copy, coords), base_types[sum(coords) % l])

    for i, symbol in enumerate(symbols):
        for copy in range(copies):
            for others in itertools.product(range(l), repeat=k - 1):
                offset = sum(others)
                for part in partitions[symbol]:
                    for b1, b2 in itertools.combinations(sorted(part.indices), 2):
                        coords1 = others[:i] + ((b1 - offset) % l,) + others[i:]
                        coords2 = others[:i] + ((b2 - offset) % l,) + others[i:]
                        beta = part.witness.structure.two_type_of(
                            part.image[b1], part.image[b2]
                        )
                        builder.assign_pair(
                            point(copy, coords1), point(copy, coords2), beta
                        )

    if h:
        first_of_type: Dict[OneType, int] = {}
        for b, alpha in enumerate(base_types):
            first_of_type.setdefault(alpha, b)
        for copy in range(copies):
            bank, slot = divmod(copy, h)
            for coords in itertools.product(range(l), repeat=k):
                alpha = base_types[sum(coords) % l]
                for d in range(h):
                    if (alpha, d) not in witness_choice:
                        continue
                    target_type, beta = witness_choice[(alpha, d)]
                    target_copy = ((bank + 1) % 3) * h + d
                    target_coords = (first_of_type[target_type],) + (0,) * (k - 1)
                    builder.assign_pair(
                        point(copy, coords),
                        point(target_copy, target_coords),
                        beta,
                    )

    builder.fill_missing_binary_free()
    return builder.build()


def _verified(search: _Search, structure: FiniteStructure) -> FiniteStructure:
    problems = model_check(structure, search.nf) + check_special(structure)
    if problems:
        raise AssertionError("built model failed verification: " + problems[0])
    return structure


def _build_from_solution(
    search: _Search,
    gamma: GammaSystem,
    solution: Solution,
    m_eff: int,
) -> Optional[FiniteStructure]:
    """An explicit model from a solved class-distribution system."""
    values = solution.values
    types = list(gamma.types)
    n_alpha = {
        a: max(gamma.y_value(values, s, a) for s in gamma.symbols) for a in types
    }
    base_types: List[OneType] = []
    pool: Dict[OneType, List[int]] = {}
    for a in sorted(types):
        start = len(base_types)
        base_types.extend([a] * n_alpha[a])
        pool[a] = list(range(start, start + n_alpha[a]))

    l = len(base_types)
    k = len(gamma.symbols)
    h = len(search.plain_fe)
    copies = 3 * h if h else 1
    if copies * l**k > search.budgets.max_domain:
        return None

    partitions: Dict[str, List[_Part]] = {}
    for symbol in gamma.symbols:
        parts: List[_Part] = []
        owners: List[CountingType] = []
        cursor = {a: 0 for a in types}
        for idx, theta in enumerate(gamma.members[symbol]):
            for _ in range(gamma.x_value(values, symbol, idx)):
                indices: List[int] = []
                for a in sorted(theta.support):
                    take = theta.count(a)
                    indices.extend(pool[a][cursor[a] : cursor[a] + take])
                    cursor[a] += take
                parts.append(_Part(indices, dict(theta.items)))
                owners.append(theta)
        for a in sorted(types):
            while cursor[a] < n_alpha[a]:
                home = next(
                    j
                    for j, theta in enumerate(owners)
                    if theta.count(a) >= m_eff
                )
                parts[home].indices.append(pool[a][cursor[a]])
                parts[home].target[a] = parts[home].target.get(a, 0) + 1
                cursor[a] += 1
        for part, theta in zip(parts, owners):
            _realize_part(search, symbol, theta, part, base_types, require_two=True)
        partitions[symbol] = parts

    choice = search.plain_witness_choice(sorted(set(base_types)))
    structure = _assemble_grid(search, base_types, partitions, choice)
    if structure is None:
        return None
    return _verified(search, structure)


# -- the equality decision ----------------------------------------------------


def decide_eg(
    nf: NFSentence,
    cap: Optional[int] = None,
    budgets: SearchBudgets = DEFAULT_BUDGETS,
) -> Verdict:
    """Decide finite satisfiability when every constrained symbol is an
    equivalence.  SAT verdicts carry a checked model; UNSAT verdicts carry
    the refuting counting system."""
    for name in nf.signature.special_names:
        if nf.signature.kind_of(name) is not SpecialKind.EQUIV:
            raise ValueError("decide_eg expects only equivalence symbols")
    if not nf.signature.special_names:
        raise ValueError("decide_eg expects at least one constrained symbol")

    search = _Search(nf, budgets)
    alive = search.eliminate()
    if not alive:
        return Verdict.unsat("no one-type survives witness elimination")
    for j, conj in enumerate(search.exists):
        if not search.exists_support(conj, alive):
            return Verdict(
                "unsat",
                reason=f"existential conjunct {j} has no surviving one-type",
                certificate=EGCertificate(kind="elimination"),
            )

    system = search.refutation_system(alive)
    if solve_rational(system) is None:
        return Verdict(
            "unsat",
            reason="counting relaxation is infeasible",
            certificate=EGCertificate(kind="refutation", lp_text=dump(system)),
        )

    m_full = m_phi(nf).value
    m_eff = min(cap, m_full) if cap is not None else m_full

    profiles: Dict[str, List[CountingType]] = {}
    for symbol in search.symbols:
        base = search.enumerate_profiles(symbol, alive)
        profiles[symbol] = base + search.lifted_profiles(symbol, base, m_eff)
    oversize = False
    solved = 0
    inspected = 0
    for members in _tuples(profiles, search.symbols, budgets):
        inspected += 1
        if inspected > budgets.raw_tuples or solved >= budgets.gamma_solves:
            break
        supports = [
            set().union(*(set(t.support) for t in members[s])) for s in search.symbols
        ]
        if any(s != supports[0] for s in supports[1:]):
            continue
        pool = sorted(supports[0])
        if not search.tuple_closed(pool):
            continue
        solved += 1
        first = search.symbols[0]
        gamma = build_gamma(
            {s: members[s] for s in search.symbols},
            m_eff,
            distinguished=(first, members[first][0]),
            positivity=True,
            ctx=search.ctx,
        )
        solution = bounded_solution(gamma.system)
        if solution is None:
            continue
        built = _build_from_solution(search, gamma, solution, m_eff)
        if built is None:
            oversize = True
            continue
        certificate = EGCertificate(
            kind="distribution",
            lp_text=dump(gamma.system),
            members={s: tuple(members[s]) for s in search.symbols},
            solution=dict(solution.values),
        )
        return Verdict.sat(built, certificate)

    if oversize:
        return Verdict.unknown("oversize")
    if m_eff < m_full:
        return Verdict.unknown("cap-reduced")
    return Verdict.unknown("budget")


def _tuples(
    profiles: Mapping[str, List[CountingType]],
    symbols: Sequence[str],
    budgets: SearchBudgets,
) -> Iterator[Dict[str, Tuple[CountingType, ...]]]:
    """Candidate profile tuples, narrow and small first."""
    widths = []
    for shape in itertools.product(
        range(1, budgets.tuple_width + 1), repeat=len(symbols)
    ):
        widths.append(shape)
    widths.sort(key=lambda shape: (sum(shape), shape))
    for shape in widths:
        pools = [
            list(itertools.combinations(profiles[s], w))
            for s, w in zip(symbols, shape)
        ]
        if any(not p for p in pools):
            continue
        for combo in itertools.product(*pools):
            yield {s: combo[i] for i, s in enumerate(symbols)}


# -- the equality-free decision ------------------------------------------------


def _support_closure(
    search: _Search,
    symbol: str,
    alpha: OneType,
    alive: Sequence[OneType],
) -> Tuple[str, Optional[Tuple[OneType, ...]]]:
    """A witness-closed, pairwise-compatible class support containing alpha.

    Returns ("yes", support), ("no", None) when provably none exists within
    the alive types, or ("budget", None).
    """
    fe = search.sym_fe[symbol]
    if not search.ctx.self_loop(alpha, symbol):
        return ("no", None)
    alive_sorted = sorted(a for a in alive if search.ctx.self_loop(a, symbol))
    nodes = 0
    failed: Set[frozenset] = set()

    def obligations(sigma: frozenset) -> List[Tuple[OneType, int]]:
        out = []
        for gamma in sorted(sigma):
            for d, conj in enumerate(fe):
                if not search.ctx.eval_one(conj.trigger, gamma):
                    continue
                if search.self_witnesses(conj, gamma):
                    continue
                if any(search.sym_witness_ok(symbol, conj, gamma, b) for b in sorted(sigma)):
                    continue
                out.append((gamma, d))
        return out

    def extend(sigma: frozenset) -> Optional[frozenset]:
        nonlocal nodes
        if sigma in failed:
            return None
        todo = obligations(sigma)
        if not todo:
            return sigma
        gamma, d = todo[0]
        for cand in alive_sorted:
            if cand in sigma:
                continue
            nodes += 1
            if nodes > search.budgets.support_nodes:
                raise ClassSearchBudget("support search budget exhausted", nodes)
            if not search.sym_witness_ok(symbol, fe[d], gamma, cand):
                continue
            if not all(search.oracle.class_pairs(symbol, g, cand) for g in sorted(sigma)):
                continue
            result = extend(sigma | {cand})
            if result is not None:
                return result
        failed.add(sigma)
        return None

    try:
        found = extend(frozenset([alpha]))
    except ClassSearchBudget:
        return ("budget", None)
    if found is None:
        return ("no", None)
    return ("yes", tuple(sorted(found)))


def matrix_equality_free(nf: NFSentence) -> bool:
    """Whether proper equality is absent from every matrix and trigger.

    Equality used purely as a guard only constrains the diagonal, which the
    1-type admissibility check already covers, and ``x = x`` is trivially
    true; the support-level decision needs the matrices free of equality
    between distinct variables.
    """
    from .syntax import Eq, subformulas

    for conj in nf.conjuncts:
        parts = [conj.matrix]
        if conj.trigger is not None:
            parts.append(conj.trigger)
        if conj.kind in (ConjKind.EXISTS, ConjKind.FORALL_EXISTS) and conj.guard is not None:
            parts.append(conj.guard)
        for part in parts:
            for sub in subformulas(part):
                if isinstance(sub, Eq) and sub.left != sub.right:
                    return False
    return True


def decide_eg_no_equality(
    nf: NFSentence,
    cap: Optional[int] = None,
    budgets: SearchBudgets = DEFAULT_BUDGETS,
) -> Verdict:
    """Decide finite satisfiability for equality-free sentences whose
    constrained symbols are equivalences.

    Without equality a class support can always be populated freely: classes
    never bound how often a 1-type occurs, so satisfiability reduces to the
    existence of witness-closed supports.  The fixpoint below is exact up to
    the search budgets; on the SAT side a model is built and checked.
    """
    if not matrix_equality_free(nf):
        raise ValueError("decide_eg_no_equality expects equality-free matrices")
    for name in nf.signature.special_names:
        if nf.signature.kind_of(name) is not SpecialKind.EQUIV:
            raise ValueError("decide_eg_no_equality expects only equivalence symbols")
    if not nf.signature.special_names:
        raise ValueError("decide_eg_no_equality expects at least one constrained symbol")

    search = _Search(nf, budgets)
    alive = list(search.eliminate())
    closures: Dict[Tuple[str, OneType], Tuple[OneType, ...]] = {}
    while True:
        closures = {}
        kept: List[OneType] = []
        for a in alive:
            verdicts = []
            for symbol in search.symbols:
                state, support = _support_closure(search, symbol, a, alive)
                if state == "yes":
                    closures[(symbol, a)] = support
                verdicts.append(state)
            if "no" in verdicts:
                continue
            kept.append(a)
        if len(kept) == len(alive):
            break
        alive = _replay_plain_elimination(search, kept)
    if not alive:
        return Verdict.unsat("no one-type survives witness elimination")
    for j, conj in enumerate(search.exists):
        if not search.exists_support(conj, alive):
            return Verdict(
                "unsat",
                reason=f"existential conjunct {j} has no surviving one-type",
                certificate=EGCertificate(kind="support"),
            )

    # satisfiable: realize the needed types
    seeds: List[OneType] = []
    for conj in search.exists:
        seeds.append(min(search.exists_support(conj, alive)))
    if not seeds:
        seeds.append(min(alive))
    realized: Set[OneType] = set()
    queue = sorted(set(seeds))
    while queue:
        alpha = queue.pop(0)
        if alpha in realized:
            continue
        realized.add(alpha)
        for symbol in search.symbols:
            if (symbol, alpha) not in closures:
                state, support = _support_closure(search, symbol, alpha, alive)
                if state != "yes":
                    return Verdict.unknown("budget")
                closures[(symbol, alpha)] = support
            for member in closures[(symbol, alpha)]:
                if member not in realized:
                    queue.append(member)
        for d, conj in enumerate(search.plain_fe):
            if not search.ctx.eval_one(conj.trigger, alpha):
                continue
            if search.self_witnesses(conj, alpha):
                continue
            partner = next(
                b for b in sorted(alive) if search.plain_witness_beta(conj, alpha, b)
            )
            if partner not in realized:
                queue.append(partner)
        queue.sort()

    types = sorted(realized)
    supports_by_symbol: Dict[str, List[Tuple[OneType, ...]]] = {}
    for symbol in search.symbols:
        unique = sorted({closures[(symbol, a)] for a in types})
        supports_by_symbol[symbol] = unique

    counts = {
        symbol: max(1, 3 * len(search.sym_fe[symbol])) for symbol in search.symbols
    }
    degree = {
        (symbol, a): sum(1 for sup in supports_by_symbol[symbol] if a in sup)
        for symbol in search.symbols
        for a in types
    }
    n_alpha = {
        a: max(counts[s] * degree[(s, a)] for s in search.symbols) for a in types
    }

    base_types: List[OneType] = []
    pool: Dict[OneType, List[int]] = {}
    for a in types:
        start = len(base_types)
        base_types.extend([a] * n_alpha[a])
        pool[a] = list(range(start, start + n_alpha[a]))

    try:
        partitions: Dict[str, List[_Part]] = {}
        for symbol in search.symbols:
            cursor = {a: 0 for a in types}
            parts: List[_Part] = []
            owners: List[CountingType] = []
            for sup in supports_by_symbol[symbol]:
                indices: List[int] = []
                target: Dict[OneType, int] = {}
                for a in sup:
                    take = counts[symbol]
                    indices.extend(pool[a][cursor[a] : cursor[a] + take])
                    cursor[a] += take
                    target[a] = take
                parts.append(_Part(indices, target))
                owners.append(CountingType.of(target))
            for a in types:
                while cursor[a] < n_alpha[a]:
                    home = next(
                        j for j, sup in enumerate(supports_by_symbol[symbol]) if a in sup
                    )
                    parts[home].indices.append(pool[a][cursor[a]])
                    parts[home].target[a] = parts[home].target.get(a, 0) + 1
                    cursor[a] += 1
            for part, theta in zip(parts, owners):
                _realize_part(search, symbol, theta, part, base_types, require_two=False)
            partitions[symbol] = parts
        choice = search.plain_witness_choice(types)
        structure = _assemble_grid(search, base_types, partitions, choice)
    except ClassSearchBudget:
        return Verdict.unknown("budget")
    if structure is None:
        return Verdict.unknown("oversize")
    model = _verified(search, structure)
    certificate = EGCertificate(
        kind="support",
        members={
            s: tuple(CountingType.of({a: counts[s] for a in sup}) for sup in supports_by_symbol[s])
            for s in search.symbols
        },
    )
    return Verdict.sat(model, certificate)


def _replay_plain_elimination(search: _Search, alive: List[OneType]) -> List[OneType]:
    """Re-run the witness-elimination fixpoint inside a reduced alive set."""
    current = alive
    while True:
        kept = [a for a in current if search.type_supported(a, current)]
        if len(kept) == len(current):
            return kept
        current = kept
