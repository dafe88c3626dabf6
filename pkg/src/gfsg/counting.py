"""Counting types of classes and their admissibility.

A *class* is a set of elements pairwise connected (in both directions) by one
constrained binary symbol: an equivalence class, or a mutual-connectivity
class of a preorder.  The multiset of atomic 1-types realized in a class is
its *counting type*.  This module decides whether a counting type can be
realized by a class that satisfies the universal conjuncts together with the
symmetric witness conjuncts of its symbol, produces an explicit witness class
when it can, and supports the surgery used by the model builders: extending a
class by one element, cutting counts down, and the directional pair types and
enriched counting types used for preorder symbols.

All searches are deterministic: 1-types are ordered by their bit patterns,
candidate 2-types are tried in increasing numeric order, and the first
solution found is always the canonically least one explored.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

from .atomic_types import OneType, TwoType, TypeContext
from .normal_form import ConjKind, Grouping, NFConjunct, NFSentence, Orientation, group
from .structures import FiniteStructure, StructureBuilder, check_special, model_check
from .syntax import Formula, pretty


# ---------------------------------------------------------------------------
# counting types


@dataclass(frozen=True, order=True)
class CountingType:
    """A multiset of 1-types with positive counts, canonically ordered.

    ``cap`` records the ceiling the counts were clipped at, if any; a count
    equal to the cap means "at least this many".  Counting types are value
    objects: equality and ordering look at the counts and the cap.
    """

    items: Tuple[Tuple[OneType, int], ...]
    cap: Optional[int] = None

    def __post_init__(self) -> None:
        assert self.items, "counting types must have non-empty support"
        assert all(k >= 1 for _, k in self.items), "counts are positive"
        assert list(self.items) == sorted(self.items), "items are sorted"
        if self.cap is not None:
            assert all(k <= self.cap for _, k in self.items), "counts respect cap"

    @staticmethod
    def of(
        counts: Union[Mapping[OneType, int], Iterable[Tuple[OneType, int]]],
        cap: Optional[int] = None,
    ) -> "CountingType":
        if isinstance(counts, Mapping):
            pairs = counts.items()
        else:
            pairs = list(counts)
        merged: Dict[OneType, int] = {}
        for alpha, k in pairs:
            if k < 0:
                raise ValueError("negative count")
            merged[alpha] = merged.get(alpha, 0) + k
        if cap is not None:
            if cap < 1:
                raise ValueError("cap must be at least 1")
            merged = {a: min(k, cap) for a, k in merged.items()}
        items = tuple(sorted((a, k) for a, k in merged.items() if k > 0))
        if not items:
            raise ValueError("counting types must have non-empty support")
        return CountingType(items, cap)

    def count(self, alpha: OneType) -> int:
        for a, k in self.items:
            if a == alpha:
                return k
        return 0

    @property
    def support(self) -> Tuple[OneType, ...]:
        return tuple(a for a, _ in self.items)

    @property
    def total(self) -> int:
        return sum(k for _, k in self.items)

    def mapping(self) -> Dict[OneType, int]:
        return dict(self.items)

    def extends(self, smaller: "CountingType") -> bool:
        """Same support and pointwise at least ``smaller``."""
        if self.support != smaller.support:
            return False
        return all(self.count(a) >= k for a, k in smaller.items)

    def safely_extends(self, smaller: "CountingType") -> bool:
        """Extends ``smaller`` and keeps every count of one at one."""
        if not self.extends(smaller):
            return False
        return all(self.count(a) == 1 for a, k in smaller.items if k == 1)

    def bumped(self, alpha: OneType, by: int = 1) -> "CountingType":
        """The counting type with ``by`` more occurrences of ``alpha``.

        The result is exact (uncapped): bumping is used for explicit classes
        whose counts are realized literally.
        """
        counts = self.mapping()
        counts[alpha] = counts.get(alpha, 0) + by
        return CountingType.of(counts)

    def format(self, ctx: TypeContext) -> str:
        parts = [f"{k}*{ctx.format_one(a)}" for a, k in self.items]
        inner = ", ".join(parts)
        suffix = f" cap={self.cap}" if self.cap is not None else ""
        return "{" + inner + "}" + suffix


def cut(theta: CountingType, n: int) -> CountingType:
    """Clip every count at ``n``; the support never changes."""
    if n < 1:
        raise ValueError("cut level must be at least 1")
    new_cap = n if theta.cap is None else min(theta.cap, n)
    return CountingType.of({a: min(k, n) for a, k in theta.items}, cap=new_cap)


def counting_type_of(
    s: FiniteStructure,
    elements: Optional[Sequence[int]] = None,
    cap: Optional[int] = None,
) -> CountingType:
    """The (optionally capped) counting type of a set of elements."""
    if elements is None:
        elements = range(s.size)
    counts = Counter(s.one_type_of(a) for a in elements)
    if not counts:
        raise ValueError("counting types must have non-empty support")
    return CountingType.of(counts, cap=cap)


# ---------------------------------------------------------------------------
# size bounds


@dataclass(frozen=True)
class MBound:
    """The count ceiling used by the deciders, with its ingredients.

    ``value`` is 3 * (number of atomic 1-types) * (sentence size cubed).
    ``core_bound`` bounds the size of the witness-closed core of any class:
    a class keeping h realizations per 1-type, their witnesses, and their
    witnesses' witnesses has at most ``a_count * (h + h^2 + h^3)`` elements.
    """

    value: int
    a_count: int
    formula_size: int
    core_bound: int


def m_phi(nf: NFSentence) -> MBound:
    sig = nf.signature
    a_count = 1 << (len(sig.unary) + len(sig.binary) + len(sig.special))
    size = nf.size()
    h = max(nf.h_sym.values(), default=0)
    return MBound(
        value=3 * a_count * size**3,
        a_count=a_count,
        formula_size=size,
        core_bound=a_count * (h + h * h + h * h * h),
    )


def class_size_bound(ctx: TypeContext, grouping: Grouping, symbol: str) -> int:
    """A cut level that preserves class admissibility exactly.

    Cutting a counting type at this level (or higher) never changes whether
    it is admissible for ``symbol``: any witness class can be crunched to a
    witness-closed core at most this large per 1-type, and any class grows
    back by one-element extensions that keep counts of one at one.  The
    per-symbol witness count is padded to two so that cores never collapse a
    repeated 1-type to a single occurrence.
    """
    h = len(sym_fe_conjuncts(grouping, symbol))
    h = max(2, h)
    return max(2, ctx.one_count() * (h + h * h + h * h * h))


# ---------------------------------------------------------------------------
# class admissibility


class ClassSearchBudget(Exception):
    """Raised when the class search exceeds its node budget."""

    def __init__(self, message: str, nodes: int = 0) -> None:
        super().__init__(message)
        self.nodes = nodes


@dataclass(frozen=True)
class ClassWitness:
    """An explicit class realizing ``theta`` for ``symbol``.

    The structure's domain is one single class of the symbol: the symbol
    holds in both directions between all pairs and on every diagonal, other
    constrained symbols hold on no pair, and the universal and symmetric
    witness conjuncts of the symbol are satisfied.
    """

    structure: FiniteStructure
    theta: CountingType
    symbol: str


def sym_fe_conjuncts(grouping: Grouping, symbol: str) -> Tuple[NFConjunct, ...]:
    """The symmetric witness conjuncts of one symbol, in sentence order."""
    return tuple(
        c
        for c in grouping.phi_sym_S[symbol]
        if c.kind is ConjKind.FORALL_EXISTS_SPECIAL and c.symbol == symbol
    )


def directional_fe_conjuncts(
    grouping: Grouping, symbol: str, orientation: Orientation
) -> Tuple[NFConjunct, ...]:
    """The strict-edge witness conjuncts of one symbol and orientation."""
    return tuple(
        c
        for c in grouping.nonsym_fe
        if c.symbol == symbol and c.orientation is orientation
    )


def class_pair_candidates(
    ctx: TypeContext, symbol: str, alpha: OneType, alpha_prime: OneType
) -> Tuple[TwoType, ...]:
    """Admissible within-class 2-types between two 1-types, in canonical order.

    The symbol holds in both directions, every other constrained symbol in
    neither, and the unconstrained binary symbols range over all choices.
    Matrices of normal-form conjuncts never mention constrained symbols, so
    restricting other constrained symbols to be absent loses no witnesses.
    """
    plain = ctx.signature.binary
    out: List[TwoType] = []
    for mask in range(1 << (2 * len(plain))):
        atoms: List[Tuple[str, bool]] = [(symbol, True), (symbol, False)]
        for j, name in enumerate(plain):
            if mask >> (2 * j) & 1:
                atoms.append((name, True))
            if mask >> (2 * j + 1) & 1:
                atoms.append((name, False))
        beta = ctx.make_two_type(alpha, alpha_prime, atoms)
        if ctx.is_univ_admissible_2(beta):
            out.append(beta)
    return tuple(out)


def is_class_admissible(
    ctx: TypeContext,
    grouping: Grouping,
    theta: CountingType,
    symbol: str,
    budget: Optional[int] = None,
) -> Optional[ClassWitness]:
    """Search for a class realizing ``theta`` exactly.

    Returns a verified witness, or None when no class with these counts
    exists.  Counts are taken literally; use :func:`cut` first (see
    :func:`class_size_bound`) to decide large counting types.  Raises
    :class:`ClassSearchBudget` when more than ``budget`` candidate pair
    assignments are explored.
    """
    fe = sym_fe_conjuncts(grouping, symbol)
    support = sorted(theta.support)
    for alpha in support:
        if not ctx.is_univ_admissible_1(alpha):
            return None
        if not ctx.self_loop(alpha, symbol):
            return None

    elems: List[OneType] = []
    for alpha in support:
        elems.extend([alpha] * theta.count(alpha))
    n = len(elems)

    # Witness obligations that the element cannot discharge on itself.
    needs: List[Tuple[int, ...]] = []
    for alpha in elems:
        lacking = tuple(
            idx
            for idx, c in enumerate(fe)
            if ctx.eval_one(c.trigger, alpha) and not ctx.eval_one(c.matrix, alpha)
        )
        needs.append(lacking)

    cand: Dict[Tuple[OneType, OneType], Tuple[TwoType, ...]] = {}

    def candidates(a: OneType, b: OneType) -> Tuple[TwoType, ...]:
        key = (a, b)
        if key not in cand:
            cand[key] = class_pair_candidates(ctx, symbol, a, b)
        return cand[key]

    wit_ok: Dict[Tuple[int, OneType, OneType], bool] = {}

    def witness_possible(idx: int, a: OneType, b: OneType) -> bool:
        """Can an element of type ``a`` discharge conjunct ``idx`` on some
        partner of type ``b``?"""
        key = (idx, a, b)
        if key not in wit_ok:
            m = fe[idx].matrix
            wit_ok[key] = any(ctx.eval_two(m, beta) for beta in candidates(a, b))
        return wit_ok[key]

    # A partner type must exist at all before the expensive search starts.
    for i in range(n):
        for idx in needs[i]:
            if not any(
                witness_possible(idx, elems[i], elems[j])
                for j in range(n)
                if j != i
            ):
                return None

    pairs = [(i, j) for j in range(1, n) for i in range(j)]
    assigned: Dict[Tuple[int, int], TwoType] = {}
    covered: List[Set[int]] = [set() for _ in range(n)]
    nodes = 0

    def open_needs_coverable(j: int) -> bool:
        """After column ``j`` is fully assigned, every element up to ``j``
        must still be able to discharge its remaining obligations on
        partners from later columns."""
        for i in range(j + 1):
            for idx in needs[i]:
                if idx in covered[i]:
                    continue
                if not any(
                    witness_possible(idx, elems[i], elems[k])
                    for k in range(j + 1, n)
                ):
                    return False
        return True

    if not pairs:
        if any(needs[i] for i in range(n)):
            return None
    else:
        # Iterative depth-first assignment of the pairs in column order; at
        # every completed column the remaining obligations must still be
        # dischargeable on later columns (at the last column this forces
        # full coverage).
        total = len(pairs)
        cand_lists = [candidates(elems[i], elems[j]) for (i, j) in pairs]
        position = [0] * total
        undo: List[Tuple[List[int], List[int]]] = [([], [])] * total
        depth = 0
        while depth < total:
            i, j = pairs[depth]
            choices = cand_lists[depth]
            advanced = False
            while position[depth] < len(choices):
                beta = choices[position[depth]]
                position[depth] += 1
                nodes += 1
                if budget is not None and nodes > budget:
                    raise ClassSearchBudget(
                        f"class search for {theta.format(ctx)} and {symbol} "
                        f"exceeded {budget} nodes",
                        nodes,
                    )
                newly_i = [
                    idx
                    for idx in needs[i]
                    if idx not in covered[i] and ctx.eval_two(fe[idx].matrix, beta)
                ]
                tbeta = ctx.transpose(beta)
                newly_j = [
                    idx
                    for idx in needs[j]
                    if idx not in covered[j] and ctx.eval_two(fe[idx].matrix, tbeta)
                ]
                covered[i].update(newly_i)
                covered[j].update(newly_j)
                if i == j - 1 and not open_needs_coverable(j):
                    covered[i].difference_update(newly_i)
                    covered[j].difference_update(newly_j)
                    continue
                assigned[(i, j)] = beta
                undo[depth] = (newly_i, newly_j)
                advanced = True
                break
            if advanced:
                depth += 1
                if depth < total:
                    position[depth] = 0
                continue
            depth -= 1
            if depth < 0:
                return None
            pi, pj = pairs[depth]
            ni, nj = undo[depth]
            covered[pi].difference_update(ni)
            covered[pj].difference_update(nj)
            del assigned[(pi, pj)]

    builder = StructureBuilder(ctx, n)
    for i, alpha in enumerate(elems):
        builder.assign_one(i, alpha)
    for (i, j), beta in sorted(assigned.items()):
        builder.assign_pair(i, j, beta)
    witness = ClassWitness(builder.build(), CountingType.of(theta.mapping()), symbol)
    errors = class_witness_errors(ctx, grouping, witness)
    assert not errors, f"internal: found class fails verification: {errors}"
    return witness


def class_witness_errors(
    ctx: TypeContext, grouping: Grouping, witness: ClassWitness
) -> List[str]:
    """Independent verification of a class witness; empty means valid."""
    s = witness.structure
    errors: List[str] = []
    realized = counting_type_of(s)
    if realized.items != tuple(sorted(witness.theta.mapping().items())):
        errors.append(
            f"counts differ: realized {realized.format(ctx)}, "
            f"claimed {witness.theta.format(ctx)}"
        )
    for a in range(s.size):
        if not ctx.self_loop(s.one_type_of(a), witness.symbol):
            errors.append(f"element {a} lacks the {witness.symbol} self-loop")
    for a in range(s.size):
        for b in range(a + 1, s.size):
            beta = s.two_type_of(a, b)
            if not (
                ctx.cross_value(beta, witness.symbol, True)
                and ctx.cross_value(beta, witness.symbol, False)
            ):
                errors.append(f"pair ({a}, {b}) is not mutually {witness.symbol}")
            for other in ctx.signature.special_names:
                if other == witness.symbol:
                    continue
                if ctx.cross_value(beta, other, True) or ctx.cross_value(
                    beta, other, False
                ):
                    errors.append(f"pair ({a}, {b}) carries {other}")
    errors.extend(check_special(s))
    sentence = NFSentence(
        signature=ctx.signature,
        conjuncts=tuple(grouping.phi_sym_S[witness.symbol]),
        equality=True,
    )
    errors.extend(model_check(s, sentence))
    return errors


# ---------------------------------------------------------------------------
# class surgery


def extend_class(
    ctx: TypeContext,
    witness: ClassWitness,
    alpha: OneType,
    require_two: bool = False,
) -> ClassWitness:
    """Add one more element of an already-present 1-type to a class.

    The new element copies all 2-types of the least existing element of its
    type.  Without ``require_two`` the closing pair mirrors the type's
    self-loops on the class symbol and the plain binary symbols (other
    constrained symbols stay absent within a class); this keeps every
    conjunct free of proper equality satisfied, because the pair evaluates
    like the diagonal wherever its guard holds.  With ``require_two`` the
    closing pair copies the 2-type to another element of the same type
    (which must exist), which also preserves conjuncts that use equality.
    """
    s = witness.structure
    occurrences = [a for a in range(s.size) if s.one_type_of(a) == alpha]
    if not occurrences:
        raise ValueError("can only duplicate a 1-type already in the class")
    template = occurrences[0]
    if require_two and len(occurrences) < 2:
        raise ValueError("duplication preserving equality needs two occurrences")

    new = s.size
    builder = StructureBuilder(ctx, new + 1)
    for a in range(s.size):
        builder.assign_one(a, s.one_type_of(a))
    builder.assign_one(new, alpha)
    for a in range(s.size):
        for b in range(a + 1, s.size):
            builder.assign_pair(a, b, s.two_type_of(a, b))
    for b in range(s.size):
        if b != template:
            builder.assign_pair(new, b, s.two_type_of(template, b))
    if require_two:
        donor = occurrences[1]
        builder.assign_pair(template, new, s.two_type_of(template, donor))
    else:
        mirrored = (witness.symbol,) + ctx.signature.binary
        atoms = [
            (name, direction)
            for name in mirrored
            if ctx.self_loop(alpha, name)
            for direction in (True, False)
        ]
        builder.assign_pair(template, new, ctx.make_two_type(alpha, alpha, atoms))
    return ClassWitness(
        builder.build(), witness.theta.bumped(alpha), witness.symbol
    )


def cutting_admissible_check(
    ctx: TypeContext,
    grouping: Grouping,
    theta: CountingType,
    symbol: str,
    n: int,
    budget: Optional[int] = None,
) -> bool:
    """Check that cutting counts at ``n`` interacts soundly with admissibility.

    An admissible cut always extends back (for n >= 2), and at or above
    :func:`class_size_bound` the cut verdict must match exactly.
    """
    full = is_class_admissible(ctx, grouping, theta, symbol, budget) is not None
    reduced = (
        is_class_admissible(ctx, grouping, cut(theta, n), symbol, budget) is not None
    )
    if n >= 2 and reduced and not full:
        return False
    if n >= class_size_bound(ctx, grouping, symbol) and full != reduced:
        return False
    return True


# ---------------------------------------------------------------------------
# directional pair types and enriched counting types


def strict_pair_type(
    ctx: TypeContext,
    symbol: str,
    alpha: OneType,
    alpha_prime: OneType,
    down: bool = True,
    matrix: Optional[Formula] = None,
) -> Optional[TwoType]:
    """The least admissible 2-type with a strict one-way edge of ``symbol``.

    ``down`` means the edge runs from x to y (and not back); otherwise from
    y to x.  Other constrained symbols hold in neither direction and the
    unconstrained binaries range over all choices.  When ``matrix`` is given
    the 2-type must also satisfy it (x first, y second).
    """
    plain = ctx.signature.binary
    base = [(symbol, True)] if down else [(symbol, False)]
    for mask in range(1 << (2 * len(plain))):
        atoms = list(base)
        for j, name in enumerate(plain):
            if mask >> (2 * j) & 1:
                atoms.append((name, True))
            if mask >> (2 * j + 1) & 1:
                atoms.append((name, False))
        beta = ctx.make_two_type(alpha, alpha_prime, atoms)
        if matrix is not None and not ctx.eval_two(matrix, beta):
            continue
        if ctx.is_univ_admissible_2(beta):
            return beta
    return None


@dataclass(frozen=True, order=True)
class EnrichedCountingType:
    """A counting type plus the 1-types seen strictly above and below.

    For a preorder symbol, ``above`` collects the 1-types of elements with a
    strict edge into the class, and ``below`` those the class has a strict
    edge to.  Both are sorted tuples so enriched types order and hash
    deterministically.
    """

    theta: CountingType
    above: Tuple[OneType, ...]
    below: Tuple[OneType, ...]

    @staticmethod
    def of(
        theta: CountingType,
        above: Iterable[OneType],
        below: Iterable[OneType],
    ) -> "EnrichedCountingType":
        return EnrichedCountingType(
            theta, tuple(sorted(set(above))), tuple(sorted(set(below)))
        )

    @property
    def above_set(self) -> frozenset:
        return frozenset(self.above)

    @property
    def below_set(self) -> frozenset:
        return frozenset(self.below)


def enriched_type_of(
    s: FiniteStructure,
    symbol: str,
    clique: Sequence[int],
    cap: Optional[int] = None,
) -> EnrichedCountingType:
    """The enriched counting type of one mutual-connectivity class."""
    ctx = s.context
    theta = counting_type_of(s, clique, cap)
    inside = set(clique)
    above: Set[OneType] = set()
    below: Set[OneType] = set()
    for a in clique:
        for b in range(s.size):
            if b in inside:
                continue
            beta = s.two_type_of(a, b)
            fwd = ctx.cross_value(beta, symbol, True)
            bwd = ctx.cross_value(beta, symbol, False)
            if fwd and not bwd:
                below.add(s.one_type_of(b))
            if bwd and not fwd:
                above.add(s.one_type_of(b))
    return EnrichedCountingType.of(theta, above, below)


# ---------------------------------------------------------------------------
# a caching front end


DEFAULT_CLASS_BUDGET = 200_000


class ClassOracle:
    """Caches class admissibility and directional pair types for one sentence.

    Large counting types are first cut at :func:`class_size_bound`, which
    preserves the verdict; the cached witness then realizes the cut type.
    """

    def __init__(self, nf: NFSentence, budget: int = DEFAULT_CLASS_BUDGET) -> None:
        self.nf = nf
        self.grouping = group(nf)
        self.context = TypeContext(nf.signature, self.grouping.phi_univ)
        self.budget = budget
        self._status: Dict[Tuple[CountingType, str], Tuple[str, Optional[ClassWitness]]] = {}
        self._bounds: Dict[str, int] = {}
        self._strict: Dict[
            Tuple[str, OneType, OneType, bool, Optional[str]], Optional[TwoType]
        ] = {}
        self._pairs: Dict[Tuple[str, OneType, OneType], Tuple[TwoType, ...]] = {}

    def size_bound(self, symbol: str) -> int:
        if symbol not in self._bounds:
            self._bounds[symbol] = class_size_bound(
                self.context, self.grouping, symbol
            )
        return self._bounds[symbol]

    def status(
        self, theta: CountingType, symbol: str
    ) -> Tuple[str, Optional[ClassWitness]]:
        """One of ("yes", witness), ("no", None), ("budget", None)."""
        reduced = cut(theta, self.size_bound(symbol))
        key = (reduced, symbol)
        if key not in self._status:
            try:
                witness = is_class_admissible(
                    self.context, self.grouping, reduced, symbol, self.budget
                )
            except ClassSearchBudget:
                self._status[key] = ("budget", None)
            else:
                self._status[key] = ("yes", witness) if witness else ("no", None)
        return self._status[key]

    def admissible(self, theta: CountingType, symbol: str) -> Optional[bool]:
        """True, False, or None when the search ran out of budget."""
        state, _ = self.status(theta, symbol)
        if state == "budget":
            return None
        return state == "yes"

    def witness(self, theta: CountingType, symbol: str) -> Optional[ClassWitness]:
        return self.status(theta, symbol)[1]

    def class_pairs(
        self, symbol: str, alpha: OneType, alpha_prime: OneType
    ) -> Tuple[TwoType, ...]:
        """Cached admissible within-class two-types between two one-types."""
        key = (symbol, alpha, alpha_prime)
        if key not in self._pairs:
            self._pairs[key] = tuple(
                class_pair_candidates(self.context, symbol, alpha, alpha_prime)
            )
        return self._pairs[key]

    def strict_pair(
        self,
        symbol: str,
        alpha: OneType,
        alpha_prime: OneType,
        down: bool = True,
        matrix: Optional[Formula] = None,
    ) -> Optional[TwoType]:
        matrix_key = pretty(matrix) if matrix is not None else None
        key = (symbol, alpha, alpha_prime, down, matrix_key)
        if key not in self._strict:
            self._strict[key] = strict_pair_type(
                self.context, symbol, alpha, alpha_prime, down, matrix
            )
        return self._strict[key]


def is_enriched_admissible(
    oracle: ClassOracle, enriched: EnrichedCountingType, symbol: str
) -> str:
    """Whether an enriched counting type is admissible for a preorder symbol.

    Returns "yes", "no", or "budget".  Admissibility requires the counting
    type to be class-admissible for the symbol, every (member, below) and
    (member, above) pair to carry an admissible strict edge, and every
    strict-edge witness conjunct triggered by a member to find a witness
    type on the matching side.
    """
    ctx = oracle.context
    grouping = oracle.grouping
    state, _ = oracle.status(enriched.theta, symbol)
    if state != "yes":
        return state
    support = enriched.theta.support
    for alpha in support:
        for alpha_prime in enriched.below:
            if oracle.strict_pair(symbol, alpha, alpha_prime, down=True) is None:
                return "no"
        for alpha_prime in enriched.above:
            if oracle.strict_pair(symbol, alpha, alpha_prime, down=False) is None:
                return "no"
    for c in directional_fe_conjuncts(grouping, symbol, Orientation.DOWN):
        for alpha in support:
            if not ctx.eval_one(c.trigger, alpha):
                continue
            if not any(
                oracle.strict_pair(symbol, alpha, ap, True, c.matrix) is not None
                for ap in enriched.below
            ):
                return "no"
    for c in directional_fe_conjuncts(grouping, symbol, Orientation.UP):
        for alpha in support:
            if not ctx.eval_one(c.trigger, alpha):
                continue
            if not any(
                oracle.strict_pair(symbol, alpha, ap, False, c.matrix) is not None
                for ap in enriched.above
            ):
                return "no"
    return "yes"
