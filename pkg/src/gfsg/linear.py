"""Linear feasibility over the rationals and integers.

The deciders reduce "does a finite model distribute elements over classes
like this?" to systems of linear equations and inequalities whose unknowns
count classes (X variables) and elements (Y variables).  Such systems have a
scaling property: every equation has constant zero and every inequality a
non-negative constant, so any rational solution scales to an integer one.
This module builds those systems from counting-type tuples, decides rational
feasibility with an exact phase-one simplex (Bland's rule, fractions
throughout), lifts solutions to integers, and extracts basic solutions with
few nonzeros and provably bounded values.  A Fourier-Motzkin eliminator is
included as an independent cross-check for small systems.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .atomic_types import OneType, TypeContext
from .counting import CountingType

EQ = "="
GEQ = ">="


@dataclass(frozen=True)
class Row:
    """One linear constraint: coeffs . x (= | >=) const."""

    coeffs: Tuple[Fraction, ...]
    rel: str
    const: Fraction
    label: str = ""

    def __post_init__(self) -> None:
        assert self.rel in (EQ, GEQ)


@dataclass(frozen=True)
class LinearSystem:
    """A system over named non-negative unknowns.

    With ``positivity`` set, every unknown must be at least one instead of at
    least zero.  ``legend`` maps the short names used inside variable names
    to human-readable descriptions; it is echoed by :func:`dump`.
    """

    variables: Tuple[str, ...]
    rows: Tuple[Row, ...]
    positivity: bool = False
    legend: Tuple[Tuple[str, str], ...] = ()


def make_system(
    variables: Sequence[str],
    rows: Iterable[Tuple[Mapping[str, int], str, int]],
    positivity: bool = False,
    legend: Iterable[Tuple[str, str]] = (),
) -> LinearSystem:
    """Convenience constructor from sparse row descriptions."""
    names = tuple(variables)
    index = {name: k for k, name in enumerate(names)}
    dense_rows = []
    for entry in rows:
        coeffs, rel, const = entry[0], entry[1], entry[2]
        label = entry[3] if len(entry) > 3 else ""
        dense = [Fraction(0)] * len(names)
        for name, c in coeffs.items():
            dense[index[name]] = Fraction(c)
        dense_rows.append(Row(tuple(dense), rel, Fraction(const), label))
    return LinearSystem(names, tuple(dense_rows), positivity, tuple(legend))


def evaluate(system: LinearSystem, values: Mapping[str, object]) -> List[str]:
    """Violated constraints of an assignment; empty means it satisfies."""
    errors = []
    lower = 1 if system.positivity else 0
    for name in system.variables:
        if name not in values:
            errors.append(f"missing value for {name}")
        elif Fraction(values[name]) < lower:
            errors.append(f"{name} = {values[name]} below {lower}")
    if errors:
        return errors
    vec = [Fraction(values[name]) for name in system.variables]
    for k, row in enumerate(system.rows):
        lhs = sum(c * v for c, v in zip(row.coeffs, vec))
        ok = lhs == row.const if row.rel == EQ else lhs >= row.const
        if not ok:
            label = row.label or f"row {k}"
            errors.append(f"{label}: {lhs} {row.rel} {row.const} fails")
    return errors


def dump(system: LinearSystem) -> str:
    """Deterministic text form: legend comments, then one row per line.

    Each row reads ``<coeff>*<var> + ... (=|>=) <const>``; negative
    coefficients use a ``-`` separator, and labelled rows end with a
    ``# label`` comment.
    """
    lines = [f"# {key} = {desc}" for key, desc in system.legend]
    if system.positivity:
        lines.append("# all unknowns >= 1")
    for row in system.rows:
        terms = []
        for c, name in zip(row.coeffs, system.variables):
            if c == 0:
                continue
            terms.append((c, name))
        if not terms:
            body = "0"
        else:
            parts = []
            for k, (c, name) in enumerate(terms):
                mag = f"{abs(c)}*{name}"
                if k == 0:
                    parts.append(mag if c > 0 else f"-{mag}")
                else:
                    parts.append(("+ " if c > 0 else "- ") + mag)
            body = " ".join(parts)
        suffix = f"  # {row.label}" if row.label else ""
        lines.append(f"{body} {row.rel} {row.const}{suffix}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# exact rational feasibility


def _phase_one(
    matrix: List[List[Fraction]], rhs: List[Fraction]
) -> Optional[List[Fraction]]:
    """A basic non-negative solution of matrix . x = rhs, or None.

    Phase-one simplex with artificial variables and Bland's rule; all
    right-hand sides must be non-negative.
    """
    m = len(matrix)
    n = len(matrix[0]) if m else 0
    if m == 0:
        return []
    # tableau columns: n structural, m artificial, then the right-hand side
    width = n + m
    tab = [list(row) + [Fraction(0)] * m + [b] for row, b in zip(matrix, rhs)]
    for i in range(m):
        tab[i][n + i] = Fraction(1)
    basis = list(range(n, n + m))
    # reduced-cost row for minimizing the sum of artificials
    cost = [Fraction(0)] * (width + 1)
    for j in range(width + 1):
        cost[j] = -sum(tab[i][j] for i in range(m))
    for j in range(n, n + m):
        cost[j] += Fraction(1)

    while True:
        entering = next(
            (j for j in range(width) if cost[j] < 0 and j not in basis), None
        )
        if entering is None:
            break
        ratios = [
            (tab[i][width] / tab[i][entering], basis[i], i)
            for i in range(m)
            if tab[i][entering] > 0
        ]
        if not ratios:
            # the artificial objective is bounded below, so this cannot
            # happen; guard against malformed input
            return None
        _, _, pivot_row = min(ratios)
        pivot = tab[pivot_row][entering]
        tab[pivot_row] = [v / pivot for v in tab[pivot_row]]
        for i in range(m):
            if i != pivot_row and tab[i][entering] != 0:
                factor = tab[i][entering]
                tab[i] = [v - factor * p for v, p in zip(tab[i], tab[pivot_row])]
        if cost[entering] != 0:
            factor = cost[entering]
            cost = [v - factor * p for v, p in zip(cost, tab[pivot_row] + [])]
        basis[pivot_row] = entering

    objective = sum(
        tab[i][width] for i in range(m) if basis[i] >= n
    )
    if objective != 0:
        return None
    solution = [Fraction(0)] * n
    for i in range(m):
        if basis[i] < n:
            solution[basis[i]] = tab[i][width]
    return solution


def _standard_form(
    system: LinearSystem,
) -> Tuple[List[List[Fraction]], List[Fraction], int]:
    """Equality standard form with surplus columns; returns (A, b, n)."""
    n = len(system.variables)
    shift = 1 if system.positivity else 0
    surplus = sum(1 for row in system.rows if row.rel == GEQ)
    matrix: List[List[Fraction]] = []
    rhs: List[Fraction] = []
    next_surplus = 0
    for row in system.rows:
        dense = list(row.coeffs) + [Fraction(0)] * surplus
        const = row.const - shift * sum(row.coeffs)
        if row.rel == GEQ:
            dense[n + next_surplus] = Fraction(-1)
            next_surplus += 1
        if const < 0:
            dense = [-v for v in dense]
            const = -const
        matrix.append(dense)
        rhs.append(const)
    return matrix, rhs, n


def solve_rational(system: LinearSystem) -> Optional[Dict[str, Fraction]]:
    """An exact non-negative (or, in positivity mode, at-least-one) rational
    solution, or None when the system is infeasible."""
    matrix, rhs, n = _standard_form(system)
    if not matrix:
        raw: Optional[List[Fraction]] = [Fraction(0)] * n
    else:
        raw = _phase_one(matrix, rhs)
    if raw is None:
        return None
    shift = 1 if system.positivity else 0
    values = {
        name: raw[k] + shift for k, name in enumerate(system.variables)
    }
    assert not evaluate(system, values), "internal: simplex solution invalid"
    return values


def fourier_motzkin_feasible(system: LinearSystem, max_rows: int = 20000) -> bool:
    """Rational feasibility by variable elimination (small systems only)."""
    n = len(system.variables)
    shift = 1 if system.positivity else 0
    rows: List[Tuple[List[Fraction], Fraction]] = []

    def add(coeffs: List[Fraction], const: Fraction) -> None:
        rows.append((coeffs, const))

    for row in system.rows:
        const = row.const - shift * sum(row.coeffs)
        add(list(row.coeffs), const)
        if row.rel == EQ:
            add([-c for c in row.coeffs], -const)
    for k in range(n):
        unit = [Fraction(0)] * n
        unit[k] = Fraction(1)
        add(unit, Fraction(0))

    for k in range(n):
        lowers, uppers, rest = [], [], []
        for coeffs, const in rows:
            c = coeffs[k]
            if c > 0:
                lowers.append(([v / c for v in coeffs], const / c))
            elif c < 0:
                uppers.append(([v / -c for v in coeffs], const / -c))
            else:
                rest.append((coeffs, const))
        rows = rest
        for lc, lb in lowers:
            for uc, ub in uppers:
                coeffs = [a + b for a, b in zip(lc, uc)]
                coeffs[k] = Fraction(0)
                rows.append((coeffs, lb + ub))
                if len(rows) > max_rows:
                    raise RuntimeError("elimination blow-up")
    return all(const <= 0 for _, const in rows)


# ---------------------------------------------------------------------------
# integer solutions


def lift_to_integer(
    system: LinearSystem, values: Mapping[str, Fraction]
) -> Dict[str, int]:
    """Scale a rational solution to an integer one.

    Valid because equations here have constant zero and inequalities
    non-negative constants, so multiplying by a positive integer preserves
    every constraint.
    """
    for row in system.rows:
        if row.rel == EQ and row.const != 0:
            raise ValueError("equations must have constant zero to scale")
        if row.rel == GEQ and row.const < 0:
            raise ValueError("inequalities must have non-negative constants")
    scale = lcm(*(Fraction(values[name]).denominator for name in system.variables)) \
        if system.variables else 1
    lifted = {
        name: int(Fraction(values[name]) * scale) for name in system.variables
    }
    assert not evaluate(system, lifted), "internal: scaled solution invalid"
    return lifted


@dataclass(frozen=True)
class Solution:
    """An integer solution together with its sparsity and size certificate.

    ``nonzeros`` counts variables above the mode's lower bound, so a basic
    solution has at most as many as the system has rows.  ``bound`` is the
    value ceiling ``m * (m * a)^(2m+1)`` for m rows and maximum coefficient
    magnitude a, which every value respects.
    """

    values: Dict[str, int]
    nonzeros: int
    bound: int


def value_bound(system: LinearSystem) -> int:
    m = max(len(system.rows), 1)
    a = 1
    for row in system.rows:
        for c in row.coeffs:
            a = max(a, abs(int(c)))
        a = max(a, abs(int(row.const)))
    return m * (m * a) ** (2 * m + 1)


def bounded_solution(system: LinearSystem) -> Optional[Solution]:
    """A small integer solution from a basic rational one, or None."""
    rational = solve_rational(system)
    if rational is None:
        return None
    lifted = lift_to_integer(system, rational)
    lower = 1 if system.positivity else 0
    nonzeros = sum(1 for v in lifted.values() if v > lower)
    bound = value_bound(system)
    if not system.positivity:
        # basic solutions put at most one nonzero per row; scaling in
        # positivity mode pushes every unknown above its lower bound, so the
        # sparsity claim only applies without the shift
        assert nonzeros <= len(system.rows), "internal: solution is not basic"
    assert all(v <= bound for v in lifted.values()), (
        "internal: solution exceeds the value bound"
    )
    return Solution(lifted, nonzeros, bound)


# ---------------------------------------------------------------------------
# the class-distribution system of a counting-type tuple


def royal_types(
    members: Mapping[str, Sequence[CountingType]], m_value: int
) -> Dict[str, Set[OneType]]:
    """Per symbol: the 1-types that appear but never with a full count.

    A type with a full count (equal to ``m_value``) somewhere may absorb
    extra elements; a royal type's total count is pinned exactly by its
    symbol's class partition.
    """
    out: Dict[str, Set[OneType]] = {}
    for symbol, thetas in members.items():
        appearing: Set[OneType] = set()
        full: Set[OneType] = set()
        for theta in thetas:
            for alpha, k in theta.items:
                appearing.add(alpha)
                if k >= m_value:
                    full.add(alpha)
        out[symbol] = appearing - full
    return out


@dataclass(frozen=True)
class GammaSystem:
    """The distribution system of one counting-type tuple.

    X variables count classes of each member type per symbol; Y variables
    count elements of each 1-type per symbol.  The rows say: Y totals are
    consistent with the classes (per symbol), every appearing 1-type is
    realized (exactly pinned types directly, others through a full-count
    class), pinned totals agree across symbols, and the distinguished member
    is realized.
    """

    system: LinearSystem
    symbols: Tuple[str, ...]
    members: Dict[str, Tuple[CountingType, ...]]
    types: Tuple[OneType, ...]
    x_name: Dict[Tuple[str, int], str]
    y_name: Dict[Tuple[str, OneType], str]
    royal: Dict[str, Set[OneType]]

    def x_value(self, values: Mapping[str, int], symbol: str, k: int) -> int:
        return int(values[self.x_name[(symbol, k)]])

    def y_value(self, values: Mapping[str, int], symbol: str, alpha: OneType) -> int:
        return int(values[self.y_name[(symbol, alpha)]])


def build_gamma(
    members: Mapping[str, Sequence[CountingType]],
    m_value: int,
    distinguished: Tuple[str, CountingType],
    positivity: bool = False,
    ctx: Optional[TypeContext] = None,
) -> GammaSystem:
    """Build the class-distribution system of a counting-type tuple."""
    symbols = tuple(members.keys())
    fixed: Dict[str, Tuple[CountingType, ...]] = {
        s: tuple(members[s]) for s in symbols
    }
    d_symbol, d_theta = distinguished
    if d_theta not in fixed[d_symbol]:
        raise ValueError("distinguished member missing from its symbol")
    types = tuple(sorted({a for ts in fixed.values() for t in ts for a in t.support}))
    type_index = {alpha: k for k, alpha in enumerate(types)}
    royal = royal_types(fixed, m_value)

    variables: List[str] = []
    x_name: Dict[Tuple[str, int], str] = {}
    y_name: Dict[Tuple[str, OneType], str] = {}
    legend: List[Tuple[str, str]] = []
    for symbol in symbols:
        for k, theta in enumerate(fixed[symbol]):
            name = f"X[{symbol},t{k}]"
            x_name[(symbol, k)] = name
            variables.append(name)
            desc = theta.format(ctx) if ctx is not None else repr(theta.items)
            legend.append((f"{symbol},t{k}", desc))
    for symbol in symbols:
        for alpha in types:
            name = f"Y[{symbol},a{type_index[alpha]}]"
            y_name[(symbol, alpha)] = name
            variables.append(name)
    for alpha in types:
        desc = ctx.format_one(alpha) if ctx is not None else repr(alpha)
        legend.append((f"a{type_index[alpha]}", desc))

    rows: List[Tuple[Mapping[str, int], str, int, str]] = []
    for symbol in symbols:
        for alpha in types:
            coeffs: Dict[str, int] = {y_name[(symbol, alpha)]: 1}
            for k, theta in enumerate(fixed[symbol]):
                c = theta.count(alpha)
                if c:
                    coeffs[x_name[(symbol, k)]] = -c
            rows.append(
                (coeffs, EQ, 0, f"count[{symbol},a{type_index[alpha]}]")
            )
    for symbol in symbols:
        for alpha in types:
            if alpha in royal[symbol]:
                rows.append(
                    (
                        {y_name[(symbol, alpha)]: 1},
                        GEQ,
                        1,
                        f"realized[{symbol},a{type_index[alpha]}]",
                    )
                )
            else:
                coeffs = {
                    x_name[(symbol, k)]: 1
                    for k, theta in enumerate(fixed[symbol])
                    if theta.count(alpha) >= m_value
                }
                rows.append(
                    (
                        coeffs,
                        GEQ,
                        1,
                        f"full-class[{symbol},a{type_index[alpha]}]",
                    )
                )
    for symbol in symbols:
        for alpha in types:
            if alpha not in royal[symbol]:
                continue
            for other in symbols:
                if other == symbol:
                    continue
                rows.append(
                    (
                        {
                            y_name[(symbol, alpha)]: 1,
                            y_name[(other, alpha)]: -1,
                        },
                        GEQ,
                        0,
                        f"pinned[{symbol}>{other},a{type_index[alpha]}]",
                    )
                )
    d_index = fixed[d_symbol].index(d_theta)
    rows.append(({x_name[(d_symbol, d_index)]: 1}, GEQ, 1, "distinguished"))

    system = make_system(variables, rows, positivity=positivity, legend=legend)
    return GammaSystem(
        system=system,
        symbols=symbols,
        members=fixed,
        types=types,
        x_name=x_name,
        y_name=y_name,
        royal=royal,
    )
