"""Atomic 1-types and 2-types over a signature, and their admissibility.

A 1-type fixes the truth value of every atom in one variable: unary atoms
P(x) and self-loops B(x,x) for every binary symbol (constrained or not).  A
2-type consists of two 1-types plus the truth values of all cross atoms
B(x,y), B(y,x); it implicitly describes a pair of *distinct* elements.

Both are represented as fixed-width bit vectors laid out in signature order,
which makes enumeration deterministic and hashing cheap.  All interpretation
of bits goes through a TypeContext so the x/y orientation is handled in one
place.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from .syntax import (
    And,
    Const,
    Eq,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Pred,
    Signature,
)
from .normal_form import NFConjunct


@dataclass(frozen=True, order=True)
class OneType:
    """Bit vector over unary atoms and binary self-loops."""

    bits: int


@dataclass(frozen=True, order=True)
class TwoType:
    """Two 1-type components plus a bit vector of cross atoms.

    Cross bit 2*j holds B_j(x,y) and bit 2*j + 1 holds B_j(y,x), where j
    indexes the binary symbols in signature order (plain ones first).
    """

    alpha: OneType
    alpha_prime: OneType
    cross: int


class TypeContext:
    """Layout, enumeration, evaluation and admissibility for one signature.

    When ``universal`` conjuncts are supplied (the purely universal part of a
    normal-form sentence), admissibility queries are answered against them
    and memoized.
    """

    def __init__(
        self,
        signature: Signature,
        universal: Sequence[NFConjunct] = (),
    ) -> None:
        self.signature = signature
        self.universal = tuple(universal)
        self.unaries: tuple = signature.unary
        self.binaries: tuple = signature.binary + signature.special_names
        self.kinds = dict(signature.special)
        self._unary_index = {name: i for i, name in enumerate(self.unaries)}
        self._binary_index = {name: i for i, name in enumerate(self.binaries)}
        self.one_width = len(self.unaries) + len(self.binaries)
        self.cross_width = 2 * len(self.binaries)
        self._adm1: dict = {}
        self._adm2: dict = {}

    # -- layout ------------------------------------------------------------

    def one_count(self) -> int:
        return 1 << self.one_width

    def all_one_types(self) -> list:
        return [OneType(bits) for bits in range(self.one_count())]

    def unary_value(self, alpha: OneType, name: str) -> bool:
        return bool(alpha.bits >> self._unary_index[name] & 1)

    def self_loop(self, alpha: OneType, name: str) -> bool:
        return bool(alpha.bits >> (len(self.unaries) + self._binary_index[name]) & 1)

    def make_one_type(
        self, unaries: Iterable[str] = (), self_loops: Iterable[str] = ()
    ) -> OneType:
        bits = 0
        for name in unaries:
            bits |= 1 << self._unary_index[name]
        for name in self_loops:
            bits |= 1 << (len(self.unaries) + self._binary_index[name])
        return OneType(bits)

    def cross_value(self, beta: TwoType, name: str, forward: bool) -> bool:
        j = self._binary_index[name]
        return bool(beta.cross >> (2 * j + (0 if forward else 1)) & 1)

    def make_two_type(
        self,
        alpha: OneType,
        alpha_prime: OneType,
        cross_atoms: Iterable = (),
    ) -> TwoType:
        cross = 0
        for name, forward in cross_atoms:
            cross |= 1 << (2 * self._binary_index[name] + (0 if forward else 1))
        return TwoType(alpha, alpha_prime, cross)

    def all_two_types(self, alpha: OneType, alpha_prime: OneType) -> Iterator[TwoType]:
        for cross in range(1 << self.cross_width):
            yield TwoType(alpha, alpha_prime, cross)

    def transpose(self, beta: TwoType) -> TwoType:
        cross = 0
        for j in range(len(self.binaries)):
            fwd = beta.cross >> 2 * j & 1
            bwd = beta.cross >> (2 * j + 1) & 1
            cross |= bwd << 2 * j | fwd << (2 * j + 1)
        return TwoType(beta.alpha_prime, beta.alpha, cross)

    def cross_positive_symbols(self, beta: TwoType) -> set:
        found = set()
        for j, name in enumerate(self.binaries):
            if beta.cross >> 2 * j & 1 or beta.cross >> (2 * j + 1) & 1:
                found.add(name)
        return found

    # -- evaluation --------------------------------------------------------

    def eval_one(self, f: Formula, alpha: OneType) -> bool:
        """Evaluate a quantifier-free formula with every variable mapped to
        the single element described by ``alpha``."""
        if isinstance(f, Pred):
            if len(f.args) == 1:
                return self.unary_value(alpha, f.name)
            return self.self_loop(alpha, f.name)
        if isinstance(f, Eq):
            return True
        if isinstance(f, Const):
            return f.value
        if isinstance(f, Not):
            return not self.eval_one(f.sub, alpha)
        if isinstance(f, And):
            return self.eval_one(f.left, alpha) and self.eval_one(f.right, alpha)
        if isinstance(f, Or):
            return self.eval_one(f.left, alpha) or self.eval_one(f.right, alpha)
        if isinstance(f, Implies):
            return not self.eval_one(f.left, alpha) or self.eval_one(f.right, alpha)
        if isinstance(f, Iff):
            return self.eval_one(f.left, alpha) == self.eval_one(f.right, alpha)
        raise TypeError(f"not quantifier-free: {f!r}")

    def eval_two(self, f: Formula, beta: TwoType) -> bool:
        """Evaluate a quantifier-free formula with x, y mapped to the two
        distinct elements described by ``beta`` (x first, y second)."""
        if isinstance(f, Pred):
            if len(f.args) == 1:
                side = beta.alpha if f.args[0] == "x" else beta.alpha_prime
                return self.unary_value(side, f.name)
            a, b = f.args
            if a == b:
                side = beta.alpha if a == "x" else beta.alpha_prime
                return self.self_loop(side, f.name)
            return self.cross_value(beta, f.name, forward=(a, b) == ("x", "y"))
        if isinstance(f, Eq):
            return f.left == f.right
        if isinstance(f, Const):
            return f.value
        if isinstance(f, Not):
            return not self.eval_two(f.sub, beta)
        if isinstance(f, And):
            return self.eval_two(f.left, beta) and self.eval_two(f.right, beta)
        if isinstance(f, Or):
            return self.eval_two(f.left, beta) or self.eval_two(f.right, beta)
        if isinstance(f, Implies):
            return not self.eval_two(f.left, beta) or self.eval_two(f.right, beta)
        if isinstance(f, Iff):
            return self.eval_two(f.left, beta) == self.eval_two(f.right, beta)
        raise TypeError(f"not quantifier-free: {f!r}")

    # -- semantic constraints of the constrained kinds ----------------------

    def is_special_one(self, alpha: OneType) -> bool:
        """The one-element structure of ``alpha`` satisfies every kind axiom."""
        for name, kind in self.signature.special:
            if kind.reflexive and not self.self_loop(alpha, name):
                return False
        return True

    def is_special_two(self, beta: TwoType) -> bool:
        """The two-element structure of ``beta`` satisfies every kind axiom."""
        if not (self.is_special_one(beta.alpha) and self.is_special_one(beta.alpha_prime)):
            return False
        for name, kind in self.signature.special:
            fwd = self.cross_value(beta, name, True)
            bwd = self.cross_value(beta, name, False)
            if kind.symmetric and fwd != bwd:
                return False
            if kind.antisymmetric and fwd and bwd:
                return False
            if fwd and bwd:
                # two-element transitivity closes both self-loops
                if not (self.self_loop(beta.alpha, name) and self.self_loop(beta.alpha_prime, name)):
                    return False
        return True

    # -- admissibility -------------------------------------------------------

    def is_univ_admissible_1(self, alpha: OneType) -> bool:
        cached = self._adm1.get(alpha.bits)
        if cached is None:
            cached = self._compute_adm1(alpha)
            self._adm1[alpha.bits] = cached
        return cached

    def _compute_adm1(self, alpha: OneType) -> bool:
        if not self.is_special_one(alpha):
            return False
        for c in self.universal:
            if self.eval_one(c.guard_formula(), alpha) and not self.eval_one(c.matrix, alpha):
                return False
        return True

    def is_univ_admissible_2(self, beta: TwoType) -> bool:
        key = (beta.alpha.bits, beta.alpha_prime.bits, beta.cross)
        cached = self._adm2.get(key)
        if cached is None:
            cached = self._compute_adm2(beta)
            self._adm2[key] = cached
        return cached

    def _compute_adm2(self, beta: TwoType) -> bool:
        if not self.is_special_two(beta):
            return False
        if not (self.is_univ_admissible_1(beta.alpha) and self.is_univ_admissible_1(beta.alpha_prime)):
            return False
        for pair in (beta, self.transpose(beta)):
            for c in self.universal:
                if self.eval_two(c.guard_formula(), pair) and not self.eval_two(c.matrix, pair):
                    return False
        return True

    # -- splices -------------------------------------------------------------

    def splice(self, beta: TwoType, symbol: Optional[str]) -> TwoType:
        """Negate the cross atoms of every constrained symbol except ``symbol``."""
        cross = beta.cross
        for name in self.signature.special_names:
            if name == symbol:
                continue
            j = self._binary_index[name]
            cross &= ~(0b11 << 2 * j)
        return TwoType(beta.alpha, beta.alpha_prime, cross)

    def binary_free(self, alpha: OneType, alpha_prime: OneType) -> TwoType:
        return TwoType(alpha, alpha_prime, 0)

    def is_binary_free(self, beta: TwoType) -> bool:
        return beta.cross == 0

    # -- rendering -----------------------------------------------------------

    def format_one(self, alpha: OneType) -> str:
        pos, neg = [], []
        for name in self.unaries:
            (pos if self.unary_value(alpha, name) else neg).append(name)
        for name in self.binaries:
            (pos if self.self_loop(alpha, name) else neg).append(name + "xx")
        return "{" + ", ".join(pos + ["!" + lit for lit in neg]) + "}"

    def format_two(self, beta: TwoType) -> str:
        pos, neg = [], []
        for name in self.binaries:
            (pos if self.cross_value(beta, name, True) else neg).append(name + "xy")
            (pos if self.cross_value(beta, name, False) else neg).append(name + "yx")
        cross = ", ".join(pos + ["!" + lit for lit in neg])
        return f"{self.format_one(beta.alpha)} | {self.format_one(beta.alpha_prime)} | {{{cross}}}"


# ---------------------------------------------------------------------------
# Free-standing wrappers over a throwaway context
# ---------------------------------------------------------------------------


def enumerate_one_types(signature: Signature) -> list:
    return TypeContext(signature).all_one_types()


def is_univ_admissible_1(alpha: OneType, universal, signature: Signature) -> bool:
    return TypeContext(signature, universal).is_univ_admissible_1(alpha)


def is_univ_admissible_2(beta: TwoType, universal, signature: Signature) -> bool:
    return TypeContext(signature, universal).is_univ_admissible_2(beta)


def splice(beta: TwoType, symbol: Optional[str], signature: Signature) -> TwoType:
    return TypeContext(signature).splice(beta, symbol)


def binary_free(alpha: OneType, alpha_prime: OneType) -> TwoType:
    return TwoType(alpha, alpha_prime, 0)
