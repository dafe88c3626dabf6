"""Random well-formed guarded problems for differential testing.

Generation is template-based so every emitted problem passes validation by
construction: quantified blocks always start with a guard atom covering the
free variables of the rest, and constrained symbols appear only in guards.
"""

import random

from gfsg.syntax import (
    And,
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
    SpecialKind,
    parse_problem,
    pretty,
)

_KINDS = list(SpecialKind)


def random_signature(rng: random.Random, max_unary=3, max_binary=1, max_special=2,
                     kinds=None) -> Signature:
    unary = tuple("ABC"[: rng.randint(1, max_unary)])
    binary = ("R",) if max_binary and rng.random() < 0.5 else ()
    pool = kinds if kinds is not None else _KINDS
    special = tuple(
        (name, rng.choice(pool))
        for name in ("S1", "S2")[: rng.randint(0, max_special)]
    )
    return Signature(unary=unary, binary=binary, special=special)


class _Gen:
    def __init__(self, rng: random.Random, sig: Signature, allow_eq: bool, depth: int):
        self.rng = rng
        self.sig = sig
        self.allow_eq = allow_eq
        self.depth = depth
        self.plain_binaries = sig.binary
        self.guard_binaries = sig.binary + sig.special_names

    def atom_one(self, v: str) -> Formula:
        choices = [Pred(u, (v,)) for u in self.sig.unary]
        choices += [Pred(b, (v, v)) for b in self.plain_binaries]
        return self.rng.choice(choices)

    def atom_two(self) -> Formula:
        choices = [Pred(u, (self.rng.choice("xy"),)) for u in self.sig.unary]
        for b in self.plain_binaries:
            choices += [Pred(b, ("x", "y")), Pred(b, ("y", "x")),
                        Pred(b, ("x", "x")), Pred(b, ("y", "y"))]
        if self.allow_eq:
            choices.append(Eq("x", "y"))
        return self.rng.choice(choices)

    def guard_atom_one(self, v: str) -> Formula:
        choices = [Pred(u, (v,)) for u in self.sig.unary]
        choices += [Pred(b, (v, v)) for b in self.guard_binaries]
        choices.append(Eq(v, v))
        return self.rng.choice(choices)

    def guard_atom_two(self) -> Formula:
        choices = []
        for b in self.guard_binaries:
            choices += [Pred(b, ("x", "y")), Pred(b, ("y", "x"))]
        if not choices:
            choices.append(Eq("x", "y"))
        return self.rng.choice(choices)

    def qf(self, vars: tuple, depth: int) -> Formula:
        if depth <= 0 or self.rng.random() < 0.35:
            atom = self.atom_one(self.rng.choice(vars)) if len(vars) == 1 else self.atom_two()
            return Not(atom) if self.rng.random() < 0.3 else atom
        op = self.rng.choice([And, Or, Implies, Iff])
        return op(self.qf(vars, depth - 1), self.qf(vars, depth - 1))

    def body_with_optional_nesting(self, v: str, depth: int) -> Formula:
        """A formula over one free variable, possibly with guarded quantified
        subformulas inside."""
        if depth > 0 and self.rng.random() < 0.3:
            other = "y" if v == "x" else "x"
            guard = self.guard_atom_two()
            inner = self.qf((other,), depth - 1)
            if self.rng.random() < 0.6:
                sub: Formula = Exists(other, And(guard, inner))
            else:
                sub = Forall(other, Implies(guard, inner))
            outer = self.qf((v,), depth - 1)
            return self.rng.choice([And, Or, Implies])(outer, sub)
        return self.qf((v,), depth)

    def block(self, depth: int) -> Formula:
        roll = self.rng.random()
        if roll < 0.3:  # existential, one variable
            v = self.rng.choice("xy")
            return Exists(v, And(self.guard_atom_one(v), self.qf((v,), depth)))
        if roll < 0.5:  # universal, one variable
            v = self.rng.choice("xy")
            return Forall(v, Implies(self.guard_atom_one(v),
                                     self.body_with_optional_nesting(v, depth)))
        if roll < 0.7:  # universal pair
            first, second = ("x", "y") if self.rng.random() < 0.7 else ("y", "x")
            return Forall(first, Forall(second,
                                        Implies(self.guard_atom_two(), self.qf(("x", "y"), depth))))
        if roll < 0.9:  # witness demand
            v, other = ("x", "y") if self.rng.random() < 0.7 else ("y", "x")
            return Forall(v, Implies(self.guard_atom_one(v),
                                     Exists(other, And(self.guard_atom_two(),
                                                       self.qf(("x", "y"), depth)))))
        # existential pair
        first, second = ("x", "y") if self.rng.random() < 0.7 else ("y", "x")
        return Exists(first, Exists(second,
                                    And(self.guard_atom_two(), self.qf(("x", "y"), depth))))

    def sentence(self, depth: int) -> Formula:
        roll = self.rng.random()
        if roll < 0.6:
            return self.block(depth)
        if roll < 0.75:
            return Not(self.block(depth - 1))
        if roll < 0.9:
            return Or(self.block(depth - 1), self.block(depth - 1))
        return Iff(self.block(depth - 1), self.block(depth - 1))


def random_problem(rng: random.Random, max_unary=3, max_binary=1, max_special=2,
                   depth=3, allow_eq=True, kinds=None, n_sentences=None) -> Problem:
    sig = random_signature(rng, max_unary, max_binary, max_special, kinds)
    gen = _Gen(rng, sig, allow_eq, depth)
    count = n_sentences if n_sentences is not None else rng.randint(1, 3)
    sentences = [gen.sentence(depth) for _ in range(count)]
    text_sig = []
    if sig.unary:
        text_sig.append("unary " + ", ".join(sig.unary) + ";")
    if sig.binary:
        text_sig.append("binary " + ", ".join(sig.binary) + ";")
    for name, kind in sig.special:
        text_sig.append(f"{kind.value} {name};")
    text = (
        "sig { " + " ".join(text_sig) + " }\nformula {\n  "
        + ";\n  ".join(pretty(s) for s in sentences)
        + ";\n}\n"
    )
    return parse_problem(text)
