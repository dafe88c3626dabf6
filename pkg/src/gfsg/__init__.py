"""Finite satisfiability for the two-variable guarded fragment with
equivalence, transitive, preorder, partial-equivalence, and partial-order
guards: solver, certificates, and explicit finite-model construction."""

__version__ = "0.1.0"
