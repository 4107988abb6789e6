"""Toolchain for a resource-bounded simply-typed lambda calculus:
bound-synthesizing typechecker, costed big-step evaluator, metatheory
property suites, and an exhaustive finite-lattice model checker."""

__version__ = "0.1.0"
