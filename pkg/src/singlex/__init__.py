"""Single-exclusion systems, Turán systems and covering designs.

Constructions, exhaustive verifiers, exact small-instance solvers, bound
evaluators for the single-exclusion number S(n, t), and the link to
stopping sets of MDS parity-check matrices.
"""

__version__ = "0.1.0"
