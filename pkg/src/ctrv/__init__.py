"""ctrv: compositional contract refinement verifier.

Component contracts are expressed in two logics (past-time LTL for event
protocols, many-sorted FOL over finite universes for data properties),
decompositions generate the standard n+1 refinement obligations, and the
obligations are discharged by built-in SAT-based engines.
"""

__version__ = "0.1.0"
