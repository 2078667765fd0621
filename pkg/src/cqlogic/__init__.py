"""Finite-carrier workbench for co-quantale valued logic.

Validates value co-quantales, evaluates formulas over finite structures
with distances in them, infers moduli of uniform continuity, and verifies
the model-theoretic transfer theorems (Tarski-Vaught, Łoś, compactness) by
exhaustive computation.
"""

__version__ = "0.1.0"
