"""Exceptions shared across modules."""

from __future__ import annotations


class TheoremViolation(RuntimeError):
    """An exact check contradicted a statement that should never fail.

    Carries the counterexample; the CLI maps this to exit code 3 so such
    findings are impossible to miss.
    """

    def __init__(self, message: str, **witness):
        super().__init__(message)
        self.witness = dict(witness)
