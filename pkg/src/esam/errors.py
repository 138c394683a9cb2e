"""Error types shared across the package.

ValidationError covers every "the input violates the documented contract"
case: malformed config/model/dataset files, out-of-range parameters,
dimension mismatches.  SimulationError flags internal invariant violations
(bugs), which the CLI maps to a distinct exit code.
"""


class ValidationError(ValueError):
    """Input file or parameter violates the documented schema/contract."""


class SimulationError(RuntimeError):
    """An internal simulator invariant was violated."""
