"""Exception types shared across the package.

The split mirrors how callers have to react: ValidationError means a single
input is malformed or out of range and should be fixed at the source file;
ConsistencyError means each input parses fine but they disagree with each
other (missing measurement, mismatched catalogs, conflicting applicability).
The CLI maps the two onto distinct exit codes.
"""

from __future__ import annotations


class MaturityError(Exception):
    """Base class for every domain error raised by this package."""


class ValidationError(MaturityError):
    """Malformed or out-of-range input data.

    When the error originates from a file, `source` names it and `row` gives
    the 1-based line (counting the header) so the offending record can be
    located directly.
    """

    def __init__(self, message: str, *, source: str | None = None, row: int | None = None):
        self.source = source
        self.row = row
        prefix = ""
        if source is not None and row is not None:
            prefix = f"{source}, row {row}: "
        elif source is not None:
            prefix = f"{source}: "
        super().__init__(prefix + message)


class ConsistencyError(MaturityError):
    """Inputs are individually well-formed but mutually inconsistent."""
