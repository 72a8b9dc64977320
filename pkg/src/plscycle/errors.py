"""Error taxonomy shared across the package.

Each class maps to one CLI exit code: model/data validation problems exit 2,
estimation failures exit 3, and file problems exit 4. Plain ValueError is
reserved for scalar precondition violations and is treated as a validation
failure by the CLI.
"""

from __future__ import annotations


class ModelError(Exception):
    """The model document is malformed or semantically invalid."""


class DataError(Exception):
    """The data table cannot be prepared for estimation."""


class EstimationError(Exception):
    """A numerical estimation step failed (singular system, divergence)."""


class DataFileError(Exception):
    """A file could not be read or parsed into a table."""
