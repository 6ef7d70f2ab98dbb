"""Error types shared across the pipeline.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
anything else -> 4.
"""


class ConfigError(Exception):
    """Invalid configuration: bad parameter values, incommensurable grids."""


class DataError(Exception):
    """Invalid input data: malformed files, schema violations, empty crops."""
